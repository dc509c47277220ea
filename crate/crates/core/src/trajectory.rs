//! Eventually periodic trajectories: a finite prefix followed by a cycle that
//! repeats forever.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Action, GeneralizedMdp, State};

/// `prefix` then `cycle` repeated forever. An empty cycle denotes a finite
/// trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TrajectorySpec {
    pub prefix: Vec<(State, Action)>,
    pub cycle: Vec<(State, Action)>,
}

impl TrajectorySpec {
    pub fn new(prefix: Vec<(State, Action)>, cycle: Vec<(State, Action)>) -> Result<Self> {
        if prefix.is_empty() && cycle.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Ok(Self { prefix, cycle })
    }

    pub fn finite(pairs: Vec<(State, Action)>) -> Result<Self> {
        Self::new(pairs, Vec::new())
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    /// The pair at step `t`, or `None` past the end of a finite trajectory.
    pub fn pair_at(&self, t: usize) -> Option<(State, Action)> {
        if t < self.prefix.len() {
            Some(self.prefix[t])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(t - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// First `n` pairs (fewer if the trajectory is finite and shorter).
    pub fn unroll(&self, n: usize) -> Vec<(State, Action)> {
        (0..n).map_while(|t| self.pair_at(t)).collect()
    }

    /// Actions only, unrolled to `n` steps.
    pub fn actions(&self, n: usize) -> Vec<Action> {
        self.unroll(n).into_iter().map(|(_, a)| a).collect()
    }

    /// Follows `prefix` then repeats `cycle` under deterministic dynamics,
    /// closing the trajectory once a (state, cycle phase) pair recurs.
    pub fn from_actions(mdp: &GeneralizedMdp, start: State, prefix: &[Action], cycle: &[Action]) -> Result<Self> {
        if prefix.is_empty() && cycle.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        check_state(mdp, start)?;
        let mut pairs = Vec::with_capacity(prefix.len() + cycle.len());
        let mut s = start;
        for &a in prefix {
            check_action(mdp, a)?;
            pairs.push((s, a));
            s = mdp.successor(s, a).ok_or(Error::StochasticDynamics)?;
        }
        if cycle.is_empty() {
            return Self::finite(pairs);
        }
        for &a in cycle {
            check_action(mdp, a)?;
        }
        let mut seen: HashMap<(State, usize), usize> = HashMap::new();
        let mut phase = 0;
        loop {
            if let Some(&at) = seen.get(&(s, phase)) {
                let cyc = pairs.split_off(at);
                return Ok(Self { prefix: pairs, cycle: cyc });
            }
            seen.insert((s, phase), pairs.len());
            let a = cycle[phase];
            pairs.push((s, a));
            s = mdp.successor(s, a).ok_or(Error::StochasticDynamics)?;
            phase = (phase + 1) % cycle.len();
        }
    }

    /// Trajectory of a deterministic stationary policy under deterministic
    /// dynamics, closed at the first repeated state.
    pub fn from_stationary(mdp: &GeneralizedMdp, start: State, policy: &[Action]) -> Result<Self> {
        if policy.len() != mdp.n_states() {
            return Err(Error::DimensionMismatch { expected: mdp.n_states(), got: policy.len() });
        }
        check_state(mdp, start)?;
        let mut visited: HashMap<State, usize> = HashMap::new();
        let mut pairs = Vec::new();
        let mut s = start;
        loop {
            if let Some(&at) = visited.get(&s) {
                let cyc = pairs.split_off(at);
                return Ok(Self { prefix: pairs, cycle: cyc });
            }
            visited.insert(s, pairs.len());
            let a = policy[s];
            check_action(mdp, a)?;
            pairs.push((s, a));
            s = mdp.successor(s, a).ok_or(Error::StochasticDynamics)?;
        }
    }

    /// Infers an eventually periodic trajectory from a finite realized run.
    ///
    /// Chooses the split minimizing prefix length plus period among
    /// candidates whose cycle is observed at least twice in full. Falls back
    /// to a finite trajectory when no such period exists.
    pub fn from_realized(pairs: &[(State, Action)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let k = pairs.len();
        let mut best: Option<(usize, usize)> = None;
        for period in 1..=k / 2 {
            // smallest start from which pairs[t] == pairs[t + period] holds
            let mut start = k - period;
            while start > 0 && pairs[start - 1] == pairs[start - 1 + period] {
                start -= 1;
            }
            if k - start < 2 * period {
                continue;
            }
            let cost = start + period;
            if best.is_none_or(|(bs, bp)| cost < bs + bp) {
                best = Some((start, period));
            }
        }
        match best {
            Some((start, period)) => {
                Ok(Self { prefix: pairs[..start].to_vec(), cycle: pairs[start..start + period].to_vec() }.canonical())
            }
            None => Self::finite(pairs.to_vec()),
        }
    }

    /// Minimal representation of the same infinite sequence: the cycle is
    /// reduced to its primitive root and the prefix is shortened as far as
    /// rotating the cycle allows.
    pub fn canonical(&self) -> Self {
        canonicalize(&self.prefix, &self.cycle).into()
    }

    /// Checks that consecutive pairs are connected by positive-probability
    /// transitions, including the wrap from the cycle's end to its start.
    pub fn validate(&self, mdp: &GeneralizedMdp) -> Result<()> {
        if self.prefix.is_empty() && self.cycle.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        for &(s, a) in self.prefix.iter().chain(&self.cycle) {
            check_state(mdp, s)?;
            check_action(mdp, a)?;
        }
        let seq: Vec<_> = self.prefix.iter().chain(&self.cycle).copied().collect();
        let mut links: Vec<((State, Action), State)> = seq.windows(2).map(|w| (w[0], w[1].0)).collect();
        if let (Some(&last), Some(&(first, _))) = (self.cycle.last(), self.cycle.first()) {
            links.push((last, first));
        }
        for ((s, a), next) in links {
            if mdp.transition(s, a)[next] <= 0.0 {
                return Err(Error::InconsistentTrajectory(format!("({s},{a}) cannot reach state {next}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn canonicalize<T: Copy + PartialEq>(prefix: &[T], cycle: &[T]) -> TrajectoryParts<T> {
    let mut cycle = cycle.to_vec();
    let n = cycle.len();
    if let Some(root) = (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| cycle[i] == cycle[i - d])) {
        cycle.truncate(root);
    }
    let mut prefix = prefix.to_vec();
    if !cycle.is_empty() {
        while let (Some(&p), Some(&c)) = (prefix.last(), cycle.last()) {
            if p != c {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
    }
    TrajectoryParts { prefix, cycle }
}

/// Generic prefix/cycle pair, used for canonicalizing both state-action
/// trajectories and bare action sequences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrajectoryParts<T> {
    pub prefix: Vec<T>,
    pub cycle: Vec<T>,
}

impl From<TrajectoryParts<(State, Action)>> for TrajectorySpec {
    fn from(parts: TrajectoryParts<(State, Action)>) -> Self {
        TrajectorySpec { prefix: parts.prefix, cycle: parts.cycle }
    }
}

impl TrajectoryParts<Action> {
    /// Action projection of a trajectory, canonicalized in action space.
    pub fn actions_of(traj: &TrajectorySpec) -> Self {
        let prefix: Vec<Action> = traj.prefix.iter().map(|&(_, a)| a).collect();
        let cycle: Vec<Action> = traj.cycle.iter().map(|&(_, a)| a).collect();
        canonicalize(&prefix, &cycle)
    }
}

fn check_state(mdp: &GeneralizedMdp, s: State) -> Result<()> {
    if s >= mdp.n_states() {
        return Err(Error::InvalidArgument(format!("state {s} out of range")));
    }
    Ok(())
}

fn check_action(mdp: &GeneralizedMdp, a: Action) -> Result<()> {
    if a >= mdp.n_actions() {
        return Err(Error::InvalidArgument(format!("action {a} out of range")));
    }
    Ok(())
}
