//! Counter expansion for "trigger only after N-1 quiet steps" rewards.

use std::collections::HashMap;

use crate::aggregation::{Objective, ObjectiveSet};
use crate::error::{Error, Result};
use crate::model::{Action, GeneralizedMdp, State};
use crate::trajectory::TrajectorySpec;

/// Pays `reward` for `trigger` when the trigger was not taken in the last
/// `window - 1` steps. Discounted by a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCounterObjective {
    pub name: String,
    pub trigger: Action,
    pub reward: f64,
    pub window: usize,
    pub discount: f64,
}

/// Index map between base states and `(base, counter)` lifted states.
///
/// The counter saturates at `window - 1`; taking the trigger resets it to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterLift {
    pub base_states: usize,
    pub window: usize,
    pub trigger: Action,
}

impl CounterLift {
    pub fn n_states(&self) -> usize {
        self.base_states * self.window
    }

    pub fn state(&self, base: State, counter: usize) -> State {
        debug_assert!(counter < self.window);
        base * self.window + counter
    }

    /// Lifted start: an empty history counts as a full quiet window.
    pub fn initial(&self, base: State) -> State {
        self.state(base, self.window - 1)
    }

    pub fn base_of(&self, lifted: State) -> State {
        lifted / self.window
    }

    pub fn counter_of(&self, lifted: State) -> usize {
        lifted % self.window
    }

    pub fn next_counter(&self, counter: usize, a: Action) -> usize {
        if a == self.trigger {
            0
        } else {
            (counter + 1).min(self.window - 1)
        }
    }

    /// Maps a base trajectory into the lifted space, starting from `counter`.
    pub fn lift_trajectory(&self, traj: &TrajectorySpec, counter: usize) -> Result<TrajectorySpec> {
        if traj.prefix.is_empty() && traj.cycle.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        let mut c = counter;
        let mut pairs = Vec::new();
        for &(s, a) in &traj.prefix {
            pairs.push((self.state(s, c), a));
            c = self.next_counter(c, a);
        }
        if traj.cycle.is_empty() {
            return TrajectorySpec::finite(pairs);
        }
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut phase = 0;
        loop {
            if let Some(&at) = seen.get(&(phase, c)) {
                let cycle = pairs.split_off(at);
                return Ok(TrajectorySpec { prefix: pairs, cycle });
            }
            seen.insert((phase, c), pairs.len());
            let (s, a) = traj.cycle[phase];
            pairs.push((self.state(s, c), a));
            c = self.next_counter(c, a);
            phase = (phase + 1) % traj.cycle.len();
        }
    }

    /// Drops the counters from a lifted trajectory.
    pub fn project_trajectory(&self, traj: &TrajectorySpec) -> TrajectorySpec {
        let proj = |v: &[(State, Action)]| v.iter().map(|&(s, a)| (self.base_of(s), a)).collect();
        TrajectorySpec { prefix: proj(&traj.prefix), cycle: proj(&traj.cycle) }.canonical()
    }
}

/// Base objectives re-expressed on the lifted states, plus the window objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedObjectives {
    pub base: Vec<Objective>,
    pub window: Objective,
    pub lift: CounterLift,
}

impl LiftedObjectives {
    /// Base objectives first, window objective last.
    pub fn into_set(self) -> Result<ObjectiveSet> {
        let mut all = self.base;
        all.push(self.window);
        ObjectiveSet::new(all)
    }
}

pub fn lift_window_counter(rule: &WindowCounterObjective, base: &ObjectiveSet) -> Result<LiftedObjectives> {
    if rule.window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let dynamics = base.dynamics();
    if rule.trigger >= dynamics.n_actions() {
        return Err(Error::InvalidArgument(format!("trigger action {} out of range", rule.trigger)));
    }
    let lift = CounterLift { base_states: dynamics.n_states(), window: rule.window, trigger: rule.trigger };
    let (ns, na) = (lift.n_states(), dynamics.n_actions());

    let mut transition = Vec::with_capacity(ns * na);
    for lifted in 0..ns {
        let (s, c) = (lift.base_of(lifted), lift.counter_of(lifted));
        for a in 0..na {
            let c_next = lift.next_counter(c, a);
            let mut row = vec![0.0; ns];
            for (s_next, &p) in dynamics.transition(s, a).iter().enumerate() {
                row[lift.state(s_next, c_next)] = p;
            }
            transition.push(row);
        }
    }
    let lifted_table = |f: &dyn Fn(State, Action) -> f64| -> Vec<f64> {
        (0..ns).flat_map(|l| (0..na).map(move |a| (l, a))).map(|(l, a)| f(lift.base_of(l), a)).collect()
    };

    let mut lifted_base = Vec::with_capacity(base.len());
    for obj in base.iter() {
        let mdp = GeneralizedMdp::new(
            ns,
            na,
            transition.clone(),
            lifted_table(&|s, a| obj.mdp.reward(s, a)),
            lifted_table(&|s, a| obj.mdp.discount(s, a)),
        )?;
        lifted_base.push(Objective::new(obj.name.clone(), mdp));
    }
    let reward: Vec<f64> = (0..ns)
        .flat_map(|l| (0..na).map(move |a| (l, a)))
        .map(|(l, a)| if a == rule.trigger && lift.counter_of(l) >= rule.window - 1 { rule.reward } else { 0.0 })
        .collect();
    let window_mdp = GeneralizedMdp::new(ns, na, transition, reward, vec![rule.discount; ns * na])?;
    Ok(LiftedObjectives { base: lifted_base, window: Objective::new(rule.name.clone(), window_mdp), lift })
}
