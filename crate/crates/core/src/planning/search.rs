use std::collections::HashMap;

use super::stationary::stationary_action_maps;
use super::{strictly_better, PlanConfig};
use crate::aggregation::{Objective, ObjectiveSet, WeightState};
use crate::augmentation::{build_augmented_mdp, y_update, AugmentedMdp, AugmentedState};
use crate::error::{Error, Result};
use crate::model::{Action, GeneralizedMdp, State};
use crate::policy::PolicySpec;
use crate::trajectory::TrajectorySpec;
use crate::valuation::policy_values;

/// How a planned prefix continues after depth `H`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tail {
    /// A deterministic stationary policy, one action per state.
    Stationary(Vec<Action>),
    /// An open-loop action cycle repeated forever.
    Cycle(Vec<Action>),
}

impl Tail {
    /// The tail followed from `start` under deterministic dynamics.
    pub fn trajectory(&self, mdp: &GeneralizedMdp, start: State) -> Result<TrajectorySpec> {
        match self {
            Tail::Stationary(map) => TrajectorySpec::from_stationary(mdp, start, map),
            Tail::Cycle(cycle) => TrajectorySpec::from_actions(mdp, start, &[], cycle),
        }
    }
}

/// Result of a deterministic prefix-tail plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// The searched prefix, exactly `H` actions.
    pub prefix: Vec<Action>,
    pub tail: Tail,
    /// Prefix and tail joined, in canonical form.
    pub trajectory: TrajectorySpec,
    pub value: f64,
}

impl Plan {
    pub fn first_action(&self) -> Action {
        self.trajectory.pair_at(0).expect("plans are nonempty").1
    }
}

/// Contingent plan produced under stochastic dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyTree {
    /// Take `action`, then follow the subtree of whichever state is reached.
    Act { action: Action, children: Vec<(State, PolicyTree)> },
    /// Follow a stationary policy from here on.
    Tail(Vec<Action>),
}

impl PolicyTree {
    /// Action taken at the root (for a tail, at state `s`).
    pub fn first_action(&self, s: State) -> Action {
        match self {
            PolicyTree::Act { action, .. } => *action,
            PolicyTree::Tail(map) => map[s],
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            PolicyTree::Act { children, .. } => 1 + children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0),
            PolicyTree::Tail(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreePlan {
    pub tree: PolicyTree,
    pub value: f64,
}

/// Tail candidates precomputed for an objective set; reusable across plan
/// calls with different weights.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    objs: &'a ObjectiveSet,
    cfg: PlanConfig,
    tails: Vec<Tail>,
    /// Per state: admissible tail indices with per-objective values from that state.
    by_state: Vec<Vec<(usize, Vec<f64>)>>,
}

impl<'a> Planner<'a> {
    /// Under stochastic dynamics only stationary tails are offered.
    pub fn new(objs: &'a ObjectiveSet, cfg: &PlanConfig) -> Result<Self> {
        let dynamics = objs.dynamics();
        let (ns, na) = (dynamics.n_states(), dynamics.n_actions());
        if na == 0 {
            return Err(Error::InvalidModel("no actions".into()));
        }
        let deterministic = dynamics.is_deterministic();
        let mut tails = Vec::new();
        if cfg.stationary_tails {
            tails.extend(stationary_action_maps(ns, na, cfg.enumeration_cap)?.into_iter().map(Tail::Stationary));
        }
        if deterministic && cfg.max_cycle_period > 0 {
            tails.extend(primitive_cycles(na, cfg.max_cycle_period, cfg.enumeration_cap)?.into_iter().map(Tail::Cycle));
        }
        let mut by_state = vec![Vec::new(); ns];
        if deterministic {
            for (k, tail) in tails.iter().enumerate() {
                for (s, slot) in by_state.iter_mut().enumerate() {
                    match objs.returns(&tail.trajectory(dynamics, s)?) {
                        Ok(values) => slot.push((k, values)),
                        Err(Error::DivergentCycle { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        } else {
            for (k, tail) in tails.iter().enumerate() {
                let Tail::Stationary(map) = tail else { continue };
                let policy = PolicySpec::Deterministic(map.clone());
                let per_objective: Result<Vec<Vec<f64>>> =
                    objs.iter().map(|o| policy_values(&o.mdp, &policy)).collect();
                match per_objective {
                    Ok(v) => {
                        for (s, slot) in by_state.iter_mut().enumerate() {
                            slot.push((k, v.iter().map(|col| col[s]).collect()));
                        }
                    }
                    Err(Error::Divergent { .. } | Error::SingularSystem) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(Self { objs, cfg: cfg.clone(), tails, by_state })
    }

    pub fn config(&self) -> &PlanConfig {
        &self.cfg
    }

    pub fn objectives(&self) -> &'a ObjectiveSet {
        self.objs
    }

    /// Best prefix-tail trajectory from `start` scored by `c + Σ w_i y_i V_i`.
    pub fn plan(&self, ws: &WeightState, start: State) -> Result<Plan> {
        let dynamics = self.objs.dynamics();
        if !dynamics.is_deterministic() {
            return Err(Error::StochasticDynamics);
        }
        let mut search = Search::new(self, ws)?;
        let root = search.aug.start(start);
        let value = search.node(0, &root)?;

        let mut st = root;
        let mut prefix = Vec::with_capacity(self.cfg.horizon);
        let mut pairs = Vec::with_capacity(self.cfg.horizon);
        for d in 0..self.cfg.horizon {
            let a = search.choice(d, &st);
            prefix.push(a);
            pairs.push((st.base, a));
            let (next, _) = search.child(&st, a, dynamics.successor(st.base, a).expect("deterministic"))?;
            st = next;
        }
        let tail = self.tails[search.choice(self.cfg.horizon, &st)].clone();
        let rest = tail.trajectory(dynamics, st.base)?;
        pairs.extend(rest.prefix);
        let trajectory = TrajectorySpec { prefix: pairs, cycle: rest.cycle }.canonical();
        Ok(Plan { prefix, tail, trajectory, value: ws.constant + value })
    }

    /// Expectimax to depth `H` with stationary tails.
    pub fn plan_tree(&self, ws: &WeightState, start: State) -> Result<TreePlan> {
        let mut search = Search::new(self, ws)?;
        let root = search.aug.start(start);
        let value = search.node(0, &root)?;
        let tree = search.tree(0, &root)?;
        Ok(TreePlan { tree, value: ws.constant + value })
    }
}

type Key = (usize, State, Vec<u64>);

struct Search<'p, 'a> {
    planner: &'p Planner<'a>,
    aug: AugmentedMdp<'a>,
    memo: HashMap<Key, (f64, usize)>,
    opened: usize,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(planner: &'p Planner<'a>, ws: &WeightState) -> Result<Self> {
        let aug = build_augmented_mdp(planner.objs, ws, planner.cfg.gamma_sigma)?;
        Ok(Self { planner, aug, memo: HashMap::new(), opened: 0 })
    }

    fn key(d: usize, st: &AugmentedState) -> Key {
        (d, st.base, st.y.iter().map(|y| y.to_bits()).collect())
    }

    fn choice(&self, d: usize, st: &AugmentedState) -> usize {
        self.memo[&Self::key(d, st)].1
    }

    /// Successor through `next` and the aggregate discount of the step.
    /// A zero discount leaves the factors as they are.
    fn child(&self, st: &AugmentedState, a: Action, next: State) -> Result<(AugmentedState, f64)> {
        let g = self.aug.discount(st, a)?;
        if g == 0.0 {
            return Ok((AugmentedState { base: next, y: st.y.clone() }, 0.0));
        }
        let y = y_update(&st.y, st.base, a, self.planner.objs, self.aug.strategy(), self.aug.weights())?;
        Ok((AugmentedState { base: next, y }, g))
    }

    fn node(&mut self, d: usize, st: &AugmentedState) -> Result<f64> {
        let key = Self::key(d, st);
        if let Some(&(v, _)) = self.memo.get(&key) {
            return Ok(v);
        }
        let cap = self.planner.cfg.node_cap;
        if self.opened >= cap {
            return Err(Error::CapExceeded { what: "search nodes", count: cap as u128 + 1, cap: cap as u128 });
        }
        self.opened += 1;
        let best = if d == self.planner.cfg.horizon { self.leaf(st)? } else { self.interior(d, st)? };
        self.memo.insert(key, best);
        Ok(best.0)
    }

    fn interior(&mut self, d: usize, st: &AugmentedState) -> Result<(f64, usize)> {
        let dynamics = self.planner.objs.dynamics();
        let mut best: Option<(f64, usize)> = None;
        for a in 0..dynamics.n_actions() {
            let mut future = 0.0;
            let mut g = 0.0;
            for (next, &p) in dynamics.transition(st.base, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let (child, step_g) = self.child(st, a, next)?;
                g = step_g;
                future += p * self.node(d + 1, &child)?;
            }
            let v = self.aug.reward(st, a) + if g == 0.0 { 0.0 } else { g * future };
            if best.is_none_or(|(b, _)| strictly_better(v, b)) {
                best = Some((v, a));
            }
        }
        Ok(best.expect("at least one action"))
    }

    fn leaf(&self, st: &AugmentedState) -> Result<(f64, usize)> {
        let effective: Vec<f64> = self.aug.weights().weights.iter().zip(&st.y).map(|(w, y)| w * y).collect();
        let mut best: Option<(f64, usize)> = None;
        for (k, values) in &self.planner.by_state[st.base] {
            let v: f64 = effective.iter().zip(values).map(|(w, x)| w * x).sum();
            if best.is_none_or(|(b, _)| strictly_better(v, b)) {
                best = Some((v, *k));
            }
        }
        best.ok_or(Error::NoTailCandidates { state: st.base })
    }

    fn tree(&self, d: usize, st: &AugmentedState) -> Result<PolicyTree> {
        let choice = self.choice(d, st);
        if d == self.planner.cfg.horizon {
            let Tail::Stationary(map) = &self.planner.tails[choice] else {
                unreachable!("policy trees use stationary tails")
            };
            return Ok(PolicyTree::Tail(map.clone()));
        }
        let mut children = Vec::new();
        for (next, &p) in self.planner.objs.dynamics().transition(st.base, choice).iter().enumerate() {
            if p > 0.0 {
                let (child, _) = self.child(st, choice, next)?;
                children.push((next, self.tree(d + 1, &child)?));
            }
        }
        Ok(PolicyTree::Act { action: choice, children })
    }
}

/// Every primitive action word of length `1..=max_period`, shortest first,
/// lexicographic within a length. Rotations are distinct words.
fn primitive_cycles(n_actions: usize, max_period: usize, cap: u128) -> Result<Vec<Vec<Action>>> {
    let mut count: u128 = 0;
    let mut power: u128 = 1;
    for _ in 0..max_period {
        power = power.saturating_mul(n_actions as u128);
        count = count.saturating_add(power);
    }
    if count > cap {
        return Err(Error::CapExceeded { what: "tail cycles", count, cap });
    }
    let mut out = Vec::new();
    for p in 1..=max_period {
        let mut word = vec![0; p];
        loop {
            let periodic = (1..p).any(|d| p % d == 0 && (d..p).all(|i| word[i] == word[i - d]));
            if !periodic {
                out.push(word.clone());
            }
            let Some(i) = (0..p).rev().find(|&i| word[i] + 1 < n_actions) else { break };
            word[i] += 1;
            word[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    Ok(out)
}

/// One objective with reward `Σ_i w_i y_i r_i` and discount `γ_Σ` evaluated
/// at the fixed effective weights.
fn scalarized(objs: &ObjectiveSet, ws: &WeightState, cfg: &PlanConfig) -> Result<(ObjectiveSet, WeightState)> {
    let dynamics = objs.dynamics();
    let effective = ws.effective_weights();
    if effective.len() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), got: effective.len() });
    }
    let mut reward = Vec::with_capacity(dynamics.n_states() * dynamics.n_actions());
    let mut discount = Vec::with_capacity(reward.capacity());
    for s in 0..dynamics.n_states() {
        for a in 0..dynamics.n_actions() {
            reward.push(effective.iter().zip(objs.rewards_at(s, a)).map(|(w, r)| w * r).sum());
            discount.push(cfg.gamma_sigma.evaluate(&effective, &objs.discounts_at(s, a))?);
        }
    }
    let mdp = dynamics.with_reward_and_discount(reward, discount)?;
    let set = ObjectiveSet::new(vec![Objective::new("scalarized", mdp)])?;
    Ok((set, WeightState::with_constant(vec![1.0], ws.constant)?))
}

/// Best prefix-tail trajectory under deterministic dynamics.
///
/// `consistent = true` scores candidates by `c + Σ w_i y_i V_i` with each
/// objective discounted by its own table. `consistent = false` scores them
/// by a single Markovian objective that applies `γ_Σ` to the weighted reward
/// sum, which is what a planner without per-objective discounting sees.
pub fn plan_prefix_tail(
    objs: &ObjectiveSet,
    ws: &WeightState,
    start: State,
    cfg: &PlanConfig,
    consistent: bool,
) -> Result<Plan> {
    if consistent {
        Planner::new(objs, cfg)?.plan(ws, start)
    } else {
        let (set, unit) = scalarized(objs, ws, cfg)?;
        Planner::new(&set, cfg)?.plan(&unit, start)
    }
}

/// Expectimax over the same depth for stochastic dynamics.
pub fn plan_expectimax(objs: &ObjectiveSet, ws: &WeightState, start: State, cfg: &PlanConfig) -> Result<TreePlan> {
    Planner::new(objs, cfg)?.plan_tree(ws, start)
}
