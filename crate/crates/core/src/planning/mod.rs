//! Exhaustive planners and the oracles built on them.
//!
//! The prefix-tail planner searches every action prefix of length `H` over
//! the augmented states `(s, y)` and closes each branch with the best tail
//! candidate. Tail candidates are closed under one-step shifts (a stationary
//! policy stays the same policy; an action cycle rotates), so prefixes of
//! length exactly `H` cover all prefixes of length `<= H`.

mod impossibility;
mod replan;
mod search;
mod stationary;

pub use impossibility::{impossibility_check, ImpossibilityInstance, ImpossibilityReport, Verdict};
pub use replan::myopic_replan_simulate;
pub use search::{plan_expectimax, plan_prefix_tail, Plan, Planner, PolicyTree, Tail, TreePlan};
pub use stationary::{
    avg_objective, best_stationary, enumerate_stationary, stationary_action_maps, stationary_distribution,
};

use crate::aggregation::GammaSigma;

/// Largest `|A|^|S|` (or cycle count) enumerated before giving up.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Largest number of distinct search nodes visited by one plan call.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Search space of the prefix-tail planner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    /// Prefix length `H`.
    pub horizon: usize,
    /// Longest action cycle offered as a tail; 0 disables cycle tails.
    pub max_cycle_period: usize,
    /// Offer every deterministic stationary policy as a tail.
    pub stationary_tails: bool,
    pub gamma_sigma: GammaSigma,
    pub node_cap: usize,
    pub enumeration_cap: u128,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            horizon: 30,
            max_cycle_period: 12,
            stationary_tails: true,
            gamma_sigma: GammaSigma::MaxIndividual,
            node_cap: DEFAULT_NODE_CAP,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl PlanConfig {
    pub fn with_horizon(horizon: usize) -> Self {
        Self { horizon, ..Self::default() }
    }
}

/// Relative tolerance under which two scores count as tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// `candidate` beats `incumbent` by more than the tie tolerance.
pub(crate) fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate > incumbent + TIE_TOL * incumbent.abs().max(1.0)
}
