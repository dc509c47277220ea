//! Generalized MDPs: finite state and action sets with a discount that may
//! depend on the state-action pair.

use crate::error::{Error, Result};

pub type State = usize;
pub type Action = usize;

/// Row-sum tolerance for transition distributions.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A finite MDP whose discount is a table over state-action pairs.
///
/// Tables are stored flat, indexed by `state * n_actions + action`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<Vec<f64>>,
    reward: Vec<f64>,
    discount: Vec<f64>,
}

impl GeneralizedMdp {
    /// Builds a model from flat tables. Only shapes are checked here; use
    /// [`GeneralizedMdp::validate`] for the content invariants.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<Vec<f64>>,
        reward: Vec<f64>,
        discount: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidModel("state and action sets must be nonempty".into()));
        }
        let pairs = n_states * n_actions;
        for (len, _name) in [(transition.len(), "transition"), (reward.len(), "reward"), (discount.len(), "discount")] {
            if len != pairs {
                return Err(Error::DimensionMismatch { expected: pairs, got: len });
            }
        }
        if let Some(row) = transition.iter().find(|row| row.len() != n_states) {
            return Err(Error::DimensionMismatch { expected: n_states, got: row.len() });
        }
        Ok(Self { n_states, n_actions, transition, reward, discount })
    }

    /// Deterministic dynamics given by a successor table.
    pub fn deterministic(
        n_states: usize,
        n_actions: usize,
        successor: &[State],
        reward: Vec<f64>,
        discount: Vec<f64>,
    ) -> Result<Self> {
        if successor.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch { expected: n_states * n_actions, got: successor.len() });
        }
        let mut transition = Vec::with_capacity(successor.len());
        for &next in successor {
            if next >= n_states {
                return Err(Error::InvalidModel(format!("successor {next} out of range")));
            }
            let mut row = vec![0.0; n_states];
            row[next] = 1.0;
            transition.push(row);
        }
        Self::new(n_states, n_actions, transition, reward, discount)
    }

    /// Same dynamics, new reward and discount tables.
    pub fn with_reward_and_discount(&self, reward: Vec<f64>, discount: Vec<f64>) -> Result<Self> {
        Self::new(self.n_states, self.n_actions, self.transition.clone(), reward, discount)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    fn idx(&self, s: State, a: Action) -> usize {
        debug_assert!(s < self.n_states && a < self.n_actions);
        s * self.n_actions + a
    }

    pub fn transition(&self, s: State, a: Action) -> &[f64] {
        &self.transition[self.idx(s, a)]
    }

    pub fn reward(&self, s: State, a: Action) -> f64 {
        self.reward[self.idx(s, a)]
    }

    pub fn discount(&self, s: State, a: Action) -> f64 {
        self.discount[self.idx(s, a)]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discount
    }

    /// The unique successor when the transition row is a point mass.
    pub fn successor(&self, s: State, a: Action) -> Option<State> {
        let row = self.transition(s, a);
        let mut found = None;
        for (next, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if (p - 1.0).abs() <= ROW_SUM_TOL && found.is_none() {
                found = Some(next);
            } else {
                return None;
            }
        }
        found
    }

    pub fn is_deterministic(&self) -> bool {
        (0..self.n_states).all(|s| (0..self.n_actions).all(|a| self.successor(s, a).is_some()))
    }

    /// True when both models share state/action sets and the transition kernel.
    pub fn same_dynamics(&self, other: &GeneralizedMdp) -> bool {
        self.n_states == other.n_states && self.n_actions == other.n_actions && self.transition == other.transition
    }

    /// Largest absolute reward.
    pub fn reward_bound(&self) -> f64 {
        self.reward.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    /// Lists violated invariants without failing.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.transition(s, a);
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                    issues.push(format!("transition({s},{a}) has a negative or non-finite entry"));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    issues.push(format!("transition({s},{a}) sums to {sum}, not 1"));
                }
                let r = self.reward(s, a);
                if !r.is_finite() {
                    issues.push(format!("reward({s},{a}) is not finite"));
                }
                let g = self.discount(s, a);
                if !g.is_finite() || g < 0.0 {
                    issues.push(format!("discount({s},{a}) = {g} is not a nonnegative real"));
                }
            }
        }
        let divergent_states = if issues.is_empty() { self.unit_product_cycle_states() } else { Vec::new() };
        ValidationReport { issues, divergent_states }
    }

    /// Errors with the first violated invariant.
    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().issues.into_iter().next() {
            Some(issue) => Err(Error::InvalidModel(issue)),
            None => Ok(()),
        }
    }

    /// States lying on some cycle of the positive-probability graph whose
    /// discount product is at least one.
    ///
    /// Max-plus Floyd-Warshall over log-discounts; a nonnegative diagonal
    /// entry witnesses such a cycle.
    fn unit_product_cycle_states(&self) -> Vec<State> {
        let n = self.n_states;
        let mut dist = vec![f64::NEG_INFINITY; n * n];
        for s in 0..n {
            for a in 0..self.n_actions {
                let g = self.discount(s, a);
                if g <= 0.0 {
                    continue;
                }
                let lg = g.ln();
                for (next, &p) in self.transition(s, a).iter().enumerate() {
                    if p > 0.0 && lg > dist[s * n + next] {
                        dist[s * n + next] = lg;
                    }
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik == f64::NEG_INFINITY {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + dist[k * n + j];
                    if cand > dist[i * n + j] {
                        // Cap growth along positive cycles; only the sign matters.
                        dist[i * n + j] = cand.min(1.0);
                    }
                }
            }
        }
        (0..n).filter(|&i| dist[i * n + i] >= -1e-12).collect()
    }
}

/// Outcome of [`GeneralizedMdp::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<String>,
    /// States on a cycle whose discount product is >= 1.
    pub divergent_states: Vec<State>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    /// Infinite-horizon valuation is not guaranteed to converge.
    pub fn finite_horizon_only(&self) -> bool {
        !self.divergent_states.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play_objective() -> GeneralizedMdp {
        // actions: 0 = work, 1 = play
        GeneralizedMdp::deterministic(1, 2, &[0, 0], vec![0.0, 0.5], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn peril_play_objective_is_valid_for_infinite_horizon() {
        let report = play_objective().validate();
        assert!(report.is_valid());
        assert!(!report.finite_horizon_only());
    }

    #[test]
    fn short_row_is_reported() {
        let mdp =
            GeneralizedMdp::new(2, 1, vec![vec![0.5, 0.4], vec![0.0, 1.0]], vec![0.0, 0.0], vec![0.9, 0.9]).unwrap();
        let report = mdp.validate();
        assert!(!report.is_valid());
        assert!(report.issues[0].contains("sums to"));
        assert!(mdp.ensure_valid().is_err());
    }

    #[test]
    fn unit_discount_self_loop_is_finite_horizon_only() {
        let mdp = GeneralizedMdp::deterministic(1, 1, &[0], vec![1.0], vec![1.0]).unwrap();
        let report = mdp.validate();
        assert!(report.is_valid());
        assert!(report.finite_horizon_only());
        assert_eq!(report.divergent_states, vec![0]);
    }

    #[test]
    fn two_state_cycle_with_product_above_one_is_flagged() {
        // 0 -> 1 with 2.0, 1 -> 0 with 0.6: product 1.2
        let mdp = GeneralizedMdp::deterministic(2, 1, &[1, 0], vec![0.0, 0.0], vec![2.0, 0.6]).unwrap();
        assert_eq!(mdp.validate().divergent_states, vec![0, 1]);
        let ok = GeneralizedMdp::deterministic(2, 1, &[1, 0], vec![0.0, 0.0], vec![1.5, 0.6]).unwrap();
        assert!(!ok.validate().finite_horizon_only());
    }

    #[test]
    fn negative_discount_is_reported() {
        let mdp = GeneralizedMdp::deterministic(1, 1, &[0], vec![0.0], vec![-0.1]).unwrap();
        assert!(!mdp.validate().is_valid());
    }

    #[test]
    fn successor_requires_point_mass() {
        let mdp =
            GeneralizedMdp::new(2, 1, vec![vec![0.5, 0.5], vec![0.0, 1.0]], vec![0.0, 0.0], vec![0.9, 0.9]).unwrap();
        assert_eq!(mdp.successor(0, 0), None);
        assert_eq!(mdp.successor(1, 0), Some(1));
        assert!(!mdp.is_deterministic());
        assert!(play_objective().is_deterministic());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            GeneralizedMdp::new(1, 2, vec![vec![1.0]], vec![0.0; 2], vec![0.5; 2]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(GeneralizedMdp::deterministic(1, 1, &[3], vec![0.0], vec![0.5]).is_err());
    }
}
