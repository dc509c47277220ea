//! State augmentation that makes the aggregate reward Markovian.
//!
//! Each objective carries a factor `y_i` updated by
//! `y_i ← y_i · γ_i(s, a) / γ_Σ(s, a)`. On the augmented state `(s, y)` the
//! aggregate reward `Σ_i y_i w_i r_i(s, a)` discounted by `γ_Σ` reproduces
//! `c + Σ_i w_i V_i` because `Γ_Σ(t) · y_i(t) = Γ_i(t)` at every step.

mod window;

pub use window::{lift_window_counter, CounterLift, LiftedObjectives, WindowCounterObjective};

use crate::aggregation::{GammaSigma, ObjectiveSet, WeightState};
use crate::error::{Error, Result};
use crate::model::{Action, State};
use crate::trajectory::TrajectorySpec;

/// Below this every factor-scaled discount is treated as exhausted.
pub const UNDERFLOW_GUARD: f64 = 1e-300;

/// A base state together with the per-objective factors.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub base: State,
    pub y: Vec<f64>,
}

/// `y_i · γ_i(s, a) / γ_Σ(s, a)`.
///
/// `ws` supplies the weights for the weight-normalizing strategy; the factors
/// used are `y`, not `ws.factors`.
pub fn y_update(
    y: &[f64],
    s: State,
    a: Action,
    objs: &ObjectiveSet,
    strategy: GammaSigma,
    ws: &WeightState,
) -> Result<Vec<f64>> {
    if y.len() != objs.len() || ws.len() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), got: y.len().min(ws.len()) });
    }
    let discounts = objs.discounts_at(s, a);
    let effective: Vec<f64> = ws.weights.iter().zip(y).map(|(w, f)| w * f).collect();
    let g_sigma = strategy.evaluate(&effective, &discounts)?;
    if g_sigma == 0.0 {
        return Err(Error::ZeroAggregateDiscount { state: s, action: a });
    }
    Ok(y.iter().zip(&discounts).map(|(yi, gi)| yi * gi / g_sigma).collect())
}

/// Lazily generated augmented model. Holds no caches, so it can be shared
/// freely across threads.
#[derive(Debug, Clone)]
pub struct AugmentedMdp<'a> {
    objs: &'a ObjectiveSet,
    weights: WeightState,
    strategy: GammaSigma,
}

pub fn build_augmented_mdp<'a>(
    objs: &'a ObjectiveSet,
    ws: &WeightState,
    strategy: GammaSigma,
) -> Result<AugmentedMdp<'a>> {
    if ws.len() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), got: ws.len() });
    }
    for o in objs.iter() {
        o.mdp.ensure_valid()?;
    }
    Ok(AugmentedMdp { objs, weights: ws.clone(), strategy })
}

impl<'a> AugmentedMdp<'a> {
    pub fn objectives(&self) -> &'a ObjectiveSet {
        self.objs
    }

    pub fn weights(&self) -> &WeightState {
        &self.weights
    }

    pub fn strategy(&self) -> GammaSigma {
        self.strategy
    }

    /// Starts from the factors held in the weight state (all ones when fresh).
    pub fn start(&self, s: State) -> AugmentedState {
        AugmentedState { base: s, y: self.weights.factors.clone() }
    }

    /// `Σ_i y_i w_i r_i(s, a)`.
    pub fn reward(&self, st: &AugmentedState, a: Action) -> f64 {
        self.objs.iter().zip(&self.weights.weights).zip(&st.y).map(|((o, w), y)| y * w * o.mdp.reward(st.base, a)).sum()
    }

    /// `γ_Σ(s, a)` at the augmented state.
    pub fn discount(&self, st: &AugmentedState, a: Action) -> Result<f64> {
        let effective: Vec<f64> = self.weights.weights.iter().zip(&st.y).map(|(w, y)| w * y).collect();
        self.strategy.evaluate(&effective, &self.objs.discounts_at(st.base, a))
    }

    /// Augmented successor reached through base state `next`.
    pub fn successor(&self, st: &AugmentedState, a: Action, next: State) -> Result<AugmentedState> {
        let y = y_update(&st.y, st.base, a, self.objs, self.strategy, &self.weights)?;
        Ok(AugmentedState { base: next, y })
    }

    /// Successors with their probabilities.
    pub fn transitions(&self, st: &AugmentedState, a: Action) -> Result<Vec<(AugmentedState, f64)>> {
        let y = y_update(&st.y, st.base, a, self.objs, self.strategy, &self.weights)?;
        Ok(self
            .objs
            .dynamics()
            .transition(st.base, a)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(n, &p)| (AugmentedState { base: n, y: y.clone() }, p))
            .collect())
    }

    /// `c + Σ_t Γ_Σ(t) r_aug(t)` accumulated step by step along `traj`.
    ///
    /// Cycles are unrolled until every `Γ_Σ · |w_i y_i|` falls under the
    /// underflow guard or the remaining tail is bounded below machine
    /// precision of the running sum.
    pub fn discounted_return(&self, traj: &TrajectorySpec) -> Result<f64> {
        traj.validate(self.objs.dynamics())?;
        let mut st = self.start(traj.pair_at(0).expect("nonempty").0);
        let mut scale = 1.0_f64;
        let mut acc = 0.0_f64;
        let per_cycle_bound = self.cycle_bounds(traj)?;
        let mut t = 0usize;
        while let Some((s, a)) = traj.pair_at(t) {
            debug_assert_eq!(s, st.base);
            if t >= traj.prefix.len() && (t - traj.prefix.len()).is_multiple_of(traj.cycle.len()) {
                let remaining: f64 = self
                    .weights
                    .weights
                    .iter()
                    .zip(&st.y)
                    .zip(&per_cycle_bound)
                    .map(|((w, y), b)| (scale * w * y).abs() * b)
                    .sum();
                let exhausted = st.y.iter().all(|y| (scale * y).abs() < UNDERFLOW_GUARD);
                if exhausted || remaining <= f64::EPSILON * 1e-3 * acc.abs().max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            acc += scale * self.reward(&st, a);
            let g = self.discount(&st, a)?;
            if g == 0.0 {
                break;
            }
            scale *= g;
            let next = traj.pair_at(t + 1).map(|(n, _)| n).unwrap_or(s);
            st = self.successor(&st, a, next)?;
            t += 1;
        }
        Ok(self.weights.constant + acc)
    }

    /// Per objective, a bound on `Σ_k Γ_i(k) |r_i|` over all remaining cycle
    /// passes measured from a cycle start.
    fn cycle_bounds(&self, traj: &TrajectorySpec) -> Result<Vec<f64>> {
        if traj.cycle.is_empty() {
            return Ok(vec![0.0; self.objs.len()]);
        }
        self.objs
            .iter()
            .map(|o| {
                let mut sum = 0.0;
                let mut prod = 1.0;
                for &(s, a) in &traj.cycle {
                    sum += prod * o.mdp.reward(s, a).abs();
                    prod *= o.mdp.discount(s, a);
                }
                if prod >= 1.0 {
                    if sum == 0.0 {
                        return Ok(0.0);
                    }
                    return Err(Error::DivergentCycle { product: prod });
                }
                Ok(sum / (1.0 - prod))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::aggregate_trajectory_value;
    use crate::fixtures::peril;

    #[test]
    fn peril_play_factor_update() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        let y = y_update(&[1.0, 1.0], 0, 1, &objs, GammaSigma::MaxIndividual, &ws).unwrap();
        assert!((y[0] - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(y[1], 1.0);
    }

    #[test]
    fn equal_discount_leaves_factors_unchanged() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        // work: γ = (0.5, 0.9); constant(0.5) matches the play objective
        let y = y_update(&[0.3, 0.7], 0, 0, &objs, GammaSigma::Constant(0.5), &ws).unwrap();
        assert_eq!(y[0], 0.3);
    }

    #[test]
    fn unit_constant_matches_weight_propagation() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        let y = y_update(&[1.0, 1.0], 0, 1, &objs, GammaSigma::Constant(1.0), &ws).unwrap();
        let w = crate::aggregation::propagate_weights(&ws, 0, 1, &objs).unwrap();
        assert_eq!(y, w.weights);
    }

    #[test]
    fn zero_aggregate_discount_errors() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, -1.0]).unwrap();
        let r = y_update(&[0.9, 0.5], 0, 1, &objs, GammaSigma::WeightNormalizing, &ws);
        // 0.9*0.5 - 0.5*0.9 = 0 -> weight sum 0.4, mixed 0 -> zero γ_Σ
        assert!(matches!(r, Err(Error::ZeroAggregateDiscount { .. })));
    }

    #[test]
    fn peril_tau3_augmented_return() {
        let objs = peril();
        let ws = WeightState::new(vec![1.0, 1.0]).unwrap();
        let aug = build_augmented_mdp(&objs, &ws, GammaSigma::MaxIndividual).unwrap();
        let t = TrajectorySpec::from_actions(objs.dynamics(), 0, &[1], &[0]).unwrap();
        let v = aug.discounted_return(&t).unwrap();
        assert!((v - 3.2).abs() < 1e-9, "{v}");
    }

    #[test]
    fn single_objective_max_keeps_unit_factor() {
        let objs = ObjectiveSet::new(vec![peril().get(1).clone()]).unwrap();
        let ws = WeightState::new(vec![2.0]).unwrap();
        let aug = build_augmented_mdp(&objs, &ws, GammaSigma::MaxIndividual).unwrap();
        let mut st = aug.start(0);
        for a in [1, 0, 1, 1] {
            assert_eq!(aug.reward(&st, a), 2.0 * objs.get(0).mdp.reward(0, a));
            st = aug.successor(&st, a, 0).unwrap();
            assert_eq!(st.y, vec![1.0]);
        }
    }

    #[test]
    fn augmented_return_matches_for_all_strategies() {
        let objs = peril();
        let ws = WeightState::with_constant(vec![0.7, 1.3], 0.25).unwrap();
        let t = TrajectorySpec::from_actions(objs.dynamics(), 0, &[1, 0, 1], &[0, 0, 1]).unwrap();
        let direct = aggregate_trajectory_value(&objs, &ws, &t).unwrap();
        for strategy in [GammaSigma::MaxIndividual, GammaSigma::Constant(1.0), GammaSigma::WeightNormalizing] {
            let aug = build_augmented_mdp(&objs, &ws, strategy).unwrap();
            let v = aug.discounted_return(&t).unwrap();
            assert!((v - direct).abs() < 1e-9, "{strategy:?}: {v} vs {direct}");
        }
    }
}
