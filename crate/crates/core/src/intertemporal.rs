//! Planning across generations whose preferences differ.
//!
//! Each environment step is planned by a new generation. The planning
//! weights `y` live on the weight scale: they start at the generation-0
//! weights and are carried forward by one of three rules.
//!
//! * none: `y ← y ⊙ γ / γ_Σ`, the dynamically consistent update;
//! * n-step: the consistent update, reset to the acting generation's weights
//!   every `N` steps;
//! * historical: `y ← η (y ⊙ γ / γ_Σ) + (1 − η) w^t`, where `w^t` are the
//!   weights of the generation that just acted.

use crate::aggregation::{GammaSigma, ObjectiveSet, WeightState};
use crate::augmentation::y_update;
use crate::error::{Error, Result};
use crate::model::{Action, State};
use crate::planning::{PlanConfig, Planner};
use crate::trajectory::TrajectorySpec;

/// Per-generation initial weights `w^n`, constant after the last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSchedule {
    generations: Vec<Vec<f64>>,
}

impl PreferenceSchedule {
    pub fn constant(weights: Vec<f64>) -> Result<Self> {
        Self::from_generations(vec![weights])
    }

    /// `generations[n]` is `w^n`; later generations repeat the last entry.
    pub fn from_generations(generations: Vec<Vec<f64>>) -> Result<Self> {
        let first = generations.first().ok_or_else(|| Error::InvalidArgument("empty schedule".into()))?;
        let k = first.len();
        if k == 0 {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        for g in &generations {
            if g.len() != k {
                return Err(Error::DimensionMismatch { expected: k, got: g.len() });
            }
            if g.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidWeights("weights must be finite".into()));
            }
        }
        Ok(Self { generations })
    }

    pub fn weights(&self, n: usize) -> &[f64] {
        &self.generations[n.min(self.generations.len() - 1)]
    }

    pub fn n_objectives(&self) -> usize {
        self.generations[0].len()
    }

    /// Generations after which the schedule stays constant.
    pub fn window(&self) -> usize {
        self.generations.len() - 1
    }
}

/// `w^n = w_start + (n / T)(w_end − w_start)` for `n <= T`, `w_end` after.
pub fn linear_schedule(w_start: &[f64], w_end: &[f64], window: usize) -> Result<PreferenceSchedule> {
    if window == 0 {
        return Err(Error::InvalidArgument("schedule window must be at least 1".into()));
    }
    if w_start.len() != w_end.len() {
        return Err(Error::DimensionMismatch { expected: w_start.len(), got: w_end.len() });
    }
    let generations = (0..=window)
        .map(|n| {
            let f = n as f64 / window as f64;
            w_start.iter().zip(w_end).map(|(a, b)| a + f * (b - a)).collect()
        })
        .collect();
    PreferenceSchedule::from_generations(generations)
}

/// Rule that carries planning weights from one generation to the next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntertemporalConfig {
    None,
    NStep(usize),
    Historical(f64),
}

impl IntertemporalConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            IntertemporalConfig::None => Ok(()),
            IntertemporalConfig::NStep(n) if n >= 1 => Ok(()),
            IntertemporalConfig::NStep(_) => Err(Error::InvalidArgument("N must be at least 1".into())),
            IntertemporalConfig::Historical(eta) if (0.0..=1.0).contains(&eta) => Ok(()),
            IntertemporalConfig::Historical(eta) => Err(Error::InvalidArgument(format!("eta {eta} not in [0, 1]"))),
        }
    }
}

/// `target` when `t > 0` and `t mod N = 0`, otherwise `y`.
pub fn nstep_reset(y: &[f64], t: usize, n: usize, target: &[f64]) -> Vec<f64> {
    if n > 0 && t > 0 && t.is_multiple_of(n) {
        target.to_vec()
    } else {
        y.to_vec()
    }
}

/// `η (y ⊙ γ / γ_Σ) + (1 − η) w^n` at pair `(s, a)`.
pub fn historical_update(
    y: &[f64],
    s: State,
    a: Action,
    objs: &ObjectiveSet,
    strategy: GammaSigma,
    eta: f64,
    wn: &[f64],
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("eta {eta} not in [0, 1]")));
    }
    if wn.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: wn.len() });
    }
    let carried = y_update(y, s, a, objs, strategy, &unit_weights(y.len()))?;
    Ok(carried.iter().zip(wn).map(|(c, w)| eta * c + (1.0 - eta) * w).collect())
}

/// The planning weights are `y` itself, so the strategy sees `y` as the
/// effective weights.
fn unit_weights(n: usize) -> WeightState {
    WeightState { weights: vec![1.0; n], factors: vec![1.0; n], constant: 0.0, step: 0 }
}

/// `Σ_i w^0_i V_i(τ)`.
pub fn v1_of_trajectory(objs: &ObjectiveSet, first_step_weights: &[f64], traj: &TrajectorySpec) -> Result<f64> {
    if first_step_weights.len() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), got: first_step_weights.len() });
    }
    Ok(objs.returns(traj)?.iter().zip(first_step_weights).map(|(v, w)| v * w).sum())
}

/// Realized run of a generation-by-generation simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRun {
    /// Every executed `(state, action)` pair.
    pub realized: Vec<(State, Action)>,
    /// The realized run in eventually periodic form.
    pub trajectory: TrajectorySpec,
    pub v1: f64,
}

/// Default number of simulated generations; long enough for the period-10
/// equilibrium to be observed twice after the latest onset at `η = 0.98`.
pub const DEFAULT_GENERATIONS: usize = 150;

/// Each step: plan with weights `y` from the current state, execute the
/// first action, then advance `y` by the configured rule.
pub fn simulate_generations(
    objs: &ObjectiveSet,
    schedule: &PreferenceSchedule,
    cfg: IntertemporalConfig,
    strategy: GammaSigma,
    steps: usize,
    plan: &PlanConfig,
    start: State,
) -> Result<GenerationRun> {
    let planner = Planner::new(objs, &PlanConfig { gamma_sigma: strategy, ..plan.clone() })?;
    simulate_with(&planner, schedule, cfg, steps, start)
}

/// [`simulate_generations`] reusing a planner's precomputed tails.
pub fn simulate_with(
    planner: &Planner<'_>,
    schedule: &PreferenceSchedule,
    cfg: IntertemporalConfig,
    steps: usize,
    start: State,
) -> Result<GenerationRun> {
    cfg.validate()?;
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let objs = planner.objectives();
    if schedule.n_objectives() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), got: schedule.n_objectives() });
    }
    let strategy = planner.config().gamma_sigma;
    let dynamics = objs.dynamics();
    let mut y = schedule.weights(0).to_vec();
    let mut s = start;
    let mut realized = Vec::with_capacity(steps);
    for t in 0..steps {
        let a = planner.plan(&WeightState::new(y.clone())?, s)?.first_action();
        realized.push((s, a));
        let acting = schedule.weights(t);
        y = match cfg {
            IntertemporalConfig::None => y_update(&y, s, a, objs, strategy, &unit_weights(y.len()))?,
            IntertemporalConfig::NStep(n) => {
                let carried = y_update(&y, s, a, objs, strategy, &unit_weights(y.len()))?;
                nstep_reset(&carried, t + 1, n, acting)
            }
            IntertemporalConfig::Historical(eta) => historical_update(&y, s, a, objs, strategy, eta, acting)?,
        };
        s = dynamics.successor(s, a).ok_or(Error::StochasticDynamics)?;
    }
    let trajectory = TrajectorySpec::from_realized(&realized)?;
    let v1 = v1_of_trajectory(objs, schedule.weights(0), &trajectory)?;
    Ok(GenerationRun { realized, trajectory, v1 })
}
