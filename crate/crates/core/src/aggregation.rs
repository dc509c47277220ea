//! Weighted-sum aggregation of objective values and history-dependent
//! propagation of the aggregation weights.
//!
//! An aggregate of values `V_i` is `c + Σ_i w_i y_i V_i`, where `w_i` are the
//! weights, `y_i` the accumulated factors (all ones until an augmentation
//! step touches them) and `c` a presentation constant.

use crate::error::{Error, Result};
use crate::model::{Action, GeneralizedMdp, State};
use crate::trajectory::TrajectorySpec;
use crate::valuation::return_of_trajectory;

/// One objective: its own reward and discount over shared dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub name: String,
    pub mdp: GeneralizedMdp,
}

impl Objective {
    pub fn new(name: impl Into<String>, mdp: GeneralizedMdp) -> Self {
        Self { name: name.into(), mdp }
    }
}

/// Objectives sharing states, actions and the transition kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSet {
    objectives: Vec<Objective>,
}

impl ObjectiveSet {
    pub fn new(objectives: Vec<Objective>) -> Result<Self> {
        let first = objectives.first().ok_or_else(|| Error::InvalidModel("objective set is empty".into()))?;
        for obj in &objectives {
            obj.mdp.ensure_valid()?;
            if !obj.mdp.same_dynamics(&first.mdp) {
                return Err(Error::InvalidModel(format!(
                    "objective `{}` does not share the dynamics of `{}`",
                    obj.name, first.name
                )));
            }
        }
        Ok(Self { objectives })
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn get(&self, i: usize) -> &Objective {
        &self.objectives[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Objective> {
        self.objectives.iter()
    }

    /// The shared dynamics (taken from the first objective).
    pub fn dynamics(&self) -> &GeneralizedMdp {
        &self.objectives[0].mdp
    }

    pub fn n_states(&self) -> usize {
        self.dynamics().n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.dynamics().n_actions()
    }

    pub fn discounts_at(&self, s: State, a: Action) -> Vec<f64> {
        self.objectives.iter().map(|o| o.mdp.discount(s, a)).collect()
    }

    pub fn rewards_at(&self, s: State, a: Action) -> Vec<f64> {
        self.objectives.iter().map(|o| o.mdp.reward(s, a)).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objectives.iter().position(|o| o.name == name)
    }

    /// Per-objective returns of a trajectory.
    pub fn returns(&self, traj: &TrajectorySpec) -> Result<Vec<f64>> {
        self.objectives.iter().map(|o| return_of_trajectory(&o.mdp, traj)).collect()
    }
}

/// Weights, accumulated factors and the constant carried along a history.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightState {
    pub weights: Vec<f64>,
    pub factors: Vec<f64>,
    pub constant: f64,
    pub step: usize,
}

impl WeightState {
    /// Fresh state: factors all one, constant zero, step zero.
    ///
    /// Weights must be finite and at least one must be nonzero.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_constant(weights, 0.0)
    }

    pub fn with_constant(weights: Vec<f64>, constant: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) || !constant.is_finite() {
            return Err(Error::InvalidWeights("weights must be finite".into()));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidWeights("at least one weight must be nonzero".into()));
        }
        let factors = vec![1.0; weights.len()];
        Ok(Self { weights, factors, constant, step: 0 })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w_i · y_i`.
    pub fn effective_weights(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.factors).map(|(w, y)| w * y).collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch { expected: self.len(), got: n });
        }
        Ok(())
    }
}

/// How the aggregate discount `γ_Σ(s, a)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaSigma {
    /// Largest individual discount at the pair.
    #[default]
    MaxIndividual,
    /// A fixed positive value.
    Constant(f64),
    /// Weight-averaged discount; keeps the effective weight total unchanged
    /// across a factor update.
    WeightNormalizing,
}

impl GammaSigma {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidArgument(format!("constant aggregate discount must be > 0, got {value}")));
        }
        Ok(GammaSigma::Constant(value))
    }

    pub fn label(&self) -> String {
        match self {
            GammaSigma::MaxIndividual => "max".into(),
            GammaSigma::Constant(v) => format!("const:{v}"),
            GammaSigma::WeightNormalizing => "normalize".into(),
        }
    }

    /// Evaluates `γ_Σ` for explicit effective weights.
    pub fn evaluate(&self, effective_weights: &[f64], discounts: &[f64]) -> Result<f64> {
        match *self {
            GammaSigma::MaxIndividual => Ok(discounts.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            GammaSigma::Constant(v) => Ok(v),
            GammaSigma::WeightNormalizing => {
                let total: f64 = effective_weights.iter().sum();
                if total == 0.0 {
                    return Err(Error::ZeroWeightSum);
                }
                let mixed: f64 = effective_weights.iter().zip(discounts).map(|(w, g)| w * g).sum();
                Ok(mixed / total)
            }
        }
    }
}

/// `c + Σ_i w_i y_i v_i`.
pub fn harsanyi_value(ws: &WeightState, values: &[f64]) -> Result<f64> {
    ws.check_len(values.len())?;
    Ok(ws.constant + ws.effective_weights().iter().zip(values).map(|(w, v)| w * v).sum::<f64>())
}

/// One step of weight propagation: `w_i ← w_i · γ_i(s, a)`.
///
/// Factors, constant and step counter are left as they are.
pub fn propagate_weights(ws: &WeightState, s: State, a: Action, objs: &ObjectiveSet) -> Result<WeightState> {
    ws.check_len(objs.len())?;
    let mut next = ws.clone();
    for (w, g) in next.weights.iter_mut().zip(objs.discounts_at(s, a)) {
        *w *= g;
    }
    Ok(next)
}

/// `γ_Σ(s, a)` under `strategy`, using the effective weights of `ws`.
pub fn gamma_sigma(strategy: GammaSigma, ws: &WeightState, s: State, a: Action, objs: &ObjectiveSet) -> Result<f64> {
    ws.check_len(objs.len())?;
    strategy.evaluate(&ws.effective_weights(), &objs.discounts_at(s, a))
}

/// `c + Σ_i w_i y_i V_i(τ)`.
pub fn aggregate_trajectory_value(objs: &ObjectiveSet, ws: &WeightState, traj: &TrajectorySpec) -> Result<f64> {
    ws.check_len(objs.len())?;
    harsanyi_value(ws, &objs.returns(traj)?)
}
