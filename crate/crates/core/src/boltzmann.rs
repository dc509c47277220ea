//! Bradley-Terry/Luce choice and softmax policies over utilities.
//!
//! Non-normative: softmax composition is a practical device and carries none
//! of the consistency guarantees of the aggregation and augmentation modules.
//! A single temperature is shared by every composed objective.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Action;

/// Positive choice mass `Ω(a)` per action and a temperature `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceMass {
    mass: Vec<f64>,
    temperature: f64,
}

impl ChoiceMass {
    pub fn new(mass: Vec<f64>, temperature: f64) -> Result<Self> {
        if mass.is_empty() || mass.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidArgument("choice masses must be positive and finite".into()));
        }
        check_temperature(temperature)?;
        Ok(Self { mass, temperature })
    }

    /// Masses `Ω(a) = exp(V(a) / k)`.
    pub fn from_utilities(utilities: &[f64], temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        Self::new(utilities.iter().map(|v| (v / temperature).exp()).collect(), temperature)
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Choice probabilities over the full action set.
    pub fn luce_probs(&self) -> Vec<f64> {
        let total: f64 = self.mass.iter().sum();
        self.mass.iter().map(|m| m / total).collect()
    }
}

fn check_temperature(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {k}")));
    }
    Ok(())
}

/// `Ω(i) / (Ω(i) + Ω(j))`.
pub fn bt_prob(mass: &ChoiceMass, i: Action, j: Action) -> Result<f64> {
    let n = mass.mass.len();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("need two distinct actions below {n}, got {i} and {j}")));
    }
    Ok(mass.mass[i] / (mass.mass[i] + mass.mass[j]))
}

/// `V(a) = k ln Ω(a)`.
pub fn utilities_of(mass: &ChoiceMass) -> Vec<f64> {
    mass.mass.iter().map(|m| mass.temperature * m.ln()).collect()
}

/// `p(a) ∝ exp(V(a) / k)`, evaluated after subtracting `max V`.
pub fn softmax_policy(utilities: &[f64], k: f64) -> Result<Vec<f64>> {
    check_temperature(k)?;
    if utilities.is_empty() || utilities.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("utilities must be finite and nonempty".into()));
    }
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = utilities.iter().map(|v| ((v - top) / k).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / total).collect())
}

/// `Σ_i w_i U_i(a)` per action.
pub fn compose_utilities(sets: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if sets.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: sets.len(), got: weights.len() });
    }
    let n = sets.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (set, w) in sets.iter().zip(weights) {
        if set.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: set.len() });
        }
        for (o, u) in out.iter_mut().zip(set) {
            *o += w * u;
        }
    }
    Ok(out)
}

/// Draws an action from `probs` with the caller's generator.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<Action> {
    let dist = WeightedIndex::new(probs).map_err(|e| Error::InvalidArgument(format!("bad distribution: {e}")))?;
    Ok(dist.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::WeightState;
    use crate::fixtures::{peril, PLAY, WORK};
    use crate::planning::{plan_prefix_tail, PlanConfig};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn pairwise_probabilities() {
        let m = ChoiceMass::new(vec![1.0, 1.0], 1.0).unwrap();
        assert_eq!(bt_prob(&m, 0, 1).unwrap(), 0.5);
        let m = ChoiceMass::new(vec![3.0, 1.0], 1.0).unwrap();
        assert_eq!(bt_prob(&m, 0, 1).unwrap(), 0.75);
        assert!(bt_prob(&m, 1, 1).is_err());
    }

    #[test]
    fn luce_ratio_with_a_third_alternative() {
        let m = ChoiceMass::new(vec![2.0, 5.0, 0.5], 1.0).unwrap();
        let p = m.luce_probs();
        assert!((p[0] / p[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn utilities() {
        let unit = ChoiceMass::new(vec![1.0], 3.7).unwrap();
        assert_eq!(utilities_of(&unit), vec![0.0]);
        let e = ChoiceMass::new(vec![std::f64::consts::E], 1.0).unwrap();
        assert!((utilities_of(&e)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_round_trip_matches_pairwise() {
        let m = ChoiceMass::new(vec![0.2, 1.5, 4.0], 0.7).unwrap();
        let p = softmax_policy(&utilities_of(&m), 0.7).unwrap();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!((p[i] / (p[i] + p[j]) - bt_prob(&m, i, j).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_limits() {
        assert_eq!(softmax_policy(&[2.0, 2.0], 1.0).unwrap(), vec![0.5, 0.5]);
        let cold = softmax_policy(&[1.0, 1.1, 0.3], 1e-6).unwrap();
        assert!(cold[1] > 1.0 - 1e-9);
        assert!(softmax_policy(&[1.0], 0.0).is_err());
    }

    #[test]
    fn doubled_utilities_at_doubled_temperature() {
        let u = vec![0.3, -1.2, 2.0];
        let doubled = compose_utilities(&[u.clone(), u.clone()], &[1.0, 1.0]).unwrap();
        let a = softmax_policy(&u, 0.8).unwrap();
        let b = softmax_policy(&doubled, 1.6).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(compose_utilities(std::slice::from_ref(&u), &[1.0]).unwrap(), u);
        assert!(compose_utilities(&[u.clone(), vec![1.0]], &[1.0, 1.0]).is_err());
    }

    /// `U_i(a) = r_i(a) + γ_i V_i(work forever)` on the one-state instance.
    fn one_step_utilities() -> Vec<Vec<f64>> {
        let objs = peril();
        let work_forever = |i: usize| objs.get(i).mdp.reward(0, WORK) / (1.0 - objs.get(i).mdp.discount(0, WORK));
        (0..2)
            .map(|i| {
                let m = &objs.get(i).mdp;
                [WORK, PLAY].iter().map(|&a| m.reward(0, a) + m.discount(0, a) * work_forever(i)).collect()
            })
            .collect()
    }

    #[test]
    fn propagated_weights_change_the_greedy_action() {
        let objs = peril();
        let cfg = PlanConfig::with_horizon(1);
        let argmax = |u: &[f64]| if u[1] > u[0] { PLAY } else { WORK };
        for (weights, expected) in [(vec![1.0, 1.0], PLAY), (vec![0.5, 0.9], WORK)] {
            let u = compose_utilities(&one_step_utilities(), &weights).unwrap();
            assert_eq!(argmax(&u), expected);
            let ws = WeightState::new(weights).unwrap();
            assert_eq!(plan_prefix_tail(&objs, &ws, 0, &cfg, true).unwrap().first_action(), expected);
        }
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let p = softmax_policy(&[0.0, 1.0, 2.0], 1.0).unwrap();
        let draw = |seed| {
            let mut rng = StdRng::seed_from_u64(seed);
            (0..20).map(|_| sample_action(&p, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert!(sample_action(&[0.0, 0.0], &mut StdRng::seed_from_u64(1)).is_err());
    }
}
