//! Exact valuation of trajectories, stationary policies, mixtures and
//! prefix-tail prospects.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::model::{GeneralizedMdp, State};
use crate::policy::{PolicySpec, Prospect, Start};
use crate::trajectory::TrajectorySpec;

/// Default valuation tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Discounted return of an eventually periodic trajectory.
///
/// The cycle contributes `Γ_prefix · S_cycle / (1 − ρ)` where `ρ` is the
/// discount product over one pass of the cycle.
pub fn return_of_trajectory(mdp: &GeneralizedMdp, traj: &TrajectorySpec) -> Result<f64> {
    traj.validate(mdp)?;
    let (value, scale) = discounted_sum(mdp, &traj.prefix);
    if traj.cycle.is_empty() || scale == 0.0 {
        return Ok(value);
    }
    let (cycle_sum, product) = discounted_sum(mdp, &traj.cycle);
    if product >= 1.0 {
        return Err(Error::DivergentCycle { product });
    }
    Ok(value + scale * cycle_sum / (1.0 - product))
}

/// Sum of the first `horizon` discounted rewards. Defined for any discount.
pub fn truncated_return(mdp: &GeneralizedMdp, traj: &TrajectorySpec, horizon: usize) -> f64 {
    discounted_sum(mdp, &traj.unroll(horizon)).0
}

/// Returns `(Σ_t Γ(t) r_t, Γ(len))` over a finite pair sequence.
fn discounted_sum(mdp: &GeneralizedMdp, pairs: &[(State, usize)]) -> (f64, f64) {
    let mut value = 0.0;
    let mut scale = 1.0;
    for &(s, a) in pairs {
        value += scale * mdp.reward(s, a);
        scale *= mdp.discount(s, a);
    }
    (value, scale)
}

/// Discounted transition matrix and expected reward under a stationary policy.
fn policy_operator(mdp: &GeneralizedMdp, policy: &PolicySpec) -> Result<(DMatrix<f64>, DVector<f64>)> {
    policy.validate(mdp)?;
    if !policy.is_stationary() {
        return Err(Error::InvalidPolicy("expected a stationary policy".into()));
    }
    let n = mdp.n_states();
    let na = mdp.n_actions();
    let mut p = DMatrix::zeros(n, n);
    let mut r = DVector::zeros(n);
    for s in 0..n {
        let probs = policy.action_probs(s, na).expect("stationary");
        for (a, &pa) in probs.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            r[s] += pa * mdp.reward(s, a);
            let g = mdp.discount(s, a);
            for (next, &t) in mdp.transition(s, a).iter().enumerate() {
                p[(s, next)] += pa * g * t;
            }
        }
    }
    Ok((p, r))
}

/// Spectral radius of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Option<f64> {
    let schur = Schur::try_new(m.clone(), 1e-14, 100_000)?;
    Some(schur.complex_eigenvalues().iter().fold(0.0_f64, |acc, z| acc.max(z.norm())))
}

/// Solves `V = r_π + P_γ V` for a stationary policy.
pub fn evaluate_stationary(mdp: &GeneralizedMdp, policy: &PolicySpec) -> Result<Vec<f64>> {
    let (p, r) = policy_operator(mdp, policy)?;
    let n = mdp.n_states();
    // Row sums of a nonnegative matrix bound its spectral radius.
    let row_bound = (0..n).map(|i| p.row(i).sum()).fold(0.0_f64, f64::max);
    if row_bound >= 1.0 {
        let radius = spectral_radius(&p).ok_or(Error::SingularSystem)?;
        if radius >= 1.0 - 1e-12 {
            return Err(Error::Divergent { radius });
        }
    }
    let a = DMatrix::identity(n, n) - p;
    let v = a.lu().solve(&r).ok_or(Error::SingularSystem)?;
    Ok(v.iter().copied().collect())
}

/// Value of every start state under any supported policy form.
///
/// Prefix-tail policies are folded backwards from the tail's value vector.
pub fn policy_values(mdp: &GeneralizedMdp, policy: &PolicySpec) -> Result<Vec<f64>> {
    match policy {
        PolicySpec::Deterministic(_) | PolicySpec::Stochastic(_) => evaluate_stationary(mdp, policy),
        PolicySpec::Mixture(parts) => {
            policy.validate(mdp)?;
            let mut acc = vec![0.0; mdp.n_states()];
            for (p, part) in parts {
                for (x, v) in acc.iter_mut().zip(policy_values(mdp, part)?) {
                    *x += p * v;
                }
            }
            Ok(acc)
        }
        PolicySpec::PrefixTail { prefix, tail } => {
            policy.validate(mdp)?;
            let mut v = policy_values(mdp, tail)?;
            for &a in prefix.iter().rev() {
                v = (0..mdp.n_states())
                    .map(|s| {
                        let future: f64 = mdp.transition(s, a).iter().zip(&v).map(|(t, x)| t * x).sum();
                        mdp.reward(s, a) + mdp.discount(s, a) * future
                    })
                    .collect();
            }
            Ok(v)
        }
    }
}

/// Expected value of a prospect.
///
/// Deterministic dynamics with deterministic actions are valued by exact
/// trajectory enumeration. Otherwise the prefix is rolled forward as a
/// discounted occupancy vector, stopping early once the remaining mass bound
/// drops below `tol`, and the tail is solved exactly.
pub fn evaluate_prospect(mdp: &GeneralizedMdp, prospect: &Prospect, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let start = prospect.start.distribution(mdp.n_states())?;
    prospect.policy.validate(mdp)?;
    if let PolicySpec::Mixture(parts) = &prospect.policy {
        let mut acc = 0.0;
        for (p, part) in parts {
            let sub = Prospect::new(Start::Distribution(start.clone()), part.clone());
            acc += p * evaluate_prospect(mdp, &sub, tol)?;
        }
        return Ok(acc);
    }
    if mdp.is_deterministic() {
        if let Some(value) = deterministic_fast_path(mdp, &start, &prospect.policy)? {
            return Ok(value);
        }
    }
    let (prefix, tail): (&[usize], &PolicySpec) = match &prospect.policy {
        PolicySpec::PrefixTail { prefix, tail } => (prefix, tail),
        stationary => (&[], stationary),
    };
    let r_max = mdp.reward_bound();
    let g_max = mdp.discounts().iter().fold(0.0_f64, |m, &g| m.max(g));
    let mut mass = start;
    let mut value = 0.0;
    for &a in prefix {
        let total: f64 = mass.iter().sum();
        if g_max < 1.0 && total * r_max / (1.0 - g_max) < tol {
            return Ok(value);
        }
        let mut next = vec![0.0; mdp.n_states()];
        for (s, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            value += m * mdp.reward(s, a);
            let g = mdp.discount(s, a);
            for (n, &t) in mdp.transition(s, a).iter().enumerate() {
                next[n] += m * g * t;
            }
        }
        mass = next;
    }
    if mass.iter().all(|&m| m == 0.0) {
        return Ok(value);
    }
    let tail_values = policy_values(mdp, tail)?;
    Ok(value + mass.iter().zip(&tail_values).map(|(m, v)| m * v).sum::<f64>())
}

fn deterministic_fast_path(mdp: &GeneralizedMdp, start: &[f64], policy: &PolicySpec) -> Result<Option<f64>> {
    let (prefix, tail): (&[usize], &[usize]) = match policy {
        PolicySpec::Deterministic(map) => (&[], map),
        PolicySpec::PrefixTail { prefix, tail } => match tail.as_ref() {
            PolicySpec::Deterministic(map) => (prefix, map),
            _ => return Ok(None),
        },
        _ => return Ok(None),
    };
    let mut acc = 0.0;
    for (s, &p) in start.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        acc += p * return_of_trajectory(mdp, &deterministic_trajectory(mdp, s, prefix, tail)?)?;
    }
    Ok(Some(acc))
}

/// Follows an open-loop prefix, then a deterministic stationary policy.
pub fn deterministic_trajectory(
    mdp: &GeneralizedMdp,
    start: State,
    prefix: &[usize],
    tail: &[usize],
) -> Result<TrajectorySpec> {
    let mut s = start;
    let mut pairs = Vec::with_capacity(prefix.len());
    for &a in prefix {
        pairs.push((s, a));
        s = mdp.successor(s, a).ok_or(Error::StochasticDynamics)?;
    }
    let rest = TrajectorySpec::from_stationary(mdp, s, tail)?;
    pairs.extend(rest.prefix);
    Ok(TrajectorySpec { prefix: pairs, cycle: rest.cycle })
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORK: usize = 0;
    const PLAY: usize = 1;

    fn play() -> GeneralizedMdp {
        GeneralizedMdp::deterministic(1, 2, &[0, 0], vec![0.0, 0.5], vec![0.5, 0.5]).unwrap()
    }

    fn work() -> GeneralizedMdp {
        GeneralizedMdp::deterministic(1, 2, &[0, 0], vec![0.3, 0.0], vec![0.9, 0.9]).unwrap()
    }

    fn traj(prefix: &[usize], cycle: &[usize]) -> TrajectorySpec {
        TrajectorySpec::from_actions(&play(), 0, prefix, cycle).unwrap()
    }

    fn summed(t: &TrajectorySpec) -> f64 {
        return_of_trajectory(&play(), t).unwrap() + return_of_trajectory(&work(), t).unwrap()
    }

    #[test]
    fn peril_table_rows() {
        assert!((summed(&traj(&[], &[PLAY])) - 1.0).abs() < 1e-12);
        assert!((summed(&traj(&[], &[WORK])) - 3.0).abs() < 1e-12);
        assert!((summed(&traj(&[PLAY], &[WORK])) - 3.2).abs() < 1e-12);
        assert!((summed(&traj(&[PLAY, PLAY], &[WORK])) - 3.18).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_trajectory_is_zero() {
        let zero = play().with_reward_and_discount(vec![0.0; 2], vec![0.7; 2]).unwrap();
        assert_eq!(return_of_trajectory(&zero, &traj(&[PLAY, WORK], &[PLAY, WORK, WORK])).unwrap(), 0.0);
    }

    #[test]
    fn unit_discount_cycle_diverges() {
        let m = GeneralizedMdp::deterministic(1, 1, &[0], vec![1.0], vec![1.0]).unwrap();
        let t = TrajectorySpec::from_actions(&m, 0, &[], &[0]).unwrap();
        assert!(matches!(return_of_trajectory(&m, &t), Err(Error::DivergentCycle { .. })));
        assert_eq!(truncated_return(&m, &t, 7), 7.0);
    }

    #[test]
    fn zero_discount_in_prefix_cuts_off_divergent_cycle() {
        // state 0 --(γ=0)--> state 1 with γ=1 self loop
        let m = GeneralizedMdp::deterministic(2, 1, &[1, 1], vec![1.0, 1.0], vec![0.0, 1.0]).unwrap();
        let t = TrajectorySpec::from_actions(&m, 0, &[], &[0]).unwrap();
        assert_eq!(return_of_trajectory(&m, &t).unwrap(), 1.0);
    }

    #[test]
    fn work_forever_stationary_value() {
        let v = evaluate_stationary(&work(), &PolicySpec::constant(1, WORK)).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_divergence_detected() {
        let m = GeneralizedMdp::deterministic(1, 1, &[0], vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(evaluate_stationary(&m, &PolicySpec::constant(1, 0)), Err(Error::Divergent { .. })));
    }

    #[test]
    fn stationary_requires_stationary_policy() {
        let p = PolicySpec::prefix_tail(vec![0], PolicySpec::constant(1, 0));
        assert!(evaluate_stationary(&work(), &p).is_err());
    }

    #[test]
    fn peril_prospect_play_then_work() {
        // the two objectives weighted (1, 1)
        let p = Prospect::new(Start::State(0), PolicySpec::prefix_tail(vec![PLAY], PolicySpec::constant(1, WORK)));
        let v =
            evaluate_prospect(&play(), &p, DEFAULT_TOL).unwrap() + evaluate_prospect(&work(), &p, DEFAULT_TOL).unwrap();
        assert!((v - 3.2).abs() < DEFAULT_TOL);
    }

    #[test]
    fn prospect_needs_positive_tol() {
        let p = Prospect::new(Start::State(0), PolicySpec::constant(1, WORK));
        assert!(evaluate_prospect(&work(), &p, 0.0).is_err());
    }

    #[test]
    fn point_mass_prospect_matches_stationary_entry() {
        let m = GeneralizedMdp::new(
            2,
            2,
            vec![vec![0.3, 0.7], vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]],
            vec![1.0, -0.5, 0.25, 2.0],
            vec![0.9, 0.8, 0.7, 0.95],
        )
        .unwrap();
        let pi = PolicySpec::Deterministic(vec![1, 0]);
        let v = evaluate_stationary(&m, &pi).unwrap();
        for (s, vs) in v.iter().enumerate() {
            let x = evaluate_prospect(&m, &Prospect::new(Start::State(s), pi.clone()), DEFAULT_TOL).unwrap();
            assert!((x - vs).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_and_backward_prefix_tail_agree() {
        let m = GeneralizedMdp::new(
            2,
            2,
            vec![vec![0.3, 0.7], vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]],
            vec![1.0, -0.5, 0.25, 2.0],
            vec![0.9, 0.8, 0.7, 0.95],
        )
        .unwrap();
        let tail = PolicySpec::Stochastic(vec![vec![0.2, 0.8], vec![0.6, 0.4]]);
        let pol = PolicySpec::prefix_tail(vec![1, 1, 0, 1], tail);
        let back = policy_values(&m, &pol).unwrap();
        let start = vec![0.25, 0.75];
        let fwd = evaluate_prospect(&m, &Prospect::new(Start::Distribution(start.clone()), pol), 1e-15).unwrap();
        assert!((fwd - (0.25 * back[0] + 0.75 * back[1])).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_of_scaled_identity() {
        let m = DMatrix::from_diagonal_element(3, 3, 0.5);
        assert!((spectral_radius(&m).unwrap() - 0.5).abs() < 1e-12);
    }
}
