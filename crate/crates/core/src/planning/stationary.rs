use nalgebra::{DMatrix, DVector};

use super::{strictly_better, DEFAULT_ENUMERATION_CAP};
use crate::aggregation::{harsanyi_value, ObjectiveSet, WeightState};
use crate::error::{Error, Result};
use crate::model::{Action, State};
use crate::policy::PolicySpec;
use crate::valuation::evaluate_stationary;

/// Every deterministic action map in lexicographic order, last state
/// varying fastest.
pub fn stationary_action_maps(n_states: usize, n_actions: usize, cap: u128) -> Result<Vec<Vec<Action>>> {
    let count = (0..n_states).try_fold(1u128, |acc, _| acc.checked_mul(n_actions as u128)).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::CapExceeded { what: "stationary policies", count, cap });
    }
    if n_actions == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut map = vec![0; n_states];
    loop {
        out.push(map.clone());
        let Some(i) = (0..n_states).rev().find(|&i| map[i] + 1 < n_actions) else { break };
        map[i] += 1;
        map[i + 1..].iter_mut().for_each(|a| *a = 0);
    }
    Ok(out)
}

pub fn enumerate_stationary(objs: &ObjectiveSet, cap: u128) -> Result<Vec<PolicySpec>> {
    Ok(stationary_action_maps(objs.n_states(), objs.n_actions(), cap)?
        .into_iter()
        .map(PolicySpec::Deterministic)
        .collect())
}

/// Maximizes `c + Σ w_i y_i V_i(start, π)` over deterministic stationary
/// policies. Divergent policies are skipped; ties keep the earliest policy.
pub fn best_stationary(objs: &ObjectiveSet, ws: &WeightState, start: State) -> Result<(PolicySpec, f64)> {
    if start >= objs.n_states() {
        return Err(Error::InvalidArgument(format!("state {start} out of range")));
    }
    let mut best: Option<(PolicySpec, f64)> = None;
    for policy in enumerate_stationary(objs, DEFAULT_ENUMERATION_CAP)? {
        let values: Result<Vec<f64>> =
            objs.iter().map(|o| evaluate_stationary(&o.mdp, &policy).map(|v| v[start])).collect();
        let values = match values {
            Ok(v) => v,
            Err(Error::Divergent { .. } | Error::SingularSystem) => continue,
            Err(e) => return Err(e),
        };
        let v = harsanyi_value(ws, &values)?;
        if best.as_ref().is_none_or(|(_, b)| strictly_better(v, *b)) {
            best = Some((policy, v));
        }
    }
    best.ok_or(Error::NoTailCandidates { state: start })
}

fn chain_matrix(objs: &ObjectiveSet, policy: &PolicySpec) -> Result<DMatrix<f64>> {
    let dynamics = objs.dynamics();
    policy.validate(dynamics)?;
    if !policy.is_stationary() {
        return Err(Error::InvalidPolicy("expected a stationary policy".into()));
    }
    let (n, na) = (dynamics.n_states(), dynamics.n_actions());
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for (a, pa) in policy.action_probs(s, na).expect("stationary").into_iter().enumerate() {
            for (next, &t) in dynamics.transition(s, a).iter().enumerate() {
                p[(s, next)] += pa * t;
            }
        }
    }
    Ok(p)
}

/// Number of closed communicating classes of the positive-probability graph.
fn closed_classes(p: &DMatrix<f64>) -> usize {
    let n = p.nrows();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            let mut seen = vec![false; n];
            let mut stack = vec![i];
            seen[i] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if p[(u, v)] > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        })
        .collect();
    // i is recurrent when everything it reaches reaches it back
    let recurrent: Vec<usize> = (0..n).filter(|&i| (0..n).all(|j| !reach[i][j] || reach[j][i])).collect();
    let mut classes: Vec<&Vec<bool>> = Vec::new();
    for &i in &recurrent {
        if !classes.iter().any(|c| *c == &reach[i]) {
            classes.push(&reach[i]);
        }
    }
    classes.len()
}

/// `d = dᵀ P_π`, `Σ d = 1`. Transient states receive zero mass; more than one
/// closed class is an error.
pub fn stationary_distribution(objs: &ObjectiveSet, policy: &PolicySpec) -> Result<Vec<f64>> {
    let p = chain_matrix(objs, policy)?;
    let classes = closed_classes(&p);
    if classes != 1 {
        return Err(Error::NonUniqueStationary { classes });
    }
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let d = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
    Ok(d.iter().copied().collect())
}

/// `Σ_s d_π(s) (c + Σ_i w_i y_i V_i(s, π))`.
pub fn avg_objective(objs: &ObjectiveSet, ws: &WeightState, policy: &PolicySpec) -> Result<f64> {
    let d = stationary_distribution(objs, policy)?;
    let per_objective: Vec<Vec<f64>> =
        objs.iter().map(|o| evaluate_stationary(&o.mdp, policy)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for (s, ds) in d.iter().enumerate() {
        let values: Vec<f64> = per_objective.iter().map(|v| v[s]).collect();
        total += ds * harsanyi_value(ws, &values)?;
    }
    Ok(total)
}
