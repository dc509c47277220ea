use crate::error::{Error, Result};
use crate::model::{Action, GeneralizedMdp, State};

const PROB_TOL: f64 = 1e-9;

/// The policy forms that admit exact valuation.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// One action per state.
    Deterministic(Vec<Action>),
    /// An action distribution per state.
    Stochastic(Vec<Vec<f64>>),
    /// Pick component `k` with probability `p_k` once at the start, then follow it.
    Mixture(Vec<(f64, PolicySpec)>),
    /// Open-loop action list, then a stationary or mixture tail.
    PrefixTail { prefix: Vec<Action>, tail: Box<PolicySpec> },
}

impl PolicySpec {
    pub fn constant(n_states: usize, action: Action) -> Self {
        PolicySpec::Deterministic(vec![action; n_states])
    }

    pub fn prefix_tail(prefix: Vec<Action>, tail: PolicySpec) -> Self {
        PolicySpec::PrefixTail { prefix, tail: Box::new(tail) }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, PolicySpec::Deterministic(_) | PolicySpec::Stochastic(_))
    }

    /// Action probabilities at `s` for a stationary policy.
    pub fn action_probs(&self, s: State, n_actions: usize) -> Option<Vec<f64>> {
        match self {
            PolicySpec::Deterministic(map) => {
                let mut p = vec![0.0; n_actions];
                p[map[s]] = 1.0;
                Some(p)
            }
            PolicySpec::Stochastic(rows) => Some(rows[s].clone()),
            _ => None,
        }
    }

    pub fn validate(&self, mdp: &GeneralizedMdp) -> Result<()> {
        let (ns, na) = (mdp.n_states(), mdp.n_actions());
        match self {
            PolicySpec::Deterministic(map) => {
                if map.len() != ns {
                    return Err(Error::DimensionMismatch { expected: ns, got: map.len() });
                }
                if let Some(a) = map.iter().find(|&&a| a >= na) {
                    return Err(Error::InvalidPolicy(format!("action {a} out of range")));
                }
            }
            PolicySpec::Stochastic(rows) => {
                if rows.len() != ns {
                    return Err(Error::DimensionMismatch { expected: ns, got: rows.len() });
                }
                for (s, row) in rows.iter().enumerate() {
                    if row.len() != na {
                        return Err(Error::DimensionMismatch { expected: na, got: row.len() });
                    }
                    check_distribution(row, &format!("action distribution at state {s}"))?;
                }
            }
            PolicySpec::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidPolicy("empty mixture".into()));
                }
                let probs: Vec<f64> = parts.iter().map(|(p, _)| *p).collect();
                check_distribution(&probs, "mixture probabilities")?;
                for (_, part) in parts {
                    part.validate(mdp)?;
                }
            }
            PolicySpec::PrefixTail { prefix, tail } => {
                if let Some(a) = prefix.iter().find(|&&a| a >= na) {
                    return Err(Error::InvalidPolicy(format!("action {a} out of range")));
                }
                if matches!(**tail, PolicySpec::PrefixTail { .. }) {
                    return Err(Error::InvalidPolicy("tail must be stationary or a mixture".into()));
                }
                tail.validate(mdp)?;
            }
        }
        Ok(())
    }
}

/// Where a prospect starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    State(State),
    Distribution(Vec<f64>),
}

impl Start {
    pub fn distribution(&self, n_states: usize) -> Result<Vec<f64>> {
        match self {
            Start::State(s) => {
                if *s >= n_states {
                    return Err(Error::InvalidArgument(format!("state {s} out of range")));
                }
                let mut d = vec![0.0; n_states];
                d[*s] = 1.0;
                Ok(d)
            }
            Start::Distribution(d) => {
                if d.len() != n_states {
                    return Err(Error::DimensionMismatch { expected: n_states, got: d.len() });
                }
                check_distribution(d, "start distribution")?;
                Ok(d.clone())
            }
        }
    }
}

/// A start paired with a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Prospect {
    pub start: Start,
    pub policy: PolicySpec,
}

impl Prospect {
    pub fn new(start: Start, policy: PolicySpec) -> Self {
        Self { start, policy }
    }
}

pub(crate) fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidPolicy(format!("{what} has a negative entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidPolicy(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mdp() -> GeneralizedMdp {
        GeneralizedMdp::deterministic(2, 2, &[0, 1, 1, 0], vec![0.0; 4], vec![0.9; 4]).unwrap()
    }

    #[test]
    fn mixture_probabilities_must_sum_to_one() {
        let m = PolicySpec::Mixture(vec![(0.5, PolicySpec::constant(2, 0)), (0.4, PolicySpec::constant(2, 1))]);
        assert!(matches!(m.validate(&mdp()), Err(Error::InvalidPolicy(_))));
    }

    #[test]
    fn nested_prefix_tail_is_rejected() {
        let inner = PolicySpec::prefix_tail(vec![0], PolicySpec::constant(2, 0));
        let outer = PolicySpec::prefix_tail(vec![1], inner);
        assert!(outer.validate(&mdp()).is_err());
    }

    #[test]
    fn stochastic_rows_checked() {
        let p = PolicySpec::Stochastic(vec![vec![0.5, 0.5], vec![1.0, 0.1]]);
        assert!(p.validate(&mdp()).is_err());
        let p = PolicySpec::Stochastic(vec![vec![0.5, 0.5], vec![1.0, 0.0]]);
        p.validate(&mdp()).unwrap();
    }

    #[test]
    fn start_distribution() {
        assert_eq!(Start::State(1).distribution(2).unwrap(), vec![0.0, 1.0]);
        assert!(Start::Distribution(vec![0.3, 0.3]).distribution(2).is_err());
        assert!(Start::State(2).distribution(2).is_err());
    }
}
