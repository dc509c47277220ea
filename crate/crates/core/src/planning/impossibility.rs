//! Exact check of whether one aggregate discount can make a Markovian
//! aggregate agree with two objectives at a single state-action pair.
//!
//! With `Π_β = βΠ + (1−β)Ω` and `V_i(Λ) = 0`, matching the aggregate to the
//! weighted sum at `(s, a)` requires
//! `w_1 γ_1 V_1(Π_β) + w_2 γ_2 V_2(Π_β) = γ_Σ (w_1 V_1(Π_β) + w_2 V_2(Π_β))`
//! for every β. At `β_1` (where `V_1(Π_β) = 0`) this forces `γ_Σ = γ_2`; at
//! `β_2` it forces `γ_Σ = γ_1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Discounts at the designated pair and the successor-state values of the
/// policies Π and Ω for both objectives. Λ is worth 0 to both.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpossibilityInstance {
    pub gamma: [f64; 2],
    pub value_pi: [f64; 2],
    pub value_omega: [f64; 2],
    pub weights: [f64; 2],
}

impl ImpossibilityInstance {
    /// Requires `V_1(Π) > 0 > V_1(Ω)`, `V_2(Ω) > 0 > V_2(Π)`, nonzero weights
    /// and `β_1 ≠ β_2`.
    pub fn new(gamma: [f64; 2], value_pi: [f64; 2], value_omega: [f64; 2], weights: [f64; 2]) -> Result<Self> {
        let all = gamma.iter().chain(&value_pi).chain(&value_omega).chain(&weights);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("all inputs must be finite".into()));
        }
        if gamma.iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidInstance("discounts must be nonnegative".into()));
        }
        if !(value_pi[0] > 0.0 && value_omega[0] < 0.0) {
            return Err(Error::InvalidInstance("objective 1 must prefer Π over Λ over Ω".into()));
        }
        if !(value_omega[1] > 0.0 && value_pi[1] < 0.0) {
            return Err(Error::InvalidInstance("objective 2 must prefer Ω over Λ over Π".into()));
        }
        if weights.contains(&0.0) {
            return Err(Error::InvalidInstance("weights must be nonzero".into()));
        }
        let inst = Self { gamma, value_pi, value_omega, weights };
        let (b1, b2) = inst.betas();
        if b1 == b2 {
            return Err(Error::DegenerateInstance("β_1 = β_2".into()));
        }
        Ok(inst)
    }

    /// Fixed value pattern (β_1 = 1/2, β_2 = 1/4, unit weights) at the given discounts.
    pub fn with_discounts(gamma1: f64, gamma2: f64) -> Result<Self> {
        Self::new([gamma1, gamma2], [1.0, -3.0], [-1.0, 1.0], [1.0, 1.0])
    }

    /// `β_i` solving `β V_i(Π) + (1 − β) V_i(Ω) = 0`.
    pub fn betas(&self) -> (BigRational, BigRational) {
        let beta = |i: usize| {
            let (p, o) = (exact(self.value_pi[i]), exact(self.value_omega[i]));
            o.clone() / (o - p)
        };
        (beta(0), beta(1))
    }

    /// `γ_Σ` implied by the combined equation at mixture parameter `β`.
    fn implied_gamma_sigma(&self, beta: &BigRational) -> Result<BigRational> {
        let one = BigRational::from_integer(BigInt::from(1));
        let mixed = |i: usize| beta * exact(self.value_pi[i]) + (&one - beta) * exact(self.value_omega[i]);
        let a = exact(self.weights[0]) * mixed(0);
        let b = exact(self.weights[1]) * mixed(1);
        let total = &a + &b;
        if total.is_zero() {
            return Err(Error::DegenerateInstance("weighted values cancel at this β".into()));
        }
        Ok((exact(self.gamma[0]) * a + exact(self.gamma[1]) * b) / total)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("inputs are checked finite")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Consistent {
        gamma_sigma: BigRational,
    },
    /// The two values `γ_Σ` would have to take simultaneously.
    Contradiction {
        at_beta1: BigRational,
        at_beta2: BigRational,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpossibilityReport {
    pub beta1: BigRational,
    pub beta2: BigRational,
    pub verdict: Verdict,
}

impl ImpossibilityReport {
    pub fn is_consistent(&self) -> bool {
        matches!(self.verdict, Verdict::Consistent { .. })
    }

    /// `γ_Σ` as a float when consistent.
    pub fn gamma_sigma(&self) -> Option<f64> {
        match &self.verdict {
            Verdict::Consistent { gamma_sigma } => gamma_sigma.to_f64(),
            Verdict::Contradiction { .. } => None,
        }
    }
}

pub fn impossibility_check(inst: &ImpossibilityInstance) -> Result<ImpossibilityReport> {
    let (beta1, beta2) = inst.betas();
    if beta1 == beta2 {
        return Err(Error::DegenerateInstance("β_1 = β_2".into()));
    }
    let at_beta1 = inst.implied_gamma_sigma(&beta1)?;
    let at_beta2 = inst.implied_gamma_sigma(&beta2)?;
    let verdict = if at_beta1 == at_beta2 {
        Verdict::Consistent { gamma_sigma: at_beta1 }
    } else {
        Verdict::Contradiction { at_beta1, at_beta2 }
    };
    Ok(ImpossibilityReport { beta1, beta2, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn equal_discounts_are_consistent() {
        let r = impossibility_check(&ImpossibilityInstance::with_discounts(0.7, 0.7).unwrap()).unwrap();
        assert_eq!(r.gamma_sigma(), Some(0.7));
        assert_eq!((r.beta1, r.beta2), (rational(1, 2), rational(1, 4)));
    }

    #[test]
    fn peril_discounts_contradict() {
        let r = impossibility_check(&ImpossibilityInstance::with_discounts(0.5, 0.9).unwrap()).unwrap();
        match r.verdict {
            Verdict::Contradiction { at_beta1, at_beta2 } => {
                assert_eq!(at_beta1.to_f64(), Some(0.9));
                assert_eq!(at_beta2.to_f64(), Some(0.5));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn symmetric_values_are_degenerate() {
        let r = ImpossibilityInstance::new([0.5, 0.9], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]);
        assert!(matches!(r, Err(Error::DegenerateInstance(_))));
    }

    #[test]
    fn sign_pattern_enforced() {
        assert!(ImpossibilityInstance::new([0.5, 0.9], [1.0, 1.0], [-1.0, 1.0], [1.0, 1.0]).is_err());
        assert!(ImpossibilityInstance::new([0.5, 0.9], [1.0, -2.0], [-1.0, 1.0], [0.0, 1.0]).is_err());
    }
}
