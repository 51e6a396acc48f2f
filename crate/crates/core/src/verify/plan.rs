//! How a target statement is split into a finite check and the analytic
//! range above the threshold.

use std::fmt;

use rug::Rational;

use super::closure::closure;
use crate::analytic::hn_threshold;
use crate::bounds::DEFAULT_PRECISION;
use crate::par::Execution;
use crate::rational::display_rational;
use crate::{Error, Result};

/// The exceptional pair of the inequality at `α = 2`.
pub const EXCEPTIONAL_PAIR: (u64, u64) = (6, 4);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    /// `p_k(n−1)p_k(ℓ+1) ≥ p_k(n)p_k(ℓ)` for integer `k ≥ 2`.
    Cft(u64),
    /// The same inequality for a rational `α ≥ 2`.
    Hn(Rational),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cft(k) => write!(f, "cft(k={k})"),
            Target::Hn(a) => write!(f, "hn(alpha={})", display_rational(a)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteMethod {
    Exact,
    Bounded { schedule: String, precision_bits: u32 },
    /// Log-concavity inherited from the listed exponents by convolution.
    Closure { base: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationPlan {
    pub target: Target,
    /// `hn_threshold(α)`: the analytic argument covers everything from here on.
    pub threshold: Rational,
    pub finite_method: FiniteMethod,
    pub range: [u64; 2],
    pub expected_exceptions: Vec<(u64, u64)>,
}

impl VerificationPlan {
    /// Whether the finite range reaches the threshold, so the combined claim
    /// holds for all `n`.
    pub fn covers_threshold(&self) -> bool {
        self.threshold <= self.range[1]
    }
}

/// Sizes of the finite checks.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Largest sequence index the exact method is used for.
    pub exact_cap: u64,
    /// Pair-scan range for `k = 2`.
    pub cft2_n_max: u64,
    /// Log-concavity range certified for the base exponents `3, 4, 5`.
    pub base_n_max: u64,
    pub precision_bits: u32,
    pub execution: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            exact_cap: 5000,
            cft2_n_max: 4097,
            base_n_max: 1000,
            precision_bits: DEFAULT_PRECISION,
            execution: Execution::default(),
        }
    }
}

/// Builtin schedule used for bounded certification of exponent `k`.
pub fn default_schedule(k: u64) -> &'static str {
    match k {
        4 => "d4",
        5 => "d5",
        _ => "full",
    }
}

/// Exponents from `{3, 4, 5}` summing to `k ≥ 6`, with multiplicities.
pub fn base_decomposition(k: u64) -> Result<Vec<(u64, u64)>> {
    let base = [3u64, 4, 5].map(Rational::from);
    let set = closure(&base, &Rational::from(k))?;
    let parts = set
        .decomposition(&Rational::from(k))
        .ok_or_else(|| Error::invalid(format!("{k} is not a sum of 3, 4 and 5")))?;
    Ok(parts
        .into_iter()
        .map(|(b, m)| (b.numer().to_u64().expect("small base"), m))
        .collect())
}

pub fn plan_cft(k: u64, config: &VerifyConfig) -> Result<VerificationPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("the colored-partition inequality is stated for k >= 2, got {k}")));
    }
    let threshold = hn_threshold(&Rational::from(k))?;
    let (finite_method, range, expected) = match k {
        2 => (FiniteMethod::Exact, [1, config.cft2_n_max], vec![EXCEPTIONAL_PAIR]),
        3..=5 => {
            let method = if config.base_n_max < config.exact_cap {
                FiniteMethod::Exact
            } else {
                FiniteMethod::Bounded {
                    schedule: default_schedule(k).into(),
                    precision_bits: config.precision_bits,
                }
            };
            (method, [1, config.base_n_max], Vec::new())
        }
        _ => {
            let base = base_decomposition(k)?.into_iter().map(|(b, _)| b).collect();
            (FiniteMethod::Closure { base }, [1, config.base_n_max], Vec::new())
        }
    };
    Ok(VerificationPlan {
        target: Target::Cft(k),
        threshold,
        finite_method,
        range,
        expected_exceptions: expected,
    })
}

pub fn plan_hn(alpha: &Rational, n_cap: u64) -> Result<VerificationPlan> {
    let threshold = hn_threshold(alpha)?;
    let top = Rational::from(threshold.ceil_ref()).numer().to_u64().unwrap_or(u64::MAX);
    Ok(VerificationPlan {
        target: Target::Hn(alpha.clone()),
        threshold,
        finite_method: FiniteMethod::Exact,
        range: [1, n_cap.min(top)],
        expected_exceptions: Vec::new(),
    })
}
