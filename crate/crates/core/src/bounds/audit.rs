//! Cross-check of the bound recursions against exact values.

use rug::Rational;

use super::{run_bounds, RunOptions, TruncationSchedule};
use crate::exact::exact_sequence_with;
use crate::par::Execution;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub alpha: Rational,
    pub schedule: String,
    pub n_audit: u64,
    pub precision_bits: u32,
    /// Largest `(upper − lower)/lower` seen.
    pub worst_gap: f64,
    pub worst_gap_n: u64,
}

/// Checks `lower(n) ≤ p_α(n) ≤ upper(n)` for every `n ≤ n_audit`; any
/// violation is returned as [`Error::SandwichViolation`].
pub fn sandwich_audit(
    alpha: &Rational,
    schedule: TruncationSchedule,
    n_audit: u64,
    precision_bits: u32,
) -> Result<SandwichReport> {
    sandwich_audit_with(alpha, schedule, n_audit, precision_bits, Execution::default())
}

pub fn sandwich_audit_with(
    alpha: &Rational,
    schedule: TruncationSchedule,
    n_audit: u64,
    precision_bits: u32,
    execution: Execution,
) -> Result<SandwichReport> {
    let exact = exact_sequence_with(alpha, n_audit, execution)?;
    let name = schedule.spec();
    let mut worst = (0.0f64, 0u64);
    let options = RunOptions {
        execution,
        ..RunOptions::default()
    };
    run_bounds(alpha, schedule, n_audit, precision_bits, &options, |pair| {
        let v = exact.get(pair.n);
        if pair.lower.cmp_rational(v).is_gt() {
            return Err(Error::SandwichViolation {
                n: pair.n,
                detail: format!("lower bound {} exceeds the exact value", pair.lower.to_float(64)),
            });
        }
        if pair.upper.cmp_rational(v).is_lt() {
            return Err(Error::SandwichViolation {
                n: pair.n,
                detail: format!("upper bound {} is below the exact value", pair.upper.to_float(64)),
            });
        }
        let gap = pair.relative_gap();
        if gap > worst.0 {
            worst = (gap, pair.n);
        }
        Ok(())
    })?;
    Ok(SandwichReport {
        alpha: alpha.clone(),
        schedule: name,
        n_audit,
        precision_bits,
        worst_gap: worst.0,
        worst_gap_n: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::make_schedule;

    #[test]
    fn crude_schedule_still_sandwiches() {
        let r = sandwich_audit(&Rational::from(3), make_schedule("const(1)").unwrap(), 50, 128).unwrap();
        assert!(r.worst_gap > 0.0 && r.worst_gap.is_finite());
    }

    #[test]
    fn full_schedule_gap_is_rounding_only() {
        let r = sandwich_audit(&Rational::from(4), make_schedule("d4").unwrap(), 300, 256).unwrap();
        assert!(r.worst_gap < 1e-60, "{}", r.worst_gap);
    }
}
