//! Table of `Δ/M` against the envelope `[1/15, 29/15]`.

use rug::Rational;

use crate::analytic::main_term;
use crate::ball::Ball;
use crate::exact::{defect_in, exact_sequence_with};
use crate::par::{self, Execution};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EnvelopeRow {
    pub n: u64,
    pub ell: u64,
    /// Exact `p(n−1)p(ℓ+1) − p(n)p(ℓ)`.
    pub delta: Rational,
    /// `None` when `n ≤ ℓ + 1` (the main term vanishes or is undefined).
    pub main_term: Option<Ball>,
    pub ratio: Option<Ball>,
    pub hypotheses: bool,
    pub in_envelope: bool,
}

/// One row per `ℓ` in `ells` and `n = ℓ + offset`. Rows whose parameters
/// violate the main-term hypotheses are flagged, not rejected.
pub fn envelope_audit(alpha: &Rational, ells: &[u64], offsets: &[u64], prec: u32) -> Result<Vec<EnvelopeRow>> {
    envelope_audit_with(alpha, ells, offsets, prec, Execution::default())
}

pub fn envelope_audit_with(
    alpha: &Rational,
    ells: &[u64],
    offsets: &[u64],
    prec: u32,
    exec: Execution,
) -> Result<Vec<EnvelopeRow>> {
    if *alpha < 2 {
        return Err(Error::invalid("envelope audit needs alpha >= 2"));
    }
    let pairs: Vec<(u64, u64)> = ells
        .iter()
        .flat_map(|&l| offsets.iter().filter(|&&o| o >= 1).map(move |&o| (l + o, l)))
        .collect();
    let Some(top) = pairs.iter().map(|&(n, l)| n.max(l + 1)).max() else {
        return Ok(Vec::new());
    };
    let seq = exact_sequence_with(alpha, top, exec)?;
    let rows = par::map_indices(exec, pairs.len(), |i| -> Result<EnvelopeRow> {
        let (n, ell) = pairs[i];
        let delta = defect_in(&seq, n, ell)?.defect;
        let mut row = EnvelopeRow {
            n,
            ell,
            delta,
            main_term: None,
            ratio: None,
            hypotheses: false,
            in_envelope: false,
        };
        if n <= ell + 1 {
            return Ok(row);
        }
        let m = match main_term(alpha, n, ell, prec) {
            Ok(m) => m,
            Err(Error::InvalidArgument(_)) => return Ok(row),
            Err(e) => return Err(e),
        };
        let ratio = m.ratio(&row.delta);
        row.hypotheses = m.input.hypotheses;
        row.in_envelope = m.ratio_in_envelope(&ratio);
        row.main_term = Some(m.value);
        row.ratio = Some(ratio);
        Ok(row)
    });
    rows.into_iter().collect()
}
