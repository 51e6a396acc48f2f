//! Additive closure of a set of exponents: if `p_a` and `p_b` are
//! log-concave then so is `p_{a+b} = p_a * p_b`, so every nonnegative
//! integer combination of certified exponents is certified too.

use std::collections::BTreeSet;

use rug::{Integer, Rational};

use crate::{Error, Result};

/// Largest DP table accepted (values `≤ horizon` on the common-denominator grid).
pub const MAX_CLOSURE_CELLS: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureSet {
    base: Vec<Rational>,
    horizon: Rational,
    denominator: u64,
    // reach[i]: index into `base` of the last summand of a combination for i/denominator
    reach: Vec<Option<u32>>,
}

/// Every sum `Σ cᵢ bᵢ ≤ horizon` with nonnegative integers `cᵢ`, not all zero.
pub fn closure(base: &[Rational], horizon: &Rational) -> Result<ClosureSet> {
    if base.is_empty() {
        return Err(Error::invalid("closure base is empty"));
    }
    if let Some(b) = base.iter().find(|b| **b < 2) {
        return Err(Error::invalid(format!("closure base elements must be >= 2, got {b}")));
    }
    let mut uniq: Vec<Rational> = base.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    uniq.sort();
    let mut den = Integer::from(1);
    for b in &uniq {
        den.lcm_mut(b.denom());
    }
    let cells = Rational::from(horizon * &den).floor().numer().clone();
    let den = den
        .to_u64()
        .filter(|_| cells <= MAX_CLOSURE_CELLS)
        .ok_or_else(|| Error::OutOfRange {
            what: "closure table",
            detail: format!("horizon {horizon} on denominator grid exceeds {MAX_CLOSURE_CELLS} cells"),
        })?;
    let cells = cells.to_u64().unwrap_or(0);
    let steps: Vec<u64> = uniq
        .iter()
        .map(|b| Rational::from(b * den).numer().to_u64().expect("bounded by the table size"))
        .collect();
    let mut reach = vec![None; cells as usize + 1];
    for i in 1..=cells {
        for (j, &s) in steps.iter().enumerate() {
            if s <= i && (s == i || reach[(i - s) as usize].is_some()) {
                reach[i as usize] = Some(j as u32);
                break;
            }
        }
    }
    Ok(ClosureSet {
        base: uniq,
        horizon: horizon.clone(),
        denominator: den,
        reach,
    })
}

impl ClosureSet {
    pub fn base(&self) -> &[Rational] {
        &self.base
    }

    pub fn horizon(&self) -> &Rational {
        &self.horizon
    }

    fn index(&self, q: &Rational) -> Option<usize> {
        let scaled = Rational::from(q * self.denominator);
        if *scaled.denom() != 1 || scaled.cmp0().is_le() {
            return None;
        }
        let i = scaled.numer().to_usize()?;
        (i < self.reach.len()).then_some(i)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.index(q).is_some_and(|i| self.reach[i].is_some())
    }

    /// The covered values in increasing order.
    pub fn covered(&self) -> Vec<Rational> {
        self.reach
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_some())
            .map(|(i, _)| Rational::from((i as u64, self.denominator)))
            .collect()
    }

    /// Multiplicities `(bᵢ, cᵢ)` with `Σ cᵢ bᵢ = q`, if `q` is covered.
    pub fn decomposition(&self, q: &Rational) -> Option<Vec<(Rational, u64)>> {
        let mut i = self.index(q)?;
        let mut counts = vec![0u64; self.base.len()];
        while i > 0 {
            let j = self.reach[i]? as usize;
            counts[j] += 1;
            i -= Rational::from(&self.base[j] * self.denominator).numer().to_usize()?;
        }
        Some(
            self.base
                .iter()
                .zip(counts)
                .filter(|(_, c)| *c > 0)
                .map(|(b, c)| (b.clone(), c))
                .collect(),
        )
    }
}
