//! The main term `M(α, N, L)` governing `Δ = p(n−1)p(ℓ+1) − p(n)p(ℓ)`:
//!
//! `M = π(α/24)^{α/2+1} N^{−α/4−5/4} L^{−α/4−5/4} e^{π√(2α/3)(√N+√L)} (√N − √L)`
//!
//! with `N = n−1−α/24`, `L = ℓ−α/24`, and `Δ/M ∈ [1/15, 29/15]` once
//! `L ≥ max{2α¹¹, 100/(α−24)}`.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::Rational;

use crate::ball::Ball;
use crate::{Error, Result};

/// Smallest `ℓ` from which the main-term estimate (and with it the
/// inequality for every `n > ℓ`) is available: `2α¹¹ + α/24`, raised to
/// `100/(α−24) + α/24` when that is larger (only possible for `α > 24`).
pub fn hn_threshold(alpha: &Rational) -> Result<Rational> {
    if *alpha < 2 {
        return Err(Error::invalid("hn_threshold needs alpha >= 2"));
    }
    let a24 = Rational::from(alpha / 24u32);
    let first = alpha.clone().pow(11u32) * 2u32 + &a24;
    if *alpha > 24 {
        let second = Rational::from(100u32) / Rational::from(alpha - 24u32) + &a24;
        return Ok(first.max(second));
    }
    Ok(first)
}

/// The validated parameters of a main-term evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct MainTermInput {
    pub alpha: Rational,
    pub n: u64,
    pub ell: u64,
    /// `n − 1 − α/24`
    pub big_n: Rational,
    /// `ℓ − α/24`
    pub big_l: Rational,
    /// Whether `α ≥ 2`, `n > ℓ + 1` and `L ≥` the threshold all hold, so
    /// that the envelope is guaranteed.
    pub hypotheses: bool,
}

impl MainTermInput {
    pub fn new(alpha: &Rational, n: u64, ell: u64) -> Result<Self> {
        if *alpha < 2 {
            return Err(Error::invalid("main term needs alpha >= 2"));
        }
        if n < ell + 1 {
            return Err(Error::invalid(format!("main term needs n >= ell + 1 (n = {n}, ell = {ell})")));
        }
        let a24 = Rational::from(alpha / 24u32);
        let big_n = Rational::from(n - 1) - &a24;
        let big_l = Rational::from(ell) - &a24;
        if big_l.cmp0() != Ordering::Greater {
            return Err(Error::invalid(format!("main term needs ell > alpha/24 (ell = {ell})")));
        }
        let threshold = hn_threshold(alpha)? - &a24;
        let hypotheses = n > ell + 1 && big_l >= threshold;
        Ok(MainTermInput {
            alpha: alpha.clone(),
            n,
            ell,
            big_n,
            big_l,
            hypotheses,
        })
    }
}

#[derive(Clone, Debug)]
pub struct MainTerm {
    pub input: MainTermInput,
    pub value: Ball,
    /// `[1/15, 29/15]`, the guaranteed range of `Δ/M` under the hypotheses.
    pub envelope: (Rational, Rational),
}

impl MainTerm {
    /// Whether a ball for `Δ/M` lies inside the envelope.
    pub fn ratio_in_envelope(&self, ratio: &Ball) -> bool {
        let (lo, hi) = &self.envelope;
        let (r_lo, r_hi) = ratio.bounds();
        r_lo.is_finite() && r_hi.is_finite() && r_lo >= *lo && r_hi <= *hi
    }

    /// Enclosure of `Δ/M` for an exact `Δ`.
    pub fn ratio(&self, delta: &Rational) -> Ball {
        let p = self.value.prec();
        &Ball::from_rational(delta, p) / &self.value
    }
}

/// `[1/15, 29/15]`
pub fn envelope() -> (Rational, Rational) {
    (Rational::from((1, 15)), Rational::from((29, 15)))
}

/// Evaluates `M(α, N, L)` at `prec` bits of relative accuracy; the working
/// precision is raised by the size of the exponential factor.
pub fn main_term(alpha: &Rational, n: u64, ell: u64, prec: u32) -> Result<MainTerm> {
    let input = MainTermInput::new(alpha, n, ell)?;
    let envelope = envelope();
    if n == ell + 1 {
        // N = L
        let p = prec.max(64);
        return Ok(MainTerm {
            input,
            value: Ball::zero(p),
            envelope,
        });
    }
    let c = (2.0 * alpha.to_f64() / 3.0).sqrt() * std::f64::consts::PI;
    let expo = c * (input.big_n.to_f64().sqrt() + input.big_l.to_f64().sqrt());
    let p = prec.max(64) + (expo * std::f64::consts::LOG2_E) as u32 + 64;

    let nb = Ball::from_rational(&input.big_n, p);
    let lb = Ball::from_rational(&input.big_l, p);
    let (sn, sl) = (nb.sqrt(), lb.sqrt());
    let pi = Ball::pi(p);
    let a24 = Ball::from_rational(&Rational::from(alpha / 24u32), p);
    let e1 = Rational::from(alpha / 2u32) + 1u32;
    let e2 = -(Rational::from(alpha / 4u32) + Rational::from((5, 4)));
    let rate = (&pi * &Ball::from_rational(&(Rational::from(alpha * 2u32) / 3u32), p).sqrt()) * (&sn + &sl);
    // √N − √L = (N − L)/(√N + √L) avoids cancellation
    let gap = Rational::from(&input.big_n - &input.big_l);
    let diff = &Ball::from_rational(&gap, p) / &(&sn + &sl);
    let v = &(&(&(&pi * &a24.pow_rational(&e1)) * &nb.pow_rational(&e2)) * &lb.pow_rational(&e2)) * &rate.exp();
    Ok(MainTerm {
        input,
        value: &v * &diff,
        envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let t = hn_threshold(&Rational::from(2)).unwrap();
        assert_eq!(t, Rational::from(4096) + Rational::from((1, 12)));
        let t = hn_threshold(&Rational::from(3)).unwrap();
        assert_eq!(t, Rational::from(354_294) + Rational::from((1, 8)));
        let t = hn_threshold(&Rational::from(25)).unwrap();
        let want = Rational::from(25).pow(11u32) * 2u32 + Rational::from((25, 24));
        assert_eq!(t, want);
        assert!(hn_threshold(&Rational::from((3, 2))).is_err());
    }

    #[test]
    fn equal_arguments_vanish() {
        let m = main_term(&Rational::from(2), 4201, 4200, 128).unwrap();
        assert_eq!(*m.value.center(), 0);
        assert!(!m.input.hypotheses);
        assert!(main_term(&Rational::from(2), 4200, 4200, 128).is_err());
    }

    #[test]
    fn hypothesis_flag() {
        let i = MainTermInput::new(&Rational::from(2), 4099, 4097).unwrap();
        assert!(i.hypotheses);
        let i = MainTermInput::new(&Rational::from(2), 4098, 4096).unwrap();
        assert!(!i.hypotheses);
    }

    #[test]
    fn value_is_positive_and_tight() {
        let m = main_term(&Rational::from(2), 4300, 4200, 128).unwrap();
        assert!(m.value.is_positive());
        let rel = m.value.radius().to_f64() / m.value.center().to_f64();
        assert!(rel < 1e-30);
    }
}
