//! The upper incomplete gamma function `Γ(a, x) = ∫_x^∞ t^{a−1} e^{−t} dt`.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::float::Round;
use rug::{Float, Rational};

use crate::ball::Ball;
use crate::{Error, Result};

/// `(52/17)·x^{a−1}·e^{−x}`, an upper bound for `Γ(a, x)` when `a ≥ 5/2`
/// and `x ≥ a⁶/120`.
pub fn incomplete_gamma_upper(a: &Rational, x: &Rational, prec: u32) -> Result<Float> {
    let a6 = a.clone().pow(6u32) / 120u32;
    if *a < (5, 2) || *x < a6 {
        return Err(Error::Regime(format!(
            "incomplete gamma bound needs a >= 5/2 and x >= a^6/120 = {}",
            a6.to_f64()
        )));
    }
    let xb = Ball::from_rational(x, prec);
    let am1 = Rational::from(a - 1u32);
    let v = &(&xb.pow_rational(&am1) * &(-&xb).exp()).mul_rational(&Rational::from((52, 17))) * &Ball::one(prec);
    Ok(v.upper())
}

/// Certified enclosure of `Γ(a, x)` for `a > 0`, `x > 0`.
///
/// For `x` well above `a` the truncated asymptotic expansion
/// `x^{a−1}e^{−x} Σ_{k<K} (a−1)(a−2)⋯(a−k)/x^k` is used; once `K ≥ a − 1`
/// its remainder `(a−1)⋯(a−K)·Γ(a−K, x)` is bounded in modulus by the first
/// omitted term. Otherwise `Γ(a) − γ(a, x)` with the lower series evaluated at
/// a working precision raised by the expected cancellation.
pub fn gamma_upper_eval(a: &Rational, x: &Rational, prec: u32) -> Result<Ball> {
    if a.cmp0() != Ordering::Greater || x.cmp0() != Ordering::Greater {
        return Err(Error::invalid("gamma_upper_eval needs a > 0 and x > 0"));
    }
    if let Some(b) = asymptotic(a, x, prec) {
        return Ok(b);
    }
    Ok(complement(a, x, prec))
}

fn asymptotic(a: &Rational, x: &Rational, prec: u32) -> Option<Ball> {
    let xf = x.to_f64();
    let af = a.to_f64();
    if xf < 2.0 * af.max(1.0) + 2.0 {
        return None;
    }
    let p = prec + 32;
    let xb = Ball::from_rational(x, p);
    let mut term = Ball::one(p);
    let mut sum = Ball::zero(p);
    let need = f64::from(prec) + 8.0;
    for k in 0..4 * prec as u64 {
        let next = term.mul_rational(&Rational::from(a - (k + 1))) / &xb;
        sum = &sum + &term;
        let past_turn = k + 1 >= Rational::from(a - 1u32);
        let mag_next = next.abs_upper();
        if past_turn && mag_next > 0 {
            let rel = mag_next.clone().log2().to_f64() - sum.lower().log2().to_f64();
            if rel < -need {
                let pref = &xb.pow_rational(&Rational::from(a - 1u32)) * &(-&xb).exp();
                return Some((&sum.add_error(&mag_next) * &pref).with_prec(prec));
            }
        }
        if past_turn && mag_next >= term.abs_upper() {
            // terms are growing again: not accurate enough here
            return None;
        }
        if mag_next == 0 {
            let pref = &xb.pow_rational(&Rational::from(a - 1u32)) * &(-&xb).exp();
            return Some((&(&sum + &next) * &pref).with_prec(prec));
        }
        term = next;
    }
    None
}

fn complement(a: &Rational, x: &Rational, prec: u32) -> Ball {
    // Γ(a,x)/Γ(a) can be as small as ~e^{-x}; carry that many extra bits
    let extra = (x.to_f64() * std::f64::consts::LOG2_E).ceil() as u32 + 64;
    let p = prec + extra;
    let xb = Ball::from_rational(x, p);
    // γ(a,x) = x^a e^{−x} Σ_{m≥0} x^m / (a(a+1)⋯(a+m))
    let mut term = Ball::one(p).mul_rational(&Rational::from(a.recip_ref()));
    let mut sum = term.clone();
    let x_hi = xb.upper();
    let mut m = 0u64;
    loop {
        let den = Rational::from(a + (m + 1));
        term = term.mul_rational(&Rational::from(den.recip_ref())) * &xb;
        sum = &sum + &term;
        m += 1;
        let den_next = Float::with_val_round(p, &Rational::from(a + (m + 1)), Round::Down).0;
        let r = Float::with_val_round(p, &x_hi / &den_next, Round::Up).0;
        if r < 0.5 {
            let tail = Float::with_val_round(p, term.upper() * &r, Round::Up).0 * 2u32;
            let small = tail.clone().log2().to_f64() < sum.lower().log2().to_f64() - f64::from(p);
            if small || m > 1_000_000 {
                let lower = sum.add_nonneg_bound(&tail);
                let pref = &xb.pow_rational(a) * &(-&xb).exp();
                let g = &lower * &pref;
                let gamma_a = Ball::from_rational(a, p).gamma();
                return (&gamma_a - &g).with_prec(prec);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn closed_forms() {
        let e2 = (-2f64).exp();
        let g = gamma_upper_eval(&r(1, 1), &r(2, 1), 128).unwrap();
        assert!((g.to_f64() - e2).abs() < 1e-15, "{g}");
        let g = gamma_upper_eval(&r(2, 1), &r(2, 1), 128).unwrap();
        assert!((g.to_f64() - 3.0 * e2).abs() < 1e-15, "{g}");
        // the asymptotic branch terminates exactly for integer a
        let g = gamma_upper_eval(&r(2, 1), &r(40, 1), 128).unwrap();
        assert!((g.to_f64() / (41.0 * (-40f64).exp()) - 1.0).abs() < 1e-14, "{g}");
        let g = gamma_upper_eval(&r(5, 2), &r(60, 1), 128).unwrap();
        let s = complement(&r(5, 2), &r(60, 1), 128);
        assert!(g.overlaps(&s));
    }

    #[test]
    fn bound_regime() {
        assert!(incomplete_gamma_upper(&r(2, 1), &r(100, 1), 64).is_err());
        assert!(incomplete_gamma_upper(&r(5, 2), &r(2, 1), 64).is_err());
        let b = incomplete_gamma_upper(&r(5, 2), &r(51, 25), 128).unwrap();
        let v = gamma_upper_eval(&r(5, 2), &r(51, 25), 128).unwrap();
        assert!(v.upper() <= b);
    }
}
