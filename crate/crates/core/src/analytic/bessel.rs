//! Enclosures and upper bounds for the modified Bessel function `I_κ`.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::float::Round;
use rug::{Float, Rational};

use crate::ball::Ball;
use crate::{Error, Result};

/// Which representation evaluates `I_κ(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Series,
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesselRegime {
    pub kappa: Rational,
    pub x: Rational,
    pub regime: Regime,
    /// Whether the four-term asymptotic expansion is valid at `(κ, x)`.
    pub validity: bool,
}

/// `(κ + 7/2)⁶ / 120`, where the four-term expansion becomes valid.
pub fn asymptotic_threshold(kappa: &Rational) -> Rational {
    let t = kappa + Rational::from((7, 2));
    t.pow(6u32) / 120u32
}

/// Classifies `(κ, x)`: asymptotic when `κ ≥ 2` and `x ≥ (κ+7/2)⁶/120`.
pub fn bessel_regime(kappa: &Rational, x: &Rational) -> BesselRegime {
    let validity = *kappa >= 2 && *x >= asymptotic_threshold(kappa);
    BesselRegime {
        kappa: kappa.clone(),
        x: x.clone(),
        regime: if validity { Regime::Asymptotic } else { Regime::Series },
        validity,
    }
}

/// `base^e` for a ball with nonnegative lower end and `e > 0`.
pub(crate) fn pow_nonneg(base: &Ball, e: &Rational) -> Ball {
    if base.is_positive() {
        return base.pow_rational(e);
    }
    let p = base.prec();
    let hi = base.upper();
    if hi <= 0 {
        return Ball::zero(p);
    }
    let top = Ball::from_bounds(hi.clone(), hi).pow_rational(e).upper();
    Ball::from_bounds(Float::with_val(p, 0), top)
}

/// Ascending series `Σ_m (x/2)^{κ+2m} / (m! Γ(κ+m+1))` with a geometric
/// majorant for the remainder. Stops after `max_terms` terms or once the
/// remainder falls below the working precision.
pub fn bessel_i_series(kappa: &Rational, x: &Ball, max_terms: usize) -> Ball {
    let p = x.prec();
    if kappa.cmp0() == Ordering::Less || x.lower() < 0 {
        return Ball::everything(p);
    }
    if x.upper() == 0 {
        return if kappa.cmp0() == Ordering::Equal { Ball::one(p) } else { Ball::zero(p) };
    }
    let half = x.div_u64(2);
    let q = half.sqr();
    let q_hi = q.upper();
    let k1 = Ball::from_rational(&Rational::from(kappa + 1u32), p);
    let mut term = &pow_nonneg(&half, kappa) / &k1.gamma();
    let mut sum = term.clone();
    let kf = Float::with_val(p, kappa);
    for m in 0..max_terms as u64 {
        // t_{m+1} = t_m · (x/2)² / ((m+1)(κ+m+1))
        let denom = Float::with_val_round(p, (m + 1) as f64, Round::Down).0
            * Float::with_val_round(p, &kf + (m + 1), Round::Down).0;
        let ratio_bound = Float::with_val_round(p, &q_hi / &denom, Round::Up).0;
        let den_ball = Ball::from_rational(&(Rational::from(kappa + (m + 1)) * (m + 1)), p);
        term = &(&term * &q) / &den_ball;
        if ratio_bound < 0.5 {
            // remaining terms after this one are bounded by term·r/(1−r)
            let t_hi = term.upper();
            let one_minus = Float::with_val_round(p, 1 - &ratio_bound, Round::Down).0;
            let tail = Float::with_val_round(p, &t_hi * &ratio_bound, Round::Up).0;
            let tail = Float::with_val_round(p, &tail / &one_minus, Round::Up).0;
            sum = &sum + &term;
            let scale = sum.lower();
            if tail == 0 || (scale > 0 && Float::with_val(p, &tail / &scale) < Float::with_val(p, 1) >> (p as i32 + 8)) || m + 1 == max_terms as u64 {
                return sum.add_nonneg_bound(&tail);
            }
        } else {
            sum = &sum + &term;
        }
    }
    // the majorant never became geometric: no certified remainder
    Ball::everything(p)
}

fn mu(kappa: &Rational, j: u32) -> Rational {
    (kappa.clone().square() * 4u32) - j
}

/// Four-term expansion `e^x/√(2πx)·[1 − μ₁/(8x) + μ₁μ₉/(128x²) − μ₁μ₉μ₂₅/(3072x³)]`
/// with `μ_j = 4κ² − j`, widened by the error term `(31κ⁸/(6x⁴))·e^x/√(2πx)`.
pub fn bessel_i_asymptotic(kappa: &Rational, x: &Ball) -> Result<Ball> {
    let p = x.prec();
    let thr = asymptotic_threshold(kappa);
    if *kappa < 2 || x.lower() < thr {
        return Err(Error::Regime(format!(
            "asymptotic expansion needs kappa >= 2 and x >= {} (use the series)",
            thr.to_f64()
        )));
    }
    let m1 = mu(kappa, 1);
    let m9 = mu(kappa, 9);
    let m25 = mu(kappa, 25);
    let inv = &Ball::one(p) / x;
    let t1 = inv.mul_rational(&(m1.clone() / 8u32));
    let t2 = inv.sqr().mul_rational(&(Rational::from(&m1 * &m9) / 128u32));
    let t3 = (&inv.sqr() * &inv).mul_rational(&(Rational::from(&m1 * &m9) * &m25 / 3072u32));
    let series = &(&(&Ball::one(p) - &t1) + &t2) - &t3;
    let k8 = kappa.clone().pow(8u32) * 31u32 / 6u32;
    let err = (inv.sqr().sqr()).mul_rational(&k8).upper();
    let two_pi_x = &Ball::pi(p).mul_rational(&Rational::from(2)) * x;
    let pref = &x.exp() / &two_pi_x.sqrt();
    Ok(&series.add_error(&err) * &pref)
}

/// `I_κ(x)` by the asymptotic expansion where valid, else by the series.
pub fn bessel_i(kappa: &Rational, x: &Ball) -> Ball {
    let series = || bessel_i_series(kappa, x, 100_000);
    match bessel_i_asymptotic(kappa, x) {
        // the expansion error is fixed by (κ, x); prefer the series when tighter
        Ok(a) => {
            let s = series();
            if s.is_finite() && s.radius() < a.radius() {
                s
            } else {
                a
            }
        }
        Err(_) => series(),
    }
}

/// Certified upper bound for `I_κ(x)`: `√(2/(πx))·e^x` for `x ≥ 1`, and
/// `2^{1−κ}x^κ/Γ(κ+1)` for `0 ≤ x < 1`.
pub fn bessel_upper_bound(kappa: &Rational, x: &Rational, prec: u32) -> Result<Float> {
    if *kappa <= (-1, 2) || x.cmp0() == Ordering::Less {
        return Err(Error::Regime("bessel_upper_bound needs kappa > -1/2 and x >= 0".into()));
    }
    let xb = Ball::from_rational(x, prec);
    let b = if *x >= 1 {
        let pi = Ball::pi(prec);
        let r = (&Ball::from_i64(2, prec) / &(&pi * &xb)).sqrt();
        &r * &xb.exp()
    } else {
        if x.cmp0() == Ordering::Equal {
            return Ok(Float::with_val(prec, if kappa.cmp0() == Ordering::Equal { 2 } else { 0 }));
        }
        let two = Ball::from_i64(2, prec);
        let num = &two.pow_rational(&(1 - kappa.clone())) * &xb.pow_rational(kappa);
        &num / &Ball::from_rational(&Rational::from(kappa + 1u32), prec).gamma()
    };
    Ok(b.upper())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn series_at_zero() {
        let z = Ball::zero(128);
        let b = bessel_i_series(&r(2, 1), &z, 100);
        assert_eq!(*b.center(), 0);
        assert_eq!(*b.radius(), 0);
    }

    #[test]
    fn half_integer_closed_form() {
        let prec = 128;
        let x = Ball::one(prec);
        let b = bessel_i_series(&r(1, 2), &x, 200);
        // √(2/π)·sinh 1
        let want = 0.937_674_888_245_488_f64;
        assert!((b.to_f64() - want).abs() < 1e-14, "{b}");
        assert!(b.radius().to_f64() < 1e-30);
    }

    #[test]
    fn order_two_at_one() {
        let b = bessel_i_series(&r(2, 1), &Ball::one(128), 200);
        assert!((b.to_f64() - 0.135_747_669_767_038_3).abs() < 1e-15, "{b}");
    }

    #[test]
    fn asymptotic_regime() {
        let prec = 256;
        assert!(bessel_i_asymptotic(&r(2, 1), &Ball::from_i64(230, prec)).is_err());
        let x = Ball::from_i64(240, prec);
        let a = bessel_i_asymptotic(&r(2, 1), &x).unwrap();
        let s = bessel_i_series(&r(2, 1), &x, 10_000);
        assert!(a.overlaps(&s));
        assert!(s.radius() < a.radius());
        assert_eq!(bessel_regime(&r(2, 1), &r(240, 1)).regime, Regime::Asymptotic);
        assert_eq!(bessel_regime(&r(2, 1), &r(230, 1)).regime, Regime::Series);
    }

    #[test]
    fn upper_bound_branches() {
        let b = bessel_upper_bound(&r(2, 1), &r(1, 2), 128).unwrap();
        assert!((b.to_f64() - 1.0 / 16.0).abs() < 1e-30);
        let b = bessel_upper_bound(&r(2, 1), &r(1, 1), 128).unwrap();
        assert!((b.to_f64() - 2.168_875_1).abs() < 1e-6);
    }
}
