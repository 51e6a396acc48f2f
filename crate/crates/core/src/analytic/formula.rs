//! Evaluation of `p_α(n)` from the Kloosterman/Bessel exact formula
//!
//! `p_α(n) = 2π(n−α/24)^{−α/4−1/2} Σ_{m=0}^{⌊α/24⌋} (α/24−m)^{α/4+1/2} p_α(m)
//!           Σ_{k≥1} (A_{k,α}(n,m)/k) I_{α/2+1}((4π/k)√((α/24−m)(n−α/24)))`.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use super::bessel::{bessel_i, bessel_upper_bound};
use crate::arith::kloosterman;
use crate::ball::Ball;
use crate::exact::exact_sequence;
use crate::{Error, Result};

/// Upper bound `4√(X/π)·e^{X/2}` for `Σ_{k≥2} I_κ(X/k)` (valid for `κ ≥ 2`).
pub fn tail_bound_f(kappa: &Rational, x: &Float) -> Result<Float> {
    if *kappa < 2 {
        return Err(Error::Regime("tail bound F needs kappa >= 2".into()));
    }
    let p = x.prec().max(64);
    let xb = Ball::from_bounds(x.clone(), x.clone());
    let pi = Ball::pi(p);
    let v = &(&xb / &pi).sqrt() * &xb.div_u64(2).exp();
    Ok(Float::with_val_round(p, v.upper() * 4u32, Round::Up).0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticMode {
    /// Certified: terms `k ≤ k_max` are enclosed and the rest bounded.
    /// `k_max = None` grows the cutoff until the radius meets `target`
    /// (default 1/4) or `cap` is reached.
    Rigorous {
        k_max: Option<u64>,
        target: Option<Rational>,
    },
    /// Partial sum over `k ≤ k_max` with no certified tail.
    Heuristic { k_max: u64 },
}

impl AnalyticMode {
    pub fn rigorous() -> Self {
        AnalyticMode::Rigorous {
            k_max: None,
            target: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalyticValue {
    pub value: Ball,
    /// True when `value` is guaranteed to contain `p_α(n)`.
    pub certified: bool,
    /// Largest `k` summed explicitly.
    pub k_used: u64,
    /// Bound used for the remaining `k` (zero in heuristic mode).
    pub tail: Float,
    pub precision: u32,
}

const ADAPTIVE_CAP: u64 = 1024;

/// Enclosure of `p_α(n)` from the exact formula.
pub fn p_alpha_analytic(alpha: &Rational, n: u64, mode: &AnalyticMode) -> Result<AnalyticValue> {
    p_alpha_analytic_prec(alpha, n, mode, 128)
}

pub fn p_alpha_analytic_prec(alpha: &Rational, n: u64, mode: &AnalyticMode, prec: u32) -> Result<AnalyticValue> {
    if alpha.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::invalid("alpha must be positive"));
    }
    let a24 = Rational::from(alpha / 24u32);
    let shift = Rational::from(n) - &a24;
    if shift.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::invalid(format!("n = {n} must exceed alpha/24")));
    }
    let beta = a24.clone().floor().numer().to_u64().unwrap_or(0);
    // terms are ~e^X with X = 4π√(α/24·(n−α/24)); carry enough bits for them
    let x_est = 4.0 * std::f64::consts::PI * (a24.to_f64() * shift.to_f64()).sqrt();
    let prec = prec.max((x_est * std::f64::consts::LOG2_E) as u32 + 128);
    let kappa = Rational::from(alpha / 2u32) + 1u32;
    let small = exact_sequence(alpha, beta)?;

    let setup = Setup::new(alpha, n, &a24, &shift, &kappa, beta, small.values(), prec);
    match mode {
        AnalyticMode::Heuristic { k_max } => {
            let value = setup.partial(1, (*k_max).max(1))?;
            Ok(AnalyticValue {
                value,
                certified: false,
                k_used: (*k_max).max(1),
                tail: Float::with_val(prec, 0),
                precision: prec,
            })
        }
        AnalyticMode::Rigorous { k_max, target } => {
            let target = target.clone().unwrap_or_else(|| Rational::from((1, 4)));
            let (fixed, cap) = match k_max {
                Some(k) => ((*k).max(1), (*k).max(1)),
                None => (1, ADAPTIVE_CAP),
            };
            let mut k = fixed;
            let mut acc = setup.partial(1, k)?;
            loop {
                let tail = setup.tail_above(k)?;
                let value = acc.add_error(&tail);
                let done = *value.radius() <= target || k >= cap;
                if done {
                    if *value.radius() > target && k_max.is_none() {
                        return Err(Error::RadiusExceeded {
                            radius: value.radius().to_string_radix(10, Some(6)),
                            target: target.to_string(),
                        });
                    }
                    return Ok(AnalyticValue {
                        value,
                        certified: true,
                        k_used: k,
                        tail,
                        precision: prec,
                    });
                }
                let next = (2 * k).min(cap);
                acc = &acc + &setup.partial(k + 1, next)?;
                k = next;
            }
        }
    }
}

struct Setup<'a> {
    alpha: &'a Rational,
    n: u64,
    kappa: &'a Rational,
    prec: u32,
    /// `(m, weight_m, X_m)` with `weight_m = 2π(n−α/24)^{−α/4−1/2}(α/24−m)^{α/4+1/2}p_α(m)`.
    rows: Vec<(u64, Ball, Ball)>,
}

impl<'a> Setup<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: &'a Rational,
        n: u64,
        a24: &Rational,
        shift: &Rational,
        kappa: &'a Rational,
        beta: u64,
        small: &[Rational],
        prec: u32,
    ) -> Self {
        let e = Rational::from(alpha / 4u32) + Rational::from((1, 2));
        let two_pi = Ball::pi(prec).mul_rational(&Rational::from(2));
        let pre = &two_pi * &Ball::from_rational(shift, prec).pow_rational(&(-e.clone()));
        let four_pi = Ball::pi(prec).mul_rational(&Rational::from(4));
        let mut rows = Vec::new();
        for m in 0..=beta {
            let c = Rational::from(a24 - m);
            if c.cmp0() != std::cmp::Ordering::Greater {
                continue;
            }
            let cb = Ball::from_rational(&c, prec);
            let w = &(&pre * &cb.pow_rational(&e)) * &Ball::from_rational(&small[m as usize], prec);
            let x = &four_pi * &Ball::from_rational(&Rational::from(&c * shift), prec).sqrt();
            rows.push((m, w, x));
        }
        Setup {
            alpha,
            n,
            kappa,
            prec,
            rows,
        }
    }

    /// Enclosure of the terms `k_from ≤ k ≤ k_to` (real part).
    fn partial(&self, k_from: u64, k_to: u64) -> Result<Ball> {
        let mut total = Ball::zero(self.prec);
        for (m, w, x) in &self.rows {
            let mut inner = Ball::zero(self.prec);
            for k in k_from..=k_to {
                let a = kloosterman(k, self.alpha, self.n as i64, *m as i64, self.prec)?;
                let i = bessel_i(self.kappa, &x.div_u64(k));
                inner = &inner + &(&a.real * &i).div_u64(k);
            }
            total = &total + &(w * &inner);
        }
        Ok(total)
    }

    /// Upper bound for `|Σ_{k>k_max} ...|` using `|A_k/k| ≤ 1`.
    fn tail_above(&self, k_max: u64) -> Result<Float> {
        let p = self.prec;
        let mut total = Float::with_val(p, 0);
        for (_, w, x) in &self.rows {
            let x_hi = x.upper();
            let bound = if k_max == 1 && *self.kappa >= 2 {
                tail_bound_f(self.kappa, &x_hi)?
            } else {
                self.tail_sum(&x_hi, k_max)?
            };
            let term = Float::with_val_round(p, w.abs_upper() * &bound, Round::Up).0;
            total = Float::with_val_round(p, &total + &term, Round::Up).0;
        }
        Ok(total)
    }

    /// `Σ_{k>K} I_κ(X/k)`: termwise for `X/k ≥ 1`, then the small-argument
    /// bound `2^{1−κ}(X/k)^κ/Γ(κ+1)` summed against `∫ t^{−κ} dt`.
    fn tail_sum(&self, x_hi: &Float, k_max: u64) -> Result<Float> {
        let p = self.prec;
        let x_q = x_hi.to_rational().expect("finite");
        let floor_x = x_q.clone().floor().numer().to_u64().unwrap_or(0);
        let mut total = Float::with_val(p, 0);
        let mut k = k_max + 1;
        while k <= floor_x {
            let arg = Rational::from(&x_q / k);
            let b = bessel_upper_bound(self.kappa, &arg, p)?;
            total = Float::with_val_round(p, &total + &b, Round::Up).0;
            k += 1;
        }
        // k ≥ k0 = max(K, ⌊X⌋) + 1: Σ_{k≥k0} k^{−κ} ≤ (k0−1)^{1−κ}/(κ−1)
        let k0 = k;
        let kappa = self.kappa;
        let c = bessel_upper_bound(kappa, &Rational::from((1, 2)), p)?; // 2^{1−κ}(1/2)^κ/Γ(κ+1)
        // c·2^κ = 2^{1−κ}/Γ(κ+1); multiply by X^κ
        let two = Ball::from_i64(2, p);
        let xb = Ball::from_bounds(x_hi.clone(), x_hi.clone());
        let scale = &two.pow_rational(kappa) * &xb.pow_rational(kappa);
        let sum_bound = Ball::from_i64((k0 - 1) as i64, p).pow_rational(&(1 - kappa.clone()))
            / Ball::from_rational(&Rational::from(kappa - 1u32), p);
        let rest = (&Ball::from_bounds(c.clone(), c) * &scale) * &sum_bound;
        Ok(Float::with_val_round(p, &total + rest.upper(), Round::Up).0)
    }
}

/// Nearest integer to the center and whether the ball pins it down.
pub fn determined_integer(b: &Ball) -> Option<Integer> {
    let (lo, hi) = b.bounds();
    let lo = lo.ceil().to_integer()?;
    let hi = hi.floor().to_integer()?;
    (lo == hi).then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_tail_value() {
        let v = tail_bound_f(&Rational::from(2), &Float::with_val(128, 10)).unwrap();
        assert!((v.to_f64() - 1059.1).abs() < 0.1, "{v}");
        assert!(tail_bound_f(&Rational::from(1), &Float::with_val(64, 10)).is_err());
    }

    #[test]
    fn recovers_small_partition_numbers() {
        let r = p_alpha_analytic(&Rational::from(2), 50, &AnalyticMode::rigorous()).unwrap();
        assert!(r.certified);
        assert_eq!(determined_integer(&r.value), Some(Integer::from(103_679_156)));
    }

    #[test]
    fn rejects_small_n() {
        assert!(p_alpha_analytic(&Rational::from(2), 0, &AnalyticMode::rigorous()).is_err());
    }

    #[test]
    fn k_one_radius_is_large() {
        let mode = AnalyticMode::Rigorous {
            k_max: Some(1),
            target: None,
        };
        let r = p_alpha_analytic(&Rational::from(2), 100, &mode).unwrap();
        assert!(r.value.contains_integer(&Integer::from(1_843_645_820_766u64)));
        assert!(r.value.radius().to_f64() > 1.0);
    }
}
