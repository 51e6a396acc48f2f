//! Ball arithmetic: a real number enclosed by `center ± radius`.
//!
//! Every operation computes the image interval with MPFR's correctly rounded
//! directed modes (lower endpoint toward −∞, upper toward +∞) and re-centers,
//! so the result ball contains every pointwise result of its inputs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round, Special};
use rug::{Float, Integer, Rational};

/// Precision used for radii; they only need to be upper bounds.
const RADIUS_PREC: u32 = 64;

#[derive(Clone, Debug)]
pub struct Ball {
    center: Float,
    radius: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

impl Ball {
    /// The exact point `x` (ball of radius zero when `x` fits in `prec` bits).
    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        Self::from_bounds(down(prec, q), up(prec, q))
    }

    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        Self::from_bounds(down(prec, n), up(prec, n))
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(n), prec)
    }

    pub fn zero(prec: u32) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    /// Ball containing the whole real line.
    pub fn everything(prec: u32) -> Self {
        Ball {
            center: Float::with_val(prec, 0),
            radius: Float::with_val(RADIUS_PREC, Special::Infinity),
        }
    }

    pub fn pi(prec: u32) -> Self {
        Self::from_bounds(down(prec, Constant::Pi), up(prec, Constant::Pi))
    }

    /// Smallest ball (at the precision of the endpoints) containing `[lo, hi]`.
    pub fn from_bounds(lo: Float, hi: Float) -> Self {
        let prec = lo.prec().max(hi.prec());
        if lo.is_nan() || hi.is_nan() || lo.is_infinite() || hi.is_infinite() {
            return Self::everything(prec);
        }
        debug_assert!(lo <= hi, "inverted bounds {lo} > {hi}");
        let sum = Float::with_val(prec + 1, &lo + &hi);
        let center = Float::with_val(prec, sum / 2u32);
        let r_hi = up(RADIUS_PREC, &hi - &center);
        let r_lo = up(RADIUS_PREC, &center - &lo);
        let radius = if r_hi > r_lo { r_hi } else { r_lo };
        Ball { center, radius }
    }

    pub fn center(&self) -> &Float {
        &self.center
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    pub fn prec(&self) -> u32 {
        self.center.prec()
    }

    pub fn is_finite(&self) -> bool {
        self.radius.is_finite() && self.center.is_finite()
    }

    /// Lower endpoint, rounded down.
    pub fn lower(&self) -> Float {
        down(self.prec(), &self.center - &self.radius)
    }

    /// Upper endpoint, rounded up.
    pub fn upper(&self) -> Float {
        up(self.prec(), &self.center + &self.radius)
    }

    pub fn bounds(&self) -> (Float, Float) {
        (self.lower(), self.upper())
    }

    /// Upper bound on `|x|` over the ball.
    pub fn abs_upper(&self) -> Float {
        let (lo, hi) = self.bounds();
        let lo = lo.abs();
        let hi = hi.abs();
        if lo > hi {
            lo
        } else {
            hi
        }
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        let (lo, hi) = self.bounds();
        lo <= *q && hi >= *q
    }

    pub fn contains_integer(&self, n: &Integer) -> bool {
        let (lo, hi) = self.bounds();
        lo <= *n && hi >= *n
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        let (a, b) = self.bounds();
        let (c, d) = other.bounds();
        a <= d && c <= b
    }

    /// True when every point is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.lower() > 0
    }

    /// Ball at (at least) `prec` bits; never narrower than `self`.
    pub fn with_prec(&self, prec: u32) -> Self {
        let (lo, hi) = self.bounds();
        Self::from_bounds(down(prec, &lo), up(prec, &hi))
    }

    /// Widens both ends by `extra ≥ 0`.
    pub fn add_error(&self, extra: &Float) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        let lo = down(p, &lo - extra);
        let hi = up(p, &hi + extra);
        Self::from_bounds(lo, hi)
    }

    /// Hull of `self` and `[lo, hi] = [self.lower(), self.upper() + extra]`:
    /// adds a nonnegative quantity known only through an upper bound.
    pub fn add_nonneg_bound(&self, bound: &Float) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        Self::from_bounds(lo, up(p, &hi + bound))
    }

    pub fn sqr(&self) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        if lo >= 0 {
            Self::from_bounds(down(p, lo.square_ref()), up(p, hi.square_ref()))
        } else if hi <= 0 {
            Self::from_bounds(down(p, hi.square_ref()), up(p, lo.square_ref()))
        } else {
            let m = if -lo.clone() > hi { lo } else { hi };
            Self::from_bounds(Float::with_val(p, 0), up(p, m.square_ref()))
        }
    }

    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        if hi < 0 {
            return Self::everything(p);
        }
        let lo = if lo < 0 { Float::with_val(p, 0) } else { lo };
        Self::from_bounds(down(p, lo.sqrt_ref()), up(p, hi.sqrt_ref()))
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        Self::from_bounds(down(p, lo.exp_ref()), up(p, hi.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        if lo <= 0 {
            return Self::everything(p);
        }
        Self::from_bounds(down(p, lo.ln_ref()), up(p, hi.ln_ref()))
    }

    /// `self^e` for a positive base.
    pub fn pow(&self, e: &Ball) -> Self {
        (e * &self.ln()).exp()
    }

    pub fn pow_rational(&self, e: &Rational) -> Self {
        self.pow(&Ball::from_rational(e, self.prec()))
    }

    /// Gamma function on a ball inside `(0, ∞)`.
    pub fn gamma(&self) -> Self {
        let p = self.prec();
        let (lo, hi) = self.bounds();
        if lo <= 0 {
            return Self::everything(p);
        }
        // Γ is increasing on [1.5, ∞) (minimum near 1.4616); shift up otherwise.
        if lo >= 1.5 {
            Self::from_bounds(down(p, lo.gamma_ref()), up(p, hi.gamma_ref()))
        } else {
            (self + &Ball::one(p)).gamma() / self
        }
    }

    fn lipschitz_widen(value_lo: Float, value_hi: Float, r: &Float) -> Self {
        let p = value_lo.prec();
        let mut lo = down(p, &value_lo - r);
        let mut hi = up(p, &value_hi + r);
        if lo < -1 {
            lo = Float::with_val(p, -1);
        }
        if hi > 1 {
            hi = Float::with_val(p, 1);
        }
        Self::from_bounds(lo, hi)
    }

    pub fn cos(&self) -> Self {
        let p = self.prec();
        let c = &self.center;
        Self::lipschitz_widen(down(p, c.cos_ref()), up(p, c.cos_ref()), &self.radius)
    }

    pub fn sin(&self) -> Self {
        let p = self.prec();
        let c = &self.center;
        Self::lipschitz_widen(down(p, c.sin_ref()), up(p, c.sin_ref()), &self.radius)
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self * &Ball::from_rational(q, self.prec())
    }

    pub fn div_u64(&self, d: u64) -> Self {
        self / &Ball::from_integer(&Integer::from(d), self.prec())
    }

    pub fn max_prec(a: &Ball, b: &Ball) -> u32 {
        a.prec().max(b.prec())
    }

    /// Approximate value for display.
    pub fn to_f64(&self) -> f64 {
        self.center.to_f64()
    }
}

impl Add for &Ball {
    type Output = Ball;
    fn add(self, rhs: &Ball) -> Ball {
        let p = Ball::max_prec(self, rhs);
        let (a, b) = self.bounds();
        let (c, d) = rhs.bounds();
        Ball::from_bounds(down(p, &a + &c), up(p, &b + &d))
    }
}

impl Sub for &Ball {
    type Output = Ball;
    fn sub(self, rhs: &Ball) -> Ball {
        let p = Ball::max_prec(self, rhs);
        let (a, b) = self.bounds();
        let (c, d) = rhs.bounds();
        Ball::from_bounds(down(p, &a - &d), up(p, &b - &c))
    }
}

impl Mul for &Ball {
    type Output = Ball;
    fn mul(self, rhs: &Ball) -> Ball {
        let p = Ball::max_prec(self, rhs);
        let (a, b) = self.bounds();
        let (c, d) = rhs.bounds();
        let pairs = [(&a, &c), (&a, &d), (&b, &c), (&b, &d)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (x, y) in pairs {
            let l = down(p, x * y);
            let h = up(p, x * y);
            if lo.as_ref().map_or(true, |v| l < *v) {
                lo = Some(l);
            }
            if hi.as_ref().map_or(true, |v| h > *v) {
                hi = Some(h);
            }
        }
        Ball::from_bounds(lo.unwrap(), hi.unwrap())
    }
}

impl Div for &Ball {
    type Output = Ball;
    fn div(self, rhs: &Ball) -> Ball {
        let p = Ball::max_prec(self, rhs);
        let (c, d) = rhs.bounds();
        if c <= 0 && d >= 0 {
            return Ball::everything(p);
        }
        let inv = Ball::from_bounds(down(p, 1 / &d), up(p, 1 / &c));
        self * &inv
    }
}

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball {
            center: -self.center.clone(),
            radius: self.radius.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Ball {
            type Output = Ball;
            fn $m(self, rhs: Ball) -> Ball { (&self).$m(&rhs) }
        }
        impl $tr<&Ball> for Ball {
            type Output = Ball;
            fn $m(self, rhs: &Ball) -> Ball { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (f64::from(self.prec()) * std::f64::consts::LOG10_2) as usize;
        let digits = f.precision().unwrap_or(digits.clamp(6, 40));
        write!(
            f,
            "{} +/- {}",
            self.center.to_string_radix(10, Some(digits)),
            self.radius.to_string_radix(10, Some(6))
        )
    }
}
