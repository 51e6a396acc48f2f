//! Dense polynomials in `α` with exact rational coefficients, and exact real
//! root isolation by Sturm sequences.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use rug::{Integer, Rational};

use crate::arith::sigma_sieve;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    // constant term first; no trailing zeros
    coeffs: Vec<Rational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.cmp0() == Ordering::Equal) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `α`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Sign of the value at `x`.
    pub fn sign_at(&self, x: &Rational) -> Ordering {
        self.eval(x).cmp0()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| Rational::from(a * c)).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u64))
                .collect(),
        )
    }

    /// Positive rational `c` with `self = c · primitive`, where the primitive
    /// part has coprime integer coefficients and a positive leading coefficient.
    pub fn content(&self) -> Rational {
        if self.is_zero() {
            return Rational::from(1);
        }
        let mut den_lcm = Integer::from(1);
        for c in &self.coeffs {
            den_lcm.lcm_mut(c.denom());
        }
        let mut num_gcd = Integer::new();
        for c in &self.coeffs {
            let scaled = Integer::from(c.numer() * &den_lcm) / c.denom();
            num_gcd.gcd_mut(&scaled);
        }
        let mut content = Rational::from((num_gcd, den_lcm));
        if self.leading().unwrap().cmp0() == Ordering::Less {
            content = -content;
        }
        content
    }

    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let c = self.content();
        self.scale(&Rational::from(c.recip_ref()))
    }

    /// Largest `j` with `α^j | self`, and the quotient.
    pub fn strip_x_power(&self) -> (usize, Self) {
        let j = self.coeffs.iter().take_while(|c| c.cmp0() == Ordering::Equal).count();
        (j, Self::new(self.coeffs[j..].to_vec()))
    }

    /// Quotient and remainder of Euclidean division.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or_else(|| Error::invalid("division by the zero polynomial"))?;
        let lead = d.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::new(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd {
            let top = rem.len() - 1;
            let q = Rational::from(&rem[top] / lead);
            if q.cmp0() != Ordering::Equal {
                for (i, c) in d.coeffs.iter().enumerate() {
                    rem[top - dd + i] -= Rational::from(&q * c);
                }
            }
            quot[top - dd] = q;
            rem.pop();
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// `Some(self / d)` when the division is exact.
    pub fn exact_div(&self, d: &Self) -> Result<Option<Self>> {
        let (q, r) = self.div_rem(d)?;
        Ok(r.is_zero().then_some(q))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("b is nonzero").1;
            a = b;
            b = r;
        }
        a.primitive_part()
    }

    /// `self / gcd(self, self')`: same roots, all simple.
    pub fn square_free(&self) -> Self {
        let g = self.gcd(&self.derivative());
        match g.degree() {
            Some(0) | None => self.primitive_part(),
            _ => self.exact_div(&g).expect("g is nonzero").expect("gcd divides").primitive_part(),
        }
    }

    /// Strips every rational root `p/q` (candidates from the rational root
    /// theorem) and returns the linear factors found with their multiplicity,
    /// together with the remaining primitive cofactor.
    pub fn strip_rational_roots(&self) -> (Vec<(Rational, usize)>, Self) {
        let mut core = self.primitive_part();
        let mut roots = Vec::new();
        let (j, rest) = core.strip_x_power();
        if j > 0 {
            roots.push((Rational::new(), j));
            core = rest.primitive_part();
        }
        let (Some(c0), Some(cd)) = (core.coeffs.first(), core.leading()) else {
            return (roots, core);
        };
        let (Some(ps), Some(qs)) = (small_divisors(c0.numer()), small_divisors(cd.numer())) else {
            return (roots, core);
        };
        let mut candidates = Vec::new();
        for p in &ps {
            for q in &qs {
                let r = Rational::from((Integer::from(*p), Integer::from(*q)));
                candidates.push(-r.clone());
                candidates.push(r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for r in candidates {
            let lin = Self::new(vec![-r.clone(), Rational::from(1)]);
            let mut mult = 0;
            while let Ok(Some(q)) = core.exact_div(&lin) {
                core = q.primitive_part();
                mult += 1;
            }
            if mult > 0 {
                roots.push((r, mult));
            }
        }
        (roots, core)
    }

    /// Sturm sequence of a square-free polynomial.
    fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].div_rem(&chain[n - 1]).expect("nonzero").1;
            if r.is_zero() {
                break;
            }
            // divide by the positive content to keep coefficients small
            let c = r.content().abs();
            let neg = r.scale(&(-Rational::from(c.recip_ref())));
            chain.push(neg);
        }
        chain
    }

    /// `1 + max |c_i / c_d|`: every real root lies in `(−B, B)`.
    pub fn cauchy_bound(&self) -> Rational {
        let lead = self.leading().expect("nonzero polynomial");
        let mut m = Rational::new();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = Rational::from(c / lead).abs();
            if r > m {
                m = r;
            }
        }
        m + 1u32
    }
}

fn sign_changes(chain: &[RationalPolynomial], x: &Rational) -> usize {
    let signs: Vec<Ordering> = chain
        .iter()
        .map(|p| p.sign_at(x))
        .filter(|&s| s != Ordering::Equal)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Positive divisors of `|n|` when it fits in 64 bits and has few of them.
fn small_divisors(n: &Integer) -> Option<Vec<u64>> {
    let n = n.clone().abs().to_u64()?;
    if n == 0 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
        if d > 1 << 22 {
            return None;
        }
    }
    small.extend(large.into_iter().rev());
    Some(small)
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.cmp0() == Ordering::Equal {
                continue;
            }
            let neg = c.cmp0() == Ordering::Less;
            let abs = Rational::from(c.abs_ref());
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            first = false;
            let one = abs == 1;
            match (i, one) {
                (0, _) => write!(f, "{abs}")?,
                (_, true) => {}
                (_, false) => write!(f, "{abs}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, o: &RationalPolynomial) -> RationalPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = Rational::new();
        RationalPolynomial::new(
            (0..n)
                .map(|i| Rational::from(self.coeffs.get(i).unwrap_or(&zero) + o.coeffs.get(i).unwrap_or(&zero)))
                .collect(),
        )
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn sub(self, o: &RationalPolynomial) -> RationalPolynomial {
        self + &o.scale(&Rational::from(-1))
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, o: &RationalPolynomial) -> RationalPolynomial {
        if self.is_zero() || o.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut c = vec![Rational::new(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += Rational::from(a * b);
            }
        }
        RationalPolynomial::new(c)
    }
}

/// `p_α(0), …, p_α(n)` as polynomials in `α`.
pub fn partition_polynomials(n: u64) -> Vec<RationalPolynomial> {
    let sigma = sigma_sieve(n.max(1) as usize).expect("limit is positive");
    let mut out = vec![RationalPolynomial::constant(Rational::from(1))];
    for m in 1..=n as usize {
        // Σ σ(ℓ) P(m−ℓ), then multiply by α/m
        let mut acc = vec![Rational::new(); m];
        for l in 1..=m {
            let s = sigma.get(l);
            for (i, c) in out[m - l].coeffs.iter().enumerate() {
                acc[i] += Rational::from(c * s);
            }
        }
        let mut coeffs = vec![Rational::new()];
        coeffs.extend(acc.into_iter().map(|c| c / m as u64));
        out.push(RationalPolynomial::new(coeffs));
    }
    out
}

/// `p_α(n)` as a polynomial of degree `n` in `α`.
pub fn partition_polynomial(n: u64) -> RationalPolynomial {
    partition_polynomials(n).pop().expect("nonempty")
}

/// `p_α(n−1)p_α(ℓ+1) − p_α(n)p_α(ℓ)` as a polynomial in `α`.
pub fn hn_critical_polynomial(n: u64, ell: u64) -> Result<RationalPolynomial> {
    if n <= ell {
        return Err(Error::invalid("hn_critical_polynomial requires n > ell"));
    }
    let p = partition_polynomials(n.max(ell + 1));
    let (n, ell) = (n as usize, ell as usize);
    Ok(&(&p[n - 1] * &p[ell + 1]) - &(&p[n] * &p[ell]))
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootInterval {
    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn midpoint_f64(&self) -> f64 {
        Rational::from(&self.lo + &self.hi).to_f64() / 2.0
    }
}

impl fmt::Display for RootInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Interval of width at most `precision` containing the largest real root.
///
/// Root counts come from the Sturm chain of the square-free part; the
/// interval `(lo, hi]` is bisected keeping exactly the largest root inside.
pub fn isolate_largest_real_root(p: &RationalPolynomial, precision: &Rational) -> Result<RootInterval> {
    if p.is_zero() {
        return Err(Error::invalid("the zero polynomial has no isolated roots"));
    }
    if precision.cmp0() != Ordering::Greater {
        return Err(Error::invalid("precision must be positive"));
    }
    let q = p.square_free();
    if q.degree() == Some(0) {
        return Err(Error::NoRealRoot);
    }
    let chain = q.sturm_chain();
    let bound = q.cauchy_bound();
    let mut lo = -bound.clone();
    let mut hi = bound;
    let count = |a: &Rational, b: &Rational| sign_changes(&chain, a) - sign_changes(&chain, b);
    if count(&lo, &hi) == 0 {
        return Err(Error::NoRealRoot);
    }
    while Rational::from(&hi - &lo) > *precision {
        let mid = Rational::from(&lo + &hi) / 2u32;
        if count(&mid, &hi) > 0 {
            lo = mid;
        } else if q.sign_at(&mid) == Ordering::Equal {
            return Ok(RootInterval { lo: mid.clone(), hi: mid });
        } else {
            hi = mid;
        }
    }
    Ok(RootInterval { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_polynomials() {
        assert_eq!(partition_polynomial(0), RationalPolynomial::from_i64(&[1]));
        let p2 = partition_polynomial(2);
        let want = RationalPolynomial::new(vec![Rational::new(), Rational::from((3, 2)), Rational::from((1, 2))]);
        assert_eq!(p2, want);
        let p3 = partition_polynomial(3);
        // α(α+1)(α+8)/6 = (α³ + 9α² + 8α)/6
        let want = RationalPolynomial::from_i64(&[0, 8, 9, 1]).scale(&Rational::from((1, 6)));
        assert_eq!(p3, want);
        assert_eq!(p3.degree(), Some(3));
        assert_eq!(p2.eval(&Rational::from((5, 2))), Rational::from((55, 8)));
    }

    #[test]
    fn content_and_division() {
        let p = RationalPolynomial::new(vec![Rational::from((-3, 2)), Rational::new(), Rational::from((3, 4))]);
        assert_eq!(p.content(), Rational::from((3, 4)));
        assert_eq!(p.primitive_part(), RationalPolynomial::from_i64(&[-2, 0, 1]));
        let f = RationalPolynomial::from_i64(&[-1, 0, 1]);
        let g = RationalPolynomial::from_i64(&[1, 1]);
        assert_eq!(f.exact_div(&g).unwrap(), Some(RationalPolynomial::from_i64(&[-1, 1])));
        assert_eq!(f.exact_div(&RationalPolynomial::from_i64(&[2, 1])).unwrap(), None);
        assert_eq!(hn_critical_polynomial(5, 4).unwrap(), RationalPolynomial::zero());
        assert!(hn_critical_polynomial(4, 4).is_err());
    }

    #[test]
    fn rational_roots_are_stripped() {
        // 2α²(α+3)(α−1/2)(α²+1)
        let p = &(&RationalPolynomial::from_i64(&[0, 0, 2]) * &RationalPolynomial::from_i64(&[3, 1]))
            * &(&RationalPolynomial::from_i64(&[-1, 2]) * &RationalPolynomial::from_i64(&[1, 0, 1]));
        let (roots, core) = p.strip_rational_roots();
        assert_eq!(core, RationalPolynomial::from_i64(&[1, 0, 1]));
        assert!(roots.contains(&(Rational::new(), 2)));
        assert!(roots.contains(&(Rational::from(-3), 1)));
        assert!(roots.contains(&(Rational::from((1, 2)), 1)));
    }

    #[test]
    fn root_isolation() {
        let eps = Rational::from((1, 1_000_000));
        let r = isolate_largest_real_root(&RationalPolynomial::from_i64(&[-3, 1]), &eps).unwrap();
        assert_eq!(r, RootInterval { lo: Rational::from(3), hi: Rational::from(3) });
        let r = isolate_largest_real_root(&RationalPolynomial::from_i64(&[-2, 0, 1]), &Rational::from((1, 10_000))).unwrap();
        assert!(r.width() <= (1, 10_000));
        assert!((r.midpoint_f64() - std::f64::consts::SQRT_2).abs() < 1e-4);
        // repeated root and a double root at the top
        let p = &RationalPolynomial::from_i64(&[-1, 1]) * &RationalPolynomial::from_i64(&[4, -4, 1]);
        let r = isolate_largest_real_root(&p, &eps).unwrap();
        assert!(r.contains(&Rational::from(2)));
        assert!(matches!(
            isolate_largest_real_root(&RationalPolynomial::from_i64(&[1, 0, 1]), &eps),
            Err(Error::NoRealRoot)
        ));
        assert!(matches!(
            isolate_largest_real_root(&RationalPolynomial::from_i64(&[5]), &eps),
            Err(Error::NoRealRoot)
        ));
    }
}
