//! Number-theoretic primitives: divisor sums, modular inverses, Dedekind sums
//! and the α-twisted Kloosterman sums of the exact formula.

use rug::{Integer, Rational};

use crate::ball::Ball;
use crate::{Error, Result};

/// Dedekind sums up to this modulus use the direct sawtooth sum.
pub const SAWTOOTH_LIMIT: u64 = 10_000;

/// `σ(ℓ)` for `1 ≤ ℓ ≤ limit`, plus running prefix sums.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaTable {
    // index 0 is a placeholder so that values[ℓ] = σ(ℓ)
    values: Vec<u64>,
    prefix: Vec<u64>,
}

/// Divisor-sum sieve in `O(limit log limit)` additions.
pub fn sigma_sieve(limit: usize) -> Result<SigmaTable> {
    if limit == 0 {
        return Err(Error::invalid("sigma_sieve: limit must be at least 1"));
    }
    let mut values = vec![0u64; limit + 1];
    for d in 1..=limit {
        for m in (d..=limit).step_by(d) {
            values[m] += d as u64;
        }
    }
    let mut prefix = Vec::with_capacity(limit + 1);
    let mut acc = 0u64;
    for &v in &values {
        acc += v;
        prefix.push(acc);
    }
    Ok(SigmaTable { values, prefix })
}

impl SigmaTable {
    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `σ(ℓ)`; panics outside `1..=limit`.
    #[inline]
    pub fn get(&self, l: usize) -> u64 {
        debug_assert!(l >= 1);
        self.values[l]
    }

    /// `σ(1), …, σ(limit)`.
    pub fn values(&self) -> &[u64] {
        &self.values[1..]
    }

    /// Raw table with a leading zero at index 0.
    pub(crate) fn raw(&self) -> &[u64] {
        &self.values
    }

    /// `Σ_{ℓ=1}^{n} σ(ℓ)`.
    #[inline]
    pub fn prefix_sum(&self, n: usize) -> u64 {
        self.prefix[n]
    }

    /// `Σ_{ℓ=a}^{b} σ(ℓ)` (zero when `a > b`).
    #[inline]
    pub fn range_sum(&self, a: usize, b: usize) -> u64 {
        if a > b {
            0
        } else {
            self.prefix[b] - self.prefix[a - 1]
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128) {
    // returns (g, x) with a*x ≡ g (mod b)
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r, old_s)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `h̄ ∈ [0, k)` with `h·h̄ ≡ 1 (mod k)`; `0` when `k = 1`.
pub fn mod_inverse(h: i64, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::invalid("mod_inverse: modulus must be positive"));
    }
    if k == 1 {
        return Ok(0);
    }
    let hm = i128::from(h).rem_euclid(i128::from(k));
    let (g, x) = ext_gcd(hm, i128::from(k));
    if g != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    Ok(x.rem_euclid(i128::from(k)) as u64)
}

/// Dedekind sum `s(h,k) = Σ_{r=1}^{k-1} ((r/k))((hr/k))` with the sawtooth
/// `((x)) = x − ⌊x⌋ − 1/2` for non-integer `x` and `0` otherwise.
pub fn dedekind_sum(h: i64, k: u64) -> Result<Rational> {
    if k == 0 {
        return Err(Error::invalid("dedekind_sum: modulus must be positive"));
    }
    let hm = i128::from(h).rem_euclid(i128::from(k)) as u64;
    if gcd(hm, k) != 1 {
        return Err(Error::NotCoprime { h, k });
    }
    Ok(if k <= SAWTOOTH_LIMIT {
        dedekind_sawtooth(hm, k)
    } else {
        dedekind_reciprocity(hm, k)
    })
}

/// Direct `O(k)` sawtooth summation.
pub fn dedekind_sawtooth(h: u64, k: u64) -> Rational {
    // ((r/k))((hr/k)) = (2r − k)(2t − k) / (4k²) with t = hr mod k, when t ≠ 0
    let k128 = i128::from(k);
    let h128 = i128::from(h % k);
    let mut acc = Integer::new();
    let mut part: i128 = 0;
    for r in 1..k128 {
        let t = (h128 * r) % k128;
        if t != 0 {
            part += (2 * r - k128) * (2 * t - k128);
            if part.unsigned_abs() > (1u128 << 100) {
                acc += part;
                part = 0;
            }
        }
    }
    acc += part;
    Rational::from((acc, Integer::from(k) * Integer::from(k) * 4u32))
}

/// `O(log k)` evaluation by the reciprocity law
/// `s(h,k) + s(k,h) = −1/4 + (h² + k² + 1)/(12hk)`.
pub fn dedekind_reciprocity(h: u64, k: u64) -> Rational {
    let (mut h, mut k) = (h % k, k);
    let mut sign = 1i32;
    let mut acc = Rational::new();
    while h != 0 {
        let (hi, ki) = (Integer::from(h), Integer::from(k));
        let term = Rational::from((
            Integer::from(&hi * &hi) + &ki * &ki + 1u32,
            Integer::from(&hi * &ki) * 12u32,
        )) - Rational::from((1, 4));
        if sign > 0 {
            acc += term;
        } else {
            acc -= term;
        }
        sign = -sign;
        (h, k) = (k % h, h);
    }
    acc
}

/// Enclosure of the complex value `A_{k,α}(n,m)`.
#[derive(Clone, Debug)]
pub struct KloostermanValue {
    pub real: Ball,
    pub imag: Ball,
}

impl KloostermanValue {
    /// Upper bound on the outer modulus `sqrt(re² + im²)` of the enclosure.
    pub fn modulus_upper(&self) -> rug::Float {
        let p = self.real.prec();
        let re = self.real.abs_upper();
        let im = self.imag.abs_upper();
        let s = rug::Float::with_val_round(p, &re * &re, rug::float::Round::Up).0;
        let s = rug::Float::with_val_round(p, &s + &(im.clone() * &im), rug::float::Round::Up).0;
        rug::Float::with_val_round(p, s.sqrt_ref(), rug::float::Round::Up).0
    }
}

/// `(cos πq, sin πq)` for an exact rational `q` reduced into `[0, 2)`.
fn unit_root(q: &Rational, prec: u32) -> (Ball, Ball) {
    let quarter = Rational::from(q * 2u32);
    if *quarter.denom() == 1 {
        // exact quarter turns
        let (c, s) = match quarter.numer().to_u32().unwrap_or(0) % 4 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        return (Ball::from_i64(c, prec), Ball::from_i64(s, prec));
    }
    let theta = Ball::pi(prec).mul_rational(q);
    (theta.cos(), theta.sin())
}

/// `A_{k,α}(n,m) = Σ_{0≤h<k, (h,k)=1} exp(πiα s(h,k) + (2πi/k)(m h̄ − n) h)`.
///
/// The phase is reduced exactly (α is rational), so the only rounding is in
/// the final sine/cosine enclosures at `prec` bits.
pub fn kloosterman(k: u64, alpha: &Rational, n: i64, m: i64, prec: u32) -> Result<KloostermanValue> {
    if k == 0 {
        return Err(Error::invalid("kloosterman: k must be positive"));
    }
    let mut re = Ball::zero(prec);
    let mut im = Ball::zero(prec);
    let kk = i128::from(k);
    for h in 0..k {
        if gcd(h, k) != 1 {
            continue;
        }
        let hbar = mod_inverse(h as i64, k)?;
        let s = dedekind_sum(h as i64, k)?;
        let r = ((i128::from(m) * i128::from(hbar) - i128::from(n)) * i128::from(h)).rem_euclid(kk);
        // phase / π = α s(h,k) + 2r/k, reduced mod 2
        let mut q = Rational::from(alpha * &s) + Rational::from((Integer::from(2 * r), Integer::from(k)));
        let floor_half = Rational::from(&q / 2u32).floor();
        q -= floor_half * 2u32;
        let (c, sn) = unit_root(&q, prec);
        re = &re + &c;
        im = &im + &sn;
    }
    Ok(KloostermanValue { real: re, imag: im })
}
