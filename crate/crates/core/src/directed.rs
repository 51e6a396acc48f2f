//! Positive multi-limb binary floating values carrying a rounding direction.
//!
//! A [`DirectedValue`] is `mantissa · 2^exponent` with a normalized mantissa
//! of `L` 64-bit limbs. Values produced with [`Rounding::Down`] are lower
//! bounds of the quantity they stand for, [`Rounding::Up`] values are upper
//! bounds. The bounds engine produces them; this module provides exact
//! comparison, conversion and a bit-exact text encoding.

use std::cmp::Ordering;
use std::fmt;

use rug::integer::Order;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Down,
    Up,
}

/// Number of limbs needed to carry `bits` bits of precision.
pub fn limbs_for_bits(bits: u32) -> usize {
    (bits as usize).div_ceil(64).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedValue {
    mantissa: Vec<u64>,
    exponent: i64,
    rounding: Rounding,
}

impl DirectedValue {
    /// Builds a value from raw parts, normalizing the mantissa in place.
    /// The mantissa length fixes the precision.
    pub fn from_parts(mantissa: Vec<u64>, exponent: i64, rounding: Rounding) -> Self {
        let mut v = DirectedValue {
            mantissa,
            exponent,
            rounding,
        };
        v.normalize();
        v
    }

    pub fn zero(limbs: usize, rounding: Rounding) -> Self {
        DirectedValue {
            mantissa: vec![0; limbs.max(1)],
            exponent: 0,
            rounding,
        }
    }

    pub fn one(limbs: usize, rounding: Rounding) -> Self {
        let mut m = vec![0; limbs.max(1)];
        *m.last_mut().unwrap() = 1 << 63;
        DirectedValue {
            exponent: -(64 * m.len() as i64 - 1),
            mantissa: m,
            rounding,
        }
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.exponent = 0;
            return;
        }
        let bits = 64 * self.mantissa.len() as u64;
        let top = bit_length(&self.mantissa);
        let sh = bits - top;
        if sh > 0 {
            shl_in_place(&mut self.mantissa, sh);
            self.exponent -= sh as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.iter().all(|&x| x == 0)
    }

    pub fn mantissa(&self) -> &[u64] {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn precision_bits(&self) -> u32 {
        64 * self.mantissa.len() as u32
    }

    /// `⌊log₂ value⌋`, or `None` for zero.
    pub fn ilog2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exponent + bit_length(&self.mantissa) as i64 - 1)
        }
    }

    pub fn mantissa_integer(&self) -> Integer {
        Integer::from_digits(&self.mantissa, Order::Lsf)
    }

    /// The exact dyadic rational this value denotes.
    pub fn to_rational(&self) -> Rational {
        let m = self.mantissa_integer();
        if self.exponent >= 0 {
            Rational::from(m << self.exponent as u32)
        } else {
            Rational::from((m, Integer::from(1) << (-self.exponent) as u32))
        }
    }

    /// Nearest `prec`-bit float (for display and approximate work only).
    pub fn to_float(&self, prec: u32) -> Float {
        let m = self.mantissa_integer();
        let f = Float::with_val(prec.max(self.precision_bits()), m);
        Float::with_val(prec, f << self.exponent as i32)
    }

    /// Natural logarithm, approximately.
    pub fn ln_approx(&self) -> f64 {
        match self.ilog2() {
            None => f64::NEG_INFINITY,
            Some(_) => {
                let top = *self.mantissa.last().unwrap() as f64;
                let e = self.exponent + 64 * (self.mantissa.len() as i64 - 1);
                top.ln() + e as f64 * std::f64::consts::LN_2
            }
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        cmp_scaled(
            &self.mantissa_integer(),
            self.exponent,
            &other.mantissa_integer(),
            other.exponent,
        )
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        self.to_rational().cmp(q)
    }

    /// Exact comparison of the products `a·b` and `c·d`.
    pub fn cmp_products(a: &Self, b: &Self, c: &Self, d: &Self) -> Ordering {
        let left = a.mantissa_integer() * b.mantissa_integer();
        let right = c.mantissa_integer() * d.mantissa_integer();
        cmp_scaled(&left, a.exponent + b.exponent, &right, c.exponent + d.exponent)
    }

    /// `"<sign> <exponent> <hex mantissa>"`, most significant limb first.
    pub fn encode(&self) -> String {
        let sign = if self.is_zero() { '0' } else { '+' };
        let mut s = format!("{sign} {} ", self.exponent);
        for limb in self.mantissa.iter().rev() {
            s.push_str(&format!("{limb:016x}"));
        }
        s
    }

    /// Inverse of [`encode`](Self::encode); takes the three whitespace-separated fields.
    pub fn decode(sign: &str, exponent: &str, hex: &str, rounding: Rounding) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("directed value: bad {what}"));
        let exponent: i64 = exponent.parse().map_err(|_| bad("exponent"))?;
        if hex.is_empty() || hex.len() % 16 != 0 {
            return Err(bad("mantissa length"));
        }
        let mut mantissa = Vec::with_capacity(hex.len() / 16);
        for chunk in hex.as_bytes().chunks(16).rev() {
            let s = std::str::from_utf8(chunk).map_err(|_| bad("mantissa"))?;
            mantissa.push(u64::from_str_radix(s, 16).map_err(|_| bad("mantissa"))?);
        }
        let v = DirectedValue {
            mantissa,
            exponent,
            rounding,
        };
        let normalized = v.is_zero() || v.mantissa.last().unwrap() >> 63 == 1;
        match sign {
            "+" if normalized && !v.is_zero() => Ok(v),
            "0" if v.is_zero() && v.exponent == 0 => Ok(v),
            _ => Err(bad("sign or normalization")),
        }
    }
}

impl fmt::Display for DirectedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

fn cmp_scaled(a: &Integer, ea: i64, b: &Integer, eb: i64) -> Ordering {
    match (a.cmp0(), b.cmp0()) {
        (Ordering::Equal, o) => Ordering::Equal.cmp(&o),
        (o, Ordering::Equal) => o.cmp(&Ordering::Equal),
        _ => {
            // compare magnitudes first to avoid shifting by huge amounts
            let la = a.significant_bits() as i64 + ea;
            let lb = b.significant_bits() as i64 + eb;
            if la != lb {
                return la.cmp(&lb);
            }
            if ea >= eb {
                Integer::from(a << (ea - eb) as u32).cmp(b)
            } else {
                a.cmp(&Integer::from(b << (eb - ea) as u32))
            }
        }
    }
}

/// Number of significant bits of a little-endian limb string.
pub(crate) fn bit_length(limbs: &[u64]) -> u64 {
    for (i, &x) in limbs.iter().enumerate().rev() {
        if x != 0 {
            return 64 * i as u64 + 64 - u64::from(x.leading_zeros());
        }
    }
    0
}

pub(crate) fn shl_in_place(limbs: &mut [u64], sh: u64) {
    let q = (sh / 64) as usize;
    let r = (sh % 64) as u32;
    let n = limbs.len();
    if q >= n {
        limbs.iter_mut().for_each(|x| *x = 0);
        return;
    }
    for i in (0..n).rev() {
        let src = i as isize - q as isize;
        let hi = if src >= 0 { limbs[src as usize] } else { 0 };
        let lo = if src >= 1 { limbs[src as usize - 1] } else { 0 };
        limbs[i] = if r == 0 { hi } else { (hi << r) | (lo >> (64 - r)) };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_is_one() {
        for l in 1..5 {
            let v = DirectedValue::one(l, Rounding::Down);
            assert_eq!(v.to_rational(), 1);
            assert_eq!(v.ilog2(), Some(0));
        }
    }

    #[test]
    fn normalization_and_comparison() {
        let a = DirectedValue::from_parts(vec![3, 0], 0, Rounding::Up);
        assert_eq!(a.to_rational(), 3);
        assert_eq!(a.mantissa()[1] >> 63, 1);
        let b = DirectedValue::from_parts(vec![5, 0], -1, Rounding::Up);
        assert_eq!(b.to_rational(), Rational::from((5, 2)));
        assert_eq!(a.cmp_value(&b), Ordering::Greater);
        assert_eq!(b.cmp_rational(&Rational::from((5, 2))), Ordering::Equal);
        // 3·3 vs (5/2)·4
        let four = DirectedValue::from_parts(vec![4], 0, Rounding::Down);
        assert_eq!(DirectedValue::cmp_products(&a, &a, &b, &four), Ordering::Less);
    }

    #[test]
    fn encoding_round_trips() {
        let v = DirectedValue::from_parts(vec![0xdead_beef, 0x1234], -77, Rounding::Down);
        let s = v.encode();
        let f: Vec<&str> = s.split(' ').collect();
        let w = DirectedValue::decode(f[0], f[1], f[2], Rounding::Down).unwrap();
        assert_eq!(v, w);
        assert!(DirectedValue::decode("+", "1", "0000000000000001", Rounding::Down).is_err());
    }

    #[test]
    fn ln_is_close() {
        let v = DirectedValue::from_parts(vec![1000], 10, Rounding::Down);
        assert!((v.ln_approx() - (1000f64 * 1024.0).ln()).abs() < 1e-12);
    }
}
