//! Exact values of `p_α(n)` for rational `α`, polynomials in `α`, and exact
//! inequality defects and scans.
//!
//! All comparisons between products of sequence values are done by integer
//! cross-multiplication, never by forming quotients.

mod poly;

pub use poly::{hn_critical_polynomial, isolate_largest_real_root, partition_polynomial, partition_polynomials, RationalPolynomial, RootInterval};

use std::cmp::Ordering;

use rug::{Integer, Rational};

use crate::arith::sigma_sieve;
use crate::par::{self, Execution};
use crate::{Error, ExactValue, Result};

const CHUNK: usize = 512;

/// `p_α(0), …, p_α(limit)` computed exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSequence {
    alpha: Rational,
    values: Vec<ExactValue>,
    integral: bool,
}

impl PartitionSequence {
    /// Wraps arbitrary positive values (used for convolution experiments).
    pub fn from_values(alpha: Rational, values: Vec<ExactValue>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| v.cmp0() != Ordering::Greater) {
            return Err(Error::invalid("sequence values must be positive"));
        }
        let integral = values.iter().all(|v| *v.denom() == 1);
        Ok(PartitionSequence {
            alpha,
            values,
            integral,
        })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn values(&self) -> &[ExactValue] {
        &self.values
    }

    pub fn get(&self, n: u64) -> &ExactValue {
        &self.values[n as usize]
    }

    /// True when every value is an integer.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Sign of `p(a)·p(b) − p(c)·p(d)`.
    pub fn cmp_products(&self, a: u64, b: u64, c: u64, d: u64) -> Ordering {
        cmp_products(self.get(a), self.get(b), self.get(c), self.get(d))
    }
}

/// Sign of `a·b − c·d` for nonnegative rationals, by cross-multiplication.
pub fn cmp_products(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Ordering {
    let all_int = *a.denom() == 1 && *b.denom() == 1 && *c.denom() == 1 && *d.denom() == 1;
    let left = Integer::from(a.numer() * b.numer());
    let right = Integer::from(c.numer() * d.numer());
    if all_int {
        return left.cmp(&right);
    }
    let left = left * c.denom() * d.denom();
    let right = right * a.denom() * b.denom();
    left.cmp(&right)
}

/// Exact `p_α(n)` for `0 ≤ n ≤ limit` by the divisor-sum recursion
/// `p(n) = (α/n) Σ_{ℓ=1}^{n} σ(ℓ) p(n−ℓ)`.
pub fn exact_sequence(alpha: &Rational, limit: u64) -> Result<PartitionSequence> {
    exact_sequence_with(alpha, limit, Execution::default())
}

pub fn exact_sequence_with(alpha: &Rational, limit: u64, exec: Execution) -> Result<PartitionSequence> {
    if alpha.cmp0() != Ordering::Greater {
        return Err(Error::invalid("alpha must be positive"));
    }
    let values = if *alpha.denom() == 1 {
        integer_recursion(alpha.numer(), limit, exec)?
    } else {
        rational_recursion(alpha, limit)?
    };
    let integral = *alpha.denom() == 1;
    Ok(PartitionSequence {
        alpha: alpha.clone(),
        values,
        integral,
    })
}

fn integer_recursion(k: &Integer, limit: u64, exec: Execution) -> Result<Vec<Rational>> {
    let sigma = sigma_sieve(limit.max(1) as usize)?;
    let sig = sigma.raw();
    let mut p: Vec<Integer> = Vec::with_capacity(limit as usize + 1);
    p.push(Integer::from(1));
    for n in 1..=limit as usize {
        let sum = par::map_reduce(
            exec,
            n,
            CHUNK,
            |r| {
                let mut acc = Integer::new();
                for l in r.start + 1..=r.end {
                    acc += &p[n - l] * sig[l];
                }
                acc
            },
            |a, b| a + b,
        )
        .unwrap_or_default();
        let mut v = sum * k;
        let n_int = Integer::from(n);
        assert!(v.is_divisible(&n_int), "p_k({n}) is not an integer");
        v.div_exact_mut(&n_int);
        p.push(v);
    }
    Ok(p.into_iter().map(Rational::from).collect())
}

fn rational_recursion(alpha: &Rational, limit: u64) -> Result<Vec<Rational>> {
    // N_j = p(j)·b^j·j! is an integer, and N_n = a·S_n with the nested sum
    // S_n = Σ_ℓ σ(ℓ) N_{n−ℓ} Π_{i<ℓ} b(n−i), evaluated by Horner's rule.
    let sigma = sigma_sieve(limit.max(1) as usize)?;
    let a = alpha.numer();
    let b = alpha.denom();
    let mut scaled: Vec<Integer> = vec![Integer::from(1)];
    let mut out = vec![Rational::from(1)];
    let mut denom = Integer::from(1);
    for n in 1..=limit as usize {
        let mut acc = Integer::from(&scaled[0] * sigma.get(n));
        for l in (1..n).rev() {
            acc *= b;
            acc *= (n - l) as u64;
            acc += &scaled[n - l] * sigma.get(l);
        }
        let v = acc * a;
        denom *= b;
        denom *= n as u64;
        out.push(Rational::from((v.clone(), denom.clone())));
        scaled.push(v);
    }
    Ok(out)
}

/// Term-wise Cauchy product of two finite sequences (truncated to the shorter).
pub fn convolve_values(a: &[Rational], b: &[Rational], exec: Execution) -> Vec<Rational> {
    let len = a.len().min(b.len());
    par::map_indices(exec, len, |n| {
        let mut acc = Rational::new();
        for i in 0..=n {
            acc += Rational::from(&a[i] * &b[n - i]);
        }
        acc
    })
}

/// `p_{α₁+α₂} = p_{α₁} * p_{α₂}`.
pub fn convolve(a: &PartitionSequence, b: &PartitionSequence) -> PartitionSequence {
    let values = convolve_values(&a.values, &b.values, Execution::default());
    PartitionSequence {
        alpha: Rational::from(&a.alpha + &b.alpha),
        integral: a.integral && b.integral,
        values,
    }
}

/// True when `v(n)² ≥ v(n−1)·v(n+1)` for every interior `n`.
pub fn is_log_concave(v: &[Rational]) -> bool {
    (1..v.len().saturating_sub(1)).all(|n| cmp_products(&v[n], &v[n], &v[n - 1], &v[n + 1]).is_ge())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectReport {
    pub alpha: Rational,
    pub n: u64,
    pub ell: u64,
    /// `p(n−1)p(ℓ+1) − p(n)p(ℓ)`.
    pub defect: ExactValue,
    pub sign: Sign,
}

/// Exact `p_α(n−1)p_α(ℓ+1) − p_α(n)p_α(ℓ)`.
pub fn cft_defect(alpha: &Rational, n: u64, ell: u64) -> Result<DefectReport> {
    if n < 1 {
        return Err(Error::invalid("cft_defect requires n >= 1"));
    }
    let seq = exact_sequence(alpha, n.max(ell + 1))?;
    defect_in(&seq, n, ell)
}

/// Defect read off an already computed sequence.
pub fn defect_in(seq: &PartitionSequence, n: u64, ell: u64) -> Result<DefectReport> {
    if n < 1 || n.max(ell + 1) > seq.limit() {
        return Err(Error::OutOfRange {
            what: "(n, ell)",
            detail: format!("({n}, {ell}) with sequence limit {}", seq.limit()),
        });
    }
    let defect = Rational::from(seq.get(n - 1) * seq.get(ell + 1)) - Rational::from(seq.get(n) * seq.get(ell));
    let sign = Sign::from(defect.cmp0());
    Ok(DefectReport {
        alpha: seq.alpha.clone(),
        n,
        ell,
        defect,
        sign,
    })
}

/// Every `n` in `[n_from, n_to]` with `p(n)² < p(n−1)p(n+1)`.
pub fn logconcavity_scan(seq: &PartitionSequence, n_from: u64, n_to: u64) -> Result<Vec<u64>> {
    logconcavity_scan_with(seq, n_from, n_to, Execution::default())
}

pub fn logconcavity_scan_with(seq: &PartitionSequence, n_from: u64, n_to: u64, exec: Execution) -> Result<Vec<u64>> {
    if n_from < 1 || n_from > n_to || n_to + 1 > seq.limit() {
        return Err(Error::OutOfRange {
            what: "scan range",
            detail: format!("[{n_from}, {n_to}] with sequence limit {}", seq.limit()),
        });
    }
    let len = (n_to - n_from + 1) as usize;
    let hits = par::map_reduce(
        exec,
        len,
        CHUNK,
        |r| {
            r.map(|i| n_from + i as u64)
                .filter(|&n| seq.cmp_products(n, n, n - 1, n + 1) == Ordering::Less)
                .collect::<Vec<_>>()
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    Ok(hits.unwrap_or_default())
}

/// All pairs `n > ℓ ≥ 0` with `n ≤ n_max` and `p(n−1)p(ℓ+1) < p(n)p(ℓ)`,
/// sorted by `(n, ℓ)`.
///
/// A pair violates iff `r(ℓ) < r(n−1)` for the ratios `r(j) = p(j+1)/p(j)`,
/// so each `ℓ` is tested against the suffix maximum of `r` and only the `ℓ`
/// that fail are expanded into pairs.
pub fn cft_pair_scan(seq: &PartitionSequence, n_max: u64) -> Result<Vec<(u64, u64)>> {
    if n_max + 1 > seq.limit() {
        return Err(Error::OutOfRange {
            what: "n_max",
            detail: format!("{n_max} with sequence limit {}", seq.limit()),
        });
    }
    // r(i) > r(j)  ⟺  p(i+1)p(j) > p(j+1)p(i)
    let ratio_cmp = |i: u64, j: u64| seq.cmp_products(i + 1, j, j + 1, i);
    let mut pairs = Vec::new();
    if n_max < 2 {
        return Ok(pairs);
    }
    let mut best = n_max - 1;
    for ell in (0..n_max - 1).rev() {
        let j = ell + 1;
        if ratio_cmp(j, best) == Ordering::Greater {
            best = j;
        }
        if ratio_cmp(best, ell) == Ordering::Greater {
            for j in ell + 1..n_max {
                if ratio_cmp(j, ell) == Ordering::Greater {
                    pairs.push((j + 1, ell));
                }
            }
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[Rational]) -> Vec<i64> {
        v.iter().map(|x| x.numer().to_i64().unwrap()).collect()
    }

    #[test]
    fn small_tables() {
        let cases: [(i64, [i64; 7]); 5] = [
            (1, [1, 1, 2, 3, 5, 7, 11]),
            (2, [1, 2, 5, 10, 20, 36, 65]),
            (3, [1, 3, 9, 22, 51, 108, 221]),
            (4, [1, 4, 14, 40, 105, 252, 574]),
            (5, [1, 5, 20, 65, 190, 506, 1265]),
        ];
        for (k, want) in cases {
            let s = exact_sequence(&Rational::from(k), 6).unwrap();
            assert_eq!(ints(s.values()), want, "k = {k}");
        }
        assert_eq!(exact_sequence(&Rational::from(7), 0).unwrap().values(), &[Rational::from(1)]);
        assert!(exact_sequence(&Rational::from(0), 3).is_err());
        assert!(exact_sequence(&Rational::from(-2), 3).is_err());
    }

    #[test]
    fn rational_alpha() {
        let s = exact_sequence(&Rational::from((5, 2)), 2).unwrap();
        assert_eq!(s.get(2), &Rational::from((55, 8)));
        assert!(!s.is_integral());
    }

    #[test]
    fn defects() {
        let r = cft_defect(&Rational::from(2), 6, 4).unwrap();
        assert_eq!(r.defect, -4);
        assert_eq!(r.sign, Sign::Negative);
        let r = cft_defect(&Rational::from(3), 3, 1).unwrap();
        assert_eq!(r.defect, 15);
        assert_eq!(r.sign, Sign::Positive);
        let r = cft_defect(&Rational::from((7, 3)), 8, 7).unwrap();
        assert_eq!(r.sign, Sign::Zero);
        assert!(cft_defect(&Rational::from(2), 0, 0).is_err());
    }

    #[test]
    fn scans() {
        let p2 = exact_sequence(&Rational::from(2), 30).unwrap();
        assert_eq!(logconcavity_scan(&p2, 1, 28).unwrap(), vec![1, 5]);
        let p3 = exact_sequence(&Rational::from(3), 100).unwrap();
        assert!(logconcavity_scan(&p3, 1, 98).unwrap().is_empty());
        assert!(logconcavity_scan(&p3, 0, 5).is_err());
        assert!(logconcavity_scan(&p3, 1, 100).is_err());
    }

    #[test]
    fn pair_scan_matches_double_loop() {
        for alpha in [Rational::from(2), Rational::from(3), Rational::from((203, 100)), Rational::from(1)] {
            let s = exact_sequence(&alpha, 61).unwrap();
            let mut brute = Vec::new();
            for n in 1..=60u64 {
                for ell in 0..n {
                    if defect_in(&s, n, ell).unwrap().sign == Sign::Negative {
                        brute.push((n, ell));
                    }
                }
            }
            assert_eq!(cft_pair_scan(&s, 60).unwrap(), brute, "alpha = {alpha}");
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let a = exact_sequence_with(&Rational::from(4), 1500, Execution::Sequential).unwrap();
        let b = exact_sequence_with(&Rational::from(4), 1500, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
