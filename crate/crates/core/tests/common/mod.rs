//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rug::{Integer, Rational};

/// Coefficients of `Π_{j≥1} (1 − q^j)^{−k}` up to `q^n`, by multiplying by
/// `1/(1 − q^j)` (a running sum with stride `j`) `k` times for every `j`.
pub fn colored_partitions(k: u32, n: usize) -> Vec<Integer> {
    let mut c = vec![Integer::new(); n + 1];
    c[0] = Integer::from(1);
    for j in 1..=n {
        for _ in 0..k {
            for i in j..=n {
                let prev = c[i - j].clone();
                c[i] += prev;
            }
        }
    }
    c
}

/// Divisor sum by trial division.
pub fn sigma_brute(l: u64) -> u64 {
    (1..=l).filter(|d| l % d == 0).sum()
}

/// Dedekind sum `Σ_{r=1}^{k−1} ((r/k))((hr/k))` with the sawtooth `((x))`,
/// evaluated straight from the definition.
pub fn dedekind_brute(h: u64, k: u64) -> Rational {
    let saw = |num: u64, den: u64| -> Rational {
        if num % den == 0 {
            Rational::new()
        } else {
            Rational::from((num % den, den)) - Rational::from((1, 2))
        }
    };
    let mut s = Rational::new();
    for r in 1..k {
        s += saw(r, k) * saw(h * r, k);
    }
    s
}

/// `a(n)² ≥ a(n−1)a(n+1)` for every interior index.
pub fn log_concave(a: &[Rational]) -> bool {
    a.windows(3).all(|w| Rational::from(&w[1] * &w[1]) >= Rational::from(&w[0] * &w[2]))
}

/// Convolution of two prefixes, truncated to the shorter length.
pub fn convolve(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|i| {
            let mut s = Rational::new();
            for j in 0..=i {
                s += Rational::from(&a[j] * &b[i - j]);
            }
            s
        })
        .collect()
}
