//! Truncation schedules `j ↦ d_j` with `1 ≤ d_j ≤ j`.
//!
//! A schedule is a list of segments `RULE[@UPTO]` separated by `;`. Each rule
//! applies for `j ≤ UPTO` (the last segment has no bound):
//!
//! * `full`: `d_j = j`
//! * `const(N)`: `d_j = min(j, N)`
//! * `pow(C,R)`: `d_j = min(j, ⌊C·j^{1/R}⌋)` with `C` a positive rational
//!
//! Builtin names `full`, `d4` and `d5` expand to fixed segment lists. Floors
//! are computed exactly with integer root comparisons, never in floating point.

use std::fmt;

use rug::ops::Pow;
use rug::Integer;

use crate::rational::parse_rational;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Full,
    Constant(u64),
    /// `⌊(num/den)·j^{1/root}⌋`.
    Power { num: u64, den: u64, root: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub upto: Option<u64>,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSchedule {
    name: String,
    segments: Vec<Segment>,
}

const D4: &str = "full@200000;pow(250,3)@3500000;pow(1125,3)";
const D5: &str = "full@800000;pow(25,2)@20000000;pow(43/2,2)";

/// Parses a builtin name or a custom segment list.
pub fn make_schedule(spec: &str) -> Result<TruncationSchedule> {
    let spec = spec.trim();
    let (name, body) = match spec {
        "d4" => ("d4", D4),
        "d5" => ("d5", D5),
        "full" => ("full", "full"),
        _ => (spec, spec),
    };
    let segments = body
        .split(';')
        .map(parse_segment)
        .collect::<Result<Vec<_>>>()?;
    let schedule = TruncationSchedule {
        name: name.to_string(),
        segments,
    };
    schedule.validate()?;
    Ok(schedule)
}

/// Same rule under another display name (restores builtin names from their expansion).
pub(crate) fn rename(mut s: TruncationSchedule, name: &str) -> TruncationSchedule {
    s.name = name.to_string();
    s
}

fn parse_segment(text: &str) -> Result<Segment> {
    let bad = |msg: &str| Error::InvalidSchedule(format!("{msg}: {text:?}"));
    let text = text.trim();
    let (rule, upto) = match text.split_once('@') {
        Some((r, u)) => {
            let u: u64 = u.trim().parse().map_err(|_| bad("bad segment bound"))?;
            (r.trim(), Some(u))
        }
        None => (text, None),
    };
    let args = |prefix: &str| -> Option<Vec<String>> {
        let inner = rule.strip_prefix(prefix)?.strip_suffix(')')?;
        Some(inner.split(',').map(|s| s.trim().to_string()).collect())
    };
    let rule = if rule == "full" {
        Rule::Full
    } else if let Some(a) = args("const(") {
        match a.as_slice() {
            [n] => Rule::Constant(n.parse().map_err(|_| bad("bad constant"))?),
            _ => return Err(bad("const takes one argument")),
        }
    } else if let Some(a) = args("pow(") {
        match a.as_slice() {
            [c, r] => {
                let c = parse_rational(c).map_err(|_| bad("bad coefficient"))?;
                let (num, den) = crate::rational::to_u64_pair(&c).ok_or_else(|| bad("coefficient must be positive"))?;
                let root: u32 = r.parse().map_err(|_| bad("bad root"))?;
                if root == 0 {
                    return Err(bad("root must be positive"));
                }
                Rule::Power { num, den, root }
            }
            _ => return Err(bad("pow takes two arguments")),
        }
    } else {
        return Err(bad("unknown rule"));
    };
    Ok(Segment { upto, rule })
}

impl TruncationSchedule {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Canonical segment-list form; `make_schedule(&s.spec())` rebuilds the rule.
    pub fn spec(&self) -> String {
        self.segments
            .iter()
            .map(|s| {
                let rule = match &s.rule {
                    Rule::Full => "full".to_string(),
                    Rule::Constant(c) => format!("const({c})"),
                    Rule::Power { num, den: 1, root } => format!("pow({num},{root})"),
                    Rule::Power { num, den, root } => format!("pow({num}/{den},{root})"),
                };
                match s.upto {
                    Some(u) => format!("{rule}@{u}"),
                    None => rule,
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        let last = self.segments.len() - 1;
        let mut prev = 0u64;
        for (i, s) in self.segments.iter().enumerate() {
            match (i == last, s.upto) {
                (true, Some(_)) => return bad("last segment must be unbounded".into()),
                (false, None) => return bad("only the last segment may be unbounded".into()),
                (false, Some(u)) if u <= prev => return bad("segment bounds must increase".into()),
                (false, Some(u)) => prev = u,
                _ => {}
            }
        }
        // probe small j, every segment boundary and powers of ten
        let mut probes: Vec<u64> = (1..=64).collect();
        for s in &self.segments {
            if let Some(u) = s.upto {
                probes.extend([u, u + 1]);
            }
        }
        probes.extend((0..=12).map(|e| 10u64.pow(e)));
        for j in probes {
            let raw = self.raw(j);
            if raw < 1 {
                return bad(format!("d_{j} = {raw} < 1"));
            }
        }
        Ok(())
    }

    fn segment_for(&self, j: u64) -> &Segment {
        self.segments
            .iter()
            .find(|s| s.upto.map_or(true, |u| j <= u))
            .expect("last segment is unbounded")
    }

    fn raw(&self, j: u64) -> u64 {
        match self.segment_for(j).rule {
            Rule::Full => j,
            Rule::Constant(c) => c,
            Rule::Power { num, den, root } => floor_scaled_root(num, den, root, j),
        }
    }

    /// `d_j` for `j ≥ 1`.
    pub fn d(&self, j: u64) -> u64 {
        self.raw(j).min(j)
    }

    /// `max_{1≤j≤n} d_j` (0 for `n = 0`).
    pub fn max_d_upto(&self, n: u64) -> u64 {
        let mut best = 0;
        let mut start = 1u64;
        for s in &self.segments {
            if start > n {
                break;
            }
            let end = s.upto.map_or(n, |u| u.min(n));
            // every rule is nondecreasing in j, so the segment maximum sits at its end
            best = best.max(self.d(end));
            start = end + 1;
        }
        best
    }

    /// True when `d_j = j` for all `j ≤ n`.
    pub fn is_full_upto(&self, n: u64) -> bool {
        let mut start = 1u64;
        for s in &self.segments {
            if start > n {
                return true;
            }
            let end = s.upto.map_or(n, |u| u.min(n));
            let full = match s.rule {
                Rule::Full => true,
                Rule::Constant(c) => c >= end,
                // C·j^{1/R} ≥ j holds on an initial interval of j
                Rule::Power { .. } => self.d(end) == end,
            };
            if !full {
                return false;
            }
            start = end + 1;
        }
        true
    }
}

impl fmt::Display for TruncationSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `⌊(num/den)·j^{1/root}⌋`, i.e. the largest `m` with `(m·den)^root ≤ num^root·j`.
pub fn floor_scaled_root(num: u64, den: u64, root: u32, j: u64) -> u64 {
    let target = Integer::from(num).pow(root) * j;
    let fits = |m: u64| (Integer::from(m) * den).pow(root) <= target;
    let guess = (num as f64 / den as f64) * (j as f64).powf(1.0 / f64::from(root));
    let mut m = guess.max(0.0).min(u64::MAX as f64 / 2.0) as u64;
    while m > 0 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let full = make_schedule("full").unwrap();
        assert_eq!(full.d(17), 17);
        let d4 = make_schedule("d4").unwrap();
        assert_eq!(d4.d(200_000), 200_000);
        assert_eq!(d4.d(1_000_000), 25_000);
        assert_eq!(d4.d(3_500_000), (250.0 * 3_500_000f64.cbrt()) as u64);
        assert_eq!(d4.d(8_000_000), 1125 * 200);
        let d5 = make_schedule("d5").unwrap();
        assert_eq!(d5.d(1_000_000), 25_000);
        assert_eq!(d5.d(800_000), 800_000);
        assert_eq!(d5.d(100_000_000), 215_000);
    }

    #[test]
    fn exact_floor_at_perfect_powers() {
        // 10^6 = 100^3, so the naive float cube root is the risky case
        assert_eq!(floor_scaled_root(250, 1, 3, 1_000_000), 25_000);
        assert_eq!(floor_scaled_root(1, 1, 3, 26), 2);
        assert_eq!(floor_scaled_root(1, 1, 3, 27), 3);
        assert_eq!(floor_scaled_root(43, 2, 2, 4), 43);
        for j in 1..2000u64 {
            let m = floor_scaled_root(10, 1, 3, j);
            assert!(m.pow(3) <= 1000 * j && (m + 1).pow(3) > 1000 * j);
        }
    }

    #[test]
    fn custom_rules_and_round_trip() {
        let s = make_schedule("pow(10,3)").unwrap();
        assert_eq!(s.d(1), 1);
        assert_eq!(s.d(1000), 100);
        let c = make_schedule("const(1)").unwrap();
        assert_eq!(c.d(500), 1);
        let d4 = make_schedule("d4").unwrap();
        let again = make_schedule(&d4.spec()).unwrap();
        assert_eq!(again.segments(), d4.segments());
        assert_eq!(make_schedule("full@10;pow(7/2,2)").unwrap().spec(), "full@10;pow(7/2,2)");
    }

    #[test]
    fn rejects_bad_rules() {
        for bad in ["const(0)", "pow(1/10,3)", "pow(0,2)", "full@10", "full;full", "full@5;full@3;full", "zigzag", "pow(1.5,2)"] {
            assert!(make_schedule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn window_maxima() {
        let d4 = make_schedule("d4").unwrap();
        assert_eq!(d4.max_d_upto(1_000_000), 200_000);
        assert_eq!(d4.max_d_upto(100), 100);
        let s = make_schedule("full@50;const(3)").unwrap();
        assert_eq!(s.max_d_upto(1000), 50);
        assert!(s.is_full_upto(50));
        assert!(!s.is_full_upto(51));
        assert!(make_schedule("d4").unwrap().is_full_upto(200_000));
        assert!(!make_schedule("d4").unwrap().is_full_upto(200_001));
    }
}
