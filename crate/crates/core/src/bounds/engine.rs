//! The truncated lower/upper recursions with directed rounding.
//!
//! Each carrier keeps a ring of the most recent values as normalized `L`-limb
//! mantissas with binary exponents. One step forms the inner sum in a
//! fixed-point accumulator whose unit is `2^S` (`S` the largest exponent
//! involved): every term is shifted into place rounding in the carrier's
//! direction, so the sum itself is exact integer arithmetic and does not
//! depend on summation order or chunking.
//!
//! Terms whose combined size is provably below one accumulator unit are cut
//! off: the lower carrier simply drops them, the upper carrier adds one unit
//! in their place.

use rug::Rational;
use sha2::{Digest, Sha256};

use crate::arith::{sigma_sieve, SigmaTable};
use crate::bounds::schedule::TruncationSchedule;
use crate::directed::{bit_length, limbs_for_bits, DirectedValue, Rounding};
use crate::par::{self, Execution};
use crate::rational::{format_rational, to_u64_pair};
use crate::{Error, Result};

/// Indices above this would overflow the `n²` factor of the upper recursion.
pub const MAX_INDEX: u64 = u32::MAX as u64;
/// Largest accepted denominator of `α`.
pub const MAX_ALPHA_DEN: u64 = 1 << 31;

const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundPair {
    pub n: u64,
    pub lower: DirectedValue,
    pub upper: DirectedValue,
}

impl BoundPair {
    /// One stream line: `n <lower> <upper>`.
    pub fn line(&self) -> String {
        format!("{} {} {}", self.n, self.lower, self.upper)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lower.cmp_rational(q).is_le() && self.upper.cmp_rational(q).is_ge()
    }

    /// `(upper − lower) / lower` as a float.
    pub fn relative_gap(&self) -> f64 {
        let l = self.lower.to_rational();
        let u = self.upper.to_rational();
        ((u - &l) / l).to_f64()
    }
}

/// Ring buffer of recent values of one carrier.
#[derive(Clone, Debug)]
pub(crate) struct Carrier {
    pub(crate) rounding: Rounding,
    limbs: usize,
    cap: usize,
    first: u64,
    len: usize,
    head: usize,
    mant: Vec<u64>,
    exp: Vec<i64>,
    // value(i) < 2^pmax(i) bounds every value with index ≤ i
    pmax: Vec<i64>,
}

impl Carrier {
    fn new(rounding: Rounding, limbs: usize, cap: usize) -> Self {
        Carrier {
            rounding,
            limbs,
            cap,
            first: 0,
            len: 0,
            head: 0,
            mant: vec![0; cap * limbs],
            exp: vec![0; cap],
            pmax: vec![0; cap],
        }
    }

    #[inline]
    fn slot(&self, n: u64) -> usize {
        debug_assert!(n >= self.first && n < self.first + self.len as u64);
        (self.head + (n - self.first) as usize) % self.cap
    }

    #[inline]
    pub(crate) fn mant(&self, n: u64) -> &[u64] {
        let s = self.slot(n) * self.limbs;
        &self.mant[s..s + self.limbs]
    }

    #[inline]
    pub(crate) fn exp(&self, n: u64) -> i64 {
        self.exp[self.slot(n)]
    }

    #[inline]
    pub(crate) fn pmax(&self, n: u64) -> i64 {
        self.pmax[self.slot(n)]
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn first(&self) -> u64 {
        self.first
    }

    pub(crate) fn push(&mut self, mant: &[u64], exp: i64, pmax: Option<i64>) {
        let own = exp + 64 * self.limbs as i64;
        let pmax = pmax.unwrap_or_else(|| {
            if self.len == 0 {
                own
            } else {
                own.max(self.pmax(self.first + self.len as u64 - 1))
            }
        });
        if self.len == self.cap {
            self.head = (self.head + 1) % self.cap;
            self.first += 1;
            self.len -= 1;
        }
        let slot = (self.head + self.len) % self.cap;
        self.mant[slot * self.limbs..(slot + 1) * self.limbs].copy_from_slice(mant);
        self.exp[slot] = exp;
        self.pmax[slot] = pmax;
        self.len += 1;
    }

    pub(crate) fn value(&self, n: u64) -> DirectedValue {
        DirectedValue::from_parts(self.mant(n).to_vec(), self.exp(n), self.rounding)
    }

    /// Restarts an empty ring at index `first`.
    pub(crate) fn reset_at(&mut self, first: u64) {
        self.first = first;
        self.len = 0;
        self.head = 0;
    }
}

/// Adds `⌊mant·mult / 2^shift⌋` (or the ceiling, rounding up) into `acc`.
#[inline]
fn add_term(acc: &mut [u64], prod: &mut [u64], mant: &[u64], mult: u64, shift: u64, up: bool) {
    let l = mant.len();
    let q = (shift / 64) as usize;
    if q > l {
        if up {
            add_small(acc, 0, 1);
        }
        return;
    }
    let r = (shift % 64) as u32;
    let mut carry = 0u64;
    for j in 0..l {
        let t = u128::from(mant[j]) * u128::from(mult) + u128::from(carry);
        prod[j] = t as u64;
        carry = (t >> 64) as u64;
    }
    prod[l] = carry;
    let sticky = up && (prod[..q].iter().any(|&x| x != 0) || (r > 0 && prod[q] << (64 - r) != 0));
    let mut c = false;
    for j in q..=l {
        let v = if r == 0 {
            prod[j]
        } else {
            let hi = if j < l { prod[j + 1] << (64 - r) } else { 0 };
            (prod[j] >> r) | hi
        };
        let (s1, o1) = acc[j - q].overflowing_add(v);
        let (s2, o2) = s1.overflowing_add(u64::from(c));
        acc[j - q] = s2;
        c = o1 || o2;
    }
    if c {
        add_small(acc, l - q + 1, 1);
    }
    if sticky {
        add_small(acc, 0, 1);
    }
}

#[inline]
fn add_small(acc: &mut [u64], from: usize, v: u64) {
    let mut v = v;
    for x in &mut acc[from..] {
        let (s, o) = x.overflowing_add(v);
        *x = s;
        if !o {
            return;
        }
        v = 1;
    }
    debug_assert!(v == 0, "accumulator overflow");
}

fn add_into(acc: &mut [u64], other: &[u64]) {
    let mut c = false;
    for (x, &y) in acc.iter_mut().zip(other) {
        let (s1, o1) = x.overflowing_add(y);
        let (s2, o2) = s1.overflowing_add(u64::from(c));
        *x = s2;
        c = o1 || o2;
    }
    debug_assert!(!c);
}

/// `acc·2^S · num / den` rounded to `limbs` limbs in `rounding`'s direction.
fn finalize(acc: &[u64], s: i64, num: u64, den: u64, limbs: usize, rounding: Rounding) -> Option<(Vec<u64>, i64)> {
    // v = acc·num·2^64
    let mut v = vec![0u64; acc.len() + 2];
    let mut carry = 0u64;
    for (j, &x) in acc.iter().enumerate() {
        let t = u128::from(x) * u128::from(num) + u128::from(carry);
        v[j + 1] = t as u64;
        carry = (t >> 64) as u64;
    }
    v[acc.len() + 1] = carry;
    let mut rem = 0u128;
    let den128 = u128::from(den);
    for x in v.iter_mut().rev() {
        let cur = (rem << 64) | u128::from(*x);
        *x = (cur / den128) as u64;
        rem = cur % den128;
    }
    let mut sticky = rem != 0;
    let bits = bit_length(&v);
    if bits == 0 {
        return None;
    }
    let target = 64 * limbs as u64;
    let mut exp = s - 64;
    let mut out = vec![0u64; limbs];
    if bits <= target {
        let sh = target - bits;
        out[..v.len().min(limbs)].copy_from_slice(&v[..v.len().min(limbs)]);
        // the value fits in `limbs` limbs when bits ≤ target
        crate::directed::shl_in_place(&mut out, sh);
        exp -= sh as i64;
    } else {
        let sh = bits - target;
        let q = (sh / 64) as usize;
        let r = (sh % 64) as u32;
        sticky |= v[..q].iter().any(|&x| x != 0) || (r > 0 && v[q] << (64 - r) != 0);
        for (j, o) in out.iter_mut().enumerate() {
            let lo = v[q + j];
            let hi = v.get(q + j + 1).copied().unwrap_or(0);
            *o = if r == 0 { lo } else { (lo >> r) | (hi << (64 - r)) };
        }
        exp += sh as i64;
    }
    if rounding == Rounding::Up && sticky {
        let mut c = true;
        for x in out.iter_mut() {
            let (s, o) = x.overflowing_add(1);
            *x = s;
            if !o {
                c = false;
                break;
            }
        }
        if c {
            // 2^{64L} rounds to 2^{64L-1}·2
            *out.last_mut().unwrap() = 1 << 63;
            exp += 1;
        }
    }
    Some((out, exp))
}

/// Mutable state of one lower/upper run: parameters, the two rings, and the
/// running integrity hash of everything emitted so far.
#[derive(Clone, Debug)]
pub struct BoundRunState {
    alpha: Rational,
    a: u64,
    b: u64,
    schedule: TruncationSchedule,
    precision_bits: u32,
    limbs: usize,
    horizon: u64,
    sigma: SigmaTable,
    pub(crate) lower: Carrier,
    pub(crate) upper: Carrier,
    current_n: u64,
    integrity: [u8; 32],
    execution: Execution,
    peak_window: usize,
}

impl BoundRunState {
    /// Fresh run at `n = 0` able to step up to `horizon`.
    pub fn new(alpha: &Rational, schedule: TruncationSchedule, precision_bits: u32, horizon: u64) -> Result<Self> {
        let (a, b) = to_u64_pair(alpha).ok_or_else(|| Error::invalid("alpha must be a positive rational"))?;
        if b >= MAX_ALPHA_DEN {
            return Err(Error::invalid("alpha denominator too large for the bounds engine"));
        }
        if precision_bits < 64 {
            return Err(Error::invalid("precision_bits must be at least 64"));
        }
        if horizon > MAX_INDEX {
            return Err(Error::OutOfRange {
                what: "n",
                detail: format!("{horizon} > {MAX_INDEX}"),
            });
        }
        if *alpha < 1 && !schedule.is_full_upto(horizon) {
            return Err(Error::invalid("truncated schedules require alpha >= 1"));
        }
        let limbs = limbs_for_bits(precision_bits);
        let max_d = schedule.max_d_upto(horizon);
        let cap = max_d as usize + 2;
        let sigma = sigma_sieve(max_d.max(1) as usize)?;
        let mut state = BoundRunState {
            alpha: alpha.clone(),
            a,
            b,
            precision_bits,
            limbs,
            horizon,
            sigma,
            lower: Carrier::new(Rounding::Down, limbs, cap),
            upper: Carrier::new(Rounding::Up, limbs, cap),
            current_n: 0,
            integrity: seed_hash(alpha, &schedule, precision_bits),
            schedule,
            execution: Execution::default(),
            peak_window: 0,
        };
        let one = DirectedValue::one(limbs, Rounding::Down);
        state.lower.push(one.mantissa(), one.exponent(), None);
        state.upper.push(one.mantissa(), one.exponent(), None);
        state.peak_window = 1;
        let p0 = state.pair(0).expect("n = 0 is stored");
        state.absorb(&p0);
        Ok(state)
    }

    pub(crate) fn from_parts(
        alpha: &Rational,
        schedule: TruncationSchedule,
        precision_bits: u32,
        horizon: u64,
        current_n: u64,
        integrity: [u8; 32],
    ) -> Result<Self> {
        let mut s = BoundRunState::new(alpha, schedule, precision_bits, horizon)?;
        s.current_n = current_n;
        s.integrity = integrity;
        s.lower.reset_at(0);
        s.upper.reset_at(0);
        s.peak_window = 0;
        Ok(s)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn schedule(&self) -> &TruncationSchedule {
        &self.schedule
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn current_n(&self) -> u64 {
        self.current_n
    }

    pub fn limbs(&self) -> usize {
        self.limbs
    }

    /// Capacity of each ring: `max_{j ≤ horizon} d_j + 2`.
    pub fn window_capacity(&self) -> usize {
        self.lower.cap
    }

    /// Largest number of pairs held at once so far.
    pub fn peak_window(&self) -> usize {
        self.peak_window
    }

    pub fn integrity_hex(&self) -> String {
        hex::encode(self.integrity)
    }

    /// Indices currently held in the window.
    pub fn window_range(&self) -> std::ops::RangeInclusive<u64> {
        self.lower.first()..=self.current_n
    }

    /// The stored pair at `n`, if it is still in the window.
    pub fn pair(&self, n: u64) -> Option<BoundPair> {
        if n < self.lower.first() || n > self.current_n || self.lower.len() == 0 {
            return None;
        }
        Some(BoundPair {
            n,
            lower: self.lower.value(n),
            upper: self.upper.value(n),
        })
    }

    fn absorb(&mut self, pair: &BoundPair) {
        let mut h = Sha256::new();
        h.update(self.integrity);
        h.update(pair.line().as_bytes());
        self.integrity = h.finalize().into();
    }

    /// Computes the pair at `current_n + 1`.
    pub fn step(&mut self) -> Result<BoundPair> {
        let n = self.current_n + 1;
        if n > self.horizon {
            return Err(Error::OutOfRange {
                what: "n",
                detail: format!("{n} is beyond the run horizon {}", self.horizon),
            });
        }
        let d = self.schedule.d(n);
        let den = self.b * n;
        let (lm, le) = step_carrier(&self.lower, &self.sigma, n, d, self.a, den, self.execution)
            .ok_or(Error::PrecisionUnderflow { n })?;
        let (um, ue) = step_carrier(&self.upper, &self.sigma, n, d, self.a, den, self.execution)
            .ok_or(Error::PrecisionUnderflow { n })?;
        self.lower.push(&lm, le, None);
        self.upper.push(&um, ue, None);
        self.current_n = n;
        self.peak_window = self.peak_window.max(self.lower.len());
        let pair = BoundPair {
            n,
            lower: DirectedValue::from_parts(lm, le, Rounding::Down),
            upper: DirectedValue::from_parts(um, ue, Rounding::Up),
        };
        self.absorb(&pair);
        Ok(pair)
    }

    /// Pushes a restored window entry (checkpoint loading).
    pub(crate) fn restore_entry(&mut self, lower: &DirectedValue, upper: &DirectedValue, pmax: (i64, i64)) {
        self.lower.push(lower.mantissa(), lower.exponent(), Some(pmax.0));
        self.upper.push(upper.mantissa(), upper.exponent(), Some(pmax.1));
        self.peak_window = self.peak_window.max(self.lower.len());
    }

    pub(crate) fn restart_window_at(&mut self, first: u64) {
        self.lower.reset_at(first);
        self.upper.reset_at(first);
    }
}

fn seed_hash(alpha: &Rational, schedule: &TruncationSchedule, precision_bits: u32) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(format!("etacert-bounds\n{}\n{}\n{}\n", format_rational(alpha), schedule.spec(), precision_bits).as_bytes());
    h.finalize().into()
}

/// One recursion step of a single carrier; `None` on underflow to zero.
fn step_carrier(c: &Carrier, sigma: &SigmaTable, n: u64, d: u64, a: u64, den: u64, exec: Execution) -> Option<(Vec<u64>, i64)> {
    let up = c.rounding == Rounding::Up;
    let d = d as usize;
    let e_ref = c.exp(n - 1);
    // smallest cutoff whose dropped tail is below 2^e_ref
    let tail_ok = |cut: usize| {
        if cut >= d {
            return true;
        }
        let t = sigma.range_sum(cut + 1, d);
        t == 0 || 64 - i64::from(t.leading_zeros()) + c.pmax(n - cut as u64 - 1) <= e_ref
    };
    let (mut lo, mut hi) = (1usize, d);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if tail_ok(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cut = lo;
    let extra = (up && (d as u64) < n).then(|| n - d as u64 - 1);

    let mut s = (1..=cut).map(|l| c.exp(n - l as u64)).max().unwrap_or(e_ref);
    if let Some(x) = extra {
        s = s.max(c.exp(x));
    }
    let width = c.limbs + 2;
    let sig = sigma.raw();
    let partial = |range: std::ops::Range<usize>| {
        let mut acc = vec![0u64; width];
        let mut prod = vec![0u64; c.limbs + 1];
        for (l, &sl) in sig.iter().enumerate().take(range.end + 1).skip(range.start + 1) {
            let i = n - l as u64;
            add_term(&mut acc, &mut prod, c.mant(i), sl, (s - c.exp(i)) as u64, up);
        }
        acc
    };
    let mut acc = par::map_reduce(exec, cut, CHUNK, partial, |mut x, y| {
        add_into(&mut x, &y);
        x
    })
    .unwrap_or_else(|| vec![0u64; width]);
    if up {
        if cut < d {
            add_small(&mut acc, 0, 1);
        }
        if let Some(x) = extra {
            let mut prod = vec![0u64; c.limbs + 1];
            add_term(&mut acc, &mut prod, c.mant(x), n * n, (s - c.exp(x)) as u64, true);
        }
    }
    finalize(&acc, s, a, den, c.limbs, c.rounding)
}
