//! Log-concavity certification from the bound recursions.
//!
//! At each `n` the directed comparison `lower(n)² ≥ upper(n−1)·upper(n+1)`
//! implies `p(n)² ≥ p(n−1)p(n+1)`. A failed comparison is never a
//! counterexample by itself: the same `n` is retried on shadow runs at 2× and
//! 4× the precision, and then, if `n + 1` is within exact reach, decided by
//! the exact recursion. Only an exact violation is reported as one.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rug::Rational;
use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, Exception, ExceptionKind, Method, Outcome, Statement};
use super::checkpoint::{checkpoint_digest, checkpoint_load_with, checkpoint_save_with};
use super::engine::BoundRunState;
use super::schedule::TruncationSchedule;
use super::{DEFAULT_CHECKPOINT_EVERY, DEFAULT_PRECISION};
use crate::directed::DirectedValue;
use crate::exact::{exact_sequence_with, PartitionSequence};
use crate::par::Execution;
use crate::rational::format_rational;
use crate::{Error, Result};

/// Largest index the exact fallback computes by default.
pub const DEFAULT_EXACT_CAP: u64 = 5000;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub precision_bits: u32,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: u64,
    /// File receiving one line per bound pair (`n lower upper`).
    pub stream: Option<PathBuf>,
    /// Save a checkpoint and return once this index has been computed.
    pub stop_at: Option<u64>,
    /// Continue from the checkpoint file instead of starting afresh.
    pub resume: bool,
    pub exact_cap: u64,
    /// Number of precision doublings tried before the exact fallback.
    pub escalations: u32,
    pub execution: Execution,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            precision_bits: DEFAULT_PRECISION,
            checkpoint: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            stream: None,
            stop_at: None,
            resume: false,
            exact_cap: DEFAULT_EXACT_CAP,
            escalations: 2,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyReport {
    pub certificate: Certificate,
    pub peak_window: usize,
    pub window_capacity: usize,
    /// Indices whose directed check needed escalation.
    pub escalated: u64,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum CertifyRun {
    Complete(CertifyReport),
    Stopped { at: u64 },
}

impl CertifyRun {
    pub fn complete(self) -> Option<CertifyReport> {
        match self {
            CertifyRun::Complete(r) => Some(r),
            CertifyRun::Stopped { .. } => None,
        }
    }
}

/// Progress stored in the checkpoint next to the run state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Progress {
    n_from: u64,
    n_to: u64,
    exact_cap: u64,
    escalation_levels: u32,
    exceptions: Vec<Exception>,
    digests: Vec<String>,
    escalated: u64,
    stream_bytes: u64,
    /// Set in cadence checkpoints: the file's own digest belongs in `digests`
    /// but cannot be stored inside it.
    #[serde(default)]
    own_digest_pending: bool,
}

/// Certifies `p_α(n)² ≥ p_α(n−1)p_α(n+1)` for `n_from ≤ n ≤ n_to`.
pub fn certify_logconcave(
    alpha: &Rational,
    schedule: TruncationSchedule,
    n_from: u64,
    n_to: u64,
    options: &CertifyOptions,
) -> Result<CertifyRun> {
    if n_from < 1 || n_from > n_to {
        return Err(Error::invalid(format!("need 1 <= n_from <= n_to, got [{n_from}, {n_to}]")));
    }
    if options.stop_at.is_some() && options.checkpoint.is_none() {
        return Err(Error::invalid("stopping early needs a checkpoint path"));
    }
    let (mut state, mut progress) = if options.resume {
        let path = options
            .checkpoint
            .as_deref()
            .ok_or_else(|| Error::invalid("resume needs a checkpoint path"))?;
        resume(path, alpha, &schedule, n_from, n_to, options)?
    } else {
        let state = BoundRunState::new(alpha, schedule, options.precision_bits, n_to + 1)?;
        let progress = Progress {
            n_from,
            n_to,
            exact_cap: options.exact_cap,
            escalation_levels: options.escalations,
            exceptions: Vec::new(),
            digests: Vec::new(),
            escalated: 0,
            stream_bytes: 0,
            own_digest_pending: false,
        };
        (state, progress)
    };
    state.set_execution(options.execution);

    let mut stream = match &options.stream {
        Some(path) => Some(open_stream(path, options.resume, progress.stream_bytes)?),
        None => None,
    };
    if !options.resume {
        let p0 = state.pair(0).expect("initial pair");
        write_line(&mut stream, &mut progress, &p0.line())?;
    }

    let mut resolver = Resolver::new(alpha, state.schedule(), options, n_to + 1);
    let every = options.checkpoint_every.max(1);
    while state.current_n() < n_to + 1 {
        let pair = state.step()?;
        let m = pair.n;
        write_line(&mut stream, &mut progress, &pair.line())?;
        let n = m - 1;
        if n >= n_from && !directed_check(&state, n) {
            progress.escalated += 1;
            if let Some(e) = resolver.resolve(n)? {
                progress.exceptions.push(e);
            }
        }
        let mut saved = false;
        if let Some(path) = &options.checkpoint {
            if m % every == 0 {
                flush(&mut stream)?;
                progress.own_digest_pending = true;
                let attachment = serde_json::to_value(&progress)?;
                progress.own_digest_pending = false;
                let d = checkpoint_save_with(&state, path, Some(attachment))?;
                progress.digests.push(d);
                saved = true;
            }
            if options.stop_at == Some(m) && m < n_to + 1 {
                if !saved {
                    flush(&mut stream)?;
                    checkpoint_save_with(&state, path, Some(serde_json::to_value(&progress)?))?;
                }
                return Ok(CertifyRun::Stopped { at: m });
            }
        }
    }
    flush(&mut stream)?;

    let mut cert = Certificate::new(Statement::LogConcave, format_rational(alpha), [n_from, n_to], Method::Bounded);
    cert.schedule = Some(state.schedule().spec());
    cert.precision_bits = Some(state.precision_bits());
    cert.outcome = outcome(&progress.exceptions);
    cert.exceptions = progress.exceptions;
    cert.checkpoint_digests = progress.digests;
    cert.integrity = Some(state.integrity_hex());
    Ok(CertifyRun::Complete(CertifyReport {
        certificate: cert,
        peak_window: state.peak_window(),
        window_capacity: state.window_capacity(),
        escalated: progress.escalated,
    }))
}

fn outcome(exceptions: &[Exception]) -> Outcome {
    let violation = exceptions.iter().filter(|e| e.kind == ExceptionKind::Violation).map(|e| e.n).max();
    if let Some(n) = violation {
        return Outcome::Counterexample { n, ell: None };
    }
    match exceptions.iter().find(|e| e.kind == ExceptionKind::Indeterminate) {
        Some(e) => Outcome::Indeterminate { n: e.n },
        None => Outcome::Verified,
    }
}

fn resume(
    path: &Path,
    alpha: &Rational,
    schedule: &TruncationSchedule,
    n_from: u64,
    n_to: u64,
    options: &CertifyOptions,
) -> Result<(BoundRunState, Progress)> {
    let (state, attachment) = checkpoint_load_with(path)?;
    let digest = checkpoint_digest(path)?;
    let mismatch = |what: &str, file: String, asked: String| {
        Error::checkpoint(path, format!("{what} mismatch: checkpoint has {file}, run asks for {asked}"))
    };
    if state.alpha() != alpha {
        return Err(mismatch("alpha", format_rational(state.alpha()), format_rational(alpha)));
    }
    if state.schedule().spec() != schedule.spec() {
        return Err(mismatch("schedule", state.schedule().spec(), schedule.spec()));
    }
    if state.precision_bits() != options.precision_bits {
        return Err(mismatch(
            "precision",
            state.precision_bits().to_string(),
            options.precision_bits.to_string(),
        ));
    }
    let mut progress: Progress = attachment
        .ok_or_else(|| Error::checkpoint(path, "no certification progress stored"))
        .and_then(|v| serde_json::from_value(v).map_err(|e| Error::checkpoint(path, format!("bad progress: {e}"))))?;
    if (progress.n_from, progress.n_to) != (n_from, n_to) {
        return Err(mismatch(
            "range",
            format!("[{}, {}]", progress.n_from, progress.n_to),
            format!("[{n_from}, {n_to}]"),
        ));
    }
    if (progress.exact_cap, progress.escalation_levels) != (options.exact_cap, options.escalations) {
        return Err(mismatch(
            "escalation settings",
            format!("cap {} / {} levels", progress.exact_cap, progress.escalation_levels),
            format!("cap {} / {} levels", options.exact_cap, options.escalations),
        ));
    }
    if progress.own_digest_pending {
        progress.digests.push(digest);
        progress.own_digest_pending = false;
    }
    Ok((state, progress))
}

fn open_stream(path: &Path, resume: bool, offset: u64) -> Result<BufWriter<File>> {
    let file = if resume {
        let f = OpenOptions::new().write(true).open(path)?;
        if f.metadata()?.len() < offset {
            return Err(Error::checkpoint(path, "bound stream is shorter than the checkpoint records"));
        }
        f.set_len(offset)?;
        let mut f = f;
        std::io::Seek::seek(&mut f, std::io::SeekFrom::Start(offset))?;
        f
    } else {
        File::create(path)?
    };
    Ok(BufWriter::new(file))
}

fn write_line(stream: &mut Option<BufWriter<File>>, progress: &mut Progress, line: &str) -> Result<()> {
    if let Some(w) = stream {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        progress.stream_bytes += line.len() as u64 + 1;
    }
    Ok(())
}

fn flush(stream: &mut Option<BufWriter<File>>) -> Result<()> {
    if let Some(w) = stream {
        w.flush()?;
    }
    Ok(())
}

/// `lower(n)² ≥ upper(n−1)·upper(n+1)` on the pairs held by `state`.
fn directed_check(state: &BoundRunState, n: u64) -> bool {
    let (Some(a), Some(b), Some(c)) = (state.pair(n - 1), state.pair(n), state.pair(n + 1)) else {
        unreachable!("window holds n-1..n+1");
    };
    check_values(&b.lower, &a.upper, &c.upper)
}

fn check_values(lower_n: &DirectedValue, upper_prev: &DirectedValue, upper_next: &DirectedValue) -> bool {
    DirectedValue::cmp_products(lower_n, lower_n, upper_prev, upper_next).is_ge()
}

/// Escalation ladder for indices whose directed check failed.
struct Resolver {
    alpha: Rational,
    shadows: Vec<BoundRunState>,
    pending: Vec<(TruncationSchedule, u32)>,
    horizon: u64,
    exact_cap: u64,
    exact: Option<PartitionSequence>,
    execution: Execution,
}

impl Resolver {
    fn new(alpha: &Rational, schedule: &TruncationSchedule, options: &CertifyOptions, horizon: u64) -> Self {
        let pending = (1..=options.escalations)
            .map(|i| (schedule.clone(), options.precision_bits << i))
            .collect();
        Resolver {
            alpha: alpha.clone(),
            shadows: Vec::new(),
            pending,
            horizon,
            exact_cap: options.exact_cap,
            exact: None,
            execution: options.execution,
        }
    }

    /// `None` when some escalation settles the inequality at `n`, otherwise
    /// the exception to record.
    fn resolve(&mut self, n: u64) -> Result<Option<Exception>> {
        let levels = self.shadows.len() + self.pending.len();
        for i in 0..levels {
            if i == self.shadows.len() {
                let (s, p) = self.pending.remove(0);
                let st = BoundRunState::new(&self.alpha, s, p, self.horizon)?.with_execution(self.execution);
                self.shadows.push(st);
            }
            let shadow = &mut self.shadows[i];
            while shadow.current_n() < n + 1 {
                shadow.step()?;
            }
            if directed_check(shadow, n) {
                return Ok(None);
            }
        }
        if n < self.exact_cap {
            if self.exact.as_ref().map_or(true, |s| s.limit() < n + 1) {
                let limit = self.horizon.min(self.exact_cap).max(n + 1);
                self.exact = Some(exact_sequence_with(&self.alpha, limit, self.execution)?);
            }
            let seq = self.exact.as_ref().expect("computed above");
            let (pn, pa, pb) = (seq.get(n), seq.get(n - 1), seq.get(n + 1));
            let defect = Rational::from(pn * pn) - Rational::from(pa * pb);
            if defect.cmp0().is_lt() {
                return Ok(Some(Exception {
                    kind: ExceptionKind::Violation,
                    n,
                    ell: None,
                    defect: Some(crate::rational::display_rational(&defect)),
                }));
            }
        }
        Ok(Some(Exception {
            kind: ExceptionKind::Indeterminate,
            n,
            ell: None,
            defect: None,
        }))
    }
}
