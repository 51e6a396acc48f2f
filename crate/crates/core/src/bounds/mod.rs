//! Truncated lower/upper recursions `p⁻ ≤ p ≤ p⁺` under a truncation
//! schedule, evaluated with directed rounding in a bounded window, and the
//! log-concavity certification built on them.

pub mod audit;
pub mod certificate;
pub mod certify;
pub mod checkpoint;
pub mod engine;
pub mod schedule;

use std::path::PathBuf;

use rug::Rational;

pub use audit::{sandwich_audit, sandwich_audit_with, SandwichReport};
pub use certificate::{Certificate, Exception, ExceptionKind, Method, Outcome, Statement, CERTIFICATE_VERSION};
pub use certify::{certify_logconcave, CertifyOptions, CertifyReport, CertifyRun};
pub use checkpoint::{checkpoint_digest, checkpoint_load, checkpoint_save, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use engine::{BoundPair, BoundRunState, MAX_INDEX};
pub use schedule::{make_schedule, Rule, Segment, TruncationSchedule};

use crate::par::Execution;
use crate::Result;

/// Default working precision of the bound carriers.
pub const DEFAULT_PRECISION: u32 = 256;
/// Default number of steps between checkpoints.
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Checkpoint file rewritten every `checkpoint_every` steps.
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: u64,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            checkpoint: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub last_n: u64,
    pub integrity: String,
    pub peak_window: usize,
    pub window_capacity: usize,
    pub checkpoint_digests: Vec<String>,
}

/// Runs the bound recursions from `n = 0` to `n_max`, handing every pair
/// (including `n = 0`) to `sink`.
pub fn run_bounds<F>(
    alpha: &Rational,
    schedule: TruncationSchedule,
    n_max: u64,
    precision_bits: u32,
    options: &RunOptions,
    mut sink: F,
) -> Result<RunSummary>
where
    F: FnMut(&BoundPair) -> Result<()>,
{
    let state = BoundRunState::new(alpha, schedule, precision_bits, n_max)?.with_execution(options.execution);
    sink(&state.pair(0).expect("initial pair"))?;
    continue_bounds(state, n_max, options, sink)
}

/// Advances an existing (for instance freshly loaded) run to `n_max`.
pub fn continue_bounds<F>(mut state: BoundRunState, n_max: u64, options: &RunOptions, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&BoundPair) -> Result<()>,
{
    state.set_execution(options.execution);
    let mut digests = Vec::new();
    let every = options.checkpoint_every.max(1);
    while state.current_n() < n_max {
        let pair = state.step()?;
        sink(&pair)?;
        if let Some(path) = &options.checkpoint {
            if pair.n % every == 0 {
                digests.push(checkpoint_save(&state, path)?);
            }
        }
    }
    Ok(RunSummary {
        last_n: state.current_n(),
        integrity: state.integrity_hex(),
        peak_window: state.peak_window(),
        window_capacity: state.window_capacity(),
        checkpoint_digests: digests,
    })
}
