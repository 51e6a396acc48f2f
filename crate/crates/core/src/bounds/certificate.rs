//! Machine-checkable records of verified inequality statements.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statement {
    /// `p(n)² ≥ p(n−1)p(n+1)` for every `n` in range.
    LogConcave,
    /// `p(n−1)p(ℓ+1) ≥ p(n)p(ℓ)` for every pair `n > ℓ` with `n` in range.
    CftPairs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Bounded,
    /// Derived from premise certificates without new computation.
    Closure,
    /// Combination of a finite check with the analytic threshold.
    Composite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Verified,
    Counterexample {
        n: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ell: Option<u64>,
    },
    Indeterminate {
        n: u64,
    },
}

impl Outcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, Outcome::Verified)
    }

    /// Process exit code: 0 verified, 2 counterexample, 3 indeterminate.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verified => 0,
            Outcome::Counterexample { .. } => 2,
            Outcome::Indeterminate { .. } => 3,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Verified => write!(f, "verified"),
            Outcome::Counterexample { n, ell: None } => write!(f, "counterexample(n={n})"),
            Outcome::Counterexample { n, ell: Some(l) } => write!(f, "counterexample(n={n}, ell={l})"),
            Outcome::Indeterminate { n } => write!(f, "indeterminate(n={n})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExceptionKind {
    /// Confirmed failure of the inequality inside the claimed quantifier range.
    Violation,
    /// Confirmed failure at a pair the statement explicitly exempts.
    Exempt,
    /// Confirmed failure at a pair outside the statement's quantifiers.
    OutsideQuantifier,
    /// Directed check failed and could not be resolved.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exception {
    pub kind: ExceptionKind,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<u64>,
    /// Exact defect as a decimal string, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub statement: Statement,
    /// `α` as `"num/den"`.
    pub alpha: String,
    pub range: [u64; 2],
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    pub outcome: Outcome,
    pub exceptions: Vec<Exception>,
    pub checkpoint_digests: Vec<String>,
    /// Final integrity hash of the bound stream (bounded method).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrity: Option<String>,
    /// Digests of certificates this one depends on.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<String>,
    /// Whether the range reaches the analytic threshold, making the claim unbounded.
    #[serde(default)]
    pub covers_threshold: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(statement: Statement, alpha: String, range: [u64; 2], method: Method) -> Self {
        Certificate {
            version: CERTIFICATE_VERSION,
            statement,
            alpha,
            range,
            method,
            schedule: None,
            precision_bits: None,
            outcome: Outcome::Verified,
            exceptions: Vec::new(),
            checkpoint_digests: Vec::new(),
            integrity: None,
            premises: Vec::new(),
            covers_threshold: false,
            notes: Vec::new(),
        }
    }

    /// Canonical single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let c: Certificate = serde_json::from_str(line.trim())?;
        if c.version != CERTIFICATE_VERSION {
            return Err(Error::Certificate(format!("unsupported version {}", c.version)));
        }
        if c.outcome.is_verified() && c.exceptions.iter().any(|e| e.kind == ExceptionKind::Violation) {
            return Err(Error::Certificate("verified outcome with a recorded violation".into()));
        }
        Ok(c)
    }

    /// SHA-256 of the canonical JSON line.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_line().as_bytes()))
    }
}
