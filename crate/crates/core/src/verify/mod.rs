//! End-to-end certificates for the inequality
//! `p_α(n−1)p_α(ℓ+1) ≥ p_α(n)p_α(ℓ)` (`n > ℓ ≥ 1`): a finite check below the
//! analytic threshold, and the convolution closure for larger integer `α`.

mod closure;
mod envelope;
mod plan;
mod store;

use std::collections::BTreeMap;

use rug::Rational;

pub use closure::{closure, ClosureSet, MAX_CLOSURE_CELLS};
pub use envelope::{envelope_audit, envelope_audit_with, EnvelopeRow};
pub use plan::{
    base_decomposition, default_schedule, plan_cft, plan_hn, FiniteMethod, Target, VerificationPlan, VerifyConfig,
    EXCEPTIONAL_PAIR,
};
pub use store::{CertificateStore, IndexEntry};

use crate::bounds::{
    certify_logconcave, make_schedule, Certificate, CertifyOptions, Exception, ExceptionKind, Method, Outcome,
    Statement,
};
use crate::exact::{
    cft_pair_scan, defect_in, exact_sequence_with, hn_critical_polynomial, isolate_largest_real_root,
    logconcavity_scan_with, PartitionSequence, RootInterval,
};
use crate::rational::{display_rational, format_rational};
use crate::{Error, Result};

/// Produces certificates, caching (and optionally storing) the base
/// certificates that closure certificates cite.
pub struct Verifier {
    config: VerifyConfig,
    store: Option<CertificateStore>,
    bases: BTreeMap<u64, Certificate>,
}

impl Verifier {
    pub fn new(config: VerifyConfig) -> Self {
        Verifier {
            config,
            store: None,
            bases: BTreeMap::new(),
        }
    }

    pub fn with_store(mut self, store: CertificateStore) -> Self {
        self.store = Some(store);
        self
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.config
    }

    fn record(&self, cert: &Certificate) -> Result<()> {
        if let Some(s) = &self.store {
            s.put(cert)?;
        }
        Ok(())
    }

    /// Certificate for integer `k ≥ 2`.
    pub fn verify_cft(&mut self, k: u64) -> Result<Certificate> {
        let plan = plan_cft(k, &self.config)?;
        let cert = match &plan.finite_method {
            FiniteMethod::Closure { base } => self.closure_certificate(k, base, &plan)?,
            _ if k == 2 => self.pair_certificate(&Rational::from(2), &plan)?,
            _ => self.base_certificate(k)?,
        };
        self.record(&cert)?;
        Ok(cert)
    }

    /// The cached log-concavity certificate for `k ∈ {3, 4, 5}`.
    pub fn base_certificate(&mut self, k: u64) -> Result<Certificate> {
        if let Some(c) = self.bases.get(&k) {
            return Ok(c.clone());
        }
        let plan = plan_cft(k, &self.config)?;
        let alpha = Rational::from(k);
        let [from, to] = plan.range;
        let mut cert = match &plan.finite_method {
            FiniteMethod::Exact => {
                let seq = exact_sequence_with(&alpha, to + 1, self.config.execution)?;
                let mut cert = Certificate::new(Statement::LogConcave, format_rational(&alpha), plan.range, Method::Exact);
                for n in logconcavity_scan_with(&seq, from, to, self.config.execution)? {
                    let defect = Rational::from(seq.get(n) * seq.get(n)) - Rational::from(seq.get(n - 1) * seq.get(n + 1));
                    cert.exceptions.push(Exception {
                        kind: ExceptionKind::Violation,
                        n,
                        ell: None,
                        defect: Some(display_rational(&defect)),
                    });
                }
                if let Some(e) = cert.exceptions.iter().max_by_key(|e| e.n) {
                    cert.outcome = Outcome::Counterexample { n: e.n, ell: None };
                }
                cert
            }
            FiniteMethod::Bounded {
                schedule,
                precision_bits,
            } => {
                let opts = CertifyOptions {
                    precision_bits: *precision_bits,
                    exact_cap: self.config.exact_cap,
                    execution: self.config.execution,
                    ..CertifyOptions::default()
                };
                certify_logconcave(&alpha, make_schedule(schedule)?, from, to, &opts)?
                    .complete()
                    .expect("runs without stop_at complete")
                    .certificate
            }
            FiniteMethod::Closure { .. } => unreachable!("bases are certified directly"),
        };
        cert.covers_threshold = plan.threshold <= to + 1;
        if cert.covers_threshold {
            cert.method = Method::Composite;
            cert.notes.push(format!(
                "finite range reaches the analytic threshold {}",
                display_rational(&plan.threshold)
            ));
        }
        self.record(&cert)?;
        self.bases.insert(k, cert.clone());
        Ok(cert)
    }

    fn closure_certificate(&mut self, k: u64, base: &[u64], plan: &VerificationPlan) -> Result<Certificate> {
        let parts = base_decomposition(k)?;
        let mut premises = Vec::new();
        for &b in base {
            premises.push(self.base_certificate(b)?);
        }
        let to = premises.iter().map(|c| c.range[1]).min().expect("nonempty base");
        let mut cert = Certificate::new(Statement::LogConcave, format_rational(&Rational::from(k)), [1, to], Method::Closure);
        cert.premises = premises.iter().map(Certificate::digest).collect();
        cert.covers_threshold = premises.iter().all(|c| c.covers_threshold);
        cert.outcome = match premises.iter().find(|c| !c.outcome.is_verified()) {
            None => Outcome::Verified,
            Some(c) => Outcome::Indeterminate {
                n: match c.outcome {
                    Outcome::Counterexample { n, .. } | Outcome::Indeterminate { n } => n,
                    Outcome::Verified => unreachable!(),
                },
            },
        };
        let sum: Vec<String> = parts
            .iter()
            .map(|(b, m)| if *m == 1 { b.to_string() } else { format!("{m}*{b}") })
            .collect();
        cert.notes.push(format!(
            "p_{k} is the convolution of p_b over {k} = {}; convolutions of log-concave sequences are log-concave",
            sum.join(" + ")
        ));
        cert.notes.push("log-concavity implies the pair inequality for all n > ell".into());
        if !cert.covers_threshold {
            cert.notes.push(format!(
                "range-limited: the premises stop below the analytic threshold {}",
                display_rational(&plan.threshold)
            ));
        }
        Ok(cert)
    }

    /// Exact pair scan over `n ≤ plan.range[1]`.
    fn pair_certificate(&self, alpha: &Rational, plan: &VerificationPlan) -> Result<Certificate> {
        let n_max = plan.range[1];
        let seq = exact_sequence_with(alpha, n_max + 1, self.config.execution)?;
        let mut cert = pair_scan_certificate(&seq, n_max)?;
        cert.covers_threshold = plan.covers_threshold();
        if cert.covers_threshold {
            cert.method = Method::Composite;
            cert.notes.push(format!(
                "n <= {n_max} checked exactly; n >= {} covered analytically",
                display_rational(&plan.threshold)
            ));
        } else {
            cert.notes.push(format!(
                "range-limited: the analytic threshold {} is not reached",
                display_rational(&plan.threshold)
            ));
        }
        Ok(cert)
    }

    /// Certificate for rational `α ≥ 2` over `n ≤ min(n_cap, threshold)`.
    pub fn verify_hn_at(&self, alpha: &Rational, n_cap: u64) -> Result<Certificate> {
        let plan = plan_hn(alpha, n_cap)?;
        let mut cert = self.pair_certificate(alpha, &plan)?;
        let root = alpha0_interval()?;
        let note = if root.hi < *alpha {
            "above"
        } else if *alpha < root.lo {
            "below"
        } else {
            "inside the isolating interval of"
        };
        cert.notes.push(format!("alpha is {note} alpha0 in {root}"));
        self.record(&cert)?;
        Ok(cert)
    }
}

/// Pair-scan certificate: pairs with `ℓ = 0` are outside the quantifier
/// `ℓ ≥ 1`, `(6, 4)` is the exempt pair, anything else is a violation.
fn pair_scan_certificate(seq: &PartitionSequence, n_max: u64) -> Result<Certificate> {
    let mut cert = Certificate::new(Statement::CftPairs, format_rational(seq.alpha()), [1, n_max], Method::Exact);
    for (n, ell) in cft_pair_scan(seq, n_max)? {
        let kind = if ell == 0 {
            ExceptionKind::OutsideQuantifier
        } else if (n, ell) == EXCEPTIONAL_PAIR {
            ExceptionKind::Exempt
        } else {
            ExceptionKind::Violation
        };
        let defect = defect_in(seq, n, ell)?.defect;
        cert.exceptions.push(Exception {
            kind,
            n,
            ell: Some(ell),
            defect: Some(display_rational(&defect)),
        });
    }
    if let Some(e) = cert.exceptions.iter().find(|e| e.kind == ExceptionKind::Violation) {
        cert.outcome = Outcome::Counterexample { n: e.n, ell: e.ell };
    }
    Ok(cert)
}

/// Isolating interval (width ≤ 10⁻¹²) of the largest real root of the
/// `(n, ℓ) = (6, 4)` defect polynomial.
pub fn alpha0_interval() -> Result<RootInterval> {
    let p = hn_critical_polynomial(6, 4)?;
    isolate_largest_real_root(&p, &Rational::from((1, 1_000_000_000_000u64)))
}

/// [`Verifier::verify_cft`] with the default configuration.
pub fn verify_cft(k: u64) -> Result<Certificate> {
    Verifier::new(VerifyConfig::default()).verify_cft(k)
}

/// [`Verifier::verify_hn_at`] with the default configuration.
pub fn verify_hn_at(alpha: &Rational, n_cap: u64) -> Result<Certificate> {
    if *alpha < 2 {
        return Err(Error::invalid("the inequality for real alpha is stated for alpha >= 2"));
    }
    Verifier::new(VerifyConfig::default()).verify_hn_at(alpha, n_cap)
}
