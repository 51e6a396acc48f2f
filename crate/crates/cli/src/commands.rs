use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rug::Rational;

use etacert::analytic::{determined_integer, main_term, p_alpha_analytic, AnalyticMode};
use etacert::bounds::{
    certify_logconcave, make_schedule, run_bounds, sandwich_audit_with, Certificate, CertifyOptions, CertifyRun,
    RunOptions, DEFAULT_CHECKPOINT_EVERY, DEFAULT_PRECISION,
};
use etacert::exact::{
    defect_in, exact_sequence_with, hn_critical_polynomial, isolate_largest_real_root, partition_polynomials,
};
use etacert::par::Execution;
use etacert::rational::{display_rational, parse_rational};
use etacert::verify::{closure, envelope_audit_with, CertificateStore, Verifier, VerifyConfig};

use crate::output::{ball_cells, render, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "etacert", version, about = "Certified computations for p_alpha(n), the coefficients of eta^(-alpha)")]
pub struct Cli {
    #[arg(long, value_enum, default_value = "human", global = true)]
    pub format: Format,
    /// Worker threads (1 forces sequential execution).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact values p_alpha(n) for n <= n-max.
    Exact {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 0)]
        n_from: u64,
    },
    /// p_alpha(n) as polynomials in alpha for n <= n-max.
    Poly {
        #[arg(long)]
        n_max: u64,
    },
    /// Certify log-concavity on [n-from, n-to] with the bound recursions.
    Certify(CertifyArgs),
    /// Check lower <= exact <= upper for every n <= n-audit.
    SandwichAudit {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "full")]
        schedule: String,
        #[arg(long)]
        n_audit: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Bound stream (one line per n) from the truncated recursions.
    Bounds {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "full")]
        schedule: String,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Ball enclosure of p_alpha(n) from the exact formula.
    Analytic {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u64,
        /// Fixed cutoff in k (default: grow until the radius is below the target).
        #[arg(long)]
        k_max: Option<u64>,
        /// Radius target for the adaptive cutoff (num/den).
        #[arg(long)]
        target: Option<String>,
        /// Partial sum up to k-max without a certified tail.
        #[arg(long)]
        heuristic: bool,
    },
    /// Main term M and the ratio Delta/M for the pair (n, ell).
    MainTerm {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// p(n-1)p(ell+1) - p(n)p(ell) as a polynomial in alpha, factored.
    HnPoly {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        ell: u64,
        /// Width of the root isolating interval (num/den).
        #[arg(long, default_value = "1/1000000000000")]
        width: String,
    },
    /// Additive closure of a base set up to a horizon.
    Closure {
        /// Comma-separated exact rationals.
        #[arg(long)]
        base: String,
        #[arg(long)]
        horizon: String,
    },
    /// Certificate for p_k(n-1)p_k(ell+1) >= p_k(n)p_k(ell).
    VerifyCft {
        #[arg(long)]
        k: u64,
        /// Pair-scan range for k = 2.
        #[arg(long, default_value_t = 4097)]
        n_max: u64,
        /// Log-concavity range for the base exponents 3, 4, 5.
        #[arg(long, default_value_t = 1000)]
        base_n_max: u64,
        #[command(flatten)]
        sink: CertificateSink,
    },
    /// Certificate for a rational alpha >= 2.
    VerifyHn {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n_cap: u64,
        #[command(flatten)]
        sink: CertificateSink,
    },
    /// Delta/M against the envelope [1/15, 29/15].
    EnvelopeAudit {
        #[arg(long)]
        alpha: String,
        /// Comma-separated values of ell.
        #[arg(long)]
        ell: String,
        /// Offsets n - ell, as a list "2,3,5" or a range "2-60".
        #[arg(long)]
        offsets: String,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value = "full")]
    pub schedule: String,
    #[arg(long, default_value_t = 1)]
    pub n_from: u64,
    #[arg(long)]
    pub n_to: u64,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CHECKPOINT_EVERY)]
    pub checkpoint_every: u64,
    /// Write every bound pair to this file.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    /// Save a checkpoint and stop after computing this index.
    #[arg(long)]
    pub stop_at: Option<u64>,
    /// Continue from the checkpoint.
    #[arg(long)]
    pub resume: bool,
    #[arg(long, default_value_t = etacert::bounds::certify::DEFAULT_EXACT_CAP)]
    pub exact_cap: u64,
    #[command(flatten)]
    pub sink: CertificateSink,
}

#[derive(Debug, Args)]
pub struct CertificateSink {
    /// Write the certificate (one JSON line) to this file.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Add certificates to this store directory.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

impl CertificateSink {
    fn save(&self, cert: &Certificate) -> Result<()> {
        if let Some(p) = &self.certificate {
            fs::write(p, format!("{}\n", cert.to_json_line())).with_context(|| format!("writing {}", p.display()))?;
        }
        if let Some(d) = &self.store {
            CertificateStore::open(d)?.put(cert)?;
        }
        Ok(())
    }
}

fn alpha_arg(s: &str) -> Result<Rational> {
    let a = parse_rational(s)?;
    if a <= 0 {
        bail!("alpha must be positive, got {s}");
    }
    Ok(a)
}

fn list_arg(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().with_context(|| format!("bad list entry {t:?}"))).collect()
}

fn execution(cli: &Cli) -> Execution {
    match cli.threads {
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    }
}

fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        // a second configuration in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

fn certificate_table(cert: &Certificate) -> Table {
    let mut t = Table::new(&[
        "statement",
        "alpha",
        "n_from",
        "n_to",
        "method",
        "outcome",
        "exceptions",
        "covers_threshold",
        "digest",
    ]);
    let exceptions: Vec<String> = cert
        .exceptions
        .iter()
        .map(|e| {
            let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            match e.ell {
                Some(l) => format!("{kind}({},{l})", e.n),
                None => format!("{kind}({})", e.n),
            }
        })
        .collect();
    let statement = serde_json::to_value(cert.statement)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let method = serde_json::to_value(cert.method)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    t.push(vec![
        statement,
        cert.alpha.clone(),
        cert.range[0].to_string(),
        cert.range[1].to_string(),
        method,
        cert.outcome.to_string(),
        exceptions.join(" "),
        cert.covers_threshold.to_string(),
        cert.digest(),
    ]);
    t
}

/// Runs one command, writing its table to `out`; returns the exit code.
pub fn run(cli: &Cli, invocation: &str, out: &mut dyn Write) -> Result<u8> {
    configure_threads(cli.threads);
    let exec = execution(cli);
    let mut code = 0u8;
    let table = match &cli.command {
        Command::Exact { alpha, n_max, n_from } => {
            let alpha = alpha_arg(alpha)?;
            let seq = exact_sequence_with(&alpha, *n_max, exec)?;
            let mut t = Table::new(&["n", "value"]);
            for n in *n_from..=*n_max {
                t.push(vec![n.to_string(), display_rational(seq.get(n))]);
            }
            t
        }
        Command::Poly { n_max } => {
            let mut t = Table::new(&["n", "degree", "polynomial"]);
            for (n, p) in partition_polynomials(*n_max).iter().enumerate() {
                t.push(vec![n.to_string(), p.degree().unwrap_or(0).to_string(), p.to_string()]);
            }
            t
        }
        Command::Certify(args) => {
            let (t, c) = certify(args, exec)?;
            code = c;
            t
        }
        Command::SandwichAudit {
            alpha,
            schedule,
            n_audit,
            precision,
        } => {
            let alpha = alpha_arg(alpha)?;
            let r = sandwich_audit_with(&alpha, make_schedule(schedule)?, *n_audit, *precision, exec)?;
            let mut t = Table::new(&["alpha", "schedule", "n_audit", "precision", "violations", "worst_gap", "worst_gap_n"]);
            t.push(vec![
                display_rational(&r.alpha),
                r.schedule,
                r.n_audit.to_string(),
                r.precision_bits.to_string(),
                "0".into(),
                format!("{:e}", r.worst_gap),
                r.worst_gap_n.to_string(),
            ]);
            t
        }
        Command::Bounds {
            alpha,
            schedule,
            n_max,
            precision,
        } => {
            let alpha = alpha_arg(alpha)?;
            let mut t = Table::new(&["n", "lower", "upper"]);
            let opts = RunOptions {
                execution: exec,
                ..RunOptions::default()
            };
            run_bounds(&alpha, make_schedule(schedule)?, *n_max, *precision, &opts, |p| {
                t.push(vec![p.n.to_string(), p.lower.to_string(), p.upper.to_string()]);
                Ok(())
            })?;
            t
        }
        Command::Analytic {
            alpha,
            n,
            k_max,
            target,
            heuristic,
        } => {
            let alpha = alpha_arg(alpha)?;
            let mode = if *heuristic {
                AnalyticMode::Heuristic {
                    k_max: k_max.context("--heuristic needs --k-max")?,
                }
            } else {
                AnalyticMode::Rigorous {
                    k_max: *k_max,
                    target: target.as_deref().map(parse_rational).transpose()?,
                }
            };
            let v = p_alpha_analytic(&alpha, *n, &mode)?;
            let (c, r) = ball_cells(&v.value);
            let det = if v.certified {
                determined_integer(&v.value).map(|i| i.to_string()).unwrap_or_default()
            } else {
                String::new()
            };
            let mut t = Table::new(&["alpha", "n", "center", "radius", "certified", "k_max", "determined"]);
            t.push(vec![
                display_rational(&alpha),
                n.to_string(),
                c,
                r,
                v.certified.to_string(),
                v.k_used.to_string(),
                det,
            ]);
            t
        }
        Command::MainTerm {
            alpha,
            n,
            ell,
            precision,
        } => {
            let alpha = alpha_arg(alpha)?;
            let m = main_term(&alpha, *n, *ell, *precision)?;
            let seq = exact_sequence_with(&alpha, (*n).max(ell + 1), exec)?;
            let delta = defect_in(&seq, *n, *ell)?.defect;
            let (mc, mr) = ball_cells(&m.value);
            let (ratio_c, ratio_r, inside) = if *n > ell + 1 {
                let ratio = m.ratio(&delta);
                let (c, r) = ball_cells(&ratio);
                (c, r, m.ratio_in_envelope(&ratio))
            } else {
                (String::new(), String::new(), false)
            };
            let mut t = Table::new(&[
                "alpha",
                "n",
                "ell",
                "N",
                "L",
                "M_center",
                "M_radius",
                "delta",
                "ratio_center",
                "ratio_radius",
                "hypotheses",
                "in_envelope",
            ]);
            t.push(vec![
                display_rational(&alpha),
                n.to_string(),
                ell.to_string(),
                display_rational(&m.input.big_n),
                display_rational(&m.input.big_l),
                mc,
                mr,
                display_rational(&delta),
                ratio_c,
                ratio_r,
                m.input.hypotheses.to_string(),
                inside.to_string(),
            ]);
            t
        }
        Command::HnPoly { n, ell, width } => {
            let p = hn_critical_polynomial(*n, *ell)?;
            let (roots, core) = p.strip_rational_roots();
            let mut t = Table::new(&["item", "value"]);
            t.push(vec!["polynomial".into(), p.to_string()]);
            for (r, m) in &roots {
                t.push(vec!["rational_root".into(), format!("{} (multiplicity {m})", display_rational(r))]);
            }
            let factor = core.primitive_part();
            t.push(vec!["factor".into(), factor.to_string()]);
            match isolate_largest_real_root(&p, &parse_rational(width)?) {
                Ok(iv) => {
                    t.push(vec!["largest_root_lo".into(), display_rational(&iv.lo)]);
                    t.push(vec!["largest_root_hi".into(), display_rational(&iv.hi)]);
                    t.push(vec!["largest_root_approx".into(), format!("{:.12}", iv.midpoint_f64())]);
                }
                Err(etacert::Error::NoRealRoot) => t.push(vec!["largest_root".into(), "none".into()]),
                Err(e) => return Err(e.into()),
            }
            t
        }
        Command::Closure { base, horizon } => {
            let base = base.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
            let set = closure(&base, &parse_rational(horizon)?)?;
            let mut t = Table::new(&["value"]);
            for v in set.covered() {
                t.push(vec![display_rational(&v)]);
            }
            t
        }
        Command::VerifyCft {
            k,
            n_max,
            base_n_max,
            sink,
        } => {
            let config = VerifyConfig {
                cft2_n_max: *n_max,
                base_n_max: *base_n_max,
                execution: exec,
                ..VerifyConfig::default()
            };
            let mut v = Verifier::new(config);
            if let Some(d) = &sink.store {
                v = v.with_store(CertificateStore::open(d)?);
            }
            let cert = v.verify_cft(*k)?;
            sink.save(&cert)?;
            code = cert.outcome.exit_code() as u8;
            certificate_table(&cert)
        }
        Command::VerifyHn { alpha, n_cap, sink } => {
            let alpha = alpha_arg(alpha)?;
            if alpha < 2 {
                bail!("alpha must be at least 2");
            }
            let v = Verifier::new(VerifyConfig {
                execution: exec,
                ..VerifyConfig::default()
            });
            let cert = v.verify_hn_at(&alpha, *n_cap)?;
            sink.save(&cert)?;
            code = cert.outcome.exit_code() as u8;
            certificate_table(&cert)
        }
        Command::EnvelopeAudit {
            alpha,
            ell,
            offsets,
            precision,
        } => {
            let alpha = alpha_arg(alpha)?;
            let rows = envelope_audit_with(&alpha, &list_arg(ell)?, &list_arg(offsets)?, *precision, exec)?;
            let mut t = Table::new(&[
                "n",
                "ell",
                "delta",
                "M_center",
                "M_radius",
                "ratio_center",
                "ratio_radius",
                "hypotheses",
                "in_envelope",
            ]);
            for r in &rows {
                let (mc, mr) = r.main_term.as_ref().map(ball_cells).unwrap_or_default();
                let (rc, rr) = r.ratio.as_ref().map(ball_cells).unwrap_or_default();
                if r.hypotheses && !r.in_envelope {
                    code = 2;
                }
                t.push(vec![
                    r.n.to_string(),
                    r.ell.to_string(),
                    display_rational(&r.delta),
                    mc,
                    mr,
                    rc,
                    rr,
                    r.hypotheses.to_string(),
                    r.in_envelope.to_string(),
                ]);
            }
            t
        }
    };
    render(out, cli.format, invocation, &table)?;
    Ok(code)
}

fn certify(args: &CertifyArgs, exec: Execution) -> Result<(Table, u8)> {
    let alpha = alpha_arg(&args.alpha)?;
    let opts = CertifyOptions {
        precision_bits: args.precision,
        checkpoint: args.checkpoint.clone(),
        checkpoint_every: args.checkpoint_every,
        stream: args.stream.clone(),
        stop_at: args.stop_at,
        resume: args.resume,
        exact_cap: args.exact_cap,
        execution: exec,
        ..CertifyOptions::default()
    };
    match certify_logconcave(&alpha, make_schedule(&args.schedule)?, args.n_from, args.n_to, &opts)? {
        CertifyRun::Stopped { at } => {
            let mut t = Table::new(&["status", "n", "checkpoint"]);
            let path = args.checkpoint.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            t.push(vec!["stopped".into(), at.to_string(), path]);
            Ok((t, 4))
        }
        CertifyRun::Complete(report) => {
            args.sink.save(&report.certificate)?;
            let code = report.certificate.outcome.exit_code() as u8;
            Ok((certificate_table(&report.certificate), code))
        }
    }
}
