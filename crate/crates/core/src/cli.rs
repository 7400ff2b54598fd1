//! Command-line front end. Exit codes: 0 all checks pass, 1 numeric
//! failure, 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::oracle::Verdict;
use crate::suite::{
    self, BaseKind, CheckDocument, OutputFormat, RunConfig, SectionalDocument, SweepRow, WeightKind, SWEEP_HEADER,
};

#[derive(Parser, Debug)]
#[command(name = "tanbundle", version, about = "Cheeger–Gromoll-type geometry of tangent bundles, checked against finite differences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare every closed form with the numeric oracle.
    Check(CommonArgs),
    /// Sectional curvatures in the adapted frame at one point.
    Sectional(CommonArgs),
    /// Weight scalars, sectional entries and scalar curvature over a t grid.
    Sweep(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "euclidean")]
    pub base: BaseKind,
    /// Curvature of the space-form base.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "cheeger_gromoll")]
    pub weight: WeightKind,
    /// c parameter of the integrable weight.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_c: f64,
    /// k parameter of the integrable weight, or the value of the constant weight.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub weight_k: f64,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, env = "TANBUNDLE_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Tolerance for every derivative-based comparison.
    #[arg(long)]
    pub tol: Option<f64>,
    /// First-derivative step; second derivatives use ten times this.
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub output: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sample evaluation (results do not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Base point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    /// Fiber vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long)]
    pub base_file: Option<PathBuf>,
    #[arg(long)]
    pub weight_file: Option<PathBuf>,
}

impl From<CommonArgs> for RunConfig {
    fn from(a: CommonArgs) -> Self {
        RunConfig {
            base: a.base,
            c: a.c,
            dim: a.dim,
            weight: a.weight,
            weight_c: a.weight_c,
            weight_k: a.weight_k,
            points: a.points,
            seed: a.seed,
            tol: a.tol,
            fd_step: a.fd_step,
            t_max: a.t_max,
            steps: a.steps,
            base_file: a.base_file,
            weight_file: a.weight_file,
            x: a.x,
            y: a.y,
            output: a.output,
            out: a.out,
            workers: a.workers,
        }
    }
}

/// `%.17g`-style formatting.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Usage(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_doc(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let err = |e: csv::Error| Error::Usage(format!("csv output failed: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_check(doc: &CheckDocument, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => json(doc),
        OutputFormat::Csv => csv_doc(
            &["subject", "samples", "max_abs_err", "max_rel_err", "tolerance", "verdict", "gating", "notes"],
            doc.comparisons.iter().map(|c| {
                vec![
                    c.subject.clone(),
                    c.samples.to_string(),
                    fmt_g17(c.max_abs_err),
                    fmt_g17(c.max_rel_err),
                    fmt_g17(c.tolerance),
                    verdict_str(c.verdict).into(),
                    c.gating.to_string(),
                    c.notes.clone(),
                ]
            }),
        ),
        OutputFormat::Text => {
            let mut s = String::new();
            let cfg = &doc.config;
            let _ = writeln!(
                s,
                "base {:?} (c = {}), m = {}, weight {:?}, {} points, seed {}",
                cfg.base, cfg.c, cfg.dim, cfg.weight, cfg.points, cfg.seed
            );
            let _ = writeln!(s, "omega coefficient: {}", doc.conventions.omega_coefficient);
            let _ = writeln!(s, "nijenhuis constant: {:.12}", doc.conventions.nijenhuis_constant);
            let _ = writeln!(s, "curvature convention: {}", doc.conventions.curvature_sign);
            for c in &doc.comparisons {
                let tag = match (c.passed(), c.gating) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "info",
                };
                let _ = writeln!(
                    s,
                    "{tag:4} {:<48} n={:<3} abs={:.3e} rel={:.3e} tol={:.1e}{}",
                    c.subject,
                    c.samples,
                    c.max_abs_err,
                    c.max_rel_err,
                    c.tolerance,
                    if c.notes.is_empty() { String::new() } else { format!("  ({})", c.notes) }
                );
            }
            let _ = writeln!(s, "verdict: {}", verdict_str(doc.verdict));
            Ok(s)
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
    }
}

pub fn render_sectional(doc: &SectionalDocument, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => json(doc),
        OutputFormat::Csv => csv_doc(
            &["pair_class", "A", "B", "closed_form", "oracle", "abs_err"],
            doc.rows.iter().map(|r| {
                vec![
                    r.pair_class.label().into(),
                    r.a.to_string(),
                    r.b.to_string(),
                    fmt_g17(r.closed_form),
                    fmt_g17(r.oracle),
                    fmt_g17(r.abs_err),
                ]
            }),
        ),
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "x = {:?}, y = {:?}, t = {}", doc.x, doc.y, doc.t);
            let _ = writeln!(s, "{:<6} {:>3} {:>3} {:>22} {:>22} {:>10}", "class", "A", "B", "closed_form", "oracle", "abs_err");
            for r in &doc.rows {
                let _ = writeln!(
                    s,
                    "{:<6} {:>3} {:>3} {:>22.15e} {:>22.15e} {:>10.2e}",
                    r.pair_class.label(),
                    r.a,
                    r.b,
                    r.closed_form,
                    r.oracle,
                    r.abs_err
                );
            }
            let _ = writeln!(s, "verdict: {}", verdict_str(doc.comparison.verdict));
            Ok(s)
        }
    }
}

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => json(&rows),
        // the sweep is a table; text output is the same CSV
        OutputFormat::Csv | OutputFormat::Text => csv_doc(
            &SWEEP_HEADER,
            rows.iter().map(|r| {
                vec![
                    fmt_g17(r.t),
                    fmt_g17(r.r),
                    fmt_g17(r.a),
                    fmt_g17(r.a_prime),
                    fmt_g17(r.l),
                    fmt_g17(r.f1),
                    fmt_g17(r.f2),
                    fmt_g17(r.f3),
                    fmt_g17(r.k_v1vk),
                    r.k_vkvl.map(fmt_g17).unwrap_or_default(),
                    fmt_g17(r.scal_tilde),
                    fmt_g17(r.ode_lhs),
                ]
            }),
        ),
    }
}

/// Map an error to its exit code: failures of the configured model are
/// numeric (1); everything traceable to the invocation is usage (2).
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Model(_) | Error::WeightValidity(_) => 1,
        _ => 2,
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| Error::Usage(format!("stdout: {e}")))
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Check(args) => {
            let cfg: RunConfig = args.into();
            let doc = suite::run_check(&cfg)?;
            emit(&render_check(&doc, cfg.output)?, &cfg.out)?;
            let failing = doc.failing();
            if failing.is_empty() {
                Ok(0)
            } else {
                eprintln!("failing: {}", failing.join(", "));
                Ok(1)
            }
        }
        Command::Sectional(args) => {
            let cfg: RunConfig = args.into();
            let doc = suite::run_sectional(&cfg)?;
            emit(&render_sectional(&doc, cfg.output)?, &cfg.out)?;
            Ok(if doc.comparison.passed() { 0 } else { 1 })
        }
        Command::Sweep(args) => {
            let cfg: RunConfig = args.into();
            let rows = suite::run_sweep(&cfg)?;
            emit(&render_sweep(&rows, cfg.output)?, &cfg.out)?;
            Ok(0)
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
