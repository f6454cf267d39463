//! Command-line driver: verification suites, scans, scaling ladders and
//! single evaluations. Exit codes: 0 pass, 1 verification failure, 2 usage or
//! domain error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::checks::{
    verify_cotan, verify_crossing, verify_crossing_unitarity, verify_hm_conjugation, verify_quasi_periodicity,
    verify_scaling_limit, verify_unitarity, verify_ybe, IdentityId, SamplePlan, VerificationReport,
};
use crate::elliptic::ZnIndex;
use crate::error::{Error, Result};
use crate::exchange::{
    f_c, f_h, f_s, f_structure, poisson_center_coeff, t_factor, y_structure, StructureFunctionQuery,
};
use crate::policy::TruncationPolicy;
use crate::scaled::{scaled_r_element, CriticalLine, ScaledContext};
use crate::special::{s0, C64};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dyrmat", version, about = "Scaled elliptic R-matrix identities and structure functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run identity verifiers and write JSON reports.
    Verify(VerifyArgs),
    /// Tabulate a structure function over a grid as CSV.
    Scan(ScanArgs),
    /// Compare the elliptic matrix with the scaled one along an eps ladder.
    LimitCheck(LimitArgs),
    /// Evaluate one function at one point.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Central charge.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<i64>,
    #[arg(long)]
    pub h: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdentitySelection {
    All,
    Ybe,
    Unitarity,
    Crossing,
    Quasiperiod,
    CrossingUnitarity,
    #[value(name = "hM")]
    HM,
    Cotan,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub identity: IdentitySelection,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Negative control: added to one matrix entry.
    #[arg(long)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    #[value(name = "F")]
    F,
    #[value(name = "Y")]
    Y,
    #[value(name = "f_h")]
    FH,
    #[value(name = "poisson_center")]
    PoissonCenter,
    #[value(name = "R_entry")]
    REntry,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub target: ScanTarget,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Real part grid `start:stop:count`.
    #[arg(long, default_value = "0.1:3:30", allow_hyphen_values = true)]
    pub beta_re: String,
    /// Imaginary part grid `start:stop:count`.
    #[arg(long, default_value = "0:0:1", allow_hyphen_values = true)]
    pub beta_im: String,
    /// Optional grid over r, `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub r_grid: Option<String>,
    /// Matrix indices `a,b,c` for R_entry.
    #[arg(long, default_value = "0,0,0")]
    pub indices: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LimitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.8)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta_im: f64,
    /// Comma-separated eps values.
    #[arg(long, default_value = "0.2,0.1,0.05")]
    pub ladder: String,
    #[arg(long)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalFunction {
    #[value(name = "F")]
    F,
    #[value(name = "Y")]
    Y,
    #[value(name = "T")]
    T,
    #[value(name = "S0")]
    S0,
    #[value(name = "f_s")]
    FS,
    #[value(name = "f_c")]
    FC,
    #[value(name = "f_h")]
    FH,
    #[value(name = "poisson_center")]
    PoissonCenter,
    #[value(name = "R_entry")]
    REntry,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub function: EvalFunction,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta_im: f64,
    #[arg(long, default_value = "0,0,0")]
    pub indices: String,
}

/// JSON configuration; every field can be overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub c: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<i64>,
    pub h: Option<i64>,
    pub plan: SamplePlan,
    pub policy: TruncationPolicy,
    /// Per-identity tolerance overrides keyed by identity name.
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn merged(common: &CommonArgs) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.n = common.n.or(cfg.n);
        cfg.r = common.r.or(cfg.r);
        cfg.c = common.c.or(cfg.c);
        cfg.m = common.m.or(cfg.m);
        cfg.h = common.h.or(cfg.h);
        cfg.out = common.out.clone().or(cfg.out);
        if let Some(f) = &cfg.format {
            if f != "json" {
                return Err(Error::Config(format!("unsupported output format {f}")));
            }
        }
        cfg.policy.validate()?;
        Ok(cfg)
    }

    /// Fills `r` from `h` and checks line consistency. With `strict_h`, a
    /// given `r` must satisfy `2 r = N h`; otherwise `h` only labels `f_h`.
    pub fn validate(&mut self, strict_h: bool) -> Result<()> {
        let n = self.n_or(2);
        if n < 2 {
            return Err(Error::Domain(format!("N must be >= 2, got {n}")));
        }
        if let Some(h) = self.h {
            if h == 0 {
                return Err(Error::Domain("h must be nonzero".into()));
            }
            let from_h = n as f64 * h as f64 / 2.0;
            match self.r {
                None => self.r = Some(from_h),
                Some(r) if strict_h && (r - from_h).abs() > 1e-12 => {
                    return Err(Error::Config(format!("2r = N h violated: r = {r}, N h / 2 = {from_h}")));
                }
                _ => {}
            }
        }
        if let (Some(m), Some(c), Some(r)) = (self.m, self.c, self.r) {
            let off = c + n as f64 + m as f64 * r;
            if off.abs() > 1e-12 {
                return Err(Error::Config(format!("c = -N - M r violated by {off:e}")));
            }
        }
        Ok(())
    }

    fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    fn require_r(&self) -> Result<f64> {
        self.r.ok_or_else(|| Error::Config("missing r: pass --r or set it in the config".into()))
    }

    /// `M` given directly or derived from `c` on its line.
    fn line_m(&self, n: usize, r: f64) -> Result<Option<i64>> {
        if let Some(m) = self.m {
            return Ok(Some(m));
        }
        if let Some(c) = self.c {
            let m = (-c - n as f64) / r;
            if (m - m.round()).abs() > 1e-9 {
                return Err(Error::Config(format!("c = {c} is not on a line c = -N - M r with integer M")));
            }
            return Ok(Some(m.round() as i64));
        }
        Ok(None)
    }
}

fn usage(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::Domain(_) => e,
        other => Error::Domain(other.to_string()),
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Config(e.to_string())),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Config(e.to_string())
}

/// Runs a parsed command. Errors map to exit code 2 in the binary.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Verify(args) => cmd_verify(&args, stdout),
        Command::Scan(args) => cmd_scan(&args, stdout),
        Command::LimitCheck(args) => cmd_limit_check(&args, stdout),
        Command::Eval(args) => cmd_eval(&args, stdout),
    }
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = RunConfig::merged(&args.common)?;
    cfg.validate(true)?;
    let n = cfg.n_or(2);
    let r = cfg.require_r()?;
    let mut plan = cfg.plan;
    if let Some(s) = args.samples {
        plan.count = s;
    }
    if let Some(s) = args.seed {
        plan.seed = s;
    }
    if let Some(p) = args.perturb {
        plan.perturb = p;
    }
    plan.validate()?;
    let policy = cfg.policy;
    let ctx = ScaledContext::new(C64::new(0.0, 0.0), r, n)?;
    let selected: Vec<IdentityId> = match args.identity {
        IdentitySelection::All => vec![
            IdentityId::Ybe,
            IdentityId::Unitarity,
            IdentityId::Crossing,
            IdentityId::CrossingUnitarity,
            IdentityId::Quasiperiod,
            IdentityId::HM,
            IdentityId::Cotan,
        ],
        IdentitySelection::Ybe => vec![IdentityId::Ybe],
        IdentitySelection::Unitarity => vec![IdentityId::Unitarity],
        IdentitySelection::Crossing => vec![IdentityId::Crossing],
        IdentitySelection::Quasiperiod => vec![IdentityId::Quasiperiod],
        IdentitySelection::CrossingUnitarity => vec![IdentityId::CrossingUnitarity],
        IdentitySelection::HM => vec![IdentityId::HM],
        IdentitySelection::Cotan => vec![IdentityId::Cotan],
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    for id in selected {
        let report = match id {
            IdentityId::Ybe => verify_ybe(&ctx, &plan, &policy)?,
            IdentityId::Unitarity => verify_unitarity(&ctx, &plan, &policy)?,
            IdentityId::Crossing => verify_crossing(&ctx, &plan, &policy)?,
            IdentityId::CrossingUnitarity => verify_crossing_unitarity(&ctx, &plan, &policy)?,
            IdentityId::Quasiperiod => verify_quasi_periodicity(&ctx, &plan, &policy)?,
            IdentityId::HM => {
                let m = cfg.line_m(n, r)?.unwrap_or(1);
                let mut line = CriticalLine::new(m, r, n);
                line.h = cfg.h;
                verify_hm_conjugation(&ctx, &line, &plan, &policy)?
            }
            IdentityId::Cotan => verify_cotan(n, &plan, &policy)?,
            IdentityId::ScalingLimit => unreachable!("not selectable from verify"),
        };
        let report = match cfg.tolerances.get(id.as_str()) {
            Some(&t) => report.with_tolerance(t),
            None => report,
        };
        writeln!(
            stdout,
            "{}: {} (max residual {:.3e}, tolerance {:.1e}, {} samples)",
            id.as_str(),
            if report.pass { "PASS" } else { "FAIL" },
            report.max_residual,
            report.tolerance,
            report.samples.len()
        )
        .map_err(io)?;
        reports.push(report);
    }
    if let Some(path) = &cfg.out {
        let text = serde_json::to_string_pretty(&reports).expect("reports are plain data");
        write_output(Some(path), &text, stdout)?;
    }
    Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
}

/// Parses `start:stop:count` into an inclusive evenly spaced grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("grid `{spec}` must be start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("grid `{spec}` needs a positive count and finite ends")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect())
}

fn parse_indices(spec: &str, n: usize) -> Result<(ZnIndex, ZnIndex, ZnIndex)> {
    let vals: std::result::Result<Vec<i64>, _> = spec.split(',').map(|s| s.trim().parse::<i64>()).collect();
    match vals.as_deref() {
        Ok([a, b, c]) => Ok((ZnIndex::new(*a, n), ZnIndex::new(*b, n), ZnIndex::new(*c, n))),
        _ => Err(Error::Config(format!("indices `{spec}` must be three integers a,b,c"))),
    }
}

fn require_m(cfg: &RunConfig, n: usize, r: f64) -> Result<i64> {
    cfg.line_m(n, r)?.ok_or_else(|| Error::Config("missing M: pass --M or --c".into()))
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Scan(ScanTarget),
    Eval(EvalFunction),
}

fn evaluate(
    target: Target,
    beta: C64,
    r: Option<f64>,
    cfg: &RunConfig,
    indices: &str,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let n = cfg.n_or(2);
    let need_r = || r.ok_or_else(|| Error::Config("missing r: pass --r or set it in the config".into()));
    let need_h = || cfg.h.ok_or_else(|| Error::Config("missing h: pass --h".into()));
    match target {
        Target::Scan(ScanTarget::F) | Target::Eval(EvalFunction::F) => {
            let r = need_r()?;
            f_structure(&StructureFunctionQuery::new(n, r, require_m(cfg, n, r)?, beta), policy)
        }
        Target::Scan(ScanTarget::Y) | Target::Eval(EvalFunction::Y) => {
            let r = need_r()?;
            y_structure(&StructureFunctionQuery::new(n, r, require_m(cfg, n, r)?, beta), policy)
        }
        Target::Scan(ScanTarget::FH) | Target::Eval(EvalFunction::FH) => {
            let m = cfg.m.ok_or_else(|| Error::Config("missing M: pass --M".into()))?;
            f_h(beta, n, m, need_h()?, policy)
        }
        Target::Scan(ScanTarget::PoissonCenter) | Target::Eval(EvalFunction::PoissonCenter) => {
            poisson_center_coeff(beta, n, policy)
        }
        Target::Scan(ScanTarget::REntry) | Target::Eval(EvalFunction::REntry) => {
            let (a, b, c) = parse_indices(indices, n)?;
            scaled_r_element(a, b, c, &ScaledContext::new(beta, need_r()?, n)?, policy)
        }
        Target::Eval(EvalFunction::T) => {
            let c = cfg.c.ok_or_else(|| Error::Config("missing c: pass --c".into()))?;
            t_factor(beta, C64::new(c, 0.0), n, policy)
        }
        Target::Eval(EvalFunction::S0) => s0(beta, need_r()?, n, policy),
        Target::Eval(EvalFunction::FS) => f_s(beta, n, policy),
        Target::Eval(EvalFunction::FC) => f_c(beta, n, policy),
    }
}

pub fn cmd_scan(args: &ScanArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = RunConfig::merged(&args.common)?;
    cfg.validate(false)?;
    let re = parse_grid(&args.beta_re)?;
    let im = parse_grid(&args.beta_im)?;
    let rs: Vec<Option<f64>> = match &args.r_grid {
        Some(g) => parse_grid(g)?.into_iter().map(Some).collect(),
        None => vec![cfg.r],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["beta_re", "beta_im", "r", "value_re", "value_im", "pole"]).map_err(|e| Error::Config(e.to_string()))?;
    for r in &rs {
        for &y in &im {
            for &x in &re {
                let rs = r.map(|v| v.to_string()).unwrap_or_default();
                let record = match evaluate(Target::Scan(args.target), C64::new(x, y), *r, &cfg, &args.indices, &cfg.policy) {
                    Ok(v) => [x.to_string(), y.to_string(), rs, v.re.to_string(), v.im.to_string(), "false".into()],
                    Err(e) if e.is_pole() => [x.to_string(), y.to_string(), rs, String::new(), String::new(), "true".into()],
                    Err(e) => return Err(usage(e)),
                };
                w.write_record(&record).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    write_output(cfg.out.as_deref(), &String::from_utf8(bytes).expect("csv output is utf-8"), stdout)?;
    Ok(EXIT_PASS)
}

pub fn parse_ladder(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("ladder `{spec}` must be comma-separated numbers"))))
        .collect()
}

pub fn cmd_limit_check(args: &LimitArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = RunConfig::merged(&args.common)?;
    cfg.validate(false)?;
    let n = cfg.n_or(2);
    let r = cfg.require_r()?;
    let ladder = parse_ladder(&args.ladder)?;
    let beta = C64::new(args.beta, args.beta_im);
    let report = verify_scaling_limit(n, r, beta, &ladder, args.perturb.unwrap_or(0.0), &cfg.policy)?;
    for d in &report.diagnostics {
        writeln!(stdout, "{d}").map_err(io)?;
    }
    writeln!(stdout, "scaling-limit: {}", if report.pass { "PASS" } else { "FAIL" }).map_err(io)?;
    if let Some(path) = &cfg.out {
        write_output(Some(path), &report.to_json(), stdout)?;
    }
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut cfg = RunConfig::merged(&args.common)?;
    if cfg.r.is_none() && cfg.h.is_none() {
        cfg.r = Some(1.0);
    }
    cfg.validate(false)?;
    let beta = C64::new(args.beta, args.beta_im);
    let v = evaluate(Target::Eval(args.function), beta, cfg.r, &cfg, &args.indices, &cfg.policy).map_err(usage)?;
    let name = EvalFunction::value_variants()
        .iter()
        .find(|f| **f == args.function)
        .and_then(|f| f.to_possible_value())
        .map(|p| p.get_name().to_string())
        .unwrap_or_default();
    writeln!(stdout, "{:e} {:e}", v.re, v.im).map_err(io)?;
    writeln!(
        stdout,
        "{name}(beta = {beta}) = {v} [N = {}, r = {:?}, policy {}]",
        cfg.n_or(2),
        cfg.r,
        serde_json::to_string(&cfg.policy).expect("policy is plain data")
    )
    .map_err(io)?;
    Ok(EXIT_PASS)
}
