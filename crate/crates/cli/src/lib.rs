//! `levy-stop` command-line front end.
//!
//! Exit codes: 0 success, 2 parse or input error, 3 order cap or
//! insufficient order, 4 unsupported factorization or evaluation, 5 failed
//! verification.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use levy_stop::checks::{self, Suite};
use levy_stop::levy::{JumpComponent, JumpLaw, KilledSpec, LevyModel};
use levy_stop::mc::{self, SimConfig};
use levy_stop::measure::{value_spectrally_positive, SigmaDensity, SigmaTransform};
use levy_stop::solver::reward;
use levy_stop::{appell_from_cumulants, solve, CumulantSequence, Error};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ORDER: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Model file: a finite-activity Lévy model with its discount rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub drift: f64,
    pub gaussian_var: f64,
    #[serde(default)]
    pub jumps: Vec<JumpSpec>,
    pub discount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub rate: f64,
    pub law: LawSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Point { size: f64 },
    ExpUp { alpha: f64 },
    ExpDown { alpha: f64 },
}

impl ModelSpecFile {
    pub fn to_spec(&self) -> levy_stop::Result<KilledSpec> {
        let jumps = self
            .jumps
            .iter()
            .map(|j| {
                let law = match j.law {
                    LawSpec::Point { size } => JumpLaw::PointMass { size },
                    LawSpec::ExpUp { alpha } => JumpLaw::ExponentialUp { alpha },
                    LawSpec::ExpDown { alpha } => JumpLaw::ExponentialDown { alpha },
                };
                JumpComponent::new(j.rate, law)
            })
            .collect::<levy_stop::Result<Vec<_>>>()?;
        KilledSpec::new(LevyModel::new(self.drift, self.gaussian_var, jumps)?, self.discount)
    }

    pub fn from_spec(spec: &KilledSpec) -> Self {
        Self {
            drift: spec.model.drift,
            gaussian_var: spec.model.gaussian_var,
            jumps: spec
                .model
                .jumps
                .iter()
                .map(|j| JumpSpec {
                    rate: j.rate,
                    law: match j.law {
                        JumpLaw::PointMass { size } => LawSpec::Point { size },
                        JumpLaw::ExponentialUp { alpha } => LawSpec::ExpUp { alpha },
                        JumpLaw::ExponentialDown { alpha } => LawSpec::ExpDown { alpha },
                    },
                })
                .collect(),
            discount: spec.r,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "levy-stop", version, about = "Optimal stopping of Lévy processes with power rewards")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the coefficients of Q_0..Q_N as CSV rows (constant term first).
    Appell(AppellArgs),
    /// Solve the stopping problem and tabulate the value function.
    Solve(SolveArgs),
    /// Evaluate the representing measure.
    Sigma(SigmaArgs),
    /// Monte Carlo estimates as JSON.
    Mc(McArgs),
    /// Run invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["cumulants", "dist"])))]
pub struct AppellArgs {
    /// Cumulants k1,k2,... of the variable.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cumulants: Option<Vec<f64>>,
    /// `exp:LAMBDA` or `normal:MU,SIGMA2`.
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
    #[arg(long)]
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short = 'n', long = "power")]
    pub n: usize,
    /// `LO:HI:STEP`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: OutFormat,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("points").required(true).args(["gamma_grid", "x_grid"])))]
pub struct SigmaArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short = 'n', long = "power")]
    pub n: usize,
    /// Transform arguments, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    /// Density grid `LO:HI:STEP` (spectrally positive models).
    #[arg(long, allow_hyphen_values = true)]
    pub x_grid: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["threshold", "scan", "fluctuation", "factors", "value"])))]
pub struct McArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(short = 'n', long = "power", default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Horizon cap; defaults to max(20/r, 50).
    #[arg(long)]
    pub t_cap: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    /// Payoff of the rule "stop above A".
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Thresholds to compare on common paths; must include x*.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub scan: Option<Vec<f64>>,
    /// Fluctuation identity at level A (with x = x0).
    #[arg(long, allow_negative_numbers = true)]
    pub fluctuation: Option<f64>,
    /// Cumulants of M_T and I_T up to order K (at most 6).
    #[arg(long)]
    pub factors: Option<usize>,
    /// Value at x0 from exact samples of X_T (spectrally positive models).
    #[arg(long)]
    pub value: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Appell,
    Wh,
    Stopping,
    Sigma,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OrderCap { .. } | Error::OrderInsufficient { .. } => EXIT_ORDER,
            Error::UnsupportedFactorization | Error::UnsupportedEvaluation(_) | Error::WrongSpectralSide { .. } => {
                EXIT_UNSUPPORTED
            }
            _ => EXIT_PARSE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Shortest decimal that parses back to the same `f64`; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::parse(format!("grid must be LO:HI:STEP with STEP > 0, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(Failure::parse("grid has more than a million points"));
    }
    Ok((0..=count).map(|i| lo + step * i as f64).collect())
}

pub fn load_model(path: &Path) -> Result<KilledSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let file: ModelSpecFile = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("malformed model file {}: {e}", path.display())))?;
    Ok(file.to_spec()?)
}

fn parse_dist(s: &str, order: usize) -> Result<CumulantSequence, Failure> {
    let bad = || Failure::parse(format!("--dist must be exp:LAMBDA or normal:MU,SIGMA2, got {s:?}"));
    let (kind, params) = s.split_once(':').ok_or_else(bad)?;
    let p: Vec<f64> = params.split(',').map(|v| v.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let order = order.max(1);
    match (kind, p.as_slice()) {
        ("exp", [lambda]) => Ok(CumulantSequence::exponential(*lambda, order)?),
        ("normal", [mu, s2]) => Ok(CumulantSequence::normal(*mu, *s2, order)?),
        _ => Err(bad()),
    }
}

fn cmd_appell(a: &AppellArgs, out: &mut dyn Write) -> CmdResult {
    let kappa = match (&a.cumulants, &a.dist) {
        (Some(k), _) => CumulantSequence::from_orders(k)?,
        (None, Some(d)) => parse_dist(d, a.order)?,
        (None, None) => return Err(Failure::parse("need --cumulants or --dist")),
    };
    for q in appell_from_cumulants(&kappa, a.order)? {
        let row: Vec<String> = q.coeffs().iter().map(|&c| fmt_num(c)).collect();
        writeln!(out, "{}", if row.is_empty() { "0".into() } else { row.join(",") })?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SolveRow {
    x: f64,
    value: f64,
    reward: f64,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    n: usize,
    x_star: f64,
    phi: Option<f64>,
    hat_phi: Option<f64>,
    rows: Vec<SolveRow>,
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_model(&a.model)?;
    let grid = a.grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default();
    let sol = solve(&spec, a.n)?;
    let phi = spec.model.is_spectrally_negative().then(|| spec.phi_root()).transpose()?;
    let hat_phi = spec.model.is_spectrally_positive().then(|| spec.hat_phi_root()).transpose()?;
    let rows = grid
        .iter()
        .map(|&x| {
            let value = match sol.value(x) {
                Err(Error::UnsupportedEvaluation(_)) => value_spectrally_positive(&spec, a.n, x),
                other => other,
            }?;
            Ok(SolveRow { x, value, reward: reward(a.n, x) })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = SolveReport { n: a.n, x_star: sol.x_star, phi, hat_phi, rows };
    match a.out {
        OutFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?,
        OutFormat::Csv => {
            writeln!(out, "# x_star = {}", fmt_num(report.x_star))?;
            if let Some(p) = report.phi {
                writeln!(out, "# phi = {}", fmt_num(p))?;
            }
            if let Some(p) = report.hat_phi {
                writeln!(out, "# hat_phi = {}", fmt_num(p))?;
            }
            writeln!(out, "x,value,reward")?;
            for r in &report.rows {
                writeln!(out, "{},{},{}", fmt_num(r.x), fmt_num(r.value), fmt_num(r.reward))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sigma(a: &SigmaArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_model(&a.model)?;
    if let Some(gammas) = &a.gamma_grid {
        let t = SigmaTransform::new(&spec, a.n)?;
        writeln!(out, "gamma,sigma_hat")?;
        for &g in gammas {
            writeln!(out, "{},{}", fmt_num(g), fmt_num(t.sigma_hat(g)?))?;
        }
    }
    if let Some(grid) = &a.x_grid {
        let grid = parse_grid(grid)?;
        if !spec.model.is_spectrally_positive() {
            return Err(Error::WrongSpectralSide { expected: "spectrally positive" }.into());
        }
        let d = SigmaDensity::new(&spec, a.n)?;
        writeln!(out, "x,density")?;
        for x in grid {
            let v = if x < d.x_star() { 0.0 } else { d.density(x)? };
            writeln!(out, "{},{}", fmt_num(x), fmt_num(v))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_mc(a: &McArgs, out: &mut dyn Write) -> CmdResult {
    let spec = load_model(&a.model)?;
    let t_cap = a.t_cap.unwrap_or_else(|| SimConfig::default_t_cap(spec.r));
    let cfg = SimConfig::new(a.dt, a.paths, a.seed, t_cap)?;
    let json = if let Some(th) = a.threshold {
        serde_json::to_string_pretty(&mc::threshold_payoff(&spec, a.n, a.x0, th, &cfg)?)
    } else if let Some(list) = &a.scan {
        serde_json::to_string_pretty(&mc::optimality_scan(&spec, a.n, a.x0, list, &cfg)?)
    } else if let Some(level) = a.fluctuation {
        serde_json::to_string_pretty(&mc::fluctuation_identity_check(&spec, a.n, a.x0, level, &cfg)?)
    } else if let Some(k) = a.factors {
        serde_json::to_string_pretty(&mc::empirical_factor_cumulants(&spec, k, &cfg)?)
    } else {
        serde_json::to_string_pretty(&mc::value_spectrally_positive_mc(&spec, a.n, a.x0, &cfg)?)
    };
    writeln!(out, "{}", json.expect("serializable"))?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let suites = match a.suite {
        SuiteArg::All => Suite::ALL.to_vec(),
        SuiteArg::Appell => vec![Suite::Appell],
        SuiteArg::Wh => vec![Suite::Wh],
        SuiteArg::Stopping => vec![Suite::Stopping],
        SuiteArg::Sigma => vec![Suite::Sigma],
    };
    let results = checks::run(&suites);
    let mut failed = 0;
    for c in &results {
        if !c.pass {
            failed += 1;
        }
        writeln!(out, "[{}] {}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail)?;
    }
    writeln!(out, "{} checks, {} failed", results.len(), failed)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VERIFY })
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Appell(a) => cmd_appell(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sigma(a) => cmd_sigma(a, out),
        Command::Mc(a) => cmd_mc(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
