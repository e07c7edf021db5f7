//! `equilib`: Gram data, distance sweeps and the validation suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 argument error,
//! 3 input/output file error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use equilib_core::dense;
use equilib_core::equilibrium::{self, ExactAverager};
use equilib_core::gram::build_gram;
use equilib_core::montecarlo::{mc_average_distance_grid, mc_gaussian_average, McConfig};
use equilib_core::spectrum::{Spectrum, SpectrumFile};
use equilib_validation::{self as validate, ValidationConfig};

#[derive(Parser, Debug)]
#[command(name = "equilib", version, about = "Haar-averaged equilibration distances via symmetric-group twirling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, multiplicities, determinant and invertibility of the S_n Gram matrix.
    Gram(GramArgs),
    /// Distance from equilibrium on a time grid.
    Sweep(SweepArgs),
    /// Run the acceptance checks and emit a JSON report.
    Validate(ValidateArgs),
}

#[derive(clap::Args, Debug)]
struct GramArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    /// Exact Haar average for the given spectrum.
    Haar,
    /// Average over Gaussian spectra with the file's degeneracies.
    Gaussian,
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t_min: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    t_max: f64,
    #[arg(long, default_value_t = 31)]
    steps: usize,
    /// Monte-Carlo samples per point; 0 for analytic columns only.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = Mode::Haar)]
    mode: Mode,
    /// Energy spread of the Gaussian ensemble (default ln d).
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(clap::Args, Debug)]
struct ValidateArgs {
    /// Run a single check group.
    #[arg(long)]
    check: Option<String>,
    #[arg(long, default_value_t = validate::DEFAULT_SEED)]
    seed: u64,
    /// Additionally cross-check exact against Monte-Carlo averages for this spectrum.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Validation,
    Argument(String),
    File(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Validation => 1,
            Self::Argument(_) => 2,
            Self::File(_) => 3,
        }
    }
}

impl From<equilib_core::Error> for CliError {
    fn from(e: equilib_core::Error) -> Self {
        Self::Argument(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Sweep configuration after validation of its invariants.
#[derive(Clone, Debug, Serialize)]
struct RunConfig {
    spectrum: PathBuf,
    t_min: f64,
    t_max: f64,
    steps: usize,
    samples: usize,
    seed: u64,
    format: Format,
    mode: Mode,
    sigma: Option<f64>,
}

impl RunConfig {
    fn from_args(a: &SweepArgs) -> CliResult<Self> {
        if !a.t_min.is_finite() || !a.t_max.is_finite() || a.t_min > a.t_max {
            return Err(CliError::Argument(format!(
                "need finite t_min ≤ t_max, got {} and {}",
                a.t_min, a.t_max
            )));
        }
        if a.steps == 0 {
            return Err(CliError::Argument("steps must be at least 1".into()));
        }
        if a.samples == 1 {
            return Err(CliError::Argument("samples must be 0 or at least 2".into()));
        }
        if let Some(s) = a.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Argument("sigma must be positive".into()));
            }
        }
        Ok(Self {
            spectrum: a.spectrum.clone(),
            t_min: a.t_min,
            t_max: a.t_max,
            steps: a.steps,
            samples: a.samples,
            seed: a.seed,
            format: a.format,
            mode: a.mode,
            sigma: a.sigma,
        })
    }

    fn times(&self) -> Vec<f64> {
        validate::linspace(self.t_min, self.t_max, self.steps)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gram(a) => cmd_gram(a),
        Command::Sweep(a) => RunConfig::from_args(a).and_then(|cfg| cmd_sweep(&cfg, a.out.as_deref())),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Validation => eprintln!("equilib: validation failed"),
                CliError::Argument(m) => eprintln!("equilib: argument error: {m}"),
                CliError::File(m) => eprintln!("equilib: file error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::File(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::File(format!("stdout: {e}")))
        }
    }
}

fn read_spectrum(path: &Path) -> CliResult<Spectrum> {
    let text = fs::read_to_string(path).map_err(|e| CliError::File(format!("{}: {e}", path.display())))?;
    SpectrumFile::parse(&text).map_err(|e| CliError::File(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn cmd_gram(a: &GramArgs) -> CliResult<()> {
    let g = build_gram(a.n, a.d)?;
    let table = g.context().table();
    let data = g.spectral_data();
    let k: Vec<Value> = g.multiplicities().iter().map(bigint_value).collect();
    let irreps: Vec<Value> = table
        .irreps()
        .iter()
        .zip(g.multiplicities())
        .zip(&data.eigenvalues)
        .map(|((irrep, k), lambda)| {
            json!({
                "label": irrep.label,
                "dimension": irrep.dimension,
                "k": bigint_value(k),
                "eigenvalue": lambda.to_string(),
                "eigenvalue_multiplicity": irrep.dimension * irrep.dimension,
            })
        })
        .collect();
    let singular = g.is_singular();
    let minpoly_agrees = match (a.n, singular) {
        (3, false) => Some(g.minpoly_inverse_s3()? == g.spectral_inverse()?),
        (4, false) => Some(g.minpoly_inverse_s4()? == g.spectral_inverse()?),
        _ => None,
    };
    let report = json!({
        "n": a.n,
        "d": a.d,
        "k": k,
        "irreps": irreps,
        "eigenvalues": data.eigenvalues.iter().map(equilib_core::exact::rational_to_f64).collect::<Vec<_>>(),
        "determinant": data.determinant().to_string(),
        "trace": data.trace().to_string(),
        "singular": singular,
        "inverse": if singular { "pseudoinverse" } else { "inverse" },
        "minpoly_inverse_agrees": minpoly_agrees,
    });
    emit(a.out.as_deref(), &pretty(&report))
}

fn bigint_value(k: &num_bigint::BigInt) -> Value {
    match i64::try_from(k) {
        Ok(v) => json!(v),
        Err(_) => json!(k.to_string()),
    }
}

/// One sweep row; `None` renders as an empty CSV cell or JSON null.
type Row = Vec<Option<f64>>;

fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>) -> CliResult<()> {
    let spectrum = read_spectrum(&cfg.spectrum)?;
    let times = cfg.times();
    let (columns, rows, extra): (Vec<&str>, Vec<Row>, Value) = match cfg.mode {
        Mode::Haar => haar_rows(&spectrum, &times, cfg)?,
        Mode::Gaussian => gaussian_rows(&spectrum, &times, cfg)?,
    };
    let text = match cfg.format {
        Format::Csv => to_csv(&columns, &rows)?,
        Format::Json => {
            let rows: Vec<Value> = rows.iter().map(|r| json!(r)).collect();
            pretty(&json!({
                "mode": cfg.mode,
                "d_S": spectrum.system_dim(),
                "d_B": spectrum.bath_dim(),
                "samples": cfg.samples,
                "seed": cfg.seed,
                "parameters": extra,
                "columns": columns,
                "rows": rows,
            }))
        }
    };
    emit(out, &text)
}

pub const HAAR_COLUMNS: [&str; 5] = ["t", "exact", "leading_order", "mc_mean", "mc_stderr"];
pub const GAUSSIAN_COLUMNS: [&str; 6] = ["t", "gaussian_average", "upper_envelope", "lower_envelope", "mc_mean", "mc_stderr"];

fn haar_rows(s: &Spectrum, times: &[f64], cfg: &RunConfig) -> CliResult<(Vec<&'static str>, Vec<Row>, Value)> {
    let avg = ExactAverager::new(s.system_dim(), s.bath_dim())?;
    let mc = if cfg.samples > 0 {
        dense::check_dense_dim(s.dim())?;
        Some(mc_average_distance_grid(s, times, &McConfig::new(cfg.samples, cfg.seed))?.hs_sq)
    } else {
        None
    };
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let e = mc.as_ref().map(|m| m[i]);
            Ok(vec![
                Some(t),
                Some(avg.distance(s, t)?),
                Some(equilibrium::leading_order_distance(s, t)),
                e.map(|e| e.mean),
                e.map(|e| e.stderr),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok((HAAR_COLUMNS.to_vec(), rows, json!({})))
}

fn gaussian_rows(s: &Spectrum, times: &[f64], cfg: &RunConfig) -> CliResult<(Vec<&'static str>, Vec<Row>, Value)> {
    let degs = s.degeneracies();
    let (d_s, d_b) = (s.system_dim(), s.bath_dim());
    let sigma = cfg.sigma.unwrap_or_else(|| equilibrium::default_sigma(s.dim()));
    let mc = if cfg.samples > 0 {
        Some(mc_gaussian_average(
            &degs,
            d_s,
            d_b,
            sigma,
            times,
            cfg.samples,
            cfg.seed,
            equilibrium::leading_order_distance,
        )?)
    } else {
        None
    };
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let b = equilibrium::gaussian_bounds(&degs, d_s, sigma, t)?;
            let e = mc.as_ref().map(|m| m[i]);
            Ok(vec![
                Some(t),
                Some(equilibrium::gaussian_average(&degs, d_s, sigma, t)?),
                Some(b.upper),
                Some(b.lower),
                e.map(|e| e.mean),
                e.map(|e| e.stderr),
            ])
        })
        .collect::<CliResult<_>>()?;
    Ok((GAUSSIAN_COLUMNS.to_vec(), rows, json!({ "sigma": sigma, "degeneracies": degs })))
}

fn to_csv(columns: &[&str], rows: &[Row]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::File(e.to_string());
    w.write_record(columns).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::File(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn cmd_validate(a: &ValidateArgs) -> CliResult<()> {
    if let Some(name) = &a.check {
        if validate::check_number(name).is_none() {
            let names: Vec<&str> = validate::CHECKS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::Argument(format!(
                "unknown check '{name}'; expected one of {}",
                names.join(", ")
            )));
        }
    }
    let spectrum = a.spectrum.as_deref().map(read_spectrum).transpose()?;
    let cfg = ValidationConfig {
        seed: a.seed,
        only: a.check.clone(),
        spectrum,
    };
    let report = validate::run(&cfg)?;
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    emit(a.out.as_deref(), &pretty(&report))?;
    if report.all_passed {
        Ok(())
    } else {
        Err(CliError::Validation)
    }
}
