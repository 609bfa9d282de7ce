//! Command-line interface. Results go to stdout as JSON, JSON lines or a bare
//! number; diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use riskflow_core::axioms::{run_suite, SuiteMeasure};
use riskflow_core::calibration::{fit_gaussian, fit_weibull};
use riskflow_core::dynamic::CvarMode;
use riskflow_core::scenario::{build_paper_experiment, ExperimentConfig, Family, PaperExperiment, SummaryStats};
use riskflow_core::static_risk::{MeasureKind, Orientation, RiskMeasureSpec};
use riskflow_core::{GaussianParams, ReturnModel, WeibullParams};
use serde_json::{json, Value};

use crate::config::{load_config, save_config};
use crate::error::{Error, Result};
use crate::format::{round_json, sig10};
use crate::io::{read_returns_csv, ReturnsMode};
use crate::output::{emit_trajectories, OutputFormat};
use crate::runner::{run_parallel, thread_count};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "riskflow", version, about = "Static, recursive and Markov-modulated VaR/CVaR")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a return model to a `date,value` CSV.
    Fit(FitArgs),
    /// Evaluate a static risk measure.
    Risk(RiskArgs),
    /// Run an experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Check the risk-measure axioms.
    Axioms(AxiomsArgs),
    /// Run one of the two calibrated study economies.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub family: Family,
    #[arg(long, value_enum, default_value = "diff")]
    pub returns: ReturnsMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MeasureArg {
    Var,
    Cvar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OrientationArg {
    UpperTail,
    LowerTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CvarModeArg {
    Exact,
    PaperPiecewise,
}

impl From<CvarModeArg> for CvarMode {
    fn from(m: CvarModeArg) -> Self {
        match m {
            CvarModeArg::Exact => CvarMode::Exact,
            CvarModeArg::PaperPiecewise => CvarMode::PaperPiecewise,
        }
    }
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[arg(long)]
    pub family: Family,
    /// JSON object, e.g. `{"mu":0,"sigma":1}` or `{"lambda":1,"alpha":1,"theta":0}`.
    #[arg(long)]
    pub params: String,
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "upper-tail")]
    pub orientation: OrientationArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Defaults to the output file extension.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[arg(long)]
    pub measure: SuiteMeasure,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub paper: PaperExperiment,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub cvar_mode: Option<CvarModeArg>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<u8> {
    match command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Risk(a) => cmd_risk(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Axioms(a) => cmd_axioms(&a, out),
        Command::Reproduce(a) => cmd_reproduce(&a, out),
    }
}

fn emit(out: &mut dyn Write, line: &str) -> Result<u8> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))?;
    Ok(EXIT_OK)
}

pub fn cmd_fit(a: &FitArgs, out: &mut dyn Write) -> Result<u8> {
    let returns = read_returns_csv(&a.input, a.returns)?;
    log::info!("fitting {} returns from {}", returns.len(), a.input.display());
    let params = match a.family {
        Family::Gaussian => {
            let g = fit_gaussian(&returns)?;
            json!({"mu": g.mu, "sigma": g.sigma})
        }
        Family::Weibull => {
            let w = fit_weibull(&returns)?;
            json!({"lambda": w.lambda, "alpha": w.alpha, "theta": w.theta})
        }
    };
    let doc = round_json(json!({"family": a.family.as_str(), "params": params}));
    emit(out, &doc.to_string())
}

fn param(obj: &serde_json::Map<String, Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match (obj.get(key), default) {
        (Some(v), _) => v.as_f64().ok_or_else(|| Error::Input(format!("params.{key} must be a number"))),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::Input(format!("params.{key} is required"))),
    }
}

/// A single-period model from a `--params` JSON object.
pub fn model_from_params(family: Family, params: &str) -> Result<ReturnModel> {
    let v: Value = serde_json::from_str(params)
        .map_err(|source| Error::Json { path: PathBuf::from("--params"), source })?;
    let Value::Object(obj) = v else {
        return Err(Error::Input("--params must be a JSON object".into()));
    };
    let allowed: &[&str] = match family {
        Family::Gaussian => &["mu", "sigma"],
        Family::Weibull => &["lambda", "alpha", "theta"],
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Input(format!("unexpected parameter {k:?} for the {} family", family.as_str())));
    }
    Ok(match family {
        Family::Gaussian => GaussianParams::new(param(&obj, "mu", None)?, param(&obj, "sigma", None)?)?.into(),
        Family::Weibull => WeibullParams::new(
            param(&obj, "lambda", None)?,
            param(&obj, "alpha", None)?,
            param(&obj, "theta", Some(0.0))?,
        )?
        .into(),
    })
}

pub fn cmd_risk(a: &RiskArgs, out: &mut dyn Write) -> Result<u8> {
    let model = model_from_params(a.family, &a.params)?;
    let kind = match a.measure {
        MeasureArg::Var => MeasureKind::Var,
        MeasureArg::Cvar => MeasureKind::Cvar,
    };
    let orientation = match a.orientation {
        OrientationArg::UpperTail => Orientation::UpperTail,
        OrientationArg::LowerTail => Orientation::LowerTail,
    };
    let value = RiskMeasureSpec::new(kind, a.p, orientation)?.evaluate(&model)?;
    emit(out, &sig10(value))
}

fn summary_json(summary: &SummaryStats, config: &ExperimentConfig, output: &Path) -> Result<String> {
    let summary = serde_json::to_value(summary).map_err(|source| Error::Json { path: output.into(), source })?;
    let doc = json!({
        "family": config.family.as_str(),
        "p": config.p,
        "horizon": config.horizon,
        "n_paths": config.n_paths,
        "seed": config.seed,
        "cvar_mode": config.cvar_mode.as_str(),
        "output": output.display().to_string(),
        "summary": summary,
    });
    Ok(round_json(doc).to_string())
}

fn execute(config: &ExperimentConfig, output: &Path, format: OutputFormat, out: &mut dyn Write) -> Result<u8> {
    let threads = thread_count()?;
    let (results, summary) = run_parallel(config, threads)?;
    emit_trajectories(&results, format, output)?;
    log::info!("wrote {}", output.display());
    emit(out, &summary_json(&summary, config, output)?)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<u8> {
    let config = load_config(&a.config)?;
    let output = a
        .output
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("trajectories.csv"));
    let format = a.format.unwrap_or_else(|| OutputFormat::from_path(&output));
    execute(&config, &output, format, out)
}

pub fn cmd_reproduce(a: &ReproduceArgs, out: &mut dyn Write) -> Result<u8> {
    let mut config = build_paper_experiment(a.paper);
    if let Some(n) = a.paths {
        config.n_paths = n;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(m) = a.cvar_mode {
        config.cvar_mode = m.into();
    }
    let ext = match a.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let name = a.paper.as_str();
    let output = a.out_dir.join(format!("{name}.{ext}"));
    config.output = Some(output.display().to_string());
    save_config(&config, &a.out_dir.join(format!("{name}.config.json")))?;
    execute(&config, &output, a.format, out)
}

pub fn cmd_axioms(a: &AxiomsArgs, out: &mut dyn Write) -> Result<u8> {
    let entries = run_suite(a.measure, a.trials, a.seed)?;
    let mut code = EXIT_OK;
    for e in &entries {
        let v = serde_json::to_value(e).map_err(|source| Error::Json { path: "<report>".into(), source })?;
        emit(out, &round_json(v).to_string())?;
        if !e.as_expected() {
            log::warn!("{} {}: expected {:?}, got {:?}", a.measure.as_str(), e.report.axiom, e.expected, e.report.verdict);
            code = EXIT_MISMATCH;
        }
    }
    Ok(code)
}
