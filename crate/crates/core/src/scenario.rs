//! Experiment configuration, the two calibrated economies of the simulation
//! study, per-path execution and summary statistics.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::ReturnModel;
use crate::dynamic::{
    modulated_cvar_trajectory, modulated_var_trajectory, recursive_cvar, recursive_var_gaussian_closed,
    recursive_var_weibull_closed, state_level_values, CvarMode, RiskTrajectory,
};
use crate::error::{bail, check_level, Result};
use crate::markov::{
    simulate_path, ChainPath, MarkovEconomy, MatrixOrientation, StateLinkedModel, StateVector, TransitionMatrix,
};
use crate::rng::{derive_seed, seeded_rng};
use crate::static_risk::MeasureKind;

/// Mean of the annual index level used for the Gaussian economy.
pub const MSCI_MEAN: f64 = 1113.3425;
/// Standard deviation of the annual index level.
pub const MSCI_SD: f64 = 186.29;
/// Weibull scale fitted to the daily return series.
pub const BBGEX_LAMBDA: f64 = 6.7679;
/// Weibull shape fitted to the daily return series.
pub const BBGEX_ALPHA: f64 = 0.8016;
/// Row-oriented transition matrix of the two-state chain.
pub const PAPER_MATRIX: [[f64; 2]; 2] = [[0.25, 0.75], [0.35, 0.65]];
pub const PAPER_LEVEL: f64 = 0.99;
pub const PAPER_HORIZON: usize = 10;
/// Per-state multipliers applied to the calibrated parameters.
pub const STATE_FACTORS: [f64; 2] = [1.05, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Gaussian,
    Weibull,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Weibull => "weibull",
        }
    }
}

impl core::str::FromStr for Family {
    type Err = crate::RiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "weibull" => Ok(Family::Weibull),
            other => bail!(Usage, "unknown family {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MeasureSelection {
    Var,
    Cvar,
}

impl MeasureSelection {
    pub fn kind(self) -> MeasureKind {
        match self {
            MeasureSelection::Var => MeasureKind::Var,
            MeasureSelection::Cvar => MeasureKind::Cvar,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureSelection::Var => "var",
            MeasureSelection::Cvar => "cvar",
        }
    }
}

#[cfg(feature = "serde")]
fn default_orientation() -> MatrixOrientation {
    MatrixOrientation::Row
}

#[cfg(feature = "serde")]
fn default_paths() -> usize {
    1
}

/// Everything needed to run an experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ExperimentConfig {
    pub family: Family,
    /// `mu`, `sigma` for Gaussian returns; `lambda`, `alpha`, `theta` for Weibull.
    pub params: BTreeMap<String, Vec<f64>>,
    pub transition_matrix: Vec<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(default = "default_orientation"))]
    pub orientation: MatrixOrientation,
    /// 1-based.
    pub initial_state: usize,
    pub p: f64,
    pub horizon: usize,
    #[cfg_attr(feature = "serde", serde(default = "default_paths"))]
    pub n_paths: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
    pub measures: Vec<MeasureSelection>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub cvar_mode: CvarMode,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub output: Option<String>,
    /// Free-form numeric annotations such as calibration inputs and units.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "BTreeMap::is_empty"))]
    pub metadata: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    fn param(&self, name: &str) -> Result<Vec<f64>> {
        match self.params.get(name) {
            Some(v) => Ok(v.clone()),
            None => bail!(Config, "{} config is missing params.{name}", self.family.as_str()),
        }
    }

    pub fn matrix(&self) -> Result<TransitionMatrix> {
        TransitionMatrix::from_nested(&self.transition_matrix, self.orientation)
    }

    pub fn model(&self) -> Result<StateLinkedModel> {
        let allowed: &[&str] = match self.family {
            Family::Gaussian => &["mu", "sigma"],
            Family::Weibull => &["lambda", "alpha", "theta"],
        };
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            bail!(Config, "unexpected parameter {k:?} for the {} family", self.family.as_str());
        }
        match self.family {
            Family::Gaussian => StateLinkedModel::gaussian(self.param("mu")?, self.param("sigma")?),
            Family::Weibull => {
                StateLinkedModel::weibull(self.param("lambda")?, self.param("alpha")?, self.param("theta")?)
            }
        }
    }

    /// Checks every invariant and returns the economy it describes.
    pub fn validate(&self) -> Result<MarkovEconomy> {
        check_level(self.p)?;
        if self.horizon < 1 {
            bail!(Config, "horizon must be at least 1");
        }
        if self.n_paths < 1 {
            bail!(Config, "n_paths must be at least 1");
        }
        if self.measures.is_empty() {
            bail!(Config, "no measures requested");
        }
        let economy = MarkovEconomy::new(self.matrix()?, self.model()?)?;
        StateVector::from_one_based(self.initial_state, economy.matrix.n_states())?;
        Ok(economy)
    }

    pub fn wants(&self, m: MeasureSelection) -> bool {
        self.measures.contains(&m)
    }
}

/// The two economies of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PaperExperiment {
    GaussianMsci,
    WeibullBbgex,
}

impl core::str::FromStr for PaperExperiment {
    type Err = crate::RiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian_msci" => Ok(PaperExperiment::GaussianMsci),
            "weibull" | "weibull_bbgex" => Ok(PaperExperiment::WeibullBbgex),
            other => bail!(Usage, "unknown experiment {other:?}"),
        }
    }
}

impl PaperExperiment {
    pub fn as_str(self) -> &'static str {
        match self {
            PaperExperiment::GaussianMsci => "gaussian_msci",
            PaperExperiment::WeibullBbgex => "weibull_bbgex",
        }
    }
}

/// The fully populated configuration of one study economy, single path.
pub fn build_paper_experiment(which: PaperExperiment) -> ExperimentConfig {
    let mut params = BTreeMap::new();
    let mut metadata = BTreeMap::new();
    let family = match which {
        PaperExperiment::GaussianMsci => {
            params.insert("mu".to_string(), vec![1169.009625, 1057.675375]);
            params.insert("sigma".to_string(), vec![195.6045, 176.9755]);
            metadata.insert("M".to_string(), MSCI_MEAN);
            metadata.insert("Sigma".to_string(), MSCI_SD);
            metadata.insert("initial_value".to_string(), 1000.0);
            Family::Gaussian
        }
        PaperExperiment::WeibullBbgex => {
            params.insert("lambda".to_string(), vec![7.106295, 6.429505]);
            params.insert("alpha".to_string(), vec![BBGEX_ALPHA, BBGEX_ALPHA]);
            params.insert("theta".to_string(), vec![0.0, 0.0]);
            metadata.insert("lambda_0".to_string(), BBGEX_LAMBDA);
            metadata.insert("alpha_0".to_string(), BBGEX_ALPHA);
            Family::Weibull
        }
    };
    metadata.insert("state_factor_1".to_string(), STATE_FACTORS[0]);
    metadata.insert("state_factor_2".to_string(), STATE_FACTORS[1]);
    ExperimentConfig {
        family,
        params,
        transition_matrix: PAPER_MATRIX.iter().map(|r| r.to_vec()).collect(),
        orientation: MatrixOrientation::Row,
        initial_state: 1,
        p: PAPER_LEVEL,
        horizon: PAPER_HORIZON,
        n_paths: 1,
        seed: 2013,
        measures: vec![MeasureSelection::Var, MeasureSelection::Cvar],
        cvar_mode: CvarMode::PaperPiecewise,
        output: Some(format!("{}.csv", which.as_str())),
        metadata,
    }
}

/// One simulated path and its risk trajectories.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathResult {
    pub path: usize,
    pub seed: u64,
    /// 1-based states `Z_0, ..., Z_{T+1}`.
    pub states: Vec<usize>,
    /// Realized returns `x_0, ..., x_T`.
    pub realized: Vec<f64>,
    pub var: Option<RiskTrajectory>,
    pub cvar: Option<RiskTrajectory>,
}

impl PathResult {
    pub fn trajectory(&self, m: MeasureSelection) -> Option<&RiskTrajectory> {
        match m {
            MeasureSelection::Var => self.var.as_ref(),
            MeasureSelection::Cvar => self.cvar.as_ref(),
        }
    }
}

/// Seed of path `index`.
pub fn path_seed(config: &ExperimentConfig, index: usize) -> u64 {
    derive_seed(config.seed, index as u64)
}

fn recursive_var_closed(models: &[ReturnModel], p: f64) -> Result<Vec<f64>> {
    match models.first() {
        Some(ReturnModel::Gaussian(_)) => {
            let (mut mus, mut sigmas) = (Vec::new(), Vec::new());
            for m in models {
                if let ReturnModel::Gaussian(g) = m {
                    mus.push(g.mu);
                    sigmas.push(g.sigma);
                }
            }
            recursive_var_gaussian_closed(&mus, &sigmas, p)
        }
        Some(ReturnModel::Weibull(_)) => {
            let (mut l, mut a, mut th) = (Vec::new(), Vec::new(), Vec::new());
            for m in models {
                if let ReturnModel::Weibull(w) = m {
                    l.push(w.lambda);
                    a.push(w.alpha);
                    th.push(w.theta);
                }
            }
            recursive_var_weibull_closed(&l, &a, &th, p)
        }
        _ => bail!(Internal, "state-linked models are gaussian or weibull"),
    }
}

/// Simulates path `index` and evaluates every requested measure on it.
pub fn run_path(config: &ExperimentConfig, economy: &MarkovEconomy, index: usize) -> Result<PathResult> {
    let seed = path_seed(config, index);
    run_path_inner(config, economy, index, seed).map_err(|e| e.context(&format!("path {index} (seed {seed})")))
}

fn run_path_inner(config: &ExperimentConfig, economy: &MarkovEconomy, index: usize, seed: u64) -> Result<PathResult> {
    let a = &economy.matrix;
    let n = a.n_states();
    let z0 = StateVector::from_one_based(config.initial_state, n)?;
    let path: ChainPath = simulate_path(a, z0, config.horizon, seed)?;
    let models = economy.model.models_along(&path)?;
    let mut rng = seeded_rng(derive_seed(seed, u64::MAX));
    let realized: Vec<f64> = models.iter().map(|m| m.draw(&mut rng)).collect();
    let (state_vars, state_cvars) = state_level_values(&economy.model, config.p)?;
    let period_states: Vec<usize> = path.states[1..].iter().map(|z| z.index()).collect();

    let var = if config.wants(MeasureSelection::Var) {
        let statics: Vec<f64> = period_states.iter().map(|&i| state_vars[i]).collect();
        let recursive = recursive_var_closed(&models, config.p)?;
        let modulated = modulated_var_trajectory(&economy.model, a, &path, config.p)?;
        Some(RiskTrajectory::new(MeasureKind::Var, config.p, &statics, &recursive, &modulated)?)
    } else {
        None
    };
    let cvar = if config.wants(MeasureSelection::Cvar) {
        let statics: Vec<f64> = period_states.iter().map(|&i| state_cvars[i]).collect();
        let recursive = recursive_cvar(&models, config.p, config.cvar_mode, Some(&realized))?;
        let modulated =
            modulated_cvar_trajectory(&economy.model, a, &path, Some(&realized), config.p, config.cvar_mode)?;
        Some(RiskTrajectory::new(MeasureKind::Cvar, config.p, &statics, &recursive, &modulated)?)
    } else {
        None
    };
    Ok(PathResult {
        path: index,
        seed,
        states: path.states.iter().map(|z| z.one_based()).collect(),
        realized,
        var,
        cvar,
    })
}

/// Runs every path in order and summarizes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<PathResult>, SummaryStats)> {
    let economy = config.validate()?;
    let results: Vec<PathResult> = (0..config.n_paths).map(|i| run_path(config, &economy, i)).collect::<Result<_>>()?;
    let summary = summarize(&results);
    Ok((results, summary))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl ColumnStats {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Self { min, max, mean: if n == 0 { f64::NAN } else { sum / n as f64 } }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureSummary {
    pub measure: MeasureSelection,
    /// Fraction of steps `t ≥ 1` with recursive risk at or below static risk.
    pub recursive_le_static: f64,
    /// Fraction of steps `t ≥ 1` with modulated risk at or below static risk.
    pub modulated_le_static: f64,
    pub static_stats: ColumnStats,
    pub recursive_stats: ColumnStats,
    pub modulated_stats: ColumnStats,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryStats {
    pub n_paths: usize,
    pub measures: Vec<MeasureSummary>,
    /// Whether recursive VaR increments change sign at every step on every path.
    pub recursive_var_alternates: Option<bool>,
}

fn alternates(r: &[f64]) -> bool {
    let d: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
    d.iter().all(|x| *x != 0.0) && d.windows(2).all(|w| (w[0] > 0.0) != (w[1] > 0.0))
}

/// Aggregates path results in the given order.
pub fn summarize(results: &[PathResult]) -> SummaryStats {
    let mut measures = Vec::new();
    for m in [MeasureSelection::Var, MeasureSelection::Cvar] {
        let trajectories: Vec<&RiskTrajectory> = results.iter().filter_map(|r| r.trajectory(m)).collect();
        if trajectories.is_empty() {
            continue;
        }
        let steps = || trajectories.iter().flat_map(|t| t.records.iter().skip(1));
        let total = steps().count().max(1) as f64;
        let records = || trajectories.iter().flat_map(|t| t.records.iter());
        measures.push(MeasureSummary {
            measure: m,
            recursive_le_static: steps().filter(|r| r.recursive <= r.static_risk).count() as f64 / total,
            modulated_le_static: steps().filter(|r| r.modulated <= r.static_risk).count() as f64 / total,
            static_stats: ColumnStats::of(records().map(|r| r.static_risk)),
            recursive_stats: ColumnStats::of(records().map(|r| r.recursive)),
            modulated_stats: ColumnStats::of(records().map(|r| r.modulated)),
        });
    }
    let var_paths: Vec<&RiskTrajectory> = results.iter().filter_map(|r| r.var.as_ref()).collect();
    let recursive_var_alternates =
        (!var_paths.is_empty()).then(|| var_paths.iter().all(|t| alternates(&t.recursive_column())));
    SummaryStats { n_paths: results.len(), measures, recursive_var_alternates }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> ExperimentConfig {
        build_paper_experiment(PaperExperiment::GaussianMsci)
    }

    #[test]
    fn study_constants() {
        let g = gaussian();
        assert_eq!(g.params["mu"], [1169.009625, 1057.675375]);
        assert!((g.params["mu"][0] - MSCI_MEAN * 1.05).abs() < 1e-12 * MSCI_MEAN);
        assert!((g.params["mu"][1] - MSCI_MEAN * 0.95).abs() < 1e-12 * MSCI_MEAN);
        assert!((g.params["sigma"][0] - MSCI_SD * 1.05).abs() < 1e-12 * MSCI_SD);
        assert!((g.params["sigma"][1] - MSCI_SD * 0.95).abs() < 1e-12 * MSCI_SD);
        assert_eq!((g.p, g.horizon, g.initial_state), (0.99, 10, 1));
        let w = build_paper_experiment(PaperExperiment::WeibullBbgex);
        assert!((w.params["lambda"][0] - BBGEX_LAMBDA * 1.05).abs() < 1e-12 * BBGEX_LAMBDA);
        assert!((w.params["lambda"][1] - BBGEX_LAMBDA * 0.95).abs() < 1e-12 * BBGEX_LAMBDA);
        assert_eq!(w.params["alpha"], [0.8016, 0.8016]);
        assert_eq!(w.transition_matrix, [[0.25, 0.75], [0.35, 0.65]]);
        assert!(g.validate().is_ok() && w.validate().is_ok());
    }

    #[test]
    fn validation_errors() {
        let mut c = gaussian();
        c.p = 1.5;
        assert!(c.validate().is_err());
        let mut c = gaussian();
        c.horizon = 0;
        assert!(c.validate().is_err());
        let mut c = gaussian();
        c.initial_state = 3;
        assert!(c.validate().is_err());
        let mut c = gaussian();
        c.params.insert("lambda".to_string(), vec![1.0, 1.0]);
        assert!(c.validate().is_err());
        let mut c = gaussian();
        c.params.insert("mu".to_string(), vec![1.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn gaussian_path_invariants() {
        let mut c = gaussian();
        c.n_paths = 20;
        let (results, summary) = run_experiment(&c).unwrap();
        for r in &results {
            let v = r.var.as_ref().unwrap();
            let cv = r.cvar.as_ref().unwrap();
            assert_eq!(r.states.len(), 12);
            assert_eq!(r.states[0], 1);
            for t in 1..=10 {
                let (a, b) = (&v.records[t], &v.records[t - 1]);
                assert!((a.recursive + b.recursive - a.static_risk).abs() < 1e-10);
            }
            for (rv, rc) in v.records.iter().zip(&cv.records) {
                assert!(rv.static_risk <= rc.static_risk);
            }
        }
        assert_eq!(summary.n_paths, 20);
        let f = summary.measures[0].modulated_le_static;
        assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn weibull_static_values_are_positive() {
        let mut c = build_paper_experiment(PaperExperiment::WeibullBbgex);
        c.n_paths = 5;
        let (results, _) = run_experiment(&c).unwrap();
        for r in results {
            for m in [MeasureSelection::Var, MeasureSelection::Cvar] {
                assert!(r.trajectory(m).unwrap().static_column().iter().all(|v| *v > 0.0));
            }
            assert!(r.realized.iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = gaussian();
        c.n_paths = 3;
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
        let mut d = c.clone();
        d.seed += 1;
        assert_ne!(run_experiment(&c).unwrap().0, run_experiment(&d).unwrap().0);
    }

    #[test]
    fn single_state_modulation_collapses() {
        for which in [PaperExperiment::GaussianMsci, PaperExperiment::WeibullBbgex] {
            let mut c = build_paper_experiment(which);
            c.transition_matrix = vec![vec![1.0]];
            for v in c.params.values_mut() {
                v.truncate(1);
            }
            c.measures = vec![MeasureSelection::Var];
            let (results, summary) = run_experiment(&c).unwrap();
            let v = results[0].var.as_ref().unwrap();
            assert_eq!(v.modulated_column(), v.recursive_column());
            let r = v.recursive_column();
            for t in (1..=10).step_by(2) {
                assert_eq!(r[t], 0.0);
            }
            assert_eq!(summary.recursive_var_alternates, Some(true));
            assert!(results[0].cvar.is_none());
            assert_eq!(summary.measures.len(), 1);
        }
    }

    #[test]
    fn exact_mode_on_a_frozen_chain_matches_the_recursion() {
        let mut c = gaussian();
        c.cvar_mode = CvarMode::Exact;
        c.transition_matrix = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (results, _) = run_experiment(&c).unwrap();
        assert!(results[0].states.iter().all(|&z| z == 1));
        let cv = results[0].cvar.as_ref().unwrap();
        for r in &cv.records {
            assert!((r.modulated - r.recursive).abs() < 1e-9 * (1.0 + r.recursive.abs()));
        }
    }

    #[test]
    fn summary_fractions_ignore_path_order() {
        let mut c = gaussian();
        c.n_paths = 8;
        let (mut results, summary) = run_experiment(&c).unwrap();
        results.reverse();
        let reversed = summarize(&results);
        for (a, b) in summary.measures.iter().zip(&reversed.measures) {
            assert_eq!(a.recursive_le_static, b.recursive_le_static);
            assert_eq!(a.modulated_le_static, b.modulated_le_static);
        }
    }
}
