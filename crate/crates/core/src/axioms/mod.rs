//! Executable checks of the static axioms P1–P4 and the dynamic axioms
//! D1–D7, the acceptable-set representation of a risk measure, and a
//! generator of VaR sub-additivity counterexamples.

mod finite;

pub use finite::{
    check_dynamic_axiom, check_modulation_inheritance, dominated_pairs, enumerate_processes, standard_modulated_measure,
    DynamicMeasure,
    Filtration, FiniteProcess, ModulatedMeasure, RecursiveMeasure, MAX_ATOMS, MAX_HORIZON,
};

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::distributions::{DiscreteDistribution, EmpiricalSample, ReturnModel};
use crate::error::{bail, Result};
use crate::rng::seeded_rng;
use crate::static_risk::{MeasureKind, Orientation, RiskMeasureSpec};

const TOL: f64 = 1e-9;
const SAMPLE_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AxiomId {
    P1,
    P2,
    P3,
    P4,
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
}

impl AxiomId {
    pub fn name(self) -> &'static str {
        match self {
            AxiomId::P1 | AxiomId::D2 => "monotonicity",
            AxiomId::P2 | AxiomId::D3 => "translation invariance",
            AxiomId::P3 => "sub-additivity",
            AxiomId::P4 | AxiomId::D7 => "positive homogeneity",
            AxiomId::D1 => "normalization",
            AxiomId::D4 => "local property",
            AxiomId::D5 => "time consistency",
            AxiomId::D6 => "convexity",
        }
    }

    pub fn is_static(self) -> bool {
        matches!(self, AxiomId::P1 | AxiomId::P2 | AxiomId::P3 | AxiomId::P4)
    }
}

impl core::fmt::Display for AxiomId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        core::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Holds,
    Violated,
}

/// Inputs on which an axiom failed, with both sides of the broken relation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub label: String,
    /// Atom probabilities shared by every input.
    pub probs: Vec<f64>,
    /// One row per input; processes are flattened atom by atom.
    pub inputs: Vec<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomReport {
    pub axiom: AxiomId,
    pub measure: String,
    /// The statement that was checked, with its orientation.
    pub form: String,
    pub verdict: Verdict,
    pub cases: usize,
    pub witness: Option<Witness>,
}

impl AxiomReport {
    fn holds(axiom: AxiomId, measure: String, form: String, cases: usize) -> Self {
        Self { axiom, measure, form, verdict: Verdict::Holds, cases, witness: None }
    }

    fn violated(axiom: AxiomId, measure: String, form: String, cases: usize, witness: Witness) -> Self {
        Self { axiom, measure, form, verdict: Verdict::Violated, cases, witness: Some(witness) }
    }

    pub fn holds_verdict(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

pub fn measure_label(spec: &RiskMeasureSpec) -> String {
    let kind = match spec.kind {
        MeasureKind::Var => "var",
        MeasureKind::Cvar => "cvar",
    };
    format!("{kind}(p={}, {})", spec.p, spec.orientation.as_str())
}

fn empirical(values: Vec<f64>) -> Result<ReturnModel> {
    Ok(ReturnModel::Empirical(EmpiricalSample::new(values)?))
}

fn random_sample<R: Rng>(rng: &mut R) -> Vec<f64> {
    (0..SAMPLE_SIZE).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

fn uniform_probs(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Checks a static axiom on `trials` random joint samples of 16 equally
/// likely outcomes.
///
/// P1 is checked as printed (`X ≤ Y ⇒ R(X) ≥ R(Y)`) under `lower_tail` and in
/// reversed form under `upper_tail`. P2 adds cash, which lowers the measure
/// by the same amount in either orientation. For VaR, P3 first tries the
/// enumerated counterexample of [`var_subadditivity_witness`].
pub fn check_static_axiom(axiom: AxiomId, spec: &RiskMeasureSpec, trials: usize, seed: u64) -> Result<AxiomReport> {
    if !axiom.is_static() {
        bail!(Usage, "{axiom} is not a static axiom");
    }
    let label = measure_label(spec);
    let mut rng = seeded_rng(seed);
    let form = match (axiom, spec.orientation) {
        (AxiomId::P1, Orientation::LowerTail) => "X <= Y => R(X) >= R(Y)",
        (AxiomId::P1, Orientation::UpperTail) => "X <= Y => R(X) <= R(Y) (X read as a loss)",
        (AxiomId::P2, _) => "R(X + cash m) = R(X) - m",
        (AxiomId::P3, _) => "R(X + Y) <= R(X) + R(Y)",
        _ => "R(kX) = k R(X), k > 0",
    }
    .to_string();
    let mut cases = 0;

    if axiom == AxiomId::P3 && spec.kind == MeasureKind::Var {
        let w = var_subadditivity_witness(spec.p.max(0.5 + 1e-9))?;
        let (x, y, sum) = match spec.orientation {
            Orientation::UpperTail => (w.x.clone(), w.y.clone(), w.joint_sum()?),
            // losses become values under the negating orientation
            Orientation::LowerTail => (negate(&w.x)?, negate(&w.y)?, negate(&w.joint_sum()?)?),
        };
        cases += 1;
        let rx = spec.evaluate(&ReturnModel::Discrete(x))?;
        let ry = spec.evaluate(&ReturnModel::Discrete(y))?;
        let rs = spec.evaluate(&ReturnModel::Discrete(sum))?;
        if rs > rx + ry + TOL * (1.0 + rs.abs()) {
            let (xs, ys, probs) = w.joint_outcomes();
            let witness = Witness {
                label: format!("independent two-point losses, P(loss = {}) = {}", w.loss, w.q),
                probs,
                inputs: vec![xs, ys],
                lhs: rs,
                rhs: rx + ry,
            };
            return Ok(AxiomReport::violated(axiom, label, form, cases, witness));
        }
    }

    for _ in 0..trials {
        cases += 1;
        let x = random_sample(&mut rng);
        let probs = uniform_probs(x.len());
        let rx = spec.evaluate(&empirical(x.clone())?)?;
        let failure = match axiom {
            AxiomId::P1 => {
                let y: Vec<f64> = x.iter().map(|&v| v + rng.gen_range(0.0..5.0)).collect();
                let ry = spec.evaluate(&empirical(y.clone())?)?;
                let ok = match spec.orientation {
                    Orientation::LowerTail => rx >= ry - TOL * (1.0 + ry.abs()),
                    Orientation::UpperTail => rx <= ry + TOL * (1.0 + ry.abs()),
                };
                (!ok).then(|| ("Y = X + nonnegative".to_string(), vec![x, y], rx, ry))
            }
            AxiomId::P2 => {
                let m = rng.gen_range(-20.0..20.0);
                let lhs = spec.evaluate_with_cash(&empirical(x.clone())?, m)?;
                (!close(lhs, rx - m)).then(|| (format!("cash m = {m}"), vec![x], lhs, rx - m))
            }
            AxiomId::P3 => {
                let y = random_sample(&mut rng);
                let ry = spec.evaluate(&empirical(y.clone())?)?;
                let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let rs = spec.evaluate(&empirical(s)?)?;
                (rs > rx + ry + TOL * (1.0 + rs.abs())).then(|| ("joint sample".to_string(), vec![x, y], rs, rx + ry))
            }
            _ => {
                let k = rng.gen_range(0.01..10.0);
                let lhs = spec.evaluate(&empirical(x.iter().map(|v| k * v).collect())?)?;
                (!close(lhs, k * rx)).then(|| (format!("k = {k}"), vec![x], lhs, k * rx))
            }
        };
        if let Some((note, inputs, lhs, rhs)) = failure {
            let witness = Witness { label: note, probs, inputs, lhs, rhs };
            return Ok(AxiomReport::violated(axiom, label, form, cases, witness));
        }
    }
    Ok(AxiomReport::holds(axiom, label, form, cases))
}

/// Convexity of a static measure on random joint samples:
/// `R(λX + (1-λ)Y) ≤ λR(X) + (1-λ)R(Y)`.
pub fn check_static_convexity(spec: &RiskMeasureSpec, trials: usize, seed: u64) -> Result<AxiomReport> {
    let mut rng = seeded_rng(seed);
    let form = "R(lX + (1-l)Y) <= l R(X) + (1-l) R(Y), l in [0, 1]".to_string();
    for case in 1..=trials {
        let x = random_sample(&mut rng);
        let y = random_sample(&mut rng);
        let l: f64 = rng.gen_range(0.0..=1.0);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| l * a + (1.0 - l) * b).collect();
        let lhs = spec.evaluate(&empirical(mix)?)?;
        let rhs = l * spec.evaluate(&empirical(x.clone())?)? + (1.0 - l) * spec.evaluate(&empirical(y.clone())?)?;
        if lhs > rhs + TOL * (1.0 + rhs.abs()) {
            let witness =
                Witness { label: format!("l = {l}"), probs: uniform_probs(x.len()), inputs: vec![x, y], lhs, rhs };
            return Ok(AxiomReport::violated(AxiomId::D6, measure_label(spec), form, case, witness));
        }
    }
    Ok(AxiomReport::holds(AxiomId::D6, measure_label(spec), form, trials))
}

fn negate(d: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    DiscreteDistribution::new(d.atoms().iter().map(|a| -a).collect(), d.probs().to_vec())
}

/// Two independent losses taking `loss` with probability `q` and 0 otherwise,
/// whose sum has a larger VaR than the sum of their VaRs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubadditivityWitness {
    pub p: f64,
    pub q: f64,
    pub loss: f64,
    pub x: DiscreteDistribution,
    pub y: DiscreteDistribution,
    pub var_x: f64,
    pub var_y: f64,
    pub var_sum: f64,
    pub margin: f64,
}

impl SubadditivityWitness {
    /// The four joint outcomes `(x, y, probability)`.
    pub fn joint_outcomes(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(4);
        let mut ys = Vec::with_capacity(4);
        let mut ps = Vec::with_capacity(4);
        for (&a, &pa) in self.x.atoms().iter().zip(self.x.probs()) {
            for (&b, &pb) in self.y.atoms().iter().zip(self.y.probs()) {
                xs.push(a);
                ys.push(b);
                ps.push(pa * pb);
            }
        }
        (xs, ys, ps)
    }

    pub fn joint_sum(&self) -> Result<DiscreteDistribution> {
        let (xs, ys, ps) = self.joint_outcomes();
        DiscreteDistribution::new(xs.iter().zip(&ys).map(|(a, b)| a + b).collect(), ps)
    }
}

/// Searches `q = (1-p) j / 5` for `j = 4, 3, 2, 1` and returns the first
/// two-point pair with a positive VaR excess.
pub fn var_subadditivity_witness(p: f64) -> Result<SubadditivityWitness> {
    if !(p > 0.5 && p < 1.0) {
        bail!(Domain, "sub-additivity witness needs 0.5 < p < 1, got {p}");
    }
    let loss = 10.0;
    let spec = RiskMeasureSpec::var(p)?;
    for j in (1..=4).rev() {
        let q = (1.0 - p) * j as f64 / 5.0;
        let x = DiscreteDistribution::new(vec![0.0, loss], vec![1.0 - q, q])?;
        let y = x.clone();
        let var_x = spec.evaluate(&ReturnModel::Discrete(x.clone()))?;
        let var_y = spec.evaluate(&ReturnModel::Discrete(y.clone()))?;
        let mut w = SubadditivityWitness { p, q, loss, x, y, var_x, var_y, var_sum: 0.0, margin: 0.0 };
        w.var_sum = spec.evaluate(&ReturnModel::Discrete(w.joint_sum()?))?;
        w.margin = w.var_sum - (var_x + var_y);
        if w.margin > 0.0 {
            return Ok(w);
        }
    }
    bail!(Internal, "no sub-additivity witness found at p = {p}")
}

/// `inf{m : R(X + cash m) ≤ 0}` by bisection on `[-B, B]`,
/// `B = 1 + 2 max|x|` over the support (or a wide quantile range).
pub fn risk_from_acceptable_set(spec: &RiskMeasureSpec, model: &ReturnModel) -> Result<f64> {
    let scale = match model {
        ReturnModel::Empirical(s) => s.values().iter().fold(0.0f64, |m, v| m.max(v.abs())),
        ReturnModel::Discrete(d) => d.atoms().iter().fold(0.0f64, |m, v| m.max(v.abs())),
        _ => model.quantile(1e-6)?.abs().max(model.quantile(1.0 - 1e-6)?.abs()),
    };
    let bound = 1.0 + 2.0 * scale;
    let g = |m: f64| spec.evaluate_with_cash(model, m);
    let (mut lo, mut hi) = (-bound, bound);
    if g(lo)? <= 0.0 || g(hi)? > 0.0 {
        bail!(Bracket, "acceptable-set bracket [{lo}, {hi}] does not straddle the boundary");
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The measures covered by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SuiteMeasure {
    Var,
    Cvar,
    RecursiveVar,
    ModulatedVar,
}

impl SuiteMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteMeasure::Var => "var",
            SuiteMeasure::Cvar => "cvar",
            SuiteMeasure::RecursiveVar => "recursive-var",
            SuiteMeasure::ModulatedVar => "modulated-var",
        }
    }
}

impl core::str::FromStr for SuiteMeasure {
    type Err = crate::RiskError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "var" => SuiteMeasure::Var,
            "cvar" => SuiteMeasure::Cvar,
            "recursive-var" => SuiteMeasure::RecursiveVar,
            "modulated-var" => SuiteMeasure::ModulatedVar,
            other => bail!(Usage, "unknown measure {other:?}"),
        })
    }
}

/// A report together with the verdict the suite expects.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteEntry {
    pub expected: Verdict,
    /// Which variant of a check this is (filtration or inheritance), when several are run.
    pub variant: Option<String>,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub report: AxiomReport,
}

impl SuiteEntry {
    pub fn as_expected(&self) -> bool {
        self.expected == self.report.verdict
    }
}

/// Level used by the suite.
pub const SUITE_LEVEL: f64 = 0.95;

/// Runs every check for one measure. Static measures get P1–P4 on `trials`
/// random samples. Dynamic measures get D1, D2, D4 and D5 on every two-atom
/// process with payoffs in `{0, 1}` up to horizon 4 (horizon 2 for D4, under
/// both the trivial and the revealing filtration).
pub fn run_suite(measure: SuiteMeasure, trials: usize, seed: u64) -> Result<Vec<SuiteEntry>> {
    let entry = |report: AxiomReport, expected: Verdict, variant: Option<&str>| SuiteEntry {
        expected,
        variant: variant.map(String::from),
        report,
    };
    let spec = |kind| RiskMeasureSpec::new(kind, SUITE_LEVEL, Orientation::LowerTail);
    let mut out = Vec::new();
    match measure {
        SuiteMeasure::Var | SuiteMeasure::Cvar => {
            let kind = if measure == SuiteMeasure::Var { MeasureKind::Var } else { MeasureKind::Cvar };
            let s = spec(kind)?;
            for axiom in [AxiomId::P1, AxiomId::P2, AxiomId::P3, AxiomId::P4] {
                let expected = if axiom == AxiomId::P3 && kind == MeasureKind::Var {
                    Verdict::Violated
                } else {
                    Verdict::Holds
                };
                out.push(entry(check_static_axiom(axiom, &s, trials, seed)?, expected, None));
            }
        }
        SuiteMeasure::RecursiveVar | SuiteMeasure::ModulatedVar => {
            let s = spec(MeasureKind::Var)?;
            let recursive = RecursiveMeasure::new(s);
            let modulated = standard_modulated_measure(s)?;
            let dynamic: &dyn DynamicMeasure =
                if measure == SuiteMeasure::RecursiveVar { &recursive } else { &modulated };
            let probs = [0.5, 0.5];
            let full = enumerate_processes(&probs, &[0.0, 1.0], MAX_HORIZON)?;
            let short = enumerate_processes(&probs, &[0.0, 1.0], 2)?;
            let trivial = Filtration::trivial(2, MAX_HORIZON);
            for axiom in [AxiomId::D1, AxiomId::D2, AxiomId::D5] {
                out.push(entry(check_dynamic_axiom(axiom, dynamic, &full, &trivial)?, Verdict::Holds, None));
            }
            for (label, f) in [("trivial filtration", Filtration::trivial(2, 2)), ("revealing filtration", Filtration::revealing(2, 2))] {
                let report = check_dynamic_axiom(AxiomId::D4, dynamic, &short, &f)?;
                out.push(entry(report, Verdict::Holds, Some(label)));
            }
            if measure == SuiteMeasure::ModulatedVar {
                for axiom in [AxiomId::D2, AxiomId::D5] {
                    let report = check_modulation_inheritance(axiom, &modulated, &full)?;
                    out.push(entry(report, Verdict::Holds, Some("inheritance")));
                }
            }
        }
    }
    Ok(out)
}
