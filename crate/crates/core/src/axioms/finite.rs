use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{AxiomId, AxiomReport, Witness};
use crate::distributions::{DiscreteDistribution, ReturnModel};
use crate::dynamic::{modulated_recursive_vector, recursive_risk_generic};
use crate::error::{bail, Result};
use crate::markov::{StateVector, TransitionMatrix};
use crate::static_risk::{RiskMeasureSpec, Orientation};

pub const MAX_ATOMS: usize = 64;
pub const MAX_HORIZON: usize = 4;
const MAX_ENUMERATION: usize = 1 << 20;
const TOL: f64 = 1e-9;

/// A process `X_0, ..., X_T` on a finite probability space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProcess {
    probs: Vec<f64>,
    /// `payoffs[atom][t]`.
    payoffs: Vec<Vec<f64>>,
}

impl FiniteProcess {
    pub fn new(probs: Vec<f64>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = probs.len();
        if n == 0 || payoffs.len() != n {
            bail!(Config, "{} atoms but {} payoff rows", n, payoffs.len());
        }
        if n > MAX_ATOMS {
            bail!(Size, "{n} atoms exceeds the limit of {MAX_ATOMS}");
        }
        let width = payoffs[0].len();
        if width == 0 || payoffs.iter().any(|row| row.len() != width) {
            bail!(Config, "payoff rows must share a nonzero length");
        }
        if width - 1 > MAX_HORIZON {
            bail!(Size, "horizon {} exceeds the limit of {MAX_HORIZON}", width - 1);
        }
        if probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            bail!(Domain, "atom probabilities must be positive and sum to 1");
        }
        if payoffs.iter().flatten().any(|v| !v.is_finite()) {
            bail!(Domain, "payoffs must be finite");
        }
        Ok(Self { probs, payoffs })
    }

    pub fn zero(probs: Vec<f64>, horizon: usize) -> Result<Self> {
        let n = probs.len();
        Self::new(probs, vec![vec![0.0; horizon + 1]; n])
    }

    pub fn n_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn horizon(&self) -> usize {
        self.payoffs[0].len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn payoff(&self, atom: usize, t: usize) -> f64 {
        self.payoffs[atom][t]
    }

    /// The law of `X_t`.
    pub fn law(&self, t: usize) -> Result<ReturnModel> {
        let atoms = self.payoffs.iter().map(|row| row[t]).collect();
        Ok(ReturnModel::Discrete(DiscreteDistribution::new(atoms, self.probs.clone())?))
    }

    pub fn laws(&self) -> Result<Vec<ReturnModel>> {
        (0..=self.horizon()).map(|t| self.law(t)).collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.payoffs.iter().flatten().copied().collect()
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let payoffs = self
            .payoffs
            .iter()
            .enumerate()
            .map(|(a, row)| row.iter().enumerate().map(|(t, &v)| f(a, t, v)).collect())
            .collect();
        Self { probs: self.probs.clone(), payoffs }
    }

    /// `1_A X + 1_{A^c} Y` with `A` given as a set of atoms.
    pub fn splice(&self, other: &Self, event: &[bool]) -> Self {
        self.map(|a, t, v| if event[a] { v } else { other.payoffs[a][t] })
    }

    pub fn dominated_by(&self, other: &Self) -> bool {
        self.payoffs.iter().flatten().zip(other.payoffs.iter().flatten()).all(|(x, y)| x <= y)
    }
}

/// Every process on the given atoms whose payoffs are drawn from `values`.
pub fn enumerate_processes(probs: &[f64], values: &[f64], horizon: usize) -> Result<Vec<FiniteProcess>> {
    let cells = probs.len() * (horizon + 1);
    let count = match values.len().checked_pow(cells as u32) {
        Some(c) if c > 0 && c <= MAX_ENUMERATION => c,
        _ => bail!(Size, "enumerating {} values over {cells} cells is out of range", values.len()),
    };
    let width = horizon + 1;
    (0..count)
        .map(|mut code| {
            let mut payoffs = vec![vec![0.0; width]; probs.len()];
            for cell in 0..cells {
                payoffs[cell / width][cell % width] = values[code % values.len()];
                code /= values.len();
            }
            FiniteProcess::new(probs.to_vec(), payoffs)
        })
        .collect()
}

/// Index pairs `(i, j)` with `X_i ≤ X_j` atom by atom at every date.
pub fn dominated_pairs(processes: &[FiniteProcess]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, x) in processes.iter().enumerate() {
        for (j, y) in processes.iter().enumerate() {
            if x.dominated_by(y) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Partitions of the atoms, one per date, each refining the previous one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    /// `cells[t][atom]` is the label of the cell containing `atom` at `t`.
    cells: Vec<Vec<usize>>,
}

impl Filtration {
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self> {
        let Some(first) = cells.first() else {
            bail!(Config, "filtration needs at least one date");
        };
        let n = first.len();
        if cells.iter().any(|c| c.len() != n) {
            bail!(Config, "every partition must label all {n} atoms");
        }
        for t in 1..cells.len() {
            for a in 0..n {
                for b in 0..n {
                    if cells[t][a] == cells[t][b] && cells[t - 1][a] != cells[t - 1][b] {
                        bail!(Config, "partition at t = {t} does not refine t = {}", t - 1);
                    }
                }
            }
        }
        Ok(Self { cells })
    }

    /// `F_t = {∅, Ω}` for every `t`.
    pub fn trivial(n_atoms: usize, horizon: usize) -> Self {
        Self { cells: vec![vec![0; n_atoms]; horizon + 1] }
    }

    /// Trivial at `t = 0`; every atom is revealed from `t = 1` on.
    pub fn revealing(n_atoms: usize, horizon: usize) -> Self {
        let mut cells = vec![(0..n_atoms).collect::<Vec<_>>(); horizon + 1];
        cells[0] = vec![0; n_atoms];
        Self { cells }
    }

    pub fn horizon(&self) -> usize {
        self.cells.len() - 1
    }

    /// All events of `F_t` as atom indicators.
    pub fn events(&self, t: usize) -> Result<Vec<Vec<bool>>> {
        let labels = &self.cells[t];
        let mut distinct: Vec<usize> = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() > 16 {
            bail!(Size, "F_{t} has {} cells", distinct.len());
        }
        Ok((0u32..1 << distinct.len())
            .map(|mask| {
                labels
                    .iter()
                    .map(|l| {
                        let k = distinct.binary_search(l).unwrap_or(0);
                        mask & (1 << k) != 0
                    })
                    .collect()
            })
            .collect())
    }
}

/// A dynamic risk measure evaluated on finite processes.
pub trait DynamicMeasure {
    fn name(&self) -> String;

    /// Outcomes per atom in the output of [`DynamicMeasure::evaluate`]; a
    /// measure that also depends on a chain state reports one per state.
    fn outcomes_per_atom(&self) -> usize {
        1
    }

    /// `R_t` on every outcome, indexed `[t][atom * outcomes_per_atom + k]`.
    fn evaluate(&self, x: &FiniteProcess) -> Result<Vec<Vec<f64>>>;
}

/// `R_t = R(X_t + cash R_{t-1})` with a static measure applied to the law of
/// each `X_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursiveMeasure {
    pub spec: RiskMeasureSpec,
}

impl RecursiveMeasure {
    pub fn new(spec: RiskMeasureSpec) -> Self {
        Self { spec }
    }

    pub fn risks(&self, x: &FiniteProcess) -> Result<Vec<f64>> {
        recursive_risk_generic(&x.laws()?, &self.spec)
    }
}

impl DynamicMeasure for RecursiveMeasure {
    fn name(&self) -> String {
        format!("recursive {}", super::measure_label(&self.spec))
    }

    fn evaluate(&self, x: &FiniteProcess) -> Result<Vec<Vec<f64>>> {
        Ok(self.risks(x)?.into_iter().map(|r| vec![r; x.n_atoms()]).collect())
    }
}

/// `R^Z_0 = R(X_0)` and `R^Z_t = <R̄_t, A Z>` where state `i` runs the
/// recursion on `scales[i] X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedMeasure {
    pub spec: RiskMeasureSpec,
    pub matrix: TransitionMatrix,
    pub scales: Vec<f64>,
}

impl ModulatedMeasure {
    pub fn new(spec: RiskMeasureSpec, matrix: TransitionMatrix, scales: Vec<f64>) -> Result<Self> {
        if scales.len() != matrix.n_states() || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            bail!(Config, "need one positive scale per state");
        }
        Ok(Self { spec, matrix, scales })
    }

    /// The base recursion of every state, indexed `[state][t]`.
    pub fn state_risks(&self, x: &FiniteProcess) -> Result<Vec<Vec<f64>>> {
        let base = RecursiveMeasure::new(self.spec);
        self.scales.iter().map(|&s| base.risks(&x.map(|_, _, v| s * v))).collect()
    }
}

impl DynamicMeasure for ModulatedMeasure {
    fn name(&self) -> String {
        format!("modulated {}", super::measure_label(&self.spec))
    }

    fn outcomes_per_atom(&self) -> usize {
        self.matrix.n_states()
    }

    fn evaluate(&self, x: &FiniteProcess) -> Result<Vec<Vec<f64>>> {
        let n = self.matrix.n_states();
        let per_state = self.state_risks(x)?;
        let r0 = self.spec.evaluate(&x.law(0)?)?;
        let mut out = vec![vec![r0; x.n_atoms() * n]];
        for t in 1..=x.horizon() {
            let risks_t: Vec<f64> = per_state.iter().map(|r| r[t]).collect();
            let by_state: Vec<f64> = (0..n)
                .map(|z| modulated_recursive_vector(&risks_t, &self.matrix, StateVector::new(z, n)?))
                .collect::<Result<_>>()?;
            out.push((0..x.n_atoms()).flat_map(|_| by_state.iter().copied()).collect());
        }
        Ok(out)
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + TOL * (1.0 + a.abs().max(b.abs()))
}

fn eq(a: f64, b: f64) -> bool {
    le(a, b) && le(b, a)
}

fn all_le(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| le(*x, *y))
}

/// First outcome where `holds(lhs, rhs)` fails.
fn first_failure(a: &[f64], b: &[f64], holds: impl Fn(f64, f64) -> bool) -> Option<(usize, f64, f64)> {
    a.iter().zip(b).enumerate().find(|(_, (x, y))| !holds(**x, **y)).map(|(k, (x, y))| (k, *x, *y))
}

fn witness(label: String, probs: &[f64], inputs: &[&FiniteProcess], lhs: f64, rhs: f64) -> Witness {
    Witness { label, probs: probs.to_vec(), inputs: inputs.iter().map(|p| p.flatten()).collect(), lhs, rhs }
}

fn form(axiom: AxiomId) -> &'static str {
    match axiom {
        AxiomId::D1 => "R_t(0) = 0",
        AxiomId::D2 => "X <= Y and R(X_0) <= R(Y_0) => R_t(X) >= R_t(Y)",
        AxiomId::D3 => "R_t(X with X_t + m) = R_t(X) - m, m constant",
        AxiomId::D4 => "R_t(1_A X + 1_A^c Y) = 1_A R_t(X) + 1_A^c R_t(Y), A in F_t",
        AxiomId::D5 => "R_t(X) <= R_t(Y) => R_s(X) <= R_s(Y), s <= t",
        AxiomId::D6 => "R_t(hX + (1-h)Y) <= h R_t(X) + (1-h) R_t(Y), h constant in [0, 1]",
        _ => "R_t(kX) = k R_t(X), k > 0 constant",
    }
}

/// Checks a dynamic axiom exactly on every outcome over all pairs drawn from
/// `processes`, stopping at the first violation.
pub fn check_dynamic_axiom(
    axiom: AxiomId,
    measure: &dyn DynamicMeasure,
    processes: &[FiniteProcess],
    filtration: &Filtration,
) -> Result<AxiomReport> {
    if axiom.is_static() {
        bail!(Usage, "{axiom} is not a dynamic axiom");
    }
    let Some(first) = processes.first() else {
        bail!(Config, "no processes to check");
    };
    let horizon = first.horizon();
    let n_atoms = first.n_atoms();
    if processes.iter().any(|p| p.horizon() != horizon || p.probs() != first.probs()) {
        bail!(Config, "processes must share atoms and horizon");
    }
    if filtration.horizon() != horizon || filtration.cells[0].len() != n_atoms {
        bail!(Config, "filtration does not match the processes");
    }
    let name = measure.name();
    let form = String::from(form(axiom));
    let probs = first.probs();
    let k = measure.outcomes_per_atom();
    let fail = |cases, w| Ok(AxiomReport::violated(axiom, name.clone(), form.clone(), cases, w));
    let mut cases = 0usize;

    let needs_cache = matches!(axiom, AxiomId::D2 | AxiomId::D4 | AxiomId::D5 | AxiomId::D6 | AxiomId::D3 | AxiomId::D7);
    let cache: Vec<Vec<Vec<f64>>> = if needs_cache {
        processes.iter().map(|p| measure.evaluate(p)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    match axiom {
        AxiomId::D1 => {
            let zero = FiniteProcess::zero(probs.to_vec(), horizon)?;
            let r = measure.evaluate(&zero)?;
            cases = 1;
            for (t, row) in r.iter().enumerate() {
                if let Some((_, v, _)) = row.iter().map(|v| (0, *v, 0.0)).find(|(_, v, _)| !eq(*v, 0.0)) {
                    return fail(cases, witness(format!("t = {t}"), probs, &[&zero], v, 0.0));
                }
            }
        }
        AxiomId::D2 => {
            for (i, j) in dominated_pairs(processes) {
                let (rx, ry) = (&cache[i], &cache[j]);
                if !all_le(&rx[0], &ry[0]) {
                    continue;
                }
                cases += 1;
                for t in 0..=horizon {
                    if let Some((o, a, b)) = first_failure(&rx[t], &ry[t], |a, b| le(b, a)) {
                        let label = format!("t = {t}, outcome {o}: X <= Y but R_t(X) < R_t(Y)");
                        return fail(cases, witness(label, probs, &[&processes[i], &processes[j]], a, b));
                    }
                }
            }
        }
        AxiomId::D3 => {
            for (i, x) in processes.iter().enumerate() {
                for t in 0..=horizon {
                    for m in [-1.5, 0.5, 2.0] {
                        cases += 1;
                        let shifted = x.map(|_, s, v| if s == t { v + m } else { v });
                        let lhs = &measure.evaluate(&shifted)?[t];
                        let rhs: Vec<f64> = cache[i][t].iter().map(|r| r - m).collect();
                        if let Some((o, a, b)) = first_failure(lhs, &rhs, eq) {
                            let label = format!("t = {t}, outcome {o}, m = {m}");
                            return fail(cases, witness(label, probs, &[x], a, b));
                        }
                    }
                }
            }
        }
        AxiomId::D4 => {
            for t in 0..=horizon {
                let events = filtration.events(t)?;
                for (i, x) in processes.iter().enumerate() {
                    for (j, y) in processes.iter().enumerate() {
                        for event in &events {
                            cases += 1;
                            let lhs = &measure.evaluate(&x.splice(y, event))?[t];
                            let rhs: Vec<f64> = (0..lhs.len())
                                .map(|o| if event[o / k] { cache[i][t][o] } else { cache[j][t][o] })
                                .collect();
                            if let Some((o, a, b)) = first_failure(lhs, &rhs, eq) {
                                let label = format!("t = {t}, outcome {o}, A = {event:?}");
                                return fail(cases, witness(label, probs, &[x, y], a, b));
                            }
                        }
                    }
                }
            }
        }
        AxiomId::D5 => {
            for i in 0..processes.len() {
                for j in 0..processes.len() {
                    for t in 1..=horizon {
                        if !all_le(&cache[i][t], &cache[j][t]) {
                            continue;
                        }
                        cases += 1;
                        for s in 0..t {
                            if let Some((o, a, b)) = first_failure(&cache[i][s], &cache[j][s], le) {
                                let label = format!("R_{t}(X) <= R_{t}(Y) but R_{s}(X) > R_{s}(Y) at outcome {o}");
                                return fail(cases, witness(label, probs, &[&processes[i], &processes[j]], a, b));
                            }
                        }
                    }
                }
            }
        }
        AxiomId::D6 => {
            for (i, x) in processes.iter().enumerate() {
                for (j, y) in processes.iter().enumerate() {
                    for h in [0.25, 0.5, 0.75] {
                        cases += 1;
                        let mix = x.map(|a, t, v| h * v + (1.0 - h) * y.payoff(a, t));
                        let lhs = measure.evaluate(&mix)?;
                        for t in 0..=horizon {
                            let rhs: Vec<f64> =
                                cache[i][t].iter().zip(&cache[j][t]).map(|(a, b)| h * a + (1.0 - h) * b).collect();
                            if let Some((o, a, b)) = first_failure(&lhs[t], &rhs, le) {
                                let label = format!("t = {t}, outcome {o}, h = {h}");
                                return fail(cases, witness(label, probs, &[x, y], a, b));
                            }
                        }
                    }
                }
            }
        }
        _ => {
            for (i, x) in processes.iter().enumerate() {
                for m in [0.5, 2.0, 3.0] {
                    cases += 1;
                    let lhs = measure.evaluate(&x.map(|_, _, v| m * v))?;
                    for t in 0..=horizon {
                        let rhs: Vec<f64> = cache[i][t].iter().map(|r| m * r).collect();
                        if let Some((o, a, b)) = first_failure(&lhs[t], &rhs, eq) {
                            let label = format!("t = {t}, outcome {o}, k = {m}");
                            return fail(cases, witness(label, probs, &[x], a, b));
                        }
                    }
                }
            }
        }
    }
    Ok(AxiomReport::holds(axiom, name, form, cases))
}

/// D2 premise and conclusion on one pair of risk trajectories.
fn monotone_on(x: &FiniteProcess, y: &FiniteProcess, rx: &[Vec<f64>], ry: &[Vec<f64>]) -> bool {
    !x.dominated_by(y) || !all_le(&rx[0], &ry[0]) || rx.iter().zip(ry).all(|(a, b)| all_le(b, a))
}

/// D5 on one pair of risk trajectories.
fn consistent_on(rx: &[Vec<f64>], ry: &[Vec<f64>]) -> bool {
    (1..rx.len()).all(|t| !all_le(&rx[t], &ry[t]) || (0..t).all(|s| all_le(&rx[s], &ry[s])))
}

/// For every pair on which each state's base recursion satisfies D2 (or D5),
/// checks that the modulated measure satisfies it too.
pub fn check_modulation_inheritance(
    axiom: AxiomId,
    measure: &ModulatedMeasure,
    processes: &[FiniteProcess],
) -> Result<AxiomReport> {
    if !matches!(axiom, AxiomId::D2 | AxiomId::D5) {
        bail!(Usage, "inheritance is checked for D2 and D5 only");
    }
    let name = measure.name();
    let form = format!("{} for every state's base recursion => {} for the modulated measure", axiom, axiom);
    let wrap = |v: Vec<f64>| -> Vec<Vec<f64>> { v.into_iter().map(|r| vec![r]).collect() };
    let mut base = Vec::with_capacity(processes.len());
    let mut modulated = Vec::with_capacity(processes.len());
    for p in processes {
        base.push(measure.state_risks(p)?.into_iter().map(wrap).collect::<Vec<_>>());
        modulated.push(measure.evaluate(p)?);
    }
    let mut cases = 0;
    for (i, x) in processes.iter().enumerate() {
        for (j, y) in processes.iter().enumerate() {
            let holds = |rx: &[Vec<f64>], ry: &[Vec<f64>]| match axiom {
                AxiomId::D2 => monotone_on(x, y, rx, ry),
                _ => consistent_on(rx, ry),
            };
            if !base[i].iter().zip(&base[j]).all(|(bx, by)| holds(bx, by)) {
                continue;
            }
            cases += 1;
            if !holds(&modulated[i], &modulated[j]) {
                let w = witness(
                    String::from("every base recursion satisfies the axiom on this pair"),
                    x.probs(),
                    &[x, y],
                    0.0,
                    0.0,
                );
                return Ok(AxiomReport::violated(axiom, name, form, cases, w));
            }
        }
    }
    Ok(AxiomReport::holds(axiom, name, form, cases))
}

/// The two-state matrix and scales used by the modulated measure in the
/// standard suite.
pub fn standard_modulated_measure(spec: RiskMeasureSpec) -> Result<ModulatedMeasure> {
    let matrix = TransitionMatrix::from_nested(
        &[vec![0.25, 0.75], vec![0.35, 0.65]],
        crate::markov::MatrixOrientation::Row,
    )?;
    ModulatedMeasure::new(spec.with_orientation(Orientation::LowerTail), matrix, vec![1.05, 0.95])
}
