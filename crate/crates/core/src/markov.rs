//! Finite-state economy chain `Z_t` on unit vectors, with the decomposition
//! `Z_t = A Z_{t-1} + M_t` and parameters linked to the next state.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::distributions::{GaussianParams, ReturnModel, WeibullParams};
use crate::error::{bail, Result};
use crate::rng::seeded_rng;

const STOCHASTIC_TOL: f64 = 1e-12;

/// How a nested array of probabilities is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MatrixOrientation {
    /// `rows[i][j] = P(next = j | current = i)`.
    Row,
    /// `rows[j][i] = P(next = j | current = i)`.
    #[default]
    Column,
}

impl MatrixOrientation {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixOrientation::Row => "row",
            MatrixOrientation::Column => "column",
        }
    }
}

/// Column-stochastic transition matrix: `entry(j, i) = P(Z_t = e_j | Z_{t-1} = e_i)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitionMatrix {
    n: usize,
    // row-major storage of the column-stochastic matrix
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Reads a square nested array in the given orientation.
    pub fn from_nested(rows: &[Vec<f64>], orientation: MatrixOrientation) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            bail!(Config, "transition matrix must have at least one state");
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            bail!(Config, "transition matrix row {} has {} entries, expected {n}", bad + 1, rows[bad].len());
        }
        let mut entries = vec![0.0; n * n];
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let (j, i) = match orientation {
                    MatrixOrientation::Row => (c, r),
                    MatrixOrientation::Column => (r, c),
                };
                entries[j * n + i] = v;
            }
        }
        let m = Self { n, entries };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    fn validate(&self) -> Result<()> {
        if let Some(v) = self.entries.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            bail!(InvalidParams, "transition probability {v} outside [0, 1]");
        }
        for i in 0..self.n {
            let sum: f64 = (0..self.n).map(|j| self.entry(j, i)).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                bail!(
                    InvalidParams,
                    "transition probabilities out of state {} sum to {sum}; check the matrix orientation",
                    i + 1
                );
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    /// `P(next = j | current = i)`, 0-based.
    pub fn entry(&self, j: usize, i: usize) -> f64 {
        self.entries[j * self.n + i]
    }

    /// Distribution of the next state given the current state `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.entry(j, i)).collect()
    }

    /// The matrix as a nested array in the requested orientation.
    pub fn to_nested(&self, orientation: MatrixOrientation) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|r| {
                (0..self.n)
                    .map(|c| match orientation {
                        MatrixOrientation::Row => self.entry(c, r),
                        MatrixOrientation::Column => self.entry(r, c),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[r * n + c] = (0..n).map(|k| self.entry(r, k) * other.entry(k, c)).sum();
            }
        }
        TransitionMatrix { n, entries }
    }

    pub fn power(&self, k: u32) -> TransitionMatrix {
        (0..k).fold(TransitionMatrix::identity(self.n), |acc, _| acc.mul(self))
    }

    /// `A v` for a vector over states.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.entry(j, i) * v[i]).sum()).collect()
    }

    /// Stationary distribution by power iteration from the uniform vector.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let mut pi = vec![1.0 / self.n as f64; self.n];
        for _ in 0..100_000 {
            let next = self.apply(&pi);
            let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < 1e-15 {
                return Ok(pi);
            }
        }
        bail!(Numeric, "power iteration did not converge; the chain may be periodic")
    }
}

/// A unit vector `e_i`, stored 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateVector {
    index: usize,
}

impl StateVector {
    pub fn new(index: usize, n_states: usize) -> Result<Self> {
        if index >= n_states {
            bail!(Config, "state {} outside 1..={n_states}", index + 1);
        }
        Ok(Self { index })
    }

    pub fn from_one_based(k: usize, n_states: usize) -> Result<Self> {
        if k == 0 || k > n_states {
            bail!(Config, "state {k} outside 1..={n_states}");
        }
        Ok(Self { index: k - 1 })
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn one_based(self) -> usize {
        self.index + 1
    }

    pub fn unit(self, n_states: usize) -> Vec<f64> {
        let mut e = vec![0.0; n_states];
        e[self.index] = 1.0;
        e
    }
}

/// `Z_0, ..., Z_{T+1}` with the final state duplicated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainPath {
    pub states: Vec<StateVector>,
    pub seed: u64,
}

impl ChainPath {
    /// Builds a path from `Z_0..Z_T`, appending `Z_{T+1} = Z_T`.
    pub fn from_states(a: &TransitionMatrix, mut states: Vec<StateVector>, seed: u64) -> Result<Self> {
        if states.is_empty() {
            bail!(Config, "a chain path needs at least Z_0");
        }
        for w in states.windows(2) {
            if w[1].index >= a.n || a.entry(w[1].index, w[0].index) <= 0.0 {
                bail!(Config, "transition {} -> {} has zero probability", w[0].one_based(), w[1].one_based());
            }
        }
        states.push(states[states.len() - 1]);
        Ok(Self { states, seed })
    }

    pub fn horizon(&self) -> usize {
        self.states.len() - 2
    }

    pub fn state(&self, t: usize) -> StateVector {
        self.states[t]
    }
}

/// One value per state, read off as `<v, Z>`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateLinkedParams {
    pub values: Vec<f64>,
}

impl StateLinkedParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            bail!(InvalidParams, "state-linked values must be non-empty and finite");
        }
        Ok(Self { values })
    }

    /// As [`StateLinkedParams::new`], also requiring every value to be positive.
    pub fn positive(values: Vec<f64>) -> Result<Self> {
        let p = Self::new(values)?;
        if p.values.iter().any(|&v| v <= 0.0) {
            bail!(InvalidParams, "state-linked values must be positive");
        }
        Ok(p)
    }

    pub fn constant(value: f64, n_states: usize) -> Result<Self> {
        Self::new(vec![value; n_states])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

/// `A e_z`, the conditional law of the next state.
pub fn step_expectation(a: &TransitionMatrix, z: StateVector) -> Vec<f64> {
    a.column(z.index)
}

/// Draws `Z_1..Z_T` from `z0` and appends `Z_{T+1} = Z_T`.
pub fn simulate_path(a: &TransitionMatrix, z0: StateVector, horizon: usize, seed: u64) -> Result<ChainPath> {
    if horizon == 0 {
        bail!(Config, "horizon must be at least 1");
    }
    if z0.index >= a.n {
        bail!(Config, "initial state {} outside 1..={}", z0.one_based(), a.n);
    }
    let mut rng = seeded_rng(seed);
    let mut states = Vec::with_capacity(horizon + 2);
    states.push(z0);
    let mut current = z0;
    for _ in 0..horizon {
        current = next_state(a, current, &mut rng);
        states.push(current);
    }
    states.push(current);
    Ok(ChainPath { states, seed })
}

/// One transition from `z` using a single uniform draw.
pub fn next_state<R: Rng + ?Sized>(a: &TransitionMatrix, z: StateVector, rng: &mut R) -> StateVector {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_positive = z.index;
    for j in 0..a.n {
        let w = a.entry(j, z.index);
        if w > 0.0 {
            cumulative += w;
            last_positive = j;
            if u < cumulative {
                return StateVector { index: j };
            }
        }
    }
    StateVector { index: last_positive }
}

/// `M_t = Z_t - A Z_{t-1}`.
pub fn martingale_increment(a: &TransitionMatrix, z_prev: StateVector, z_next: StateVector) -> Vec<f64> {
    let mut m = z_next.unit(a.n);
    for (mj, pj) in m.iter_mut().zip(a.column(z_prev.index)) {
        *mj -= pj;
    }
    m
}

/// `<v, Z>`.
pub fn linked_value(params: &StateLinkedParams, z: StateVector) -> Result<f64> {
    match params.values.get(z.index) {
        Some(&v) => Ok(v),
        None => bail!(Config, "state {} has no linked value ({} given)", z.one_based(), params.len()),
    }
}

/// `<v A^T, Z_k> = E[<v, Z_{k+1}> | Z_k = z]`.
pub fn one_step_linked_expectation(params: &StateLinkedParams, a: &TransitionMatrix, z: StateVector) -> Result<f64> {
    if params.len() != a.n {
        bail!(Config, "{} linked values for a {}-state chain", params.len(), a.n);
    }
    if z.index >= a.n {
        bail!(Config, "state {} outside 1..={}", z.one_based(), a.n);
    }
    Ok(params.values.iter().enumerate().map(|(j, v)| v * a.entry(j, z.index)).sum())
}

/// Per-state return parameters; `X_t` follows the parameters of `Z_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum StateLinkedModel {
    Gaussian {
        mu: StateLinkedParams,
        sigma: StateLinkedParams,
    },
    Weibull {
        lambda: StateLinkedParams,
        alpha: StateLinkedParams,
        theta: StateLinkedParams,
    },
}

impl StateLinkedModel {
    pub fn gaussian(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let m = StateLinkedModel::Gaussian { mu: StateLinkedParams::new(mu)?, sigma: StateLinkedParams::positive(sigma)? };
        m.check_lengths()?;
        Ok(m)
    }

    pub fn weibull(lambda: Vec<f64>, alpha: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let m = StateLinkedModel::Weibull {
            lambda: StateLinkedParams::positive(lambda)?,
            alpha: StateLinkedParams::positive(alpha)?,
            theta: StateLinkedParams::new(theta)?,
        };
        m.check_lengths()?;
        Ok(m)
    }

    fn check_lengths(&self) -> Result<()> {
        let lens: Vec<usize> = match self {
            StateLinkedModel::Gaussian { mu, sigma } => vec![mu.len(), sigma.len()],
            StateLinkedModel::Weibull { lambda, alpha, theta } => vec![lambda.len(), alpha.len(), theta.len()],
        };
        if lens.iter().any(|&l| l != lens[0]) {
            bail!(Config, "state-linked parameter vectors have different lengths {lens:?}");
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        match self {
            StateLinkedModel::Gaussian { mu, .. } => mu.len(),
            StateLinkedModel::Weibull { lambda, .. } => lambda.len(),
        }
    }

    /// The return model attached to state `z`.
    pub fn model_for_state(&self, z: StateVector) -> Result<ReturnModel> {
        Ok(match self {
            StateLinkedModel::Gaussian { mu, sigma } => {
                ReturnModel::Gaussian(GaussianParams::new(linked_value(mu, z)?, linked_value(sigma, z)?)?)
            }
            StateLinkedModel::Weibull { lambda, alpha, theta } => ReturnModel::Weibull(WeibullParams::new(
                linked_value(lambda, z)?,
                linked_value(alpha, z)?,
                linked_value(theta, z)?,
            )?),
        })
    }

    /// All per-state models in state order.
    pub fn models(&self) -> Result<Vec<ReturnModel>> {
        (0..self.n_states()).map(|i| self.model_for_state(StateVector { index: i })).collect()
    }

    /// The per-period models `X_t ~ model(Z_{t+1})` along a path, `t = 0..=T`.
    pub fn models_along(&self, path: &ChainPath) -> Result<Vec<ReturnModel>> {
        path.states[1..].iter().map(|&z| self.model_for_state(z)).collect()
    }
}

/// An economy: a chain together with the returns it modulates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkovEconomy {
    pub matrix: TransitionMatrix,
    pub model: StateLinkedModel,
}

impl MarkovEconomy {
    pub fn new(matrix: TransitionMatrix, model: StateLinkedModel) -> Result<Self> {
        if matrix.n_states() != model.n_states() {
            bail!(
                Config,
                "{}-state chain with parameters for {} states",
                matrix.n_states(),
                model.n_states()
            );
        }
        Ok(Self { matrix, model })
    }
}
