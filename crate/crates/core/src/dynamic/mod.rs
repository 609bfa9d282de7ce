//! Dynamic risk: the recursion `R_t = R(X_t + R_{t-1})` and its
//! Markov-modulated variants.

mod modulated;
mod recursive;

pub use modulated::{
    modulated_cvar_trajectory, modulated_recursive_trajectory, modulated_recursive_vector, modulated_scalar,
    modulated_var_trajectory, modulated_vector, per_state_recursions, state_level_values,
};
pub use recursive::{
    recursive_cvar, recursive_cvar_from, recursive_risk_by, recursive_risk_generic, recursive_var_gaussian_closed,
    recursive_var_weibull_closed, RecursiveState,
};

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::static_risk::MeasureKind;

/// How the recursive CVaR step is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CvarMode {
    /// Takes the expectation of the positive part, giving a deterministic sequence.
    Exact,
    /// Branches on the realized return, as the closed forms are stated.
    #[default]
    PaperPiecewise,
}

impl CvarMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CvarMode::Exact => "exact",
            CvarMode::PaperPiecewise => "paper_piecewise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskRecord {
    pub t: usize,
    pub static_risk: f64,
    pub recursive: f64,
    pub modulated: f64,
}

/// Static, recursive and modulated risk of one measure over `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskTrajectory {
    pub kind: MeasureKind,
    pub p: f64,
    pub records: Vec<RiskRecord>,
}

impl RiskTrajectory {
    pub fn new(kind: MeasureKind, p: f64, static_risk: &[f64], recursive: &[f64], modulated: &[f64]) -> Result<Self> {
        let n = static_risk.len();
        if n == 0 || recursive.len() != n || modulated.len() != n {
            bail!(
                Config,
                "trajectory columns have lengths {}, {}, {}",
                n,
                recursive.len(),
                modulated.len()
            );
        }
        let records: Vec<RiskRecord> = (0..n)
            .map(|t| RiskRecord { t, static_risk: static_risk[t], recursive: recursive[t], modulated: modulated[t] })
            .collect();
        if let Some(r) = records
            .iter()
            .find(|r| !(r.static_risk.is_finite() && r.recursive.is_finite() && r.modulated.is_finite()))
        {
            bail!(Numeric, "non-finite risk value at t = {}", r.t);
        }
        Ok(Self { kind, p, records })
    }

    pub fn horizon(&self) -> usize {
        self.records.len() - 1
    }

    pub fn static_column(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.static_risk).collect()
    }

    pub fn recursive_column(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.recursive).collect()
    }

    pub fn modulated_column(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.modulated).collect()
    }
}

/// A position is acceptable when its risk is not positive.
pub fn is_acceptable(risk_value: f64) -> bool {
    risk_value <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptability_boundary() {
        assert!(is_acceptable(0.0));
        assert!(is_acceptable(-5.0));
        assert!(!is_acceptable(0.001));
    }

    #[test]
    fn trajectory_rejects_ragged_or_non_finite_columns() {
        assert!(RiskTrajectory::new(MeasureKind::Var, 0.99, &[1.0, 2.0], &[1.0], &[1.0, 2.0]).is_err());
        assert!(RiskTrajectory::new(MeasureKind::Var, 0.99, &[1.0], &[f64::NAN], &[1.0]).is_err());
        let t = RiskTrajectory::new(MeasureKind::Var, 0.99, &[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.5]).unwrap();
        assert_eq!(t.horizon(), 1);
        assert_eq!(t.modulated_column(), [1.0, 1.5]);
    }
}
