use alloc::vec::Vec;

use super::CvarMode;
use crate::distributions::{gaussian_quantile, ReturnModel, WeibullParams};
use crate::error::{bail, check_level, Result};
use crate::static_risk::{cvar_ru, var, Orientation, RiskMeasureSpec};

/// The running state of the recursion: time index and `R_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursiveState {
    pub t: usize,
    pub prev_risk: f64,
}

impl RecursiveState {
    pub fn start(r0: f64) -> Self {
        Self { t: 0, prev_risk: r0 }
    }

    pub fn advance(&mut self, risk: f64) -> f64 {
        self.t += 1;
        self.prev_risk = risk;
        risk
    }
}

/// `R_0 = R(X_0)`, `R_t = R(X_t + cash R_{t-1})` with `measure` evaluated on
/// the literally shifted model at every step.
pub fn recursive_risk_by<F>(models: &[ReturnModel], orientation: Orientation, measure: F) -> Result<Vec<f64>>
where
    F: Fn(&ReturnModel) -> Result<f64>,
{
    let Some((first, rest)) = models.split_first() else {
        bail!(Config, "recursion needs at least the model of X_0");
    };
    let mut out = Vec::with_capacity(models.len());
    let mut state = RecursiveState::start(measure(first)?);
    out.push(state.prev_risk);
    for model in rest {
        let shifted = model.shifted(orientation.cash_delta(state.prev_risk));
        out.push(state.advance(measure(&shifted)?));
    }
    Ok(out)
}

/// [`recursive_risk_by`] with a static VaR or CVaR measure.
pub fn recursive_risk_generic(models: &[ReturnModel], spec: &RiskMeasureSpec) -> Result<Vec<f64>> {
    recursive_risk_by(models, spec.orientation, |m| spec.evaluate(m))
}

/// `Σ_{k=1}^t (-1)^{t-k} v_k + (-1)^t v_0` for every `t`.
fn alternating_sums(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|t| {
            let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
            let tail: f64 = (1..=t).map(|k| sign(t - k) * v[k]).sum();
            tail + sign(t) * v[0]
        })
        .collect()
}

/// Recursive VaR of independent Gaussian returns, from the alternating sum of
/// `μ_k + σ_k q`.
pub fn recursive_var_gaussian_closed(mus: &[f64], sigmas: &[f64], p: f64) -> Result<Vec<f64>> {
    if mus.is_empty() || mus.len() != sigmas.len() {
        bail!(Config, "{} means and {} deviations", mus.len(), sigmas.len());
    }
    if sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) || mus.iter().any(|m| !m.is_finite()) {
        bail!(InvalidParams, "gaussian parameters need finite means and positive deviations");
    }
    let q = gaussian_quantile(p)?;
    let v: Vec<f64> = mus.iter().zip(sigmas).map(|(m, s)| m + s * q).collect();
    Ok(alternating_sums(&v))
}

/// Recursive VaR of independent Weibull returns, from the alternating sum of
/// `θ_k + λ_k (-ln(1-p))^{1/α_k}`.
pub fn recursive_var_weibull_closed(lambdas: &[f64], alphas: &[f64], thetas: &[f64], p: f64) -> Result<Vec<f64>> {
    if lambdas.is_empty() || lambdas.len() != alphas.len() || lambdas.len() != thetas.len() {
        bail!(Config, "weibull parameter lists have lengths {}, {}, {}", lambdas.len(), alphas.len(), thetas.len());
    }
    check_level(p)?;
    let mut v = Vec::with_capacity(lambdas.len());
    for ((&l, &a), &th) in lambdas.iter().zip(alphas).zip(thetas) {
        let w = WeibullParams::new(l, a, th)?;
        v.push(w.theta + w.lambda * WeibullParams::standard_quantile(w.alpha, p));
    }
    Ok(alternating_sums(&v))
}

/// Recursive CVaR from `C_0 = CVaR(X_0)`.
///
/// `Exact` uses `C_t = v_t - C_{t-1} + E[(X_t - v_t + 2C_{t-1})_+]/(1-p)` with
/// `v_t = VaR(X_t)`. `PaperPiecewise` branches on the realized `x_t`:
/// `v_t - C_{t-1}` when `x_t ≤ v_t - 2C_{t-1}`, otherwise
/// `E[X_t]/(1-p) - p v_t/(1-p) + (1+p) C_{t-1}/(1-p)`.
pub fn recursive_cvar(
    models: &[ReturnModel],
    p: f64,
    mode: CvarMode,
    realized: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let Some((first, rest)) = models.split_first() else {
        bail!(Config, "recursion needs at least the model of X_0");
    };
    let c0 = cvar_ru(first, &RiskMeasureSpec::cvar(p)?)?;
    let realized_rest = match (mode, realized) {
        (CvarMode::PaperPiecewise, None) => {
            bail!(Usage, "paper_piecewise recursive CVaR needs the realized return path")
        }
        (CvarMode::PaperPiecewise, Some(x)) if x.len() != models.len() => {
            bail!(Config, "{} realized returns for {} periods", x.len(), models.len())
        }
        (_, Some(x)) if x.len() == models.len() => Some(&x[1..]),
        _ => None,
    };
    let mut out = Vec::with_capacity(models.len());
    out.push(c0);
    out.extend(recursive_cvar_from(c0, rest, p, mode, realized_rest)?);
    Ok(out)
}

/// Continues the CVaR recursion from `c_prev` over `models`, returning `C_1..`.
pub fn recursive_cvar_from(
    c_prev: f64,
    models: &[ReturnModel],
    p: f64,
    mode: CvarMode,
    realized: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let var_spec = RiskMeasureSpec::var(p)?;
    let mut state = RecursiveState::start(c_prev);
    let mut out = Vec::with_capacity(models.len());
    for (k, model) in models.iter().enumerate() {
        let c = state.prev_risk;
        let v = var(model, &var_spec)?;
        let next = match mode {
            CvarMode::Exact => v - c + model.expected_positive_part(v - 2.0 * c)? / (1.0 - p),
            CvarMode::PaperPiecewise => {
                let Some(x) = realized.and_then(|r| r.get(k)) else {
                    bail!(Usage, "paper_piecewise recursive CVaR needs a realized return for every period");
                };
                piecewise_step(*x, v, model.mean(), c, p)
            }
        };
        if !next.is_finite() {
            bail!(Numeric, "recursive CVaR is not finite at step {}", k + 1);
        }
        out.push(state.advance(next));
    }
    Ok(out)
}

pub(super) fn piecewise_step(x: f64, v: f64, mean: f64, c_prev: f64, p: f64) -> f64 {
    if x <= v - 2.0 * c_prev {
        v - c_prev
    } else {
        mean / (1.0 - p) - p / (1.0 - p) * v + (1.0 + p) / (1.0 - p) * c_prev
    }
}
