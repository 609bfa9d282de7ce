use alloc::vec::Vec;

use super::recursive::{piecewise_step, recursive_cvar_from, recursive_risk_generic};
use super::CvarMode;
use crate::distributions::{gaussian_quantile, ReturnModel, WeibullParams};
use crate::error::{bail, Result};
use crate::markov::{one_step_linked_expectation, ChainPath, StateLinkedModel, StateLinkedParams, StateVector, TransitionMatrix};
use crate::static_risk::{cvar_ru, var, RiskMeasureSpec};

/// `R(X_t) <F, A Z_t>` for a scalar risk value and aggregator `F`.
pub fn modulated_scalar(r: f64, aggregator: &StateLinkedParams, a: &TransitionMatrix, z: StateVector) -> Result<f64> {
    Ok(r * one_step_linked_expectation(aggregator, a, z)?)
}

/// `<R̄(X_t), A Z_t>` for a vector of per-state risks.
pub fn modulated_vector(risks: &[f64], a: &TransitionMatrix, z: StateVector) -> Result<f64> {
    let params = StateLinkedParams::new(risks.to_vec())?;
    one_step_linked_expectation(&params, a, z)
}

/// `<R̄_t(X), A Z_t>` where component `i` of `risks_t` is the time-`t` value
/// of the state-`i` recursion.
pub fn modulated_recursive_vector(risks_t: &[f64], a: &TransitionMatrix, z: StateVector) -> Result<f64> {
    modulated_vector(risks_t, a, z)
}

/// `R^i_t = R^i(X_t + R^i_{t-1})` for each state `i`, where `R^i` measures
/// returns under the law of state `i`. Indexed `[state][t]`.
pub fn per_state_recursions(
    state_models: &[ReturnModel],
    spec: &RiskMeasureSpec,
    horizon: usize,
) -> Result<Vec<Vec<f64>>> {
    state_models
        .iter()
        .map(|m| {
            let models: Vec<ReturnModel> = core::iter::repeat_n(m.clone(), horizon + 1).collect();
            recursive_risk_generic(&models, spec)
        })
        .collect()
}

/// `R̃^Z_0 = R(X_0)` and `R̃^Z_t = <R̄_t, A Z_t>` along a chain path.
pub fn modulated_recursive_trajectory(
    model: &StateLinkedModel,
    spec: &RiskMeasureSpec,
    a: &TransitionMatrix,
    path: &ChainPath,
) -> Result<Vec<f64>> {
    check_dims(model, a)?;
    let horizon = path.horizon();
    let per_state = per_state_recursions(&model.models()?, spec, horizon)?;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(spec.evaluate(&model.model_for_state(path.state(1))?)?);
    for t in 1..=horizon {
        let column: Vec<f64> = per_state.iter().map(|r| r[t]).collect();
        out.push(modulated_recursive_vector(&column, a, path.state(t))?);
    }
    Ok(out)
}

fn check_dims(model: &StateLinkedModel, a: &TransitionMatrix) -> Result<()> {
    if model.n_states() != a.n_states() {
        bail!(Config, "{}-state parameters for a {}-state chain", model.n_states(), a.n_states());
    }
    Ok(())
}

/// The one-step-averaged VaR level at `Z_k = z`: `μ̄ + σ̄ q` for Gaussian
/// returns, `θ̄ + λ̄ E[(-ln(1-p))^{1/α} | Z_k]` for Weibull.
fn modulated_level(model: &StateLinkedModel, a: &TransitionMatrix, z: StateVector, p: f64) -> Result<f64> {
    match model {
        StateLinkedModel::Gaussian { mu, sigma } => {
            let q = gaussian_quantile(p)?;
            Ok(one_step_linked_expectation(mu, a, z)? + one_step_linked_expectation(sigma, a, z)? * q)
        }
        StateLinkedModel::Weibull { lambda, alpha, theta } => {
            let c = alpha.map(|al| WeibullParams::standard_quantile(al, p))?;
            Ok(one_step_linked_expectation(theta, a, z)?
                + one_step_linked_expectation(lambda, a, z)? * one_step_linked_expectation(&c, a, z)?)
        }
    }
}

/// Markov-modulated recursive VaR along a path: the alternating sum of the
/// one-step-averaged levels for `k ≥ 1`, anchored at `VaR(X_0)`.
pub fn modulated_var_trajectory(
    model: &StateLinkedModel,
    a: &TransitionMatrix,
    path: &ChainPath,
    p: f64,
) -> Result<Vec<f64>> {
    check_dims(model, a)?;
    let horizon = path.horizon();
    let v0 = var(&model.model_for_state(path.state(1))?, &RiskMeasureSpec::var(p)?)?;
    let mut levels = Vec::with_capacity(horizon + 1);
    levels.push(v0);
    for k in 1..=horizon {
        levels.push(modulated_level(model, a, path.state(k), p)?);
    }
    Ok((0..=horizon)
        .map(|t| {
            let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
            let tail: f64 = (1..=t).map(|k| sign(t - k) * levels[k]).sum();
            tail + sign(t) * levels[0]
        })
        .collect())
}

/// Markov-modulated recursive CVaR along a path, starting from `CVaR(X_0)`.
///
/// In `PaperPiecewise` mode the Gaussian branches are `μ̄_t + σ̄_t q` when
/// `x_t ≤ VaR(X_t)` and `μ̄_t + p σ̄_t q/(1-p)` otherwise, with no dependence
/// on earlier values. The Weibull branches follow the recursive CVaR step with
/// the one-step-averaged level and `E[X_t | Z_t]`.
///
/// In `Exact` mode each state runs its own exact recursion and the result is
/// `<C̄_t, A Z_t>`.
pub fn modulated_cvar_trajectory(
    model: &StateLinkedModel,
    a: &TransitionMatrix,
    path: &ChainPath,
    realized: Option<&[f64]>,
    p: f64,
    mode: CvarMode,
) -> Result<Vec<f64>> {
    check_dims(model, a)?;
    let horizon = path.horizon();
    let cvar_spec = RiskMeasureSpec::cvar(p)?;
    let c0 = cvar_ru(&model.model_for_state(path.state(1))?, &cvar_spec)?;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(c0);
    match mode {
        CvarMode::Exact => {
            let per_state: Vec<Vec<f64>> = model
                .models()?
                .iter()
                .map(|m| {
                    let c = cvar_ru(m, &cvar_spec)?;
                    let models: Vec<ReturnModel> = core::iter::repeat_n(m.clone(), horizon).collect();
                    recursive_cvar_from(c, &models, p, CvarMode::Exact, None)
                })
                .collect::<Result<_>>()?;
            for t in 1..=horizon {
                let column: Vec<f64> = per_state.iter().map(|r| r[t - 1]).collect();
                out.push(modulated_vector(&column, a, path.state(t))?);
            }
        }
        CvarMode::PaperPiecewise => {
            let Some(x) = realized else {
                bail!(Usage, "paper_piecewise modulated CVaR needs the realized return path");
            };
            if x.len() != horizon + 1 {
                bail!(Config, "{} realized returns for horizon {horizon}", x.len());
            }
            let var_spec = RiskMeasureSpec::var(p)?;
            for t in 1..=horizon {
                let z = path.state(t);
                let next = match model {
                    StateLinkedModel::Gaussian { mu, sigma } => {
                        let q = gaussian_quantile(p)?;
                        let mu_bar = one_step_linked_expectation(mu, a, z)?;
                        let sigma_bar = one_step_linked_expectation(sigma, a, z)?;
                        let v_t = var(&model.model_for_state(path.state(t + 1))?, &var_spec)?;
                        if x[t] <= v_t {
                            mu_bar + sigma_bar * q
                        } else {
                            mu_bar + p / (1.0 - p) * sigma_bar * q
                        }
                    }
                    StateLinkedModel::Weibull { .. } => {
                        let level = modulated_level(model, a, z, p)?;
                        let means = StateLinkedParams::new(model.models()?.iter().map(ReturnModel::mean).collect())?;
                        let mean_bar = one_step_linked_expectation(&means, a, z)?;
                        piecewise_step(x[t], level, mean_bar, out[t - 1], p)
                    }
                };
                if !next.is_finite() {
                    bail!(Numeric, "modulated CVaR is not finite at t = {t}");
                }
                out.push(next);
            }
        }
    }
    Ok(out)
}

/// Per-state static VaR and CVaR, `(var[i], cvar[i])`.
pub fn state_level_values(model: &StateLinkedModel, p: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let var_spec = RiskMeasureSpec::var(p)?;
    let cvar_spec = RiskMeasureSpec::cvar(p)?;
    let models = model.models()?;
    let vars = models.iter().map(|m| var(m, &var_spec)).collect::<Result<_>>()?;
    let cvars = models.iter().map(|m| cvar_ru(m, &cvar_spec)).collect::<Result<_>>()?;
    Ok((vars, cvars))
}
