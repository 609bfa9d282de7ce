//! Maximum-likelihood calibration of Gaussian and two-parameter Weibull
//! return models.

#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{GaussianParams, WeibullParams};
use crate::error::{bail, Result};

const ALPHA_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// Sample mean and sample standard deviation (denominator `n - 1`).
pub fn fit_gaussian(returns: &[f64]) -> Result<GaussianParams> {
    let n = returns.len();
    if n < 2 {
        bail!(Data, "need at least 2 observations, got {n}");
    }
    if returns.iter().any(|x| !x.is_finite()) {
        bail!(Data, "observations must be finite");
    }
    let mean = returns.iter().sum::<f64>() / n as f64;
    let ss: f64 = returns.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if !(sd > 0.0) {
        bail!(Data, "observations have zero variance");
    }
    GaussianParams::new(mean, sd)
}

/// Profile-likelihood score for the shape and its derivative, computed with
/// weights `exp(α (ln x - ln x_max))` to avoid overflow.
struct Profile {
    logs: alloc::vec::Vec<f64>,
    mean_log: f64,
    max_log: f64,
}

impl Profile {
    fn moments(&self, alpha: f64) -> (f64, f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &self.logs {
            let w = (alpha * (l - self.max_log)).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        (s0, s1 / s0, s2 / s0)
    }

    fn score(&self, alpha: f64) -> (f64, f64) {
        let (_, m1, m2) = self.moments(alpha);
        let g = m1 - 1.0 / alpha - self.mean_log;
        let dg = (m2 - m1 * m1).max(0.0) + 1.0 / (alpha * alpha);
        (g, dg)
    }
}

/// Two-parameter Weibull fit with `θ = 0`. The shape solves the profile
/// equation `Σ x^α ln x / Σ x^α - 1/α - mean(ln x) = 0` by Newton steps kept
/// inside a bisection bracket; the scale is `(mean x^α)^{1/α}`.
pub fn fit_weibull(returns: &[f64]) -> Result<WeibullParams> {
    if returns.is_empty() {
        bail!(Data, "no observations");
    }
    if returns.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        bail!(Data, "weibull fit needs strictly positive observations");
    }
    let logs: alloc::vec::Vec<f64> = returns.iter().map(|x| x.ln()).collect();
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;
    let max_log = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_log = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_log - min_log <= 1e-12 * (1.0 + max_log.abs()) {
        bail!(Numeric, "likelihood is degenerate for identical observations");
    }
    let profile = Profile { logs, mean_log, max_log };

    let (mut lo, mut hi) = (1.0, 1.0);
    while profile.score(lo).0 > 0.0 {
        lo *= 0.5;
        if lo < 1e-8 {
            bail!(Numeric, "shape bracket collapsed toward zero");
        }
    }
    while profile.score(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            bail!(Numeric, "shape bracket diverged");
        }
    }

    let mut alpha = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let (g, dg) = profile.score(alpha);
        if g.abs() <= ALPHA_TOL {
            converged = true;
            break;
        }
        if g > 0.0 {
            hi = alpha;
        } else {
            lo = alpha;
        }
        let newton = alpha - g / dg;
        alpha = if newton > lo && newton < hi && newton.is_finite() { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-15 * hi {
            converged = profile.score(alpha).0.abs() <= 1e-8;
            break;
        }
    }
    if !converged {
        bail!(Numeric, "weibull shape equation did not converge");
    }
    let (s0, _, _) = profile.moments(alpha);
    let lambda = (max_log + (s0 / n).ln() / alpha).exp();
    WeibullParams::new(lambda, alpha, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, ReturnModel};
    use alloc::vec::Vec;

    #[test]
    fn gaussian_hand_examples() {
        let g = fit_gaussian(&[0.0, 2.0]).unwrap();
        assert_eq!(g.mu, 1.0);
        assert!((g.sigma - 2f64.sqrt()).abs() < 1e-15);
        assert!(fit_gaussian(&[1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(fit_gaussian(&[1.0]).is_err());
    }

    #[test]
    fn gaussian_round_trip() {
        let model = ReturnModel::Gaussian(GaussianParams::new(1113.3425, 186.29).unwrap());
        let g = fit_gaussian(&sample(&model, 100_000, 11)).unwrap();
        assert!((g.mu / 1113.3425 - 1.0).abs() < 0.01);
        assert!((g.sigma / 186.29 - 1.0).abs() < 0.01);
    }

    #[test]
    fn exponential_quantiles_give_unit_shape() {
        let n = 100_000;
        let data: Vec<f64> = (1..=n).map(|i| -libm::log1p(-(i as f64 - 0.5) / n as f64)).collect();
        let w = fit_weibull(&data).unwrap();
        assert!((w.alpha - 1.0).abs() < 0.02, "{w:?}");
        assert!((w.lambda - 1.0).abs() < 0.02, "{w:?}");
    }

    #[test]
    fn weibull_round_trip() {
        let model = ReturnModel::Weibull(WeibullParams::new(6.7679, 0.8016, 0.0).unwrap());
        let w = fit_weibull(&sample(&model, 100_000, 5)).unwrap();
        assert!((w.lambda / 6.7679 - 1.0).abs() < 0.02, "{w:?}");
        assert!((w.alpha / 0.8016 - 1.0).abs() < 0.02, "{w:?}");
        assert_eq!(w.theta, 0.0);
    }

    #[test]
    fn weibull_rejects_bad_data() {
        assert!(matches!(fit_weibull(&[2.0, 2.0, 2.0]), Err(crate::RiskError::Numeric(_))));
        assert!(matches!(fit_weibull(&[1.0, -1.0]), Err(crate::RiskError::Data(_))));
        assert!(matches!(fit_weibull(&[]), Err(crate::RiskError::Data(_))));
    }

    #[test]
    fn weibull_score_vanishes_at_the_fit() {
        let data = [0.3, 1.7, 2.2, 0.9, 4.1, 0.05, 3.3];
        let w = fit_weibull(&data).unwrap();
        // direct score equations, no rescaling
        let sa: f64 = data.iter().map(|x| x.powf(w.alpha)).sum();
        let sal: f64 = data.iter().map(|x| x.powf(w.alpha) * x.ln()).sum();
        let ml: f64 = data.iter().map(|x| x.ln()).sum::<f64>() / 7.0;
        assert!((sal / sa - 1.0 / w.alpha - ml).abs() < 1e-9);
        assert!((w.lambda.powf(w.alpha) - sa / 7.0).abs() < 1e-9 * sa);
    }
}
