//! Single-period VaR and CVaR.
//!
//! VaR is the smallest p-quantile. CVaR has two independent routes: the
//! conditional tail expectation ([`cvar_tail`]) and the minimum of the
//! Rockafellar–Uryasev objective ([`cvar_ru`]).
//!
//! Under [`Orientation::UpperTail`] the measure is computed on `X` itself, so
//! `X` is read as a loss. [`Orientation::LowerTail`] negates `X` first, which
//! reads `X` as a value and gives `R(X + m) = R(X) - m` for cash `m`.

use alloc::borrow::Cow;
#[allow(unused_imports)]
use num_traits::Float;

use crate::distributions::{ReturnModel, WeibullParams};
use crate::error::{bail, check_level, Result};
use crate::numeric::{golden_section, incomplete_gamma, normal_pdf};

const RU_MAX_ITER: usize = 200;
const RU_REL_WIDTH: f64 = 1e-10;
const ARGMIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Orientation {
    #[default]
    UpperTail,
    LowerTail,
}

impl Orientation {
    /// Shift applied to `X` when `m` units of cash are added to the position.
    ///
    /// Chosen so that `R(X + cash m) = R(X) - m` in both orientations.
    pub fn cash_delta(self, m: f64) -> f64 {
        match self {
            Orientation::UpperTail => -m,
            Orientation::LowerTail => m,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::UpperTail => "upper_tail",
            Orientation::LowerTail => "lower_tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MeasureKind {
    Var,
    Cvar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskMeasureSpec {
    pub kind: MeasureKind,
    pub p: f64,
    pub orientation: Orientation,
}

impl RiskMeasureSpec {
    pub fn new(kind: MeasureKind, p: f64, orientation: Orientation) -> Result<Self> {
        check_level(p)?;
        Ok(Self { kind, p, orientation })
    }

    pub fn var(p: f64) -> Result<Self> {
        Self::new(MeasureKind::Var, p, Orientation::UpperTail)
    }

    pub fn cvar(p: f64) -> Result<Self> {
        Self::new(MeasureKind::Cvar, p, Orientation::UpperTail)
    }

    pub fn with_orientation(self, orientation: Orientation) -> Self {
        Self { orientation, ..self }
    }

    /// VaR by quantile, CVaR by the Rockafellar–Uryasev minimum.
    pub fn evaluate(&self, model: &ReturnModel) -> Result<f64> {
        match self.kind {
            MeasureKind::Var => var(model, self),
            MeasureKind::Cvar => cvar_ru(model, self),
        }
    }

    /// `R(X + cash m)`, evaluated on a literally shifted model.
    pub fn evaluate_with_cash(&self, model: &ReturnModel, m: f64) -> Result<f64> {
        self.evaluate(&model.shifted(self.orientation.cash_delta(m)))
    }
}

/// The objective `F_p(X, η) = η + E[(X - η)_+] / (1 - p)` at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuObjectiveValue {
    pub eta: f64,
    pub value: f64,
}

/// The model seen by the measure: `X` itself, or `-X`. A reflected Weibull
/// has no parametric form here, so it is handled through the lower tail of
/// the original parameters.
enum Oriented<'a> {
    Direct(Cow<'a, ReturnModel>),
    ReflectedWeibull(&'a WeibullParams),
}

impl<'a> Oriented<'a> {
    fn new(model: &'a ReturnModel, orientation: Orientation) -> Self {
        match orientation {
            Orientation::UpperTail => Oriented::Direct(Cow::Borrowed(model)),
            Orientation::LowerTail => match (model.negated(), model) {
                (Some(neg), _) => Oriented::Direct(Cow::Owned(neg)),
                (None, ReturnModel::Weibull(w)) => Oriented::ReflectedWeibull(w),
                (None, _) => unreachable!("only weibull lacks a closed negation"),
            },
        }
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            Oriented::Direct(m) => m.quantile(p),
            Oriented::ReflectedWeibull(w) => Ok(-ReturnModel::Weibull(**w).quantile(1.0 - p)?),
        }
    }

    fn expected_positive_part(&self, a: f64) -> Result<f64> {
        match self {
            Oriented::Direct(m) => m.expected_positive_part(a),
            // E[(-X - a)_+] = E[(-a - X)_+]
            Oriented::ReflectedWeibull(w) => ReturnModel::Weibull(**w).expected_shortfall_below(-a),
        }
    }

    fn is_atomic(&self) -> Option<&[f64]> {
        match self {
            Oriented::Direct(m) => match m.as_ref() {
                ReturnModel::Empirical(s) => Some(s.values()),
                ReturnModel::Discrete(d) => Some(d.atoms()),
                _ => None,
            },
            Oriented::ReflectedWeibull(_) => None,
        }
    }

    fn objective(&self, p: f64, eta: f64) -> Result<f64> {
        let value = eta + self.expected_positive_part(eta)? / (1.0 - p);
        if !value.is_finite() {
            bail!(Numeric, "objective is not finite at eta = {eta}");
        }
        Ok(value)
    }

    fn tail_mean(&self, p: f64) -> Result<f64> {
        let q = self.quantile(p)?;
        match self {
            Oriented::Direct(m) => match m.as_ref() {
                ReturnModel::Gaussian(g) => {
                    let z = (q - g.mu) / g.sigma;
                    Ok(g.mu + g.sigma * normal_pdf(z) / (1.0 - p))
                }
                ReturnModel::Weibull(w) => {
                    // E[X | X ≥ q] = θ + λ Γ(s, z_p) / (1 - p), s = 1 + 1/α
                    let s = 1.0 + 1.0 / w.alpha;
                    let zp = -(-p).ln_1p();
                    let (_, upper) = incomplete_gamma(s, zp)?;
                    Ok(w.theta + w.lambda * libm::tgamma(s) * upper / (1.0 - p))
                }
                ReturnModel::Empirical(s) => atom_tail_mean(s.values().iter().map(|&x| (x, 1.0)), q),
                ReturnModel::Discrete(d) => {
                    atom_tail_mean(d.atoms().iter().copied().zip(d.probs().iter().copied()), q)
                }
            },
            Oriented::ReflectedWeibull(w) => {
                // E[-X | -X ≥ -q'] = -E[X | X ≤ q'] with P(X ≤ q') = 1 - p
                let s = 1.0 + 1.0 / w.alpha;
                let z = -p.ln();
                let (lower, _) = incomplete_gamma(s, z)?;
                Ok(-(w.theta + w.lambda * libm::tgamma(s) * lower / (1.0 - p)))
            }
        }
    }
}

/// Weighted mean of the atoms strictly above `q`, or of those at or above it
/// when nothing lies strictly above.
fn atom_tail_mean(atoms: impl Iterator<Item = (f64, f64)> + Clone, q: f64) -> Result<f64> {
    let mean_where = |keep: &dyn Fn(f64) -> bool| {
        let (mass, sum) = atoms
            .clone()
            .filter(|(x, _)| keep(*x))
            .fold((0.0, 0.0), |(m, s), (x, w)| (m + w, s + w * x));
        (mass > 0.0).then(|| sum / mass)
    };
    match mean_where(&|x| x > q).or_else(|| mean_where(&|x| x >= q)) {
        Some(v) => Ok(v),
        None => bail!(Data, "empirical tail above {q} is empty"),
    }
}

fn check_kind(spec: &RiskMeasureSpec, kind: MeasureKind) -> Result<()> {
    check_level(spec.p)?;
    if spec.kind != kind {
        bail!(Usage, "measure spec is {:?}, expected {:?}", spec.kind, kind);
    }
    Ok(())
}

/// VaR, `inf{η : P(X ≤ η) ≥ p}` of the oriented model.
pub fn var(model: &ReturnModel, spec: &RiskMeasureSpec) -> Result<f64> {
    check_kind(spec, MeasureKind::Var)?;
    Oriented::new(model, spec.orientation).quantile(spec.p)
}

/// CVaR as the conditional expectation above VaR.
///
/// For samples and discrete laws the tail is the set of atoms strictly above
/// VaR, widened to include VaR itself only when that set is empty.
pub fn cvar_tail(model: &ReturnModel, spec: &RiskMeasureSpec) -> Result<f64> {
    check_kind(spec, MeasureKind::Cvar)?;
    Oriented::new(model, spec.orientation).tail_mean(spec.p)
}

/// `F_p(X, η)` for the upper-tail model.
pub fn ru_objective(model: &ReturnModel, p: f64, eta: f64) -> Result<RuObjectiveValue> {
    check_level(p)?;
    let value = Oriented::new(model, Orientation::UpperTail).objective(p, eta)?;
    Ok(RuObjectiveValue { eta, value })
}

/// `F_p` for an arbitrary orientation.
pub fn ru_objective_oriented(model: &ReturnModel, spec: &RiskMeasureSpec, eta: f64) -> Result<RuObjectiveValue> {
    check_level(spec.p)?;
    let value = Oriented::new(model, spec.orientation).objective(spec.p, eta)?;
    Ok(RuObjectiveValue { eta, value })
}

fn ru_minimum(oriented: &Oriented<'_>, p: f64) -> Result<RuObjectiveValue> {
    let lo = oriented.quantile(p / 2.0)?;
    let hi = oriented.quantile(1.0 - (1.0 - p) / 4.0)?;
    let found = golden_section(|eta| oriented.objective(p, eta), lo, hi, RU_REL_WIDTH, RU_MAX_ITER)?;
    let mut best = RuObjectiveValue { eta: found.x, value: found.value };
    if let Some(atoms) = oriented.is_atomic() {
        // the objective is piecewise linear with kinks at the atoms
        let k = atoms.partition_point(|&a| a < found.x);
        for &a in atoms[k.saturating_sub(1)..(k + 1).min(atoms.len())].iter() {
            let value = oriented.objective(p, a)?;
            if value < best.value {
                best = RuObjectiveValue { eta: a, value };
            }
        }
    }
    Ok(best)
}

/// The minimizer and minimum of `F_p` found by golden-section search.
pub fn ru_minimize(model: &ReturnModel, spec: &RiskMeasureSpec) -> Result<RuObjectiveValue> {
    check_level(spec.p)?;
    ru_minimum(&Oriented::new(model, spec.orientation), spec.p)
}

/// CVaR as `min_η F_p(X, η)`.
///
/// Fails with a numeric error when `F_p` at VaR differs from the minimum found.
pub fn cvar_ru(model: &ReturnModel, spec: &RiskMeasureSpec) -> Result<f64> {
    check_kind(spec, MeasureKind::Cvar)?;
    let oriented = Oriented::new(model, spec.orientation);
    let min = ru_minimum(&oriented, spec.p)?;
    let at_var = oriented.objective(spec.p, oriented.quantile(spec.p)?)?;
    if (at_var - min.value).abs() > ARGMIN_TOL * (1.0 + min.value.abs()) {
        bail!(
            Numeric,
            "objective at VaR ({at_var}) differs from the minimum found ({}) at p = {}",
            min.value,
            spec.p
        );
    }
    Ok(min.value)
}

/// Whether VaR attains the minimum of `F_p` within `1e-8 (1 + |min|)`.
pub fn argmin_contains_var(model: &ReturnModel, p: f64) -> Result<bool> {
    check_level(p)?;
    let oriented = Oriented::new(model, Orientation::UpperTail);
    let min = ru_minimum(&oriented, p)?;
    let at_var = oriented.objective(p, oriented.quantile(p)?)?;
    Ok((at_var - min.value).abs() <= ARGMIN_TOL * (1.0 + min.value.abs()))
}
