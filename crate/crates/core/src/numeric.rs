//! Scalar numerical routines shared by the distribution and risk modules.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function, `Φ(z) = erfc(-z/√2)/2`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Φ(z)`, without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Solves `normal_sf(z) = tail` for `z ≥ 0` by bisection, `0 < tail ≤ 1/2`.
///
/// Bisection runs until the midpoint no longer separates the bracket, so the
/// result is limited only by the accuracy of `erfc`.
pub(crate) fn normal_upper_point(tail: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if normal_sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Regularized lower incomplete gamma `P(a, x)` and upper `Q(a, x)`.
pub fn incomplete_gamma(a: f64, x: f64) -> Result<(f64, f64)> {
    if a <= 0.0 || x < 0.0 || !a.is_finite() || x.is_nan() {
        bail!(Domain, "incomplete gamma needs a > 0 and x >= 0 (a = {a}, x = {x})");
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = a * x.ln() - x - libm::lgamma(a);
    if x < a + 1.0 {
        // series for P
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..1000 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                let p = sum * log_prefactor.exp();
                return Ok((p, 1.0 - p));
            }
        }
        bail!(Numeric, "incomplete gamma series did not converge (a = {a}, x = {x})")
    } else {
        // modified Lentz continued fraction for Q
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                let q = h * log_prefactor.exp();
                return Ok((1.0 - q, q));
            }
        }
        bail!(Numeric, "incomplete gamma continued fraction did not converge (a = {a}, x = {x})")
    }
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimated error falls below `rel_tol * |integral|` (or an absolute floor).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        bail!(Domain, "integration bounds must be finite ({a}, {b})");
    }
    if a == b {
        return Ok(0.0);
    }
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&f, a, b);
    intervals.push((a, b, v, e));
    for _ in 0..4000 {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            bail!(Numeric, "non-finite integrand on [{a}, {b}]");
        }
        if err <= rel_tol * total.abs() || err <= 1e-300 {
            return Ok(total);
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision; accept what we have
            let total: f64 = intervals.iter().map(|iv| iv.2).sum::<f64>() + gk15(&f, lo, hi).0;
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    bail!(Numeric, "adaptive quadrature on [{a}, {b}] did not reach tolerance {rel_tol}")
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `rel_width * (1 + |x|)`; fails
/// after `max_iter` iterations.
pub fn golden_section<F>(f: F, lo: f64, hi: f64, rel_width: f64, max_iter: usize) -> Result<Minimum>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if !(a.is_finite() && b.is_finite()) {
        bail!(Domain, "golden-section bracket must be finite ({lo}, {hi})");
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for it in 0..max_iter {
        let mid = 0.5 * (a + b);
        if b - a <= rel_width * (1.0 + mid.abs()) {
            let fm = f(mid)?;
            let best = [(mid, fm), (c, fc), (d, fd)]
                .into_iter()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap_or((mid, fm));
            return Ok(Minimum { x: best.0, value: best.1, iterations: it });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    bail!(Numeric, "golden-section search did not converge in {max_iter} iterations")
}

/// Bisection for a root of `f` on `[lo, hi]`, requiring a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        bail!(Bracket, "no sign change on [{lo}, {hi}]");
    }
    let rising = fa < 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid);
        if (fm < 0.0) == rising {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
