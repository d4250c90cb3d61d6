//! Least-squares fits of decay exponents on log-log axes.

use serde::Serialize;

use crate::error::{ensure, Result};
use crate::norms::bracket;

/// Straight-line fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fit.
    pub max_residual: f64,
    pub points: usize,
}

/// Ordinary least squares on paired samples.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    ensure(xs.len() == ys.len(), || "fit inputs differ in length".into())?;
    ensure(xs.len() >= 2, || "fit needs at least two points".into())?;
    ensure(xs.iter().chain(ys).all(|v| v.is_finite()), || "fit inputs must be finite".into())?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    ensure(sxx > 0.0, || "fit abscissae are all equal".into())?;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
        points: xs.len(),
    })
}

/// Fits `log y` against `log⟨t⟩` over the samples with `t ∈ [t_lo, t_hi]`.
/// The slope is the decay exponent.
pub fn fit_decay(ts: &[f64], ys: &[f64], t_lo: f64, t_hi: f64) -> Result<LineFit> {
    let (xs, ls): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(ys)
        .filter(|(&t, _)| t >= t_lo && t <= t_hi)
        .map(|(&t, &y)| (bracket(t).ln(), y.ln()))
        .unzip();
    ensure(ls.iter().all(|v| v.is_finite()), || {
        "decay fit needs strictly positive values in the window".into()
    })?;
    fit_line(&xs, &ls)
}

/// Window covering the last decade of a grid: `[t_max/10, t_max]`.
pub fn last_decade(ts: &[f64]) -> (f64, f64) {
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    (t_max / 10.0, t_max)
}

/// Relative deviation `|measured − expected| / |expected|`.
pub fn relative_gap(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected.abs()
}
