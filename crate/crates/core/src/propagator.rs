//! Exact linear flow of the damped wave equation.
//!
//! The solution of `v'' + v' + |ξ|²v = 0`, `v(0) = 0`, `v'(0) = 1` is
//! `K(t, ξ) = e^{-t/2} L(t, ξ)` with `L = sinh(t√(1/4−|ξ|²))/√(1/4−|ξ|²)`
//! below the threshold `|ξ| = 1/2` and the corresponding `sin` expression
//! above it. `D(t)` is the multiplier `K(t, ∇)`.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, LabError, Result};
use crate::fit::{fit_decay, fit_line, last_decade};
use crate::grid::{GridField, TorusGrid};
use crate::littlewood_paley::Projection;
use crate::norms::{bracket, lebesgue_norm, sobolev_norm, BlockDecomposition};
use crate::report::{ExperimentReport, Table};

/// Half-width of the band around `|ξ| = 1/2` where the Taylor series is used.
pub const BAND_HALFWIDTH: f64 = 1e-3;
/// Number of terms of the series in `z = |ξ|² − 1/4`, i.e. degree 8 in `z`.
const SERIES_TERMS: usize = 9;

/// `(L, ∂ₜL)` from the even expansion in `z = |ξ|² − 1/4`.
fn series(t: f64, z: f64) -> (f64, f64) {
    let mut l = 0.0;
    let mut dl = 0.0;
    // term_k = (−z)^k t^{2k+1}/(2k+1)!, dterm_k = (−z)^k t^{2k}/(2k)!
    let mut term = t;
    let mut dterm = 1.0;
    for k in 0..SERIES_TERMS {
        l += term;
        dl += dterm;
        let a = (2 * k + 2) as f64;
        let b = (2 * k + 3) as f64;
        dterm *= -z * t * t / ((a - 1.0) * a);
        term *= -z * t * t / (a * b);
    }
    (l, dl)
}

/// Whether the series is used at `(t, |ξ|)`. Outside `t²|z| ≤ 1` the
/// truncated series is no longer accurate, and the closed forms are well
/// conditioned there anyway.
fn in_series_band(t: f64, xi: f64, z: f64) -> bool {
    (xi - 0.5).abs() <= BAND_HALFWIDTH && t * t * z.abs() <= 1.0
}

fn check_time(t: f64) -> Result<()> {
    ensure(t >= 0.0 && t.is_finite(), || format!("time must be finite and nonnegative (got {t})"))
}

/// `L(t, |ξ|)`; may overflow for large `t` at low frequency, use
/// [`kernel`] for the damped product.
pub fn symbol_l(t: f64, xi: f64) -> Result<f64> {
    check_time(t)?;
    let z = (xi - 0.5) * (xi + 0.5);
    Ok(if in_series_band(t, xi, z) {
        series(t, z).0
    } else if xi < 0.5 {
        let a = (-z).sqrt();
        (t * a).sinh() / a
    } else {
        let b = z.sqrt();
        (t * b).sin() / b
    })
}

/// `∂ₜL(t, |ξ|)`.
pub fn symbol_dtl(t: f64, xi: f64) -> Result<f64> {
    check_time(t)?;
    let z = (xi - 0.5) * (xi + 0.5);
    Ok(if in_series_band(t, xi, z) {
        series(t, z).1
    } else if xi < 0.5 {
        (t * (-z).sqrt()).cosh()
    } else {
        (t * z.sqrt()).cos()
    })
}

/// `(K, ∂ₜK)` with `K = e^{-t/2}L`, evaluated without forming `e^{±t/2}`
/// separately.
pub(crate) fn kernel_unchecked(t: f64, xi: f64) -> (f64, f64) {
    let z = (xi - 0.5) * (xi + 0.5);
    if in_series_band(t, xi, z) {
        let (l, dl) = series(t, z);
        let e = (-0.5 * t).exp();
        return (e * l, e * (dl - 0.5 * l));
    }
    if xi < 0.5 {
        // roots λ± = −1/2 ± a of λ² + λ + |ξ|² = 0
        let a = (-z).sqrt();
        let lam_plus = -xi * xi / (0.5 + a);
        let lam_minus = -0.5 - a;
        let ratio = -(-2.0 * a * t).exp_m1() / (2.0 * a);
        let e = (lam_plus * t).exp();
        (e * ratio, e * (1.0 + lam_minus * ratio))
    } else {
        let b = z.sqrt();
        let e = (-0.5 * t).exp();
        let (s, c) = (b * t).sin_cos();
        (e * s / b, e * (c - s / (2.0 * b)))
    }
}

/// `(K(t,|ξ|), ∂ₜK(t,|ξ|))`.
pub fn kernel(t: f64, xi: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    Ok(kernel_unchecked(t, xi))
}

/// Per-lattice-point `(K, ∂ₜK)` on a grid.
pub fn kernel_symbols(grid: &TorusGrid, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_time(t)?;
    Ok(grid.freq_abs().iter().map(|&k| kernel_unchecked(t, k)).unzip())
}

/// `D(t)g`.
pub fn apply_d(t: f64, g: &GridField) -> Result<GridField> {
    let (k, _) = kernel_symbols(g.grid(), t)?;
    Ok(crate::grid::apply_symbol(&k, g))
}

/// `∂ₜD(t)g`.
pub fn apply_dtd(t: f64, g: &GridField) -> Result<GridField> {
    let (_, dk) = kernel_symbols(g.grid(), t)?;
    Ok(crate::grid::apply_symbol(&dk, g))
}

/// `D(t)(u₀ + u₁) + ∂ₜD(t)u₀`.
pub fn linear_solution(u0: &GridField, u1: &GridField, t: f64) -> Result<GridField> {
    Ok(linear_pair(u0, u1, t)?.0)
}

/// Solution and its time derivative of the linear problem with data
/// `(u₀, u₁)` at time `t`.
pub fn linear_pair(u0: &GridField, u1: &GridField, t: f64) -> Result<(GridField, GridField)> {
    u0.check_same_grid(u1)?;
    let flow = PairFlow::new(u0.grid(), t)?;
    let (a, b) = flow.apply(u0.spectrum().coeffs(), u1.spectrum().coeffs());
    let grid = u0.grid();
    Ok((
        GridField::from_trusted(grid, grid.inverse_real_unchecked(&a)),
        GridField::from_trusted(grid, grid.inverse_real_unchecked(&b)),
    ))
}

/// Linear flow on `(û, ∂ₜû)` over a fixed step:
/// `[[K'+K, K], [−|ξ|²K, K']]` per mode.
#[derive(Debug, Clone)]
pub struct PairFlow {
    pub(crate) k: Vec<f64>,
    pub(crate) dk: Vec<f64>,
    xi2: Vec<f64>,
}

impl PairFlow {
    pub fn new(grid: &TorusGrid, t: f64) -> Result<Self> {
        let (k, dk) = kernel_symbols(grid, t)?;
        let xi2 = grid.freq_abs().iter().map(|x| x * x).collect();
        Ok(Self { k, dk, xi2 })
    }

    pub fn apply(&self, u: &[Complex64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut a = Vec::with_capacity(u.len());
        let mut b = Vec::with_capacity(u.len());
        for i in 0..u.len() {
            let (k, dk) = (self.k[i], self.dk[i]);
            a.push(u[i] * (dk + k) + v[i] * k);
            b.push(u[i] * (-self.xi2[i] * k) + v[i] * dk);
        }
        (a, b)
    }
}

/// Norm family used by [`verify_lp_lq`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormFamily {
    /// `L^p` on the left, `L^q` and `H^{β−1}_p` on the right.
    Lebesgue,
    /// `Ḃ^{s₁}_{p,2}` on the left, `Ḃ^{s₂}_{q,2}` and `Ḃ^{s₁+β−1}_{p,2}` on
    /// the right.
    Besov,
}

/// Exponents of a decay estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpLqSpec {
    pub p: f64,
    pub q: f64,
    pub s1: f64,
    pub s2: f64,
    pub family: NormFamily,
    /// Window of the low-frequency decay fit; defaults to the last decade.
    pub fit_window: Option<(f64, f64)>,
}

impl LpLqSpec {
    pub fn lebesgue(p: f64, q: f64) -> Self {
        Self {
            p,
            q,
            s1: 0.0,
            s2: 0.0,
            family: NormFamily::Lebesgue,
            fit_window: None,
        }
    }

    pub fn besov(p: f64, q: f64, s1: f64, s2: f64) -> Self {
        Self {
            p,
            q,
            s1,
            s2,
            family: NormFamily::Besov,
            fit_window: None,
        }
    }

    pub fn window(mut self, lo: f64, hi: f64) -> Self {
        self.fit_window = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.q >= 1.0 && self.q <= self.p && self.p.is_finite(), || {
            format!("need 1 ≤ q ≤ p < ∞ (got p = {}, q = {})", self.p, self.q)
        })?;
        ensure(self.p != 1.0, || "p = 1 is excluded".into())?;
        ensure(self.s1 >= self.s2, || format!("need s1 ≥ s2 (got {} < {})", self.s1, self.s2))?;
        if self.family == NormFamily::Lebesgue {
            ensure(self.s1 == 0.0 && self.s2 == 0.0, || "Lebesgue estimates carry no smoothness shift".into())?;
        }
        Ok(())
    }

    /// `β = (n−1)|1/2 − 1/p|`.
    pub fn beta(&self, n: usize) -> f64 {
        (n as f64 - 1.0) * (0.5 - 1.0 / self.p).abs()
    }

    /// Predicted low-frequency exponent `−(n/2)(1/q−1/p) − (s₁−s₂)/2`.
    pub fn low_rate(&self, n: usize) -> f64 {
        -(n as f64) / 2.0 * (1.0 / self.q - 1.0 / self.p) - (self.s1 - self.s2) / 2.0
    }

    fn lhs(&self, f: &GridField) -> Result<f64> {
        match self.family {
            NormFamily::Lebesgue => lebesgue_norm(f, self.p),
            NormFamily::Besov => Ok(BlockDecomposition::new(f).homogeneous(self.s1, self.p, 2.0)),
        }
    }

    fn low_data(&self, low: &GridField) -> Result<f64> {
        match self.family {
            NormFamily::Lebesgue => lebesgue_norm(low, self.q),
            NormFamily::Besov => Ok(BlockDecomposition::new(low).homogeneous(self.s2, self.q, 2.0)),
        }
    }

    fn high_data(&self, high: &GridField, beta: f64) -> Result<f64> {
        match self.family {
            NormFamily::Lebesgue => sobolev_norm(high, beta - 1.0, self.p),
            NormFamily::Besov => {
                Ok(BlockDecomposition::new(high).homogeneous(self.s1 + beta - 1.0, self.p, 2.0))
            }
        }
    }
}

/// Fits `δ` in `e^{t/2}·value(t) ≲ ⟨t⟩^δ` from samples with `t ≥ 1`; clamped
/// at zero. `None` when fewer than two usable samples exist.
pub fn fit_growth_exponent(ts: &[f64], values: &[f64]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t >= 1.0 && v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (bracket(t).ln(), v.ln() + t / 2.0))
        .unzip();
    fit_line(&xs, &ys).ok().map(|f| f.slope.max(0.0))
}

/// Tabulates a decay estimate for `D(t)g` over `ts`.
///
/// Scalars: `low_exponent` (fitted decay of `D(t)χ_{≤1}(∇)g`),
/// `expected_low_exponent`, `delta` (fitted high-frequency growth),
/// `max_ratio` (largest measured/bound).
pub fn verify_lp_lq(g: &GridField, spec: &LpLqSpec, ts: &[f64]) -> Result<ExperimentReport> {
    spec.validate()?;
    ensure(!ts.is_empty() && ts.iter().all(|&t| t >= 0.0 && t.is_finite()), || {
        "time grid must be nonempty and nonnegative".into()
    })?;
    let n = g.grid().dim();
    let beta = spec.beta(n);
    let blocks = g.grid().dyadic_blocks();
    let low = blocks.project(g, Projection::LowerThan(1.0))?;
    let high = blocks.project(g, Projection::GreaterThan(1.0))?;
    let low_data = spec.low_data(&low)?;
    let high_data = spec.high_data(&high, beta)?;
    let rate = spec.low_rate(n);

    let mut lhs = Vec::with_capacity(ts.len());
    let mut lhs_low = Vec::with_capacity(ts.len());
    let mut lhs_high = Vec::with_capacity(ts.len());
    for &t in ts {
        lhs.push(spec.lhs(&apply_d(t, g)?)?);
        lhs_low.push(spec.lhs(&apply_d(t, &low)?)?);
        lhs_high.push(spec.lhs(&apply_d(t, &high)?)?);
    }
    let normalized: Vec<f64> = lhs_high
        .iter()
        .map(|v| if high_data > 0.0 { v / high_data } else { 0.0 })
        .collect();
    let delta = fit_growth_exponent(ts, &normalized);

    let mut table = Table::new(
        "lp_lq",
        &["t", "lhs", "lhs_low", "lhs_high", "low_bound", "high_bound", "ratio"],
    );
    let mut max_ratio = 0.0f64;
    for (i, &t) in ts.iter().enumerate() {
        let lb = bracket(t).powf(rate) * low_data;
        let hb = (-0.5 * t).exp() * bracket(t).powf(delta.unwrap_or(0.0)) * high_data;
        let ratio = if lb + hb > 0.0 { lhs[i] / (lb + hb) } else { 0.0 };
        max_ratio = max_ratio.max(ratio);
        table.push(vec![t, lhs[i], lhs_low[i], lhs_high[i], lb, hb, ratio]);
    }

    let (lo, hi) = spec.fit_window.unwrap_or_else(|| last_decade(ts));
    let low_exponent = fit_decay(ts, &lhs_low, lo, hi).map(|f| f.slope).unwrap_or(f64::NAN);

    let mut report = ExperimentReport::new("verify-lp-lq");
    report
        .scalar("p", spec.p)
        .scalar("q", spec.q)
        .scalar("s1", spec.s1)
        .scalar("s2", spec.s2)
        .scalar("beta", beta)
        .scalar("low_exponent", low_exponent)
        .scalar("expected_low_exponent", rate)
        .scalar("delta", delta.unwrap_or(f64::NAN))
        .scalar("max_ratio", max_ratio)
        .scalar("fit_window_start", lo)
        .scalar("fit_window_end", hi)
        .scalar("low_data_norm", low_data)
        .scalar("high_data_norm", high_data)
        .note("family", format!("{:?}", spec.family).to_lowercase())
        .table(table);
    Ok(report)
}

/// Per-block comparison of `2^{ks₁}‖Δ_k D(t)g‖_{L^p}` with its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockEstimateReport {
    pub k: i32,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Fitted growth exponent for high blocks, `None` for low blocks.
    pub delta: Option<f64>,
}

/// Measured-to-bound ratios of one dyadic block; low-frequency form for
/// `k ≤ 0`, high-frequency form (with fitted `δ`) for `k > 0`.
pub fn verify_block_estimate(
    g: &GridField,
    k: i32,
    spec: &LpLqSpec,
    ts: &[f64],
) -> Result<BlockEstimateReport> {
    spec.validate()?;
    let blocks = g.grid().dyadic_blocks();
    if k < blocks.j_min() || k > blocks.j_max() {
        return Err(LabError::DyadicOutOfRange {
            j: k,
            j_min: blocks.j_min(),
            j_max: blocks.j_max(),
        });
    }
    let n = g.grid().dim();
    let gk = blocks.project(g, Projection::Annulus(k))?;
    let scale = |s: f64| 2f64.powf(k as f64 * s);
    let measured: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let dg = apply_d(t, g)?;
            let piece = blocks.project(&dg, Projection::Annulus(k))?;
            Ok(scale(spec.s1) * lebesgue_norm(&piece, spec.p)?)
        })
        .collect::<Result<_>>()?;

    let (ratios, delta) = if k <= 0 {
        let data = scale(spec.s2) * lebesgue_norm(&gk, spec.q)?;
        let rate = spec.low_rate(n);
        let r = ts
            .iter()
            .zip(&measured)
            .map(|(&t, &m)| if data > 0.0 { m / (bracket(t).powf(rate) * data) } else { 0.0 })
            .collect::<Vec<_>>();
        (r, None)
    } else {
        let beta = spec.beta(n);
        let data = scale(spec.s1 + beta - 1.0) * lebesgue_norm(&gk, spec.p)?;
        let normalized: Vec<f64> = measured
            .iter()
            .map(|m| if data > 0.0 { m / data } else { 0.0 })
            .collect();
        let delta = fit_growth_exponent(ts, &normalized).unwrap_or(0.0);
        let r = ts
            .iter()
            .zip(&normalized)
            .map(|(&t, &m)| m * (0.5 * t).exp() / bracket(t).powf(delta))
            .collect();
        (r, Some(delta))
    };
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BlockEstimateReport {
        k,
        times: ts.to_vec(),
        ratios,
        max_ratio,
        delta,
    })
}

/// Residual of the mode ODE `v'' + v' + |ξ|²v` for `v = K(·, ξ)` by central
/// differences with step `h` at time `t ≥ h`.
pub fn mode_ode_residual(t: f64, xi: f64, h: f64) -> f64 {
    let v = |s: f64| kernel_unchecked(s, xi).0;
    let (vm, v0, vp) = (v(t - h), v(t), v(t + h));
    let d2 = (vp - 2.0 * v0 + vm) / (h * h);
    let d1 = (vp - vm) / (2.0 * h);
    d2 + d1 + xi * xi * v0
}

/// Applies the pair flow to spectra held in a field pair.
#[cfg(test)]
pub(crate) fn evolve_pair(
    u: &GridField,
    v: &GridField,
    t: f64,
) -> Result<(GridField, GridField)> {
    let flow = PairFlow::new(u.grid(), t)?;
    let (a, b) = flow.apply(u.spectrum().coeffs(), v.spectrum().coeffs());
    let grid = u.grid();
    Ok((
        GridField::from_trusted(grid, grid.inverse_real_unchecked(&a)),
        GridField::from_trusted(grid, grid.inverse_real_unchecked(&b)),
    ))
}
