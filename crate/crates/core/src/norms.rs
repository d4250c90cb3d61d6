//! Lebesgue, Sobolev and Besov norms, problem parameters, and the weighted
//! space-time norms used by the fixed-point construction.

use rustfft::num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure, LabError, Result};
use crate::grid::{multiply_spectrum, GridField, TorusGrid};
use crate::littlewood_paley::{DyadicBlocks, Projection};

/// Japanese bracket `⟨t⟩ = √(1 + t²)`.
pub fn bracket(t: f64) -> f64 {
    t.hypot(1.0)
}

fn check_exponent(p: f64) -> Result<()> {
    ensure(p >= 1.0, || format!("Lebesgue exponent must be ≥ 1 (got {p})"))
}

/// `L^p` norm of raw samples with cell volume `dv`; scaled by the maximum to
/// keep large exponents from overflowing.
pub(crate) fn lp_of(values: &[f64], p: f64, dv: f64) -> f64 {
    let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| (v / m) * (v / m)).sum()
    } else {
        values.iter().map(|v| (v.abs() / m).powf(p)).sum()
    };
    m * (sum * dv).powf(1.0 / p)
}

/// `‖f‖_{L^p}` by quadrature; `p = ∞` gives the sample maximum.
pub fn lebesgue_norm(f: &GridField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_of(f.values(), p, f.grid().cell_volume()))
}

/// Parameters of a Besov (semi)norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovParams {
    /// Homogeneous `Ḃ^s_{p,2}`.
    pub fn homogeneous(s: f64, p: f64) -> Self {
        Self {
            s,
            p,
            q: 2.0,
            homogeneous: true,
        }
    }

    /// Inhomogeneous `B^s_{p,2}`.
    pub fn inhomogeneous(s: f64, p: f64) -> Self {
        Self {
            s,
            p,
            q: 2.0,
            homogeneous: false,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        ensure(self.q >= 1.0, || format!("summability exponent must be ≥ 1 (got {})", self.q))?;
        ensure(self.s.is_finite(), || "smoothness must be finite".into())
    }
}

fn lq_combine(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else if q == 2.0 {
        terms.map(|t| t * t).sum::<f64>().sqrt()
    } else {
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Dyadic pieces `Δ_j f` of a field, kept either as spectra (for `L²`
/// shortcuts) or real samples.
pub struct BlockDecomposition {
    grid: TorusGrid,
    indices: Vec<i32>,
    spectra: Vec<Vec<Complex64>>,
    real: Vec<Vec<f64>>,
}

impl BlockDecomposition {
    /// Decomposes `f` over the grid's default dyadic range.
    pub fn new(f: &GridField) -> Self {
        Self::with_blocks(f, &f.grid().dyadic_blocks())
    }

    pub fn with_blocks(f: &GridField, blocks: &DyadicBlocks) -> Self {
        let grid = f.grid().clone();
        let spec = f.spectrum();
        let indices: Vec<i32> = blocks.indices().collect();
        let spectra: Vec<Vec<Complex64>> = indices
            .iter()
            .map(|&j| multiply_spectrum(spec, &blocks.annulus_symbol(j)).into_coeffs())
            .collect();
        let real = spectra
            .iter()
            .map(|c| grid.inverse_real_unchecked(c))
            .collect();
        Self {
            grid,
            indices,
            spectra,
            real,
        }
    }

    pub fn indices(&self) -> &[i32] {
        &self.indices
    }

    /// `‖Δ_j f‖_{L^p}` for every block.
    pub fn lp_norms(&self, p: f64) -> Vec<f64> {
        if p == 2.0 {
            let w = self.grid.spectral_cell_volume();
            self.spectra
                .iter()
                .map(|c| (c.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt())
                .collect()
        } else {
            let dv = self.grid.cell_volume();
            self.real.iter().map(|v| lp_of(v, p, dv)).collect()
        }
    }

    /// Homogeneous `Ḃ^s_{p,q}` seminorm from the stored blocks.
    pub fn homogeneous(&self, s: f64, p: f64, q: f64) -> f64 {
        let norms = self.lp_norms(p);
        lq_combine(
            self.indices
                .iter()
                .zip(norms)
                .map(|(&j, n)| 2f64.powf(j as f64 * s) * n),
            q,
        )
    }
}

/// `‖f‖_{Ḃ^s_{p,q}}` (DC excluded) or `‖f‖_{B^s_{p,q}}`.
pub fn besov_seminorm(f: &GridField, bp: &BesovParams) -> Result<f64> {
    bp.validate()?;
    let blocks = f.grid().dyadic_blocks();
    let dec = BlockDecomposition::new(f);
    if bp.homogeneous {
        return Ok(dec.homogeneous(bp.s, bp.p, bp.q));
    }
    // low part Δ_{≤0} = χ_{≤1}(∇), then blocks j ≥ 1
    let low = blocks.project(f, Projection::LowerThan(1.0))?;
    let low_norm = lebesgue_norm(&low, bp.p)?;
    let norms = dec.lp_norms(bp.p);
    let high = lq_combine(
        dec.indices()
            .iter()
            .zip(norms)
            .filter(|(&j, _)| j >= 1)
            .map(|(&j, n)| 2f64.powf(j as f64 * bp.s) * n),
        bp.q,
    );
    Ok(low_norm + high)
}

/// `‖⟨∇⟩^s f‖_{L^p}` for `p ∈ (1, ∞)`.
pub fn sobolev_norm(f: &GridField, s: f64, p: f64) -> Result<f64> {
    ensure(p > 1.0 && p.is_finite(), || {
        format!("Sobolev exponent must lie in (1, ∞) (got {p})")
    })?;
    let g = crate::grid::apply_radial(|k| (1.0 + k * k).powf(s / 2.0), f)?;
    lebesgue_norm(&g, p)
}

/// Parameters `(n, r, s, p)` of the nonlinear problem with derived exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub p: u32,
    pub beta: f64,
    pub eta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub eps: f64,
    pub fujita: f64,
}

impl ProblemParams {
    pub fn new(n: usize, r: f64, s: f64, p: u32) -> Result<Self> {
        Self::build(n, r, s, p, None)
    }

    /// Same as [`ProblemParams::new`] with an explicit `ε` in `σ₁`.
    pub fn with_eps(n: usize, r: f64, s: f64, p: u32, eps: f64) -> Result<Self> {
        Self::build(n, r, s, p, Some(eps))
    }

    fn build(n: usize, r: f64, s: f64, p: u32, eps: Option<f64>) -> Result<Self> {
        ensure((1..=3).contains(&n), || format!("dimension must be 1, 2 or 3 (got {n})"))?;
        ensure(r > 2.0 && r.is_finite(), || format!("r must lie in (2, ∞) (got {r})"))?;
        ensure(s > 0.0 && s.is_finite(), || format!("s must be positive (got {s})"))?;
        ensure(p >= 2, || format!("nonlinearity power must be an integer ≥ 2 (got {p})"))?;
        let nf = n as f64;
        let pf = p as f64;
        let beta = (nf - 1.0) * (0.5 - 1.0 / r);
        let eta = (s - 1.0) / 2.0 + nf / 2.0 * (pf / r - 0.5);
        let sigma2 = if 2.0 * s >= nf {
            r
        } else {
            r.min(2.0 * nf / (pf * (nf - 2.0 * s)))
        };
        let base = 1f64.max(r / pf);
        let eps = eps.unwrap_or(0.05 * (sigma2 - base));
        let sigma1 = base + eps;
        if !(eps > 0.0 && sigma1 < sigma2) {
            return Err(LabError::InvalidParameter(format!(
                "σ₁ = {sigma1} must be below σ₂ = {sigma2} with ε > 0 (ε = {eps})"
            )));
        }
        Ok(Self {
            n,
            r,
            s,
            p,
            beta,
            eta,
            sigma1,
            sigma2,
            eps,
            fujita: 1.0 + 2.0 * r / nf,
        })
    }

    /// Exponent of `⟨t⟩` multiplying `‖φ‖_{Ḃ^s_{2,2}}` in the solution norm.
    pub fn x_weight_exponent(&self) -> f64 {
        self.s / 2.0 - self.n as f64 / 2.0 * (0.5 - 1.0 / self.r)
    }

    /// Exponent of `⟨t⟩` multiplying `‖ψ‖_{Ḃ^0_{γ,2}}` in the source norm.
    pub fn y_gamma_exponent(&self, gamma: f64) -> f64 {
        self.n as f64 / 2.0 * (self.p as f64 / self.r - 1.0 / gamma)
    }
}

/// Point where a run left the trustworthy regime.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EscapeEvent {
    pub time: f64,
    pub max_abs: f64,
    pub tail_fraction: f64,
    /// `true` when the sup-norm cap was hit, `false` when only the spectral
    /// tail triggered.
    pub cap_exceeded: bool,
}

/// Time-indexed fields on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TorusGrid,
    times: Vec<f64>,
    fields: Vec<GridField>,
    escape: Option<EscapeEvent>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<GridField>) -> Result<Self> {
        ensure(!times.is_empty(), || "trajectory needs at least one time".into())?;
        if times.len() != fields.len() {
            return Err(LabError::LengthMismatch {
                expected: times.len(),
                got: fields.len(),
            });
        }
        ensure(times[0] == 0.0, || format!("trajectory must start at t = 0 (got {})", times[0]))?;
        ensure(times.windows(2).all(|w| w[1] > w[0]) && times.iter().all(|t| t.is_finite()), || {
            "trajectory times must be finite and strictly increasing".into()
        })?;
        let grid = fields[0].grid().clone();
        for f in &fields[1..] {
            fields[0].check_same_grid(f)?;
        }
        Ok(Self {
            grid,
            times,
            fields,
            escape: None,
        })
    }

    pub(crate) fn with_escape(mut self, escape: Option<EscapeEvent>) -> Self {
        self.escape = escape;
        self
    }

    /// Trajectory with every field zero.
    pub fn zeros(grid: &TorusGrid, times: Vec<f64>) -> Result<Self> {
        let fields = times.iter().map(|_| GridField::zeros(grid)).collect();
        Self::new(times, fields)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[GridField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn escape(&self) -> Option<&EscapeEvent> {
        self.escape.as_ref()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn scaled(&self, a: f64) -> Trajectory {
        Trajectory {
            grid: self.grid.clone(),
            times: self.times.clone(),
            fields: self.fields.iter().map(|f| f.scaled(a)).collect(),
            escape: self.escape.clone(),
        }
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(LabError::InvalidParameter(
                "trajectories sampled at different times".into(),
            ));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.times.clone(), fields)
    }

    /// Keeps nodes with `t ≤ t_max`.
    pub fn truncated(&self, t_max: f64) -> Trajectory {
        let k = self.times.iter().take_while(|&&t| t <= t_max).count().max(1);
        Trajectory {
            grid: self.grid.clone(),
            times: self.times[..k].to_vec(),
            fields: self.fields[..k].to_vec(),
            escape: self.escape.clone(),
        }
    }
}

/// Per-node terms of the solution norm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct XSample {
    pub t: f64,
    /// `‖φ(t)‖_{Ḃ^s_{2,2}}`.
    pub regular: f64,
    /// `‖φ(t)‖_{Ḃ^0_{r,2}}`.
    pub decay: f64,
    /// `⟨t⟩^{s/2−(n/2)(1/2−1/r)}·regular + decay`.
    pub weighted: f64,
}

pub fn x_norm_series(traj: &Trajectory, pp: &ProblemParams) -> Vec<XSample> {
    let a = pp.x_weight_exponent();
    traj.times
        .par_iter()
        .zip(traj.fields.par_iter())
        .map(|(&t, f)| {
            let dec = BlockDecomposition::new(f);
            let regular = dec.homogeneous(pp.s, 2.0, 2.0);
            let decay = dec.homogeneous(0.0, pp.r, 2.0);
            XSample {
                t,
                regular,
                decay,
                weighted: bracket(t).powf(a) * regular + decay,
            }
        })
        .collect()
}

/// Solution norm: max over nodes of the weighted sum.
pub fn x_norm(traj: &Trajectory, pp: &ProblemParams) -> f64 {
    x_norm_series(traj, pp)
        .iter()
        .fold(0.0, |m, x| m.max(x.weighted))
}

/// Geometric grid on `[a, b]` with `interior` points strictly inside plus both
/// endpoints.
pub fn gamma_grid(a: f64, b: f64, interior: usize) -> Vec<f64> {
    let m = interior + 1;
    (0..=m)
        .map(|i| {
            if i == 0 {
                a
            } else if i == m {
                b
            } else {
                a * (b / a).powf(i as f64 / m as f64)
            }
        })
        .collect()
}

/// Default number of interior points of the `γ` grid.
pub const GAMMA_INTERIOR_POINTS: usize = 8;

/// Per-node source norm value.
pub fn y_norm_series(traj: &Trajectory, pp: &ProblemParams, gammas: &[f64]) -> Vec<f64> {
    let blocks = traj.grid.dyadic_blocks();
    traj.times
        .par_iter()
        .zip(traj.fields.par_iter())
        .map(|(&t, psi)| {
            let dec = BlockDecomposition::new(psi);
            let regular = if pp.s <= 1.0 {
                let hi = blocks
                    .project(psi, Projection::GreaterThan(1.0))
                    .expect("positive scale");
                BlockDecomposition::new(&hi).homogeneous(pp.s - 1.0, 2.0, 2.0)
            } else {
                dec.homogeneous(pp.s - 1.0, 2.0, 2.0)
            };
            let wt = bracket(t);
            let lebesgue = gammas
                .iter()
                .map(|&g| wt.powf(pp.y_gamma_exponent(g)) * dec.homogeneous(0.0, g, 2.0))
                .fold(0.0, f64::max);
            wt.powf(pp.eta) * regular + lebesgue
        })
        .collect()
}

/// Source norm with the default `γ` grid on `[σ₁, σ₂]`.
pub fn y_norm(traj: &Trajectory, pp: &ProblemParams) -> f64 {
    let gammas = gamma_grid(pp.sigma1, pp.sigma2, GAMMA_INTERIOR_POINTS);
    y_norm_with(traj, pp, &gammas)
}

pub fn y_norm_with(traj: &Trajectory, pp: &ProblemParams, gammas: &[f64]) -> f64 {
    y_norm_series(traj, pp, gammas)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Tolerance on the scaling identity of the interpolation inequality.
pub const SCALING_TOLERANCE: f64 = 1e-10;

/// `‖f‖_{Ḃ^α_{q,2}} / (‖f‖_{Ḃ^0_{r,2}}^{1−θ} ‖f‖_{Ḃ^s_{2,2}}^θ)`.
pub fn interpolation_check(
    f: &GridField,
    pp: &ProblemParams,
    q: f64,
    alpha: f64,
    theta: f64,
) -> Result<f64> {
    check_exponent(q)?;
    ensure((0.0..=1.0).contains(&theta), || format!("θ must lie in [0, 1] (got {theta})"))?;
    let n = pp.n as f64;
    let lhs = n / q - alpha;
    let rhs = (1.0 - theta) * n / pp.r + theta * (n / 2.0 - pp.s);
    ensure((lhs - rhs).abs() <= SCALING_TOLERANCE, || {
        format!("scaling relation violated: n/q − α = {lhs} but the right side is {rhs}")
    })?;
    ensure(alpha <= theta * pp.s + SCALING_TOLERANCE, || {
        format!("α = {alpha} exceeds θs = {}", theta * pp.s)
    })?;
    let dec = BlockDecomposition::new(f);
    let num = dec.homogeneous(alpha, q, 2.0);
    let den = dec.homogeneous(0.0, pp.r, 2.0).powf(1.0 - theta)
        * dec.homogeneous(pp.s, 2.0, 2.0).powf(theta);
    if den == 0.0 {
        return Err(LabError::UndefinedRatio);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn band_field(grid: &TorusGrid, seed: u64, kmax: usize) -> GridField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, f64, f64)> = (1..=kmax)
            .map(|k| (grid.freq(k as i64), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        GridField::from_fn(grid, |x| {
            modes.iter().map(|(k, a, ph)| a * (k * x[0] + ph).cos()).sum()
        })
        .unwrap()
    }

    #[test]
    fn lebesgue_basics() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let one = GridField::constant(&g, 1.0).unwrap();
        assert!((lebesgue_norm(&one, 1.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(lebesgue_norm(&one, 0.5).is_err());
        let f = band_field(&g, 1, 10);
        let l2 = lebesgue_norm(&f, 2.0).unwrap();
        assert!((l2 - f.spectrum().l2_norm()).abs() < 1e-12 * l2);
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), f.max_abs());
    }

    #[test]
    fn besov_of_zero_is_zero() {
        let g = make_grid(2, 16, 10.0).unwrap();
        let z = GridField::zeros(&g);
        assert_eq!(besov_seminorm(&z, &BesovParams::homogeneous(1.0, 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn besov_p2_matches_quadrature() {
        let g = make_grid(1, 128, 40.0).unwrap();
        let f = band_field(&g, 3, 40);
        let dec = BlockDecomposition::new(&f);
        let fast = dec.lp_norms(2.0);
        let dv = g.cell_volume();
        for (a, v) in fast.iter().zip(&dec.real) {
            let slow = lp_of(v, 2.0, dv);
            assert!((a - slow).abs() <= 1e-12 * (1.0 + slow));
        }
    }

    #[test]
    fn single_annulus_scaling() {
        // a mode at ξ₀ = 2^{j₀}·0.75 lies strictly inside the annulus
        let l = 2.0 * PI * 32.0;
        let g = make_grid(1, 512, l).unwrap();
        let k = 24; // ξ = 24·2π/L = 0.75
        let f = GridField::from_fn(&g, |x| (g.freq(k) * x[0]).cos()).unwrap();
        let j0 = 0;
        let a = besov_seminorm(&f, &BesovParams::homogeneous(0.0, 2.0)).unwrap();
        let b = besov_seminorm(&f, &BesovParams::homogeneous(1.0, 2.0)).unwrap();
        let ratio = b / a;
        let scale = 2f64.powi(j0);
        assert!(ratio >= scale / 2.0 && ratio <= scale * 2.0, "{ratio}");
        let dec = BlockDecomposition::new(&f);
        for (&j, n) in dec.indices().iter().zip(dec.lp_norms(2.0)) {
            if !(j0 - 1..=j0 + 1).contains(&j) {
                assert!(n < 1e-12);
            }
        }
    }

    #[test]
    fn homogeneous_excludes_mean() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let f = band_field(&g, 4, 8);
        let shifted = GridField::new(&g, f.values().iter().map(|v| v + 3.0).collect()).unwrap();
        let bp = BesovParams::homogeneous(0.5, 2.0);
        let a = besov_seminorm(&f, &bp).unwrap();
        let b = besov_seminorm(&shifted, &bp).unwrap();
        assert!((a - b).abs() < 1e-10 * a);
        let inh = BesovParams::inhomogeneous(0.5, 2.0);
        assert!(besov_seminorm(&shifted, &inh).unwrap() > besov_seminorm(&f, &inh).unwrap());
    }

    #[test]
    fn sobolev_cases() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| x[0].sin()).unwrap();
        let l2 = lebesgue_norm(&f, 2.0).unwrap();
        assert!((sobolev_norm(&f, 0.0, 2.0).unwrap() - l2).abs() < 1e-12);
        assert!((sobolev_norm(&f, 2.0, 2.0).unwrap() - 2.0 * l2).abs() < 1e-12);
        let h = GridField::from_fn(&g, |x| (7.0 * x[0]).sin()).unwrap();
        let r = sobolev_norm(&h, 1.0, 2.0).unwrap() / sobolev_norm(&h, 0.0, 2.0).unwrap();
        assert!((r - 50f64.sqrt()).abs() < 1e-12);
        assert!(sobolev_norm(&f, 1.0, 1.0).is_err());
        assert!(sobolev_norm(&f, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn problem_params_derived_values() {
        let pp = ProblemParams::new(1, 4.0, 5.0, 9).unwrap();
        assert_eq!(pp.beta, 0.0);
        assert_eq!(pp.sigma2, 4.0);
        assert!((pp.sigma1 - (1.0 + 0.05 * 3.0)).abs() < 1e-15);
        assert_eq!(pp.fujita, 9.0);
        assert!((pp.eta - (2.0 + 0.5 * (9.0 / 4.0 - 0.5))).abs() < 1e-15);
        let pp = ProblemParams::new(3, 3.0, 0.9, 2).unwrap();
        // 2s < n: σ₂ = min{3, 6/(2·1.2)} = 2.5
        assert!((pp.sigma2 - 2.5).abs() < 1e-12);
        assert!(ProblemParams::new(1, 2.0, 1.0, 2).is_err());
        assert!(ProblemParams::with_eps(1, 4.0, 5.0, 9, 10.0).is_err());
    }

    #[test]
    fn x_norm_special_cases() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 3).unwrap();
        let z = Trajectory::zeros(&g, vec![0.0, 1.0]).unwrap();
        assert_eq!(x_norm(&z, &pp), 0.0);
        assert_eq!(y_norm(&z, &pp), 0.0);

        let f = band_field(&g, 7, 12);
        let single = Trajectory::new(vec![0.0], vec![f.clone()]).unwrap();
        let expect = besov_seminorm(&f, &BesovParams::homogeneous(2.0, 2.0)).unwrap()
            + besov_seminorm(&f, &BesovParams::homogeneous(0.0, 4.0)).unwrap();
        assert!((x_norm(&single, &pp) - expect).abs() < 1e-12 * expect);

        let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let stat = Trajectory::new(times.clone(), vec![f.clone(); 11]).unwrap();
        let w = bracket(10.0).powf(pp.x_weight_exponent());
        let expect = w * besov_seminorm(&f, &BesovParams::homogeneous(2.0, 2.0)).unwrap()
            + besov_seminorm(&f, &BesovParams::homogeneous(0.0, 4.0)).unwrap();
        assert!((x_norm(&stat, &pp) - expect).abs() < 1e-12 * expect);
        assert!((x_norm(&stat.scaled(3.0), &pp) - 3.0 * x_norm(&stat, &pp)).abs() < 1e-12 * expect);
    }

    #[test]
    fn y_norm_branches() {
        let g = make_grid(1, 128, 20.0).unwrap();
        let f = band_field(&g, 8, 30);
        let low = Trajectory::new(vec![0.0], vec![f.clone()]).unwrap();
        let rough = ProblemParams::new(1, 4.0, 0.8, 2).unwrap();
        let smooth = ProblemParams::new(1, 4.0, 1.5, 2).unwrap();
        let gammas = gamma_grid(rough.sigma1, rough.sigma2, 8);
        assert_eq!(gammas.len(), 10);
        let yl = y_norm_with(&low, &rough, &gammas);
        let hi = project_hi(&f);
        let expect = besov_seminorm(&hi, &BesovParams::homogeneous(-0.2, 2.0)).unwrap()
            + gammas
                .iter()
                .map(|&gm| besov_seminorm(&f, &BesovParams::homogeneous(0.0, gm)).unwrap())
                .fold(0.0, f64::max);
        assert!((yl - expect).abs() < 1e-12 * expect);
        let gammas = gamma_grid(smooth.sigma1, smooth.sigma2, 8);
        let ys = y_norm_with(&low, &smooth, &gammas);
        let expect = besov_seminorm(&f, &BesovParams::homogeneous(0.5, 2.0)).unwrap()
            + gammas
                .iter()
                .map(|&gm| besov_seminorm(&f, &BesovParams::homogeneous(0.0, gm)).unwrap())
                .fold(0.0, f64::max);
        assert!((ys - expect).abs() < 1e-12 * expect);
    }

    fn project_hi(f: &GridField) -> GridField {
        crate::littlewood_paley::project(f, Projection::GreaterThan(1.0)).unwrap()
    }

    #[test]
    fn interpolation_endpoints() {
        let g = make_grid(1, 128, 30.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 3).unwrap();
        let f = band_field(&g, 11, 40);
        assert!((interpolation_check(&f, &pp, 4.0, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((interpolation_check(&f, &pp, 2.0, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(interpolation_check(&f, &pp, 3.0, 0.0, 0.5).is_err());
        let z = GridField::zeros(&g);
        assert_eq!(interpolation_check(&z, &pp, 4.0, 0.0, 0.0), Err(LabError::UndefinedRatio));
    }
}
