//! Periodic torus discretization, the symmetric Fourier transform and
//! Fourier multipliers.
//!
//! The torus `[-L/2, L/2)^n` is sampled on `N^n` points. Spectral
//! coefficients approximate the continuum transform
//! `(2π)^{-n/2} ∫ e^{-i x·ξ} f(x) dx` at the lattice frequencies
//! `ξ_k = 2πk/L`, `k ∈ [-N/2, N/2)`, so the same function sampled on a finer
//! grid has (up to aliasing) the same coefficients. Zero-padding and
//! truncation therefore just copy coefficients by frequency.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};
use crate::littlewood_paley::DyadicBlocks;

/// Relative tolerance on the Hermitian asymmetry of a spectrum that is
/// converted back into a real field.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Identity of a grid: dimension, points per axis and box length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

struct GridInner {
    shape: GridShape,
    spacing: f64,
    total: usize,
    /// `|ξ|` at every lattice point, FFT ordering.
    freq_abs: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded: Mutex<HashMap<usize, TorusGrid>>,
    dyadic: OnceLock<Arc<DyadicBlocks>>,
}

/// Discretized periodic box. Cheap to clone; clones share plans and caches.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim())
            .field("points", &self.points())
            .field("length", &self.length())
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.shape() == other.shape()
    }
}

/// Builds a grid with `points` samples per axis on a box of side `length`.
pub fn make_grid(dim: usize, points: usize, length: f64) -> Result<TorusGrid> {
    TorusGrid::new(dim, points, length)
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if points % 2 != 0 {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be even (got odd {points})"
            )));
        }
        if points < 8 {
            return Err(LabError::InvalidGrid(format!(
                "points per axis must be at least 8 (got {points})"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "box length must be positive (got {length})"
            )));
        }
        let total = points.pow(dim as u32);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);

        let dk = 2.0 * PI / length;
        let mut freq_abs = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let sq: f64 = idx
                .iter()
                .map(|&i| {
                    let k = signed_index(i, points) as f64 * dk;
                    k * k
                })
                .sum();
            freq_abs.push(sq.sqrt());
            advance(&mut idx, points);
        }

        Ok(Self {
            inner: Arc::new(GridInner {
                shape: GridShape {
                    dim,
                    points,
                    length,
                },
                spacing: length / points as f64,
                total,
                freq_abs,
                forward,
                inverse,
                padded: Mutex::new(HashMap::new()),
                dyadic: OnceLock::new(),
            }),
        })
    }

    pub fn shape(&self) -> GridShape {
        self.inner.shape
    }

    pub fn dim(&self) -> usize {
        self.inner.shape.dim
    }

    pub fn points(&self) -> usize {
        self.inner.shape.points
    }

    pub fn length(&self) -> f64 {
        self.inner.shape.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.inner.total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one sample, `spacing^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    /// Spacing of the frequency lattice, `2π/L`.
    pub fn freq_step(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Angular frequency of integer wavenumber `k`.
    pub fn freq(&self, k: i64) -> f64 {
        self.freq_step() * k as f64
    }

    /// Largest representable frequency magnitude along one axis, `πN/L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points() as f64 / self.length()
    }

    /// Integer wavenumbers `[-N/2, N/2)` in ascending order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        let half = (self.points() / 2) as i64;
        (-half..half).collect()
    }

    /// `|ξ|` per lattice point in FFT ordering.
    pub fn freq_abs(&self) -> &[f64] {
        &self.inner.freq_abs
    }

    /// Frequency vector of flat spectral index `flat`.
    pub fn freq_vector(&self, flat: usize) -> Vec<f64> {
        unflatten(flat, self.points(), self.dim())
            .into_iter()
            .map(|i| self.freq(signed_index(i, self.points())))
            .collect()
    }

    /// Signed wavenumber multi-index of flat spectral index `flat`.
    pub fn wavevector(&self, flat: usize) -> Vec<i64> {
        unflatten(flat, self.points(), self.dim())
            .into_iter()
            .map(|i| signed_index(i, self.points()))
            .collect()
    }

    /// Flat spectral index of a signed wavenumber multi-index.
    pub fn spectral_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim() {
            return None;
        }
        let n = self.points() as i64;
        let mut flat = 0usize;
        for &ka in k {
            if ka < -n / 2 || ka >= n / 2 {
                return None;
            }
            flat = flat * self.points() + ka.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Physical coordinates of sample `flat`.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        let half = self.length() / 2.0;
        unflatten(flat, self.points(), self.dim())
            .into_iter()
            .map(|i| -half + i as f64 * h)
            .collect()
    }

    /// Same box sampled with `factor` times as many points per axis.
    pub fn padded(&self, factor: usize) -> TorusGrid {
        assert!(factor >= 1, "padding factor must be positive");
        if factor == 1 {
            return self.clone();
        }
        let mut cache = self.inner.padded.lock().expect("padded-grid cache poisoned");
        cache
            .entry(factor)
            .or_insert_with(|| {
                TorusGrid::new(self.dim(), self.points() * factor, self.length())
                    .expect("refinement of a valid grid is valid")
            })
            .clone()
    }

    /// Dyadic blocks with the default cutoff over the full representable range.
    pub fn dyadic_blocks(&self) -> Arc<DyadicBlocks> {
        self.inner
            .dyadic
            .get_or_init(|| Arc::new(DyadicBlocks::new(self)))
            .clone()
    }

    /// Grid-level Parseval-weight `(2π/L)^n` of one spectral cell.
    pub fn spectral_cell_volume(&self) -> f64 {
        self.freq_step().powi(self.dim() as i32)
    }

    fn transform_in_place(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.points();
        let dim = self.dim();
        let plan = if inverse {
            &self.inner.inverse
        } else {
            &self.inner.forward
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // innermost axis is contiguous
        plan.process_with_scratch(buf, &mut scratch);
        if dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..buf.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = buf[start + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        buf[start + i * stride] = *v;
                    }
                }
            }
        }
    }

    /// Checkerboard sign `(-1)^{Σ i_a}` shifting the origin to the box centre.
    fn centre_sign(&self, flat: usize) -> f64 {
        let n = self.points();
        let mut rem = flat;
        let mut parity = 0usize;
        for _ in 0..self.dim() {
            parity += rem % n;
            rem /= n;
        }
        if parity % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn forward_scale(&self) -> f64 {
        (2.0 * PI).powf(-(self.dim() as f64) / 2.0) * self.cell_volume()
    }

    fn inverse_scale(&self) -> f64 {
        (2.0 * PI).powf(-(self.dim() as f64) / 2.0) * self.spectral_cell_volume()
    }

    /// Forward transform of arbitrary complex samples.
    pub fn forward_complex(&self, samples: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.len());
        let mut buf = samples.to_vec();
        self.transform_in_place(&mut buf, false);
        let scale = self.forward_scale();
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= scale * self.centre_sign(i);
        }
        buf
    }

    /// Inverse transform producing complex samples.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.len());
        let scale = self.inverse_scale();
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (scale * self.centre_sign(i)))
            .collect();
        self.transform_in_place(&mut buf, true);
        buf
    }

    /// Inverse transform keeping only the real part. Callers guarantee the
    /// spectrum is Hermitian (e.g. radial real multipliers of real fields).
    pub(crate) fn inverse_real_unchecked(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(coeffs).into_iter().map(|c| c.re).collect()
    }

    /// Index of the Hermitian partner `-k` of flat index `flat`.
    pub fn partner_index(&self, flat: usize) -> usize {
        let n = self.points();
        let mut rem = flat;
        let mut out = 0usize;
        let mut mul = 1usize;
        for _ in 0..self.dim() {
            let i = rem % n;
            rem /= n;
            out += ((n - i) % n) * mul;
            mul *= n;
        }
        out
    }
}

/// Signed wavenumber of FFT index `i` on an `n`-point axis: `[-n/2, n/2)`.
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn unflatten(flat: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0usize; dim];
    let mut rem = flat;
    for a in (0..dim).rev() {
        idx[a] = rem % n;
        rem /= n;
    }
    idx
}

fn advance(idx: &mut [usize], n: usize) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < n {
            return;
        }
        idx[a] = 0;
    }
}

/// Real samples on a grid. Immutable; the spectrum is computed once on demand.
#[derive(Clone)]
pub struct GridField {
    grid: TorusGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<SpectralField>>,
}

impl fmt::Debug for GridField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridField")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .finish()
    }
}

impl GridField {
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite { index });
        }
        Ok(Self::from_trusted(grid, values))
    }

    pub(crate) fn from_trusted(grid: &TorusGrid, values: Vec<f64>) -> Self {
        Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::from_trusted(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cached forward transform.
    pub fn spectrum(&self) -> &SpectralField {
        self.spectrum.get_or_init(|| Arc::new(forward_uncached(self)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, a: f64) -> GridField {
        Self::from_trusted(&self.grid, self.values.iter().map(|v| a * v).collect())
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &GridField, b: f64) -> Result<GridField> {
        self.check_same_grid(other)?;
        Ok(Self::from_trusted(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    /// Mean-free part (DC coefficient removed).
    pub fn without_mean(&self) -> GridField {
        let m = self.mean();
        Self::from_trusted(&self.grid, self.values.iter().map(|v| v - m).collect())
    }
}

/// Fourier coefficients on the lattice of a grid, FFT ordering.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(LabError::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        if let Some(index) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(LabError::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_trusted(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at signed wavenumber `k`.
    pub fn at(&self, k: &[i64]) -> Option<Complex64> {
        self.grid.spectral_index(k).map(|i| self.coeffs[i])
    }

    /// Largest `|c(-k) - conj(c(k))|` relative to the largest coefficient.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        self.asymmetry_abs() / scale
    }

    fn asymmetry_abs(&self) -> f64 {
        (0..self.coeffs.len()).fold(0.0f64, |m, i| {
            let j = self.grid.partner_index(i);
            m.max((self.coeffs[j] - self.coeffs[i].conj()).norm())
        })
    }

    /// `(Σ |c_k|² (2π/L)^n)^{1/2}`, equal to the discrete L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spectral_cell_volume())
            .sqrt()
    }
}

fn forward_uncached(f: &GridField) -> SpectralField {
    let samples: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    SpectralField::from_trusted(&f.grid, f.grid.forward_complex(&samples))
}

/// Discrete analogue of the symmetric Fourier transform.
pub fn forward_transform(f: &GridField) -> SpectralField {
    f.spectrum().clone()
}

/// Inverse transform to a real field. Rejects non-Hermitian spectra.
pub fn inverse_transform(spec: &SpectralField) -> Result<GridField> {
    let asymmetry = spec.hermitian_asymmetry();
    if asymmetry > HERMITIAN_TOLERANCE {
        return Err(LabError::NotHermitian { asymmetry });
    }
    let values = spec.grid.inverse_real_unchecked(&spec.coeffs);
    let field = GridField::new(&spec.grid, values)?;
    Ok(field)
}

/// Inverse transform without the real-output restriction.
pub fn inverse_transform_complex(spec: &SpectralField) -> Vec<Complex64> {
    spec.grid.inverse_complex(&spec.coeffs)
}

/// `F^{-1}[m(ξ) f̂(ξ)]` for a real multiplier evaluated at every lattice
/// frequency vector. The result must be real (e.g. `m` even).
pub fn apply_multiplier(m: impl Fn(&[f64]) -> f64, f: &GridField) -> Result<GridField> {
    let grid = f.grid();
    let mut symbol = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let v = m(&grid.freq_vector(i));
        if !v.is_finite() {
            return Err(LabError::NonFiniteMultiplier { index: i });
        }
        symbol.push(v);
    }
    let spec = multiply_spectrum(f.spectrum(), &symbol);
    // measured against the input so that strongly damping symbols do not
    // magnify roundoff
    let input = f.spectrum().coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let scale = input * symbol.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        let asymmetry = spec.asymmetry_abs() / scale;
        if asymmetry > HERMITIAN_TOLERANCE {
            return Err(LabError::NotHermitian { asymmetry });
        }
    }
    Ok(GridField::from_trusted(grid, grid.inverse_real_unchecked(&spec.coeffs)))
}

/// Radial multiplier `m(|ξ|)`; the output is real for real input.
pub fn apply_radial(m: impl Fn(f64) -> f64, f: &GridField) -> Result<GridField> {
    let symbol = radial_symbol(f.grid(), m)?;
    Ok(apply_symbol(&symbol, f))
}

/// Evaluates a radial multiplier on the lattice, rejecting non-finite values.
pub fn radial_symbol(grid: &TorusGrid, m: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    for (index, &k) in grid.freq_abs().iter().enumerate() {
        let v = m(k);
        if !v.is_finite() {
            return Err(LabError::NonFiniteMultiplier { index });
        }
        out.push(v);
    }
    Ok(out)
}

/// Applies a precomputed real, even symbol (one value per lattice point).
pub fn apply_symbol(symbol: &[f64], f: &GridField) -> GridField {
    let spec = multiply_spectrum(f.spectrum(), symbol);
    GridField::from_trusted(f.grid(), spec.grid.inverse_real_unchecked(&spec.coeffs))
}

pub(crate) fn multiply_spectrum(spec: &SpectralField, symbol: &[f64]) -> SpectralField {
    debug_assert_eq!(symbol.len(), spec.coeffs.len());
    SpectralField::from_trusted(
        &spec.grid,
        spec.coeffs
            .iter()
            .zip(symbol)
            .map(|(c, m)| c * *m)
            .collect(),
    )
}

/// Copies a spectrum onto a refined grid (same box, `factor`× points).
///
/// The native Nyquist coefficient is split evenly between `±N/2` so a real
/// field stays real.
pub fn pad_spectrum(coeffs: &[Complex64], native: &TorusGrid, factor: usize) -> Vec<Complex64> {
    let padded = native.padded(factor);
    let n = native.points();
    let m = padded.points();
    let dim = native.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); padded.len()];
    let mut idx = vec![0usize; dim];
    for c in coeffs.iter() {
        let nyq: Vec<bool> = idx.iter().map(|&i| i == n / 2).collect();
        let n_nyq = nyq.iter().filter(|&&b| b).count();
        let weight = 0.5f64.powi(n_nyq as i32);
        for mask in 0..(1usize << n_nyq) {
            let mut flat = 0usize;
            let mut bit = 0;
            for a in 0..dim {
                let mut k = signed_index(idx[a], n);
                if nyq[a] {
                    if mask & (1 << bit) != 0 {
                        k = (n / 2) as i64;
                    }
                    bit += 1;
                }
                flat = flat * m + k.rem_euclid(m as i64) as usize;
            }
            out[flat] += c * weight;
        }
        advance(&mut idx, n);
    }
    out
}

/// Restricts a refined-grid spectrum back to the native lattice. Adjoint of
/// [`pad_spectrum`]: the `±N/2` pair folds onto the native Nyquist index.
pub fn truncate_spectrum(
    padded_coeffs: &[Complex64],
    native: &TorusGrid,
    factor: usize,
) -> Vec<Complex64> {
    let padded = native.padded(factor);
    let n = native.points();
    let m = padded.points();
    let dim = native.dim();
    debug_assert_eq!(padded_coeffs.len(), padded.len());
    let mut out = vec![Complex64::new(0.0, 0.0); native.len()];
    let mut idx = vec![0usize; dim];
    for slot in out.iter_mut() {
        let nyq: Vec<bool> = idx.iter().map(|&i| i == n / 2).collect();
        let n_nyq = nyq.iter().filter(|&&b| b).count();
        let mut acc = Complex64::new(0.0, 0.0);
        for mask in 0..(1usize << n_nyq) {
            let mut flat = 0usize;
            let mut bit = 0;
            for a in 0..dim {
                let mut k = signed_index(idx[a], n);
                if nyq[a] {
                    if mask & (1 << bit) != 0 {
                        k = (n / 2) as i64;
                    }
                    bit += 1;
                }
                flat = flat * m + k.rem_euclid(m as i64) as usize;
            }
            acc += padded_coeffs[flat];
        }
        *slot = acc;
        advance(&mut idx, n);
    }
    out
}

/// Padding factor that makes a degree-`order` product alias-free.
pub fn dealias_factor(order: u32) -> usize {
    (order as usize + 1).div_ceil(2).max(2)
}

/// Real samples of `coeffs` on the `factor`-refined grid.
pub(crate) fn padded_samples(coeffs: &[Complex64], native: &TorusGrid, factor: usize) -> Vec<f64> {
    let padded = native.padded(factor);
    padded.inverse_real_unchecked(&pad_spectrum(coeffs, native, factor))
}

/// Dealiased pointwise product of real fields, full spectrum on the refined grid.
pub fn product_padded_spectrum(fields: &[&GridField], factor: usize) -> Result<SpectralField> {
    let first = fields
        .first()
        .ok_or_else(|| LabError::InvalidParameter("empty product".into()))?;
    for f in fields.iter().skip(1) {
        first.check_same_grid(f)?;
    }
    let grid = first.grid();
    let padded = grid.padded(factor);
    let mut acc = padded_samples(first.spectrum().coeffs(), grid, factor);
    for f in fields.iter().skip(1) {
        let s = padded_samples(f.spectrum().coeffs(), grid, factor);
        for (a, b) in acc.iter_mut().zip(s) {
            *a *= b;
        }
    }
    let samples: Vec<Complex64> = acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    Ok(SpectralField::from_trusted(&padded, padded.forward_complex(&samples)))
}

/// Dealiased product of real fields truncated back to the native grid.
///
/// With `factor ≥ ⌈(k+1)/2⌉` for `k` factors every frequency pair is
/// represented exactly before truncation.
pub fn dealiased_product(fields: &[&GridField], factor: usize) -> Result<GridField> {
    let full = product_padded_spectrum(fields, factor)?;
    let grid = fields[0].grid();
    let coeffs = truncate_spectrum(full.coeffs(), grid, factor);
    Ok(GridField::from_trusted(grid, grid.inverse_real_unchecked(&coeffs)))
}

/// Spectrum of `c·u^p` from the spectrum of `u`, computed dealiased.
pub fn dealiased_power_spectrum(
    coeffs: &[Complex64],
    grid: &TorusGrid,
    power: u32,
    coefficient: f64,
    factor: usize,
) -> Vec<Complex64> {
    let padded = grid.padded(factor);
    let samples = padded_samples(coeffs, grid, factor);
    let powered: Vec<Complex64> = samples
        .into_iter()
        .map(|v| Complex64::new(coefficient * v.powi(power as i32), 0.0))
        .collect();
    truncate_spectrum(&padded.forward_complex(&powered), grid, factor)
}

/// Dealiased `u^p` as a field.
pub fn dealiased_power(f: &GridField, power: u32, factor: usize) -> GridField {
    let coeffs = dealiased_power_spectrum(f.spectrum().coeffs(), f.grid(), power, 1.0, factor);
    GridField::from_trusted(f.grid(), f.grid().inverse_real_unchecked(&coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &TorusGrid, seed: u64) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridField::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(make_grid(1, 7, 1.0).is_err());
        assert!(make_grid(0, 8, 1.0).is_err());
        assert!(make_grid(4, 8, 1.0).is_err());
        assert!(make_grid(1, 8, 0.0).is_err());
        assert!(make_grid(1, 8, -1.0).is_err());
        assert!(make_grid(1, 6, 1.0).is_err());
    }

    #[test]
    fn lattice_is_integer_for_two_pi_box() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        assert_eq!(g.wavenumbers(), vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for k in g.wavenumbers() {
            assert!((g.freq(k) - k as f64).abs() < 1e-15);
        }
        assert!((g.spacing() * 8.0 - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn smallest_nonzero_frequency() {
        let g = make_grid(2, 16, 32.0 * PI).unwrap();
        let min = g
            .freq_abs()
            .iter()
            .copied()
            .filter(|&k| k > 0.0)
            .fold(f64::INFINITY, f64::min);
        assert!((min - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn constant_has_only_dc() {
        let g = make_grid(2, 16, 10.0).unwrap();
        let f = GridField::constant(&g, 1.0).unwrap();
        let s = f.spectrum();
        for (i, c) in s.coeffs().iter().enumerate() {
            if i == 0 {
                // (2π)^{-1} · L² for n = 2
                assert!((c.re - 100.0 / (2.0 * PI)).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_is_a_single_mode_pair() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| x[0].cos()).unwrap();
        let s = f.spectrum();
        for k in g.wavenumbers() {
            let c = s.at(&[k]).unwrap();
            if k.abs() == 1 {
                assert!((c.norm() - (PI / 2.0).sqrt()).abs() < 1e-12, "k={k} c={c}");
            } else {
                assert!(c.norm() < 1e-12, "k={k} c={c}");
            }
        }
    }

    #[test]
    fn gaussian_matches_continuum_transform() {
        // Oracle: F[e^{-x²/2}](ξ) = e^{-ξ²/2} for the symmetric convention.
        // Truncation tail at |x| = 25 is e^{-312}, aliasing at ξ_max ≈ 10 is
        // e^{-50}; both far below the asserted tolerance.
        let g = make_grid(1, 256, 50.0).unwrap();
        let f = GridField::from_fn(&g, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
        let s = f.spectrum();
        for (i, c) in s.coeffs().iter().enumerate() {
            let xi = g.freq_abs()[i];
            if xi <= 4.0 {
                assert!((c.re - (-xi * xi / 2.0).exp()).abs() < 1e-8);
                assert!(c.im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for (dim, n) in [(1, 64), (2, 16), (3, 8)] {
            let g = make_grid(dim, n, 7.0).unwrap();
            let f = random_field(&g, 3);
            let back = inverse_transform(f.spectrum()).unwrap();
            let err = f
                .values()
                .iter()
                .zip(back.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-12, "dim {dim}: {err}");
        }
    }

    #[test]
    fn dc_delta_gives_constant() {
        let g = make_grid(1, 16, 4.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.len()];
        let c = 3.0;
        // a constant c has DC coefficient c·L/√(2π)
        coeffs[0] = Complex64::new(c * 4.0 / (2.0 * PI).sqrt(), 0.0);
        let f = inverse_transform(&SpectralField::new(&g, coeffs).unwrap()).unwrap();
        assert!(f.values().iter().all(|v| (v - c).abs() < 1e-12));
    }

    #[test]
    fn non_hermitian_spectrum_rejected() {
        let g = make_grid(1, 16, 4.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.len()];
        coeffs[1] = Complex64::new(1.0, 0.0);
        let spec = SpectralField::new(&g, coeffs).unwrap();
        assert!(matches!(
            inverse_transform(&spec),
            Err(LabError::NotHermitian { .. })
        ));
        assert_eq!(inverse_transform_complex(&spec).len(), 16);
    }

    #[test]
    fn parseval_on_random_fields() {
        let g = make_grid(2, 16, 3.0).unwrap();
        for seed in 0..100 {
            let f = random_field(&g, seed);
            let direct = (f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume()).sqrt();
            let spectral = f.spectrum().l2_norm();
            assert!((direct - spectral).abs() / direct < 1e-12);
        }
    }

    #[test]
    fn identity_multipliers() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let f = random_field(&g, 1);
        let id = apply_multiplier(|_| 1.0, &f).unwrap();
        let bracket0 = apply_radial(|k| (1.0 + k * k).sqrt().powf(0.0), &f).unwrap();
        for ((a, b), c) in f.values().iter().zip(id.values()).zip(bracket0.values()) {
            assert!((a - b).abs() < 1e-12);
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_symbol_on_sine() {
        // −Δ sin = sin; analytic second derivative of sin(x) is −sin(x).
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| x[0].sin()).unwrap();
        let out = apply_multiplier(|xi| xi[0] * xi[0], &f).unwrap();
        for (a, b) in f.values().iter().zip(out.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_multiplier_rejected() {
        let g = make_grid(1, 16, 4.0).unwrap();
        let f = GridField::constant(&g, 1.0).unwrap();
        assert!(matches!(
            apply_radial(|k| 1.0 / k, &f),
            Err(LabError::NonFiniteMultiplier { index: 0 })
        ));
    }

    #[test]
    fn non_finite_samples_rejected() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(
            GridField::new(&g, v),
            Err(LabError::NonFinite { index: 3 })
        ));
    }

    #[test]
    fn pad_then_truncate_is_identity() {
        for (dim, n) in [(1, 16), (2, 8), (3, 8)] {
            let g = make_grid(dim, n, 5.0).unwrap();
            let f = random_field(&g, 11);
            let c = f.spectrum().coeffs();
            for factor in [2, 3] {
                let back = truncate_spectrum(&pad_spectrum(c, &g, factor), &g, factor);
                for (a, b) in c.iter().zip(&back) {
                    assert!((a - b).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn padded_samples_interpolate_band_limited_field() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| (3.0 * x[0]).sin() + 0.5 * x[0].cos()).unwrap();
        let fine = g.padded(2);
        let s = padded_samples(f.spectrum().coeffs(), &g, 2);
        for (i, v) in s.iter().enumerate() {
            let x = fine.coords(i)[0];
            assert!((v - ((3.0 * x).sin() + 0.5 * x.cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn dealiased_square_is_exact() {
        // sin(5x)² = (1 − cos(10x))/2 and sin³(5x) contain modes up to 15,
        // all inside the 32-point band once products are padded.
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| (5.0 * x[0]).sin()).unwrap();
        let sq = dealiased_product(&[&f, &f], 2).unwrap();
        for (i, v) in sq.values().iter().enumerate() {
            let x = g.coords(i)[0];
            assert!((v - (1.0 - (10.0 * x).cos()) / 2.0).abs() < 1e-12);
        }
        let p3 = dealiased_power(&f, 3, dealias_factor(3));
        for (i, v) in p3.values().iter().enumerate() {
            let x = g.coords(i)[0];
            assert!((v - (5.0 * x).sin().powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_factors() {
        assert_eq!(dealias_factor(2), 2);
        assert_eq!(dealias_factor(3), 2);
        assert_eq!(dealias_factor(9), 5);
    }
}
