//! Bony paraproducts, the remainder, truncations `V_j` and the fractional
//! Leibniz ratio.
//!
//! All products are formed on a grid refined by a factor 2 so bilinear terms
//! are alias-free; results are truncated back to the native lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, LabError, Result};
use crate::grid::{
    dealiased_product, multiply_spectrum, padded_samples, product_padded_spectrum,
    truncate_spectrum, pad_spectrum, GridField, SpectralField, TorusGrid,
};
use crate::littlewood_paley::{DyadicBlocks, Projection};
use crate::norms::{lebesgue_norm, BlockDecomposition};
use crate::profiles::DataProfile;

const FACTOR: usize = 2;

/// Residual above which a decomposition is flagged as aliased.
pub const ALIASING_FLAG: f64 = 1e-10;

fn masked(spec: &SpectralField, symbol: &[f64]) -> Vec<Complex64> {
    multiply_spectrum(spec, symbol).into_coeffs()
}

/// `Σ_j (a_j f)(b_j g)` evaluated on the refined grid, returned as refined
/// real samples.
fn accumulate<'a>(
    f: &GridField,
    g: &GridField,
    pairs: impl Iterator<Item = (Vec<f64>, Vec<f64>)> + 'a,
) -> Vec<f64> {
    let grid = f.grid();
    let fs = f.spectrum();
    let gs = g.spectrum();
    let mut acc = vec![0.0; grid.padded(FACTOR).len()];
    for (sa, sb) in pairs {
        let a = padded_samples(&masked(fs, &sa), grid, FACTOR);
        let b = padded_samples(&masked(gs, &sb), grid, FACTOR);
        for ((out, x), y) in acc.iter_mut().zip(a).zip(b) {
            *out += x * y;
        }
    }
    acc
}

fn truncate_samples(grid: &TorusGrid, samples: Vec<f64>) -> GridField {
    let padded = grid.padded(FACTOR);
    let c: Vec<Complex64> = samples.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let spec = padded.forward_complex(&c);
    let coeffs = truncate_spectrum(&spec, grid, FACTOR);
    GridField::from_trusted(grid, grid.inverse_real_unchecked(&coeffs))
}

fn t_pairs(blocks: &DyadicBlocks) -> impl Iterator<Item = (Vec<f64>, Vec<f64>)> + '_ {
    blocks
        .indices()
        .map(move |j| (blocks.lowpass_symbol(j - 2).to_vec(), blocks.annulus_symbol(j)))
}

fn r_pairs(blocks: &DyadicBlocks, grid: &TorusGrid) -> Vec<(Vec<f64>, Vec<f64>)> {
    blocks
        .indices()
        .map(|j| {
            (
                blocks.annulus_symbol(j),
                blocks.symbol(grid, Projection::Widened(j)).expect("index in range"),
            )
        })
        .collect()
}

/// `Ṫ_f g = Σ_j Δ_{≤j−2}f · Δ_j g`.
pub fn para_t(f: &GridField, g: &GridField) -> Result<GridField> {
    f.check_same_grid(g)?;
    let blocks = f.grid().dyadic_blocks();
    Ok(truncate_samples(f.grid(), accumulate(f, g, t_pairs(&blocks))))
}

/// `Ṙ(f, g) = Σ_j Δ_j f · Δ̃_j g`.
pub fn para_r(f: &GridField, g: &GridField) -> Result<GridField> {
    f.check_same_grid(g)?;
    let blocks = f.grid().dyadic_blocks();
    let pairs = r_pairs(&blocks, f.grid());
    Ok(truncate_samples(f.grid(), accumulate(f, g, pairs.into_iter())))
}

/// Result of re-assembling a product from its paraproduct pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionCheck {
    /// `‖fg − Ṫ_f g − Ṫ_g f − Ṙ(f,g)‖_{L²} / ‖fg‖_{L²}`.
    pub residual: f64,
    /// Set when the residual exceeds [`ALIASING_FLAG`], i.e. the product
    /// carries energy the native grid cannot hold.
    pub flagged: bool,
}

/// Compares the exact product (on the refined grid) with the sum of the three
/// pieces, each stored on the native grid.
pub fn decomposition_check(f: &GridField, g: &GridField) -> Result<DecompositionCheck> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let exact = product_padded_spectrum(&[f, g], FACTOR)?;
    let sum = para_t(f, g)?
        .add(&para_t(g, f)?)?
        .add(&para_r(f, g)?)?;
    let rebuilt = pad_spectrum(sum.spectrum().coeffs(), grid, FACTOR);
    let den: f64 = exact.coeffs().iter().map(|c| c.norm_sqr()).sum();
    if den == 0.0 {
        return Ok(DecompositionCheck {
            residual: 0.0,
            flagged: false,
        });
    }
    let num: f64 = exact
        .coeffs()
        .iter()
        .zip(&rebuilt)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let residual = (num / den).sqrt();
    Ok(DecompositionCheck {
        residual,
        flagged: residual > ALIASING_FLAG,
    })
}

pub fn decomposition_residual(f: &GridField, g: &GridField) -> Result<f64> {
    Ok(decomposition_check(f, g)?.residual)
}

/// `V_j f = Σ_{k=−j}^{j} Δ_k f = (χ_{≤2^j} − χ_{≤2^{−j−1}})(∇) f`.
pub fn v_truncation(f: &GridField, j: u32) -> Result<GridField> {
    let hi = 2f64.powi(j as i32);
    let lo = 2f64.powi(-(j as i32) - 1);
    let grid = f.grid();
    let a = grid.dyadic_blocks().symbol(grid, Projection::LowerThan(hi))?;
    let b = grid.dyadic_blocks().symbol(grid, Projection::LowerThan(lo))?;
    let sym: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(crate::grid::apply_symbol(&sym, f))
}

/// `‖V_j f · V_j g − fg‖_{L²}` with dealiased products.
pub fn v_product_residual(f: &GridField, g: &GridField, j: u32) -> Result<f64> {
    let exact = dealiased_product(&[f, g], FACTOR)?;
    let vf = v_truncation(f, j)?;
    let vg = v_truncation(g, j)?;
    let approx = dealiased_product(&[&vf, &vg], FACTOR)?;
    lebesgue_norm(&approx.sub(&exact)?, 2.0)
}

/// Exponents and ensemble settings of a fractional Leibniz study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeibnizConfig {
    pub alpha: f64,
    pub r: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub samples: usize,
    /// Power-law slope of the random spectra.
    pub slope: f64,
    /// Lower edge of the random band.
    pub k_lo: f64,
    /// Upper edge of the band as a fraction of the Nyquist frequency; at most
    /// `1/2` so products stay resolved.
    pub band_fraction: f64,
    /// Absolute upper band edge; overrides `band_fraction` so that the same
    /// functions can be sampled on refined grids.
    pub band_edge: Option<f64>,
}

impl LeibnizConfig {
    pub fn new(alpha: f64, r: f64, (p1, q1): (f64, f64), (p2, q2): (f64, f64)) -> Self {
        Self {
            alpha,
            r,
            p1,
            q1,
            p2,
            q2,
            samples: 500,
            slope: 1.0,
            k_lo: 0.5,
            band_fraction: 0.45,
            band_edge: None,
        }
    }

    /// Upper band edge on `grid`.
    pub fn k_hi(&self, grid: &TorusGrid) -> f64 {
        self.band_edge.unwrap_or(self.band_fraction * grid.nyquist())
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha > 0.0, || format!("α must be positive (got {})", self.alpha))?;
        for (name, v) in [("r", self.r), ("q1", self.q1), ("q2", self.q2)] {
            ensure(v.is_finite() && v >= 1.0, || format!("{name} must be finite and ≥ 1 (got {v})"))?;
        }
        for (name, v) in [("p1", self.p1), ("p2", self.p2)] {
            ensure(v >= 1.0, || format!("{name} must be ≥ 1 (got {v})"))?;
        }
        let h1 = 1.0 / self.p1 + 1.0 / self.q1;
        let h2 = 1.0 / self.p2 + 1.0 / self.q2;
        ensure((h1 - 1.0 / self.r).abs() <= 1e-12 && (h2 - 1.0 / self.r).abs() <= 1e-12, || {
            format!(
                "Hölder relations fail: 1/r = {}, 1/p1 + 1/q1 = {h1}, 1/p2 + 1/q2 = {h2}",
                1.0 / self.r
            )
        })?;
        ensure(self.samples > 0, || "ensemble must be nonempty".into())?;
        ensure(self.band_fraction > 0.0 && self.band_fraction <= 0.5, || {
            "band fraction must lie in (0, 1/2]".into()
        })
    }
}

/// `‖fg‖_{Ḃ^α_{r,2}} / (‖f‖_{Ḃ^α_{p1,2}}‖g‖_{L^{q1}} + ‖g‖_{Ḃ^α_{p2,2}}‖f‖_{L^{q2}})`.
pub fn leibniz_ratio(f: &GridField, g: &GridField, cfg: &LeibnizConfig) -> Result<f64> {
    cfg.validate()?;
    f.check_same_grid(g)?;
    let fg = dealiased_product(&[f, g], FACTOR)?;
    let num = BlockDecomposition::new(&fg).homogeneous(cfg.alpha, cfg.r, 2.0);
    let bf = BlockDecomposition::new(f);
    let bg = BlockDecomposition::new(g);
    let den = bf.homogeneous(cfg.alpha, cfg.p1, 2.0) * lebesgue_norm(g, cfg.q1)?
        + bg.homogeneous(cfg.alpha, cfg.p2, 2.0) * lebesgue_norm(f, cfg.q2)?;
    if den == 0.0 {
        return Err(LabError::UndefinedRatio);
    }
    Ok(num / den)
}

/// Ratios over a random ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeibnizEnsemble {
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// Random zero-mean band-limited pair with power-law spectra.
pub fn random_pair(grid: &TorusGrid, cfg: &LeibnizConfig, seed: u64) -> Result<(GridField, GridField)> {
    let k_hi = cfg.k_hi(grid);
    let profile = |s: u64| DataProfile::RandomBand {
        amplitude: 1.0,
        k_lo: cfg.k_lo,
        k_hi,
        slope: cfg.slope,
        seed: s,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b): (u64, u64) = (rng.gen(), rng.gen());
    Ok((profile(a).sample(grid)?, profile(b).sample(grid)?))
}

/// Evaluates the Leibniz ratio on `cfg.samples` random pairs in parallel.
pub fn leibniz_ensemble(grid: &TorusGrid, cfg: &LeibnizConfig, seed: u64) -> Result<LeibnizEnsemble> {
    cfg.validate()?;
    let k_hi = cfg.k_hi(grid);
    ensure(cfg.k_lo < k_hi, || "band is empty on this grid".into())?;
    ensure(k_hi <= 0.5 * grid.nyquist(), || {
        format!("band edge {k_hi} exceeds half the Nyquist frequency {}", grid.nyquist())
    })?;
    let ratios = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let (f, g) = random_pair(grid, cfg, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i))?;
            leibniz_ratio(&f, &g, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(LeibnizEnsemble { ratios, max, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn band(grid: &TorusGrid, lo: f64, hi: f64, seed: u64) -> GridField {
        DataProfile::RandomBand {
            amplitude: 1.0,
            k_lo: lo,
            k_hi: hi,
            slope: 0.5,
            seed,
        }
        .sample(grid)
        .unwrap()
    }

    fn max_diff(a: &GridField, b: &GridField) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn decomposition_rebuilds_product() {
        let g = make_grid(1, 256, 50.0).unwrap();
        let k_hi = 0.45 * g.nyquist();
        for seed in 0..5 {
            let f = band(&g, 0.2, k_hi, seed);
            let h = band(&g, 0.2, k_hi, seed + 100);
            let c = decomposition_check(&f, &h).unwrap();
            assert!(c.residual < 1e-12, "{}", c.residual);
            assert!(!c.flagged);
        }
    }

    #[test]
    fn aliased_input_is_flagged() {
        let g = make_grid(1, 128, 20.0).unwrap();
        let f = band(&g, 0.5, 0.9 * g.nyquist(), 1);
        let c = decomposition_check(&f, &f).unwrap();
        assert!(c.residual > 1e-3 && c.flagged, "{}", c.residual);
    }

    #[test]
    fn single_mode_square() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| (5.0 * x[0]).sin()).unwrap();
        assert!(decomposition_residual(&f, &f).unwrap() < 1e-12);
        let z = GridField::zeros(&g);
        assert_eq!(decomposition_residual(&z, &f).unwrap(), 0.0);
        assert!(para_t(&f, &z).unwrap().max_abs() == 0.0);
        assert!(para_r(&z, &f).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn separated_spectra() {
        // f near |ξ| = 0.5, g near |ξ| = 8: four octaves apart
        let g = make_grid(1, 512, 64.0 * PI).unwrap();
        let lo = GridField::from_fn(&g, |x| (0.5 * x[0]).cos()).unwrap();
        let hi = GridField::from_fn(&g, |x| (8.0 * x[0]).sin()).unwrap();
        let prod = dealiased_product(&[&lo, &hi], 2).unwrap();
        assert!(max_diff(&para_t(&lo, &hi).unwrap(), &prod) < 1e-10);
        assert!(para_t(&hi, &lo).unwrap().max_abs() < 1e-10);
        assert!(para_r(&lo, &hi).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn same_annulus_lands_in_remainder() {
        let g = make_grid(1, 256, 64.0 * PI).unwrap();
        let f = GridField::from_fn(&g, |x| (2.0 * x[0]).cos() + 0.5 * (2.25 * x[0]).sin()).unwrap();
        assert!(para_t(&f, &f).unwrap().max_abs() < 1e-12);
        let sq = dealiased_product(&[&f, &f], 2).unwrap().without_mean();
        assert!(max_diff(&para_r(&f, &f).unwrap().without_mean(), &sq) < 1e-12);
    }

    #[test]
    fn remainder_is_symmetric_and_bilinear() {
        let g = make_grid(2, 32, 20.0).unwrap();
        let k = 0.45 * g.nyquist();
        let (a, b, c) = (band(&g, 0.4, k, 1), band(&g, 0.4, k, 2), band(&g, 0.4, k, 3));
        assert!(max_diff(&para_r(&a, &b).unwrap(), &para_r(&b, &a).unwrap()) < 1e-12);
        let lhs = para_t(&a.lin_comb(2.0, &c, -3.0).unwrap(), &b).unwrap();
        let rhs = para_t(&a, &b).unwrap().lin_comb(2.0, &para_t(&c, &b).unwrap(), -3.0).unwrap();
        assert!(max_diff(&lhs, &rhs) < 1e-12);
        let lhs = para_r(&a, &b.lin_comb(0.5, &c, 4.0).unwrap()).unwrap();
        let rhs = para_r(&a, &b).unwrap().lin_comb(0.5, &para_r(&a, &c).unwrap(), 4.0).unwrap();
        assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn truncations_reach_the_product() {
        let g = make_grid(1, 256, 40.0).unwrap();
        let f = band(&g, 0.3, 3.0, 5);
        let h = band(&g, 0.3, 3.0, 6);
        assert!(v_product_residual(&f, &h, 0).unwrap() > 1e-3);
        // 2^j ≥ 3 and 2^{−j−1}·25/24 below 0.3
        assert!(v_product_residual(&f, &h, 2).unwrap() < 1e-14);
    }

    #[test]
    fn leibniz_symmetric_case_and_undefined() {
        let g = make_grid(1, 128, 30.0).unwrap();
        let cfg = LeibnizConfig::new(0.7, 2.0, (4.0, 4.0), (4.0, 4.0));
        let f = band(&g, 0.3, 0.45 * g.nyquist(), 9);
        let r = leibniz_ratio(&f, &f, &cfg).unwrap();
        let sq = dealiased_product(&[&f, &f], 2).unwrap();
        let expect = BlockDecomposition::new(&sq).homogeneous(0.7, 2.0, 2.0)
            / (2.0 * BlockDecomposition::new(&f).homogeneous(0.7, 4.0, 2.0) * lebesgue_norm(&f, 4.0).unwrap());
        assert!((r - expect).abs() < 1e-12 * expect);
        let z = GridField::zeros(&g);
        assert_eq!(leibniz_ratio(&f, &z, &cfg), Err(LabError::UndefinedRatio));
        let bad = LeibnizConfig::new(0.7, 2.0, (3.0, 4.0), (4.0, 4.0));
        assert!(bad.validate().is_err());
    }
}
