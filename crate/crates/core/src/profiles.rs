//! Named initial-data profiles.
//!
//! Every profile is defined independently of the resolution: random profiles
//! draw their coefficients per lattice frequency in a fixed order, so the
//! same profile sampled on `N` and `2N` points describes the same function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::grid::{inverse_transform, GridField, SpectralField, TorusGrid};
use crate::norms::bracket;

/// `0` for `s ≤ 0`, `1` for `s ≥ 1`, smooth in between.
pub fn smooth_step(s: f64) -> f64 {
    let g = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        g(s) / (g(s) + g(1.0 - s))
    }
}

/// Initial-data profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataProfile {
    /// `A e^{−|x|²/(2w²)}`.
    Gaussian { amplitude: f64, width: f64 },
    /// `A x₁⟨x⟩^{−1−a}` (odd) or `A⟨x⟩^{−a}` (even), smoothly cut off between
    /// `radius` and `radius + taper`.
    SlowDecay {
        amplitude: f64,
        exponent: f64,
        odd: bool,
        radius: f64,
        taper: f64,
    },
    /// `A cos(ξ·x)` with `ξ` the lattice frequency of the integer vector
    /// `mode`.
    SingleMode { amplitude: f64, mode: Vec<i64> },
    /// Random phases with `|f̂(ξ)| ∝ |ξ|^{−slope}` on `k_lo ≤ |ξ| ≤ k_hi`,
    /// scaled to sup norm `amplitude`; zero mean.
    RandomBand {
        amplitude: f64,
        k_lo: f64,
        k_hi: f64,
        slope: f64,
        seed: u64,
    },
    /// Sum of `count` Gaussian bumps of width `width`, centres uniform in
    /// `[−spread, spread]ⁿ`, random signed weights; scaled to sup norm
    /// `amplitude`.
    RandomBumps {
        amplitude: f64,
        count: usize,
        width: f64,
        spread: f64,
        seed: u64,
    },
    /// Identically zero.
    Zero,
}

impl DataProfile {
    pub fn name(&self) -> &'static str {
        match self {
            DataProfile::Gaussian { .. } => "gaussian",
            DataProfile::SlowDecay { .. } => "slow-decay",
            DataProfile::SingleMode { .. } => "single-mode",
            DataProfile::RandomBand { .. } => "random-band",
            DataProfile::RandomBumps { .. } => "random-bumps",
            DataProfile::Zero => "zero",
        }
    }

    /// Same profile with its amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DataProfile {
        let mut out = self.clone();
        match &mut out {
            DataProfile::Gaussian { amplitude, .. }
            | DataProfile::SlowDecay { amplitude, .. }
            | DataProfile::SingleMode { amplitude, .. }
            | DataProfile::RandomBand { amplitude, .. }
            | DataProfile::RandomBumps { amplitude, .. } => *amplitude *= factor,
            DataProfile::Zero => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DataProfile::Gaussian { amplitude, width } => {
                ensure(amplitude.is_finite(), || "amplitude must be finite".into())?;
                ensure(*width > 0.0, || format!("gaussian width must be positive (got {width})"))
            }
            DataProfile::SlowDecay {
                amplitude,
                exponent,
                radius,
                taper,
                ..
            } => {
                ensure(amplitude.is_finite(), || "amplitude must be finite".into())?;
                ensure(*exponent > 0.0, || format!("decay exponent must be positive (got {exponent})"))?;
                ensure(*radius > 0.0 && *taper > 0.0, || "window radius and taper must be positive".into())
            }
            DataProfile::SingleMode { amplitude, mode } => {
                ensure(amplitude.is_finite(), || "amplitude must be finite".into())?;
                ensure(!mode.is_empty(), || "mode vector must not be empty".into())
            }
            DataProfile::RandomBand { amplitude, k_lo, k_hi, slope, .. } => {
                ensure(amplitude.is_finite() && slope.is_finite(), || "amplitude and slope must be finite".into())?;
                ensure(*k_lo > 0.0 && k_hi >= k_lo, || format!("need 0 < k_lo ≤ k_hi (got {k_lo}, {k_hi})"))
            }
            DataProfile::RandomBumps { amplitude, count, width, spread, .. } => {
                ensure(amplitude.is_finite(), || "amplitude must be finite".into())?;
                ensure(*count > 0 && *width > 0.0 && *spread >= 0.0, || "bump count, width and spread must be positive".into())
            }
            DataProfile::Zero => Ok(()),
        }
    }

    /// Samples the profile on a grid.
    pub fn sample(&self, grid: &TorusGrid) -> Result<GridField> {
        self.validate()?;
        match self {
            DataProfile::Gaussian { amplitude, width } => GridField::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }),
            DataProfile::SlowDecay {
                amplitude,
                exponent,
                odd,
                radius,
                taper,
            } => {
                ensure(radius + taper < grid.length() / 2.0, || {
                    format!(
                        "slow-decay window radius {} + taper {} must fit inside the half-box {}",
                        radius,
                        taper,
                        grid.length() / 2.0
                    )
                })?;
                GridField::from_fn(grid, |x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let window = 1.0 - smooth_step((r - radius) / taper);
                    let body = if *odd {
                        x[0] * bracket(r).powf(-1.0 - exponent)
                    } else {
                        bracket(r).powf(-exponent)
                    };
                    amplitude * window * body
                })
            }
            DataProfile::SingleMode { amplitude, mode } => {
                ensure(mode.len() == grid.dim(), || {
                    format!("mode has {} components on a {}-dimensional grid", mode.len(), grid.dim())
                })?;
                ensure(mode.iter().all(|&k| 2 * k.abs() < grid.points() as i64), || {
                    "mode lies at or beyond the grid's Nyquist frequency".into()
                })?;
                let xi: Vec<f64> = mode.iter().map(|&k| grid.freq(k)).collect();
                GridField::from_fn(grid, |x| {
                    amplitude * x.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>().cos()
                })
            }
            DataProfile::RandomBand {
                amplitude,
                k_lo,
                k_hi,
                slope,
                seed,
            } => {
                ensure(*k_hi < grid.nyquist(), || {
                    format!("band edge {k_hi} must lie below the Nyquist frequency {}", grid.nyquist())
                })?;
                let f = random_band(grid, *k_lo, *k_hi, *slope, *seed)?;
                Ok(normalize_sup(f, *amplitude))
            }
            DataProfile::RandomBumps {
                amplitude,
                count,
                width,
                spread,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let n = grid.dim();
                let bumps: Vec<(Vec<f64>, f64)> = (0..*count)
                    .map(|_| {
                        let c = (0..n).map(|_| rng.gen_range(-spread..=*spread)).collect();
                        (c, rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                let f = GridField::from_fn(grid, |x| {
                    bumps
                        .iter()
                        .map(|(c, w)| {
                            let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                            w * (-r2 / (2.0 * width * width)).exp()
                        })
                        .sum()
                })?;
                Ok(normalize_sup(f, *amplitude))
            }
            DataProfile::Zero => Ok(GridField::zeros(grid)),
        }
    }
}

fn normalize_sup(f: GridField, amplitude: f64) -> GridField {
    let m = f.max_abs();
    if m == 0.0 {
        f
    } else {
        f.scaled(amplitude / m)
    }
}

/// Random-phase field with `|f̂(ξ)| = |ξ|^{−slope}` on the band; coefficients
/// are drawn over the integer box `[−K, K]ⁿ` in lexicographic order so that
/// the draw does not depend on `N`.
fn random_band(grid: &TorusGrid, k_lo: f64, k_hi: f64, slope: f64, seed: u64) -> Result<GridField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let kmax = (k_hi / grid.freq_step()).ceil() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut idx = vec![-kmax; n];
    loop {
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let xi = idx
            .iter()
            .map(|&k| grid.freq(k).powi(2))
            .sum::<f64>()
            .sqrt();
        if xi >= k_lo && xi <= k_hi {
            if let Some(flat) = grid.spectral_index(&idx) {
                coeffs[flat] += Complex64::from_polar(xi.powf(-slope), phase);
                let partner = grid.partner_index(flat);
                coeffs[partner] += Complex64::from_polar(xi.powf(-slope), -phase);
            }
        }
        // advance the lexicographic counter
        let mut a = n;
        loop {
            if a == 0 {
                let spec = SpectralField::new(grid, coeffs)?;
                return inverse_transform(&spec);
            }
            a -= 1;
            if idx[a] < kmax {
                idx[a] += 1;
                break;
            }
            idx[a] = -kmax;
        }
    }
}
