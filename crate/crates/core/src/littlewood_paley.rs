//! Smooth cutoff, dyadic frequency blocks and the associated projections.

use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{apply_symbol, GridField, GridShape, TorusGrid};

/// Upper edge of the cutoff transition, `25/24`.
pub const TRANSITION_END: f64 = 25.0 / 24.0;

/// A radial cutoff profile: 1 on `[0, 1]`, 0 on `[25/24, ∞)`.
pub trait CutoffProfile: Send + Sync {
    fn eval(&self, t: f64) -> f64;
}

/// Smooth step built from `e^{-1/x}`, with the transition stretched onto
/// `[1, 25/24]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothStep;

fn bump_exp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl CutoffProfile for SmoothStep {
    fn eval(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 1.0;
        }
        if t >= TRANSITION_END {
            return 0.0;
        }
        // c = 24 maps [1, 25/24] onto [0, 1]
        let a = bump_exp(25.0 - 24.0 * t);
        let b = bump_exp(24.0 * t - 24.0);
        a / (a + b)
    }
}

/// The default cutoff evaluated at `t ≥ 0`.
pub fn chi(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "cutoff argument must be nonnegative (got {t})"
        )));
    }
    Ok(SmoothStep.eval(t))
}

/// Frequency projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// `χ_{≤a}(∇)`.
    LowerThan(f64),
    /// `χ_{>a}(∇) = 1 − χ_{≤a}(∇)`.
    GreaterThan(f64),
    /// `Δ_j` with symbol `χ_{≤2^j} − χ_{≤2^{j−1}}`.
    Annulus(i32),
    /// `Δ̃_j = Δ_{j−1} + Δ_j + Δ_{j+1}`.
    Widened(i32),
}

/// Family of dyadic blocks on a grid, truncated to the indices that carry
/// lattice frequencies.
///
/// Every nonzero lattice frequency falls in `[j_min, j_max]`; the zero mode
/// belongs to the low block `χ_{≤2^{j_min−1}}` alone.
pub struct DyadicBlocks {
    shape: GridShape,
    cutoff: Arc<dyn CutoffProfile>,
    j_min: i32,
    j_max: i32,
    /// `χ_{≤2^j}` on the lattice for `j ∈ [j_min−2, j_max+1]`.
    lowpass: Vec<Vec<f64>>,
}

impl fmt::Debug for DyadicBlocks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DyadicBlocks")
            .field("shape", &self.shape)
            .field("j_min", &self.j_min)
            .field("j_max", &self.j_max)
            .finish()
    }
}

/// Default dyadic range of a grid.
pub fn default_range(grid: &TorusGrid) -> (i32, i32) {
    let j_min = (grid.freq_step().log2()).ceil() as i32 - 1;
    let j_max = (grid.nyquist().log2()).ceil() as i32 + 1;
    (j_min, j_max)
}

impl DyadicBlocks {
    pub fn new(grid: &TorusGrid) -> Self {
        let (j_min, j_max) = default_range(grid);
        Self::with_range(grid, Arc::new(SmoothStep), j_min, j_max)
    }

    pub fn with_cutoff(grid: &TorusGrid, cutoff: Arc<dyn CutoffProfile>) -> Self {
        let (j_min, j_max) = default_range(grid);
        Self::with_range(grid, cutoff, j_min, j_max)
    }

    pub fn with_range(
        grid: &TorusGrid,
        cutoff: Arc<dyn CutoffProfile>,
        j_min: i32,
        j_max: i32,
    ) -> Self {
        assert!(j_min <= j_max, "empty dyadic range");
        let lowpass = (j_min - 2..=j_max + 1)
            .map(|j| {
                let a = 2f64.powi(j);
                grid.freq_abs().iter().map(|&k| cutoff.eval(k / a)).collect()
            })
            .collect();
        Self {
            shape: grid.shape(),
            cutoff,
            j_min,
            j_max,
            lowpass,
        }
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn cutoff(&self) -> &Arc<dyn CutoffProfile> {
        &self.cutoff
    }

    fn lowpass_at(&self, j: i32) -> &[f64] {
        &self.lowpass[(j - (self.j_min - 2)) as usize]
    }

    fn check_range(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            Err(LabError::DyadicOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            })
        } else {
            Ok(())
        }
    }

    /// Symbol of `Δ_j` for `j ∈ [j_min−1, j_max+1]`.
    pub fn annulus_symbol(&self, j: i32) -> Vec<f64> {
        assert!(j >= self.j_min - 1 && j <= self.j_max + 1);
        self.lowpass_at(j)
            .iter()
            .zip(self.lowpass_at(j - 1))
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Symbol of the low block `χ_{≤2^{j_min−1}}` (only the zero mode).
    pub fn low_block_symbol(&self) -> Vec<f64> {
        self.lowpass_at(self.j_min - 1).to_vec()
    }

    /// Symbol of `Δ_{≤j}` for `j ∈ [j_min−2, j_max+1]`.
    pub fn lowpass_symbol(&self, j: i32) -> &[f64] {
        self.lowpass_at(j)
    }

    fn widened_symbol(&self, j: i32) -> Vec<f64> {
        // Δ_{j-1} + Δ_j + Δ_{j+1} telescopes to χ_{≤2^{j+1}} − χ_{≤2^{j−2}}
        self.lowpass_at(j + 1)
            .iter()
            .zip(self.lowpass_at(j - 2))
            .map(|(a, b)| a - b)
            .collect()
    }

    fn scaled_symbol(&self, grid: &TorusGrid, a: f64) -> Vec<f64> {
        grid.freq_abs().iter().map(|&k| self.cutoff.eval(k / a)).collect()
    }

    /// Symbol of a projection on the lattice of `grid`.
    pub fn symbol(&self, grid: &TorusGrid, kind: Projection) -> Result<Vec<f64>> {
        if grid.shape() != self.shape {
            return Err(LabError::GridMismatch);
        }
        match kind {
            Projection::LowerThan(a) | Projection::GreaterThan(a) if !(a > 0.0) => Err(
                LabError::InvalidParameter(format!("cutoff scale must be positive (got {a})")),
            ),
            Projection::LowerThan(a) => Ok(self.scaled_symbol(grid, a)),
            Projection::GreaterThan(a) => Ok(self
                .scaled_symbol(grid, a)
                .into_iter()
                .map(|v| 1.0 - v)
                .collect()),
            Projection::Annulus(j) => {
                self.check_range(j)?;
                Ok(self.annulus_symbol(j))
            }
            Projection::Widened(j) => {
                self.check_range(j)?;
                Ok(self.widened_symbol(j))
            }
        }
    }

    /// Applies a projection to a field.
    pub fn project(&self, f: &GridField, kind: Projection) -> Result<GridField> {
        let symbol = self.symbol(f.grid(), kind)?;
        Ok(apply_symbol(&symbol, f))
    }

    /// `max |1 − (low block + Σ_j χ_{2^j})(ξ)|` over nonzero lattice frequencies.
    pub fn partition_residual(&self, grid: &TorusGrid) -> f64 {
        let mut total = self.low_block_symbol();
        for j in self.indices() {
            for (t, v) in total.iter_mut().zip(self.annulus_symbol(j)) {
                *t += v;
            }
        }
        total
            .iter()
            .zip(grid.freq_abs())
            .filter(|(_, &k)| k > 0.0)
            .fold(0.0f64, |m, (t, _)| m.max((1.0 - t).abs()))
    }
}

/// Applies a projection using the grid's default blocks.
pub fn project(f: &GridField, kind: Projection) -> Result<GridField> {
    f.grid().dyadic_blocks().project(f, kind)
}

/// Partition-of-unity residual of a block family on its grid.
pub fn partition_residual(blocks: &DyadicBlocks, grid: &TorusGrid) -> f64 {
    blocks.partition_residual(grid)
}
