//! Mild solutions of `∂²ₜu − Δu + ∂ₜu = c·uᵖ` by Picard iteration of the
//! Duhamel map, an exponential time-differencing oracle, and the studies
//! built on top of them.

mod duhamel;
mod etd;
mod monitor;
mod picard;
pub mod quadrature;
mod studies;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::grid::dealias_factor;

pub use duhamel::{duhamel_integral, DuhamelPlan};
pub use etd::{etd_oracle, etd_solve};
pub use monitor::{box_energy_fraction, tail_fraction, BlowupMonitor, BOX_FRACTION, BOX_LIMIT};
pub use picard::{linear_trajectory, picard_solve, psi_residual, PicardDiagnostics, PicardOutcome};
pub use studies::{
    blowup_probe, contraction_report, decay_study, ContractionRun, DECAY_TREND_LIMIT,
    ESCAPE_STABILITY,
};

/// Node set on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeGrid {
    /// `steps` equal intervals.
    Uniform { steps: usize },
    /// `0`, then `count` geometrically spaced nodes from `first` to `T`.
    Geometric { first: f64, count: usize },
    /// Uniform step `dt` up to `switch`, then `count` geometric nodes up to `T`.
    Hybrid { dt: f64, switch: f64, count: usize },
    /// Explicit nodes; must start at 0 and end at `T`.
    Explicit { nodes: Vec<f64> },
}

impl TimeGrid {
    pub fn nodes(&self, horizon: f64) -> Result<Vec<f64>> {
        ensure(horizon > 0.0 && horizon.is_finite(), || {
            format!("horizon must be positive and finite (got {horizon})")
        })?;
        let out = match self {
            TimeGrid::Uniform { steps } => {
                ensure(*steps >= 1, || "uniform grid needs at least one step".into())?;
                let h = horizon / *steps as f64;
                let mut v: Vec<f64> = (0..*steps).map(|i| i as f64 * h).collect();
                v.push(horizon);
                v
            }
            TimeGrid::Geometric { first, count } => {
                ensure(*first > 0.0 && *first < horizon, || {
                    format!("first geometric node must lie in (0, T) (got {first})")
                })?;
                ensure(*count >= 2, || "geometric grid needs at least two nodes".into())?;
                let mut v = vec![0.0];
                v.extend(geometric(*first, horizon, *count));
                v
            }
            TimeGrid::Hybrid { dt, switch, count } => {
                ensure(*dt > 0.0 && *switch > 0.0 && *switch < horizon, || {
                    format!("hybrid grid needs dt > 0 and 0 < switch < T (got dt={dt}, switch={switch})")
                })?;
                ensure(*count >= 2, || "hybrid grid needs at least two geometric nodes".into())?;
                let steps = (switch / dt).round().max(1.0) as usize;
                let h = switch / steps as f64;
                let mut v: Vec<f64> = (0..steps).map(|i| i as f64 * h).collect();
                v.extend(geometric(*switch, horizon, *count));
                v
            }
            TimeGrid::Explicit { nodes } => {
                ensure(nodes.first() == Some(&0.0), || "explicit nodes must start at 0".into())?;
                ensure(nodes.last() == Some(&horizon), || {
                    format!("explicit nodes must end at the horizon {horizon}")
                })?;
                nodes.clone()
            }
        };
        ensure(out.windows(2).all(|w| w[1] > w[0]), || "time nodes must increase strictly".into())?;
        Ok(out)
    }
}

fn geometric(a: f64, b: f64, count: usize) -> Vec<f64> {
    let ratio = (b / a).powf(1.0 / (count - 1) as f64);
    let mut v: Vec<f64> = (0..count).map(|k| a * ratio.powi(k as i32)).collect();
    v[0] = a;
    v[count - 1] = b;
    v
}

/// Rule for the Duhamel integral over one time interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Quadrature {
    /// Composite trapezoid on the node set.
    Trapezoid,
    /// Gauss–Legendre panels with cubic interpolation of the source.
    GaussPanels { order: usize, panels: usize },
}

impl Quadrature {
    /// Convergence order in the node spacing.
    pub fn order(&self) -> u32 {
        match self {
            Quadrature::Trapezoid => 2,
            Quadrature::GaussPanels { .. } => 4,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Quadrature::GaussPanels { order, panels } = self {
            ensure((1..=quadrature::MAX_GAUSS_ORDER).contains(order), || {
                format!("Gauss order must lie in 1..={} (got {order})", quadrature::MAX_GAUSS_ORDER)
            })?;
            ensure(*panels >= 1, || "at least one Gauss panel is needed".into())?;
        }
        Ok(())
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub horizon: f64,
    pub time_grid: TimeGrid,
    pub picard_tol: f64,
    pub max_iters: usize,
    pub quadrature: Quadrature,
    /// Sup-norm cap; exceeding it stops the run with an escape event.
    pub blowup_threshold: f64,
    /// Padding factor for `uᵖ`; `None` picks `⌈(p+1)/2⌉`.
    pub dealias_factor: Option<usize>,
    /// `c` in `c·uᵖ`; zero gives the linear flow.
    pub nonlinear_coefficient: f64,
    pub override_admissibility: bool,
    /// Step of the exponential integrator.
    pub etd_dt: f64,
    /// Largest admissible spectral energy fraction in the top octave.
    pub tail_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            time_grid: TimeGrid::Uniform { steps: 100 },
            picard_tol: 1e-10,
            max_iters: 50,
            quadrature: Quadrature::Trapezoid,
            blowup_threshold: 1e6,
            dealias_factor: None,
            nonlinear_coefficient: 1.0,
            override_admissibility: false,
            etd_dt: 1e-2,
            tail_limit: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.horizon > 0.0 && self.horizon.is_finite(), || {
            format!("horizon must be positive and finite (got {})", self.horizon)
        })?;
        ensure(self.picard_tol > 0.0, || format!("picard_tol must be positive (got {})", self.picard_tol))?;
        ensure(self.max_iters >= 1, || "max_iters must be at least 1".into())?;
        ensure(self.blowup_threshold > 0.0, || "blowup_threshold must be positive".into())?;
        ensure(self.etd_dt > 0.0 && self.etd_dt.is_finite(), || {
            format!("etd_dt must be positive (got {})", self.etd_dt)
        })?;
        ensure(self.tail_limit > 0.0 && self.tail_limit <= 1.0, || {
            format!("tail_limit must lie in (0, 1] (got {})", self.tail_limit)
        })?;
        ensure(self.nonlinear_coefficient.is_finite(), || "nonlinear_coefficient must be finite".into())?;
        if let Some(f) = self.dealias_factor {
            ensure(f >= 1, || "dealias_factor must be at least 1".into())?;
        }
        self.quadrature.validate()?;
        self.time_grid.nodes(self.horizon).map(|_| ())
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        self.time_grid.nodes(self.horizon)
    }

    pub fn padding(&self, p: u32) -> usize {
        self.dealias_factor.unwrap_or_else(|| dealias_factor(p))
    }

    pub(crate) fn monitor(&self) -> BlowupMonitor {
        BlowupMonitor {
            cap: self.blowup_threshold,
            tail_limit: self.tail_limit,
        }
    }
}
