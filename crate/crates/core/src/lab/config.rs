//! Experiment configuration files.
//!
//! A config is a TOML document with flat sections:
//!
//! ```toml
//! experiment = "decay"
//! seed = 7
//!
//! [grid]
//! n = 1
//! points = 4096
//! length = 400.0
//!
//! [problem]
//! r = 4.0
//! s = 5.0
//! p = 9
//!
//! [solver]
//! horizon = 200.0
//! time_grid = { kind = "hybrid", dt = 0.1, switch = 20.0, count = 100 }
//!
//! [data]
//! kind = "slow-decay"
//! amplitude = 1e-2
//! exponent = 0.3
//! odd = true
//! radius = 50.0
//! taper = 50.0
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::grid::{make_grid, TorusGrid};
use crate::profiles::DataProfile;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub points: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<TorusGrid> {
        make_grid(self.n, self.points, self.length)
    }
}

/// `(r, s, p)`; `p` is read as a number so that non-integers produce a
/// domain error instead of a parse error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub r: f64,
    pub s: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

/// Experiment-specific settings; every key is optional and each experiment
/// reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySpec {
    /// Sample times.
    pub times: Option<Vec<f64>>,
    /// `[p, q]` of a decay estimate.
    pub exponents: Option<[f64; 2]>,
    /// `[s1, s2]`; selects the Besov form of a decay estimate.
    pub smoothness: Option<[f64; 2]>,
    /// `[start, end]` of a fit window.
    pub fit_window: Option<[f64; 2]>,
    /// Dyadic block indices.
    pub blocks: Option<Vec<i32>>,
    /// Data amplitudes of a sweep.
    pub amplitudes: Option<Vec<f64>>,
    /// Horizons of a sweep.
    pub horizons: Option<Vec<f64>>,
    /// Nonlinearity powers of a sweep.
    pub powers: Option<Vec<u32>>,
    /// Ensemble size.
    pub samples: Option<usize>,
    /// Smoothness of the fractional Leibniz estimate.
    pub alpha: Option<f64>,
    /// Integrability of the product in the Leibniz estimate.
    pub leibniz_r: Option<f64>,
    /// `[p1, q1, p2, q2]` of the Leibniz estimate.
    pub leibniz_exponents: Option<[f64; 4]>,
    /// Upper band edge of random data.
    pub band_edge: Option<f64>,
    /// Lower band edge of random data.
    pub band_start: Option<f64>,
    /// Exit with code 4 when the run escapes.
    pub assert_global_decay: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub plots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, plots: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Initial displacement, or the data `g` of linear studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataProfile>,
    /// Initial velocity; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<DataProfile>,
    #[serde(default)]
    pub study: StudySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Canonical text used for the config hash.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Structural checks that do not depend on the experiment kind.
    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.solver.validate()?;
        if let Some(d) = &self.data {
            d.validate()?;
        }
        if let Some(v) = &self.velocity {
            v.validate()?;
        }
        if let Some(p) = &self.problem {
            ensure(p.r > 2.0 && p.r.is_finite(), || format!("r must lie in the domain (2, ∞) (got {})", p.r))?;
            ensure(p.p.fract() == 0.0 && p.p >= 2.0, || {
                format!("nonlinearity power must be an integer ≥ 2 (got {})", p.p)
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "decay"
seed = 3

[grid]
n = 1
points = 256
length = 100.0

[problem]
r = 4.0
s = 5.0
p = 9

[solver]
horizon = 20.0
time_grid = { kind = "uniform", steps = 40 }

[data]
kind = "gaussian"
amplitude = 0.01
width = 3.0

[study]
assert_global_decay = true
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.grid.points, 256);
        assert_eq!(c.solver.horizon, 20.0);
        assert_eq!(c.solver.picard_tol, SolverConfig::default().picard_tol);
        assert!(c.validate().is_ok());
        let back: ExperimentConfig = serde_json::from_str(&c.canonical()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_domains() {
        assert!(ExperimentConfig::parse(&SAMPLE.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
        let c = ExperimentConfig::parse(&SAMPLE.replace("r = 4.0", "r = 2.0")).unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("(2, ∞)"), "{err}");
        let c = ExperimentConfig::parse(&SAMPLE.replace("p = 9", "p = 2.5")).unwrap();
        assert!(c.validate().is_err());
    }
}
