//! Tolerances of the acceptance checks. `docs/acceptance.md` lists the same
//! values; a test keeps the two in sync.

/// Largest partition-of-unity residual on any lattice frequency.
pub const PARTITION_RESIDUAL: f64 = 1e-12;
/// Largest mode-equation residual with central differences.
pub const MODE_ODE_RESIDUAL: f64 = 1e-6;
/// Step of the central differences for the mode-equation residual.
pub const MODE_ODE_STEP: f64 = 1e-4;
/// Relative tolerance of fitted low-frequency decay exponents.
pub const LOW_FREQUENCY_RATE_REL: f64 = 0.10;
/// Largest spread (max/min) of block-estimate constants across `k`.
pub const BLOCK_CONSTANT_SPREAD: f64 = 3.0;
/// Relative L² residual of the paraproduct decomposition.
pub const PARAPRODUCT_RESIDUAL: f64 = 1e-10;
/// Relative change of the Leibniz ensemble maximum under grid refinement.
pub const LEIBNIZ_REFINEMENT_REL: f64 = 0.25;
/// Absolute tolerance on the fitted contraction slope `p − 1`.
pub const CONTRACTION_SLOPE_ABS: f64 = 0.2;
/// Relative L² gap between the Picard and exponential-integrator solutions.
pub const ORACLE_GAP_REL: f64 = 1e-4;
/// Largest log-log slope of the weighted norm over the last decade.
pub const DECAY_TREND_SLOPE: f64 = 0.05;
/// Relative tolerance of the linear Besov decay exponent.
pub const LINEAR_DECAY_REL: f64 = 0.10;
/// Relative escape-time change under `N → 2N`.
pub const ESCAPE_TIME_REL: f64 = 0.10;

/// `(name, value)` for every tolerance above.
pub const ALL: &[(&str, f64)] = &[
    ("PARTITION_RESIDUAL", PARTITION_RESIDUAL),
    ("MODE_ODE_RESIDUAL", MODE_ODE_RESIDUAL),
    ("MODE_ODE_STEP", MODE_ODE_STEP),
    ("LOW_FREQUENCY_RATE_REL", LOW_FREQUENCY_RATE_REL),
    ("BLOCK_CONSTANT_SPREAD", BLOCK_CONSTANT_SPREAD),
    ("PARAPRODUCT_RESIDUAL", PARAPRODUCT_RESIDUAL),
    ("LEIBNIZ_REFINEMENT_REL", LEIBNIZ_REFINEMENT_REL),
    ("CONTRACTION_SLOPE_ABS", CONTRACTION_SLOPE_ABS),
    ("ORACLE_GAP_REL", ORACLE_GAP_REL),
    ("DECAY_TREND_SLOPE", DECAY_TREND_SLOPE),
    ("LINEAR_DECAY_REL", LINEAR_DECAY_REL),
    ("ESCAPE_TIME_REL", ESCAPE_TIME_REL),
];
