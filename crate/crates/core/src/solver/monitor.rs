use rustfft::num_complex::Complex64;

use crate::grid::{GridField, TorusGrid};
use crate::norms::EscapeEvent;

/// Fields with any coordinate beyond this fraction of the box length count
/// as touching the boundary.
pub const BOX_FRACTION: f64 = 0.45;
/// Largest admissible energy fraction near the boundary.
pub const BOX_LIMIT: f64 = 1e-6;

/// Energy fraction in the top octave `|ξ| > ξ_Nyquist/2`.
pub fn tail_fraction(grid: &TorusGrid, coeffs: &[Complex64]) -> f64 {
    let cut = grid.nyquist() / 2.0;
    let (mut top, mut total) = (0.0, 0.0);
    for (c, &xi) in coeffs.iter().zip(grid.freq_abs()) {
        let e = c.norm_sqr();
        total += e;
        if xi > cut {
            top += e;
        }
    }
    if total > 0.0 {
        top / total
    } else {
        0.0
    }
}

/// L² energy fraction of the field where some `|xᵢ| ≥ 0.45 L`.
pub fn box_energy_fraction(f: &GridField) -> f64 {
    let grid = f.grid();
    let edge = BOX_FRACTION * grid.length();
    let (mut outer, mut total) = (0.0, 0.0);
    for (i, v) in f.values().iter().enumerate() {
        let e = v * v;
        total += e;
        if grid.coords(i).iter().any(|x| x.abs() >= edge) {
            outer += e;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Sup-norm cap plus spectral-tail check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupMonitor {
    pub cap: f64,
    pub tail_limit: f64,
}

impl BlowupMonitor {
    pub fn check(&self, t: f64, values: &[f64], grid: &TorusGrid, coeffs: &[Complex64]) -> Option<EscapeEvent> {
        let max_abs = values.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        let tail = tail_fraction(grid, coeffs);
        let cap_exceeded = !(max_abs <= self.cap);
        if cap_exceeded || !(tail <= self.tail_limit) {
            Some(EscapeEvent {
                time: t,
                max_abs,
                tail_fraction: tail,
                cap_exceeded,
            })
        } else {
            None
        }
    }
}
