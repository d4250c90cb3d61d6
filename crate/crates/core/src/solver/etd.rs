//! Second-order exponential time differencing on `(û, ∂ₜû)`.
//!
//! With `Φ(h)` the exact linear flow and `K₁ = ∫₀ʰ K`, `K₂ = ∫₀ʰ τK`:
//! predictor `a = Φ(h)W + (K₁, K(h))·S(u)`, corrector adds
//! `(hK₁ − K₂, K₁)·(S(a) − S(u))/h`.

use std::collections::HashMap;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::quadrature::gauss_legendre;
use super::SolverConfig;
use crate::error::{ensure, Result};
use crate::grid::{dealiased_power_spectrum, GridField, TorusGrid};
use crate::norms::{EscapeEvent, ProblemParams, Trajectory};
use crate::propagator::{kernel_unchecked, PairFlow};

const MOMENT_ORDER: usize = 8;

struct Step {
    h: f64,
    flow: PairFlow,
    /// `(K(h), K₁, K₂)` per mode.
    moments: Vec<(f64, f64, f64)>,
}

fn moments(h: f64, xi: f64, nodes: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let panels = (h * xi).ceil().max(1.0) as usize;
    let width = h / panels as f64;
    let (mut k1, mut k2) = (0.0, 0.0);
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in nodes.iter().zip(weights) {
            let tau = a + 0.5 * width * (x + 1.0);
            let k = kernel_unchecked(tau, xi).0;
            k1 += 0.5 * width * w * k;
            k2 += 0.5 * width * w * tau * k;
        }
    }
    (kernel_unchecked(h, xi).0, k1, k2)
}

impl Step {
    fn new(grid: &TorusGrid, h: f64) -> Result<Self> {
        let (nodes, weights) = gauss_legendre(MOMENT_ORDER);
        Ok(Self {
            h,
            flow: PairFlow::new(grid, h)?,
            moments: grid.freq_abs().par_iter().map(|&x| moments(h, x, &nodes, &weights)).collect(),
        })
    }
}

struct Source<'a> {
    grid: &'a TorusGrid,
    power: u32,
    coefficient: f64,
    padding: usize,
}

impl Source<'_> {
    fn eval(&self, u: &[Complex64]) -> Vec<Complex64> {
        if self.coefficient == 0.0 {
            return vec![Complex64::new(0.0, 0.0); u.len()];
        }
        dealiased_power_spectrum(u, self.grid, self.power, self.coefficient, self.padding)
    }
}

fn advance(step: &Step, src: &Source, u: &[Complex64], v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let s0 = src.eval(u);
    let (mut au, mut av) = step.flow.apply(u, v);
    for i in 0..au.len() {
        let (k, k1, _) = step.moments[i];
        au[i] += s0[i] * k1;
        av[i] += s0[i] * k;
    }
    let sa = src.eval(&au);
    let h = step.h;
    for i in 0..au.len() {
        let (_, k1, k2) = step.moments[i];
        let ds = (sa[i] - s0[i]) / h;
        au[i] += ds * (h * k1 - k2);
        av[i] += ds * k1;
    }
    (au, av)
}

/// Integrates to every time in `times` with steps of at most `dt`. Stops at
/// the first step whose solution trips the blow-up monitor.
pub fn etd_solve(
    u0: &GridField,
    u1: &GridField,
    pp: &ProblemParams,
    dt: f64,
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    ensure(dt > 0.0 && dt.is_finite(), || format!("step must be positive (got {dt})"))?;
    u0.check_same_grid(u1)?;
    ensure(!times.is_empty() && times[0] == 0.0, || "output times must start at 0".into())?;
    let grid = u0.grid();
    let src = Source {
        grid,
        power: pp.p,
        coefficient: cfg.nonlinear_coefficient,
        padding: cfg.padding(pp.p),
    };
    let monitor = cfg.monitor();
    let mut cache: HashMap<u64, Step> = HashMap::new();
    let mut u = u0.spectrum().coeffs().to_vec();
    let mut v = u1.spectrum().coeffs().to_vec();
    let mut out_times = vec![0.0];
    let mut fields = vec![u0.clone()];
    let mut escape: Option<EscapeEvent> = None;
    'outer: for w in times.windows(2) {
        let span = w[1] - w[0];
        ensure(span > 0.0, || "output times must increase strictly".into())?;
        let n = (span / dt).ceil().max(1.0) as usize;
        let h = span / n as f64;
        if !cache.contains_key(&h.to_bits()) {
            cache.insert(h.to_bits(), Step::new(grid, h)?);
        }
        let step = &cache[&h.to_bits()];
        for k in 1..=n {
            let (nu, nv) = advance(step, &src, &u, &v);
            u = nu;
            v = nv;
            let t = if k == n { w[1] } else { w[0] + k as f64 * h };
            let values = grid.inverse_real_unchecked(&u);
            if let Some(e) = monitor.check(t, &values, grid, &u) {
                escape = Some(e);
                break 'outer;
            }
            if k == n {
                out_times.push(t);
                fields.push(GridField::from_trusted(grid, values));
            }
        }
    }
    Ok(Trajectory::new(out_times, fields)?.with_escape(escape))
}

/// [`etd_solve`] on the configured node set with step `cfg.etd_dt`.
pub fn etd_oracle(u0: &GridField, u1: &GridField, pp: &ProblemParams, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    etd_solve(u0, u1, pp, cfg.etd_dt, &cfg.nodes()?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::DataProfile;
    use crate::propagator::linear_solution;
    use crate::solver::{picard_solve, Quadrature, TimeGrid};

    fn rel_l2(a: &GridField, b: &GridField) -> f64 {
        let d = a.sub(b).unwrap();
        let n = |f: &GridField| f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        n(&d) / n(b)
    }

    #[test]
    fn moments_match_closed_form() {
        // K₁ = (1 − K'(h) − K(h))/ξ² from integrating the mode equation
        let (x, w) = gauss_legendre(MOMENT_ORDER);
        for &xi in &[0.3, 0.5, 0.9, 7.0] {
            let h = 0.37;
            let (k, k1, _) = moments(h, xi, &x, &w);
            let dk = kernel_unchecked(h, xi).1;
            let want = (1.0 - dk - k) / (xi * xi);
            assert!((k1 - want).abs() < 1e-12, "ξ={xi}: {k1} vs {want}");
        }
    }

    #[test]
    fn linear_mode_is_exact() {
        let g = make_grid(1, 128, 40.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 3).unwrap();
        let u0 = DataProfile::Gaussian { amplitude: 1.0, width: 1.5 }.sample(&g).unwrap();
        let u1 = DataProfile::Gaussian { amplitude: -0.5, width: 3.0 }.sample(&g).unwrap();
        let cfg = SolverConfig {
            nonlinear_coefficient: 0.0,
            ..Default::default()
        };
        let traj = etd_solve(&u0, &u1, &pp, 0.05, &[0.0, 10.0], &cfg).unwrap();
        let lin = linear_solution(&u0, &u1, 10.0).unwrap();
        let err = traj.fields()[1].sub(&lin).unwrap().max_abs();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn agrees_with_picard_at_second_order() {
        let g = make_grid(1, 128, 40.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 3).unwrap();
        let u0 = DataProfile::Gaussian { amplitude: 0.4, width: 2.0 }.sample(&g).unwrap();
        let u1 = GridField::zeros(&g);
        let cfg = SolverConfig {
            horizon: 2.0,
            time_grid: TimeGrid::Uniform { steps: 400 },
            quadrature: Quadrature::GaussPanels { order: 6, panels: 1 },
            picard_tol: 1e-14,
            ..Default::default()
        };
        let picard = picard_solve(&u0, &u1, &pp, &cfg).unwrap().trajectory;
        let gap = |dt: f64| {
            let t = etd_solve(&u0, &u1, &pp, dt, &[0.0, 2.0], &cfg).unwrap();
            rel_l2(&t.fields()[1], picard.fields().last().unwrap())
        };
        let (g1, g2) = (gap(0.1), gap(0.05));
        assert!(g1 < 1e-3);
        let ratio = g1 / g2;
        assert!((3.0..5.0).contains(&ratio), "gap ratio {ratio} ({g1:e}, {g2:e})");
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 2).unwrap();
        let z = GridField::zeros(&g);
        let t = etd_oracle(&z, &z, &pp, &SolverConfig::default()).unwrap();
        assert!(t.escape().is_none());
        assert!(t.fields().iter().all(|f| f.max_abs() == 0.0));
    }
}
