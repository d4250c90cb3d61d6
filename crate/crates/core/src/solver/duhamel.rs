//! Duhamel term `∫₀ᵗ D(t−τ) S(τ) dτ` on a node set.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::quadrature::{lagrange_weights, stencil, unit_rule};
use super::{Quadrature, SolverConfig};
use crate::error::{ensure, LabError, Result};
use crate::grid::{GridField, TorusGrid};
use crate::norms::Trajectory;
use crate::propagator::{kernel_unchecked, PairFlow};

const CHUNK: usize = 1024;

#[derive(Debug)]
struct IntervalKernel {
    flow: PairFlow,
    /// `K(h − σ_q h)` per rule point, per mode.
    k: Vec<Vec<f64>>,
    dk: Vec<Vec<f64>>,
}

/// Interval data for one rule point: weight times step and source stencil.
#[derive(Debug, Clone)]
struct Point {
    weight: f64,
    stencil: Vec<(usize, f64)>,
}

/// Precomputed kernels for the recursion
/// `Z_i = Φ(h_i) Z_{i−1} + ∫_{t_{i−1}}^{t_i} (K, ∂ₜK)(t_i − τ) S(τ) dτ`
/// with `Z = (I, ∂ₜI)`.
#[derive(Debug)]
pub struct DuhamelPlan {
    grid: TorusGrid,
    times: Vec<f64>,
    kernels: Vec<Arc<IntervalKernel>>,
    points: Vec<Vec<Point>>,
}

fn interval_kernel(grid: &TorusGrid, h: f64, rule: &[(f64, f64)]) -> Result<IntervalKernel> {
    let flow = PairFlow::new(grid, h)?;
    let xi = grid.freq_abs();
    let (k, dk) = rule
        .iter()
        .map(|&(s, _)| {
            let lag = (h - s * h).max(0.0);
            xi.par_iter().map(|&x| kernel_unchecked(lag, x)).unzip::<f64, f64, Vec<_>, Vec<_>>()
        })
        .unzip();
    Ok(IntervalKernel { flow, k, dk })
}

fn interval_points(q: &Quadrature, rule: &[(f64, f64)], times: &[f64], i: usize, a: f64, b: f64) -> Vec<Point> {
    let nodes = stencil(q, i, times.len());
    let xs: Vec<f64> = nodes.iter().map(|&j| times[j]).collect();
    rule.iter()
        .map(|&(s, w)| {
            let tau = a + s * (b - a);
            let lw = lagrange_weights(&xs, tau);
            Point {
                weight: w * (b - a),
                stencil: nodes.iter().copied().zip(lw).collect(),
            }
        })
        .collect()
}

impl DuhamelPlan {
    /// `refine` multiplies the number of rule subintervals per node interval.
    pub fn new(grid: &TorusGrid, times: &[f64], quadrature: &Quadrature, refine: usize) -> Result<Self> {
        ensure(!times.is_empty() && times[0] == 0.0, || "node set must start at 0".into())?;
        ensure(times.windows(2).all(|w| w[1] > w[0]), || "nodes must increase strictly".into())?;
        let rule = unit_rule(quadrature, refine);
        let mut cache: HashMap<u64, Arc<IntervalKernel>> = HashMap::new();
        let mut kernels = Vec::with_capacity(times.len().saturating_sub(1));
        let mut points = Vec::with_capacity(times.len().saturating_sub(1));
        for i in 1..times.len() {
            let h = times[i] - times[i - 1];
            let entry = match cache.get(&h.to_bits()) {
                Some(k) => k.clone(),
                None => {
                    let k = Arc::new(interval_kernel(grid, h, &rule)?);
                    cache.insert(h.to_bits(), k.clone());
                    k
                }
            };
            kernels.push(entry);
            points.push(interval_points(quadrature, &rule, times, i, times[i - 1], times[i]));
        }
        Ok(Self {
            grid: grid.clone(),
            times: times.to_vec(),
            kernels,
            points,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Duhamel term at every node from source spectra at every node.
    pub fn integrate(&self, sources: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        assert_eq!(sources.len(), self.times.len());
        let len = self.grid.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(self.times.len());
        let mut u = vec![zero; len];
        let mut v = vec![zero; len];
        out.push(u.clone());
        for (ik, pts) in self.kernels.iter().zip(&self.points) {
            let (mut nu, mut nv) = ik.flow.apply(&u, &v);
            nu.par_chunks_mut(CHUNK)
                .zip(nv.par_chunks_mut(CHUNK))
                .enumerate()
                .for_each(|(c, (cu, cv))| {
                    let base = c * CHUNK;
                    for (q, p) in pts.iter().enumerate() {
                        let (kq, dkq) = (&ik.k[q], &ik.dk[q]);
                        for m in 0..cu.len() {
                            let idx = base + m;
                            let s: Complex64 = p.stencil.iter().map(|&(j, w)| sources[j][idx] * w).sum();
                            cu[m] += s * (p.weight * kq[idx]);
                            cv[m] += s * (p.weight * dkq[idx]);
                        }
                    }
                });
            u = nu;
            v = nv;
            out.push(u.clone());
        }
        out
    }
}

/// Duhamel term at time `t` summed directly as `Σ w_q K(t − τ_q) S(τ_q)`,
/// independent of the recursion in [`DuhamelPlan`]. A partial last interval
/// interpolates the source.
pub fn duhamel_integral(source: &Trajectory, t: f64, cfg: &SolverConfig) -> Result<GridField> {
    let times = source.times();
    let end = source.final_time();
    if !(0.0..=end).contains(&t) {
        return Err(LabError::TimeOutOfRange { t, start: 0.0, end });
    }
    let grid = source.grid();
    let rule = unit_rule(&cfg.quadrature, 1);
    let spectra: Vec<&[Complex64]> = source.fields().iter().map(|f| f.spectrum().coeffs()).collect();
    let xi = grid.freq_abs();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 1..times.len() {
        let a = times[i - 1];
        if a >= t {
            break;
        }
        let b = times[i].min(t);
        for (&(s, w), p) in rule.iter().zip(interval_points(&cfg.quadrature, &rule, times, i, a, b)) {
            let lag = (t - (a + s * (b - a))).max(0.0);
            let weight = w * (b - a);
            acc.par_iter_mut().enumerate().for_each(|(m, slot)| {
                let src: Complex64 = p.stencil.iter().map(|&(j, lw)| spectra[j][m] * lw).sum();
                *slot += src * (weight * kernel_unchecked(lag, xi[m]).0);
            });
        }
    }
    Ok(GridField::from_trusted(grid, grid.inverse_real_unchecked(&acc)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::propagator::kernel;

    /// Adaptive Simpson on a scalar integrand.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    fn mode_source(grid: &TorusGrid, times: &[f64], k: i64, amp: impl Fn(f64) -> f64) -> Trajectory {
        let xi = grid.freq(k);
        let fields = times
            .iter()
            .map(|&t| GridField::from_fn(grid, |x| amp(t) * (xi * x[0]).cos()).unwrap())
            .collect();
        Trajectory::new(times.to_vec(), fields).unwrap()
    }

    #[test]
    fn zero_source_gives_zero() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let src = Trajectory::zeros(&g, times.clone()).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(duhamel_integral(&src, 0.73, &cfg).unwrap().max_abs(), 0.0);
        let plan = DuhamelPlan::new(&g, &times, &cfg.quadrature, 1).unwrap();
        let spectra: Vec<_> = src.fields().iter().map(|f| f.spectrum().coeffs().to_vec()).collect();
        assert!(plan.integrate(&spectra).iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn constant_single_mode_matches_scalar_quadrature() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let k = 3;
        let xi = g.freq(k);
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let src = mode_source(&g, &times, k, |_| 1.0);
        let cfg = SolverConfig {
            quadrature: Quadrature::GaussPanels { order: 8, panels: 2 },
            ..Default::default()
        };
        for &t in &[1.0, 2.35, 4.0] {
            let got = duhamel_integral(&src, t, &cfg).unwrap();
            let exact = adaptive_simpson(&|s| kernel(s, xi).unwrap().0, 0.0, t, 1e-13);
            let x0 = g.coords(0)[0];
            let want = exact * (xi * x0).cos();
            assert!((got.values()[0] - want).abs() < 1e-8, "t={t}: {} vs {want}", got.values()[0]);
        }
    }

    #[test]
    fn recursion_matches_direct_sum() {
        let g = make_grid(1, 64, 20.0).unwrap();
        let times: Vec<f64> = (0..=30).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let src = Trajectory::new(
            times.clone(),
            times
                .iter()
                .map(|&t| GridField::from_fn(&g, |x| (-(x[0] - t).powi(2)).exp() * (1.0 + t)).unwrap())
                .collect(),
        )
        .unwrap();
        for q in [Quadrature::Trapezoid, Quadrature::GaussPanels { order: 4, panels: 1 }] {
            let cfg = SolverConfig {
                quadrature: q,
                ..Default::default()
            };
            let plan = DuhamelPlan::new(&g, &times, &q, 1).unwrap();
            let spectra: Vec<_> = src.fields().iter().map(|f| f.spectrum().coeffs().to_vec()).collect();
            let rec = plan.integrate(&spectra);
            for i in [5, 17, 30] {
                let direct = duhamel_integral(&src, times[i], &cfg).unwrap();
                let r = g.inverse_real_unchecked(&rec[i]);
                let err = r.iter().zip(direct.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err < 1e-12, "{q:?} node {i}: {err}");
            }
        }
    }

    #[test]
    fn trapezoid_is_second_order() {
        let g = make_grid(1, 32, 10.0).unwrap();
        let k = 2;
        let xi = g.freq(k);
        let amp = |t: f64| (1.3 * t).sin() + 0.5;
        let t_end = 3.0;
        let exact = adaptive_simpson(&|s| kernel(t_end - s, xi).unwrap().0 * amp(s), 0.0, t_end, 1e-13);
        let x0 = g.coords(0)[0];
        let err = |steps: usize| {
            let times: Vec<f64> = (0..=steps).map(|i| i as f64 * t_end / steps as f64).collect();
            let src = mode_source(&g, &times, k, amp);
            let v = duhamel_integral(&src, t_end, &SolverConfig::default()).unwrap().values()[0];
            (v - exact * (xi * x0).cos()).abs()
        };
        let (e1, e2) = (err(40), err(80));
        let ratio = e1 / e2;
        assert!((3.6..4.4).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn out_of_range_time_is_rejected() {
        let g = make_grid(1, 16, 10.0).unwrap();
        let src = Trajectory::zeros(&g, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            duhamel_integral(&src, 1.5, &SolverConfig::default()),
            Err(LabError::TimeOutOfRange { .. })
        ));
        assert!(duhamel_integral(&src, -0.1, &SolverConfig::default()).is_err());
    }
}
