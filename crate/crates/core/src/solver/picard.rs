//! Fixed-point iteration `u ↦ Ψ(u) = u_lin + ∫₀ᵗ D(t−τ) c·u(τ)ᵖ dτ`.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::duhamel::DuhamelPlan;
use super::SolverConfig;
use crate::admissibility::check_lwp;
use crate::error::{ensure, LabError, Result};
use crate::grid::{dealiased_power_spectrum, GridField, TorusGrid};
use crate::norms::{x_norm, EscapeEvent, ProblemParams, Trajectory};
use crate::propagator::kernel_symbols;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardDiagnostics {
    /// `‖u_k‖_X` for each computed iterate `u_1, u_2, …`.
    pub x_norms: Vec<f64>,
    /// `‖u_{k+1} − u_k‖_X`.
    pub differences: Vec<f64>,
    /// Successive difference ratios; `0` when the previous difference vanished.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖u − Ψ(u)‖_X` of the returned trajectory.
    pub final_residual: f64,
    /// Richardson estimate of the relative L² quadrature error.
    pub quadrature_error: f64,
    pub blowup: Option<EscapeEvent>,
    /// Some ratio reached 1.
    pub non_contractive: bool,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    pub diagnostics: PicardDiagnostics,
}

type Spectra = Vec<Vec<Complex64>>;

struct Problem<'a> {
    grid: TorusGrid,
    u0: &'a GridField,
    lin: Spectra,
    plan: DuhamelPlan,
    power: u32,
    coefficient: f64,
    padding: usize,
}

impl Problem<'_> {
    fn sources(&self, u: &Spectra) -> Spectra {
        let len = self.grid.len();
        if self.coefficient == 0.0 {
            return vec![vec![Complex64::new(0.0, 0.0); len]; u.len()];
        }
        u.par_iter()
            .map(|c| dealiased_power_spectrum(c, &self.grid, self.power, self.coefficient, self.padding))
            .collect()
    }

    fn psi(&self, u: &Spectra) -> (Spectra, Spectra) {
        let src = self.sources(u);
        let duh = self.plan.integrate(&src);
        let mut out: Spectra = self
            .lin
            .iter()
            .zip(&duh)
            .map(|(l, d)| l.iter().zip(d).map(|(a, b)| a + b).collect())
            .collect();
        out[0] = self.lin[0].clone();
        (out, src)
    }

    fn fields(&self, u: &Spectra) -> Vec<GridField> {
        let mut out: Vec<GridField> = u
            .par_iter()
            .map(|c| GridField::from_trusted(&self.grid, self.grid.inverse_real_unchecked(c)))
            .collect();
        out[0] = self.u0.clone();
        out
    }
}

fn linear_spectra(u0: &GridField, u1: &GridField, times: &[f64]) -> Result<Spectra> {
    let (a, b) = (u0.spectrum().coeffs(), u1.spectrum().coeffs());
    times
        .par_iter()
        .map(|&t| {
            let (k, dk) = kernel_symbols(u0.grid(), t)?;
            Ok((0..a.len()).map(|i| a[i] * (dk[i] + k[i]) + b[i] * k[i]).collect())
        })
        .collect()
}

/// Linear solution sampled at `times`, with `u(0) = u0` exactly.
pub fn linear_trajectory(u0: &GridField, u1: &GridField, times: &[f64]) -> Result<Trajectory> {
    u0.check_same_grid(u1)?;
    let spectra = linear_spectra(u0, u1, times)?;
    let grid = u0.grid();
    let mut fields: Vec<GridField> = spectra
        .iter()
        .map(|c| GridField::from_trusted(grid, grid.inverse_real_unchecked(c)))
        .collect();
    fields[0] = u0.clone();
    Trajectory::new(times.to_vec(), fields)
}

fn x_distance(a: &[GridField], b: &[GridField], times: &[f64], pp: &ProblemParams) -> Result<f64> {
    let diff = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect::<Result<Vec<_>>>()?;
    Ok(x_norm(&Trajectory::new(times.to_vec(), diff)?, pp))
}

fn check_inputs(u0: &GridField, u1: &GridField, pp: &ProblemParams, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    u0.check_same_grid(u1)?;
    ensure(u0.grid().dim() == pp.n, || {
        format!("grid dimension {} differs from n = {}", u0.grid().dim(), pp.n)
    })?;
    ensure(cfg.blowup_threshold > u0.max_abs(), || {
        format!(
            "blowup_threshold {} must exceed the initial sup norm {}",
            cfg.blowup_threshold,
            u0.max_abs()
        )
    })
}

/// Picard iteration from the linear solution. Stops when the X-distance of
/// successive iterates drops below `picard_tol`, after `max_iters`, or when
/// an iterate escapes the blow-up monitor.
pub fn picard_solve(
    u0: &GridField,
    u1: &GridField,
    pp: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<PicardOutcome> {
    check_inputs(u0, u1, pp, cfg)?;
    if !cfg.override_admissibility {
        let v = check_lwp(pp.n, pp.r, pp.s, pp.p as f64)?;
        if !v.lwp_passes() {
            return Err(LabError::NotAdmissible(v.summary()));
        }
    }
    let times = cfg.nodes()?;
    let grid = u0.grid().clone();
    let problem = Problem {
        lin: linear_spectra(u0, u1, &times)?,
        plan: DuhamelPlan::new(&grid, &times, &cfg.quadrature, 1)?,
        grid,
        u0,
        power: pp.p,
        coefficient: cfg.nonlinear_coefficient,
        padding: cfg.padding(pp.p),
    };
    let monitor = cfg.monitor();

    let mut current = problem.lin.clone();
    let mut current_fields = problem.fields(&current);
    let mut diag = PicardDiagnostics {
        x_norms: Vec::new(),
        differences: Vec::new(),
        ratios: Vec::new(),
        converged: false,
        iterations: 0,
        final_residual: f64::NAN,
        quadrature_error: 0.0,
        blowup: None,
        non_contractive: false,
    };
    if let Some(e) = first_escape(&problem, &current, &current_fields, &times, &monitor) {
        return escaped(e, &times, current_fields, diag);
    }
    for _ in 0..cfg.max_iters {
        let (next, _) = problem.psi(&current);
        let next_fields = problem.fields(&next);
        diag.iterations += 1;
        if let Some(e) = first_escape(&problem, &next, &next_fields, &times, &monitor) {
            return escaped(e, &times, next_fields, diag);
        }
        let d = x_distance(&next_fields, &current_fields, &times, pp)?;
        diag.x_norms.push(x_norm(&Trajectory::new(times.clone(), next_fields.clone())?, pp));
        if let Some(&prev) = diag.differences.last() {
            diag.ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
        }
        diag.differences.push(d);
        current = next;
        current_fields = next_fields;
        if d < cfg.picard_tol {
            diag.converged = true;
            break;
        }
    }
    diag.non_contractive = diag.ratios.iter().any(|&r| r >= 1.0);

    let (image, sources) = problem.psi(&current);
    diag.final_residual = x_distance(&problem.fields(&image), &current_fields, &times, pp)?;
    diag.quadrature_error = richardson(&problem, cfg, &times, &sources, &current)?;
    Ok(PicardOutcome {
        trajectory: Trajectory::new(times, current_fields)?,
        diagnostics: diag,
    })
}

fn first_escape(
    problem: &Problem,
    spectra: &Spectra,
    fields: &[GridField],
    times: &[f64],
    monitor: &super::BlowupMonitor,
) -> Option<EscapeEvent> {
    (0..times.len())
        .into_par_iter()
        .filter_map(|i| monitor.check(times[i], fields[i].values(), &problem.grid, &spectra[i]).map(|e| (i, e)))
        .min_by_key(|(i, _)| *i)
        .map(|(_, e)| e)
}

fn escaped(
    e: EscapeEvent,
    times: &[f64],
    fields: Vec<GridField>,
    mut diag: PicardDiagnostics,
) -> Result<PicardOutcome> {
    let keep = times.iter().take_while(|&&t| t < e.time).count().max(1);
    diag.non_contractive = diag.ratios.iter().any(|&r| r >= 1.0);
    diag.blowup = Some(e.clone());
    let trajectory = Trajectory::new(times[..keep].to_vec(), fields[..keep].to_vec())?.with_escape(Some(e));
    Ok(PicardOutcome {
        trajectory,
        diagnostics: diag,
    })
}

/// Compares the Duhamel term on every other node with the full node set.
fn richardson(problem: &Problem, cfg: &SolverConfig, times: &[f64], sources: &Spectra, u: &Spectra) -> Result<f64> {
    if times.len() < 3 || cfg.nonlinear_coefficient == 0.0 {
        return Ok(0.0);
    }
    let fine = problem.plan.integrate(sources);
    let idx: Vec<usize> = (0..times.len()).step_by(2).collect();
    let coarse_times: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let coarse_plan = DuhamelPlan::new(&problem.grid, &coarse_times, &cfg.quadrature, 1)?;
    let coarse_src: Spectra = idx.iter().map(|&i| sources[i].clone()).collect();
    let coarse = coarse_plan.integrate(&coarse_src);
    let factor = 2f64.powi(cfg.quadrature.order() as i32) - 1.0;
    let l2 = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut worst = 0.0f64;
    for (c, &i) in idx.iter().enumerate() {
        let scale = l2(&u[i]);
        if scale == 0.0 {
            continue;
        }
        let d: Vec<Complex64> = fine[i].iter().zip(&coarse[c]).map(|(a, b)| a - b).collect();
        worst = worst.max(l2(&d) / factor / scale);
    }
    Ok(worst)
}

/// `‖u − Ψ(u)‖_X` for a given trajectory, with `refine` times as many rule
/// subintervals per node interval as the configured quadrature.
pub fn psi_residual(
    traj: &Trajectory,
    u1: &GridField,
    pp: &ProblemParams,
    cfg: &SolverConfig,
    refine: usize,
) -> Result<f64> {
    let u0 = &traj.fields()[0];
    u0.check_same_grid(u1)?;
    let times = traj.times().to_vec();
    let grid = u0.grid().clone();
    let problem = Problem {
        lin: linear_spectra(u0, u1, &times)?,
        plan: DuhamelPlan::new(&grid, &times, &cfg.quadrature, refine)?,
        grid,
        u0,
        power: pp.p,
        coefficient: cfg.nonlinear_coefficient,
        padding: cfg.padding(pp.p),
    };
    let u: Spectra = traj.fields().iter().map(|f| f.spectrum().coeffs().to_vec()).collect();
    let (image, _) = problem.psi(&u);
    x_distance(&problem.fields(&image), traj.fields(), &times, pp)
}
