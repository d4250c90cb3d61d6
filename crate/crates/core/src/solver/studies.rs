//! Contraction, decay and escape studies built on the solvers.

use std::collections::BTreeMap;

use super::monitor::{box_energy_fraction, BOX_LIMIT};
use super::{etd_oracle, PicardDiagnostics, SolverConfig};
use crate::error::{LabError, Result};
use crate::fit::{fit_decay, fit_line, last_decade};
use crate::grid::{pad_spectrum, GridField};
use crate::norms::{x_norm_series, ProblemParams, Trajectory};
use crate::report::{ExperimentReport, Table, Verdict};
use crate::tolerances;

/// Largest admissible log-log slope of the weighted norm over the last decade.
pub const DECAY_TREND_LIMIT: f64 = tolerances::DECAY_TREND_SLOPE;
/// Relative escape-time change allowed under grid refinement.
pub const ESCAPE_STABILITY: f64 = tolerances::ESCAPE_TIME_REL;

/// One completed run of a contraction sweep.
#[derive(Debug, Clone)]
pub struct ContractionRun {
    pub amplitude: f64,
    pub horizon: f64,
    pub diagnostics: PicardDiagnostics,
}

fn first_ratio(d: &PicardDiagnostics) -> Option<f64> {
    d.ratios.first().copied()
}

/// Tabulates contraction ratios and fits the first ratio against the data
/// amplitude (expected slope `p − 1`) and against the horizon.
pub fn contraction_report(runs: &[ContractionRun], pp: &ProblemParams) -> ExperimentReport {
    let mut report = ExperimentReport::new("contraction");
    let mut all = Table::new("ratios", &["amplitude", "horizon", "iteration", "difference", "ratio"]);
    let mut first = Table::new("first_ratio", &["amplitude", "horizon", "ratio"]);
    for run in runs {
        let d = &run.diagnostics;
        for (k, diff) in d.differences.iter().enumerate() {
            let ratio = if k == 0 { f64::NAN } else { d.ratios[k - 1] };
            all.push(vec![run.amplitude, run.horizon, (k + 1) as f64, *diff, ratio]);
        }
        if let Some(r) = first_ratio(d) {
            first.push(vec![run.amplitude, run.horizon, r]);
        }
    }
    let expected = pp.p as f64 - 1.0;
    report.scalar("p", pp.p as f64).scalar("expected_amplitude_slope", expected);

    // amplitude fit over the horizon with the most distinct amplitudes
    let mut by_horizon: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    let mut by_amplitude: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &first.rows {
        if row[2] > 0.0 {
            by_horizon.entry(row[1].to_bits()).or_default().push((row[0], row[2]));
            by_amplitude.entry(row[0].to_bits()).or_default().push((row[1], row[2]));
        }
    }
    let slope_of = |pts: &[(f64, f64)]| {
        let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        fit_line(&xs, &ys).ok().map(|f| f.slope)
    };
    let amp = by_horizon.values().filter(|v| v.len() >= 2).max_by_key(|v| v.len());
    match amp.and_then(|v| slope_of(v)) {
        Some(s) => {
            report.scalar("amplitude_slope", s);
            report.verdict(Verdict::absolute("amplitude-slope", s, expected, tolerances::CONTRACTION_SLOPE_ABS));
        }
        None => {
            report.scalar("amplitude_slope", f64::NAN);
            report.note("amplitude_slope", "fewer than two amplitudes with a nonzero ratio");
        }
    }
    let hor = by_amplitude.values().filter(|v| v.len() >= 2).max_by_key(|v| v.len());
    report.scalar("horizon_slope", hor.and_then(|v| slope_of(v)).unwrap_or(f64::NAN));
    let max_ratio = runs
        .iter()
        .flat_map(|r| r.diagnostics.ratios.iter().copied())
        .fold(0.0, f64::max);
    report.scalar("max_ratio", max_ratio);
    report.table(all).table(first);
    report
}

/// Decay fits over the last decade of `[0, T]` and the bounded-weighted-sup
/// check. Rejects trajectories that escaped or touched the box boundary.
pub fn decay_study(traj: &Trajectory, pp: &ProblemParams) -> Result<ExperimentReport> {
    if let Some(e) = traj.escape() {
        return Err(LabError::Rejected(format!("run escaped at t = {}", e.time)));
    }
    let box_fraction = traj
        .fields()
        .iter()
        .map(box_energy_fraction)
        .fold(0.0, f64::max);
    if !(box_fraction < BOX_LIMIT) {
        return Err(LabError::Rejected(format!(
            "solution reached the box boundary (energy fraction {box_fraction:e} ≥ {BOX_LIMIT:e})"
        )));
    }
    let series = x_norm_series(traj, pp);
    let mut report = ExperimentReport::new("decay-study");
    let mut table = Table::new("norms", &["t", "regular", "decay", "weighted"]);
    for s in &series {
        table.push(vec![s.t, s.regular, s.decay, s.weighted]);
    }
    let expected = -pp.x_weight_exponent();
    report
        .scalar("box_fraction", box_fraction)
        .scalar("expected_regular_exponent", expected)
        .scalar("weight_exponent", pp.x_weight_exponent());
    let sup = series.iter().fold(0.0f64, |m, s| m.max(s.weighted));
    report.scalar("weighted_sup", sup);
    if sup == 0.0 {
        report
            .scalar("regular_exponent", 0.0)
            .scalar("decay_exponent", 0.0)
            .scalar("weighted_trend", 0.0)
            .note("trajectory", "identically zero")
            .verdict(Verdict::flag("weighted-sup-bounded", true, "zero trajectory"));
        report.table(table);
        return Ok(report);
    }
    let ts: Vec<f64> = series.iter().map(|s| s.t).collect();
    let (lo, hi) = last_decade(&ts);
    report.scalar("fit_window_start", lo).scalar("fit_window_end", hi);
    let col = |f: fn(&crate::norms::XSample) -> f64| series.iter().map(f).collect::<Vec<_>>();
    let regular = fit_decay(&ts, &col(|s| s.regular), lo, hi)?;
    let decay = fit_decay(&ts, &col(|s| s.decay), lo, hi)?;
    let weighted = fit_decay(&ts, &col(|s| s.weighted), lo, hi)?;
    let late_sup = series
        .iter()
        .filter(|s| s.t >= lo)
        .fold(0.0f64, |m, s| m.max(s.weighted));
    report
        .scalar("regular_exponent", regular.slope)
        .scalar("decay_exponent", decay.slope)
        .scalar("weighted_trend", weighted.slope)
        .scalar("late_to_global_sup", late_sup / sup)
        .verdict(Verdict::below("weighted-sup-bounded", weighted.slope, DECAY_TREND_LIMIT))
        .verdict(Verdict::relative(
            "linear-regular-exponent",
            regular.slope,
            expected,
            tolerances::LINEAR_DECAY_REL,
        ))
        .table(table);
    Ok(report)
}

/// Runs the exponential integrator on the native grid and on the grid with
/// twice the points and compares escape times.
pub fn blowup_probe(
    u0: &GridField,
    u1: &GridField,
    pp: &ProblemParams,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    let grid = u0.grid();
    let fine = grid.padded(2);
    let refine = |f: &GridField| {
        GridField::from_trusted(&fine, fine.inverse_real_unchecked(&pad_spectrum(f.spectrum().coeffs(), grid, 2)))
    };
    let coarse_run = etd_oracle(u0, u1, pp, cfg)?;
    let fine_run = etd_oracle(&refine(u0), &refine(u1), pp, cfg)?;

    let mut report = ExperimentReport::new("blowup-probe");
    let mut table = Table::new("escape", &["points", "escaped", "escape_time", "final_time", "final_sup"]);
    let mut times = Vec::new();
    for (points, run) in [(grid.points(), &coarse_run), (fine.points(), &fine_run)] {
        let t = run.escape().map(|e| e.time);
        times.push(t);
        table.push(vec![
            points as f64,
            if t.is_some() { 1.0 } else { 0.0 },
            t.unwrap_or(f64::NAN),
            run.final_time(),
            run.fields().last().unwrap().max_abs(),
        ]);
    }
    report
        .scalar("p", pp.p as f64)
        .scalar("fujita", pp.fujita)
        .scalar("amplitude", u0.max_abs())
        .scalar("escape_time", times[0].unwrap_or(f64::NAN))
        .scalar("escape_time_refined", times[1].unwrap_or(f64::NAN))
        .table(table);
    match (times[0], times[1]) {
        (Some(a), Some(b)) => {
            report
                .note("outcome", "escape")
                .scalar("escape_time_gap", (b - a).abs() / a)
                .verdict(Verdict::relative("escape-time-stable", b, a, ESCAPE_STABILITY));
        }
        (None, None) => {
            report
                .note("outcome", "no-escape")
                .verdict(Verdict::flag("escape-consistent", true, format!("no escape by t = {}", cfg.horizon)));
        }
        _ => {
            report
                .note("outcome", "inconsistent")
                .verdict(Verdict::flag("escape-consistent", false, "escape at only one resolution"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::profiles::DataProfile;
    use crate::solver::{linear_trajectory, picard_solve, TimeGrid};

    #[test]
    fn zero_inputs() {
        let g = make_grid(1, 64, 40.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 2).unwrap();
        let z = GridField::zeros(&g);
        let traj = Trajectory::zeros(&g, vec![0.0, 1.0, 2.0]).unwrap();
        let rep = decay_study(&traj, &pp).unwrap();
        assert_eq!(rep.get("weighted_sup"), Some(0.0));
        let cfg = SolverConfig {
            horizon: 1.0,
            ..Default::default()
        };
        let probe = blowup_probe(&z, &z, &pp, &cfg).unwrap();
        assert_eq!(probe.notes["outcome"], "no-escape");
        let out = picard_solve(&z, &z, &pp, &cfg).unwrap();
        let rep = contraction_report(
            &[ContractionRun {
                amplitude: 0.0,
                horizon: 1.0,
                diagnostics: out.diagnostics,
            }],
            &pp,
        );
        assert!(rep.find_table("ratios").unwrap().column("ratio").unwrap().iter().all(|r| !(*r > 0.0)));
    }

    #[test]
    fn linear_decay_rate_of_slowly_decaying_data() {
        let g = make_grid(1, 2048, 400.0).unwrap();
        let pp = ProblemParams::new(1, 4.0, 2.0, 9).unwrap();
        let u0 = DataProfile::SlowDecay {
            amplitude: 1.0,
            exponent: 0.25 + 0.05,
            odd: true,
            radius: 50.0,
            taper: 12.5,
        }
        .sample(&g)
        .unwrap();
        let times = TimeGrid::Hybrid {
            dt: 1.0,
            switch: 10.0,
            count: 60,
        }
        .nodes(200.0)
        .unwrap();
        let traj = linear_trajectory(&u0, &GridField::zeros(&g), &times).unwrap();
        let rep = decay_study(&traj, &pp).unwrap();
        let got = rep.get("regular_exponent").unwrap();
        let want = rep.get("expected_regular_exponent").unwrap();
        assert!(rep.find_verdict("linear-regular-exponent").unwrap().passed, "{got} vs {want}");
        assert!(rep.find_verdict("weighted-sup-bounded").unwrap().passed);
    }

    #[test]
    fn escaped_runs_are_rejected() {
        let g = make_grid(1, 64, 40.0).unwrap();
        let traj = Trajectory::zeros(&g, vec![0.0, 1.0]).unwrap().with_escape(Some(crate::norms::EscapeEvent {
            time: 1.5,
            max_abs: 1e9,
            tail_fraction: 0.0,
            cap_exceeded: true,
        }));
        let pp = ProblemParams::new(1, 4.0, 2.0, 2).unwrap();
        assert!(matches!(decay_study(&traj, &pp), Err(LabError::Rejected(_))));
    }
}
