//! Experiment execution and output.

use std::io;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ExperimentConfig, ProblemSpec};
use super::registry;
use super::svg::{FitLine, Plot, Series};
use crate::admissibility::{check_gwp, check_lwp, suggest_s};
use crate::error::LabError;
use crate::fit::fit_decay;
use crate::grid::{GridField, TorusGrid};
use crate::norms::{ProblemParams, Trajectory};
use crate::paraproduct::{decomposition_check, leibniz_ensemble, LeibnizConfig};
use crate::profiles::DataProfile;
use crate::propagator::{mode_ode_residual, verify_block_estimate, verify_lp_lq, LpLqSpec};
use crate::report::{config_hash, sanitize, ExperimentReport, Table, Verdict};
use crate::solver::{
    blowup_probe, contraction_report, decay_study, etd_oracle, picard_solve, ContractionRun, SolverConfig,
};
use crate::tolerances;

/// Failure of a run, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("admissibility failure: {0}")]
    Admissibility(String),
    #[error("blow-up in a run asserting global decay: {0}")]
    Blowup(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Admissibility(_) => 3,
            RunError::Blowup(_) => 4,
            RunError::Runtime(_) | RunError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Admissibility(_) => "admissibility",
            RunError::Blowup(_) => "blowup",
            RunError::Runtime(_) => "runtime",
            RunError::Io(_) => "io",
        }
    }

    /// Machine-readable error record.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

impl From<LabError> for RunError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::NotAdmissible(m) => RunError::Admissibility(m),
            LabError::Rejected(_) | LabError::UndefinedRatio | LabError::NonFinite { .. } | LabError::NotHermitian { .. } => {
                RunError::Runtime(e.to_string())
            }
            other => RunError::Config(other.to_string()),
        }
    }
}

type RunResult<T> = std::result::Result<T, RunError>;

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub override_admissibility: bool,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Report, plots and where they were written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Parses config text and applies the overrides.
pub fn load_config(text: &str, opts: &RunOptions) -> RunResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::parse(text).map_err(|e| RunError::Config(e.to_string()))?;
    if opts.override_admissibility {
        cfg.solver.override_admissibility = true;
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(o) = &opts.out {
        cfg.output.dir = Some(o.clone());
    }
    if registry::find(&cfg.experiment).is_none() {
        return Err(RunError::Config(format!(
            "unknown experiment '{}'; see `besov-wave-lab list`",
            cfg.experiment
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Loads, runs and writes an experiment.
pub fn run_file(path: &Path, opts: &RunOptions) -> RunResult<RunOutcome> {
    let record = |e: RunError, dir: Option<&Path>| {
        if let Some(d) = dir {
            let _ = std::fs::create_dir_all(d).and_then(|_| std::fs::write(d.join("error.json"), e.to_json()));
        }
        e
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| record(RunError::Config(format!("cannot read {}: {e}", path.display())), opts.out.as_deref()))?;
    let cfg = load_config(&text, opts).map_err(|e| record(e, opts.out.as_deref()))?;
    let out_dir = output_dir(&cfg);
    match run_config(&cfg) {
        Ok((report, plots)) => {
            let files = write_outputs(&cfg, &report, &plots, &out_dir)?;
            Ok(RunOutcome { report, out_dir, files })
        }
        Err(e) => Err(record(e, Some(&out_dir))),
    }
}

pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment))
}

/// Runs the experiment without touching the file system.
pub fn run_config(cfg: &ExperimentConfig) -> RunResult<(ExperimentReport, Vec<(String, Plot)>)> {
    let started = SystemTime::now();
    let grid = cfg.grid.build()?;
    if let Some(p) = &cfg.problem {
        let v = check_lwp(cfg.grid.n, p.r, p.s, p.p)?;
        if !v.lwp_passes() && !cfg.solver.override_admissibility {
            return Err(RunError::Admissibility(v.summary()));
        }
    }
    let mut report = match cfg.experiment.as_str() {
        "partition" => partition(&grid),
        "mode-ode" => mode_ode(cfg),
        "verify-lp-lq" => lp_lq(cfg, &grid)?,
        "block-estimate" => block_estimate(cfg, &grid)?,
        "paraproduct-residual" => paraproduct(cfg, &grid)?,
        "leibniz" => leibniz(cfg, &grid)?,
        "contraction" => contraction(cfg, &grid)?,
        "decay" => decay(cfg, &grid)?,
        "blowup-probe" => probe(cfg, &grid)?,
        "sweep-critical" => sweep(cfg, &grid)?,
        "admissibility" => admissibility(cfg)?,
        other => return Err(RunError::Config(format!("unknown experiment '{other}'"))),
    };
    report.experiment = cfg.experiment.clone();
    // where the outputs go does not change what was computed
    let mut hashed = cfg.clone();
    hashed.output.dir = None;
    report.config_hash = config_hash(&hashed.canonical());
    report.seed = Some(cfg.seed);
    let plots = if cfg.output.plots { plots_for(&report) } else { Vec::new() };
    report.stamp(started);
    Ok((report, plots))
}

fn write_outputs(
    cfg: &ExperimentConfig,
    report: &ExperimentReport,
    plots: &[(String, Plot)],
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    let mut files = report.write_to(dir)?;
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(cfg).expect("config serializes"))?;
    files.push(cfg_path);
    for (name, plot) in plots {
        if let Some(svg) = plot.render() {
            let path = dir.join(format!("{}.svg", sanitize(name)));
            std::fs::write(&path, svg)?;
            files.push(path);
        }
    }
    Ok(files)
}

fn plots_for(report: &ExperimentReport) -> Vec<(String, Plot)> {
    let mut out = Vec::new();
    for t in &report.tables {
        if t.columns.first().map(String::as_str) != Some("t") {
            continue;
        }
        let xs = t.column("t").unwrap();
        let series = t.columns[1..]
            .iter()
            .filter(|c| c.as_str() != "ratio")
            .map(|c| Series {
                label: c.clone(),
                xs: xs.clone(),
                ys: t.column(c).unwrap(),
            })
            .collect();
        let fit = match (report.get("low_exponent"), report.get("low_fit_intercept")) {
            (Some(slope), Some(intercept)) if t.name == "lp_lq" => Some(FitLine { slope, intercept }),
            _ => None,
        };
        out.push((
            t.name.clone(),
            Plot {
                title: format!("{}: {}", report.experiment, t.name),
                x_label: "t".into(),
                series,
                fit,
            },
        ));
    }
    out
}

fn data(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<GridField> {
    let d = cfg
        .data
        .as_ref()
        .ok_or_else(|| RunError::Config(format!("experiment '{}' needs a [data] section", cfg.experiment)))?;
    Ok(d.sample(grid)?)
}

fn velocity(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<GridField> {
    Ok(cfg.velocity.as_ref().unwrap_or(&DataProfile::Zero).sample(grid)?)
}

fn problem_spec(cfg: &ExperimentConfig) -> RunResult<&ProblemSpec> {
    cfg.problem
        .as_ref()
        .ok_or_else(|| RunError::Config(format!("experiment '{}' needs a [problem] section", cfg.experiment)))
}

fn params(cfg: &ExperimentConfig, p: u32) -> RunResult<ProblemParams> {
    let spec = problem_spec(cfg)?;
    Ok(match spec.eps {
        Some(e) => ProblemParams::with_eps(cfg.grid.n, spec.r, spec.s, p, e)?,
        None => ProblemParams::new(cfg.grid.n, spec.r, spec.s, p)?,
    })
}

fn log_times(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn times(cfg: &ExperimentConfig, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    cfg.study.times.clone().unwrap_or_else(default)
}

fn lp_spec(cfg: &ExperimentConfig) -> LpLqSpec {
    let [p, q] = cfg.study.exponents.unwrap_or([2.0, 1.0]);
    let spec = match cfg.study.smoothness {
        Some([s1, s2]) => LpLqSpec::besov(p, q, s1, s2),
        None => LpLqSpec::lebesgue(p, q),
    };
    match cfg.study.fit_window {
        Some([lo, hi]) => spec.window(lo, hi),
        None => spec,
    }
}

fn partition(grid: &TorusGrid) -> ExperimentReport {
    let blocks = grid.dyadic_blocks();
    let r = blocks.partition_residual(grid);
    let mut rep = ExperimentReport::new("partition");
    rep.scalar("max_residual", r)
        .scalar("j_min", blocks.j_min() as f64)
        .scalar("j_max", blocks.j_max() as f64)
        .verdict(Verdict::below("partition-residual", r, tolerances::PARTITION_RESIDUAL));
    rep
}

fn mode_ode(cfg: &ExperimentConfig) -> ExperimentReport {
    let samples = cfg.study.samples.unwrap_or(100).max(5);
    let h = tolerances::MODE_ODE_STEP;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fixed = [0.0, 0.5 - 1e-3, 0.5 + 1e-3, 0.5, 4.0];
    let mut table = Table::new("mode_ode", &["t", "xi", "residual"]);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let xi = if i < fixed.len() { fixed[i] } else { rng.gen_range(0.0..5.0) };
        let t = rng.gen_range(10.0 * h..30.0);
        let r = mode_ode_residual(t, xi, h).abs();
        worst = worst.max(r);
        table.push(vec![t, xi, r]);
    }
    let mut rep = ExperimentReport::new("mode-ode");
    rep.scalar("max_residual", worst)
        .scalar("step", h)
        .verdict(Verdict::below("mode-ode-residual", worst, tolerances::MODE_ODE_RESIDUAL))
        .table(table);
    rep
}

fn lp_lq(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let g = data(cfg, grid)?;
    let spec = lp_spec(cfg);
    let ts = times(cfg, || log_times(1.0, 500.0, 50));
    let mut rep = verify_lp_lq(&g, &spec, &ts)?;
    let (lo, hi) = (rep.get("fit_window_start").unwrap(), rep.get("fit_window_end").unwrap());
    let lows = rep.find_table("lp_lq").unwrap().column("lhs_low").unwrap();
    if let Ok(f) = fit_decay(&ts, &lows, lo, hi) {
        rep.scalar("low_fit_intercept", f.intercept);
    }
    let (low, high) = (rep.get("low_data_norm").unwrap(), rep.get("high_data_norm").unwrap());
    if low > 1e-3 * high {
        let (m, e) = (rep.get("low_exponent").unwrap(), rep.get("expected_low_exponent").unwrap());
        rep.verdict(Verdict::relative("low-frequency-exponent", m, e, tolerances::LOW_FREQUENCY_RATE_REL));
    }
    if high > 1e-3 * low {
        let delta = rep.get("delta").unwrap();
        rep.verdict(Verdict::flag(
            "high-frequency-growth",
            delta.is_finite() && delta >= 0.0,
            format!("log-growth exponent {delta} after removing e^(-t/2)"),
        ));
    }
    Ok(rep)
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    let min = v.iter().copied().fold(f64::MAX, f64::min);
    if v.is_empty() || min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn block_estimate(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let g = data(cfg, grid)?;
    let spec = lp_spec(cfg);
    let ks = cfg.study.blocks.clone().unwrap_or_else(|| vec![-4, -3, -2, -1, 1, 2, 3, 4]);
    let ts = times(cfg, || log_times(0.5, 30.0, 30));
    let results = ks
        .par_iter()
        .map(|&k| verify_block_estimate(&g, k, &spec, &ts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = ExperimentReport::new("block-estimate");
    let mut table = Table::new("blocks", &["k", "max_ratio", "delta"]);
    for r in &results {
        table.push(vec![r.k as f64, r.max_ratio, r.delta.unwrap_or(f64::NAN)]);
    }
    let low: Vec<f64> = results.iter().filter(|r| r.k <= 0).map(|r| r.max_ratio).collect();
    let high: Vec<f64> = results.iter().filter(|r| r.k > 0).map(|r| r.max_ratio).collect();
    for (name, v) in [("low", &low), ("high", &high)] {
        if v.is_empty() {
            continue;
        }
        let s = spread(v);
        rep.scalar(format!("{name}_spread"), s)
            .verdict(Verdict::below(format!("{name}-block-spread"), s, tolerances::BLOCK_CONSTANT_SPREAD));
    }
    rep.table(table);
    Ok(rep)
}

fn paraproduct(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let pairs = cfg.study.samples.unwrap_or(100);
    let k_lo = cfg.study.band_start.unwrap_or(2.0 * grid.freq_step());
    let k_hi = cfg.study.band_edge.unwrap_or(0.45 * grid.nyquist());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<(u64, u64)> = (0..pairs).map(|_| (rng.gen(), rng.gen())).collect();
    let band = |seed| DataProfile::RandomBand {
        amplitude: 1.0,
        k_lo,
        k_hi,
        slope: 1.0,
        seed,
    };
    let checks = seeds
        .par_iter()
        .map(|&(a, b)| {
            let f = band(a).sample(grid)?;
            let g = band(b).sample(grid)?;
            decomposition_check(&f, &g)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("residuals", &["pair", "residual", "flagged"]);
    let mut worst = 0.0f64;
    for (i, c) in checks.iter().enumerate() {
        worst = worst.max(c.residual);
        table.push(vec![i as f64, c.residual, if c.flagged { 1.0 } else { 0.0 }]);
    }
    let mut rep = ExperimentReport::new("paraproduct-residual");
    rep.scalar("max_residual", worst)
        .scalar("pairs", pairs as f64)
        .verdict(Verdict::below("paraproduct-residual", worst, tolerances::PARAPRODUCT_RESIDUAL))
        .table(table);
    Ok(rep)
}

fn leibniz(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let st = &cfg.study;
    let [p1, q1, p2, q2] = st.leibniz_exponents.unwrap_or([4.0, 4.0, 4.0, 4.0]);
    let mut lc = LeibnizConfig::new(st.alpha.unwrap_or(0.7), st.leibniz_r.unwrap_or(2.0), (p1, q1), (p2, q2));
    lc.samples = st.samples.unwrap_or(lc.samples);
    lc.k_lo = st.band_start.unwrap_or(lc.k_lo);
    lc.band_edge = Some(st.band_edge.unwrap_or(0.45 * grid.nyquist()));
    let fine = grid.padded(2);
    let coarse_run = leibniz_ensemble(grid, &lc, cfg.seed)?;
    let fine_run = leibniz_ensemble(&fine, &lc, cfg.seed)?;
    let mut table = Table::new("ensembles", &["points", "max_ratio", "mean_ratio"]);
    table.push(vec![grid.points() as f64, coarse_run.max, coarse_run.mean]);
    table.push(vec![fine.points() as f64, fine_run.max, fine_run.mean]);
    let mut rep = ExperimentReport::new("leibniz");
    rep.scalar("alpha", lc.alpha)
        .scalar("max_ratio", coarse_run.max)
        .scalar("max_ratio_refined", fine_run.max)
        .scalar("refinement_change", (fine_run.max - coarse_run.max).abs() / coarse_run.max)
        .verdict(Verdict::flag(
            "finite-ratio",
            coarse_run.max.is_finite() && fine_run.max.is_finite(),
            "ensemble maxima are finite",
        ))
        .verdict(Verdict::relative(
            "refinement-stable",
            fine_run.max,
            coarse_run.max,
            tolerances::LEIBNIZ_REFINEMENT_REL,
        ))
        .table(table);
    Ok(rep)
}

fn solver_with_horizon(base: &SolverConfig, horizon: f64) -> SolverConfig {
    SolverConfig {
        horizon,
        ..base.clone()
    }
}

fn contraction(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let pp = params(cfg, problem_spec(cfg)?.p as u32)?;
    let profile = cfg
        .data
        .clone()
        .ok_or_else(|| RunError::Config("contraction needs a [data] section".into()))?;
    let amps = cfg.study.amplitudes.clone().unwrap_or_else(|| vec![1e-3, 2e-3, 4e-3]);
    let horizons = cfg.study.horizons.clone().unwrap_or_else(|| vec![cfg.solver.horizon]);
    let u1 = velocity(cfg, grid)?;
    let jobs: Vec<(f64, f64)> = horizons
        .iter()
        .flat_map(|&t| amps.iter().map(move |&a| (a, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(a, t)| {
            let u0 = profile.scaled(a).sample(grid)?;
            let out = picard_solve(&u0, &u1.scaled(a), &pp, &solver_with_horizon(&cfg.solver, t))?;
            Ok(ContractionRun {
                amplitude: a,
                horizon: t,
                diagnostics: out.diagnostics,
            })
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    Ok(contraction_report(&runs, &pp))
}

fn rel_l2(a: &GridField, b: &GridField) -> f64 {
    let n = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    let nb = n(b.values());
    if nb == 0.0 {
        n(&d)
    } else {
        n(&d) / nb
    }
}

/// Largest relative L² gap at the nodes both trajectories share.
pub fn oracle_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.times()
        .iter()
        .zip(a.fields())
        .filter_map(|(t, f)| {
            b.times()
                .iter()
                .position(|s| s == t)
                .map(|j| rel_l2(&b.fields()[j], f))
        })
        .fold(0.0, f64::max)
}

fn decay(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let pp = params(cfg, problem_spec(cfg)?.p as u32)?;
    let u0 = data(cfg, grid)?;
    let u1 = velocity(cfg, grid)?;
    let assert_decay = cfg.study.assert_global_decay.unwrap_or(true);
    let out = picard_solve(&u0, &u1, &pp, &cfg.solver)?;
    let diag = &out.diagnostics;
    let mut rep = ExperimentReport::new("decay");
    rep.scalar("p", pp.p as f64)
        .scalar("fujita", pp.fujita)
        .scalar("iterations", diag.iterations as f64)
        .scalar("final_residual", diag.final_residual)
        .scalar("quadrature_error", diag.quadrature_error)
        .scalar("max_ratio", diag.ratios.iter().copied().fold(0.0, f64::max));
    if let Some(e) = &diag.blowup {
        if assert_decay {
            return Err(RunError::Blowup(format!("Picard iterate escaped at t = {}", e.time)));
        }
        rep.scalar("escape_time", e.time).note("outcome", "escape");
        return Ok(rep);
    }
    let etd = etd_oracle(&u0, &u1, &pp, &cfg.solver)?;
    if let Some(e) = etd.escape() {
        if assert_decay {
            return Err(RunError::Blowup(format!("exponential integrator escaped at t = {}", e.time)));
        }
    }
    let gap = oracle_gap(&out.trajectory, &etd);
    let allowed = tolerances::ORACLE_GAP_REL.max(10.0 * diag.quadrature_error);
    rep.scalar("oracle_gap", gap)
        .verdict(Verdict::flag("picard-converged", diag.converged, format!("{} iterations", diag.iterations)))
        .verdict(Verdict::below("oracle-agreement", gap, allowed));
    let mut ratios = Table::new("picard", &["iteration", "x_norm", "difference", "ratio"]);
    for (k, d) in diag.differences.iter().enumerate() {
        let r = if k == 0 { f64::NAN } else { diag.ratios[k - 1] };
        ratios.push(vec![(k + 1) as f64, diag.x_norms[k], *d, r]);
    }
    rep.table(ratios);
    match decay_study(&out.trajectory, &pp) {
        Ok(study) => {
            rep.verdict(Verdict::flag("box-confinement", true, "energy stays away from the boundary"));
            for (k, v) in study.scalars {
                rep.scalar(k, v);
            }
            rep.tables.extend(study.tables);
            rep.verdicts.extend(study.verdicts);
        }
        Err(LabError::Rejected(m)) => {
            rep.verdict(Verdict::flag("box-confinement", false, m));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(rep)
}

fn probe(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let pp = params(cfg, problem_spec(cfg)?.p as u32)?;
    let profile = cfg
        .data
        .clone()
        .ok_or_else(|| RunError::Config("blowup-probe needs a [data] section".into()))?;
    let u1 = velocity(cfg, grid)?;
    let assert_decay = cfg.study.assert_global_decay.unwrap_or(false);
    let amps = cfg.study.amplitudes.clone().unwrap_or_else(|| vec![1.0]);
    let reports = amps
        .par_iter()
        .map(|&a| blowup_probe(&profile.scaled(a).sample(grid)?, &u1.scaled(a), &pp, &cfg.solver))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = ExperimentReport::new("blowup-probe");
    let mut table = Table::new("escape_vs_amplitude", &["amplitude", "escape_time", "escape_time_refined"]);
    for (a, r) in amps.iter().zip(reports) {
        if assert_decay && r.notes.get("outcome").map(String::as_str) != Some("no-escape") {
            return Err(RunError::Blowup(format!("escape at amplitude {a}")));
        }
        table.push(vec![*a, r.get("escape_time").unwrap(), r.get("escape_time_refined").unwrap()]);
        if amps.len() == 1 {
            rep = r;
        } else {
            rep.absorb(&format!("amplitude-{a:e}"), r);
        }
    }
    rep.table(table);
    Ok(rep)
}

fn sweep(cfg: &ExperimentConfig, grid: &TorusGrid) -> RunResult<ExperimentReport> {
    let spec = problem_spec(cfg)?;
    let powers = cfg.study.powers.clone().unwrap_or_else(|| vec![7, 8, 9, 10]);
    let u0 = data(cfg, grid)?;
    let u1 = velocity(cfg, grid)?;
    let rows = powers
        .par_iter()
        .map(|&p| -> RunResult<Vec<f64>> {
            let verdict = check_gwp(cfg.grid.n, spec.r, spec.s, p as f64)?;
            let pp = params(cfg, p)?;
            let traj = etd_oracle(&u0, &u1, &pp, &cfg.solver)?;
            let escape = traj.escape().map(|e| e.time);
            let (trend, bounded) = match escape {
                Some(_) => (f64::NAN, 0.0),
                None => match decay_study(&traj, &pp) {
                    Ok(r) => {
                        let t = r.get("weighted_trend").unwrap_or(f64::NAN);
                        (t, if t < tolerances::DECAY_TREND_SLOPE { 1.0 } else { 0.0 })
                    }
                    Err(LabError::Rejected(_)) => (f64::NAN, 0.0),
                    Err(e) => return Err(e.into()),
                },
            };
            Ok(vec![
                p as f64,
                verdict.fujita,
                if verdict.gwp_threshold.status.passed() { 1.0 } else { 0.0 },
                if verdict.lwp_passes() { 1.0 } else { 0.0 },
                if escape.is_some() { 1.0 } else { 0.0 },
                escape.unwrap_or(f64::NAN),
                trend,
                bounded,
            ])
        })
        .collect::<RunResult<Vec<_>>>()?;
    let mut table = Table::new(
        "sweep",
        &["p", "fujita", "above_threshold", "lwp", "escaped", "escape_time", "weighted_trend", "bounded"],
    );
    let mut claim = true;
    for r in rows {
        if r[2] == 1.0 && r[3] == 1.0 && r[7] != 1.0 {
            claim = false;
        }
        table.push(r);
    }
    let mut rep = ExperimentReport::new("sweep-critical");
    rep.scalar("fujita", 1.0 + 2.0 * spec.r / cfg.grid.n as f64)
        .verdict(Verdict::flag(
            "decay-above-threshold",
            claim,
            "every admissible power at or above 1 + 2r/n decays without escape",
        ))
        .table(table);
    Ok(rep)
}

fn admissibility(cfg: &ExperimentConfig) -> RunResult<ExperimentReport> {
    let spec = problem_spec(cfg)?;
    let n = cfg.grid.n;
    let v = check_gwp(n, spec.r, spec.s, spec.p)?;
    let suggestion = suggest_s(n, spec.r, spec.p)?;
    let mut rep = ExperimentReport::new("admissibility");
    rep.scalar("beta", v.beta)
        .scalar("fujita", v.fujita)
        .scalar("suggested_s", suggestion.s.unwrap_or(f64::NAN));
    for (name, c) in [
        ("condition_i", &v.condition_i),
        ("condition_ii", &v.condition_ii),
        ("condition_iii", &v.condition_iii),
        ("integer_p", &v.integer_p),
        ("gwp_threshold", &v.gwp_threshold),
    ] {
        rep.scalar(format!("{name}_margin"), c.margin)
            .note(name, c.inequality.clone())
            .verdict(Verdict::flag(name, c.status.passed(), c.inequality.clone()));
    }
    if let Some(b) = v.iii_branch {
        rep.note("condition_iii_branch", b);
    }
    if v.ii_bounds_disagree {
        rep.note("condition_ii_flag", "only one of the two upper bounds of (ii) holds");
    }
    if let Some(b) = suggestion.binding {
        rep.note("binding_constraint", b);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        load_config(text, &RunOptions::default()).unwrap()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(String::new()).exit_code(), 2);
        assert_eq!(RunError::Admissibility(String::new()).exit_code(), 3);
        assert_eq!(RunError::Blowup(String::new()).exit_code(), 4);
        assert_eq!(RunError::from(LabError::NotAdmissible("x".into())).exit_code(), 3);
        assert_eq!(RunError::from(LabError::InvalidParameter("x".into())).exit_code(), 2);
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let e = load_config(
            "experiment = \"nope\"\n[grid]\nn = 1\npoints = 16\nlength = 10.0\n",
            &RunOptions::default(),
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn partition_and_admissibility_run() {
        let c = cfg("experiment = \"partition\"\n[grid]\nn = 1\npoints = 256\nlength = 50.0\n");
        let (r, _) = run_config(&c).unwrap();
        assert!(r.all_passed());
        let c = cfg(
            "experiment = \"admissibility\"\n[grid]\nn = 1\npoints = 16\nlength = 10.0\n[problem]\nr = 4.0\ns = 5.0\np = 9\n",
        );
        let (r, _) = run_config(&c).unwrap();
        assert!(r.all_passed());
        assert_eq!(r.get("gwp_threshold_margin"), Some(0.0));
    }

    #[test]
    fn inadmissible_problem_exits_three() {
        let text = "experiment = \"admissibility\"\n[grid]\nn = 1\npoints = 16\nlength = 10.0\n[problem]\nr = 4.0\ns = 0.2\np = 9\n";
        assert_eq!(run_config(&cfg(text)).unwrap_err().exit_code(), 3);
        let c = load_config(
            text,
            &RunOptions {
                override_admissibility: true,
                ..Default::default()
            },
        )
        .unwrap();
        let (r, _) = run_config(&c).unwrap();
        assert!(!r.all_passed());
    }
}
