//! One test per acceptance criterion; each prints a single PASS/FAIL line.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use std::path::PathBuf;

use besov_wave_lab::admissibility::{check_gwp, check_lwp, check_lwp_exact};
use besov_wave_lab::grid::make_grid;
use besov_wave_lab::lab::{load_config, run_config, RunOptions};
use besov_wave_lab::report::ExperimentReport;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(name: &str) -> ExperimentReport {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.cfg"));
    let text = std::fs::read_to_string(&path).unwrap();
    let cfg = load_config(&text, &RunOptions::default()).unwrap();
    run_config(&cfg).unwrap_or_else(|e| panic!("{name}: {e}")).0
}

fn verdict(rep: &ExperimentReport, name: &str) -> (bool, String) {
    match rep.find_verdict(name) {
        Some(v) => (v.passed, v.detail.clone()),
        None => (false, format!("verdict {name} missing")),
    }
}

fn criterion(id: u32, title: &str, checks: &[(bool, String)]) {
    let passed = checks.iter().all(|c| c.0);
    let detail: Vec<String> = checks
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "[fail] " }))
        .collect();
    println!(
        "criterion {id:>2} {}: {title} :: {}",
        if passed { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    assert!(passed, "criterion {id} failed: {}", detail.join("; "));
}

#[test]
fn c01_partition_of_unity() {
    let mut checks = Vec::new();
    for (n, points, length) in [(1, 256, 50.0), (1, 4096, 400.0), (2, 256, 100.0)] {
        let g = make_grid(n, points, length).unwrap();
        let r = g.dyadic_blocks().partition_residual(&g);
        checks.push((r < 1e-12, format!("n={n} N={points}: {r:e}")));
    }
    for cfg in ["partition", "partition-2d"] {
        checks.push(verdict(&run(cfg), "partition-residual"));
    }
    criterion(1, "partition of unity", &checks);
}

#[test]
fn c02_mode_equation() {
    let rep = run("mode-ode");
    let xis = rep.find_table("mode_ode").unwrap().column("xi").unwrap();
    let has = |x: f64| xis.iter().any(|v| (v - x).abs() < 1e-15);
    let covered = [0.0, 0.5 - 1e-3, 0.5, 0.5 + 1e-3, 4.0].iter().all(|&x| has(x));
    criterion(
        2,
        "mode equation residual",
        &[
            verdict(&rep, "mode-ode-residual"),
            (xis.len() == 100, format!("{} samples", xis.len())),
            (covered, "special frequencies sampled".into()),
        ],
    );
}

#[test]
fn c03_low_frequency_rate() {
    let mut checks = Vec::new();
    for cfg in ["decay-linear", "decay-linear-l4", "decay-besov"] {
        let rep = run(cfg);
        let (ok, d) = verdict(&rep, "low-frequency-exponent");
        checks.push((ok, format!("{cfg}: {d}")));
    }
    criterion(3, "low-frequency Lp-Lq rate", &checks);
}

#[test]
fn c04_high_frequency_bound() {
    let rep = run("high-frequency");
    let delta = rep.get("delta").unwrap();
    criterion(
        4,
        "high-frequency growth at most logarithmic",
        &[
            verdict(&rep, "high-frequency-growth"),
            (delta.is_finite() && delta >= 0.0, format!("delta = {delta}")),
            (rep.find_verdict("low-frequency-exponent").is_none(), "purely high-frequency data".into()),
        ],
    );
}

#[test]
fn c05_block_estimates() {
    let rep = run("block-estimate");
    criterion(
        5,
        "k-independent block constants",
        &[verdict(&rep, "low-block-spread"), verdict(&rep, "high-block-spread")],
    );
}

#[test]
fn c06_paraproduct_identity() {
    let a = run("paraproduct");
    let b = run("paraproduct-2d");
    let pairs = |r: &ExperimentReport| r.get("pairs").unwrap() as usize;
    criterion(
        6,
        "paraproduct decomposition",
        &[
            verdict(&a, "paraproduct-residual"),
            verdict(&b, "paraproduct-residual"),
            (pairs(&a) == 100 && pairs(&b) == 100, "100 pairs each".into()),
        ],
    );
}

#[test]
fn c07_fractional_leibniz() {
    let mut checks = Vec::new();
    for cfg in ["leibniz", "leibniz-mixed"] {
        let rep = run(cfg);
        checks.push(verdict(&rep, "finite-ratio"));
        let (ok, d) = verdict(&rep, "refinement-stable");
        checks.push((ok, format!("{cfg}: {d}")));
    }
    criterion(7, "fractional Leibniz under refinement", &checks);
}

#[test]
fn c08_contraction_scaling() {
    let mut checks = Vec::new();
    for cfg in ["contraction-p2", "contraction"] {
        let rep = run(cfg);
        let (ok, d) = verdict(&rep, "amplitude-slope");
        checks.push((ok, format!("p={}: {d}", rep.get("p").unwrap())));
    }
    criterion(8, "contraction ratio scales like amplitude^(p-1)", &checks);
}

#[test]
fn c09_global_decay_at_critical_power() {
    let rep = run("decay-critical");
    let info = verdict(&rep, "linear-regular-exponent");
    println!("criterion  9 info: linear Besov exponent {}", info.1);
    criterion(
        9,
        "global decay at the critical power",
        &[
            verdict(&rep, "picard-converged"),
            verdict(&rep, "oracle-agreement"),
            verdict(&rep, "weighted-sup-bounded"),
            verdict(&rep, "box-confinement"),
            (rep.get("escape_time").is_none(), "no escape".into()),
        ],
    );
}

#[test]
fn c10_subcritical_escape() {
    let sub = run("blowup");
    let crit = run("blowup-critical");
    let outcome = |r: &ExperimentReport| r.notes.get("outcome").cloned().unwrap_or_default();
    criterion(
        10,
        "subcritical escape, small critical data persists",
        &[
            (outcome(&sub) == "escape", format!("p=2 outcome {}", outcome(&sub))),
            verdict(&sub, "escape-time-stable"),
            (outcome(&crit) == "no-escape", format!("p=9 amplitude 1e-4 outcome {}", outcome(&crit))),
        ],
    );
}

#[test]
fn c11_admissibility() {
    let mut checks = Vec::new();
    let pass = check_gwp(1, 4.0, 5.0, 9.0).unwrap();
    checks.push((
        pass.lwp_passes() && pass.gwp_passes() && (pass.condition_ii.margin - 7.8).abs() < 1e-12 && pass.gwp_threshold.margin == 0.0,
        "(1,4,5,9) passes, threshold margin 0".to_string(),
    ));
    let fail = check_lwp(1, 4.0, 0.2, 9.0).unwrap();
    checks.push((
        !fail.condition_i.status.passed() && fail.failures().contains(&"(i)"),
        "(1,4,0.2,9) fails (i)".into(),
    ));
    checks.push((check_lwp(1, 4.0, 5.0, 2.5).is_err(), "(1,4,5,2.5) rejected".into()));

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut disagreements = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6usize);
        let r = BigRational::new(rng.gen_range(9..400).into(), rng.gen_range(1..=4).into());
        let s = BigRational::new(rng.gen_range(0..200).into(), rng.gen_range(1..=8).into());
        let p = rng.gen_range(2..=24i64);
        let rf = num_traits::ToPrimitive::to_f64(&r).unwrap();
        let sf = num_traits::ToPrimitive::to_f64(&s).unwrap();
        let v = check_gwp(n, rf, sf, p as f64).unwrap();
        let e = check_lwp_exact(n as i64, &r, &s, p).unwrap();
        if (v.condition_i.status.passed(), v.condition_ii.status.passed(), v.condition_iii.status.passed())
            != (e.condition_i, e.condition_ii, e.condition_iii)
            || v.gwp_threshold.status.passed() != e.gwp_threshold
        {
            disagreements += 1;
        }
    }
    checks.push((disagreements == 0, format!("{disagreements} of 1000 exact/float disagreements")));
    checks.push(verdict(&run("admissibility"), "gwp_threshold"));
    criterion(11, "admissibility checker", &checks);
}
