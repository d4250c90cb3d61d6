use std::collections::BTreeMap;
use std::path::PathBuf;

use besov_wave_lab::lab::{load_config, run_config, RunOptions};
use besov_wave_lab::tolerances;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn documented() -> BTreeMap<String, f64> {
    let text = std::fs::read_to_string(repo().join("docs/acceptance.md")).unwrap();
    let section = text.split("## Tolerances").nth(1).expect("tolerance section");
    section
        .lines()
        .filter_map(|l| {
            let cells: Vec<&str> = l.split('|').map(str::trim).collect();
            if cells.len() < 3 || !cells[1].chars().all(|c| c.is_ascii_uppercase() || c == '_') || cells[1].is_empty() {
                return None;
            }
            Some((cells[1].to_string(), cells[2].parse::<f64>().ok()?))
        })
        .collect()
}

#[test]
fn tolerance_table_matches_constants() {
    let doc = documented();
    let code: BTreeMap<String, f64> = tolerances::ALL.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    assert_eq!(doc, code);
}

#[test]
fn report_tolerances_come_from_the_table() {
    let allowed: Vec<f64> = tolerances::ALL.iter().map(|(_, v)| *v).collect();
    for name in ["partition", "mode-ode", "paraproduct", "block-estimate", "high-frequency"] {
        let path = repo().join("configs").join(format!("{name}.cfg"));
        let cfg = load_config(&std::fs::read_to_string(&path).unwrap(), &RunOptions::default()).unwrap();
        let (rep, _) = run_config(&cfg).unwrap();
        for v in &rep.verdicts {
            // flags carry no tolerance; bounds carry theirs as the target
            let declared = if v.tolerance != 0.0 { v.tolerance } else { v.target };
            assert!(
                declared == 1.0 || allowed.contains(&declared),
                "{name}/{}: {declared} is not in the documented table",
                v.name
            );
        }
    }
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(repo().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        load_config(&text, &RunOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
