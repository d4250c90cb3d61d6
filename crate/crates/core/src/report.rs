//! Experiment reports: scalars, tables and pass/fail verdicts, serialized to
//! JSON (lossless, non-finite values as strings) and CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A float that serializes non-finite values as `"NaN"`, `"inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"NaN\", \"inf\", \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "NaN" => Ok(Num(f64::NAN)),
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

mod num_serde {
    use super::Num;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::collections::BTreeMap;

    pub fn ser<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&Num(*v), s)
    }

    pub fn de<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Num::deserialize(d)?.0)
    }

    pub fn ser_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, Num(*v))))
    }

    pub fn de_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let m = BTreeMap::<String, Num>::deserialize(d)?;
        Ok(m.into_iter().map(|(k, v)| (k, v.0)).collect())
    }

    pub fn ser_rows<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(rows.iter().map(|r| r.iter().map(|v| Num(*v)).collect::<Vec<_>>()))
    }

    pub fn de_rows<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows = Vec::<Vec<Num>>::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.0).collect())
            .collect())
    }
}

/// Named table of numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(serialize_with = "num_serde::ser_rows", deserialize_with = "num_serde::de_rows")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// RFC 4180 CSV with a header row.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| format_float(*v)))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

/// Outcome of one checked property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    #[serde(serialize_with = "num_serde::ser", deserialize_with = "num_serde::de")]
    pub measured: f64,
    #[serde(serialize_with = "num_serde::ser", deserialize_with = "num_serde::de")]
    pub target: f64,
    #[serde(serialize_with = "num_serde::ser", deserialize_with = "num_serde::de")]
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    /// `|measured − target| ≤ tol·|target|`.
    pub fn relative(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        let passed = (measured - target).abs() <= tol * target.abs();
        Self {
            name: name.into(),
            passed,
            measured,
            target,
            tolerance: tol,
            detail: format!("|{measured} − {target}| ≤ {tol}·|{target}|"),
        }
    }

    /// `|measured − target| ≤ tol`.
    pub fn absolute(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        let passed = (measured - target).abs() <= tol;
        Self {
            name: name.into(),
            passed,
            measured,
            target,
            tolerance: tol,
            detail: format!("|{measured} − {target}| ≤ {tol}"),
        }
    }

    /// `measured < bound`.
    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured < bound,
            measured,
            target: bound,
            tolerance: 0.0,
            detail: format!("{measured} < {bound}"),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: if passed { 1.0 } else { 0.0 },
            target: 1.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    /// Seconds since the Unix epoch at the start of the run.
    pub started: f64,
    pub runtime_seconds: f64,
}

/// Result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    #[serde(serialize_with = "num_serde::ser_map", deserialize_with = "num_serde::de_map")]
    pub scalars: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub timestamp: Option<Timestamp>,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn scalar(&mut self, name: impl Into<String>, v: f64) -> &mut Self {
        self.scalars.insert(name.into(), v);
        self
    }

    pub fn note(&mut self, name: impl Into<String>, v: impl Into<String>) -> &mut Self {
        self.notes.insert(name.into(), v.into());
        self
    }

    pub fn table(&mut self, t: Table) -> &mut Self {
        self.tables.push(t);
        self
    }

    pub fn verdict(&mut self, v: Verdict) -> &mut Self {
        self.verdicts.push(v);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find_verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Merges another report's contents under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        for (k, v) in other.scalars {
            self.scalars.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.notes {
            self.notes.insert(format!("{prefix}.{k}"), v);
        }
        for mut t in other.tables {
            t.name = format!("{prefix}.{}", t.name);
            self.tables.push(t);
        }
        for mut v in other.verdicts {
            v.name = format!("{prefix}.{}", v.name);
            self.verdicts.push(v);
        }
    }

    pub fn stamp(&mut self, started: SystemTime) {
        let start = started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let runtime = started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0);
        self.timestamp = Some(Timestamp {
            started: start,
            runtime_seconds: runtime,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Writes `report.json` and one CSV per table into `dir`; returns the
    /// written paths.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join("report.json");
        std::fs::write(&json, self.to_json())?;
        written.push(json);
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", sanitize(&t.name)));
            let file = std::fs::File::create(&path)?;
            t.write_csv(file).map_err(io::Error::other)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// File-name-safe version of a table name.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Hex SHA-256 of a config text.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
