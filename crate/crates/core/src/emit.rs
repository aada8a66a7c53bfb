//! Byte-stable report output.
//!
//! JSON is written through [`serde_json::Value`], whose maps keep keys
//! sorted, with every float printed with 17 significant digits so that
//! identical reports give identical files. CSV files use `,` and `.`, with a
//! header row.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::functionals::DeficitReport;
use crate::sharpness::{ProbeResult, SweepRow, TracePoint};

/// Which files to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "both" => Ok(Format::Both),
            _ => Err(Error::param("format", format!("expected json, csv or both, got `{s}`"))),
        }
    }
}

/// Canonical JSON text of `value`: sorted keys, two-space indentation,
/// floats as `{:.16e}`, trailing newline. Non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::param("report", e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows such as grid pairs stay on one line
            if items.len() <= 4 && items.iter().all(|i| matches!(i, Value::Number(_) | Value::Null)) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, depth);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// A float with 17 significant digits, or `null` when not finite.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::param("csv", e.to_string());
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::param("csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::param("csv", e.to_string()))
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Two-column `parameter,value` table of a distance grid.
pub fn distance_grid_csv(grid: &[(f64, f64)]) -> Result<String> {
    csv_string(
        &["parameter", "value"],
        grid.iter().map(|(x, v)| vec![format_float(*x), format_float(*v)]),
    )
}

/// `evaluation,value` table of an optimizer trace.
pub fn trace_csv(trace: &[TracePoint]) -> Result<String> {
    csv_string(
        &["evaluation", "value"],
        trace
            .iter()
            .map(|t| vec![t.evaluation.to_string(), format_float(t.value)]),
    )
}

/// One row per sweep point with the main report fields.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let header = [
        "index",
        "inequality",
        "geometry",
        "profile",
        "p",
        "q",
        "L",
        "k",
        "R",
        "lhs",
        "rhs_constant_part",
        "deficit",
        "sup_parameter",
        "sup_distance",
        "empirical_C",
        "ratio",
        "holds",
        "error",
    ];
    csv_string(
        &header,
        rows.iter().map(|row| {
            let e = &row.case.exponents;
            let r = row.report.as_ref();
            vec![
                row.index.to_string(),
                row.case.inequality.to_string(),
                row.case.geometry.to_string(),
                row.case.profile.to_string(),
                opt_float(e.p),
                opt_float(e.q),
                opt_float(e.l),
                e.k.map(|k| k.to_string()).unwrap_or_default(),
                opt_float(e.radius),
                opt_float(r.map(|r| r.lhs)),
                opt_float(r.map(|r| r.rhs_constant_part)),
                opt_float(r.map(|r| r.deficit)),
                opt_float(r.and_then(|r| r.sup_distance).map(|s| s.0)),
                opt_float(r.and_then(|r| r.sup_distance).map(|s| s.1)),
                opt_float(r.and_then(|r| r.empirical_c)),
                opt_float(r.and_then(|r| r.ratio)),
                r.map(|r| r.holds.to_string()).unwrap_or_default(),
                row.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

/// Writes `contents` to `path`, reporting failures with the path.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut name = stem.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    stem.with_file_name(name)
}

/// Writes `<stem>.json` and/or `<stem>_distance.csv`; returns the paths.
pub fn emit_report(report: &DeficitReport, format: Format, stem: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if format.json() {
        let path = with_suffix(stem, ".json");
        write_file(&path, &to_json_string(report)?)?;
        files.push(path);
    }
    if format.csv() && !report.distance_grid.is_empty() {
        let path = with_suffix(stem, "_distance.csv");
        write_file(&path, &distance_grid_csv(&report.distance_grid)?)?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `<stem>.json` and/or `<stem>_trace.csv`; returns the paths.
pub fn emit_probe(result: &ProbeResult, format: Format, stem: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if format.json() {
        let path = with_suffix(stem, ".json");
        write_file(&path, &to_json_string(result)?)?;
        files.push(path);
    }
    if format.csv() {
        let path = with_suffix(stem, "_trace.csv");
        write_file(&path, &trace_csv(&result.trace)?)?;
        files.push(path);
    }
    Ok(files)
}

/// Writes `<stem>.json` and/or `<stem>.csv` for a sweep; returns the paths.
pub fn emit_sweep(rows: &[SweepRow], format: Format, stem: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if format.json() {
        let path = with_suffix(stem, ".json");
        write_file(&path, &to_json_string(rows)?)?;
        files.push(path);
    }
    if format.csv() {
        let path = with_suffix(stem, ".csv");
        write_file(&path, &sweep_csv(rows)?)?;
        files.push(path);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{hardy_deficit, EvalOptions};
    use crate::group::Geometry;
    use crate::profiles::{make_profile, ProfileSpec, SeparableFunction};

    fn report() -> DeficitReport {
        let u = SeparableFunction::radial(make_profile(&ProfileSpec::Bump { m: 4, radius: 1.0 }).unwrap());
        hardy_deficit(&u, &Geometry::euclidean(4).unwrap(), 2.0, &EvalOptions::default()).unwrap()
    }

    #[test]
    fn keys_are_sorted_and_floats_fixed() {
        let v = serde_json::json!({"b": 0.1, "a": [1, 2.5], "c": {"z": null, "y": true}});
        let s = to_json_string(&v).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": true,\n    \"z\": null\n  }\n}\n"
        );
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, -1e-300, f64::MAX] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn same_report_gives_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = emit_report(&report(), Format::Both, &dir.path().join("a")).unwrap();
        let b = emit_report(&report(), Format::Both, &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&a[0]).unwrap()).unwrap();
        assert_eq!(parsed["inequality"], "lp-hardy");
    }

    #[test]
    fn distance_csv_has_a_header_row() {
        let r = report();
        assert_eq!(r.distance_grid.len(), 33);
        let csv = distance_grid_csv(&r.distance_grid).unwrap();
        assert_eq!(csv.lines().count(), 34);
        assert_eq!(csv.lines().next(), Some("parameter,value"));
        let (x, v) = csv.lines().nth(1).unwrap().split_once(',').unwrap();
        assert_eq!(x.parse::<f64>().unwrap(), r.distance_grid[0].0);
        assert_eq!(v.parse::<f64>().unwrap(), r.distance_grid[0].1);
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("missing").join("report");
        let err = emit_report(&report(), Format::Json, &stem).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn formats_parse() {
        assert_eq!("both".parse::<Format>().unwrap(), Format::Both);
        assert!("xml".parse::<Format>().is_err());
        assert!(Format::Both.json() && Format::Both.csv() && !Format::Json.csv());
    }
}
