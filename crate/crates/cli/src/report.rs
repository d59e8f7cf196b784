//! Aggregates finished runs into `report.md` and `report.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;
use crate::manifest::Manifest;
use crate::output::OutputDir;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub command: String,
    pub manifest: String,
    pub key: String,
    pub value: String,
}

/// A manifest together with the directory its artifact paths are relative to.
struct Loaded {
    path: PathBuf,
    dir: PathBuf,
    manifest: Manifest,
}

fn read_json(dir: &Path, name: &str) -> Option<Value> {
    let text = std::fs::read_to_string(dir.join(name)).ok()?;
    serde_json::from_str(&text).ok()
}

fn num(v: &Value, ptr: &str) -> String {
    match v.pointer(ptr) {
        Some(Value::Number(n)) => n.as_f64().map_or_else(|| n.to_string(), |x| format!("{x:.6e}")),
        Some(Value::Bool(b)) => b.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => "n/a".into(),
        Some(other) => other.to_string(),
    }
}

/// Figures extracted from one run, in display order.
fn figures(l: &Loaded) -> Vec<(String, String)> {
    let m = &l.manifest;
    let mut f = vec![("status".to_string(), m.status.clone())];
    let get = |name: &str| read_json(&l.dir, name);
    match m.command.as_str() {
        "evolve" => {
            if let Some(v) = get("evolve.json") {
                f.push(("max_mass_drift".into(), num(&v, "/max_mass_drift")));
                f.push(("max_energy_drift".into(), num(&v, "/max_energy_drift")));
                f.push(("blowup_suspect".into(), num(&v, "/blowup_suspect")));
            }
        }
        "picard" => {
            if let Some(v) = get("picard.json") {
                f.push(("gate_x_free".into(), num(&v, "/summary/gate/x_free")));
                f.push(("gate_y_forcing".into(), num(&v, "/summary/gate/y_forcing")));
                f.push(("converged".into(), num(&v, "/summary/converged")));
                f.push(("iterations".into(), num(&v, "/summary/iterations")));
                f.push(("residual".into(), num(&v, "/summary/residual")));
            }
        }
        "groundstate" => {
            if let Some(v) = get("groundstate.json") {
                f.push(("a".into(), num(&v, "/result/a")));
                f.push(("m".into(), num(&v, "/result/m_a")));
                f.push(("lambda".into(), num(&v, "/result/lambda")));
                f.push(("residual".into(), num(&v, "/result/residual")));
                f.push(("a0".into(), num(&v, "/constants/ground/a0")));
            }
        }
        "mcurve" => {
            if let Some(v) = get("mcurve.json") {
                if let Some(points) = v.pointer("/curve/points").and_then(Value::as_array) {
                    for p in points {
                        f.push((format!("m({})", num(p, "/a")), num(p, "/m")));
                    }
                }
            }
        }
        "stability" => {
            if let Some(v) = get("stability.json") {
                let n = v.pointer("/traces").and_then(Value::as_array).map_or(0, Vec::len);
                f.push(("within".into(), format!("{}/{n}", num(&v, "/within"))));
                f.push(("standing_wave_max_dist".into(), standing_max(&v)));
            }
        }
        "asstability" => {
            if let Some(v) = get("asstability.json") {
                f.push(("fraction_within".into(), num(&v, "/fraction_within")));
                f.push(("wilson_low".into(), num(&v, "/wilson/0")));
                f.push(("wilson_high".into(), num(&v, "/wilson/1")));
            }
        }
        "taildiag" => {
            if let Some(v) = get("taildiag.json") {
                f.push(("tail_slope".into(), num(&v, "/tail/fitted_slope")));
                f.push(("tail_r_squared".into(), num(&v, "/tail/r_squared")));
                f.push(("moment_ratio_max".into(), num(&v, "/moment_ratio_max")));
            }
        }
        _ => {}
    }
    for a in &m.artifacts {
        if !l.dir.join(&a.path).exists() && a.path != crate::manifest::MANIFEST_NAME {
            f.push((format!("artifact {}", a.path), "absent".into()));
        }
    }
    f
}

fn standing_max(v: &Value) -> String {
    v.pointer("/standing_wave/orbit_dist")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_f64).fold(0.0, f64::max))
        .map_or_else(|| "n/a".into(), |x| format!("{x:.6e}"))
}

/// Builds the Markdown summary and its CSV rows.
pub fn build_report(paths: &[PathBuf]) -> (String, Vec<ReportRow>) {
    let mut md = String::from("# nlslab run summary\n");
    let mut rows = Vec::new();
    let mut groups: BTreeMap<String, Vec<Loaded>> = BTreeMap::new();
    let mut missing = Vec::new();
    for p in paths {
        match Manifest::load(p) {
            Ok(manifest) => {
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                groups.entry(manifest.command.clone()).or_default().push(Loaded { path: p.clone(), dir, manifest });
            }
            Err(e) => missing.push(format!("{}: {e}", p.display())),
        }
    }
    for (command, runs) in &groups {
        let _ = write!(md, "\n## {command}\n");
        if command == "groundstate" {
            md.push_str("\n| manifest | a | m(a) | lambda |\n|---|---|---|---|\n");
            for l in runs {
                let f: BTreeMap<_, _> = figures(l).into_iter().collect();
                let g = |k: &str| f.get(k).cloned().unwrap_or_else(|| "n/a".into());
                let _ = writeln!(md, "| {} | {} | {} | {} |", l.path.display(), g("a"), g("m"), g("lambda"));
            }
        }
        for l in runs {
            let _ = write!(md, "\n{}\n\n", l.path.display());
            for (k, v) in figures(l) {
                let _ = writeln!(md, "- {k}: {v}");
                rows.push(ReportRow { command: command.clone(), manifest: l.path.display().to_string(), key: k, value: v });
            }
        }
    }
    if !missing.is_empty() {
        md.push_str("\n## unreadable manifests\n\n");
        for m in &missing {
            let _ = writeln!(md, "- {m}");
        }
    }
    (md, rows)
}

pub fn report_cmd(paths: &[PathBuf], out: &mut OutputDir) -> CliResult<()> {
    let (md, rows) = build_report(paths);
    out.write_text("report.md", "markdown", &md)?;
    if rows.is_empty() {
        out.write_text("report.csv", "csv", "command,manifest,key,value\n")
    } else {
        out.write_csv("report.csv", &rows)
    }
}
