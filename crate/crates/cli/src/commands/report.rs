//! Aggregates a run directory into `report.txt` plus static SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::artifacts::{write_atomic, RunManifest, MANIFEST_NAME};
use crate::commands::{check, geometry, simulate};
use crate::error::{CliError, Result};
use crate::plot::{LinePlot, Series};

pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub criterion: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Rows = Vec<BTreeMap<String, String>>;

fn read_rows(path: &Path) -> Result<Rows> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(header.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect());
    }
    Ok(rows)
}

fn val(row: &BTreeMap<String, String>, key: &str) -> Option<f64> {
    row.get(key).and_then(|s| s.parse().ok())
}

fn column_max(rows: &[&BTreeMap<String, String>], key: &str) -> f64 {
    // NaN propagates so that a broken value can never pass a threshold
    rows.iter().filter_map(|r| val(r, key)).fold(0.0, |a: f64, x| if x.is_nan() || a.is_nan() { f64::NAN } else { a.max(x) })
}

fn verdict(criterion: &'static str, value: f64, pass: bool, what: &str) -> Verdict {
    Verdict {
        criterion,
        pass,
        detail: format!("{what} = {value:.3e}"),
    }
}

fn identity_checks(rows: &Rows, kind: Option<&str>, out: &mut Vec<Verdict>) {
    let select = |id: &str| -> Vec<&BTreeMap<String, String>> {
        rows.iter().filter(|r| r.get("identity_id").map(String::as_str) == Some(id)).collect()
    };
    let w01 = select("W01");
    if !w01.is_empty() {
        let m = column_max(&w01, "relative");
        out.push(verdict("1 divergence law", m, m < 1e-10, "max relative residual"));
    }
    for id in ["fc1_v", "fc1_rho"] {
        let r = select(id);
        if !r.is_empty() {
            let m = column_max(&r, "relative");
            out.push(verdict("2 wave-transport residual", m, m < 1e-5, &format!("{id} max relative residual")));
        }
    }
    let w2 = select("W2");
    if !w2.is_empty() && kind == Some("irrotational") {
        let m = column_max(&w2, "l2_residual");
        out.push(verdict("3 curl-Omega on irrotational data", m, m < 1e-11, "W2 max l2 residual"));
    }
    let fc = select("fc");
    if !fc.is_empty() {
        let m = column_max(&fc, "additivity");
        out.push(verdict("4 v+ additivity", m, m < 1e-12, "max relative additivity defect"));
    }
}

fn convergence_checks(rows: &Rows, out: &mut Vec<Verdict>) {
    for (id, crit) in [
        ("fc1_v", "2 wave-transport convergence"),
        ("fc1_rho", "2 wave-transport convergence"),
        ("W2", "3 curl-Omega convergence"),
        ("fc", "4 v+ convergence"),
    ] {
        let ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r.get("identity_id").map(String::as_str) == Some(id))
            .filter_map(|r| val(r, "ratio"))
            .collect();
        if !ratios.is_empty() {
            let m = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(verdict(crit, m, m >= 12.0, &format!("{id} min refinement ratio")));
        }
    }
}

fn diagnostics_checks(rows: &Rows, kind: Option<&str>, out: &mut Vec<Verdict>) {
    let series = |k: &str| rows.iter().filter_map(|r| val(r, k)).collect::<Vec<_>>();
    let e = series("E");
    let mass = series("mass");
    if e.is_empty() {
        return;
    }
    let finite = e.iter().all(|x| x.is_finite());
    out.push(Verdict {
        criterion: "9 energy finite",
        pass: finite,
        detail: format!("{} samples, max E = {:.6e}", e.len(), e.iter().copied().fold(0.0, f64::max)),
    });
    let spread = |xs: &[f64]| {
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (hi - lo) / hi.abs().max(1e-300)
    };
    let dm = spread(&mass);
    out.push(verdict("mass conservation", dm, dm < 1e-12, "relative mass spread"));
    if matches!(kind, Some("constant") | Some("shear")) {
        let de = spread(&e);
        out.push(verdict("5 exact solution energy", de, de < 1e-12, "relative E spread"));
    }
}

fn sample_checks(rows: &Rows, out: &mut Vec<Verdict>) {
    for r in rows {
        let id = r.get("inequality_id").cloned().unwrap_or_default();
        let max = val(r, "max_ratio").unwrap_or(f64::NAN);
        let failures = val(r, "failures").unwrap_or(f64::NAN);
        if val(r, "constant_v") == Some(1.0) {
            out.push(verdict("10 degenerate commutator", max, max < 1e-12, &format!("{id} max ratio (constant v)")));
        } else {
            out.push(Verdict {
                criterion: "10 sampler finite",
                pass: max.is_finite() && failures == 0.0,
                detail: format!("{id} max ratio = {max:.4}, failures = {failures}"),
            });
        }
    }
}

fn geometry_checks(g: Option<&Rows>, f: Option<&Rows>, out: &mut Vec<Verdict>) {
    if let Some(g) = g {
        let all: Vec<_> = g.iter().collect();
        let drift = column_max(&all, "max_null_defect");
        out.push(verdict("12 null-constraint drift", drift, drift < 1e-8, "max ray drift"));
        let gv = column_max(&all, "G");
        out.push(Verdict {
            criterion: "12 foliation functional",
            pass: gv.is_finite(),
            detail: format!("G = {gv:.6e} over {} leaves", g.len()),
        });
    }
    if let Some(f) = f {
        let all: Vec<_> = f.iter().collect();
        let gram = column_max(&all, "gram_defect");
        out.push(verdict("12 null-frame relations", gram, gram < 1e-10, "max Gram defect"));
    }
}

fn plots(dir: &Path, files: &BTreeMap<String, Rows>) -> Result<Vec<String>> {
    let mut written = Vec::new();
    if let Some(rows) = files.get(simulate::DIAGNOSTICS_FILE) {
        let pts = |k: &str| rows.iter().filter_map(|r| Some((val(r, "time")?, val(r, k)?))).collect();
        let plot = LinePlot {
            title: "Energy functionals".into(),
            x_label: "t".into(),
            y_label: "E".into(),
            log_y: false,
            series: vec![Series::new("E", pts("E")), Series::new("E_l", pts("E_l"))],
        };
        write_atomic(dir.join("energy.svg"), plot.to_svg().as_bytes())?;
        written.push("energy.svg".into());
    }
    if let Some(rows) = files.get(check::IDENTITIES_FILE) {
        let mut by_id: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for r in rows {
            if let (Some(id), Some(t), Some(x)) = (r.get("identity_id"), val(r, "t"), val(r, "relative")) {
                by_id.entry(id.clone()).or_default().push((t, x));
            }
        }
        let plot = LinePlot {
            title: "Relative identity residuals".into(),
            x_label: "t".into(),
            y_label: "relative residual".into(),
            log_y: true,
            series: by_id.into_iter().map(|(k, v)| Series::new(&k, v)).collect(),
        };
        write_atomic(dir.join("residuals.svg"), plot.to_svg().as_bytes())?;
        written.push("residuals.svg".into());
    }
    if let Some(rows) = files.get(geometry::G_VALUES_FILE) {
        let pts = rows.iter().enumerate().filter_map(|(i, r)| Some((i as f64, val(r, "graph_norm")?))).collect();
        let plot = LinePlot {
            title: "Graph norms over the (theta, r) lattice".into(),
            x_label: "leaf".into(),
            y_label: "|||d phi - dt|||".into(),
            log_y: false,
            series: vec![Series::new("graph_norm", pts)],
        };
        write_atomic(dir.join("g_values.svg"), plot.to_svg().as_bytes())?;
        written.push("g_values.svg".into());
    }
    Ok(written)
}

/// Writes the summary and returns every verdict.
pub fn run(dir: &Path) -> Result<Vec<Verdict>> {
    if !RunManifest::path(dir).exists() {
        return Err(CliError::Config(format!("{} has no {MANIFEST_NAME}", dir.display())));
    }
    let manifest = RunManifest::load(dir)?;
    let kind = manifest
        .runs
        .iter()
        .rev()
        .find(|r| r.command == "simulate")
        .and_then(|r| r.config.get("init.kind").cloned());

    let mut latest: Vec<String> = Vec::new();
    for run in manifest.runs.iter().rev() {
        for a in &run.artifacts {
            if a.path.ends_with(".csv") && !latest.contains(&a.path) {
                latest.push(a.path.clone());
            }
        }
    }
    latest.sort();
    let mut files = BTreeMap::new();
    for name in &latest {
        files.insert(name.clone(), read_rows(&dir.join(name))?);
    }

    let mut verdicts = Vec::new();
    let bad = manifest.verify(dir);
    verdicts.push(Verdict {
        criterion: "manifest checksums",
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "all artifacts verify".into() } else { format!("altered or missing: {}", bad.join(", ")) },
    });
    if let Some(r) = files.get(simulate::DIAGNOSTICS_FILE) {
        diagnostics_checks(r, kind.as_deref(), &mut verdicts);
    }
    if let Some(r) = files.get(check::IDENTITIES_FILE) {
        identity_checks(r, kind.as_deref(), &mut verdicts);
    }
    if let Some(r) = files.get(check::CONVERGENCE_FILE) {
        convergence_checks(r, &mut verdicts);
    }
    let summaries: Rows = files
        .iter()
        .filter(|(k, _)| k.ends_with("_summary.csv"))
        .flat_map(|(_, v)| v.iter().cloned())
        .collect();
    sample_checks(&summaries, &mut verdicts);
    geometry_checks(files.get(geometry::G_VALUES_FILE), files.get(geometry::FRAME_FILE), &mut verdicts);

    let plots = plots(dir, &files)?;
    let mut text = String::new();
    let _ = writeln!(text, "run directory: {}", dir.display());
    let _ = writeln!(text, "runs recorded: {}", manifest.runs.len());
    for r in &manifest.runs {
        let _ = writeln!(text, "  {} ({} artifacts)", r.command, r.artifacts.len());
    }
    if let Some(k) = &kind {
        let _ = writeln!(text, "initial data: {k}");
    }
    let _ = writeln!(text, "tables: {}", latest.join(", "));
    let _ = writeln!(text, "plots: {}", plots.join(", "));
    let _ = writeln!(text);
    for v in &verdicts {
        let _ = writeln!(text, "{} criterion {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.detail);
    }
    write_atomic(dir.join(REPORT_FILE), text.as_bytes())?;
    Ok(verdicts)
}
