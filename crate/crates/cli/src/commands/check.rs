use std::path::Path;

use eulerbench_core::{evaluate_identity, CoreError, IdentityId, ResidualReport, SnapshotStack};
use rayon::prelude::*;

use crate::artifacts::{num, RunRecorder, Table};
use crate::error::{CliError, Result};
use crate::snapshot::read_snapshots;

pub const IDENTITIES_FILE: &str = "identities.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

/// Per-term columns shared by every identity; unused cells stay empty.
pub const TERM_COLUMNS: [&str; 26] = [
    "div_w",
    "w_dot_grad_rho",
    "T_w",
    "stretching",
    "T_Omega",
    "rhs",
    "lhs",
    "grad_F",
    "R1",
    "R2",
    "R3",
    "R4",
    "R5",
    "R6",
    "S_transport",
    "S_density",
    "S_vorticity_density",
    "S_vorticity_quadratic",
    "box_v",
    "curl_source",
    "Q",
    "box_rho",
    "D",
    "box_vplus",
    "TT_eta",
    "lower_order",
];

pub fn header() -> Vec<String> {
    let mut h: Vec<String> = [
        "identity_id",
        "t_index",
        "t",
        "l2_residual",
        "linf_residual",
        "relative",
        "degenerate_flag",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(TERM_COLUMNS.iter().map(|s| s.to_string()));
    h.push("additivity".into());
    h
}

pub fn parse_identities(list: &str) -> Result<Vec<IdentityId>> {
    if list.trim() == "all" {
        return Ok(IdentityId::ALL.to_vec());
    }
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let id: IdentityId = item.parse().map_err(|e: CoreError| CliError::Config(e.to_string()))?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("empty identity list".into()));
    }
    Ok(out)
}

pub struct Evaluation {
    pub id: IdentityId,
    pub index: usize,
    pub report: ResidualReport,
    pub additivity: Option<f64>,
}

/// Every admissible `(identity, index)` pair, in identity-then-time order.
pub fn evaluate_all(stack: &SnapshotStack, ids: &[IdentityId]) -> Result<Vec<Evaluation>> {
    let jobs: Vec<(IdentityId, usize)> = ids
        .iter()
        .flat_map(|&id| {
            let hw = id.half_width();
            (hw..stack.len().saturating_sub(hw)).map(move |i| (id, i))
        })
        .collect();
    if jobs.is_empty() {
        let hw = ids.iter().map(IdentityId::half_width).min().unwrap_or(0);
        return Err(CoreError::StencilOutOfRange {
            index: 0,
            half_width: hw,
            len: stack.len(),
        }
        .into());
    }
    jobs.into_par_iter()
        .map(|(id, index)| {
            let (report, additivity) = evaluate_identity(id, stack, index)?;
            Ok(Evaluation {
                id,
                index,
                report,
                additivity,
            })
        })
        .collect()
}

fn row(e: &Evaluation) -> Vec<String> {
    let r = &e.report;
    let mut out = vec![
        e.id.as_str().to_string(),
        e.index.to_string(),
        num(r.time),
        num(r.l2_residual),
        num(r.linf_residual),
        num(r.relative),
        u8::from(r.degenerate).to_string(),
    ];
    out.extend(TERM_COLUMNS.iter().map(|k| r.per_term_norms.get(*k).map(|&x| num(x)).unwrap_or_default()));
    out.push(e.additivity.map(num).unwrap_or_default());
    out
}

pub fn identity_table(evals: &[Evaluation]) -> Table {
    let mut t = Table::new(header());
    for e in evals {
        t.push(row(e));
    }
    t
}

/// Pairs coarse and refined residuals at common times.
pub fn convergence_table(coarse: &SnapshotStack, fine: &SnapshotStack, ids: &[IdentityId]) -> Result<Table> {
    let (hc, hf) = (coarse.dt_snap(), fine.dt_snap());
    let tol = 1e-6 * hf;
    let fine_times = fine.times();
    let mut jobs = Vec::new();
    for &id in ids.iter().filter(|id| id.half_width() > 0) {
        let hw = id.half_width();
        for ic in hw..coarse.len().saturating_sub(hw) {
            let t = coarse.state(ic).time();
            if let Some(jf) = fine_times.iter().position(|&s| (s - t).abs() < tol) {
                if jf >= hw && jf + hw < fine.len() {
                    jobs.push((id, ic, jf));
                }
            }
        }
    }
    let rows: Vec<Vec<String>> = jobs
        .into_par_iter()
        .map(|(id, ic, jf)| {
            let (c, _) = evaluate_identity(id, coarse, ic)?;
            let (f, _) = evaluate_identity(id, fine, jf)?;
            let ratio = c.l2_residual / f.l2_residual;
            Ok(vec![
                id.as_str().to_string(),
                num(c.time),
                num(hc),
                num(hf),
                num(c.l2_residual),
                num(f.l2_residual),
                num(ratio),
                num(ratio.ln() / (hc / hf).ln()),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(["identity_id", "t", "h_coarse", "h_fine", "l2_coarse", "l2_fine", "ratio", "order"]);
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

pub struct CheckArgs<'a> {
    pub snapshots: &'a Path,
    pub identities: &'a str,
    pub out: &'a Path,
    pub stride: usize,
    pub refined: Option<&'a Path>,
}

pub fn run(args: &CheckArgs<'_>, arguments: Vec<String>) -> Result<()> {
    let ids = parse_identities(args.identities)?;
    if args.stride == 0 {
        return Err(CliError::Config("--stride must be at least 1".into()));
    }
    let stack = read_snapshots(args.snapshots)?.subsample(args.stride)?;
    let mut rec = RunRecorder::new(args.out, "check", arguments)?;
    let mut echo = std::collections::BTreeMap::new();
    echo.insert("snapshots".to_string(), args.snapshots.display().to_string());
    echo.insert("identities".to_string(), args.identities.to_string());
    echo.insert("stride".to_string(), args.stride.to_string());
    let evals = evaluate_all(&stack, &ids)?;
    let refined = match args.refined {
        Some(p) => {
            echo.insert("refined".to_string(), p.display().to_string());
            Some(read_snapshots(p)?.subsample(args.stride)?)
        }
        None => None,
    };
    rec.set_config(echo, None);
    rec.write_table(IDENTITIES_FILE, &identity_table(&evals))?;
    if let Some(fine) = refined {
        rec.write_table(CONVERGENCE_FILE, &convergence_table(&stack, &fine, &ids)?)?;
    }
    rec.finish()?;
    Ok(())
}
