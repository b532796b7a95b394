use std::path::Path;

use eulerbench_geometry::{
    build_foliation, build_null_frame, foliation_functional, r_lattice, second_fundamental_form,
    ConnectionCoefficients, FoliationGraph, FoliationOptions, GeometryError, NullFrame, SpacetimeMetric, ThetaLattice,
};
use eulerbench_geometry::foliation::graph_norm_parts;
use rayon::prelude::*;

use crate::artifacts::{num, RunRecorder, Table};
use crate::error::{CliError, Result};
use crate::snapshot::{read_snapshots, write_geometry, GeometryRecord};

pub const FOLIATION_FILE: &str = "foliation.bin";
pub const G_VALUES_FILE: &str = "g_values.csv";
pub const FRAME_FILE: &str = "frame_invariants.csv";

pub const G_HEADER: [&str; 9] = [
    "direction",
    "r",
    "norm_j0",
    "norm_j1",
    "graph_norm",
    "G",
    "max_null_defect",
    "reconstruction_residual",
    "slope_consistency",
];

pub const FRAME_HEADER: [&str; 10] = [
    "direction",
    "r",
    "t",
    "gram_defect",
    "dt_l_defect",
    "eikonal_defect",
    "max_chi",
    "max_mu",
    "max_l_ln_sigma",
    "pregeodesic_defect",
];

pub struct GeometryArgs<'a> {
    pub snapshots: &'a Path,
    pub theta_lattice: &'a str,
    pub r_count: usize,
    pub out: &'a Path,
    pub s0: f64,
    pub options: FoliationOptions,
}

pub struct Leaf {
    pub frame: NullFrame,
    pub connection: ConnectionCoefficients,
}

impl Leaf {
    pub fn graph(&self) -> &FoliationGraph {
        &self.frame.graph
    }
}

/// Builds every leaf; on failure reports the earliest fold, if any.
pub fn build_leaves(
    metric: &SpacetimeMetric,
    lattice: ThetaLattice,
    r_count: usize,
    opts: &FoliationOptions,
) -> Result<Vec<Leaf>> {
    let jobs: Vec<_> = lattice
        .directions()
        .into_iter()
        .flat_map(|d| r_lattice(r_count, metric.length()).into_iter().map(move |r| (d, r)))
        .collect();
    let results: Vec<std::result::Result<Leaf, GeometryError>> = jobs
        .into_par_iter()
        .map(|(d, r)| {
            let graph = build_foliation(metric, d, r, opts)?;
            let frame = build_null_frame(&graph, metric)?;
            let connection = second_fundamental_form(&frame);
            Ok(Leaf { frame, connection })
        })
        .collect();
    let first_fold = results
        .iter()
        .filter_map(|r| match r {
            Err(GeometryError::FoldDetected { time }) => Some(*time),
            _ => None,
        })
        .reduce(f64::min);
    if let Some(time) = first_fold {
        return Err(GeometryError::FoldDetected { time }.into());
    }
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

pub fn tables(leaves: &[Leaf], s0: f64) -> (Table, Table) {
    let graphs: Vec<FoliationGraph> = leaves.iter().map(|l| l.graph().clone()).collect();
    let g = foliation_functional(&graphs, s0);
    let mut gt = Table::new(G_HEADER);
    let mut ft = Table::new(FRAME_HEADER);
    for leaf in leaves {
        let graph = leaf.graph();
        let [j0, j1] = graph_norm_parts(graph, s0);
        gt.push(vec![
            graph.direction.label(),
            num(graph.r),
            num(j0.sqrt()),
            num(j1.sqrt()),
            num(j0.max(j1).sqrt()),
            num(g),
            num(graph.max_null_defect),
            num(graph.reconstruction_residual),
            num(graph.slope_consistency),
        ]);
        let c = &leaf.connection;
        for (ti, points) in leaf.frame.points.iter().enumerate() {
            let maxf = |f: &dyn Fn(usize) -> f64| (0..points.len()).map(f).fold(0.0, f64::max);
            let mat = |m: &[[f64; 2]; 2]| m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
            ft.push(vec![
                graph.direction.label(),
                num(graph.r),
                num(graph.times[ti]),
                num(maxf(&|p| points[p].gram_defect())),
                num(maxf(&|p| (points[p].l[0] - 1.0).abs())),
                num(maxf(&|p| points[p].eikonal_defect.abs())),
                num(maxf(&|p| mat(&c.chi[ti][p]))),
                num(maxf(&|p| mat(&c.mu[ti][p]))),
                num(maxf(&|p| c.l_ln_sigma[ti][p].abs())),
                num(maxf(&|p| c.pregeodesic_defect[ti][p].iter().fold(0.0f64, |a, x| a.max(x.abs())))),
            ]);
        }
    }
    (gt, ft)
}

pub fn run(args: &GeometryArgs<'_>, arguments: Vec<String>) -> Result<()> {
    let lattice: ThetaLattice = args.theta_lattice.parse().map_err(|e: GeometryError| CliError::Config(e.to_string()))?;
    if args.r_count == 0 {
        return Err(CliError::Config("--r-count must be at least 1".into()));
    }
    let stack = read_snapshots(args.snapshots)?;
    let metric = SpacetimeMetric::new(&stack)?;
    let leaves = build_leaves(&metric, lattice, args.r_count, &args.options)?;

    let mut rec = RunRecorder::new(args.out, "geometry", arguments)?;
    let echo = [
        ("snapshots", args.snapshots.display().to_string()),
        ("theta_lattice", lattice.as_str().to_string()),
        ("r_count", args.r_count.to_string()),
        ("s0", args.s0.to_string()),
        ("rays_per_length", args.options.rays_per_length.to_string()),
        ("time_samples", args.options.time_samples.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    rec.set_config(echo, None);
    let records: Vec<GeometryRecord<'_>> = leaves
        .iter()
        .map(|l| GeometryRecord {
            graph: l.graph(),
            frame: &l.frame,
            connection: &l.connection,
        })
        .collect();
    write_geometry(rec.file(FOLIATION_FILE), &records)?;
    rec.record(FOLIATION_FILE)?;
    let (gt, ft) = tables(&leaves, args.s0);
    rec.write_table(G_VALUES_FILE, &gt)?;
    rec.write_table(FRAME_FILE, &ft)?;
    rec.finish()?;
    Ok(())
}
