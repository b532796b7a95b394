use std::path::Path;

use eulerbench_core::inequalities::{inequality_sample, InequalityId, RatioReport, SampleConfig};

use crate::artifacts::{num, RunRecorder, Table};
use crate::error::Result;

pub struct SampleArgs<'a> {
    pub inequality: &'a str,
    pub n: usize,
    pub seed: u64,
    pub band: f64,
    pub grid_n: usize,
    pub constant_v: bool,
    pub out: &'a Path,
}

pub fn samples_file(id: InequalityId) -> String {
    format!("sample_{id}.csv")
}

pub fn summary_file(id: InequalityId) -> String {
    format!("sample_{id}_summary.csv")
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "inequality_id",
    "samples",
    "max_ratio",
    "median_ratio",
    "worst_sample_seed",
    "failures",
    "constant_v",
];

pub fn tables(report: &RatioReport, constant_v: bool) -> (Table, Table) {
    let id = report.inequality_id.as_str();
    let mut samples = Table::new(["inequality_id", "sample", "seed", "lhs", "rhs", "ratio"]);
    for (i, r) in report.records.iter().enumerate() {
        samples.push(vec![id.into(), i.to_string(), r.seed.to_string(), num(r.lhs), num(r.rhs), num(r.ratio)]);
    }
    let mut summary = Table::new(SUMMARY_HEADER);
    summary.push(vec![
        id.into(),
        report.samples.to_string(),
        num(report.max_ratio),
        num(report.median_ratio),
        report.worst_sample_seed.to_string(),
        report.failures.to_string(),
        u8::from(constant_v).to_string(),
    ]);
    (samples, summary)
}

pub fn run(args: &SampleArgs<'_>, arguments: Vec<String>) -> Result<()> {
    let id: InequalityId = args.inequality.parse()?;
    let mut cfg = SampleConfig::new(id, args.n, args.seed);
    cfg.band = args.band;
    cfg.grid_n = args.grid_n;
    cfg.constant_velocity = args.constant_v;
    let report = inequality_sample(&cfg)?;

    let mut rec = RunRecorder::new(args.out, "sample", arguments)?;
    let echo = [
        ("inequality", id.as_str().to_string()),
        ("n", args.n.to_string()),
        ("band", args.band.to_string()),
        ("grid_n", args.grid_n.to_string()),
        ("constant_v", args.constant_v.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    rec.set_config(echo, Some(args.seed));
    let (samples, summary) = tables(&report, args.constant_v);
    rec.write_table(&samples_file(id), &samples)?;
    rec.write_table(&summary_file(id), &summary)?;
    rec.finish()?;
    Ok(())
}
