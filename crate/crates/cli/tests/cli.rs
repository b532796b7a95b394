use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eulerbench_cli::artifacts::RunManifest;
use eulerbench_cli::config::RunConfig;
use eulerbench_cli::exit;
use eulerbench_cli::snapshot::{read_geometry, read_snapshots};
use eulerbench_core::simulate;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eulerbench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("WORKBENCH_THREADS", "1").output().expect("spawn eulerbench")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CONSTANT: &str = "\
# uniform drift
grid.n = 8
eos.gamma = 1.4
time.t_end = 0.1
time.dt = 0.01
init.kind = constant
init.rho = 0.2
init.velocity = 0.1, -0.2, 0.05
seed = 1
";

const IRROTATIONAL: &str = "\
grid.n = 32
eos.gamma = 1.6666666666666667
time.t_end = 0.04
time.dt = 0.005
init.kind = irrotational
init.band = 2
init.amplitude = 0.1
seed = 4
";

fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn missing_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &CONSTANT.replace("eos.gamma = 1.4\n", ""));
    let out = dir.path().join("run");
    let o = run(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), exit::CONFIG);
    assert!(stderr(&o).contains("eos.gamma"), "{}", stderr(&o));
    assert!(!out.join("snapshots.bin").exists());
}

#[test]
fn constant_run_is_steady_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", CONSTANT);
    let out = dir.path().join("run");
    let o = run(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), exit::SUCCESS, "{}", stderr(&o));

    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("time,E,E_l,mass,min_cs,max_speed,cfl\n"));
    let e: Vec<f64> = column(&diag, "E").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(e.len(), 11);
    assert!(e.iter().all(|x| (x - e[0]).abs() <= 1e-12 * e[0]));

    // the file reproduces the in-memory run bit for bit
    let config = RunConfig::parse(CONSTANT).unwrap();
    let direct = simulate(&config.sim).unwrap();
    let stored = read_snapshots(out.join("snapshots.bin")).unwrap();
    assert_eq!(stored.len(), direct.len());
    for (a, b) in stored.states().iter().zip(direct.states()) {
        assert_eq!(a, b);
    }

    let manifest = RunManifest::load(&out).unwrap();
    assert_eq!(manifest.runs.len(), 1);
    assert_eq!(manifest.runs[0].config["init.kind"], "constant");
    assert_eq!(manifest.runs[0].seed, Some(1));
    assert!(manifest.verify(&out).is_empty());
    assert_eq!(manifest.runs[0].artifacts.len(), 2);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "i.cfg", IRROTATIONAL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run(&["simulate", "--config", p(&cfg), "--out", p(out)])), 0);
        assert_eq!(code(&run(&["check", "--snapshots", p(&out.join("snapshots.bin")), "--out", p(out)])), 0);
    }
    for f in ["snapshots.bin", "diagnostics.csv", "identities.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn check_reports_degenerate_constant_and_roundoff_irrotational() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", CONSTANT);
    let out = dir.path().join("c");
    assert_eq!(code(&run(&["simulate", "--config", p(&cfg), "--out", p(&out)])), 0);
    let o = run(&["check", "--snapshots", p(&out.join("snapshots.bin")), "--identities", "all", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("identities.csv")).unwrap();
    for (rel, flag) in column(&text, "relative").iter().zip(column(&text, "degenerate_flag")) {
        assert_eq!(rel.parse::<f64>().unwrap(), 0.0);
        assert_eq!(flag, "1");
    }
    // 11 snapshots: W01 at every index, half width 2 at 7, half width 4 at 3
    let ids = column(&text, "identity_id");
    assert_eq!(ids.iter().filter(|s| *s == "W01").count(), 11);
    assert_eq!(ids.iter().filter(|s| *s == "W2").count(), 7);
    assert_eq!(ids.iter().filter(|s| *s == "fc").count(), 3);

    let cfg = write_config(dir.path(), "i.cfg", IRROTATIONAL);
    let out = dir.path().join("i");
    assert_eq!(code(&run(&["simulate", "--config", p(&cfg), "--out", p(&out)])), 0);
    let o = run(&[
        "check",
        "--snapshots",
        p(&out.join("snapshots.bin")),
        "--identities",
        "W01,W0,W1,W2",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("identities.csv")).unwrap();
    // curl-free data: only roundoff survives, amplified by the second difference in W2
    for (id, l2) in column(&text, "identity_id").iter().zip(column(&text, "l2_residual")) {
        let tol = if id == "W2" { 1e-9 } else { 1e-11 };
        assert!(l2.parse::<f64>().unwrap() < tol, "{id} {l2}");
    }
}

#[test]
fn stencil_out_of_range_exits_5_and_unknown_identity_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &CONSTANT.replace("time.t_end = 0.1", "time.t_end = 0.03"));
    let out = dir.path().join("c");
    assert_eq!(code(&run(&["simulate", "--config", p(&cfg), "--out", p(&out)])), 0);
    let snaps = out.join("snapshots.bin");
    let o = run(&["check", "--snapshots", p(&snaps), "--identities", "fc1_v,W2", "--out", p(&out)]);
    assert_eq!(code(&o), exit::STENCIL_OUT_OF_RANGE, "{}", stderr(&o));
    let o = run(&["check", "--snapshots", p(&snaps), "--identities", "W9", "--out", p(&out)]);
    assert_eq!(code(&o), exit::CONFIG);
}

#[test]
fn refinement_pair_gives_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let base = "grid.n = 32\neos.gamma = 1.4\ntime.t_end = 0.16\ntime.dt = 0.005\ninit.kind = random_band_limited\ninit.band = 2\ninit.amplitude = 0.1\nseed = 2\n";
    let coarse_cfg = write_config(dir.path(), "a.cfg", &format!("{base}time.snap_every = 8\n"));
    let fine_cfg = write_config(dir.path(), "b.cfg", &format!("{base}time.snap_every = 4\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run(&["simulate", "--config", p(&coarse_cfg), "--out", p(&a)])), 0);
    assert_eq!(code(&run(&["simulate", "--config", p(&fine_cfg), "--out", p(&b)])), 0);
    let o = run(&[
        "check",
        "--snapshots",
        p(&a.join("snapshots.bin")),
        "--refined",
        p(&b.join("snapshots.bin")),
        "--identities",
        "W2,fc1_v",
        "--out",
        p(&a),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(a.join("convergence.csv")).unwrap();
    let ratios: Vec<f64> = column(&text, "ratio").iter().map(|s| s.parse().unwrap()).collect();
    assert!(!ratios.is_empty());
    // fourth-order stencils: halving the spacing gains about 16
    assert!(ratios.iter().all(|r| *r > 12.0), "{ratios:?}");
}

#[test]
fn sampler_is_deterministic_and_rejects_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["sample", "--inequality", "jh", "--n", "6", "--seed", "11", "--band", "4", "--grid-n", "16", "--out", p(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(a.join("sample_jh.csv")).unwrap(), std::fs::read(b.join("sample_jh.csv")).unwrap());

    let o = run(&["sample", "--inequality", "nope", "--n", "3", "--seed", "1", "--band", "4", "--out", p(&a)]);
    assert_eq!(code(&o), exit::CONFIG);

    let o = run(&["sample", "--inequality", "ce", "--n", "4", "--seed", "1", "--band", "4", "--grid-n", "16", "--constant-v", "--out", p(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(a.join("sample_ce_summary.csv")).unwrap();
    assert_eq!(column(&text, "max_ratio")[0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn geometry_and_report_on_a_uniform_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &CONSTANT.replace("time.t_end = 0.1", "time.t_end = 0.2"));
    let out = dir.path().join("run");
    assert_eq!(code(&run(&["simulate", "--config", p(&cfg), "--out", p(&out)])), 0);
    let o = run(&[
        "geometry",
        "--snapshots",
        p(&out.join("snapshots.bin")),
        "--theta-lattice",
        "axes",
        "--r-count",
        "2",
        "--rays-per-length",
        "3",
        "--time-samples",
        "5",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let graphs = read_geometry(out.join("foliation.bin")).unwrap();
    assert_eq!(graphs.len(), 12);
    assert!(graphs.iter().all(|g| g.times.len() == 5 && g.frames[0].len() == g.m[0] * g.m[1]));
    let g = std::fs::read_to_string(out.join("g_values.csv")).unwrap();
    assert_eq!(column(&g, "direction").len(), 12);
    let frames = std::fs::read_to_string(out.join("frame_invariants.csv")).unwrap();
    for v in column(&frames, "gram_defect") {
        assert!(v.parse::<f64>().unwrap() < 1e-10);
    }

    assert_eq!(code(&run(&["check", "--snapshots", p(&out.join("snapshots.bin")), "--out", p(&out)])), 0);
    let o = run(&["report", "--dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("PASS criterion manifest checksums"), "{report}");
    assert!(report.contains("PASS criterion 5 exact solution energy"), "{report}");
    assert!(report.contains("PASS criterion 12 null-frame relations"), "{report}");
    assert!(!report.contains("FAIL"), "{report}");
    for svg in ["energy.svg", "residuals.svg", "g_values.svg"] {
        assert!(std::fs::read_to_string(out.join(svg)).unwrap().starts_with("<svg"));
    }
    let manifest = RunManifest::load(&out).unwrap();
    assert_eq!(manifest.runs.len(), 3);
    assert!(manifest.verify(&out).is_empty());
}

#[test]
fn report_without_manifest_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", "--dir", p(dir.path())]);
    assert_eq!(code(&o), exit::CONFIG);
    assert!(stderr(&o).contains("manifest.json"));
}

#[test]
fn lost_hyperbolicity_exits_3_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", &format!("{CONSTANT}guards.c0 = 5.0\n"));
    let out = dir.path().join("run");
    let o = run(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), exit::HYPERBOLICITY_LOST, "{}", stderr(&o));
    let left: Vec<_> = std::fs::read_dir(&out).map(|d| d.collect()).unwrap_or_default();
    assert!(left.is_empty(), "{left:?}");
}

#[test]
fn corrupt_snapshot_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, b"NOPE\x01\x00\x00\x00").unwrap();
    let o = run(&["check", "--snapshots", p(&bad), "--out", p(dir.path())]);
    assert_eq!(code(&o), exit::FAILURE);
    assert!(stderr(&o).contains("magic"), "{}", stderr(&o));
}
