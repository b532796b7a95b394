use eulerbench_core::{simulate, EquationOfState, InitialData, SimConfig, SnapshotStack, TimeStep};
use eulerbench_geometry::{
    build_foliation, build_null_frame, foliation_functional, graph_norm, second_fundamental_form, trace_null_geodesic,
    FoliationOptions, GeometryError, RayOptions, SpacetimeMetric, ThetaDirection, ThetaLattice,
};

fn constant_stack(velocity: [f64; 3], gamma: f64, t_end: f64) -> SnapshotStack {
    let mut cfg = SimConfig::new(8, InitialData::Constant { rho: 0.0, velocity }, t_end, TimeStep::Fixed(0.05));
    cfg.eos = EquationOfState::new(gamma, 1.0).unwrap();
    simulate(&cfg).unwrap()
}

fn small_opts() -> FoliationOptions {
    FoliationOptions {
        rays_per_length: 5,
        time_samples: 9,
        ..FoliationOptions::default()
    }
}

#[test]
fn flat_background_is_trivial() {
    let stack = constant_stack([0.0; 3], 1.0, 0.4);
    let metric = SpacetimeMetric::new(&stack).unwrap();
    let opts = small_opts();
    let mut graphs = Vec::new();
    for dir in ThetaLattice::Default.directions() {
        let g = build_foliation(&metric, dir, 0.7, &opts).unwrap();
        for (ti, &t) in g.times.iter().enumerate() {
            for &phi in &g.phi[ti] {
                assert!((phi - (0.7 + t)).abs() < 1e-10);
            }
        }
        let frame = build_null_frame(&g, &metric).unwrap();
        assert!(frame.gram_defect() < 1e-12);
        let theta = g.theta;
        assert!(frame.max_deviation_from([1.0, theta[0], theta[1], theta[2]]) < 1e-10);
        let conn = second_fundamental_form(&frame);
        assert!(conn.max_chi() < 1e-10);
        assert!(conn.max_mu() < 1e-10);
        assert!(conn.max_l_ln_sigma() < 1e-10);
        graphs.push(g);
    }
    assert!(foliation_functional(&graphs, 2.5) < 1e-8);
}

#[test]
fn constant_drift_matches_closed_form() {
    let gamma = 5.0 / 3.0;
    let v0 = [0.2, -0.1, 0.05];
    let stack = constant_stack(v0, gamma, 0.4);
    let metric = SpacetimeMetric::new(&stack).unwrap();
    let c = gamma.sqrt();
    for dir in ThetaLattice::Default.directions() {
        let g = build_foliation(&metric, dir, 0.3, &small_opts()).unwrap();
        let theta = g.theta;
        let speed = v0[0] * theta[0] + v0[1] * theta[1] + v0[2] * theta[2] + c;
        let t_span = g.times[g.times.len() - 1] - g.times[0];
        for (ti, &t) in g.times.iter().enumerate() {
            for p in 0..g.torus.len() {
                assert!((g.phi[ti][p] - (0.3 + speed * t)).abs() < 1e-9);
                assert!((g.dphi_dt[ti][p] - speed).abs() < 1e-9);
            }
        }
        let expected = (speed - 1.0).abs() * (g.torus.area() * t_span).sqrt();
        assert!((graph_norm(&g, 2.5) - expected).abs() < 1e-8 * expected.max(1.0));

        let frame = build_null_frame(&g, &metric).unwrap();
        assert!(frame.gram_defect() < 1e-12);
        // l = T + c theta
        let l_ref = [1.0, v0[0] + c * theta[0], v0[1] + c * theta[1], v0[2] + c * theta[2]];
        assert!(frame.max_deviation_from(l_ref) < 1e-10);
        let conn = second_fundamental_form(&frame);
        assert!(conn.max_chi() < 1e-10 && conn.max_mu() < 1e-10);
    }
}

fn vortical_stack(amplitude: f64, gamma: f64) -> SnapshotStack {
    let mut cfg = SimConfig::new(
        16,
        InitialData::RandomBandLimited { band: 2.0, amplitude },
        0.3,
        TimeStep::Fixed(5e-3),
    );
    cfg.snap_every = 4;
    cfg.seed = 11;
    cfg.eos = EquationOfState::new(gamma, 1.0).unwrap();
    simulate(&cfg).unwrap()
}

#[test]
fn small_amplitude_flow_keeps_graphs_and_frames() {
    let stack = vortical_stack(1e-2, 5.0 / 3.0);
    let metric = SpacetimeMetric::new(&stack).unwrap();
    let opts = small_opts();
    for dir in ThetaLattice::Axes.directions() {
        let g = build_foliation(&metric, dir, 1.0, &opts).unwrap();
        assert!(g.max_null_defect < 1e-8, "{}", g.max_null_defect);
        assert!(g.reconstruction_residual < 1e-6, "{}", g.reconstruction_residual);
        let frame = build_null_frame(&g, &metric).unwrap();
        assert!(frame.gram_defect() < 1e-10, "{}", frame.gram_defect());
        assert!(frame.max_eikonal_defect() < 1e-6, "{}", frame.max_eikonal_defect());
        let conn = second_fundamental_form(&frame);
        assert!(conn.max_chi().is_finite() && conn.max_chi() > 0.0);
        // generators stay pregeodesic up to discretization error
        let (pre, chi) = (conn.max_pregeodesic_defect(), conn.max_chi());
        assert!(pre < 0.05 * chi, "{pre} {chi}");
    }
}

#[test]
fn curvature_scales_linearly_with_amplitude() {
    let dir = ThetaDirection::new([0, 0, 1]).unwrap();
    let measure = |amp: f64| {
        // gamma = 1 keeps c = 1, so d phi - dt is driven by the flow alone
        let stack = vortical_stack(amp, 1.0);
        let metric = SpacetimeMetric::new(&stack).unwrap();
        let g = build_foliation(&metric, dir, 0.0, &small_opts()).unwrap();
        let chi = second_fundamental_form(&build_null_frame(&g, &metric).unwrap()).max_chi();
        (graph_norm(&g, 2.5), chi)
    };
    let (g1, chi1) = measure(1e-3);
    let (g2, chi2) = measure(2e-3);
    assert!((g2 / g1 - 2.0).abs() < 0.05, "{}", g2 / g1);
    assert!((chi2 / chi1 - 2.0).abs() < 0.05, "{}", chi2 / chi1);
}

#[test]
fn tighter_tolerance_reduces_drift() {
    // coarse snapshots so that steps are limited by the tolerance, not the breakpoints
    let mut cfg = SimConfig::new(
        16,
        InitialData::RandomBandLimited { band: 2.0, amplitude: 0.1 },
        0.6,
        TimeStep::Fixed(5e-3),
    );
    cfg.snap_every = 30;
    let stack = simulate(&cfg).unwrap();
    let metric = SpacetimeMetric::new(&stack).unwrap();
    let (t0, t1) = metric.time_range();
    let drift = |rtol: f64| {
        let opts = RayOptions {
            rtol,
            atol: rtol * 0.1,
            ..RayOptions::default()
        };
        trace_null_geodesic(&metric, t0, [0.3, 1.1, 2.0], [0.0, 0.6, 0.8], &[t1], &opts)
            .unwrap()
            .max_null_defect()
    };
    let (loose, tight) = (drift(1e-9), drift(1e-12));
    assert!(tight <= 0.5 * loose || tight < 1e-13, "{loose} {tight}");
}

#[test]
fn out_of_range_requests_are_rejected() {
    let stack = constant_stack([0.0; 3], 1.0, 0.4);
    let metric = SpacetimeMetric::new(&stack).unwrap();
    let opts = FoliationOptions {
        t_end: Some(1.0),
        ..small_opts()
    };
    let dir = ThetaDirection::new([1, 0, 0]).unwrap();
    assert!(matches!(build_foliation(&metric, dir, 0.0, &opts), Err(GeometryError::LeftDomain { .. })));
    assert!(ThetaDirection::new([0, 0, 0]).is_err());
}
