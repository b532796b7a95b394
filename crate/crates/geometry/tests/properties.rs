use eulerbench_core::{simulate, EquationOfState, InitialData, SimConfig, TimeStep};
use eulerbench_geometry::{
    build_foliation, build_null_frame, FoliationOptions, MetricSample, SpacetimeMetric, ThetaLattice,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn uniform_media_give_exact_frames(
        v in prop::array::uniform3(-0.4f64..0.4),
        gamma in 1.0f64..2.0,
        k in 0usize..14,
        r in 0.0f64..6.0,
    ) {
        let mut cfg = SimConfig::new(8, InitialData::Constant { rho: 0.0, velocity: v }, 0.25, TimeStep::Fixed(0.05));
        cfg.eos = EquationOfState::new(gamma, 1.0).unwrap();
        let metric = SpacetimeMetric::new(&simulate(&cfg).unwrap()).unwrap();
        let dir = ThetaLattice::Default.directions()[k];
        let opts = FoliationOptions { rays_per_length: 3, time_samples: 6, ..FoliationOptions::default() };
        let g = build_foliation(&metric, dir, r, &opts).unwrap();
        let speed = v.iter().zip(&g.theta).map(|(a, b)| a * b).sum::<f64>() + gamma.sqrt();
        for (ti, &t) in g.times.iter().enumerate() {
            for &phi in &g.phi[ti] {
                prop_assert!((phi - r - speed * t).abs() < 1e-9);
            }
        }
        let frame = build_null_frame(&g, &metric).unwrap();
        prop_assert!(frame.gram_defect() < 1e-12);
    }

    #[test]
    fn pointwise_metric_forms_are_inverse(v in prop::array::uniform3(-2.0f64..2.0), c2 in 0.05f64..5.0) {
        let s = MetricSample::constant(v, c2);
        let (lo, up) = (s.lower(), s.upper());
        for a in 0..4 {
            for b in 0..4 {
                let p: f64 = (0..4).map(|c| lo[a][c] * up[c][b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((p - target).abs() < 1e-12 * (1.0 + c2 + v.iter().map(|x| x * x).sum::<f64>()));
            }
        }
        prop_assert_eq!(up[0][0], -1.0);
    }
}
