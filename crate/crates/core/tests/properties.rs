use eulerbench_core::evolution::{rhs, rhs_matrix_form, step_rk4};
use eulerbench_core::fluid_state::{acoustic_metric, derived_fields, eta_defect};
use eulerbench_core::inequalities::{inequality_sample, InequalityId, SampleConfig};
use eulerbench_core::vorticity::{epsilon_contraction, residual_divergence_law};
use eulerbench_core::{EquationOfState, FluidState, InitialData};
use eulerbench_spectral::random::{random_band_limited, random_band_limited_vector};
use eulerbench_spectral::Grid;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_state(n: usize, band: f64, amp: f64, seed: u64) -> FluidState {
    let grid = Grid::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = random_band_limited(grid, band, amp, &mut rng);
    let v = random_band_limited_vector(grid, band, amp, &mut rng);
    FluidState::new(rho, v, 0.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transport_and_matrix_forms_agree(seed in any::<u64>(), gamma in 1.0f64..2.0) {
        let s = random_state(16, 4.0, 0.3, seed);
        let eos = EquationOfState::new(gamma, 1.0).unwrap();
        let a = rhs(&s, &eos);
        let b = rhs_matrix_form(&s, &eos);
        let scale = a.d_v.linf_norm().max(a.d_rho.linf_norm());
        prop_assert!(a.d_rho.sub(&b.d_rho).linf_norm() <= 1e-12 * scale);
        prop_assert!(a.d_v.sub(&b.d_v).linf_norm() <= 1e-12 * scale);
    }

    #[test]
    fn divergence_law_holds_on_resolved_states(seed in any::<u64>()) {
        let s = random_state(32, 2.0, 0.1, seed);
        let r = residual_divergence_law(&s);
        prop_assert!(r.relative < 1e-10, "{}", r.relative);
    }

    #[test]
    fn metric_inverse_is_exact(seed in any::<u64>(), gamma in 1.0f64..2.0) {
        let s = random_state(8, 3.0, 0.5, seed);
        let g = acoustic_metric(&s, &EquationOfState::new(gamma, 1.0).unwrap());
        prop_assert!(g.inverse_defect() < 1e-12);
    }

    #[test]
    fn eta_inverts_the_shifted_source(seed in any::<u64>()) {
        let s = random_state(16, 3.0, 0.2, seed);
        let d = derived_fields(&s).unwrap();
        let scale = d.eta.linf_norm().max(1e-300);
        prop_assert!(eta_defect(&s, &d).linf_norm() < 1e-10 * scale.max(1.0));
        prop_assert!(d.v_plus.add(&d.eta).sub(s.velocity()).linf_norm() < 1e-15);
    }

    #[test]
    fn epsilon_contraction_is_antisymmetric(a in prop::array::uniform3(-5.0f64..5.0), b in prop::array::uniform3(-5.0f64..5.0)) {
        let ab = epsilon_contraction(a, b);
        let ba = epsilon_contraction(b, a);
        for i in 0..3 {
            prop_assert!((ab[i] + ba[i]).abs() < 1e-14);
        }
        let dot: f64 = (0..3).map(|i| ab[i] * a[i]).sum();
        prop_assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn constant_states_are_fixed_points(rho in -0.5f64..0.5, v in prop::array::uniform3(-1.0f64..1.0)) {
        let grid = Grid::new(8).unwrap();
        let s = InitialData::Constant { rho, velocity: v }.build(grid, 0).unwrap();
        let eos = EquationOfState::default();
        let next = step_rk4(&s, &eos, 0.01, None).unwrap();
        prop_assert!(next.rho_log().sub(s.rho_log()).linf_norm() <= 1e-15);
        prop_assert!(next.velocity().sub(s.velocity()).linf_norm() <= 1e-15);
    }

    #[test]
    fn rk4_conserves_mass(seed in any::<u64>()) {
        let s = random_state(16, 3.0, 0.1, seed);
        let eos = EquationOfState::default();
        let m0 = s.mass();
        let next = step_rk4(&s, &eos, 0.01, None).unwrap();
        // d/dt e^rho = -div(e^rho v); the dealiased tendency conserves it to truncation
        prop_assert!(rel(next.mass(), m0) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn sampler_is_deterministic_and_scale_invariant(seed in any::<u64>(), k in 0usize..10) {
        let id = InequalityId::ALL[k];
        let mut cfg = SampleConfig::new(id, 3, seed);
        cfg.grid_n = 16;
        cfg.band = 4.0;
        let a = inequality_sample(&cfg).unwrap();
        let b = inequality_sample(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        if id.homogeneous_in_f() {
            cfg.f_scale = 10.0;
            let c = inequality_sample(&cfg).unwrap();
            for (x, y) in a.records.iter().zip(&c.records) {
                prop_assert!(rel(y.ratio, x.ratio) < 1e-12, "{} {} {}", id, x.ratio, y.ratio);
            }
        }
    }
}
