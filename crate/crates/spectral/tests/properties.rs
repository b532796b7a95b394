use eulerbench_spectral::littlewood_paley::{lp_decompose, DyadicRange};
use eulerbench_spectral::ops::{homogeneous_sobolev_exact, spectral_l2_norm};
use eulerbench_spectral::random::{random_band_limited, random_band_limited_vector};
use eulerbench_spectral::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(1e-300)
}

fn field(n: usize, band: f64, seed: u64) -> ScalarField {
    let g = Grid::new(n).unwrap();
    random_band_limited(g, band, 1.0, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn arb_size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(12), Just(16), Just(24)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_is_exact(n in arb_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..g.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = ScalarField::new(g, values).unwrap();
        let back = f.spectrum().to_field();
        prop_assert!(rel(&back, &f) < 1e-13);
    }

    #[test]
    fn parseval(n in arb_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..g.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = ScalarField::new(g, values).unwrap();
        let a = f.l2_norm();
        prop_assert!((spectral_l2_norm(&f) - a).abs() < 1e-12 * a);
    }

    #[test]
    fn div_curl_and_curl_grad_vanish(seed in any::<u64>()) {
        let g = Grid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_band_limited_vector(g, 7.0, 1.0, &mut rng);
        let psi = random_band_limited(g, 7.0, 1.0, &mut rng);
        let c = curl(&u);
        prop_assert!(divergence(&c).l2_norm() < 1e-12 * c.l2_norm());
        let gr = gradient(&psi);
        prop_assert!(curl(&gr).l2_norm() < 1e-12 * gr.l2_norm());
    }

    #[test]
    fn partition_of_unity(n in arb_size(), seed in any::<u64>()) {
        let g = Grid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..g.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = ScalarField::new(g, values).unwrap();
        let range = DyadicRange::of(&g);
        let mut sum = lp_low(&f, range.min).unwrap();
        for (_, d) in lp_decompose(&f) {
            sum = sum.add(&d);
        }
        prop_assert!(rel(&sum, &f) < 1e-12);
        // Any starting block works as well.
        let j0 = range.min + 2;
        let mut sum = lp_low(&f, j0).unwrap();
        for j in j0..=range.max {
            sum = sum.add(&lp_project(&f, j).unwrap());
        }
        prop_assert!(rel(&sum, &f) < 1e-12);
    }

    #[test]
    fn fractional_semigroup(seed in any::<u64>(), a in -1.5f64..1.5, b in -1.5f64..1.5) {
        let f = field(16, 6.0, seed);
        let ab = fractional_power(&fractional_power(&f, a).unwrap(), b).unwrap();
        let direct = fractional_power(&f, a + b).unwrap();
        prop_assert!(rel(&ab, &direct) < 1e-12);
    }

    #[test]
    fn bessel_inverse_pair(seed in any::<u64>(), k in -3.0f64..3.0) {
        let f = field(16, 6.0, seed).add_constant(0.7);
        let back = bessel_potential(&bessel_potential(&f, -k), k);
        prop_assert!(rel(&back, &f) < 1e-12);
    }

    #[test]
    fn riesz_trace_is_minus_identity(seed in any::<u64>()) {
        let f = field(16, 6.0, seed);
        let t = riesz(&f, 0, 0).add(&riesz(&f, 1, 1)).add(&riesz(&f, 2, 2));
        prop_assert!(rel(&t.scale(-1.0), &f) < 1e-12);
    }

    #[test]
    fn solve_neg_laplacian_inverts(seed in any::<u64>()) {
        let f = field(16, 6.0, seed);
        let u = solve_neg_laplacian(&f).unwrap();
        prop_assert!(u.mean().abs() < 1e-14);
        prop_assert!(rel(&laplacian(&u).scale(-1.0), &f) < 1e-12);
    }

    #[test]
    fn sobolev_monotone_on_zero_mean(seed in any::<u64>(), s1 in 0.0f64..2.0, ds in 0.0f64..1.0) {
        let f = field(16, 6.0, seed);
        prop_assert!(homogeneous_sobolev_exact(&f, s1) <= homogeneous_sobolev_exact(&f, s1 + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn dealias_is_a_projection(seed in any::<u64>()) {
        let f = field(24, 11.0, seed);
        let d = f.dealias();
        prop_assert!(rel(&d.dealias(), &d) < 1e-14);
    }
}

#[test]
fn gradient_of_random_field_matches_exact_multiplier_on_one_mode() {
    let g = Grid::new(16).unwrap();
    let f = ScalarField::from_fn(g, |x| (3.0 * x[0] - x[1] + 2.0 * x[2]).sin());
    let d = gradient(&f);
    let expect = [3.0, -1.0, 2.0];
    for a in 0..3 {
        let e = ScalarField::from_fn(g, |x| expect[a] * (3.0 * x[0] - x[1] + 2.0 * x[2]).cos());
        assert!(rel(d.component(a), &e) < 1e-13);
    }
}
