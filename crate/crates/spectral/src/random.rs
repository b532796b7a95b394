//! Seeded random band-limited real fields.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::field::{ScalarField, Spectrum, VectorField};
use crate::grid::Grid;

/// Whether `k` is the representative of the pair `{k, -k}` drawn by the generator.
fn canonical(k: [i64; 3]) -> bool {
    k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)))
}

fn half_index(grid: &Grid, k: [i64; 3]) -> Option<usize> {
    if k[0] < 0 {
        return None;
    }
    let n = grid.n() as i64;
    let wrap = |v: i64| (v.rem_euclid(n)) as usize;
    Some(k[0] as usize + grid.nh() * (wrap(k[1]) + grid.n() * wrap(k[2])))
}

/// Real field with independent Gaussian coefficients on integer modes
/// `1 <= |k| <= band`, rescaled so that `max |f| = amplitude`.
///
/// `band` is clamped below the Nyquist index so Hermitian pairs are never split.
pub fn random_band_limited<R: Rng + ?Sized>(grid: Grid, band: f64, amplitude: f64, rng: &mut R) -> ScalarField {
    let limit = band.min(grid.n() as f64 / 2.0 - 1.0);
    let b = limit.floor() as i64;
    let mut spec = Spectrum::zeros(grid);
    for kz in -b..=b {
        for ky in -b..=b {
            for kx in -b..=b {
                let k = [kx, ky, kz];
                let r2 = (kx * kx + ky * ky + kz * kz) as f64;
                if !canonical(k) || r2 > limit * limit {
                    continue;
                }
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let c = Complex64::new(re, im);
                if let Some(i) = half_index(&grid, k) {
                    spec.coeffs_mut()[i] = c;
                }
                if let Some(i) = half_index(&grid, [-kx, -ky, -kz]) {
                    spec.coeffs_mut()[i] = c.conj();
                }
            }
        }
    }
    let f = ScalarField::from_spectrum(spec);
    let m = f.linf_norm();
    if m == 0.0 {
        return f;
    }
    f.scale(amplitude / m)
}

pub fn random_band_limited_vector<R: Rng + ?Sized>(
    grid: Grid,
    band: f64,
    amplitude: f64,
    rng: &mut R,
) -> VectorField {
    let [x, y, z] = std::array::from_fn(|_| random_band_limited(grid, band, amplitude, rng));
    VectorField::from_components(x, y, z).expect("shared grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn band_and_amplitude_respected() {
        let g = Grid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_band_limited(g, 3.0, 0.25, &mut rng);
        assert!((f.linf_norm() - 0.25).abs() < 1e-15);
        assert!(f.mean().abs() < 1e-15);
        for (i, c) in f.spectrum().coeffs().iter().enumerate() {
            let k = g.integer_wavevector(i);
            if ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64) > 9.0 {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = Grid::new(8).unwrap();
        let a = random_band_limited(g, 2.0, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_band_limited(g, 2.0, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
