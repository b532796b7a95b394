//! Constant-coefficient Fourier multipliers.

use num_complex::Complex64;

use crate::field::{norm3, ScalarField, Spectrum, VectorField};
use crate::SpectralError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Absolute tolerance on the zero mode, scaled by the field's sup norm.
fn mean_tolerance(f: &ScalarField) -> f64 {
    1e-12 * f.linf_norm().max(1.0)
}

fn derivative_spectrum(s: &Spectrum, axis: usize) -> Spectrum {
    let g = s.grid();
    // Odd derivatives of the unpaired Nyquist mode are not real; drop them.
    s.map_modes(|i, k, c| {
        if g.is_nyquist(i, axis) {
            ZERO
        } else {
            c * Complex64::new(0.0, k[axis])
        }
    })
}

/// `∂_axis f`.
pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    ScalarField::from_spectrum(derivative_spectrum(f.spectrum(), axis))
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    let [x, y, z] = std::array::from_fn(|a| ScalarField::from_spectrum(derivative_spectrum(s, a)));
    VectorField::from_components(x, y, z).expect("components share a grid")
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let g = u.grid();
    let spectra: [&Spectrum; 3] = std::array::from_fn(|a| u.component(a).spectrum());
    let mut out = Spectrum::zeros(g);
    for (a, s) in spectra.iter().enumerate() {
        let d = derivative_spectrum(s, a);
        for (o, c) in out.coeffs_mut().iter_mut().zip(d.coeffs()) {
            *o += c;
        }
    }
    ScalarField::from_spectrum(out)
}

pub fn curl(u: &VectorField) -> VectorField {
    let d = |comp: usize, axis: usize| derivative_spectrum(u.component(comp).spectrum(), axis);
    let diff = |a: Spectrum, b: Spectrum| {
        let mut a = a;
        for (x, y) in a.coeffs_mut().iter_mut().zip(b.coeffs()) {
            *x -= y;
        }
        ScalarField::from_spectrum(a)
    };
    VectorField::from_components(
        diff(d(2, 1), d(1, 2)),
        diff(d(0, 2), d(2, 0)),
        diff(d(1, 0), d(0, 1)),
    )
    .expect("components share a grid")
}

/// Full 3x3 Jacobian `J[i][j] = ∂_j u^i`.
pub fn jacobian(u: &VectorField) -> [[ScalarField; 3]; 3] {
    std::array::from_fn(|i| {
        let s = u.component(i).spectrum();
        std::array::from_fn(|j| ScalarField::from_spectrum(derivative_spectrum(s, j)))
    })
}

/// Second derivative `∂_a ∂_b f`; the Nyquist mode is kept only for `a == b`.
pub fn second_derivative(f: &ScalarField, a: usize, b: usize) -> ScalarField {
    let g = f.grid();
    ScalarField::from_spectrum(f.spectrum().map_modes(|i, k, c| {
        if a != b && (g.is_nyquist(i, a) || g.is_nyquist(i, b)) {
            ZERO
        } else {
            -c * k[a] * k[b]
        }
    }))
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    ScalarField::from_spectrum(f.spectrum().map_modes(|_, k, c| -c * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2])))
}

pub fn vector_laplacian(u: &VectorField) -> VectorField {
    u.map_components(laplacian)
}

/// Solve `-Δu = f` with `mean(u) = 0`.
pub fn solve_neg_laplacian(f: &ScalarField) -> Result<ScalarField, SpectralError> {
    let mean = f.mean();
    let tolerance = mean_tolerance(f);
    if mean.abs() > tolerance {
        return Err(SpectralError::NonZeroMean { mean, tolerance });
    }
    Ok(ScalarField::from_spectrum(f.spectrum().map_modes(|_, k, c| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            ZERO
        } else {
            c / k2
        }
    })))
}

/// `Λ^α = (-Δ)^{α/2}`, zero mode sent to zero.
pub fn fractional_power(f: &ScalarField, alpha: f64) -> Result<ScalarField, SpectralError> {
    if alpha < 0.0 {
        let mean = f.mean();
        if mean.abs() > mean_tolerance(f) {
            return Err(SpectralError::NegativePowerOnMean { alpha, mean });
        }
    }
    Ok(fractional_power_unchecked(f, alpha))
}

/// `Λ^α` without the mean check; the zero mode is always discarded.
pub fn fractional_power_unchecked(f: &ScalarField, alpha: f64) -> ScalarField {
    f.apply_radial(|r| if r == 0.0 { 0.0 } else { r.powf(alpha) })
}

/// `⟨∂⟩^k = (1 + |ξ|^2)^{k/2}`.
pub fn bessel_potential(f: &ScalarField, k: f64) -> ScalarField {
    f.apply_radial(|r| (1.0 + r * r).powf(0.5 * k))
}

/// Riesz transform `R_ij = ∂_i ∂_j (-Δ)^{-1}`, multiplier `-k_i k_j / |k|^2`.
pub fn riesz(f: &ScalarField, i: usize, j: usize) -> ScalarField {
    let g = f.grid();
    ScalarField::from_spectrum(f.spectrum().map_modes(|idx, k, c| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 || (i != j && (g.is_nyquist(idx, i) || g.is_nyquist(idx, j))) {
            ZERO
        } else {
            -c * k[i] * k[j] / k2
        }
    }))
}

/// `L^2` norm evaluated in Fourier space.
pub fn spectral_l2_norm(f: &ScalarField) -> f64 {
    (f.spectrum().mean_square() * f.grid().volume()).sqrt()
}

/// Homogeneous `Ḣ^s` norm with the exact multiplier `|k|^s` (no dyadic blocks).
pub fn homogeneous_sobolev_exact(f: &ScalarField, s: f64) -> f64 {
    let ms = f
        .spectrum()
        .weighted_sum(|k| {
            let r = norm3(k);
            if r == 0.0 {
                0.0
            } else {
                r.powf(2.0 * s)
            }
        });
    (ms * f.grid().volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_relative_eq;

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn gradient_of_single_mode() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        let d = gradient(&f);
        assert!(max_diff(d.component(0), &ScalarField::from_fn(g, |x| x[0].cos())) < 1e-13);
        assert!(d.component(1).linf_norm() < 1e-14);
        assert!(d.component(2).linf_norm() < 1e-14);
        let c = gradient(&ScalarField::constant(g, 3.0));
        assert!(c.linf_norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_eighth_order_differences() {
        let g = Grid::new(64).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].sin() * (2.0 * x[1]).cos());
        let d = gradient(&f);
        let n = g.n();
        let h = g.dx();
        let w = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        for axis in 0..2 {
            let mut err: f64 = 0.0;
            for idx in 0..g.len() {
                let (i, j, k) = g.unflatten(idx);
                let mut fd = 0.0;
                for (m, wm) in w.iter().enumerate() {
                    let s = m + 1;
                    let (p, q) = match axis {
                        0 => (g.flat_index((i + s) % n, j, k), g.flat_index((i + n - s) % n, j, k)),
                        _ => (g.flat_index(i, (j + s) % n, k), g.flat_index(i, (j + n - s) % n, k)),
                    };
                    fd += wm * (f[p] - f[q]);
                }
                err = err.max((fd / h - d.component(axis)[idx]).abs());
            }
            assert!(err < 1e-8, "axis {axis}: {err}");
        }
    }

    #[test]
    fn curl_of_shear() {
        let g = Grid::new(16).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]);
        let c = curl(&u);
        assert!(c.component(0).linf_norm() < 1e-14);
        assert!(c.component(1).linf_norm() < 1e-14);
        assert!(max_diff(c.component(2), &ScalarField::from_fn(g, |x| -x[1].cos())) < 1e-13);
        let k = VectorField::from_fn(g, |_| [1.0, -2.0, 0.5]);
        assert!(divergence(&k).linf_norm() < 1e-14);
    }

    #[test]
    fn inverse_laplacian_eigenfunctions() {
        let g = Grid::new(16).unwrap();
        let u = solve_neg_laplacian(&ScalarField::from_fn(g, |x| x[0].sin())).unwrap();
        assert!(max_diff(&u, &ScalarField::from_fn(g, |x| x[0].sin())) < 1e-14);
        let u = solve_neg_laplacian(&ScalarField::from_fn(g, |x| (2.0 * x[2]).cos())).unwrap();
        assert!(max_diff(&u, &ScalarField::from_fn(g, |x| 0.25 * (2.0 * x[2]).cos())) < 1e-14);
        assert!(solve_neg_laplacian(&ScalarField::zeros(g)).unwrap().linf_norm() == 0.0);
        assert!(matches!(
            solve_neg_laplacian(&ScalarField::constant(g, 1.0)),
            Err(SpectralError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn fractional_and_bessel_on_modes() {
        let g = Grid::new(16).unwrap();
        // |k| = 2 along the diagonal-free direction (0, 2, 0).
        let f = ScalarField::from_fn(g, |x| (2.0 * x[1]).cos());
        let l = fractional_power(&f, 1.0).unwrap();
        assert!(max_diff(&l, &f.scale(2.0)) < 1e-13);
        assert!(max_diff(&fractional_power(&f, 0.0).unwrap(), &f) < 1e-14);
        let e = ScalarField::from_fn(g, |x| x[0].sin());
        assert!(max_diff(&bessel_potential(&e, 2.0), &e.scale(2.0)) < 1e-13);
        let c = ScalarField::constant(g, 1.5);
        assert!(max_diff(&bessel_potential(&c, 3.7), &c) < 1e-14);
        assert!(matches!(
            fractional_power(&c, -0.5),
            Err(SpectralError::NegativePowerOnMean { .. })
        ));
    }

    #[test]
    fn riesz_single_mode() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).cos());
        let r01 = riesz(&f, 0, 1);
        assert!(max_diff(&r01, &f.scale(-2.0 / 5.0)) < 1e-14);
        let r00 = riesz(&f, 0, 0);
        assert_relative_eq!(r00[7], -f[7] / 5.0, epsilon = 1e-14);
    }
}
