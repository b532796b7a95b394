use std::ops::Index;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::fft;
use crate::grid::Grid;
use crate::SpectralError;

/// Half-spectrum Fourier coefficients `c_k` with `f(x) = sum_k c_k exp(i k.x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.spectral_len() {
            return Err(SpectralError::ShapeMismatch {
                expected: grid.spectral_len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Multiply each coefficient by `m(index, wavevector)`.
    pub fn map_modes(&self, m: impl Fn(usize, [f64; 3], Complex64) -> Complex64) -> Self {
        let g = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| m(i, g.wavevector(i), c))
            .collect();
        Self { grid: g, coeffs }
    }

    /// Real radial multiplier `m(|k|)`.
    pub fn radial(&self, m: impl Fn(f64) -> f64) -> Self {
        self.map_modes(|_, k, c| c * m(norm3(k)))
    }

    /// Mean-square of the represented real function, `sum_k |c_k|^2`.
    pub fn mean_square(&self) -> f64 {
        self.weighted_sum(|_| 1.0)
    }

    /// `sum_k w(k) |c_k|^2` over the full (Hermitian) spectrum.
    pub fn weighted_sum(&self, w: impl Fn([f64; 3]) -> f64) -> f64 {
        let g = self.grid;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| g.parseval_weight(i) * w(g.wavevector(i)) * c.norm_sqr())
            .sum()
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_spectrum(self.clone())
    }
}

#[inline]
pub(crate) fn norm3(k: [f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Real scalar sampled on a grid, with a lazily computed spectrum.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<Spectrum>>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    /// Validated constructor: length must match and all samples must be finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite { index: i });
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    /// Skips the finiteness scan; used for intermediate results of finite inputs.
    pub fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_values_unchecked(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::from_values_unchecked(grid, values)
    }

    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        let grid = spectrum.grid;
        let values = fft::plan(grid.n()).inverse(&spectrum.coeffs);
        let cell = OnceLock::new();
        let _ = cell.set(Arc::new(spectrum));
        Self {
            grid,
            values,
            spectrum: cell,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| {
                Arc::new(Spectrum {
                    grid: self.grid,
                    coeffs: fft::plan(self.grid.n()).forward(&self.values),
                })
            })
            .as_ref()
    }

    fn cached_spectrum(&self) -> Option<&Arc<Spectrum>> {
        self.spectrum.get()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        Ok(())
    }

    // ---- pointwise algebra ----

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values_unchecked(self.grid, values)
    }

    /// `self + a * other`; carries the spectrum along when both are cached.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let out = self.zip_map(other, |x, y| x + a * y);
        if let (Some(s), Some(o)) = (self.cached_spectrum(), other.cached_spectrum()) {
            let coeffs = s.coeffs.iter().zip(&o.coeffs).map(|(x, y)| x + a * y).collect();
            let _ = out.spectrum.set(Arc::new(Spectrum {
                grid: self.grid,
                coeffs,
            }));
        }
        out
    }

    /// Linear combination `sum_i w_i f_i`; spectra are combined when all are cached.
    pub fn linear_combination(terms: &[(f64, &ScalarField)]) -> Self {
        assert!(!terms.is_empty(), "empty combination");
        let grid = terms[0].1.grid;
        let mut values = vec![0.0; grid.len()];
        for (w, f) in terms {
            assert_eq!(f.grid, grid, "grid mismatch");
            for (v, x) in values.iter_mut().zip(&f.values) {
                *v += w * x;
            }
        }
        let out = Self::from_values_unchecked(grid, values);
        if terms.iter().all(|(_, f)| f.cached_spectrum().is_some()) {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.spectral_len()];
            for (w, f) in terms {
                for (c, x) in coeffs.iter_mut().zip(&f.cached_spectrum().unwrap().coeffs) {
                    *c += w * x;
                }
            }
            let _ = out.spectrum.set(Arc::new(Spectrum { grid, coeffs }));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> Self {
        let out = self.map(|v| a * v);
        if let Some(s) = self.cached_spectrum() {
            let coeffs = s.coeffs.iter().map(|c| c * a).collect();
            let _ = out.spectrum.set(Arc::new(Spectrum {
                grid: self.grid,
                coeffs,
            }));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    // ---- reductions ----

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid-point maximum of `|f|`.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(integral |f|^2)^(1/2)` by the (spectrally exact) rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        (s * self.grid.dx().powi(3)).sqrt()
    }

    /// `(integral |f|^p)^(1/p)`; `p = inf` gives the grid maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf_norm();
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.dx().powi(3)).powf(1.0 / p)
    }

    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.volume()
    }

    /// `integral f g`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        s * self.grid.dx().powi(3)
    }

    // ---- spectral multipliers ----

    /// Apply a complex multiplier `m(index, k)` in Fourier space.
    pub fn apply_multiplier(&self, m: impl Fn(usize, [f64; 3]) -> Complex64) -> Self {
        Self::from_spectrum(self.spectrum().map_modes(|i, k, c| c * m(i, k)))
    }

    /// Apply a real radial multiplier `m(|k|)`.
    pub fn apply_radial(&self, m: impl Fn(f64) -> f64) -> Self {
        Self::from_spectrum(self.spectrum().radial(m))
    }

    /// Zero every mode outside the dealiasing box.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        Self::from_spectrum(
            self.spectrum()
                .map_modes(|i, _, c| if g.dealias_keep(i) { c } else { Complex64::new(0.0, 0.0) }),
        )
    }

    /// Remove the spatial mean.
    pub fn zero_mean(&self) -> Self {
        let m = self.mean();
        self.add_constant(-m)
    }

    /// Band-limited evaluation at an arbitrary point by direct Fourier summation.
    pub fn eval_at(&self, x: [f64; 3]) -> f64 {
        let s = self.spectrum();
        let g = self.grid;
        s.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = g.wavevector(i);
                // Nyquist axes use cos so the interpolant is real and symmetric.
                let mut phi = Complex64::new(1.0, 0.0);
                for a in 0..3 {
                    phi *= if g.is_nyquist(i, a) {
                        Complex64::new((k[a] * x[a]).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, k[a] * x[a])
                    };
                }
                g.parseval_weight(i) * (c * phi).re
            })
            .sum()
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Three scalar components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self, SpectralError> {
        let g = components[0].grid;
        if components.iter().any(|c| c.grid != g) {
            return Err(SpectralError::GridMismatch);
        }
        Ok(Self { components })
    }

    pub fn from_components(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self, SpectralError> {
        Self::new([x, y, z])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: std::array::from_fn(|_| ScalarField::zeros(grid)),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut v = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
        for i in 0..grid.len() {
            let r = f(grid.point(i));
            for a in 0..3 {
                v[a].push(r[a]);
            }
        }
        let [x, y, z] = v;
        Self {
            components: [
                ScalarField::from_values_unchecked(grid, x),
                ScalarField::from_values_unchecked(grid, y),
                ScalarField::from_values_unchecked(grid, z),
            ],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.components[0].grid
    }

    #[inline]
    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: std::array::from_fn(|a| f(&self.components[a])),
        }
    }

    pub fn zip_components(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self {
            components: std::array::from_fn(|a| f(&self.components[a], &other.components[a])),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_components(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_components(other, |a, b| a.sub(b))
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_components(other, |a, b| a.axpy(s, b))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_components(|a| a.scale(s))
    }

    /// Componentwise product with a scalar field.
    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        self.map_components(|a| a.mul(f))
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        let [a0, a1, a2] = &self.components;
        let [b0, b1, b2] = &other.components;
        let values = (0..a0.values.len())
            .map(|i| a0.values[i] * b0.values[i] + a1.values[i] * b1.values[i] + a2.values[i] * b2.values[i])
            .collect();
        ScalarField::from_values_unchecked(self.grid(), values)
    }

    pub fn cross(&self, other: &Self) -> Self {
        let a = &self.components;
        let b = &other.components;
        let c = |i: usize, j: usize| a[i].zip_map(&b[j], |x, y| x * y);
        Self {
            components: [
                c(1, 2).sub(&c(2, 1)),
                c(2, 0).sub(&c(0, 2)),
                c(0, 1).sub(&c(1, 0)),
            ],
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        self.dot(self).map(f64::sqrt)
    }

    pub fn linf_norm(&self) -> f64 {
        self.magnitude().linf_norm()
    }

    pub fn l2_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> [f64; 3] {
        std::array::from_fn(|a| self.components[a].mean())
    }

    pub fn dealias(&self) -> Self {
        self.map_components(|c| c.dealias())
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    /// Pointwise value at flat index `i`.
    #[inline]
    pub fn at(&self, i: usize) -> [f64; 3] {
        [self.components[0].values[i], self.components[1].values[i], self.components[2].values[i]]
    }
}
