//! Trigonometric interpolation on a small 2-torus with odd point counts.

use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    pub m: [usize; 2],
    pub period: [f64; 2],
}

impl Torus {
    pub fn new(m: [usize; 2], period: [f64; 2]) -> Self {
        debug_assert!(m[0] % 2 == 1 && m[1] % 2 == 1);
        Self { m, period }
    }

    pub fn len(&self) -> usize {
        self.m[0] * self.m[1]
    }

    pub fn area(&self) -> f64 {
        self.period[0] * self.period[1]
    }

    /// Node coordinates, first index fastest.
    pub fn node(&self, p: usize) -> [f64; 2] {
        let (i, j) = (p % self.m[0], p / self.m[0]);
        [
            i as f64 * self.period[0] / self.m[0] as f64,
            j as f64 * self.period[1] / self.m[1] as f64,
        ]
    }

    fn wavenumbers(m: usize) -> impl Iterator<Item = i64> {
        let half = (m as i64 - 1) / 2;
        -half..=half
    }

    /// Normalized Fourier coefficients `c[k1 + h1 + m1 (k2 + h2)]`, so that a
    /// constant field has `c_0` equal to that constant.
    pub fn coefficients(&self, values: &[f64]) -> Vec<Complex64> {
        let [m1, m2] = self.m;
        // separable DFT: first along x1 for each row, then along x2
        let mut rows = vec![Complex64::new(0.0, 0.0); m1 * m2];
        for j in 0..m2 {
            for (a, k1) in Self::wavenumbers(m1).enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..m1 {
                    s += values[i + m1 * j] * Complex64::from_polar(1.0, -TAU * (k1 * i as i64) as f64 / m1 as f64);
                }
                rows[a + m1 * j] = s;
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); m1 * m2];
        let norm = 1.0 / (m1 * m2) as f64;
        for a in 0..m1 {
            for (b, k2) in Self::wavenumbers(m2).enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..m2 {
                    s += rows[a + m1 * j] * Complex64::from_polar(1.0, -TAU * (k2 * j as i64) as f64 / m2 as f64);
                }
                out[a + m1 * b] = s * norm;
            }
        }
        out
    }

    /// Physical wavevector of coefficient slot `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let h = [(self.m[0] as i64 - 1) / 2, (self.m[1] as i64 - 1) / 2];
        let k1 = (idx % self.m[0]) as i64 - h[0];
        let k2 = (idx / self.m[0]) as i64 - h[1];
        [TAU * k1 as f64 / self.period[0], TAU * k2 as f64 / self.period[1]]
    }

    /// Value and gradient of the interpolant at `x`.
    pub fn evaluate(&self, coeffs: &[Complex64], x: [f64; 2]) -> (f64, [f64; 2]) {
        let [m1, m2] = self.m;
        let e1 = Self::phases(m1, TAU * x[0] / self.period[0]);
        let e2 = Self::phases(m2, TAU * x[1] / self.period[1]);
        let (mut f, mut g1, mut g2) = (0.0, 0.0, 0.0);
        for (b, z2) in e2.iter().enumerate() {
            for (a, z1) in e1.iter().enumerate() {
                let idx = a + m1 * b;
                let term = coeffs[idx] * z1 * z2;
                let k = self.wavevector(idx);
                f += term.re;
                // d/dx e^{ikx} = i k e^{ikx}
                g1 -= k[0] * term.im;
                g2 -= k[1] * term.im;
            }
        }
        (f, [g1, g2])
    }

    fn phases(m: usize, angle: f64) -> Vec<Complex64> {
        Self::wavenumbers(m).map(|k| Complex64::from_polar(1.0, angle * k as f64)).collect()
    }

    /// Gradient at every node, spectrally.
    pub fn gradient(&self, values: &[f64]) -> [Vec<f64>; 2] {
        let coeffs = self.coefficients(values);
        let mut out = [vec![0.0; self.len()], vec![0.0; self.len()]];
        for p in 0..self.len() {
            let (_, g) = self.evaluate(&coeffs, self.node(p));
            out[0][p] = g[0];
            out[1][p] = g[1];
        }
        out
    }

    /// `|| f ||_{H^s}^2` over one fundamental domain.
    pub fn sobolev_sq(&self, values: &[f64], s: f64) -> f64 {
        let coeffs = self.coefficients(values);
        let sum: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let k = self.wavevector(idx);
                (1.0 + k[0] * k[0] + k[1] * k[1]).powf(s) * c.norm_sqr()
            })
            .sum();
        self.area() * sum
    }
}
