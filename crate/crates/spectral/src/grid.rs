use std::f64::consts::PI;

use crate::SpectralError;

/// Even sizes whose only prime factors are 2, 3 and 5.
fn is_fft_friendly(n: usize) -> bool {
    if n % 2 != 0 {
        return false;
    }
    let mut m = n;
    for p in [2, 3, 5] {
        while m % p == 0 {
            m /= p;
        }
    }
    m == 1
}

/// Uniform periodic grid on the cube `[0, length)^3` with `n` points per axis.
///
/// Sample storage is x-fastest: the flat index of `(i, j, k)` is `i + n * (j + n * k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    dealias_fraction: f64,
}

impl Grid {
    pub const DEFAULT_LENGTH: f64 = 2.0 * PI;
    pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

    pub fn new(n: usize) -> Result<Self, SpectralError> {
        Self::with_params(n, Self::DEFAULT_LENGTH, Self::DEFAULT_DEALIAS)
    }

    pub fn with_params(n: usize, length: f64, dealias_fraction: f64) -> Result<Self, SpectralError> {
        if n < 8 || !is_fft_friendly(n) {
            return Err(SpectralError::InvalidGrid(format!(
                "points per axis must be an even 2-3-5 smooth number >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            n,
            length,
            dealias_fraction,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    /// Number of real samples, `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Always false; a grid has at least 512 points.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of stored coefficients along the first (halved) spectral axis.
    #[inline]
    pub fn nh(&self) -> usize {
        self.n / 2 + 1
    }

    /// Number of complex coefficients in the half spectrum.
    #[inline]
    pub fn spectral_len(&self) -> usize {
        self.nh() * self.n * self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Fundamental wavenumber `2 pi / length`.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Per-axis Nyquist wavenumber.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        self.k0() * (self.n / 2) as f64
    }

    /// Largest wavenumber magnitude present on the grid (cube corner).
    #[inline]
    pub fn max_radius(&self) -> f64 {
        self.nyquist() * 3f64.sqrt()
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Physical coordinates of the sample with flat index `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unflatten(idx);
        let h = self.dx();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    /// Signed integer wavenumber for a full-length spectral axis index.
    /// The Nyquist index maps to `-n/2`.
    #[inline]
    pub fn signed_index(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Integer wavevector of the half-spectrum coefficient at `idx`.
    #[inline]
    pub fn integer_wavevector(&self, idx: usize) -> [i64; 3] {
        let nh = self.nh();
        let kx = idx % nh;
        let rest = idx / nh;
        let ky = rest % self.n;
        let kz = rest / self.n;
        let kx = if kx == self.n / 2 {
            -(self.n as i64) / 2
        } else {
            kx as i64
        };
        [kx, self.signed_index(ky), self.signed_index(kz)]
    }

    /// Physical wavevector of the half-spectrum coefficient at `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let k = self.integer_wavevector(idx);
        let k0 = self.k0();
        [k[0] as f64 * k0, k[1] as f64 * k0, k[2] as f64 * k0]
    }

    /// True when any component of the integer wavevector sits on the Nyquist index.
    #[inline]
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.integer_wavevector(idx)[axis] == -(self.n as i64) / 2
    }

    /// Multiplicity of a half-spectrum coefficient in Parseval sums: interior
    /// x-modes stand for a conjugate pair.
    #[inline]
    pub fn parseval_weight(&self, idx: usize) -> f64 {
        let kx = idx % self.nh();
        if kx == 0 || kx == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Whether the mode survives the dealiasing truncation.
    #[inline]
    pub fn dealias_keep(&self, idx: usize) -> bool {
        let cutoff = self.dealias_fraction * (self.n / 2) as f64;
        self.integer_wavevector(idx)
            .iter()
            .all(|&k| (k.unsigned_abs() as f64) < cutoff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(14).is_err());
        assert!(Grid::new(27).is_err());
        assert!(Grid::new(4).is_err());
        assert!(Grid::with_params(16, -1.0, 0.5).is_err());
        assert!(Grid::with_params(16, 1.0, 0.0).is_err());
        assert!(Grid::new(16).is_ok());
        assert!(Grid::new(48).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = Grid::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.signed_index(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for idx in 0..g.spectral_len() {
            for k in g.integer_wavevector(idx) {
                assert!((-4..4).contains(&k));
            }
        }
    }

    #[test]
    fn two_thirds_rule() {
        let g = Grid::new(48).unwrap();
        let kept = (0..g.spectral_len())
            .filter(|&i| g.dealias_keep(i))
            .map(|i| g.integer_wavevector(i)[1].abs())
            .max()
            .unwrap();
        assert_eq!(kept, 15);
    }
}
