//! Smooth dyadic frequency decomposition.
//!
//! The profile `chi` is 1 on `[0, 1]`, 0 on `[2, inf)` and smooth in between.
//! Shell `j` keeps `chi(|xi|/2^j) - chi(|xi|/2^(j-1))`, supported in
//! `2^(j-1) < |xi| < 2^(j+1)`; the low block `S_j` keeps `chi(|xi|/2^(j-1))`.

use crate::field::ScalarField;
use crate::grid::Grid;
use crate::SpectralError;

#[inline]
fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth cutoff profile.
#[inline]
pub fn profile(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= 2.0 {
        return 0.0;
    }
    let a = bump(2.0 - s);
    a / (a + bump(s - 1.0))
}

/// Multiplier of `Δ_j` at radius `r`.
#[inline]
pub fn shell_multiplier(r: f64, j: i32) -> f64 {
    profile(r / 2f64.powi(j)) - profile(r / 2f64.powi(j - 1))
}

/// Multiplier of `S_j` at radius `r`.
#[inline]
pub fn low_multiplier(r: f64, j: i32) -> f64 {
    profile(r / 2f64.powi(j - 1))
}

/// Shells that carry grid modes: from the first shell touching `|k| = k0` to
/// the first shell whose upper cutoff covers the cube corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicRange {
    pub min: i32,
    pub max: i32,
}

impl DyadicRange {
    pub fn of(grid: &Grid) -> Self {
        let min = grid.k0().log2().floor() as i32;
        let max = grid.max_radius().log2().ceil() as i32;
        Self { min, max }
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.min..=self.max).contains(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.min..=self.max
    }
}

/// `Δ_j f`.
pub fn lp_project(f: &ScalarField, j: i32) -> Result<ScalarField, SpectralError> {
    let range = DyadicRange::of(&f.grid());
    if !range.contains(j) {
        return Err(SpectralError::OutOfBand {
            j,
            min: range.min,
            max: range.max,
        });
    }
    Ok(f.apply_radial(|r| shell_multiplier(r, j)))
}

/// `S_j f`; admissible for `j` up to one past the top shell.
pub fn lp_low(f: &ScalarField, j: i32) -> Result<ScalarField, SpectralError> {
    let range = DyadicRange::of(&f.grid());
    if j < range.min || j > range.max + 1 {
        return Err(SpectralError::OutOfBand {
            j,
            min: range.min,
            max: range.max + 1,
        });
    }
    Ok(f.apply_radial(|r| low_multiplier(r, j)))
}

/// All shells `Δ_j f` for `j` in the grid's dyadic range.
pub fn lp_decompose(f: &ScalarField) -> Vec<(i32, ScalarField)> {
    DyadicRange::of(&f.grid())
        .iter()
        .map(|j| (j, f.apply_radial(|r| shell_multiplier(r, j))))
        .collect()
}

/// `‖Δ_j f‖_{L^2}` for every shell, computed by Parseval without inverse transforms.
pub fn shell_l2_norms(f: &ScalarField) -> Vec<(i32, f64)> {
    let vol = f.grid().volume();
    let s = f.spectrum();
    DyadicRange::of(&f.grid())
        .iter()
        .map(|j| {
            let ms = s.weighted_sum(|k| {
                let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                shell_multiplier(r, j).powi(2)
            });
            (j, (ms * vol).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        assert_eq!(profile(0.3), 1.0);
        assert_eq!(profile(1.0), 1.0);
        assert_eq!(profile(2.0), 0.0);
        assert!((profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = profile(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn shell_center_is_one() {
        for j in -2..6 {
            assert!((shell_multiplier(2f64.powi(j), j) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn range_for_default_grid() {
        let g = Grid::new(32).unwrap();
        let r = DyadicRange::of(&g);
        assert_eq!(r, DyadicRange { min: 0, max: 5 });
    }

    #[test]
    fn out_of_band_rejected() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(lp_project(&f, 9), Err(SpectralError::OutOfBand { .. })));
        assert!(matches!(lp_project(&f, -3), Err(SpectralError::OutOfBand { .. })));
    }

    #[test]
    fn mode_at_shell_center_and_disjoint_shell() {
        let g = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(g, |x| (4.0 * x[2]).cos());
        let p = lp_project(&f, 2).unwrap();
        let err = p.sub(&f).linf_norm();
        assert!(err < 1e-14, "{err}");
        let one = ScalarField::from_fn(g, |x| x[0].sin());
        assert!(lp_project(&one, 2).unwrap().linf_norm() < 1e-15);
    }
}
