//! Continuous-in-spacetime acoustic metric built from a snapshot stack.
//!
//! Space: periodic quintic B-spline interpolation, with the spline
//! coefficients obtained by dividing out the B-spline symbol in Fourier space.
//! The interpolant is C^4, so rays see no derivative kinks at cell faces.
//! Time: quartic Lagrange on five snapshots around the current interval;
//! kinks sit exactly at snapshot times (see [`SpacetimeMetric::time_nodes`]).
//!
//! Only `v` and `c^2` are interpolated; both metric forms are then assembled in
//! closed form, so `g^00 = -1` and `g g^{-1} = I` hold exactly at any point.

use eulerbench_core::fluid_state::sound_speed_sq;
use eulerbench_core::SnapshotStack;
use eulerbench_spectral::ScalarField;
use num_complex::Complex64;

use crate::{GeometryError, Result};

const SPACE_NODES: usize = 6;
const TIME_NODES: usize = 5;

/// `v`, `c^2` and their first derivatives at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub v: [f64; 3],
    pub c2: f64,
    /// `d[alpha] v^a` with `alpha = 0` the time derivative: `dv[alpha][a]`.
    pub dv: [[f64; 3]; 4],
    pub dc2: [f64; 4],
}

impl MetricSample {
    pub fn constant(v: [f64; 3], c2: f64) -> Self {
        Self {
            v,
            c2,
            dv: [[0.0; 3]; 4],
            dc2: [0.0; 4],
        }
    }

    /// `g_{alpha beta}`.
    pub fn lower(&self) -> [[f64; 4]; 4] {
        let inv = 1.0 / self.c2;
        let v2: f64 = self.v.iter().map(|x| x * x).sum();
        let mut g = [[0.0; 4]; 4];
        g[0][0] = -1.0 + v2 * inv;
        for a in 0..3 {
            g[0][a + 1] = -self.v[a] * inv;
            g[a + 1][0] = g[0][a + 1];
            g[a + 1][a + 1] = inv;
        }
        g
    }

    /// `g^{alpha beta}`.
    pub fn upper(&self) -> [[f64; 4]; 4] {
        let mut g = [[0.0; 4]; 4];
        g[0][0] = -1.0;
        for a in 0..3 {
            g[0][a + 1] = -self.v[a];
            g[a + 1][0] = -self.v[a];
            for b in 0..3 {
                g[a + 1][b + 1] = if a == b { self.c2 } else { 0.0 } - self.v[a] * self.v[b];
            }
        }
        g
    }

    /// `d_gamma g_{alpha beta}` as `dg[gamma][alpha][beta]`.
    pub fn lower_derivatives(&self) -> [[[f64; 4]; 4]; 4] {
        let inv = 1.0 / self.c2;
        let v2: f64 = self.v.iter().map(|x| x * x).sum();
        let mut out = [[[0.0; 4]; 4]; 4];
        for (c, d) in out.iter_mut().enumerate() {
            let dinv = -self.dc2[c] * inv * inv;
            let dv2: f64 = (0..3).map(|a| 2.0 * self.v[a] * self.dv[c][a]).sum();
            d[0][0] = dv2 * inv + v2 * dinv;
            for a in 0..3 {
                d[0][a + 1] = -self.dv[c][a] * inv - self.v[a] * dinv;
                d[a + 1][0] = d[0][a + 1];
                d[a + 1][a + 1] = dinv;
            }
        }
        out
    }

    /// `g_{alpha beta} X^alpha Y^beta`.
    pub fn inner(&self, x: &[f64; 4], y: &[f64; 4]) -> f64 {
        let g = self.lower();
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += g[a][b] * x[a] * y[b];
            }
        }
        s
    }

    /// `g^{alpha beta} xi_beta`.
    pub fn raise(&self, xi: &[f64; 4]) -> [f64; 4] {
        let g = self.upper();
        std::array::from_fn(|a| (0..4).map(|b| g[a][b] * xi[b]).sum())
    }

    /// `H = g^{ab} xi_a xi_b / 2 = (c^2 |xi|^2 - (xi_0 + v . xi)^2) / 2`.
    pub fn hamiltonian(&self, xi0: f64, xi: &[f64; 3]) -> f64 {
        let q = xi0 + dot(&self.v, xi);
        0.5 * (self.c2 * dot(xi, xi) - q * q)
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Lagrange weights and derivative weights on integer nodes `first..first+N` at `u`.
fn lagrange<const N: usize>(first: i64, u: f64) -> ([f64; N], [f64; N]) {
    let nodes: [f64; N] = std::array::from_fn(|j| j as f64);
    let u = u - first as f64;
    let mut w = [0.0; N];
    let mut dw = [0.0; N];
    for j in 0..N {
        let mut denom = 1.0;
        for m in 0..N {
            if m != j {
                denom *= nodes[j] - nodes[m];
            }
        }
        let mut prod = 1.0;
        for m in 0..N {
            if m != j {
                prod *= u - nodes[m];
            }
        }
        let mut deriv = 0.0;
        for skip in 0..N {
            if skip == j {
                continue;
            }
            let mut p = 1.0;
            for m in 0..N {
                if m != j && m != skip {
                    p *= u - nodes[m];
                }
            }
            deriv += p;
        }
        w[j] = prod / denom;
        dw[j] = deriv / denom;
    }
    (w, dw)
}

/// Centred quintic B-spline and its derivative.
fn bspline5(t: f64) -> (f64, f64) {
    let a = t.abs();
    let (mut v, mut d) = (0.0, 0.0);
    for (shift, c) in [(3.0, 1.0), (2.0, -6.0), (1.0, 15.0)] {
        let r: f64 = shift - a;
        if r > 0.0 {
            v += c * r.powi(5);
            d -= c * 5.0 * r.powi(4);
        }
    }
    (v / 120.0, t.signum() * d / 120.0)
}

/// Spline coefficients whose B-spline sum interpolates `f` at the nodes.
fn spline_coefficients(f: &ScalarField) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n() as f64;
    let symbol = |k: i64| {
        let th = std::f64::consts::TAU * k as f64 / n;
        (66.0 + 52.0 * th.cos() + 2.0 * (2.0 * th).cos()) / 120.0
    };
    f.apply_multiplier(|i, _| {
        let k = grid.integer_wavevector(i);
        Complex64::new(1.0 / (symbol(k[0]) * symbol(k[1]) * symbol(k[2])), 0.0)
    })
    .into_values()
}

#[derive(Debug, Clone)]
pub struct SpacetimeMetric {
    n: usize,
    length: f64,
    t0: f64,
    dt: f64,
    /// Per snapshot, per grid point: spline coefficients of `(v1, v2, v3, c^2)`.
    data: Vec<Vec<[f64; 4]>>,
}

impl SpacetimeMetric {
    pub fn new(stack: &SnapshotStack) -> Result<Self> {
        if stack.len() < TIME_NODES {
            return Err(GeometryError::InvalidParameter(format!(
                "need at least {TIME_NODES} snapshots, got {}",
                stack.len()
            )));
        }
        let grid = stack.grid();
        let data = stack
            .states()
            .iter()
            .map(|s| {
                let c2 = sound_speed_sq(s, stack.eos());
                let v = s.velocity();
                let coef = [v.component(0), v.component(1), v.component(2), &c2].map(spline_coefficients);
                (0..grid.len()).map(|p| coef.each_ref().map(|c| c[p])).collect()
            })
            .collect();
        Ok(Self {
            n: grid.n(),
            length: grid.length(),
            t0: stack.state(0).time(),
            dt: stack.dt_snap(),
            data,
        })
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.t0, self.t0 + self.dt * (self.data.len() - 1) as f64)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Snapshot times, where the time interpolant switches stencils.
    pub fn time_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.data.len()).map(move |i| self.t0 + i as f64 * self.dt)
    }

    /// Interpolated fields at `(t, x)`; `x` may lie anywhere on the universal cover.
    pub fn sample(&self, t: f64, x: [f64; 3]) -> Result<MetricSample> {
        let (start, end) = self.time_range();
        let slack = 1e-12 * self.dt;
        if !(t >= start - slack && t <= end + slack) {
            return Err(GeometryError::LeftDomain { time: t, start, end });
        }
        let s = (t - self.t0) / self.dt;
        let last = self.data.len() as i64 - TIME_NODES as i64;
        // switching stencils only at nodes keeps the interpolant continuous in t
        let first = ((s.floor() as i64) - 2).clamp(0, last);
        let (wt, dwt) = lagrange::<TIME_NODES>(first, s);

        let h = self.length / self.n as f64;
        let mut idx = [[0usize; SPACE_NODES]; 3];
        let mut w = [[0.0; SPACE_NODES]; 3];
        let mut dw = [[0.0; SPACE_NODES]; 3];
        for a in 0..3 {
            let u = x[a] / h;
            let base = u.floor() as i64 - 2;
            for j in 0..SPACE_NODES {
                let (b, db) = bspline5(u - (base + j as i64) as f64);
                w[a][j] = b;
                dw[a][j] = db / h;
            }
            idx[a] = std::array::from_fn(|j| (base + j as i64).rem_euclid(self.n as i64) as usize);
        }

        // out[derivative][field], derivative 0 = value, 1..4 = spatial
        let mut out = [[0.0; 4]; 4];
        let mut dt_part = [0.0; 4];
        for (k, (&wk, &dwk)) in wt.iter().zip(&dwt).enumerate() {
            let snap = &self.data[first as usize + k];
            let mut acc = [[0.0; 4]; 4];
            for kz in 0..SPACE_NODES {
                let rz = self.n * self.n * idx[2][kz];
                for ky in 0..SPACE_NODES {
                    let ry = rz + self.n * idx[1][ky];
                    let (wyz, dy, dz) = (w[1][ky] * w[2][kz], dw[1][ky] * w[2][kz], w[1][ky] * dw[2][kz]);
                    for kx in 0..SPACE_NODES {
                        let f = &snap[ry + idx[0][kx]];
                        let coef = [w[0][kx] * wyz, dw[0][kx] * wyz, w[0][kx] * dy, w[0][kx] * dz];
                        for (d, c) in coef.iter().enumerate() {
                            for q in 0..4 {
                                acc[d][q] += c * f[q];
                            }
                        }
                    }
                }
            }
            for q in 0..4 {
                for d in 0..4 {
                    out[d][q] += wk * acc[d][q];
                }
                dt_part[q] += dwk / self.dt * acc[0][q];
            }
        }
        let mut dv = [[0.0; 3]; 4];
        let mut dc2 = [0.0; 4];
        for a in 0..3 {
            dv[0][a] = dt_part[a];
            for d in 1..4 {
                dv[d][a] = out[d][a];
            }
        }
        dc2[0] = dt_part[3];
        for d in 1..4 {
            dc2[d] = out[d][3];
        }
        Ok(MetricSample {
            v: [out[0][0], out[0][1], out[0][2]],
            c2: out[0][3],
            dv,
            dc2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eulerbench_core::{EquationOfState, FluidState};
    use eulerbench_spectral::{Grid, ScalarField, VectorField};

    #[test]
    fn lagrange_reproduces_polynomials() {
        let (w, dw) = lagrange::<6>(-2, 0.3);
        let p = |x: f64| 1.0 + x - 2.0 * x.powi(3) + 0.5 * x.powi(5);
        let dp = |x: f64| 1.0 - 6.0 * x * x + 2.5 * x.powi(4);
        let v: f64 = (0..6).map(|j| w[j] * p((j as i64 - 2) as f64)).sum();
        let d: f64 = (0..6).map(|j| dw[j] * p((j as i64 - 2) as f64)).sum();
        assert!((v - p(0.3)).abs() < 1e-12);
        assert!((d - dp(0.3)).abs() < 1e-11);
    }

    #[test]
    fn spline_interpolates_nodes_and_constants() {
        let grid = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(grid, |x| (x[0] + 2.0 * x[1]).sin() + x[2].cos().powi(3));
        let c = spline_coefficients(&f);
        let idx = grid.flat_index(3, 7, 11);
        let mut v = 0.0;
        for dk in -2i64..=2 {
            for dj in -2i64..=2 {
                for di in -2i64..=2 {
                    let w = bspline5(di as f64).0 * bspline5(dj as f64).0 * bspline5(dk as f64).0;
                    let p = grid.flat_index((3 + di) as usize, (7 + dj) as usize, (11 + dk) as usize);
                    v += w * c[p];
                }
            }
        }
        assert!((v - f.values()[idx]).abs() < 1e-13);
        let total: f64 = (-3..=3).map(|j| bspline5(0.37 + j as f64).0).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let slope: f64 = (-3..=3).map(|j| bspline5(0.37 + j as f64).1).sum();
        assert!(slope.abs() < 1e-14);
    }

    #[test]
    fn metric_forms_are_inverse() {
        let s = MetricSample::constant([0.3, -0.2, 0.1], 1.7);
        let (lo, up) = (s.lower(), s.upper());
        for a in 0..4 {
            for b in 0..4 {
                let p: f64 = (0..4).map(|c| lo[a][c] * up[c][b]).sum();
                assert!((p - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert_eq!(up[0][0], -1.0);
    }

    #[test]
    fn smooth_fields_interpolate_accurately() {
        let grid = Grid::new(32).unwrap();
        let eos = EquationOfState::new(1.0, 1.0).unwrap();
        let states: Vec<FluidState> = (0..6)
            .map(|i| {
                let t = i as f64 * 0.05;
                let v = VectorField::from_fn(grid, |x| [0.1 * (x[1] + t).sin(), 0.0, 0.05 * x[0].cos()]);
                FluidState::new(ScalarField::zeros(grid), v, t).unwrap()
            })
            .collect();
        let stack = SnapshotStack::with_spacing(states, 0.05, eos).unwrap();
        let m = SpacetimeMetric::new(&stack).unwrap();
        let (t, x) = (0.123, [0.71, 2.33, -0.4]);
        let s = m.sample(t, x).unwrap();
        assert!((s.v[0] - 0.1 * (x[1] + t).sin()).abs() < 1e-6);
        assert!((s.dv[2][0] - 0.1 * (x[1] + t).cos()).abs() < 1e-5);
        assert!((s.dv[0][0] - 0.1 * (x[1] + t).cos()).abs() < 1e-5);
        assert!((s.dv[1][2] + 0.05 * x[0].sin()).abs() < 1e-5);
        assert!((s.c2 - 1.0).abs() < 1e-14);
        assert!(matches!(m.sample(1.0, x), Err(GeometryError::LeftDomain { .. })));
    }
}
