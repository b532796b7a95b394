//! Characteristic hypersurfaces `x_theta = phi(t, x')` swept out by null rays
//! launched from the planes `theta . x = r`, and the functional `G` built from
//! `d phi - dt`.
//!
//! For a rational direction `theta ∝ d` the transverse coordinates `x'` live
//! on a torus whose periods are lattice vectors of the box orthogonal to `d`,
//! so every graph is periodic in `x'` and can be reconstructed spectrally.

use std::str::FromStr;

use rayon::prelude::*;

use crate::geodesic::{trace_null_geodesic, GeodesicRay, RayOptions};
use crate::metric::{dot, SpacetimeMetric};
use crate::torus::Torus;
use crate::{GeometryError, Result};

/// Integer direction vector; `theta = d / |d|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ThetaDirection {
    d: [i64; 3],
}

impl ThetaDirection {
    pub fn new(d: [i64; 3]) -> Result<Self> {
        if d == [0; 3] {
            return Err(GeometryError::InvalidParameter("theta direction must be nonzero".into()));
        }
        Ok(Self { d })
    }

    pub fn integer(&self) -> [i64; 3] {
        self.d
    }

    pub fn unit(&self) -> [f64; 3] {
        let f = self.d.map(|x| x as f64);
        let n = dot(&f, &f).sqrt();
        f.map(|x| x / n)
    }

    /// Orthogonal integer vectors `p1, p2` with `p1 x p2` a positive multiple of `d`.
    pub fn transverse_lattice(&self) -> ([i64; 3], [i64; 3]) {
        let d = self.d;
        let r = d.iter().map(|x| x.abs()).max().unwrap_or(1);
        let mut best: Option<[i64; 3]> = None;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let p = [a, b, c];
                    if p == [0; 3] || a * d[0] + b * d[1] + c * d[2] != 0 {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some(q) => {
                            let (np, nq) = (norm2i(p), norm2i(q));
                            np < nq || (np == nq && p > q)
                        }
                    };
                    if better {
                        best = Some(p);
                    }
                }
            }
        }
        let p1 = best.expect("a nonzero integer vector has an orthogonal lattice vector");
        let cross = [
            d[1] * p1[2] - d[2] * p1[1],
            d[2] * p1[0] - d[0] * p1[2],
            d[0] * p1[1] - d[1] * p1[0],
        ];
        let g = cross.iter().fold(0i64, |acc, &x| gcd(acc, x.abs()));
        (p1, cross.map(|x| x / g))
    }

    pub fn label(&self) -> String {
        format!("{}_{}_{}", self.d[0], self.d[1], self.d[2])
    }
}

fn norm2i(p: [i64; 3]) -> i64 {
    p.iter().map(|x| x * x).sum()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Named direction sets; `G` is a sup over the lattice, so each set gives a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaLattice {
    /// `±e_1, ±e_2, ±e_3`.
    Axes,
    /// The eight body diagonals `(±1, ±1, ±1)`.
    Diagonals,
    /// Axes and diagonals.
    #[default]
    Default,
    /// `+e_3` only.
    Z,
}

impl ThetaLattice {
    pub fn directions(&self) -> Vec<ThetaDirection> {
        let axes = || {
            (0..3).flat_map(|i| {
                [1, -1].map(|s| {
                    let mut d = [0; 3];
                    d[i] = s;
                    d
                })
            })
        };
        let diagonals = || {
            (0..8).map(|bits: i64| [(bits & 1) * 2 - 1, ((bits >> 1) & 1) * 2 - 1, ((bits >> 2) & 1) * 2 - 1])
        };
        let ds: Vec<[i64; 3]> = match self {
            Self::Axes => axes().collect(),
            Self::Diagonals => diagonals().collect(),
            Self::Default => axes().chain(diagonals()).collect(),
            Self::Z => vec![[0, 0, 1]],
        };
        ds.into_iter().map(|d| ThetaDirection { d }).collect()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Axes => "axes",
            Self::Diagonals => "diagonals",
            Self::Default => "default",
            Self::Z => "z",
        }
    }
}

impl FromStr for ThetaLattice {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axes" => Ok(Self::Axes),
            "diagonals" => Ok(Self::Diagonals),
            "default" => Ok(Self::Default),
            "z" => Ok(Self::Z),
            other => Err(GeometryError::InvalidParameter(format!("unknown theta lattice '{other}'"))),
        }
    }
}

/// `count` equally spaced plane offsets in `[0, length)`.
pub fn r_lattice(count: usize, length: f64) -> Vec<f64> {
    (0..count).map(|j| j as f64 * length / count as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoliationOptions {
    /// Rays per box length along each transverse period; rounded up to odd.
    pub rays_per_length: usize,
    /// Uniform output times from the stack start to `t_end` (at least 5).
    pub time_samples: usize,
    /// Defaults to the end of the stack.
    pub t_end: Option<f64>,
    pub rays: RayOptions,
}

impl Default for FoliationOptions {
    fn default() -> Self {
        Self {
            rays_per_length: 9,
            time_samples: 11,
            t_end: None,
            rays: RayOptions::default(),
        }
    }
}

/// `phi` and its gradient sampled on a uniform `(t, x')` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationGraph {
    pub direction: ThetaDirection,
    pub theta: [f64; 3],
    /// Orthonormal transverse basis with `u1 x u2 = theta`.
    pub basis: [[f64; 3]; 2],
    pub r: f64,
    pub torus: Torus,
    pub times: Vec<f64>,
    /// `phi[time][node]`.
    pub phi: Vec<Vec<f64>>,
    pub dphi_dt: Vec<Vec<f64>>,
    /// `dphi_dx[time][a][node]`, derivative along `u_a`.
    pub dphi_dx: Vec<[Vec<f64>; 2]>,
    /// `max |x_theta(ray) - phi(t, x'(ray))|`.
    pub reconstruction_residual: f64,
    /// Largest normalized null defect over all rays and times.
    pub max_null_defect: f64,
    /// Disagreement between the ray-covector slopes and spectral derivatives of `phi`.
    pub slope_consistency: f64,
}

impl FoliationGraph {
    /// Spatial point of node `p` on the slice `time index ti`.
    pub fn point(&self, ti: usize, p: usize) -> [f64; 3] {
        let y = self.torus.node(p);
        let phi = self.phi[ti][p];
        std::array::from_fn(|i| phi * self.theta[i] + y[0] * self.basis[0][i] + y[1] * self.basis[1][i])
    }

    pub fn time_step(&self) -> f64 {
        self.times[1] - self.times[0]
    }
}

/// Fourth-order derivative of a uniformly sampled series at index `i`.
pub(crate) fn fd4(f: &[f64], h: f64, i: usize) -> f64 {
    let n = f.len();
    debug_assert!(n >= 5);
    let s = 12.0 * h;
    match i {
        0 => (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / s,
        1 => (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / s,
        _ if i == n - 2 => -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]) / s,
        _ if i == n - 1 => {
            -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]) / s
        }
        _ => (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / s,
    }
}

fn odd_at_least(x: f64) -> usize {
    let m = x.ceil().max(3.0) as usize;
    if m % 2 == 0 {
        m + 1
    } else {
        m
    }
}

/// Sweeps the plane `theta . x = r` at the stack's first time along null rays.
pub fn build_foliation(
    metric: &SpacetimeMetric,
    direction: ThetaDirection,
    r: f64,
    opts: &FoliationOptions,
) -> Result<FoliationGraph> {
    if opts.time_samples < 5 || opts.rays_per_length == 0 {
        return Err(GeometryError::InvalidParameter(
            "foliation needs at least 5 time samples and one ray per length".into(),
        ));
    }
    let (t0, stack_end) = metric.time_range();
    let t_end = opts.t_end.unwrap_or(stack_end);
    if !(t_end > t0 && t_end <= stack_end) {
        return Err(GeometryError::LeftDomain { time: t_end, start: t0, end: stack_end });
    }
    let length = metric.length();
    let theta = direction.unit();
    let (p1, p2) = direction.transverse_lattice();
    let periods = [p1, p2].map(|p| (norm2i(p) as f64).sqrt() * length);
    let basis = [p1, p2].map(|p| {
        let n = (norm2i(p) as f64).sqrt();
        p.map(|x| x as f64 / n)
    });
    let m = periods.map(|p| odd_at_least(opts.rays_per_length as f64 * p / length));
    let torus = Torus::new(m, periods);
    let times: Vec<f64> = (0..opts.time_samples)
        .map(|i| t0 + (t_end - t0) * i as f64 / (opts.time_samples - 1) as f64)
        .collect();

    let rays: Vec<GeodesicRay> = (0..torus.len())
        .into_par_iter()
        .map(|p| {
            let y = torus.node(p);
            let x0 = std::array::from_fn(|i| r * theta[i] + y[0] * basis[0][i] + y[1] * basis[1][i]);
            trace_null_geodesic(metric, t0, x0, theta, &times, &opts.rays)
        })
        .collect::<Result<_>>()?;
    let max_null_defect = rays.iter().map(GeodesicRay::max_null_defect).fold(0.0, f64::max);

    let mut graph = FoliationGraph {
        direction,
        theta,
        basis,
        r,
        torus,
        times: times.clone(),
        phi: Vec::with_capacity(times.len()),
        dphi_dt: Vec::with_capacity(times.len()),
        dphi_dx: Vec::with_capacity(times.len()),
        reconstruction_residual: 0.0,
        max_null_defect,
        slope_consistency: 0.0,
    };
    for (ti, &t) in times.iter().enumerate() {
        let slice = reconstruct_slice(&torus, &basis, &theta, &rays, ti, t)?;
        graph.reconstruction_residual = graph.reconstruction_residual.max(slice.residual);
        graph.slope_consistency = graph.slope_consistency.max(slice.slope_consistency);
        graph.phi.push(slice.phi);
        graph.dphi_dt.push(slice.dphi_dt);
        graph.dphi_dx.push(slice.dphi_dx);
    }
    Ok(graph)
}

struct Slice {
    phi: Vec<f64>,
    dphi_dt: Vec<f64>,
    dphi_dx: [Vec<f64>; 2],
    residual: f64,
    slope_consistency: f64,
}

fn reconstruct_slice(
    torus: &Torus,
    basis: &[[f64; 3]; 2],
    theta: &[f64; 3],
    rays: &[GeodesicRay],
    ti: usize,
    t: f64,
) -> Result<Slice> {
    let np = torus.len();
    // per-ray quantities as periodic functions of the launch point x'_0
    let mut disp = [vec![0.0; np], vec![0.0; np]];
    let mut height = vec![0.0; np];
    let mut slope_t = vec![0.0; np];
    let mut slope = [vec![0.0; np], vec![0.0; np]];
    for (p, ray) in rays.iter().enumerate() {
        let s = &ray.samples[ti];
        let y0 = torus.node(p);
        let xi_theta = dot(&s.xi, theta);
        height[p] = dot(&s.x, theta);
        slope_t[p] = -s.xi0 / xi_theta;
        for a in 0..2 {
            disp[a][p] = dot(&s.x, &basis[a]) - y0[a];
            slope[a][p] = -dot(&s.xi, &basis[a]) / xi_theta;
        }
    }

    let grad = [torus.gradient(&disp[0]), torus.gradient(&disp[1])];
    for p in 0..np {
        let det = (1.0 + grad[0][0][p]) * (1.0 + grad[1][1][p]) - grad[0][1][p] * grad[1][0][p];
        if det <= 0.0 {
            return Err(GeometryError::FoldDetected { time: t });
        }
    }

    let c_disp = [torus.coefficients(&disp[0]), torus.coefficients(&disp[1])];
    let c_height = torus.coefficients(&height);
    let c_slope_t = torus.coefficients(&slope_t);
    let c_slope = [torus.coefficients(&slope[0]), torus.coefficients(&slope[1])];
    let scale = torus.period[0].max(torus.period[1]);

    let mut phi = vec![0.0; np];
    let mut dphi_dt = vec![0.0; np];
    let mut dphi_dx = [vec![0.0; np], vec![0.0; np]];
    for q in 0..np {
        let y = torus.node(q);
        // solve z + D(z) = y for the launch point z
        let mut z = [y[0] - disp[0][q], y[1] - disp[1][q]];
        let mut converged = false;
        for _ in 0..50 {
            let (d1, g1) = torus.evaluate(&c_disp[0], z);
            let (d2, g2) = torus.evaluate(&c_disp[1], z);
            let f = [z[0] + d1 - y[0], z[1] + d2 - y[1]];
            let j = [[1.0 + g1[0], g1[1]], [g2[0], 1.0 + g2[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det <= 0.0 {
                return Err(GeometryError::FoldDetected { time: t });
            }
            let step = [
                (j[1][1] * f[0] - j[0][1] * f[1]) / det,
                (-j[1][0] * f[0] + j[0][0] * f[1]) / det,
            ];
            z[0] -= step[0];
            z[1] -= step[1];
            if step[0].abs().max(step[1].abs()) < 1e-13 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(GeometryError::FoldDetected { time: t });
        }
        phi[q] = torus.evaluate(&c_height, z).0;
        dphi_dt[q] = torus.evaluate(&c_slope_t, z).0;
        for a in 0..2 {
            dphi_dx[a][q] = torus.evaluate(&c_slope[a], z).0;
        }
    }

    // check the reconstruction at the rays' actual transverse positions
    let c_phi = torus.coefficients(&phi);
    let mut residual = 0.0f64;
    for p in 0..np {
        let y0 = torus.node(p);
        let at = [y0[0] + disp[0][p], y0[1] + disp[1][p]];
        residual = residual.max((torus.evaluate(&c_phi, at).0 - height[p]).abs());
    }
    let spectral = torus.gradient(&phi);
    let slope_consistency = (0..np)
        .flat_map(|q| (0..2).map(move |a| (a, q)))
        .map(|(a, q)| (spectral[a][q] - dphi_dx[a][q]).abs())
        .fold(0.0, f64::max);

    Ok(Slice {
        phi,
        dphi_dt,
        dphi_dx,
        residual,
        slope_consistency,
    })
}

/// Builds graphs for every direction in `lattice` and `r_count` plane offsets.
pub fn build_foliation_lattice(
    metric: &SpacetimeMetric,
    lattice: ThetaLattice,
    r_count: usize,
    opts: &FoliationOptions,
) -> Result<Vec<FoliationGraph>> {
    let rs = r_lattice(r_count, metric.length());
    let mut out = Vec::with_capacity(rs.len() * 14);
    for dir in lattice.directions() {
        for &r in &rs {
            out.push(build_foliation(metric, dir, r, opts)?);
        }
    }
    Ok(out)
}

/// The two parts `(j = 0, j = 1)` of `|||d phi - dt|||^2_{s0}` for one graph:
/// `int ||d_t^j u||^2_{H^{s0-j}} dt` with `u = (d_t phi - 1, grad' phi)`.
pub fn graph_norm_parts(graph: &FoliationGraph, s0: f64) -> [f64; 2] {
    let nt = graph.times.len();
    let h = graph.time_step();
    let np = graph.torus.len();
    let components: [Vec<Vec<f64>>; 3] = [
        graph.dphi_dt.iter().map(|f| f.iter().map(|x| x - 1.0).collect()).collect(),
        graph.dphi_dx.iter().map(|g| g[0].clone()).collect(),
        graph.dphi_dx.iter().map(|g| g[1].clone()).collect(),
    ];
    let mut j0 = vec![0.0; nt];
    let mut j1 = vec![0.0; nt];
    for comp in &components {
        let series: Vec<Vec<f64>> = (0..np).map(|p| comp.iter().map(|f| f[p]).collect()).collect();
        for ti in 0..nt {
            j0[ti] += graph.torus.sobolev_sq(&comp[ti], s0);
            let dt: Vec<f64> = series.iter().map(|s| fd4(s, h, ti)).collect();
            j1[ti] += graph.torus.sobolev_sq(&dt, s0 - 1.0);
        }
    }
    [trapezoid(&j0, h), trapezoid(&j1, h)]
}

fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]))
}

/// `|||d phi - dt|||_{s0}` on one graph.
pub fn graph_norm(graph: &FoliationGraph, s0: f64) -> f64 {
    let [a, b] = graph_norm_parts(graph, s0);
    a.max(b).sqrt()
}

/// `G`: the largest graph norm over the supplied lattice of graphs.
pub fn foliation_functional(graphs: &[FoliationGraph], s0: f64) -> f64 {
    graphs.iter().map(|g| graph_norm(g, s0)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transverse_lattice_is_right_handed() {
        for dir in ThetaLattice::Default.directions().into_iter().chain([ThetaDirection::new([1, 2, 0]).unwrap()]) {
            let d = dir.integer();
            let (p1, p2) = dir.transverse_lattice();
            let dotp = |a: [i64; 3], b: [i64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            assert_eq!(dotp(p1, d), 0);
            assert_eq!(dotp(p2, d), 0);
            assert_eq!(dotp(p1, p2), 0);
            let cross = [
                p1[1] * p2[2] - p1[2] * p2[1],
                p1[2] * p2[0] - p1[0] * p2[2],
                p1[0] * p2[1] - p1[1] * p2[0],
            ];
            assert!(dotp(cross, d) > 0);
        }
        let (p1, p2) = ThetaDirection::new([0, 0, 1]).unwrap().transverse_lattice();
        assert_eq!((p1, p2), ([1, 0, 0], [0, 1, 0]));
    }

    #[test]
    fn fd4_is_exact_on_quartics() {
        let h = 0.1;
        let f: Vec<f64> = (0..7).map(|i| (i as f64 * h).powi(4) - (i as f64 * h)).collect();
        for i in 0..7 {
            let x = i as f64 * h;
            assert!((fd4(&f, h, i) - (4.0 * x.powi(3) - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn lattices_have_expected_sizes() {
        assert_eq!(ThetaLattice::Axes.directions().len(), 6);
        assert_eq!(ThetaLattice::Diagonals.directions().len(), 8);
        assert_eq!(ThetaLattice::Default.directions().len(), 14);
        assert_eq!("z".parse::<ThetaLattice>().unwrap(), ThetaLattice::Z);
        assert!("icosahedral".parse::<ThetaLattice>().is_err());
    }
}
