//! Null frame `{l, lbar, e_1, e_2}` adapted to a characteristic graph, and the
//! connection coefficients `chi`, `l(ln sigma)` and `mu_0`.
//!
//! Vectors are stored with components `(X^t, X^1, X^2, X^3)`.

use rayon::prelude::*;

use crate::foliation::{fd4, FoliationGraph};
use crate::geodesic::null_covector;
use crate::metric::{dot, MetricSample, SpacetimeMetric};
use crate::{GeometryError, Result};

/// Gram-Schmidt pivots below this (relative) abort the frame.
pub const PIVOT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub position: [f64; 4],
    pub metric: MetricSample,
    pub sigma: f64,
    pub l: [f64; 4],
    pub lbar: [f64; 4],
    pub e: [[f64; 4]; 2],
    /// `|d_t phi - d_t phi_eikonal|` between the ray-interpolated slope and the null completion.
    pub eikonal_defect: f64,
}

impl FramePoint {
    /// Largest violation of the null-frame relations and of `dt(l) = 1`.
    pub fn gram_defect(&self) -> f64 {
        let m = &self.metric;
        let mut worst = (m.inner(&self.l, &self.lbar) - 2.0).abs();
        worst = worst.max(m.inner(&self.l, &self.l).abs());
        worst = worst.max(m.inner(&self.lbar, &self.lbar).abs());
        for a in 0..2 {
            worst = worst.max(m.inner(&self.l, &self.e[a]).abs());
            worst = worst.max(m.inner(&self.lbar, &self.e[a]).abs());
            for b in 0..2 {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((m.inner(&self.e[a], &self.e[b]) - target).abs());
            }
        }
        worst.max((self.l[0] - 1.0).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullFrame {
    pub graph: FoliationGraph,
    /// `points[time][node]`.
    pub points: Vec<Vec<FramePoint>>,
}

impl NullFrame {
    pub fn gram_defect(&self) -> f64 {
        self.points.iter().flatten().map(FramePoint::gram_defect).fold(0.0, f64::max)
    }

    pub fn max_eikonal_defect(&self) -> f64 {
        self.points.iter().flatten().map(|p| p.eikonal_defect).fold(0.0, f64::max)
    }

    /// Largest componentwise deviation of `l` from a reference vector.
    pub fn max_deviation_from(&self, l_ref: [f64; 4]) -> f64 {
        self.points
            .iter()
            .flatten()
            .flat_map(|p| (0..4).map(move |i| (p.l[i] - l_ref[i]).abs()))
            .fold(0.0, f64::max)
    }
}

fn frame_point(graph: &FoliationGraph, m: MetricSample, position: [f64; 4], ti: usize, p: usize) -> Result<FramePoint> {
    let theta = graph.theta;
    let u = graph.basis;
    let s = [graph.dphi_dx[ti][0][p], graph.dphi_dx[ti][1][p]];
    // dr for r = x_theta - phi(t, x'); its time part is completed from the
    // eikonal equation so that l is null to roundoff
    let zeta: [f64; 3] = std::array::from_fn(|i| theta[i] - s[0] * u[0][i] - s[1] * u[1][i]);
    let xi0 = null_covector(&m, zeta);
    let eikonal_defect = (xi0 + graph.dphi_dt[ti][p]).abs();
    let dr = [xi0, zeta[0], zeta[1], zeta[2]];
    let v = m.raise(&dr);
    let sigma = v[0];
    let l = v.map(|x| x / sigma);
    let lbar = [l[0] - 2.0, l[1] - 2.0 * m.v[0], l[2] - 2.0 * m.v[1], l[3] - 2.0 * m.v[2]];

    let tangent = |a: usize| -> [f64; 4] {
        let mut x = [0.0; 4];
        for i in 0..3 {
            x[i + 1] = u[a][i] + s[a] * theta[i];
        }
        x
    };
    let x1 = tangent(0);
    let n1 = m.inner(&x1, &x1).sqrt();
    if n1 < PIVOT_FLOOR {
        return Err(GeometryError::DegenerateFrame { pivot: n1 });
    }
    let e1 = x1.map(|x| x / n1);
    let x2 = tangent(1);
    let proj = m.inner(&x2, &e1);
    let mut y2 = [0.0; 4];
    for i in 0..4 {
        y2[i] = x2[i] - proj * e1[i];
    }
    let n2 = m.inner(&y2, &y2).sqrt();
    let pivot = n2 / m.inner(&x2, &x2).sqrt();
    if pivot < PIVOT_FLOOR {
        return Err(GeometryError::DegenerateFrame { pivot });
    }
    let e2 = y2.map(|x| x / n2);
    Ok(FramePoint {
        position,
        metric: m,
        sigma,
        l,
        lbar,
        e: [e1, e2],
        eikonal_defect,
    })
}

/// Null frame at every node of `graph`.
pub fn build_null_frame(graph: &FoliationGraph, metric: &SpacetimeMetric) -> Result<NullFrame> {
    let points = (0..graph.times.len())
        .into_par_iter()
        .map(|ti| {
            (0..graph.torus.len())
                .map(|p| {
                    let x = graph.point(ti, p);
                    let t = graph.times[ti];
                    let m = metric.sample(t, x)?;
                    frame_point(graph, m, [t, x[0], x[1], x[2]], ti, p)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullFrame {
        graph: graph.clone(),
        points,
    })
}

/// Connection coefficients on every node, indexed `[time][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoefficients {
    pub times: Vec<f64>,
    /// `chi_ab = <D_{e_a} l, e_b>`.
    pub chi: Vec<Vec<[[f64; 2]; 2]>>,
    /// `l(ln sigma)` from the connection, `<D_l lbar, l> / 2`.
    pub l_ln_sigma: Vec<Vec<f64>>,
    /// `<D_l l, e_a>`: zero for the pregeodesic generators of a null hypersurface,
    /// so its size measures the discretization error of the derivatives.
    pub pregeodesic_defect: Vec<Vec<[f64; 2]>>,
    /// `mu_0ab = <D_l e_a, e_b>`.
    pub mu: Vec<Vec<[[f64; 2]; 2]>>,
}

impl ConnectionCoefficients {
    pub fn max_chi(&self) -> f64 {
        self.chi.iter().flatten().flat_map(|c| c.iter().flatten().copied()).fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_mu(&self) -> f64 {
        self.mu.iter().flatten().flat_map(|c| c.iter().flatten().copied()).fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_pregeodesic_defect(&self) -> f64 {
        self.pregeodesic_defect.iter().flatten().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_l_ln_sigma(&self) -> f64 {
        self.l_ln_sigma.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Mean of `tr chi` over the slice at time index `ti`.
    pub fn mean_trace_chi(&self, ti: usize) -> f64 {
        let s = &self.chi[ti];
        s.iter().map(|c| c[0][0] + c[1][1]).sum::<f64>() / s.len() as f64
    }
}

/// Derivatives of a frame quantity with respect to the graph parameters `(t, x'_1, x'_2)`.
struct Jet {
    dt: Vec<Vec<[f64; 4]>>,
    dx: [Vec<Vec<[f64; 4]>>; 2],
}

fn jet(frame: &NullFrame, pick: impl Fn(&FramePoint) -> [f64; 4] + Sync) -> Jet {
    let graph = &frame.graph;
    let (nt, np) = (graph.times.len(), graph.torus.len());
    let h = graph.time_step();
    let mut dt = vec![vec![[0.0; 4]; np]; nt];
    let mut dx = [vec![vec![[0.0; 4]; np]; nt], vec![vec![[0.0; 4]; np]; nt]];
    for c in 0..4 {
        for p in 0..np {
            let series: Vec<f64> = (0..nt).map(|ti| pick(&frame.points[ti][p])[c]).collect();
            for (ti, row) in dt.iter_mut().enumerate() {
                row[p][c] = fd4(&series, h, ti);
            }
        }
        for ti in 0..nt {
            let slice: Vec<f64> = frame.points[ti].iter().map(|pt| pick(pt)[c]).collect();
            let g = graph.torus.gradient(&slice);
            for a in 0..2 {
                for p in 0..np {
                    dx[a][ti][p][c] = g[a][p];
                }
            }
        }
    }
    Jet { dt, dx }
}

/// `<D_X Y, Z>` given the coordinate derivative `X(Y^mu)`.
fn covariant(m: &MetricSample, dg: &[[[f64; 4]; 4]; 4], x: &[f64; 4], y: &[f64; 4], xy: &[f64; 4], z: &[f64; 4]) -> f64 {
    let g = m.lower();
    let mut s = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            s += g[mu][nu] * z[nu] * xy[mu];
        }
    }
    for nu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let gamma = 0.5 * (dg[a][nu][b] + dg[b][nu][a] - dg[nu][a][b]);
                s += gamma * z[nu] * x[a] * y[b];
            }
        }
    }
    s
}

/// `chi_ab`, `l(ln sigma)` and `mu_0ab` at every frame node.
pub fn second_fundamental_form(frame: &NullFrame) -> ConnectionCoefficients {
    let graph = &frame.graph;
    let (nt, np) = (graph.times.len(), graph.torus.len());
    let l_jet = jet(frame, |p| p.l);
    let lbar_jet = jet(frame, |p| p.lbar);
    let e_jet = [jet(frame, |p| p.e[0]), jet(frame, |p| p.e[1])];

    // param-space components of a tangent vector: (w_t, w_1, w_2)
    let along = |j: &Jet, w: [f64; 3], ti: usize, p: usize| -> [f64; 4] {
        std::array::from_fn(|c| w[0] * j.dt[ti][p][c] + w[1] * j.dx[0][ti][p][c] + w[2] * j.dx[1][ti][p][c])
    };
    let spatial = |v: &[f64; 4]| [v[1], v[2], v[3]];

    let mut out = ConnectionCoefficients {
        times: graph.times.clone(),
        chi: vec![vec![[[0.0; 2]; 2]; np]; nt],
        l_ln_sigma: vec![vec![0.0; np]; nt],
        pregeodesic_defect: vec![vec![[0.0; 2]; np]; nt],
        mu: vec![vec![[[0.0; 2]; 2]; np]; nt],
    };
    for ti in 0..nt {
        for p in 0..np {
            let pt = &frame.points[ti][p];
            let m = &pt.metric;
            let dg = m.lower_derivatives();
            let ls = spatial(&pt.l);
            let w_l = [1.0, dot(&ls, &graph.basis[0]), dot(&ls, &graph.basis[1])];
            let w_e: [[f64; 3]; 2] = std::array::from_fn(|a| {
                let es = spatial(&pt.e[a]);
                [0.0, dot(&es, &graph.basis[0]), dot(&es, &graph.basis[1])]
            });
            for a in 0..2 {
                let el = along(&l_jet, w_e[a], ti, p);
                let le = along(&e_jet[a], w_l, ti, p);
                for b in 0..2 {
                    out.chi[ti][p][a][b] = covariant(m, &dg, &pt.e[a], &pt.l, &el, &pt.e[b]);
                    out.mu[ti][p][a][b] = covariant(m, &dg, &pt.l, &pt.e[a], &le, &pt.e[b]);
                }
            }
            let llbar = along(&lbar_jet, w_l, ti, p);
            out.l_ln_sigma[ti][p] = 0.5 * covariant(m, &dg, &pt.l, &pt.lbar, &llbar, &pt.l);
            let ll = along(&l_jet, w_l, ti, p);
            for a in 0..2 {
                out.pregeodesic_defect[ti][p][a] = covariant(m, &dg, &pt.l, &pt.l, &ll, &pt.e[a]);
            }
        }
    }
    out
}
