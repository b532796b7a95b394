//! Null geodesics of the acoustic metric, parametrized by coordinate time.
//!
//! With `q = xi_0 + v . xi` and `H = (c^2 |xi|^2 - q^2) / 2`, Hamilton's equations
//! divided by `dt/ds = -q` read
//!
//! ```text
//! dx/dt = v - c^2 xi / q,   d xi_alpha / dt = d_alpha H / q.
//! ```

use crate::metric::{dot, MetricSample, SpacetimeMetric};
use crate::{GeometryError, Result};

/// Drift of `2H / (c^2 |xi|^2)` that aborts a ray.
pub const DRIFT_ABORT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            initial_step: 1e-3,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub x: [f64; 3],
    pub xi0: f64,
    pub xi: [f64; 3],
    /// Normalized null defect `2H / (c^2 |xi|^2)`.
    pub null_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicRay {
    pub theta: [f64; 3],
    pub samples: Vec<RaySample>,
}

impl GeodesicRay {
    pub fn max_null_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.null_defect.abs()).fold(0.0, f64::max)
    }
}

type State = [f64; 7];

fn null_defect(m: &MetricSample, y: &State) -> f64 {
    let xi = [y[4], y[5], y[6]];
    2.0 * m.hamiltonian(y[3], &xi) / (m.c2 * dot(&xi, &xi))
}

fn rhs(metric: &SpacetimeMetric, t: f64, y: &State) -> Result<(State, MetricSample)> {
    let x = [y[0], y[1], y[2]];
    let xi = [y[4], y[5], y[6]];
    let m = metric.sample(t, x)?;
    let q = y[3] + dot(&m.v, &xi);
    let xi2 = dot(&xi, &xi);
    let mut out = [0.0; 7];
    for a in 0..3 {
        out[a] = m.v[a] - m.c2 * xi[a] / q;
    }
    for alpha in 0..4 {
        let dh = 0.5 * m.dc2[alpha] * xi2 - q * dot(&m.dv[alpha], &xi);
        out[3 + alpha] = dh / q;
    }
    Ok((out, m))
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One attempted step; returns the fifth-order solution and the scaled error norm.
fn dp_step(metric: &SpacetimeMetric, t: f64, y: &State, h: f64, opts: &RayOptions) -> Result<(State, f64)> {
    let mut k = [[0.0; 7]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..7 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = rhs(metric, t + C[s] * h, &ys)?.0;
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..7 {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4) / scale).abs());
    }
    Ok((y5, err))
}

/// Integrates from `(t0, y)` to `t1`, adapting the step; `h` carries the step suggestion.
fn advance(metric: &SpacetimeMetric, t0: f64, t1: f64, y: &mut State, h: &mut f64, opts: &RayOptions) -> Result<()> {
    let mut t = t0;
    let mut steps = 0;
    while t < t1 {
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };
        let (y5, err) = dp_step(metric, t, y, step, opts)?;
        steps += 1;
        if steps > opts.max_steps {
            return Err(GeometryError::StepSizeUnderflow { time: t });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + step };
            *y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let proposal = step * factor;
        if !last || err > 1.0 {
            *h = proposal;
        }
        if *h < 1e-14 * t1.abs().max(1.0) {
            return Err(GeometryError::StepSizeUnderflow { time: t });
        }
    }
    Ok(())
}

/// Future-directed null covector with spatial part `xi`.
pub fn null_covector(m: &MetricSample, xi: [f64; 3]) -> f64 {
    -dot(&m.v, &xi) - m.c2.sqrt() * dot(&xi, &xi).sqrt()
}

/// Traces the null geodesic leaving `(t0, x0)` with spatial conormal `theta`,
/// recording the state at each of `times` (ascending, all `>= t0`).
pub fn trace_null_geodesic(
    metric: &SpacetimeMetric,
    t0: f64,
    x0: [f64; 3],
    theta: [f64; 3],
    times: &[f64],
    opts: &RayOptions,
) -> Result<GeodesicRay> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(GeometryError::InvalidParameter("output times must ascend from t0".into()));
    }
    let m0 = metric.sample(t0, x0)?;
    let mut y: State = [x0[0], x0[1], x0[2], null_covector(&m0, theta), theta[0], theta[1], theta[2]];
    let mut t = t0;
    let mut h = opts.initial_step;
    let mut samples = Vec::with_capacity(times.len());
    for &target in times {
        // never step across a snapshot time: the time interpolant has kinks there
        let stops: Vec<f64> = metric.time_nodes().filter(|&s| s > t && s < target).chain([target]).collect();
        for stop in stops {
            if stop > t {
                advance(metric, t, stop, &mut y, &mut h, opts)?;
                t = stop;
            }
        }
        let m = metric.sample(t, [y[0], y[1], y[2]])?;
        let defect = null_defect(&m, &y);
        if defect.abs() > DRIFT_ABORT {
            return Err(GeometryError::ConstraintDrift { time: t, drift: defect });
        }
        samples.push(RaySample {
            t,
            x: [y[0], y[1], y[2]],
            xi0: y[3],
            xi: [y[4], y[5], y[6]],
            null_defect: defect,
        });
    }
    Ok(GeodesicRay { theta, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use eulerbench_core::{EquationOfState, FluidState, SnapshotStack};
    use eulerbench_spectral::{Grid, ScalarField, VectorField};

    fn uniform(v: [f64; 3], gamma: f64) -> SpacetimeMetric {
        let grid = Grid::new(8).unwrap();
        let states = (0..9)
            .map(|i| {
                FluidState::new(ScalarField::zeros(grid), VectorField::from_fn(grid, |_| v), i as f64 * 0.125).unwrap()
            })
            .collect();
        let stack = SnapshotStack::with_spacing(states, 0.125, EquationOfState::new(gamma, 1.0).unwrap()).unwrap();
        SpacetimeMetric::new(&stack).unwrap()
    }

    #[test]
    fn flat_rays_are_straight() {
        let m = uniform([0.0; 3], 1.0);
        let theta = [0.6, 0.0, 0.8];
        let times: Vec<f64> = (1..=8).map(|i| i as f64 * 0.1).collect();
        let ray = trace_null_geodesic(&m, 0.0, [1.0, 2.0, 3.0], theta, &times, &RayOptions::default()).unwrap();
        for s in &ray.samples {
            for a in 0..3 {
                assert!((s.x[a] - ([1.0, 2.0, 3.0][a] + theta[a] * s.t)).abs() < 1e-12);
            }
        }
        assert!(ray.max_null_defect() < 1e-14);
    }

    #[test]
    fn drifting_medium_adds_its_velocity() {
        let v0 = [0.2, -0.1, 0.05];
        let m = uniform(v0, 5.0 / 3.0);
        let c = (5.0f64 / 3.0).sqrt();
        let theta = [0.0, 1.0, 0.0];
        let ray = trace_null_geodesic(&m, 0.1, [0.0; 3], theta, &[0.5, 0.9], &RayOptions::default()).unwrap();
        for s in &ray.samples {
            for a in 0..3 {
                let exact = (v0[a] + c * theta[a]) * (s.t - 0.1);
                assert!((s.x[a] - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn leaving_the_stack_is_an_error() {
        let m = uniform([0.0; 3], 1.0);
        let r = trace_null_geodesic(&m, 0.0, [0.0; 3], [1.0, 0.0, 0.0], &[2.0], &RayOptions::default());
        assert!(matches!(r, Err(GeometryError::LeftDomain { .. })));
    }
}
