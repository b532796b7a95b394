//! Time integration of
//!
//! ```text
//! T v = -c_s^2 grad rho,   T rho = -div v,   T = d_t + v . grad
//! ```
//!
//! by classical RK4 with 2/3-rule dealiasing of the tendency.

use std::f64::consts::PI;

use eulerbench_spectral::random::random_band_limited;
use eulerbench_spectral::{curl, gradient, jacobian, Grid, ScalarField, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::fluid_state::{sound_speed, EquationOfState, FluidState};
use crate::harmonic::sobolev_pair_norm;

/// Any sample beyond this magnitude counts as blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e6;
/// Largest CFL number accepted in CFL-controlled runs.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct Tendency {
    pub d_rho: ScalarField,
    pub d_v: VectorField,
}

/// `(d rho/dt, dv/dt)` in transport form, dealiased.
pub fn rhs(state: &FluidState, eos: &EquationOfState) -> Tendency {
    let rho = state.rho_log();
    let v = state.velocity();
    let gr = gradient(rho);
    let jv = jacobian(v);
    let c2 = rho.map(|r| eos.sound_speed_sq_at(r));
    let n = rho.grid().len();
    let (v0, v1, v2) = (v.component(0).values(), v.component(1).values(), v.component(2).values());
    let g = [gr.component(0).values(), gr.component(1).values(), gr.component(2).values()];
    let j = |a: usize, b: usize| jv[a][b].values();

    let mut d_rho = vec![0.0; n];
    for p in 0..n {
        let adv = v0[p] * g[0][p] + v1[p] * g[1][p] + v2[p] * g[2][p];
        let div = j(0, 0)[p] + j(1, 1)[p] + j(2, 2)[p];
        d_rho[p] = -adv - div;
    }
    let d_v: [ScalarField; 3] = std::array::from_fn(|a| {
        let mut out = vec![0.0; n];
        let (ja0, ja1, ja2) = (j(a, 0), j(a, 1), j(a, 2));
        let c2v = c2.values();
        for p in 0..n {
            let adv = v0[p] * ja0[p] + v1[p] * ja1[p] + v2[p] * ja2[p];
            out[p] = -adv - c2v[p] * g[a][p];
        }
        ScalarField::from_values_unchecked(rho.grid(), out).dealias()
    });
    let [x, y, z] = d_v;
    Tendency {
        d_rho: ScalarField::from_values_unchecked(rho.grid(), d_rho).dealias(),
        d_v: VectorField::from_components(x, y, z).expect("shared grid"),
    }
}

/// Coefficient matrix `A_i(U)` of `U_t + sum_i A_i U_{x_i} = 0` at one point,
/// for `U = (rho, v1, v2, v3)`.
pub fn coefficient_matrix(i: usize, v: [f64; 3], c2: f64) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    for (d, row) in a.iter_mut().enumerate() {
        row[d] = v[i];
    }
    a[0][i + 1] = 1.0;
    a[i + 1][0] = c2;
    a
}

/// `diag(c^2, 1, 1, 1)`, which makes every `A_0 A_i` symmetric.
pub fn symmetrizer(c2: f64) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    a[0][0] = c2;
    a[1][1] = 1.0;
    a[2][2] = 1.0;
    a[3][3] = 1.0;
    a
}

/// The same tendency assembled as `-sum_i A_i(U) d_i U`.
pub fn rhs_matrix_form(state: &FluidState, eos: &EquationOfState) -> Tendency {
    let grid = state.grid();
    let fields = [
        state.rho_log(),
        state.velocity().component(0),
        state.velocity().component(1),
        state.velocity().component(2),
    ];
    // dU[c][i] = d_i U_c
    let du: Vec<[ScalarField; 3]> = fields
        .iter()
        .map(|f| {
            let g = gradient(f);
            g.into_components()
        })
        .collect();
    let n = grid.len();
    let mut out = vec![vec![0.0; n]; 4];
    for p in 0..n {
        let v = [fields[1][p], fields[2][p], fields[3][p]];
        let c2 = eos.sound_speed_sq_at(fields[0][p]);
        for i in 0..3 {
            let a = coefficient_matrix(i, v, c2);
            for r in 0..4 {
                let mut s = 0.0;
                for c in 0..4 {
                    s += a[r][c] * du[c][i][p];
                }
                out[r][p] -= s;
            }
        }
    }
    let mut it = out.into_iter().map(|o| ScalarField::from_values_unchecked(grid, o).dealias());
    let d_rho = it.next().unwrap();
    let x = it.next().unwrap();
    let y = it.next().unwrap();
    let z = it.next().unwrap();
    Tendency {
        d_rho,
        d_v: VectorField::from_components(x, y, z).expect("shared grid"),
    }
}

/// `dt (max|v| + max c_s) n / L`.
pub fn cfl_number(state: &FluidState, eos: &EquationOfState, dt: f64) -> f64 {
    let g = state.grid();
    let vmax = state.velocity().linf_norm();
    let cmax = sound_speed(state, eos).max();
    dt * (vmax + cmax) * g.n() as f64 / g.length()
}

fn stage(state: &FluidState, k: &Tendency, a: f64, t: f64) -> FluidState {
    FluidState::from_parts_unchecked(
        state.rho_log().axpy(a, &k.d_rho),
        state.velocity().axpy(a, &k.d_v),
        t,
    )
}

/// One classical RK4 step. With `cfl_limit` set, rejects steps above that CFL number.
pub fn step_rk4(state: &FluidState, eos: &EquationOfState, dt: f64, cfl_limit: Option<f64>) -> Result<FluidState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CoreError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if let Some(limit) = cfl_limit {
        let cfl = cfl_number(state, eos, dt);
        if cfl > limit {
            return Err(CoreError::CflViolation { cfl, limit });
        }
    }
    let t = state.time();
    let k1 = rhs(state, eos);
    let k2 = rhs(&stage(state, &k1, 0.5 * dt, t + 0.5 * dt), eos);
    let k3 = rhs(&stage(state, &k2, 0.5 * dt, t + 0.5 * dt), eos);
    let k4 = rhs(&stage(state, &k3, dt, t + dt), eos);
    let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
    let rho = ScalarField::linear_combination(&[
        (1.0, state.rho_log()),
        (w[0], &k1.d_rho),
        (w[1], &k2.d_rho),
        (w[2], &k3.d_rho),
        (w[3], &k4.d_rho),
    ]);
    let v: [ScalarField; 3] = std::array::from_fn(|a| {
        ScalarField::linear_combination(&[
            (1.0, state.velocity().component(a)),
            (w[0], k1.d_v.component(a)),
            (w[1], k2.d_v.component(a)),
            (w[2], k3.d_v.component(a)),
            (w[3], k4.d_v.component(a)),
        ])
    });
    let [x, y, z] = v;
    let next = FluidState::from_parts_unchecked(rho, VectorField::from_components(x, y, z)?, t + dt);
    let norm = next.sup_norm();
    if !next.is_finite() || norm > BLOWUP_THRESHOLD {
        return Err(CoreError::BlowupDetected {
            time: t + dt,
            norm: if norm.is_finite() { norm } else { f64::INFINITY },
        });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Target CFL number; the step is fixed from the initial state.
    Cfl(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant { rho: f64, velocity: [f64; 3] },
    /// `v = (amplitude sin(mode x2), 0, 0)`, `rho = 0`.
    Shear { amplitude: f64, mode: i64 },
    /// `rho = amplitude cos(k . x)`, `v = 0`.
    AcousticMode { amplitude: f64, k: [i64; 3] },
    /// Independent random fields on `1 <= |k| <= band`, each with sup norm `amplitude`.
    RandomBandLimited { band: f64, amplitude: f64 },
    /// Divergence-free swirl `curl(0, 0, psi)` with `psi` a smooth bump of the given radius
    /// centred in the box; sup of `|v|` equals `amplitude`.
    VorticalBump { amplitude: f64, radius: f64 },
    /// Random `rho` and `v = grad psi`, both band-limited with sup norm `amplitude`.
    Irrotational { band: f64, amplitude: f64 },
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Shear { .. } => "shear",
            Self::AcousticMode { .. } => "acoustic_mode",
            Self::RandomBandLimited { .. } => "random_band_limited",
            Self::VorticalBump { .. } => "vortical_bump",
            Self::Irrotational { .. } => "irrotational",
        }
    }

    pub fn build(&self, grid: Grid, seed: u64) -> Result<FluidState> {
        let state = match *self {
            Self::Constant { rho, velocity } => FluidState::from_parts_unchecked(
                ScalarField::constant(grid, rho),
                VectorField::from_fn(grid, |_| velocity),
                0.0,
            ),
            Self::Shear { amplitude, mode } => FluidState::from_parts_unchecked(
                ScalarField::zeros(grid),
                VectorField::from_fn(grid, |x| [amplitude * (mode as f64 * grid.k0() * x[1]).sin(), 0.0, 0.0]),
                0.0,
            ),
            Self::AcousticMode { amplitude, k } => {
                let k0 = grid.k0();
                FluidState::from_parts_unchecked(
                    ScalarField::from_fn(grid, |x| {
                        amplitude * (k0 * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2])).cos()
                    }),
                    VectorField::zeros(grid),
                    0.0,
                )
            }
            Self::RandomBandLimited { band, amplitude } => {
                if band < 1.0 {
                    return Err(CoreError::InvalidParameter(format!("band must be >= 1, got {band}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_band_limited(grid, band, amplitude, &mut rng);
                let [x, y, z] = std::array::from_fn(|_| random_band_limited(grid, band, amplitude, &mut rng));
                FluidState::from_parts_unchecked(rho, VectorField::from_components(x, y, z)?, 0.0)
            }
            Self::Irrotational { band, amplitude } => {
                if band < 1.0 {
                    return Err(CoreError::InvalidParameter(format!("band must be >= 1, got {band}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_band_limited(grid, band, amplitude, &mut rng);
                let psi = random_band_limited(grid, band, 1.0, &mut rng);
                let v = gradient(&psi);
                let v = v.scale(amplitude / v.linf_norm());
                FluidState::from_parts_unchecked(rho, v, 0.0)
            }
            Self::VorticalBump { amplitude, radius } => {
                let half = 0.5 * grid.length();
                if !(radius > 0.0 && radius < half) {
                    return Err(CoreError::InvalidParameter(format!(
                        "bump radius must lie in (0, {half}), got {radius}"
                    )));
                }
                let psi = ScalarField::from_fn(grid, |x| {
                    let r2 = ((x[0] - half).powi(2) + (x[1] - half).powi(2) + (x[2] - half).powi(2)) / (radius * radius);
                    if r2 < 1.0 {
                        (1.0 - 1.0 / (1.0 - r2)).exp()
                    } else {
                        0.0
                    }
                });
                let z = ScalarField::zeros(grid);
                let v = curl(&VectorField::from_components(z.clone(), z, psi)?).dealias();
                let m = v.linf_norm();
                let v = if m > 0.0 { v.scale(amplitude / m) } else { v };
                FluidState::from_parts_unchecked(ScalarField::zeros(grid), v, 0.0)
            }
        };
        FluidState::new(state.rho_log().clone(), state.velocity().clone(), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub length: f64,
    pub eos: EquationOfState,
    pub t_end: f64,
    pub time_step: TimeStep,
    pub snap_every: usize,
    pub initial: InitialData,
    /// Hyperbolicity floor `c_0`: the run aborts if `min c_s < c_0`.
    pub c0: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, initial: InitialData, t_end: f64, time_step: TimeStep) -> Self {
        Self {
            n,
            length: 2.0 * PI,
            eos: EquationOfState::default(),
            t_end,
            time_step,
            snap_every: 1,
            initial,
            c0: 0.1,
            seed: 0,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::with_params(self.n, self.length, Grid::DEFAULT_DEALIAS)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.c0 > 0.0) {
            return Err(CoreError::InvalidParameter(format!("c0 must be positive, got {}", self.c0)));
        }
        if self.snap_every == 0 {
            return Err(CoreError::InvalidParameter("snap_every must be >= 1".into()));
        }
        match self.time_step {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                Err(CoreError::InvalidParameter(format!("dt must be positive, got {dt}")))
            }
            TimeStep::Cfl(c) if !(c > 0.0 && c <= CFL_LIMIT) => Err(CoreError::InvalidParameter(format!(
                "cfl must lie in (0, {CFL_LIMIT}], got {c}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn initial_state(&self) -> Result<FluidState> {
        self.validate()?;
        self.initial.build(self.grid()?, self.seed)
    }

    /// Step count and uniform step covering `[0, t_end]` exactly.
    pub fn schedule(&self, initial: &FluidState) -> (usize, f64) {
        let nominal = match self.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) => {
                let unit = cfl_number(initial, &self.eos, 1.0);
                c / unit
            }
        };
        let ratio = self.t_end / nominal;
        let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        }
        .max(1);
        (steps, self.t_end / steps as f64)
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub dt_snap: f64,
    pub snapshots: usize,
    pub final_time: f64,
}

/// Integrate and hand every recorded snapshot (including `t = 0`) to `observer`.
pub fn simulate_with(config: &SimConfig, mut observer: impl FnMut(&FluidState) -> Result<()>) -> Result<RunSummary> {
    let mut state = config.initial_state()?;
    let (steps, dt) = config.schedule(&state);
    let cfl_limit = matches!(config.time_step, TimeStep::Cfl(_)).then_some(CFL_LIMIT);
    let eos = config.eos;
    check_hyperbolicity(&state, &eos, config.c0)?;
    observer(&state)?;
    let mut snapshots = 1;
    for k in 1..=steps {
        state = step_rk4(&state, &eos, dt, cfl_limit)?.with_time(k as f64 * dt);
        check_hyperbolicity(&state, &eos, config.c0)?;
        if k % config.snap_every == 0 {
            observer(&state)?;
            snapshots += 1;
        }
    }
    Ok(RunSummary {
        steps,
        dt,
        dt_snap: dt * config.snap_every as f64,
        snapshots,
        final_time: state.time(),
    })
}

fn check_hyperbolicity(state: &FluidState, eos: &EquationOfState, c0: f64) -> Result<()> {
    let min_sound_speed = sound_speed(state, eos).min();
    if !(min_sound_speed >= c0) {
        return Err(CoreError::HyperbolicityLost {
            time: state.time(),
            min_sound_speed,
            floor: c0,
        });
    }
    Ok(())
}

pub fn simulate(config: &SimConfig) -> Result<SnapshotStack> {
    let mut states = Vec::new();
    let summary = simulate_with(config, |s| {
        states.push(s.clone());
        Ok(())
    })?;
    SnapshotStack::with_spacing(states, summary.dt_snap, config.eos)
}

/// Uniformly spaced states for discrete time derivatives.
#[derive(Debug, Clone)]
pub struct SnapshotStack {
    states: Vec<FluidState>,
    dt_snap: f64,
    eos: EquationOfState,
}

impl SnapshotStack {
    /// Infers the spacing from the first two states.
    pub fn new(states: Vec<FluidState>, eos: EquationOfState) -> Result<Self> {
        let dt = if states.len() >= 2 {
            states[1].time() - states[0].time()
        } else {
            1.0
        };
        Self::with_spacing(states, dt, eos)
    }

    pub fn with_spacing(states: Vec<FluidState>, dt_snap: f64, eos: EquationOfState) -> Result<Self> {
        if states.is_empty() {
            return Err(CoreError::InvalidParameter("empty snapshot stack".into()));
        }
        if !(dt_snap > 0.0) {
            return Err(CoreError::InvalidParameter(format!("dt_snap must be positive, got {dt_snap}")));
        }
        let grid = states[0].grid();
        for (i, w) in states.windows(2).enumerate() {
            if w[1].grid() != grid {
                return Err(eulerbench_spectral::SpectralError::GridMismatch.into());
            }
            let tol = 1e-14 * w[1].time().abs().max(1.0) * 8.0;
            if ((w[1].time() - w[0].time()) - dt_snap).abs() > tol {
                return Err(CoreError::NonUniformSpacing { index: i + 1 });
            }
        }
        Ok(Self { states, dt_snap, eos })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[FluidState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FluidState {
        &self.states[i]
    }

    pub fn dt_snap(&self) -> f64 {
        self.dt_snap
    }

    pub fn eos(&self) -> &EquationOfState {
        &self.eos
    }

    pub fn grid(&self) -> Grid {
        self.states[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(FluidState::time).collect()
    }

    /// Error unless `index +- half_width` lies inside the stack.
    pub fn require_stencil(&self, index: usize, half_width: usize) -> Result<()> {
        if index < half_width || index + half_width >= self.states.len() {
            return Err(CoreError::StencilOutOfRange {
                index,
                half_width,
                len: self.states.len(),
            });
        }
        Ok(())
    }

    /// Every `stride`-th state, keeping index 0.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let states = self.states.iter().step_by(stride.max(1)).cloned().collect();
        Self::with_spacing(states, self.dt_snap * stride.max(1) as f64, self.eos)
    }

    /// States `center - half_width ..= center + half_width`.
    pub fn window(&self, center: usize, half_width: usize) -> Result<Self> {
        self.require_stencil(center, half_width)?;
        Self::with_spacing(
            self.states[center - half_width..=center + half_width].to_vec(),
            self.dt_snap,
            self.eos,
        )
    }
}

/// Fourth-order central difference weights on `i-2..=i+2`, to be divided by `h`.
pub const CENTRAL_WEIGHTS: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];

/// `d/dt` at the centre of five equally spaced samples.
pub fn central_derivative(samples: [&ScalarField; 5], h: f64) -> ScalarField {
    let w = CENTRAL_WEIGHTS;
    ScalarField::linear_combination(&[
        (w[0] / h, samples[0]),
        (w[1] / h, samples[1]),
        (w[3] / h, samples[3]),
        (w[4] / h, samples[4]),
    ])
}

/// Random perturbation of given sup-norm size added to every field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub size: f64,
    pub band: f64,
    pub seed: u64,
}

impl Perturbation {
    pub fn apply(&self, state: &FluidState) -> Result<FluidState> {
        let grid = state.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let dr = random_band_limited(grid, self.band, self.size, &mut rng);
        let [x, y, z] = std::array::from_fn(|_| random_band_limited(grid, self.band, self.size, &mut rng));
        let dv = VectorField::from_components(x, y, z)?;
        FluidState::new(state.rho_log().add(&dr), state.velocity().add(&dv), state.time())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `||(v - phi, rho - psi)||_{H^{s-1}}` at each snapshot.
    pub distances: Vec<f64>,
    /// `sup_t dist(t) / dist(0)`.
    pub amplification: f64,
    /// Smallest `C >= 0` with `dist(t) <= dist(0) e^{C t}` at every sample.
    pub growth_rate: f64,
}

/// Run the base configuration and a perturbed copy side by side.
pub fn stability_compare(config: &SimConfig, perturbation: &Perturbation, s: f64) -> Result<StabilityReport> {
    let base0 = config.initial_state()?;
    let pert0 = perturbation.apply(&base0)?;
    let (steps, dt) = config.schedule(&base0);
    let eos = config.eos;
    let cfl_limit = matches!(config.time_step, TimeStep::Cfl(_)).then_some(CFL_LIMIT);
    let (mut a, mut b) = (base0, pert0);
    let mut times = vec![0.0];
    let mut distances = vec![sobolev_pair_norm(&a, &b, s - 1.0)];
    for k in 1..=steps {
        let (na, nb) = rayon::join(
            || step_rk4(&a, &eos, dt, cfl_limit),
            || step_rk4(&b, &eos, dt, cfl_limit),
        );
        a = na?.with_time(k as f64 * dt);
        b = nb?.with_time(k as f64 * dt);
        check_hyperbolicity(&a, &eos, config.c0)?;
        check_hyperbolicity(&b, &eos, config.c0)?;
        if k % config.snap_every == 0 {
            times.push(a.time());
            distances.push(sobolev_pair_norm(&a, &b, s - 1.0));
        }
    }
    let d0 = distances[0];
    let (amplification, growth_rate) = if d0 > 0.0 {
        let amp = distances.iter().fold(0.0f64, |m, d| m.max(d / d0));
        let rate = times
            .iter()
            .zip(&distances)
            .filter(|(t, _)| **t > 0.0)
            .map(|(t, d)| (d / d0).ln() / t)
            .fold(0.0f64, f64::max);
        (amp, rate)
    } else {
        (if distances.iter().all(|d| *d == 0.0) { 1.0 } else { f64::INFINITY }, 0.0)
    };
    Ok(StabilityReport {
        times,
        distances,
        amplification,
        growth_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(f: &ScalarField) -> f64 {
        f.linf_norm()
    }

    #[test]
    fn constant_state_is_fixed_point() {
        let g = Grid::new(8).unwrap();
        let s = InitialData::Constant {
            rho: 0.3,
            velocity: [0.2, -0.1, 0.05],
        }
        .build(g, 0)
        .unwrap();
        let t = rhs(&s, &EquationOfState::default());
        assert!(max_abs(&t.d_rho) < 1e-15);
        assert!(t.d_v.linf_norm() < 1e-15);
    }

    #[test]
    fn shear_is_steady() {
        let g = Grid::new(16).unwrap();
        let s = InitialData::Shear { amplitude: 0.5, mode: 2 }.build(g, 0).unwrap();
        let t = rhs(&s, &EquationOfState::default());
        assert!(max_abs(&t.d_rho) < 1e-14);
        assert!(t.d_v.linf_norm() < 1e-14);
    }

    #[test]
    fn isothermal_density_mode() {
        let g = Grid::new(16).unwrap();
        let eps = 1e-3;
        let s = FluidState::new(ScalarField::from_fn(g, |x| eps * x[0].sin()), VectorField::zeros(g), 0.0).unwrap();
        let t = rhs(&s, &EquationOfState::new(1.0, 1.0).unwrap());
        let expect = ScalarField::from_fn(g, |x| -eps * x[0].cos());
        assert!(t.d_v.component(0).sub(&expect).linf_norm() < 1e-16);
        assert!(max_abs(&t.d_rho) < 1e-17);
    }

    #[test]
    fn coefficient_matrices_are_symmetrizable() {
        let v = [0.3, -0.2, 0.7];
        let c2 = 1.7;
        let a0 = symmetrizer(c2);
        for i in 0..3 {
            let a = coefficient_matrix(i, v, c2);
            let mut m = [[0.0; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] = (0..4).map(|k| a0[r][k] * a[k][c]).sum();
                }
            }
            for r in 0..4 {
                for c in 0..4 {
                    assert!((m[r][c] - m[c][r]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn cfl_guard() {
        let g = Grid::new(16).unwrap();
        let s = FluidState::rest(g);
        let eos = EquationOfState::default();
        assert!(matches!(step_rk4(&s, &eos, 1.0, Some(0.5)), Err(CoreError::CflViolation { .. })));
        assert!(step_rk4(&s, &eos, 1e-3, Some(0.5)).is_ok());
    }

    #[test]
    fn stencil_range_checked() {
        let g = Grid::new(8).unwrap();
        let states = (0..5).map(|k| FluidState::rest(g).with_time(0.1 * k as f64)).collect();
        let st = SnapshotStack::new(states, EquationOfState::default()).unwrap();
        assert!(st.require_stencil(2, 2).is_ok());
        assert!(matches!(st.require_stencil(1, 2), Err(CoreError::StencilOutOfRange { .. })));
        assert!(matches!(st.require_stencil(3, 2), Err(CoreError::StencilOutOfRange { .. })));
    }

    #[test]
    fn non_uniform_spacing_rejected() {
        let g = Grid::new(8).unwrap();
        let ts = [0.0, 0.1, 0.25];
        let states = ts.iter().map(|&t| FluidState::rest(g).with_time(t)).collect();
        assert!(matches!(
            SnapshotStack::new(states, EquationOfState::default()),
            Err(CoreError::NonUniformSpacing { index: 2 })
        ));
    }

    #[test]
    fn central_stencil_exact_on_quartics() {
        let g = Grid::new(8).unwrap();
        let h = 0.1;
        let fs: Vec<ScalarField> = (0..5)
            .map(|k| {
                let t = 0.3 + h * (k as f64 - 2.0);
                ScalarField::constant(g, t.powi(4) - 2.0 * t * t + t)
            })
            .collect();
        let d = central_derivative([&fs[0], &fs[1], &fs[2], &fs[3], &fs[4]], h);
        let t: f64 = 0.3;
        let exact = 4.0 * t.powi(3) - 4.0 * t + 1.0;
        assert!((d[0] - exact).abs() < 1e-12);
    }
}
