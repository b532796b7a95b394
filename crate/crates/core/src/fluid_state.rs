//! State `(rho, v)` in log-density variables, thermodynamics and the acoustic metric.

use eulerbench_spectral::{curl, ops, solve_neg_laplacian, Grid, ScalarField, VectorField};

use crate::error::{CoreError, Result};

/// Smallest admissible `exp(rho)`.
pub const VACUUM_FLOOR: f64 = 1e-6;

/// Polytropic law `p = (rho_bar e^rho)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationOfState {
    gamma: f64,
    rho_bar: f64,
}

impl Default for EquationOfState {
    fn default() -> Self {
        Self {
            gamma: 5.0 / 3.0,
            rho_bar: 1.0,
        }
    }
}

impl EquationOfState {
    pub fn new(gamma: f64, rho_bar: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(CoreError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(rho_bar.is_finite() && rho_bar > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "rho_bar must be positive, got {rho_bar}"
            )));
        }
        Ok(Self { gamma, rho_bar })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// `c_s^2 = gamma (rho_bar e^rho)^(gamma - 1)`.
    #[inline]
    pub fn sound_speed_sq_at(&self, rho_log: f64) -> f64 {
        self.gamma * ((self.gamma - 1.0) * (self.rho_bar.ln() + rho_log)).exp()
    }

    /// `c_s' / c_s = (gamma - 1) / 2`.
    #[inline]
    pub fn log_derivative(&self) -> f64 {
        0.5 * (self.gamma - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    rho_log: ScalarField,
    velocity: VectorField,
    time: f64,
}

impl FluidState {
    /// Validated constructor: common grid, finite samples, density above the vacuum floor.
    pub fn new(rho_log: ScalarField, velocity: VectorField, time: f64) -> Result<Self> {
        if rho_log.grid() != velocity.grid() {
            return Err(eulerbench_spectral::SpectralError::GridMismatch.into());
        }
        if let Some(i) = rho_log.values().iter().position(|x| !x.is_finite()) {
            return Err(eulerbench_spectral::SpectralError::NonFinite { index: i }.into());
        }
        for c in velocity.components() {
            if let Some(i) = c.values().iter().position(|x| !x.is_finite()) {
                return Err(eulerbench_spectral::SpectralError::NonFinite { index: i }.into());
            }
        }
        let min_density = rho_log.min().exp();
        if !(min_density > VACUUM_FLOOR) {
            return Err(CoreError::VacuumState { min_density });
        }
        Ok(Self {
            rho_log,
            velocity,
            time,
        })
    }

    /// For intermediate integrator stages; callers check validity themselves.
    pub fn from_parts_unchecked(rho_log: ScalarField, velocity: VectorField, time: f64) -> Self {
        Self {
            rho_log,
            velocity,
            time,
        }
    }

    pub fn rest(grid: Grid) -> Self {
        Self::from_parts_unchecked(ScalarField::zeros(grid), VectorField::zeros(grid), 0.0)
    }

    pub fn grid(&self) -> Grid {
        self.rho_log.grid()
    }

    pub fn rho_log(&self) -> &ScalarField {
        &self.rho_log
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn into_parts(self) -> (ScalarField, VectorField, f64) {
        (self.rho_log, self.velocity, self.time)
    }

    /// Largest absolute sample over all four fields.
    pub fn sup_norm(&self) -> f64 {
        self.velocity
            .components()
            .iter()
            .map(|c| c.linf_norm())
            .fold(self.rho_log.linf_norm(), f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.rho_log.is_finite() && self.velocity.is_finite()
    }

    /// Total mass `integral e^rho`.
    pub fn mass(&self) -> f64 {
        self.rho_log.map(f64::exp).integral()
    }
}

pub fn sound_speed_sq(state: &FluidState, eos: &EquationOfState) -> ScalarField {
    state.rho_log.map(|r| eos.sound_speed_sq_at(r))
}

pub fn sound_speed(state: &FluidState, eos: &EquationOfState) -> ScalarField {
    state.rho_log.map(|r| eos.sound_speed_sq_at(r).sqrt())
}

/// `c_s' = d c_s / d rho`.
pub fn sound_speed_derivative(state: &FluidState, eos: &EquationOfState) -> ScalarField {
    let k = eos.log_derivative();
    sound_speed(state, eos).map(|c| k * c)
}

/// `T f = f_t + v . grad f`.
pub fn convective_derivative(f: &ScalarField, f_t: &ScalarField, state: &FluidState) -> ScalarField {
    let g = eulerbench_spectral::gradient(f);
    f_t.add(&state.velocity.dot(&g))
}

/// `v . grad f` for a scalar.
pub fn advect(f: &ScalarField, v: &VectorField) -> ScalarField {
    v.dot(&eulerbench_spectral::gradient(f))
}

/// `(v . grad) u` componentwise.
pub fn advect_vector(u: &VectorField, v: &VectorField) -> VectorField {
    u.map_components(|c| advect(c, v))
}

/// `w = e^{-rho} curl v`.
pub fn specific_vorticity(state: &FluidState) -> VectorField {
    let e = state.rho_log.map(|r| (-r).exp());
    curl(&state.velocity).mul_scalar(&e)
}

/// Pointwise acoustic metric `g` and its inverse.
#[derive(Debug, Clone)]
pub struct AcousticMetric {
    lower: Vec<ScalarField>,
    upper: Vec<ScalarField>,
}

/// Upper-triangle offset table for 4x4 symmetric storage.
const OFFSET: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

impl AcousticMetric {
    /// `g_{ab}` (index 0 is time).
    pub fn lower(&self, a: usize, b: usize) -> &ScalarField {
        &self.lower[OFFSET[a][b]]
    }

    /// `g^{ab}`.
    pub fn upper(&self, a: usize, b: usize) -> &ScalarField {
        &self.upper[OFFSET[a][b]]
    }

    pub fn grid(&self) -> Grid {
        self.lower[0].grid()
    }

    /// `max |g g^{-1} - I|` over all points and entries.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.grid().len();
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for a in 0..4 {
                for c in 0..4 {
                    let mut s = 0.0;
                    for b in 0..4 {
                        s += self.lower(a, b)[p] * self.upper(b, c)[p];
                    }
                    let target = if a == c { 1.0 } else { 0.0 };
                    worst = worst.max((s - target).abs());
                }
            }
        }
        worst
    }
}

/// `g = -dt^2 + c^{-2} sum_a (dx^a - v^a dt)^2`, `g^{-1} = -T (x) T + c^2 sum_i d_i (x) d_i`.
pub fn acoustic_metric(state: &FluidState, eos: &EquationOfState) -> AcousticMetric {
    let grid = state.grid();
    let c2 = sound_speed_sq(state, eos);
    let v = &state.velocity;
    let inv_c2 = c2.map(|x| 1.0 / x);
    let vv = v.dot(v);
    let mut lower = vec![ScalarField::zeros(grid); 10];
    let mut upper = vec![ScalarField::zeros(grid); 10];
    lower[OFFSET[0][0]] = vv.zip_map(&inv_c2, |s, ic| -1.0 + s * ic);
    upper[OFFSET[0][0]] = ScalarField::constant(grid, -1.0);
    for a in 0..3 {
        let va = v.component(a);
        lower[OFFSET[0][a + 1]] = va.zip_map(&inv_c2, |x, ic| -x * ic);
        upper[OFFSET[0][a + 1]] = va.scale(-1.0);
        for b in a..3 {
            let vb = v.component(b);
            lower[OFFSET[a + 1][b + 1]] = if a == b { inv_c2.clone() } else { ScalarField::zeros(grid) };
            let vab = va.mul(vb);
            upper[OFFSET[a + 1][b + 1]] = if a == b { c2.sub(&vab) } else { vab.scale(-1.0) };
        }
    }
    AcousticMetric { lower, upper }
}

/// Quantities derived from one state.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    /// Specific vorticity `e^{-rho} curl v`.
    pub w: VectorField,
    /// `e^{-rho} curl w`.
    pub omega_cap: VectorField,
    /// Zero-mean solution of `-Δ eta = e^rho curl w - m`.
    pub eta: VectorField,
    pub v_plus: VectorField,
    /// Spatial mean `m` of `e^rho curl w`, removed before inversion.
    ///
    /// It equals the mean of `-grad rho x curl v`, which need not vanish on the torus.
    pub source_mean: [f64; 3],
}

pub fn derived_fields(state: &FluidState) -> Result<DerivedFields> {
    let w = specific_vorticity(state);
    let cw = curl(&w);
    let e_minus = state.rho_log.map(|r| (-r).exp());
    let e_plus = state.rho_log.map(f64::exp);
    let omega_cap = cw.mul_scalar(&e_minus);
    let source = cw.mul_scalar(&e_plus);
    let source_mean = source.mean();
    let eta_components: Vec<ScalarField> = source
        .components()
        .iter()
        .map(|s| solve_neg_laplacian(&s.zero_mean()))
        .collect::<std::result::Result<_, _>>()?;
    let [ex, ey, ez]: [ScalarField; 3] = eta_components.try_into().expect("three components");
    let eta = VectorField::from_components(ex, ey, ez)?;
    let v_plus = state.velocity.sub(&eta);
    Ok(DerivedFields {
        w,
        omega_cap,
        eta,
        v_plus,
        source_mean,
    })
}

/// `-Δ eta - (e^rho curl w - m)`, the inversion defect.
pub fn eta_defect(state: &FluidState, d: &DerivedFields) -> VectorField {
    let e_plus = state.rho_log.map(f64::exp);
    let source = curl(&d.w).mul_scalar(&e_plus);
    let lap = ops::vector_laplacian(&d.eta).scale(-1.0);
    let mut out = lap.sub(&source);
    out = VectorField::new(std::array::from_fn(|a| out.component(a).add_constant(d.source_mean[a])))
        .expect("shared grid");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::new(8).unwrap()
    }

    #[test]
    fn sound_speed_examples() {
        let g = grid();
        let eos = EquationOfState::new(2.0, 1.0).unwrap();
        let s = FluidState::rest(g);
        assert_relative_eq!(sound_speed(&s, &eos)[3], 2f64.sqrt(), epsilon = 1e-15);

        let eos1 = EquationOfState::new(1.0, 1.0).unwrap();
        let s = FluidState::from_parts_unchecked(ScalarField::constant(g, 0.7), VectorField::zeros(g), 0.0);
        assert_relative_eq!(sound_speed(&s, &eos1)[0], 1.0, epsilon = 1e-15);
        assert_eq!(sound_speed_derivative(&s, &eos1)[0], 0.0);

        let eos3 = EquationOfState::new(3.0, 1.0).unwrap();
        let s = FluidState::from_parts_unchecked(ScalarField::constant(g, 2f64.ln()), VectorField::zeros(g), 0.0);
        // p = rho^3 => dp/drho = 3 rho^2 = 12 at rho = 2.
        assert_relative_eq!(sound_speed_sq(&s, &eos3)[0], 12.0, epsilon = 1e-13);
    }

    #[test]
    fn vacuum_and_parameters_rejected() {
        let g = grid();
        let r = ScalarField::constant(g, -20.0);
        assert!(matches!(
            FluidState::new(r, VectorField::zeros(g), 0.0),
            Err(CoreError::VacuumState { .. })
        ));
        assert!(EquationOfState::new(0.0, 1.0).is_err());
        assert!(EquationOfState::new(1.4, -1.0).is_err());
    }

    #[test]
    fn metric_examples() {
        let g = grid();
        let eos = EquationOfState::new(1.0, 1.0).unwrap();
        let s = FluidState::from_parts_unchecked(
            ScalarField::zeros(g),
            VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]),
            0.0,
        );
        let m = acoustic_metric(&s, &eos);
        assert_eq!(m.upper(0, 0)[5], -1.0);
        assert_eq!(m.upper(0, 1)[5], -1.0);
        assert_eq!(m.upper(1, 1)[5], 0.0);
        assert_eq!(m.upper(2, 2)[5], 1.0);
        assert_eq!(m.upper(3, 3)[5], 1.0);
        assert!(m.inverse_defect() < 1e-14);

        let eos = EquationOfState::default();
        let rest = acoustic_metric(&FluidState::rest(g), &eos);
        let c2 = eos.sound_speed_sq_at(0.0);
        assert_eq!(rest.upper(1, 1)[0], c2);
        assert_eq!(rest.upper(0, 2)[0], 0.0);
    }

    #[test]
    fn vorticity_examples() {
        let g = Grid::new(16).unwrap();
        let shear = FluidState::from_parts_unchecked(
            ScalarField::zeros(g),
            VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]),
            0.0,
        );
        let w = specific_vorticity(&shear);
        let expect = ScalarField::from_fn(g, |x| -x[1].cos());
        assert!(w.component(2).sub(&expect).linf_norm() < 1e-13);
        let shifted = FluidState::from_parts_unchecked(ScalarField::constant(g, 0.4), shear.velocity().clone(), 0.0);
        let w2 = specific_vorticity(&shifted);
        assert!(w2.component(2).sub(&expect.scale((-0.4f64).exp())).linf_norm() < 1e-13);
    }

    #[test]
    fn derived_fields_on_single_mode() {
        let g = Grid::new(16).unwrap();
        // curl v = (0, 0, -cos y); curl w = (sin y, 0, 0) with |k| = 1.
        let s = FluidState::from_parts_unchecked(
            ScalarField::zeros(g),
            VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]),
            0.0,
        );
        let d = derived_fields(&s).unwrap();
        let cw = curl(&d.w);
        assert!(d.eta.sub(&cw).linf_norm() < 1e-13);
        assert!(d.v_plus.add(&d.eta).sub(s.velocity()).linf_norm() < 1e-15);
    }
}
