//! Acoustic wave operator, null forms and the wave-transport residuals.

use eulerbench_spectral::{curl, divergence, gradient, jacobian, laplacian, ScalarField, VectorField};
use rayon::prelude::*;

use crate::error::Result;
use crate::evolution::SnapshotStack;
use crate::fluid_state::{derived_fields, sound_speed_sq, specific_vorticity, EquationOfState, FluidState};
use crate::report::{components_l2, material_jet, material_jet_from_samples, IdentityId, MaterialJet, ResidualReport};

/// Which second-order operator `box_g` denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxForm {
    /// `-TT + c^2 Δ`.
    Principal,
    /// `-TT + c^2 Δ + (1 + 3c'/c)(T rho)(T f) - c c' grad rho . grad f`, the form the
    /// wave-transport system actually satisfies.
    #[default]
    Covariant,
}

/// Wave operator applied to each component of a sampled quantity, at the stack centre `index`.
fn box_from_jet(jet: &MaterialJet, rho_jet: &MaterialJet, state: &FluidState, eos: &EquationOfState, form: BoxForm) -> Vec<ScalarField> {
    let c2 = sound_speed_sq(state, eos);
    let k = eos.log_derivative();
    let grad_rho = gradient(state.rho_log());
    jet.value
        .iter()
        .zip(jet.t.iter().zip(&jet.tt))
        .map(|(f, (tf, ttf))| {
            let principal = c2.mul(&laplacian(f)).sub(ttf);
            match form {
                BoxForm::Principal => principal,
                BoxForm::Covariant => {
                    let trtf = rho_jet.t[0].mul(tf);
                    let drift = c2.mul(&grad_rho.dot(&gradient(f)));
                    ScalarField::linear_combination(&[(1.0, &principal), (1.0 + 3.0 * k, &trtf), (-k, &drift)])
                }
            }
        })
        .collect()
}

/// `box_g q` at `index`, with time derivatives from nested stencils.
pub fn box_g<F>(stack: &SnapshotStack, index: usize, q: F, form: BoxForm) -> Result<Vec<ScalarField>>
where
    F: Fn(&FluidState) -> Vec<ScalarField> + Sync,
{
    let jet = material_jet(stack, index, q)?;
    let rho_jet = material_jet(stack, index, |s| vec![s.rho_log().clone()])?;
    Ok(box_from_jet(&jet, &rho_jet, stack.state(index), stack.eos(), form))
}

#[derive(Debug, Clone)]
pub struct NullFormBundle {
    pub q: VectorField,
    pub d_form: ScalarField,
}

/// `Q` and `D` from one state, with `T v = -c^2 grad rho` and `T rho = -div v` substituted.
pub fn null_forms(state: &FluidState, eos: &EquationOfState) -> NullFormBundle {
    let grid = state.grid();
    let c2 = sound_speed_sq(state, eos);
    let k = eos.log_derivative();
    let gr = gradient(state.rho_log());
    let w = specific_vorticity(state);
    let jv = jacobian(state.velocity());
    let div_v = divergence(state.velocity());
    let e_plus = state.rho_log().map(f64::exp);
    let rows: Vec<[f64; 4]> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let c2 = c2.values()[p];
            let g = [gr.component(0).values()[p], gr.component(1).values()[p], gr.component(2).values()[p]];
            let wp = w.at(p);
            // dv[m][a] = d_m v^a
            let dv: [[f64; 3]; 3] = std::array::from_fn(|m| std::array::from_fn(|a| jv[a][m].values()[p]));
            let t_rho = -div_v.values()[p];
            let tv: [f64; 3] = std::array::from_fn(|a| -c2 * g[a]);
            let g_form = |ta: f64, tb: f64, dot: f64| -ta * tb + c2 * dot;
            let twist = crate::vorticity::epsilon_contraction(tv, wp);
            let mut out = [0.0; 4];
            for i in 0..3 {
                let grad_dot = (0..3).map(|m| g[m] * dv[m][i]).sum();
                out[i] = 2.0 * e_plus.values()[p] * twist[i] - (1.0 + k) * g_form(t_rho, tv[i], grad_dot);
            }
            let mut d = -3.0 * k * g_form(t_rho, t_rho, g.iter().map(|x| x * x).sum());
            for a in 0..3 {
                for b in a + 1..3 {
                    d += 2.0 * (dv[a][a] * dv[b][b] - dv[a][b] * dv[b][a]);
                }
            }
            out[3] = d;
            out
        })
        .collect();
    let col = |c: usize| ScalarField::from_values_unchecked(grid, rows.iter().map(|r| r[c]).collect());
    NullFormBundle {
        q: VectorField::new([col(0), col(1), col(2)]).expect("shared grid"),
        d_form: col(3),
    }
}

fn velocity_of(s: &FluidState) -> Vec<ScalarField> {
    s.velocity().components().to_vec()
}

/// `e^rho c^2 curl w`.
fn curl_source(state: &FluidState, eos: &EquationOfState) -> VectorField {
    let c2 = sound_speed_sq(state, eos);
    let f = c2.zip_map(state.rho_log(), |c, r| c * r.exp());
    curl(&specific_vorticity(state)).mul_scalar(&f)
}

/// `box_g v + e^rho c^2 curl w - Q`.
pub fn residual_wave_velocity(stack: &SnapshotStack, index: usize, form: BoxForm) -> Result<ResidualReport> {
    let bv = box_g(stack, index, velocity_of, form)?;
    let state = stack.state(index);
    let src = curl_source(state, stack.eos());
    let q = null_forms(state, stack.eos()).q;
    let src = src.components().to_vec();
    let q = q.components().to_vec();
    let res: Vec<ScalarField> = (0..3)
        .map(|i| ScalarField::linear_combination(&[(1.0, &bv[i]), (1.0, &src[i]), (-1.0, &q[i])]))
        .collect();
    Ok(ResidualReport::new(
        IdentityId::WaveVelocity,
        state.time(),
        &res,
        vec![("box_v", &bv), ("curl_source", &src), ("Q", &q)],
        4,
    ))
}

/// `box_g rho - D`.
pub fn residual_wave_density(stack: &SnapshotStack, index: usize, form: BoxForm) -> Result<ResidualReport> {
    let br = box_g(stack, index, |s| vec![s.rho_log().clone()], form)?;
    let state = stack.state(index);
    let d = vec![null_forms(state, stack.eos()).d_form];
    let res = vec![br[0].sub(&d[0])];
    Ok(ResidualReport::new(
        IdentityId::WaveDensity,
        state.time(),
        &res,
        vec![("box_rho", &br), ("D", &d)],
        4,
    ))
}

/// Which statement of the `v+` equation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VPlusForm {
    /// `box v+ = TT eta + Q`.
    AsPrinted,
    /// `box v+ = TT eta - (1 + 3c'/c)(T rho)(T eta) + c c' grad rho . grad eta + Q - c^2 m`,
    /// with `m` the mean removed before inverting the Laplacian.
    Rederived,
}

/// `v+` equation residual and the linearity defect `|box v+ + box eta - box v| / |box v|`.
#[derive(Debug, Clone)]
pub struct VPlusReport {
    pub residual: ResidualReport,
    pub additivity: f64,
}

pub fn residual_wave_vplus(stack: &SnapshotStack, index: usize, form: VPlusForm) -> Result<VPlusReport> {
    stack.require_stencil(index, 4)?;
    let eos = *stack.eos();
    let samples: Vec<(Vec<ScalarField>, Vec<ScalarField>, [f64; 3])> = (index - 4..=index + 4)
        .into_par_iter()
        .map(|j| {
            let d = derived_fields(stack.state(j))?;
            Ok((d.v_plus.components().to_vec(), d.eta.components().to_vec(), d.source_mean))
        })
        .collect::<Result<_>>()?;
    let vp: Vec<Vec<ScalarField>> = samples.iter().map(|s| s.0.clone()).collect();
    let eta: Vec<Vec<ScalarField>> = samples.iter().map(|s| s.1.clone()).collect();
    let mean = samples[4].2;
    let jet_vp = material_jet_from_samples(stack, index, &vp)?;
    let jet_eta = material_jet_from_samples(stack, index, &eta)?;
    let jet_v = material_jet(stack, index, velocity_of)?;
    let jet_rho = material_jet(stack, index, |s| vec![s.rho_log().clone()])?;
    let state = stack.state(index);
    let form_box = BoxForm::Covariant;
    let b_vp = box_from_jet(&jet_vp, &jet_rho, state, &eos, form_box);
    let b_eta = box_from_jet(&jet_eta, &jet_rho, state, &eos, form_box);
    let b_v = box_from_jet(&jet_v, &jet_rho, state, &eos, form_box);
    let sum: Vec<ScalarField> = (0..3).map(|i| b_vp[i].add(&b_eta[i]).sub(&b_v[i])).collect();
    let additivity = components_l2(&sum) / components_l2(&b_v).max(f64::MIN_POSITIVE);

    let q = null_forms(state, &eos).q.components().to_vec();
    let c2 = sound_speed_sq(state, &eos);
    let k = eos.log_derivative();
    let grad_rho = gradient(state.rho_log());
    let lower: Vec<ScalarField> = (0..3)
        .map(|i| match form {
            VPlusForm::AsPrinted => ScalarField::zeros(state.grid()),
            VPlusForm::Rederived => {
                let trte = jet_rho.t[0].mul(&jet_eta.t[i]);
                let drift = c2.mul(&grad_rho.dot(&gradient(&jet_eta.value[i])));
                let m = c2.scale(mean[i]);
                ScalarField::linear_combination(&[(-(1.0 + 3.0 * k), &trte), (k, &drift), (-1.0, &m)])
            }
        })
        .collect();
    let res: Vec<ScalarField> = (0..3)
        .map(|i| {
            ScalarField::linear_combination(&[(1.0, &b_vp[i]), (-1.0, &jet_eta.tt[i]), (-1.0, &q[i]), (-1.0, &lower[i])])
        })
        .collect();
    let id = match form {
        VPlusForm::AsPrinted => IdentityId::VPlusAsPrinted,
        VPlusForm::Rederived => IdentityId::VPlus,
    };
    let mut terms: Vec<(&str, &[ScalarField])> = vec![("box_vplus", &b_vp), ("TT_eta", &jet_eta.tt), ("Q", &q)];
    if form == VPlusForm::Rederived {
        terms.push(("lower_order", &lower));
    }
    Ok(VPlusReport {
        residual: ResidualReport::new(id, state.time(), &res, terms, 4),
        additivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{simulate, InitialData, SimConfig, TimeStep};
    use eulerbench_spectral::Grid;

    #[test]
    fn shear_has_vanishing_d() {
        let grid = Grid::new(16).unwrap();
        let s = InitialData::Shear { amplitude: 0.3, mode: 2 }.build(grid, 0).unwrap();
        let nf = null_forms(&s, &EquationOfState::default());
        assert!(nf.d_form.linf_norm() < 1e-14);
    }

    #[test]
    fn flat_sound_speed_and_rest_give_zero_d() {
        let grid = Grid::new(16).unwrap();
        let s = InitialData::AcousticMode { amplitude: 0.1, k: [1, 2, 0] }.build(grid, 0).unwrap();
        let eos = EquationOfState::new(1.0, 1.0).unwrap();
        assert!(null_forms(&s, &eos).d_form.linf_norm() < 1e-14);
    }

    #[test]
    fn wave_transport_on_a_short_run() {
        let cfg = SimConfig::new(
            32,
            InitialData::RandomBandLimited { band: 2.0, amplitude: 0.1 },
            0.008,
            TimeStep::Fixed(0.001),
        );
        let stack = simulate(&cfg).unwrap();
        let v = residual_wave_velocity(&stack, 4, BoxForm::Covariant).unwrap();
        let r = residual_wave_density(&stack, 4, BoxForm::Covariant).unwrap();
        assert!(v.relative < 1e-8, "{}", v.relative);
        assert!(r.relative < 1e-8, "{}", r.relative);
        let p = residual_wave_velocity(&stack, 4, BoxForm::Principal).unwrap();
        assert!(p.relative > 1e2 * v.relative);
        let fc = residual_wave_vplus(&stack, 4, VPlusForm::Rederived).unwrap();
        assert!(fc.residual.relative < 1e-8, "{}", fc.residual.relative);
        // roundoff / (dt_snap * frequency)^2 at dt_snap = 1e-3
        assert!(fc.additivity < 1e-10);
        let printed = residual_wave_vplus(&stack, 4, VPlusForm::AsPrinted).unwrap();
        assert!(printed.residual.relative > 1e3 * fc.residual.relative);
    }
}
