use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use eulerbench_spectral::{gradient, ScalarField};
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::evolution::{central_derivative, SnapshotStack};
use crate::fluid_state::FluidState;

/// Below this reference scale an identity is treated as `0 = 0`.
pub const DEGENERATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    /// `div w + w . grad rho = 0`.
    DivergenceLaw,
    /// `T w = (w . grad) v`.
    WTransport,
    /// Transport law for `Omega = e^{-rho} curl w`.
    OmegaTransport,
    /// Modified curl-Omega equation with remainders exactly as stated.
    CurlOmegaAsPrinted,
    /// Modified curl-Omega equation, re-derived.
    CurlOmega,
    WaveVelocity,
    WaveDensity,
    /// `box v+ = TT eta + Q` as stated.
    VPlusAsPrinted,
    /// `box v+` with the lower-order and mean corrections.
    VPlus,
}

impl IdentityId {
    pub const ALL: [IdentityId; 9] = [
        Self::DivergenceLaw,
        Self::WTransport,
        Self::OmegaTransport,
        Self::CurlOmegaAsPrinted,
        Self::CurlOmega,
        Self::WaveVelocity,
        Self::WaveDensity,
        Self::VPlusAsPrinted,
        Self::VPlus,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DivergenceLaw => "W01",
            Self::WTransport => "W0",
            Self::OmegaTransport => "W1",
            Self::CurlOmegaAsPrinted => "W2_printed",
            Self::CurlOmega => "W2",
            Self::WaveVelocity => "fc1_v",
            Self::WaveDensity => "fc1_rho",
            Self::VPlusAsPrinted => "fc_printed",
            Self::VPlus => "fc",
        }
    }

    /// Time-stencil half width the residual needs.
    pub fn half_width(&self) -> usize {
        match self {
            Self::DivergenceLaw => 0,
            Self::WTransport | Self::OmegaTransport | Self::CurlOmegaAsPrinted | Self::CurlOmega => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| CoreError::InvalidParameter(format!("unknown identity {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub identity_id: IdentityId,
    pub time: f64,
    pub l2_residual: f64,
    pub linf_residual: f64,
    /// L² norm of the largest constituent term.
    pub reference_scale: f64,
    pub relative: f64,
    pub per_term_norms: BTreeMap<String, f64>,
    /// Order of the time stencil; 0 for time-free identities.
    pub stencil_order: u32,
    pub degenerate: bool,
}

/// Root-sum-square L² norm over components.
pub fn components_l2(c: &[ScalarField]) -> f64 {
    c.iter().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
}

impl ResidualReport {
    pub fn new(
        identity_id: IdentityId,
        time: f64,
        residual: &[ScalarField],
        terms: Vec<(&str, &[ScalarField])>,
        stencil_order: u32,
    ) -> Self {
        let per_term_norms: BTreeMap<String, f64> =
            terms.iter().map(|(k, v)| (k.to_string(), components_l2(v))).collect();
        let reference_scale = per_term_norms.values().copied().fold(0.0, f64::max);
        let l2_residual = components_l2(residual);
        let linf_residual = residual.iter().map(ScalarField::linf_norm).fold(0.0, f64::max);
        let degenerate = reference_scale <= DEGENERATE_FLOOR;
        let relative = if degenerate { 0.0 } else { l2_residual / reference_scale };
        Self {
            identity_id,
            time,
            l2_residual,
            linf_residual,
            reference_scale,
            relative,
            per_term_norms,
            stencil_order,
            degenerate,
        }
    }
}

/// `T q` at `index` from a centred fourth-order stencil on the stack.
pub fn material_derivative<F>(stack: &SnapshotStack, index: usize, q: F) -> Result<Vec<ScalarField>>
where
    F: Fn(&FluidState) -> Vec<ScalarField> + Sync,
{
    stack.require_stencil(index, 2)?;
    let samples: Vec<Vec<ScalarField>> = (index - 2..=index + 2)
        .into_par_iter()
        .map(|j| q(stack.state(j)))
        .collect();
    Ok(material_from_samples(&samples, stack.state(index), stack.dt_snap()))
}

fn material_from_samples(samples: &[Vec<ScalarField>], centre: &FluidState, h: f64) -> Vec<ScalarField> {
    let v = centre.velocity();
    (0..samples[2].len())
        .map(|c| {
            let dt = central_derivative(std::array::from_fn(|s| &samples[s][c]), h);
            dt.add(&v.dot(&gradient(&samples[2][c])))
        })
        .collect()
}

/// Values, first and second material derivatives at `index`.
#[derive(Debug, Clone)]
pub struct MaterialJet {
    pub value: Vec<ScalarField>,
    pub t: Vec<ScalarField>,
    pub tt: Vec<ScalarField>,
}

/// `q`, `T q` and `T(T q)` at `index`; the nested stencil needs four neighbours per side.
pub fn material_jet<F>(stack: &SnapshotStack, index: usize, q: F) -> Result<MaterialJet>
where
    F: Fn(&FluidState) -> Vec<ScalarField> + Sync,
{
    stack.require_stencil(index, 4)?;
    let samples: Vec<Vec<ScalarField>> = (index - 4..=index + 4)
        .into_par_iter()
        .map(|j| q(stack.state(j)))
        .collect();
    material_jet_from_samples(stack, index, &samples)
}

/// As [`material_jet`] with `q` already sampled on `index-4..=index+4`.
pub fn material_jet_from_samples(
    stack: &SnapshotStack,
    index: usize,
    samples: &[Vec<ScalarField>],
) -> Result<MaterialJet> {
    stack.require_stencil(index, 4)?;
    if samples.len() != 9 {
        return Err(CoreError::InvalidParameter(format!("need 9 samples, got {}", samples.len())));
    }
    let h = stack.dt_snap();
    let first: Vec<Vec<ScalarField>> = (0..5)
        .into_par_iter()
        .map(|s| material_from_samples(&samples[s..s + 5], stack.state(index - 2 + s), h))
        .collect();
    let tt = material_from_samples(&first, stack.state(index), h);
    Ok(MaterialJet {
        value: samples[4].clone(),
        t: first[2].clone(),
        tt,
    })
}

/// Residual of identity `id` at snapshot `index`, plus the `v+` additivity
/// defect for the `v+` identities.
pub fn evaluate_identity(id: IdentityId, stack: &SnapshotStack, index: usize) -> Result<(ResidualReport, Option<f64>)> {
    use crate::vorticity::{self as w, CurlOmegaForm};
    use crate::wave::{self, BoxForm, VPlusForm};
    stack.require_stencil(index, id.half_width())?;
    let report = match id {
        IdentityId::DivergenceLaw => w::residual_divergence_law(stack.state(index)),
        IdentityId::WTransport => w::residual_w_transport(stack, index)?,
        IdentityId::OmegaTransport => w::residual_omega_transport(stack, index)?,
        IdentityId::CurlOmegaAsPrinted => w::residual_modified_curl_omega(stack, index, CurlOmegaForm::AsPrinted)?,
        IdentityId::CurlOmega => w::residual_modified_curl_omega(stack, index, CurlOmegaForm::Rederived)?,
        IdentityId::WaveVelocity => wave::residual_wave_velocity(stack, index, BoxForm::Covariant)?,
        IdentityId::WaveDensity => wave::residual_wave_density(stack, index, BoxForm::Covariant)?,
        IdentityId::VPlusAsPrinted | IdentityId::VPlus => {
            let form = if id == IdentityId::VPlus { VPlusForm::Rederived } else { VPlusForm::AsPrinted };
            let r = wave::residual_wave_vplus(stack, index, form)?;
            return Ok((r.residual, Some(r.additivity)));
        }
    };
    Ok((report, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid_state::EquationOfState;
    use eulerbench_spectral::{Grid, VectorField};

    fn stack_of(f: impl Fn(f64) -> FluidState, count: usize, h: f64) -> SnapshotStack {
        let states = (0..count).map(|i| f(i as f64 * h)).collect();
        SnapshotStack::with_spacing(states, h, EquationOfState::default()).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
        }
    }

    #[test]
    fn pure_time_quadratic_has_second_derivative_two() {
        let grid = Grid::new(8).unwrap();
        let h = 0.1;
        let stack = stack_of(
            |t| {
                FluidState::from_parts_unchecked(ScalarField::constant(grid, t * t), VectorField::zeros(grid), t)
            },
            9,
            h,
        );
        let jet = material_jet(&stack, 4, |s| vec![s.rho_log().clone()]).unwrap();
        let t = 0.4;
        assert!((jet.t[0].values()[0] - 2.0 * t).abs() < 1e-12);
        assert!((jet.tt[0].values()[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn stencil_bounds_are_checked() {
        let grid = Grid::new(8).unwrap();
        let stack = stack_of(|t| FluidState::rest(grid).with_time(t), 5, 0.1);
        assert!(material_derivative(&stack, 2, |s| vec![s.rho_log().clone()]).is_ok());
        assert!(matches!(
            material_jet(&stack, 2, |s| vec![s.rho_log().clone()]),
            Err(CoreError::StencilOutOfRange { .. })
        ));
    }

    #[test]
    fn degenerate_reports_zero_relative() {
        let grid = Grid::new(8).unwrap();
        let z = vec![ScalarField::zeros(grid)];
        let r = ResidualReport::new(IdentityId::DivergenceLaw, 0.0, &z, vec![("a", &z)], 0);
        assert!(r.degenerate);
        assert_eq!(r.relative, 0.0);
    }
}
