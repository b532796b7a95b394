//! Dyadic Sobolev/Besov/Hölder norms and the energy functionals built on them.
//!
//! Multi-component fields (vectors, tensors) use the pointwise Euclidean norm
//! inside `L^p` and the Euclidean sum across components inside `L^2`.

use eulerbench_spectral::littlewood_paley::{shell_multiplier, DyadicRange};
use eulerbench_spectral::{gradient, jacobian, ScalarField, Spectrum};

use crate::evolution::SnapshotStack;
use crate::fluid_state::{sound_speed_sq, specific_vorticity, FluidState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Linf,
    /// Homogeneous dyadic `Ḣ^s`.
    HomogeneousSobolev,
    /// `L^2 + Ḣ^s`.
    Sobolev,
    HomogeneousBesov,
    /// `L^inf + sup_j 2^{j delta} ||Δ_j f||_inf`.
    Holder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub grid_n: usize,
    /// Set when the partially resolved top shell carries most of the norm.
    pub warning: Option<String>,
}

impl NormReport {
    fn new(kind: NormKind, value: f64, s: f64, p: f64, r: f64, grid_n: usize) -> Self {
        Self {
            kind,
            value,
            s,
            p,
            r,
            grid_n,
            warning: None,
        }
    }
}

fn radius(k: [f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// `||Δ_j f||_{L^2}` per shell, summed over components.
pub fn shell_l2(components: &[&ScalarField]) -> Vec<(i32, f64)> {
    let grid = components[0].grid();
    let vol = grid.volume();
    let spectra: Vec<&Spectrum> = components.iter().map(|c| c.spectrum()).collect();
    DyadicRange::of(&grid)
        .iter()
        .map(|j| {
            let ms: f64 = spectra
                .iter()
                .map(|s| s.weighted_sum(|k| shell_multiplier(radius(k), j).powi(2)))
                .sum();
            (j, (ms * vol).sqrt())
        })
        .collect()
}

/// `||Δ_j f||_{L^inf}` per shell (grid maxima of the pointwise Euclidean norm).
pub fn shell_linf(components: &[&ScalarField]) -> Vec<(i32, f64)> {
    let grid = components[0].grid();
    DyadicRange::of(&grid)
        .iter()
        .map(|j| {
            let parts: Vec<ScalarField> = components
                .iter()
                .map(|c| c.apply_radial(|r| shell_multiplier(r, j)))
                .collect();
            (j, pointwise_sup(&parts.iter().collect::<Vec<_>>()))
        })
        .collect()
}

/// Grid maximum of `sqrt(sum_c f_c^2)`.
pub fn pointwise_sup(components: &[&ScalarField]) -> f64 {
    let n = components[0].grid().len();
    (0..n)
        .map(|p| components.iter().map(|c| c[p] * c[p]).sum::<f64>())
        .fold(0.0f64, f64::max)
        .sqrt()
}

pub fn l2(components: &[&ScalarField]) -> f64 {
    components.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
}

fn top_heavy(weighted: &[(i32, f64)], range: DyadicRange) -> Option<String> {
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    let top = weighted.iter().find(|(j, _)| *j == range.max).map(|(_, w)| *w).unwrap_or(0.0);
    (total > 0.0 && top > 0.5 * total).then(|| {
        format!(
            "top dyadic shell {} carries {:.0}% of the norm; value is resolution dominated",
            range.max,
            100.0 * top / total
        )
    })
}

/// `(sum_j 2^{2js} ||Δ_j f||_2^2)^{1/2}`.
pub fn homogeneous_sobolev_norm(components: &[&ScalarField], s: f64) -> NormReport {
    let grid = components[0].grid();
    let weighted: Vec<(i32, f64)> = shell_l2(components)
        .into_iter()
        .map(|(j, v)| (j, (2f64.powf(j as f64 * s) * v).powi(2)))
        .collect();
    let value = weighted.iter().map(|(_, w)| w).sum::<f64>().sqrt();
    let mut rep = NormReport::new(NormKind::HomogeneousSobolev, value, s, 2.0, 2.0, grid.n());
    rep.warning = top_heavy(&weighted, DyadicRange::of(&grid));
    rep
}

/// `||f||_{H^s} = ||f||_{L^2} + ||f||_{Ḣ^s}`.
pub fn sobolev_norm(components: &[&ScalarField], s: f64) -> NormReport {
    let h = homogeneous_sobolev_norm(components, s);
    NormReport {
        kind: NormKind::Sobolev,
        value: l2(components) + h.value,
        ..h
    }
}

pub fn sobolev(f: &ScalarField, s: f64) -> f64 {
    sobolev_norm(&[f], s).value
}

pub fn homogeneous_sobolev(f: &ScalarField, s: f64) -> f64 {
    homogeneous_sobolev_norm(&[f], s).value
}

/// `Ḃ^s_{p,r}` for `p` in `{2, inf}` and any `r >= 1` (including infinity).
pub fn besov_norm(components: &[&ScalarField], s: f64, p: f64, r: f64) -> NormReport {
    let grid = components[0].grid();
    assert!(p == 2.0 || p.is_infinite(), "p must be 2 or infinity");
    assert!(r >= 1.0, "r must be >= 1");
    let shells = if p == 2.0 {
        shell_l2(components)
    } else {
        shell_linf(components)
    };
    let weighted: Vec<(i32, f64)> = shells
        .into_iter()
        .map(|(j, v)| (j, 2f64.powf(j as f64 * s) * v))
        .collect();
    let value = if r.is_infinite() {
        weighted.iter().map(|(_, w)| *w).fold(0.0, f64::max)
    } else {
        weighted.iter().map(|(_, w)| w.powf(r)).sum::<f64>().powf(1.0 / r)
    };
    let mut rep = NormReport::new(NormKind::HomogeneousBesov, value, s, p, r, grid.n());
    let pow: Vec<(i32, f64)> = weighted.iter().map(|(j, w)| (*j, w * w)).collect();
    rep.warning = top_heavy(&pow, DyadicRange::of(&grid));
    rep
}

pub fn besov(f: &ScalarField, s: f64, p: f64, r: f64) -> f64 {
    besov_norm(&[f], s, p, r).value
}

/// `C^delta` as `L^inf + Ḃ^delta_{inf,inf}`.
pub fn holder_norm(components: &[&ScalarField], delta: f64) -> NormReport {
    let b = besov_norm(components, delta, f64::INFINITY, f64::INFINITY);
    NormReport {
        kind: NormKind::Holder,
        value: pointwise_sup(components) + b.value,
        ..b
    }
}

/// `||(v_a - v_b, rho_a - rho_b)||_{H^s}` as the sum of the two component norms.
pub fn sobolev_pair_norm(a: &FluidState, b: &FluidState, s: f64) -> f64 {
    let dr = a.rho_log().sub(b.rho_log());
    let dv = a.velocity().sub(b.velocity());
    let c = dv.components();
    sobolev(&dr, s) + sobolev_norm(&[&c[0], &c[1], &c[2]], s).value
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    /// `||rho||_{H^s} + ||v||_{H^s} + ||w||_{H^{s0}}`.
    pub e: f64,
    /// Same with all indices equal to 2.
    pub e_low: f64,
}

pub fn energy_of(state: &FluidState, s: f64, s0: f64) -> EnergySample {
    let w = specific_vorticity(state);
    let v = state.velocity().components();
    let wc = w.components();
    let vv = [&v[0], &v[1], &v[2]];
    let ww = [&wc[0], &wc[1], &wc[2]];
    let rho = state.rho_log();
    EnergySample {
        time: state.time(),
        e: sobolev(rho, s) + sobolev_norm(&vv, s).value + sobolev_norm(&ww, s0).value,
        e_low: sobolev(rho, 2.0) + sobolev_norm(&vv, 2.0).value + sobolev_norm(&ww, 2.0).value,
    }
}

pub fn energy_functionals(stack: &SnapshotStack, s: f64, s0: f64) -> Vec<EnergySample> {
    stack.states().iter().map(|st| energy_of(st, s, s0)).collect()
}

/// Exponent integrands at one state, with `T` replaced on shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallIntegrand {
    /// `||dv, d rho||_inf + ||∂v||_{Ḃ^{s0-2}_{inf,2}}`.
    pub high: f64,
    /// `||dv||_inf + ||d rho||_inf`.
    pub low: f64,
}

pub fn gronwall_integrand(state: &FluidState, eos: &crate::fluid_state::EquationOfState, s0: f64) -> GronwallIntegrand {
    let c2 = sound_speed_sq(state, eos);
    let grad_rho = gradient(state.rho_log());
    let jv = jacobian(state.velocity());
    let div_v = jv[0][0].add(&jv[1][1]).add(&jv[2][2]);
    // T v = -c^2 grad rho, T rho = -div v.
    let tv: Vec<ScalarField> = (0..3).map(|a| grad_rho.component(a).mul(&c2).scale(-1.0)).collect();
    let t_rho = div_v.scale(-1.0);
    let mut dv: Vec<&ScalarField> = tv.iter().collect();
    for row in &jv {
        dv.extend(row.iter());
    }
    let mut drho: Vec<&ScalarField> = vec![&t_rho];
    drho.extend(grad_rho.components().iter());
    let mut both = dv.clone();
    both.extend(drho.iter().copied());
    let partial_v: Vec<&ScalarField> = jv.iter().flat_map(|r| r.iter()).collect();
    GronwallIntegrand {
        high: pointwise_sup(&both) + besov_norm(&partial_v, s0 - 2.0, f64::INFINITY, 2.0).value,
        low: pointwise_sup(&dv) + pointwise_sup(&drho),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub times: Vec<f64>,
    pub energy: Vec<EnergySample>,
    pub integral_high: Vec<f64>,
    pub integral_low: Vec<f64>,
    /// Smallest `C` with `E(t) <= C E(0) exp(int_0^t ...)` at every snapshot.
    pub c_fit: f64,
    /// Same for `E_l`.
    pub c_fit_low: f64,
    pub bound: f64,
    pub pass: bool,
}

pub const DEFAULT_GRONWALL_BOUND: f64 = 10.0;

fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
        out.push(acc);
    }
    out
}

fn fit_constant(e: &[f64], integral: &[f64]) -> f64 {
    let e0 = e[0];
    if e0 == 0.0 {
        return if e.iter().all(|x| *x == 0.0) { 1.0 } else { f64::INFINITY };
    }
    e.iter()
        .zip(integral)
        .map(|(x, i)| x / (e0 * i.exp()))
        .fold(0.0, f64::max)
}

/// Fit the Gronwall constant from per-snapshot energies and integrands.
pub fn gronwall_from_series(
    times: Vec<f64>,
    energy: Vec<EnergySample>,
    integrands: &[GronwallIntegrand],
    bound: f64,
) -> GronwallReport {
    let hi: Vec<f64> = integrands.iter().map(|g| g.high).collect();
    let lo: Vec<f64> = integrands.iter().map(|g| g.low).collect();
    let integral_high = cumulative_trapezoid(&times, &hi);
    let integral_low = cumulative_trapezoid(&times, &lo);
    let e: Vec<f64> = energy.iter().map(|x| x.e).collect();
    let el: Vec<f64> = energy.iter().map(|x| x.e_low).collect();
    let c_fit = fit_constant(&e, &integral_high);
    let c_fit_low = fit_constant(&el, &integral_low);
    let pass = c_fit.is_finite() && c_fit <= bound && e.iter().all(|x| x.is_finite());
    GronwallReport {
        times,
        energy,
        integral_high,
        integral_low,
        c_fit,
        c_fit_low,
        bound,
        pass,
    }
}

pub fn gronwall_check(stack: &SnapshotStack, s: f64, s0: f64, bound: f64) -> crate::Result<GronwallReport> {
    if stack.len() < 3 {
        return Err(crate::CoreError::InvalidParameter(
            "Gronwall check needs at least 3 snapshots".into(),
        ));
    }
    let energy = energy_functionals(stack, s, s0);
    let integrands: Vec<GronwallIntegrand> = stack
        .states()
        .iter()
        .map(|st| gronwall_integrand(st, stack.eos(), s0))
        .collect();
    Ok(gronwall_from_series(stack.times(), energy, &integrands, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use eulerbench_spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_at_shell_center() {
        let g = Grid::new(32).unwrap();
        // |k| = 4 = 2^2: only shell 2 sees it, with multiplier 1.
        let f = ScalarField::from_fn(g, |x| (4.0 * x[0]).cos());
        let l2 = (0.5 * (2.0 * PI).powi(3)).sqrt();
        let s = 1.3;
        let h = homogeneous_sobolev(&f, s);
        assert!((h - 2f64.powf(2.0 * s) * l2).abs() < 1e-12 * h);
        assert!((sobolev(&f, s) - (h + l2)).abs() < 1e-12 * h);
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::new(16).unwrap();
        let z = ScalarField::zeros(g);
        assert_eq!(sobolev(&z, 2.0), 0.0);
        assert_eq!(besov(&z, 0.5, f64::INFINITY, 2.0), 0.0);
        assert_eq!(holder_norm(&[&z], 0.3).value, 0.0);
    }

    #[test]
    fn h0_within_partition_overlap_of_l2() {
        let g = Grid::new(32).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let f = eulerbench_spectral::random::random_band_limited(g, 10.0, 1.0, &mut rng);
        let ratio = homogeneous_sobolev(&f, 0.0) / f.l2_norm();
        // sum_j m_j^2 lies in [1/2, 1] for a partition of unity with two overlapping shells.
        assert!((1.0 / 2f64.sqrt()..=1.0 + 1e-12).contains(&ratio), "{ratio}");
    }

    #[test]
    fn gronwall_constant_series() {
        let times = vec![0.0, 0.1, 0.2];
        let e = EnergySample { time: 0.0, e: 3.0, e_low: 2.0 };
        let en = vec![e, EnergySample { time: 0.1, ..e }, EnergySample { time: 0.2, ..e }];
        let ig = vec![GronwallIntegrand { high: 0.0, low: 0.0 }; 3];
        let r = gronwall_from_series(times, en, &ig, 10.0);
        assert_eq!(r.c_fit, 1.0);
        assert!(r.pass);
    }
}
