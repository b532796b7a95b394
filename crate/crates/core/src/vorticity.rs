//! Residuals of the specific-vorticity transport laws.

use eulerbench_spectral::{curl, derivative, divergence, gradient, jacobian, second_derivative, Grid, ScalarField, VectorField};
use rayon::prelude::*;

use crate::error::Result;
use crate::evolution::SnapshotStack;
use crate::fluid_state::{specific_vorticity, FluidState};
use crate::report::{material_derivative, IdentityId, ResidualReport};

/// Levi-Civita symbol `eps_{ijk}`.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `eps^{ijk} a_j b_k`.
pub fn epsilon_contraction(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| {
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                s += levi_civita(i, j, k) * a[j] * b[k];
            }
        }
        s
    })
}

/// Largest entry of `eps^{ijk} eps_{kmn} - (delta^i_m delta^j_n - delta^i_n delta^j_m)`.
pub fn epsilon_delta_defect() -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    let lhs: f64 = (0..3).map(|k| levi_civita(i, j, k) * levi_civita(k, m, n)).sum();
                    worst = worst.max((lhs - (d(i, m) * d(j, n) - d(i, n) * d(j, m))).abs());
                }
            }
        }
    }
    worst
}

fn vec3(u: &VectorField) -> [ScalarField; 3] {
    u.components().clone()
}

/// `d[m][a] = d_m u^a`.
fn gradient_table(u: &VectorField) -> [[ScalarField; 3]; 3] {
    let j = jacobian(u);
    std::array::from_fn(|m| std::array::from_fn(|a| j[a][m].clone()))
}

/// `dd[j][m][a] = d_j d_m u^a`.
fn hessian_table(u: &VectorField) -> [[[ScalarField; 3]; 3]; 3] {
    let grid = u.grid();
    let mut out: [[[ScalarField; 3]; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| ScalarField::zeros(grid))));
    for a in 0..3 {
        for j in 0..3 {
            for m in j..3 {
                let h = second_derivative(u.component(a), j, m);
                out[m][j][a] = h.clone();
                out[j][m][a] = h;
            }
        }
    }
    out
}

/// Everything the curl-Omega remainders need at one state.
struct VorticityFields {
    grid: Grid,
    e_minus: ScalarField,
    e_plus: ScalarField,
    gr: [ScalarField; 3],
    w: [ScalarField; 3],
    om: [ScalarField; 3],
    dv: [[ScalarField; 3]; 3],
    dw: [[ScalarField; 3]; 3],
    dom: [[ScalarField; 3]; 3],
    ddw: [[[ScalarField; 3]; 3]; 3],
    ddv: [[[ScalarField; 3]; 3]; 3],
    div_v: ScalarField,
}

impl VorticityFields {
    fn of(state: &FluidState) -> Self {
        let rho = state.rho_log();
        let v = state.velocity();
        let e_minus = rho.map(|r| (-r).exp());
        let w = specific_vorticity(state);
        let om = curl(&w).mul_scalar(&e_minus);
        Self {
            grid: state.grid(),
            e_plus: rho.map(f64::exp),
            gr: vec3(&gradient(rho)),
            dv: gradient_table(v),
            dw: gradient_table(&w),
            dom: gradient_table(&om),
            ddw: hessian_table(&w),
            ddv: hessian_table(v),
            div_v: divergence(v),
            w: vec3(&w),
            om: vec3(&om),
            e_minus,
        }
    }

    fn at(&self, p: usize) -> Local {
        let s1 = |f: &[ScalarField; 3]| -> [f64; 3] { std::array::from_fn(|a| f[a].values()[p]) };
        let s2 = |f: &[[ScalarField; 3]; 3]| -> [[f64; 3]; 3] { std::array::from_fn(|m| s1(&f[m])) };
        let s3 = |f: &[[[ScalarField; 3]; 3]; 3]| -> [[[f64; 3]; 3]; 3] { std::array::from_fn(|j| s2(&f[j])) };
        Local {
            e: self.e_minus.values()[p],
            ep: self.e_plus.values()[p],
            gr: s1(&self.gr),
            w: s1(&self.w),
            om: s1(&self.om),
            dv: s2(&self.dv),
            dw: s2(&self.dw),
            dom: s2(&self.dom),
            ddw: s3(&self.ddw),
            ddv: s3(&self.ddv),
            div_v: self.div_v.values()[p],
        }
    }

    /// Evaluates `k` pointwise into `N` output fields.
    fn pointwise<const N: usize>(&self, k: impl Fn(&Local) -> [f64; N] + Sync) -> Vec<ScalarField> {
        let rows: Vec<[f64; N]> = (0..self.grid.len()).into_par_iter().map(|p| k(&self.at(p))).collect();
        (0..N)
            .map(|c| ScalarField::from_values_unchecked(self.grid, rows.iter().map(|r| r[c]).collect()))
            .collect()
    }
}

/// Pointwise values; `d*[m][a] = d_m (*)^a`, `dd*[j][m][a] = d_j d_m (*)^a`.
struct Local {
    e: f64,
    ep: f64,
    gr: [f64; 3],
    w: [f64; 3],
    om: [f64; 3],
    dv: [[f64; 3]; 3],
    dw: [[f64; 3]; 3],
    dom: [[f64; 3]; 3],
    ddw: [[[f64; 3]; 3]; 3],
    ddv: [[[f64; 3]; 3]; 3],
    div_v: f64,
}

const EPS: [((usize, usize, usize), f64); 6] = [
    ((0, 1, 2), 1.0),
    ((1, 2, 0), 1.0),
    ((2, 0, 1), 1.0),
    ((0, 2, 1), -1.0),
    ((2, 1, 0), -1.0),
    ((1, 0, 2), -1.0),
];

/// Nonzero `(j, k, eps_{ijk})` for fixed `i`.
fn eps_row(i: usize) -> impl Iterator<Item = (usize, usize, f64)> {
    EPS.iter().filter(move |((a, _, _), _)| *a == i).map(|((_, j, k), s)| (*j, *k, *s))
}

impl Local {
    /// `F = 2 e^{-rho} d_n v^a d_n w^a`.
    fn f_scalar(&self) -> f64 {
        let mut s = 0.0;
        for n in 0..3 {
            for a in 0..3 {
                s += self.dv[n][a] * self.dw[n][a];
            }
        }
        2.0 * self.e * s
    }

    /// `curl w` component `a`.
    fn curl_w(&self, a: usize) -> f64 {
        eps_row(a).map(|(m, n, s)| s * self.dw[m][n]).sum()
    }

    /// Right side of the Omega transport law, component `i`.
    fn omega_rhs(&self, i: usize) -> f64 {
        let mut s = 0.0;
        for (m, n, e) in eps_row(i) {
            for a in 0..3 {
                s -= 2.0 * e * self.e * self.dv[m][a] * self.dw[n][a];
            }
        }
        for a in 0..3 {
            s += self.e * self.dv[a][i] * self.curl_w(a);
        }
        s
    }

    /// `R1..R6` exactly as stated, with the two index repairs.
    fn printed_remainders(&self, i: usize) -> [f64; 6] {
        let Local { e, ep, gr, w, om, dv, dw, dom, ddw, ddv, .. } = self;
        let e = *e;
        let mut r = [0.0; 6];
        for (j, k, eijk) in eps_row(i) {
            for (m, n, ekmn) in eps_row(k) {
                for a in 0..3 {
                    r[0] -= 2.0 * e * ekmn * eijk * dv[m][a] * ddw[j][n][a];
                    r[1] += 2.0 * e * ekmn * eijk * dv[m][a] * dw[n][a] * gr[j];
                }
            }
            for a in 0..3 {
                for (m, n, eamn) in eps_row(a) {
                    r[0] += e * eamn * eijk * dv[a][k] * ddw[j][m][n];
                    r[1] -= e * eamn * eijk * dv[a][k] * dw[m][n] * gr[j];
                }
            }
            for m in 0..3 {
                r[0] += eijk * dv[j][m] * dom[m][k];
            }
        }
        for j in 0..3 {
            for a in 0..3 {
                r[0] -= 2.0 * e * dv[j][a] * ddw[i][j][a];
            }
        }
        for a in 0..3 {
            for k in 0..3 {
                r[1] -= 2.0 * e * dv[a][k] * gr[k] * dw[i][a];
            }
            r[1] += 2.0 * e * gr[a] * dw[i][a];
            for m in 0..3 {
                r[1] -= 2.0 * e * gr[a] * dw[i][m] * dv[m][a];
            }
        }
        for n in 0..3 {
            for a in 0..3 {
                r[1] += 2.0 * e * gr[i] * dv[n][a] * dw[n][a];
            }
        }
        for a in 0..3 {
            r[2] += w[i] * gr[a] * self.curl_w(a);
            for (j, k, eajk) in eps_row(a) {
                r[2] += 2.0 * eajk * gr[j] * w[k] * dw[i][a];
            }
            for (m, n, eamn) in eps_row(a) {
                r[3] += eamn * dw[a][i] * dw[m][n];
            }
            r[3] += 2.0 * ep * om[a] * dw[i][a];
            for k in 0..3 {
                r[4] += 2.0 * e * gr[a] * dv[i][k] * dw[k][a];
            }
            for m in 0..3 {
                r[5] -= 2.0 * e * gr[a] * w[m] * ddv[i][m][a];
            }
        }
        r
    }

    /// Re-derived source groups: transport, density, vorticity-density, vorticity-quadratic.
    fn rederived_sources(&self, i: usize) -> [f64; 4] {
        let Local { e, ep, gr, w, om, dv, dw, dom, ddw, ddv, div_v } = self;
        let (e, div_v) = (*e, *div_v);
        let [mut s1, mut s2, mut s3, mut s4] = [0.0; 4];
        for (j, k, eijk) in eps_row(i) {
            for (m, n, ekmn) in eps_row(k) {
                for a in 0..3 {
                    s1 -= 2.0 * e * ekmn * eijk * dv[m][a] * ddw[j][n][a];
                    s2 += 2.0 * e * ekmn * eijk * dv[m][a] * dw[n][a] * gr[j];
                }
            }
            for a in 0..3 {
                for (m, n, eamn) in eps_row(a) {
                    s1 += e * eamn * eijk * dv[a][k] * ddw[j][m][n];
                    s2 -= e * eamn * eijk * dv[a][k] * dw[m][n] * gr[j];
                }
            }
            for m in 0..3 {
                s1 -= eijk * dv[j][m] * dom[m][k];
            }
        }
        for a in 0..3 {
            let cw = self.curl_w(a);
            s3 += w[i] * gr[a] * cw;
            s4 += dw[a][i] * cw;
        }
        for j in 0..3 {
            for a in 0..3 {
                s2 -= 2.0 * e * gr[i] * dv[j][a] * dw[j][a];
                s1 += 2.0 * e * dv[j][a] * ddw[i][j][a];
            }
        }
        for a in 0..3 {
            for k in 0..3 {
                s2 -= 2.0 * e * dv[a][k] * gr[k] * dw[i][a];
            }
            for (j, k, eajk) in eps_row(a) {
                s3 -= 2.0 * eajk * gr[j] * w[k] * dw[i][a];
            }
            s4 -= 2.0 * ep * om[a] * dw[i][a];
            s2 += 2.0 * e * div_v * gr[a] * dw[i][a];
            for m in 0..3 {
                s2 += 2.0 * e * gr[a] * dw[i][m] * dv[m][a];
                s2 += 2.0 * e * gr[a] * w[m] * ddv[i][m][a];
                s2 -= 2.0 * e * gr[a] * dv[i][m] * dw[m][a];
            }
        }
        [s1, s2, s3, s4]
    }
}

/// Which statement of the curl-Omega equation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurlOmegaForm {
    /// Left side `T(curl Omega - 2 e^{-rho} d_a rho d^i w^a)`, remainders as stated.
    AsPrinted,
    /// Left side with `+2`, consistent remainders.
    Rederived,
}

impl CurlOmegaForm {
    fn sign(self) -> f64 {
        match self {
            Self::AsPrinted => -1.0,
            Self::Rederived => 1.0,
        }
    }

    fn id(self) -> IdentityId {
        match self {
            Self::AsPrinted => IdentityId::CurlOmegaAsPrinted,
            Self::Rederived => IdentityId::CurlOmega,
        }
    }
}

/// `div w + w . grad rho`; needs no time stencil.
pub fn residual_divergence_law(state: &FluidState) -> ResidualReport {
    let w = specific_vorticity(state);
    let div_w = divergence(&w);
    let transport = w.dot(&gradient(state.rho_log()));
    let res = div_w.add(&transport);
    ResidualReport::new(
        IdentityId::DivergenceLaw,
        state.time(),
        &[res],
        vec![("div_w", &[div_w][..]), ("w_dot_grad_rho", &[transport][..])],
        0,
    )
}

/// `T w - (w . grad) v`.
pub fn residual_w_transport(stack: &SnapshotStack, index: usize) -> Result<ResidualReport> {
    let tw = material_derivative(stack, index, |s| vec3(&specific_vorticity(s)).to_vec())?;
    let state = stack.state(index);
    let w = specific_vorticity(state);
    let dv = gradient_table(state.velocity());
    let stretch: Vec<ScalarField> = (0..3)
        .map(|i| {
            let terms: Vec<ScalarField> = (0..3).map(|a| w.component(a).mul(&dv[a][i])).collect();
            ScalarField::linear_combination(&terms.iter().map(|t| (1.0, t)).collect::<Vec<_>>())
        })
        .collect();
    let res: Vec<ScalarField> = tw.iter().zip(&stretch).map(|(a, b)| a.sub(b)).collect();
    Ok(ResidualReport::new(
        IdentityId::WTransport,
        state.time(),
        &res,
        vec![("T_w", &tw), ("stretching", &stretch)],
        4,
    ))
}

fn omega_of(state: &FluidState) -> Vec<ScalarField> {
    let e = state.rho_log().map(|r| (-r).exp());
    vec3(&curl(&specific_vorticity(state)).mul_scalar(&e)).to_vec()
}

/// Transport law for `Omega = e^{-rho} curl w`.
pub fn residual_omega_transport(stack: &SnapshotStack, index: usize) -> Result<ResidualReport> {
    let t_om = material_derivative(stack, index, omega_of)?;
    let state = stack.state(index);
    let vf = VorticityFields::of(state);
    let rhs = vf.pointwise(|l| [l.omega_rhs(0), l.omega_rhs(1), l.omega_rhs(2)]);
    let res: Vec<ScalarField> = t_om.iter().zip(&rhs).map(|(a, b)| a.sub(b)).collect();
    Ok(ResidualReport::new(
        IdentityId::OmegaTransport,
        state.time(),
        &res,
        vec![("T_Omega", &t_om), ("rhs", &rhs)],
        4,
    ))
}

/// `curl Omega + sign 2 e^{-rho} d_a rho d^i w^a`.
fn modified_curl_omega(state: &FluidState, sign: f64) -> Vec<ScalarField> {
    let om = VectorField::new(omega_of(state).try_into().expect("three components")).expect("shared grid");
    let c = curl(&om);
    let e = state.rho_log().map(|r| (-r).exp());
    let gr = gradient(state.rho_log());
    let w = specific_vorticity(state);
    let dw = gradient_table(&w);
    (0..3)
        .map(|i| {
            let corr = (0..3)
                .map(|a| gr.component(a).mul(&dw[i][a]))
                .reduce(|x, y| x.add(&y))
                .expect("three terms")
                .mul(&e);
            c.component(i).axpy(sign * 2.0, &corr)
        })
        .collect()
}

/// Modified curl-Omega equation; `per_term_norms` localizes each remainder family.
pub fn residual_modified_curl_omega(stack: &SnapshotStack, index: usize, form: CurlOmegaForm) -> Result<ResidualReport> {
    let sign = form.sign();
    let lhs = material_derivative(stack, index, |s| modified_curl_omega(s, sign))?;
    let state = stack.state(index);
    let vf = VorticityFields::of(state);
    let f = vf.pointwise(|l| [l.f_scalar()]).remove(0);
    let grad_f: Vec<ScalarField> = (0..3).map(|i| derivative(&f, i).scale(-sign)).collect();
    let (labels, groups): (Vec<&str>, Vec<Vec<ScalarField>>) = match form {
        CurlOmegaForm::AsPrinted => {
            let r = vf.pointwise::<18>(|l| {
                let t = [l.printed_remainders(0), l.printed_remainders(1), l.printed_remainders(2)];
                std::array::from_fn(|q| t[q % 3][q / 3])
            });
            let mut it = r.into_iter();
            let groups = (0..6).map(|_| it.by_ref().take(3).collect()).collect();
            (vec!["R1", "R2", "R3", "R4", "R5", "R6"], groups)
        }
        CurlOmegaForm::Rederived => {
            let r = vf.pointwise::<12>(|l| {
                let t = [l.rederived_sources(0), l.rederived_sources(1), l.rederived_sources(2)];
                std::array::from_fn(|q| t[q % 3][q / 3])
            });
            let mut it = r.into_iter();
            let groups = (0..4).map(|_| it.by_ref().take(3).collect()).collect();
            (
                vec!["S_transport", "S_density", "S_vorticity_density", "S_vorticity_quadratic"],
                groups,
            )
        }
    };
    let res: Vec<ScalarField> = (0..3)
        .map(|i| {
            let mut terms: Vec<(f64, &ScalarField)> = vec![(1.0, &lhs[i]), (-1.0, &grad_f[i])];
            terms.extend(groups.iter().map(|g| (-1.0, &g[i])));
            ScalarField::linear_combination(&terms)
        })
        .collect();
    let mut named: Vec<(&str, &[ScalarField])> = vec![("lhs", &lhs), ("grad_F", &grad_f)];
    named.extend(labels.iter().copied().zip(groups.iter().map(Vec::as_slice)));
    Ok(ResidualReport::new(form.id(), state.time(), &res, named, 4))
}
