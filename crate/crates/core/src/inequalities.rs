//! Empirical sampling of product and commutator inequalities.
//!
//! Each sample draws seeded random band-limited fields, evaluates both sides
//! (right side without its implicit constant) and records `LHS / RHS`.

use std::fmt;
use std::str::FromStr;

use eulerbench_spectral::littlewood_paley::{shell_multiplier, DyadicRange};
use eulerbench_spectral::ops::fractional_power_unchecked;
use eulerbench_spectral::random::{random_band_limited, random_band_limited_vector};
use eulerbench_spectral::{gradient, jacobian, riesz, Grid, ScalarField, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CoreError, Result};
use crate::harmonic::{besov, besov_norm, homogeneous_sobolev, l2, pointwise_sup, sobolev, sobolev_norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    Jh,
    Cj,
    Jh0,
    Ps,
    Lpe,
    Wql,
    LpeBesov,
    CeR,
    Ce,
    Yr,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        Self::Jh,
        Self::Cj,
        Self::Jh0,
        Self::Ps,
        Self::Lpe,
        Self::Wql,
        Self::LpeBesov,
        Self::CeR,
        Self::Ce,
        Self::Yr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Jh => "jh",
            Self::Cj => "cj",
            Self::Jh0 => "jh0",
            Self::Ps => "ps",
            Self::Lpe => "lpe",
            Self::Wql => "wql",
            Self::LpeBesov => "LPE",
            Self::CeR => "ceR",
            Self::Ce => "ce",
            Self::Yr => "YR",
        }
    }

    /// Whether both sides are linear in the sampled `f`.
    pub fn homogeneous_in_f(&self) -> bool {
        !matches!(self, Self::Jh0)
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| CoreError::UnknownInequality(s.to_string()))
    }
}

/// Lemma parameters. Defaults sit inside every hypothesis range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityParams {
    /// Order for `jh` and `jh0`.
    pub s: f64,
    /// Lebesgue pair for `jh`; `1/p + 1/q = 1/2` with values in `{2, inf}`.
    pub p: f64,
    pub q: f64,
    /// Order for `cj`.
    pub a: f64,
    /// Orders for `ps`.
    pub r: f64,
    pub r_prime: f64,
    /// Fractional order for `lpe`, `wql`, `LPE`, `ceR`, `ce`.
    pub alpha: f64,
    /// Hölder index for `LPE`.
    pub beta: f64,
    /// Orders for `YR`.
    pub s1: f64,
    pub s2: f64,
}

impl Default for InequalityParams {
    fn default() -> Self {
        Self {
            s: 1.5,
            p: f64::INFINITY,
            q: 2.0,
            a: 1.5,
            r: 1.0,
            r_prime: 1.0,
            alpha: 0.5,
            beta: 0.6,
            s1: 2.2,
            s2: 2.4,
        }
    }
}

impl InequalityParams {
    pub fn check(&self, id: InequalityId) -> Result<()> {
        let bad = |m: String| Err(CoreError::HypothesisViolation(format!("{id}: {m}")));
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        match id {
            InequalityId::Jh => {
                if self.s < 0.0 {
                    return bad(format!("s = {} < 0", self.s));
                }
                let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
                let ok_pair = [2.0, f64::INFINITY].contains(&self.p) && [2.0, f64::INFINITY].contains(&self.q);
                if !ok_pair || (inv(self.p) + inv(self.q) - 0.5).abs() > 1e-12 {
                    return bad(format!("need 1/p + 1/q = 1/2 with p, q in {{2, inf}}, got ({}, {})", self.p, self.q));
                }
            }
            InequalityId::Cj if self.a < 0.0 => return bad(format!("a = {} < 0", self.a)),
            InequalityId::Jh0 if self.s < 0.0 => return bad(format!("s = {} < 0", self.s)),
            InequalityId::Ps => {
                let half = 1.5;
                if !(self.r >= 0.0 && self.r < half && self.r_prime >= 0.0 && self.r_prime < half)
                    || self.r + self.r_prime <= half
                {
                    return bad(format!(
                        "need 0 <= r, r' < 3/2 and r + r' > 3/2, got ({}, {})",
                        self.r, self.r_prime
                    ));
                }
            }
            InequalityId::Lpe | InequalityId::CeR if !(self.alpha >= 0.0 && self.alpha < 1.0) => {
                return bad(format!("alpha = {} outside [0, 1)", self.alpha))
            }
            InequalityId::Wql | InequalityId::Ce if !open_unit(self.alpha) => {
                return bad(format!("alpha = {} outside (0, 1)", self.alpha))
            }
            InequalityId::LpeBesov => {
                if !open_unit(self.alpha) || self.beta <= self.alpha {
                    return bad(format!(
                        "need 0 < alpha < 1 and beta > alpha, got ({}, {})",
                        self.alpha, self.beta
                    ));
                }
            }
            InequalityId::Yr if !(self.s1 > 2.0 && self.s1 <= self.s2) => {
                return bad(format!("need 2 < s1 <= s2, got ({}, {})", self.s1, self.s2))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub id: InequalityId,
    pub n_samples: usize,
    pub seed: u64,
    pub band: f64,
    pub amplitude: f64,
    pub grid_n: usize,
    pub params: InequalityParams,
    /// Replace the sampled velocity by a constant vector (commutator degeneracy check).
    pub constant_velocity: bool,
    /// Multiply the sampled `f` by this factor.
    pub f_scale: f64,
}

impl SampleConfig {
    pub fn new(id: InequalityId, n_samples: usize, seed: u64) -> Self {
        Self {
            id,
            n_samples,
            seed,
            band: 5.0,
            amplitude: 1.0,
            grid_n: 32,
            params: InequalityParams::default(),
            constant_velocity: false,
            f_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub inequality_id: InequalityId,
    pub samples: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub worst_sample_seed: u64,
    /// Per-sample `(seed, lhs, rhs, ratio)`.
    pub records: Vec<SampleRecord>,
    /// Samples where the right side vanished but the left did not.
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Seed of sample `i`, decorrelated from neighbouring base seeds.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
}

/// Relative roundoff floor below which a side counts as exactly zero.
const ZERO_FLOOR: f64 = 64.0 * f64::EPSILON;

struct Sample {
    h: ScalarField,
    f: ScalarField,
    g: ScalarField,
    v: VectorField,
}

fn draw(grid: Grid, cfg: &SampleConfig, seed: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_band_limited(grid, cfg.band, cfg.amplitude, &mut rng);
    let f = random_band_limited(grid, cfg.band, cfg.amplitude, &mut rng).scale(cfg.f_scale);
    let g = random_band_limited(grid, cfg.band, cfg.amplitude, &mut rng);
    let v = if cfg.constant_velocity {
        let c: [f64; 3] = std::array::from_fn(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0) * cfg.amplitude);
        VectorField::from_fn(grid, |_| c)
    } else {
        random_band_limited_vector(grid, cfg.band, cfg.amplitude, &mut rng)
    };
    Sample { h, f, g, v }
}

fn vec_refs(v: &VectorField) -> [&ScalarField; 3] {
    let c = v.components();
    [&c[0], &c[1], &c[2]]
}

/// `v . grad f`.
fn transport(v: &VectorField, f: &ScalarField) -> ScalarField {
    v.dot(&gradient(f))
}

/// Returns `(lhs, rhs, scale)`; `scale` sizes the roundoff floor.
fn evaluate(id: InequalityId, p: &InequalityParams, x: &Sample) -> (f64, f64, f64) {
    let Sample { h, f, g, v } = x;
    match id {
        InequalityId::Jh => {
            let s = p.s;
            let lhs = fractional_power_unchecked(&h.mul(f), s)
                .sub(&fractional_power_unchecked(h, s).mul(f))
                .l2_norm();
            let df = gradient(f);
            let lp = |u: &ScalarField, e: f64| u.lp_norm(e);
            let rhs = fractional_power_unchecked(h, s - 1.0).l2_norm() * df.linf_norm()
                + lp(h, p.p) * lp(&fractional_power_unchecked(f, s), p.q);
            (lhs, rhs, h.linf_norm() * sobolev(f, s))
        }
        InequalityId::Cj => {
            let a = p.a;
            let lhs = sobolev(&h.mul(f), a);
            let rhs = h.linf_norm() * sobolev(f, a) + f.linf_norm() * sobolev(h, a);
            (lhs, rhs, rhs)
        }
        InequalityId::Jh0 => {
            let u = f;
            let lhs = sobolev(&u.map(f64::exp_m1), p.s);
            let rhs = sobolev(u, p.s) * (1.0 + u.linf_norm());
            (lhs, rhs, rhs)
        }
        InequalityId::Ps => {
            let out = p.r + p.r_prime - 1.5;
            let lhs = sobolev(&h.mul(f), out);
            let rhs = sobolev(h, p.r) * sobolev(f, p.r_prime);
            (lhs, rhs, rhs)
        }
        InequalityId::Lpe => {
            let a = p.alpha;
            let lhs = fractional_power_unchecked(&h.mul(f), a).l2_norm();
            let rhs = besov(h, a, f64::INFINITY, 2.0) * f.l2_norm() + h.linf_norm() * homogeneous_sobolev(f, a);
            (lhs, rhs, rhs)
        }
        InequalityId::Wql => {
            let a = p.alpha;
            let fs = [h, f, g];
            let lhs = fractional_power_unchecked(&h.mul(f).mul(g), a).l2_norm();
            let h1: Vec<f64> = fs.iter().map(|u| sobolev(u, 1.0)).collect();
            let rhs = (0..3)
                .map(|i| sobolev(fs[i], 1.0 + a) * (0..3).filter(|&j| j != i).map(|j| h1[j]).product::<f64>())
                .fold(f64::INFINITY, f64::min);
            (lhs, rhs, rhs)
        }
        InequalityId::LpeBesov => {
            let a = p.alpha;
            let lhs = besov(&h.mul(f), a, f64::INFINITY, 2.0);
            let holder = crate::harmonic::holder_norm(&[h], p.beta).value;
            let rhs = h.linf_norm() * besov(f, a, f64::INFINITY, 2.0) + holder * f.linf_norm();
            (lhs, rhs, rhs)
        }
        InequalityId::CeR => {
            let a = p.alpha;
            let vf = transport(v, f);
            let mut sq = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let c = riesz(&vf, i, j).sub(&transport(v, &riesz(f, i, j)));
                    sq += homogeneous_sobolev(&c, a).powi(2);
                }
            }
            let lhs = sq.sqrt();
            let vr = vec_refs(v);
            let rhs = besov_norm(&vr, 1.0 + a, f64::INFINITY, f64::INFINITY).value * f.l2_norm()
                + besov_norm(&vr, 1.0, f64::INFINITY, f64::INFINITY).value * homogeneous_sobolev(f, a);
            (lhs, rhs, v.linf_norm() * sobolev(f, 1.0 + a))
        }
        InequalityId::Ce => {
            let a = p.alpha;
            let lhs = fractional_power_unchecked(&transport(v, f), a)
                .sub(&transport(v, &fractional_power_unchecked(f, a)))
                .l2_norm();
            let jv = jacobian(v);
            let dv: Vec<&ScalarField> = jv.iter().flat_map(|r| r.iter()).collect();
            let rhs = besov_norm(&dv, 0.0, f64::INFINITY, 2.0).value * homogeneous_sobolev(f, a);
            (lhs, rhs, v.linf_norm() * sobolev(f, 1.0 + a))
        }
        InequalityId::Yr => {
            let grid = f.grid();
            let mut sq = 0.0;
            for j in DyadicRange::of(&grid).iter() {
                let proj = |u: &ScalarField| u.apply_radial(|r| shell_multiplier(r, j));
                let c = proj(&transport(v, f)).sub(&transport(v, &proj(f)));
                sq += (2f64.powf((p.s1 - 1.0) * j as f64) * homogeneous_sobolev(&c, p.s2 - p.s1)).powi(2);
            }
            let lhs = sq.sqrt();
            let jv = jacobian(v);
            let dv: Vec<&ScalarField> = jv.iter().flat_map(|r| r.iter()).collect();
            let vr = vec_refs(v);
            let rhs = pointwise_sup(&dv) * homogeneous_sobolev(f, p.s2)
                + sobolev_norm(&vr, p.s2).value * sobolev(f, 1.0);
            (lhs, rhs, v.linf_norm() * sobolev(f, p.s2) + l2(&vr) * f.linf_norm())
        }
    }
}

fn ratio_of(lhs: f64, rhs: f64, scale: f64) -> (f64, bool) {
    let floor = ZERO_FLOOR * scale.max(f64::MIN_POSITIVE);
    let lhs_zero = lhs <= floor;
    let rhs_zero = rhs <= floor;
    match (lhs_zero, rhs_zero) {
        (true, true) => (0.0, false),
        (false, true) => (f64::INFINITY, true),
        _ => (lhs / rhs, false),
    }
}

pub fn inequality_sample(cfg: &SampleConfig) -> Result<RatioReport> {
    cfg.params.check(cfg.id)?;
    if cfg.n_samples == 0 {
        return Err(CoreError::InvalidParameter("need at least one sample".into()));
    }
    if !(cfg.band >= 1.0 && cfg.amplitude > 0.0 && cfg.f_scale != 0.0) {
        return Err(CoreError::InvalidParameter(
            "band must be >= 1 and amplitude, f_scale nonzero".into(),
        ));
    }
    let grid = Grid::new(cfg.grid_n)?;
    let records: Vec<SampleRecord> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let seed = sample_seed(cfg.seed, i);
            let x = draw(grid, cfg, seed);
            let (lhs, rhs, scale) = evaluate(cfg.id, &cfg.params, &x);
            let (ratio, _) = ratio_of(lhs, rhs, scale);
            SampleRecord { seed, lhs, rhs, ratio }
        })
        .collect();
    let failures = records.iter().filter(|r| r.ratio.is_infinite()).count();
    let worst = records
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("non-empty");
    let mut sorted: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median_ratio = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    Ok(RatioReport {
        inequality_id: cfg.id,
        samples: m,
        max_ratio: worst.ratio,
        median_ratio,
        worst_sample_seed: worst.seed,
        records,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in InequalityId::ALL {
            assert_eq!(id.as_str().parse::<InequalityId>().unwrap(), id);
        }
        assert!(matches!("nope".parse::<InequalityId>(), Err(CoreError::UnknownInequality(_))));
    }

    #[test]
    fn hypotheses_enforced() {
        let mut p = InequalityParams::default();
        p.alpha = 1.2;
        assert!(p.check(InequalityId::Ce).is_err());
        p.alpha = 0.0;
        assert!(p.check(InequalityId::Ce).is_err());
        assert!(p.check(InequalityId::Lpe).is_ok());
        let mut p = InequalityParams::default();
        p.s1 = 2.0;
        assert!(p.check(InequalityId::Yr).is_err());
        let mut p = InequalityParams::default();
        p.r = 0.5;
        p.r_prime = 0.5;
        assert!(p.check(InequalityId::Ps).is_err());
        let mut p = InequalityParams::default();
        p.p = 2.0;
        assert!(p.check(InequalityId::Jh).is_err());
        p.q = f64::INFINITY;
        assert!(p.check(InequalityId::Jh).is_ok());
    }

    #[test]
    fn cj_with_unit_h_is_at_most_one() {
        let grid = Grid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_band_limited(grid, 4.0, 1.0, &mut rng);
        let x = Sample {
            h: ScalarField::constant(grid, 1.0),
            f: f.clone(),
            g: f.clone(),
            v: VectorField::zeros(grid),
        };
        let (l, r, _) = evaluate(InequalityId::Cj, &InequalityParams::default(), &x);
        assert!(l / r <= 1.0);
    }

    #[test]
    fn zero_zero_is_degenerate_not_failure() {
        assert_eq!(ratio_of(1e-18, 0.0, 1.0), (0.0, false));
        assert_eq!(ratio_of(1e-3, 0.0, 1.0), (f64::INFINITY, true));
        assert_eq!(ratio_of(1.0, 2.0, 1.0), (0.5, false));
    }
}
