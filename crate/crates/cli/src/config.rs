//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # vortical benchmark
//! grid.n = 48
//! eos.gamma = 1.6666666666666667
//! time.t_end = 0.5
//! time.dt = 1e-3
//! init.kind = random_band_limited
//! init.band = 2
//! init.amplitude = 0.1
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use eulerbench_core::{EquationOfState, InitialData, SimConfig, TimeStep};

use crate::error::{CliError, Result};

/// Sobolev indices of the diagnostics energy when not configured.
pub const DEFAULT_ENERGY_S: f64 = 3.0;
pub const DEFAULT_ENERGY_S0: f64 = 2.5;

const KNOWN_KEYS: &[&str] = &[
    "grid.n",
    "grid.length",
    "eos.gamma",
    "time.t_end",
    "time.dt",
    "time.cfl",
    "time.snap_every",
    "init.kind",
    "init.rho",
    "init.velocity",
    "init.amplitude",
    "init.mode",
    "init.k",
    "init.band",
    "init.radius",
    "guards.c0",
    "seed",
    "energy.s",
    "energy.s0",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub energy_s: f64,
    pub energy_s0: f64,
    /// Parsed key-value pairs, echoed into the manifest.
    pub entries: BTreeMap<String, String>,
}

pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(out)
}

struct Entries<'a>(&'a BTreeMap<String, String>);

impl Entries<'_> {
    fn raw(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Config(format!("missing key '{key}'")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("key '{key}': cannot parse '{raw}'")))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        if self.0.contains_key(key) {
            self.parse(key)
        } else {
            Ok(default)
        }
    }

    fn triple<T: std::str::FromStr + Copy + Default>(&self, key: &str) -> Result<[T; 3]> {
        let raw = self.raw(key)?;
        let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
        let bad = || CliError::Config(format!("key '{key}': expected three comma-separated values, got '{raw}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut out = [T::default(); 3];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = p.parse().map_err(|_| bad())?;
        }
        Ok(out)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_entries(parse_entries(text)?)
    }

    pub fn from_entries(entries: BTreeMap<String, String>) -> Result<Self> {
        let e = Entries(&entries);
        let n: usize = e.parse("grid.n")?;
        let gamma: f64 = e.parse("eos.gamma")?;
        let t_end: f64 = e.parse("time.t_end")?;
        let time_step = match (entries.contains_key("time.dt"), entries.contains_key("time.cfl")) {
            (true, false) => TimeStep::Fixed(e.parse("time.dt")?),
            (false, true) => TimeStep::Cfl(e.parse("time.cfl")?),
            (true, true) => return Err(CliError::Config("give only one of 'time.dt' and 'time.cfl'".into())),
            (false, false) => return Err(CliError::Config("missing key 'time.dt' (or 'time.cfl')".into())),
        };
        let kind = e.raw("init.kind")?;
        let initial = match kind {
            "constant" => InitialData::Constant {
                rho: e.parse_or("init.rho", 0.0)?,
                velocity: if entries.contains_key("init.velocity") { e.triple("init.velocity")? } else { [0.0; 3] },
            },
            "shear" => InitialData::Shear {
                amplitude: e.parse("init.amplitude")?,
                mode: e.parse_or("init.mode", 1)?,
            },
            "acoustic_mode" => InitialData::AcousticMode {
                amplitude: e.parse("init.amplitude")?,
                k: e.triple("init.k")?,
            },
            "random_band_limited" => InitialData::RandomBandLimited {
                band: e.parse("init.band")?,
                amplitude: e.parse("init.amplitude")?,
            },
            "vortical_bump" => InitialData::VorticalBump {
                amplitude: e.parse("init.amplitude")?,
                radius: e.parse("init.radius")?,
            },
            "irrotational" => InitialData::Irrotational {
                band: e.parse("init.band")?,
                amplitude: e.parse("init.amplitude")?,
            },
            other => return Err(CliError::Config(format!("key 'init.kind': unknown kind '{other}'"))),
        };
        let mut sim = SimConfig::new(n, initial, t_end, time_step);
        sim.length = e.parse_or("grid.length", 2.0 * PI)?;
        sim.eos = EquationOfState::new(gamma, 1.0).map_err(|err| CliError::Config(format!("key 'eos.gamma': {err}")))?;
        sim.snap_every = e.parse_or("time.snap_every", 1)?;
        sim.c0 = e.parse_or("guards.c0", sim.c0)?;
        sim.seed = e.parse_or("seed", 0)?;
        sim.validate().map_err(|err| CliError::Config(err.to_string()))?;
        Ok(Self {
            sim,
            energy_s: e.parse_or("energy.s", DEFAULT_ENERGY_S)?,
            energy_s0: e.parse_or("energy.s0", DEFAULT_ENERGY_S0)?,
            entries,
        })
    }
}
