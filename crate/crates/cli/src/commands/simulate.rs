use std::path::Path;

use eulerbench_core::evolution::cfl_number;
use eulerbench_core::fluid_state::sound_speed;
use eulerbench_core::harmonic::energy_of;
use eulerbench_core::simulate_with;

use crate::artifacts::{num, RunRecorder, Table};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::snapshot::SnapshotWriter;

pub const SNAPSHOT_FILE: &str = "snapshots.bin";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const DIAGNOSTICS_HEADER: [&str; 7] = ["time", "E", "E_l", "mass", "min_cs", "max_speed", "cfl"];

pub fn run(config_path: &Path, out: &Path, arguments: Vec<String>) -> Result<()> {
    let text = std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let config = RunConfig::parse(&text)?;
    let mut rec = RunRecorder::new(out, "simulate", arguments)?;
    rec.set_config(config.entries.clone(), Some(config.sim.seed));

    let sim = &config.sim;
    let (_, dt) = sim.schedule(&sim.initial_state()?);
    let mut writer = SnapshotWriter::create(rec.file(SNAPSHOT_FILE), sim.grid()?, &sim.eos)?;
    let mut table = Table::new(DIAGNOSTICS_HEADER);
    let mut write_error = None;
    let outcome = simulate_with(sim, |state| {
        if let Err(e) = writer.push(state) {
            write_error = Some(e);
            return Err(eulerbench_core::CoreError::InvalidParameter("snapshot write failed".into()));
        }
        let e = energy_of(state, config.energy_s, config.energy_s0);
        table.push(vec![
            num(state.time()),
            num(e.e),
            num(e.e_low),
            num(state.mass()),
            num(sound_speed(state, &sim.eos).min()),
            num(state.velocity().magnitude().max()),
            num(cfl_number(state, &sim.eos, dt)),
        ]);
        Ok(())
    });
    if let Err(e) = outcome {
        writer.abandon();
        return Err(write_error.unwrap_or(e.into()));
    }
    writer.finish()?;
    rec.record(SNAPSHOT_FILE)?;
    rec.write_table(DIAGNOSTICS_FILE, &table)?;
    rec.finish()?;
    Ok(())
}
