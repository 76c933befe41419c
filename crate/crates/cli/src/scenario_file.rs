//! The on-disk scenario format.

use std::fs;
use std::path::{Path, PathBuf};

use greenoffload_core::energy::read_green_trace;
use greenoffload_core::model::CONNECTION_TIME_RANGE_S;
use greenoffload_core::{
    ArrivalModel, DeviceSpec, GainModel, GameConfig, GreenProfile, PolicyKind, Scenario,
    ServerSpec,
};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub horizon_slots: usize,
    #[serde(default = "one")]
    pub slot_len_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub instructions_to_cycles: f64,
    #[serde(default = "connection_range")]
    pub connection_time_range_s: (f64, f64),
    #[serde(default = "equilibrium")]
    pub policy: PolicyKind,
    #[serde(default)]
    pub game: GameConfig,
    #[serde(default)]
    pub devices: Vec<DeviceSpec>,
    pub servers: Vec<ServerSpec>,
    /// One entry per server, in server order.
    pub green: Vec<GreenEntry>,
    #[serde(default = "ArrivalModel::none")]
    pub arrivals: ArrivalModel,
    #[serde(default = "fixed_gains")]
    pub gains: GainModel,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    /// Used when `--out` is not given.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GreenEntry {
    /// `slot_index,joules` file, relative to the scenario file.
    TraceFile { path: PathBuf },
    Trace { samples_j: Vec<f64> },
    DiurnalSine {
        peak_j: f64,
        #[serde(default = "sunrise")]
        sunrise_h: f64,
        #[serde(default = "sunset")]
        sunset_h: f64,
        #[serde(default)]
        start_hour: f64,
    },
    Constant { level_j: f64 },
}

fn one() -> f64 {
    1.0
}

fn connection_range() -> (f64, f64) {
    CONNECTION_TIME_RANGE_S
}

fn equilibrium() -> PolicyKind {
    PolicyKind::Equilibrium
}

fn fixed_gains() -> GainModel {
    GainModel::Fixed
}

fn sunrise() -> f64 {
    6.0
}

fn sunset() -> f64 {
    18.0
}

/// A parsed scenario plus the file-level options that are not part of it.
pub struct Loaded {
    pub scenario: Scenario,
    pub output: OutputOptions,
}

/// Reads, resolves and validates a scenario file.
pub fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = toml::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let mut green = Vec::with_capacity(file.green.len());
    for entry in file.green {
        green.push(match entry {
            GreenEntry::TraceFile { path: rel } => {
                let full = base.join(&rel);
                let f = fs::File::open(&full).map_err(|e| {
                    Failure::usage(format!("cannot read green trace {}: {e}", full.display()))
                })?;
                let samples_j = read_green_trace(f).map_err(|e| {
                    Failure::usage(format!("green trace {}: {e}", full.display()))
                })?;
                GreenProfile::Trace { samples_j }
            }
            GreenEntry::Trace { samples_j } => GreenProfile::Trace { samples_j },
            GreenEntry::DiurnalSine {
                peak_j,
                sunrise_h,
                sunset_h,
                start_hour,
            } => GreenProfile::DiurnalSine {
                peak_j,
                sunrise_h,
                sunset_h,
                start_hour,
            },
            GreenEntry::Constant { level_j } => GreenProfile::Constant { level_j },
        });
    }

    let mut scenario = Scenario {
        horizon_slots: file.horizon_slots,
        slot_len_s: file.slot_len_s,
        seed: file.seed,
        instructions_to_cycles: file.instructions_to_cycles,
        connection_time_range_s: file.connection_time_range_s,
        policy: file.policy,
        game: file.game,
        devices: file.devices,
        servers: file.servers,
        green,
        arrivals: file.arrivals,
        gains: file.gains,
    };
    scenario.renumber();
    Ok(Loaded {
        scenario,
        output: file.output,
    })
}

/// The scenario as a self-contained file with every default written out.
pub fn resolved_text(scenario: &Scenario) -> Result<String, Failure> {
    toml::to_string(scenario)
        .map_err(|e| Failure::runtime(format!("cannot serialize resolved scenario: {e}")))
}
