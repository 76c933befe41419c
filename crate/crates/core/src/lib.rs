//! Green-energy-aware task offloading for hybrid-powered edge servers.
//!
//! Devices pick where their tasks run, servers price their capacity, and a
//! discrete-time simulator drives the whole system over a horizon while
//! tracking delay, device energy and the green/brown split of server energy.

pub mod costs;
pub mod energy;
pub mod error;
pub mod model;
pub mod policy;
pub mod report;
pub mod sim;
pub mod synth;

pub use costs::{
    edge_delay, edge_energy, full_local_cost, local_delay, local_energy, shannon_rate,
    split_cost, uplink_rate, CostBreakdown, SplitCombine,
};
pub use energy::{
    account_server_energy, ledger_entry, read_green_trace, server_energy_demand, step_battery,
    BatteryStep, DeviceBattery, GreenProfile, LedgerEntry,
};
pub use error::{Error, Result};
pub use model::{
    validate_assignment, validate_split, Assignment, Channel, DeviceSpec, ServerDecision,
    ServerPower, ServerSpec, SplitDecision, Task, TaskDecision, ValidationReport, Violation,
};
pub use policy::{
    brute_force_oracle, check_epsilon_nash, is_epsilon_nash, run_policy, GameConfig,
    GameInstance, OracleOptions, OracleReport, PolicyKind, PolicyOutcome, PriceGrid, Profile,
    RewardCoefficients,
};
pub use report::{write_slots_csv, SLOTS_CSV_HEADER};
pub use sim::{
    run, sweep, ArrivalModel, GainModel, RunSummary, Scenario, SlotMetrics, Span, TaskOutcome,
    TaskSpec,
};
pub use synth::{synthetic_scenario, SyntheticParams};
