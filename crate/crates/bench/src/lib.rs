//! Instance builders shared by the solver benchmarks.

use greenoffload_core::{synthetic_scenario, GameInstance, PolicyKind, Scenario, SyntheticParams};

/// Synthetic scenario with every device active in every slot.
pub fn busy_scenario(devices: usize, servers: usize, seed: u64) -> Scenario {
    synthetic_scenario(&SyntheticParams {
        devices,
        servers,
        horizon_slots: 4,
        seed,
        policy: PolicyKind::Equilibrium,
        arrival_probability: 1.0,
        ..Default::default()
    })
}

/// The first slot's game of a busy synthetic scenario.
pub fn equilibrium_instance(devices: usize, servers: usize, seed: u64) -> GameInstance {
    busy_scenario(devices, servers, seed)
        .slot_game(0)
        .expect("synthetic scenarios are valid")
}

/// A game small enough for exhaustive search: no backup capacity, so each
/// server chooses among prices only.
pub fn oracle_instance(devices: usize, servers: usize, seed: u64) -> GameInstance {
    let mut s = busy_scenario(devices, servers, seed);
    for k in &mut s.servers {
        k.backup_capacity_cycles_per_s = 0.0;
    }
    s.slot_game(0).expect("synthetic scenarios are valid")
}
