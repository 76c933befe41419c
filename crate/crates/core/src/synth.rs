//! Seeded synthetic scenarios with heterogeneous devices and servers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{DeviceBattery, GreenProfile};
use crate::model::{Channel, DeviceSpec, ServerPower, ServerSpec, CONNECTION_TIME_RANGE_S};
use crate::policy::{GameConfig, PolicyKind};
use crate::sim::{ArrivalModel, GainModel, Scenario, Span};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub devices: usize,
    pub servers: usize,
    pub horizon_slots: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    pub arrival_probability: f64,
    /// Peak green energy per server per slot.
    pub green_peak_j: f64,
    pub game: GameConfig,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            devices: 4,
            servers: 2,
            horizon_slots: 24,
            seed: 1,
            policy: PolicyKind::Equilibrium,
            arrival_probability: 0.8,
            green_peak_j: 150.0,
            game: GameConfig::default(),
        }
    }
}

/// Builds a scenario whose parameters are drawn from `params.seed`.
pub fn synthetic_scenario(params: &SyntheticParams) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed_5eed);
    let devices = (0..params.devices)
        .map(|id| DeviceSpec {
            id,
            f_max_cycles_per_s: rng.gen_range(0.5e9..1.5e9),
            kappa_j_s_per_cycle2: rng.gen_range(5e-19..1e-18),
            tx_power_w: rng.gen_range(0.1..0.5),
            p_sched_w: rng.gen_range(0.1..0.3),
            battery: DeviceBattery {
                capacity_j: 50.0,
                level_j: 25.0,
                harvest_j_per_slot: 0.5,
            },
        })
        .collect();
    let (c_lo, c_hi) = CONNECTION_TIME_RANGE_S;
    let servers: Vec<ServerSpec> = (0..params.servers)
        .map(|id| {
            let f_max = rng.gen_range(8e9..16e9);
            ServerSpec {
                id,
                f_max_cycles_per_s: f_max,
                connection_time_s: rng.gen_range(c_lo..c_hi),
                channel: Channel {
                    bandwidth_hz: rng.gen_range(1e7..2e7),
                    noise_w: 1e-9,
                    gain: 1e-7,
                },
                backup_capacity_cycles_per_s: f_max / 2.0,
                backup_price: 2e-11,
                green_rate: 1e-11,
                green_rate_trace: None,
                admission_cap: None,
                power: ServerPower::default(),
            }
        })
        .collect();
    let green = servers
        .iter()
        .map(|_| GreenProfile::DiurnalSine {
            peak_j: params.green_peak_j,
            sunrise_h: 6.0,
            sunset_h: 18.0,
            start_hour: rng.gen_range(6.0..18.0),
        })
        .collect();
    Scenario {
        horizon_slots: params.horizon_slots,
        slot_len_s: 1.0,
        seed: params.seed,
        instructions_to_cycles: 1.0,
        connection_time_range_s: CONNECTION_TIME_RANGE_S,
        policy: params.policy,
        game: params.game.clone(),
        devices,
        servers,
        green,
        arrivals: ArrivalModel::Bernoulli {
            probability: params.arrival_probability,
            per_device: None,
            data_bits: Span::new(1e6, 5e6),
            instructions: Span::new(5e8, 2e9),
            deadline_s: Span::new(1.0, 3.0),
        },
        gains: GainModel::LogUniform { min: 1e-8, max: 1e-6 },
    }
}
