//! Exhaustive search over every joint grid profile of a small slot game.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::policy::game::{GameInstance, Profile};
use crate::policy::nash::is_epsilon_nash;

pub const ORACLE_MAX_DEVICES: usize = 4;
pub const ORACLE_MAX_SERVERS: usize = 2;
pub const ORACLE_MAX_PROFILES: u128 = 10_000_000;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Absolute tolerance of the ε-Nash test.
    pub epsilon: f64,
    /// Keep a row per joint profile in the report.
    pub record_table: bool,
}

/// Rewards of one joint profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRewards {
    pub profile: Profile,
    pub feasible: bool,
    pub device_rewards: Vec<f64>,
    pub server_rewards: Vec<f64>,
    pub social: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cardinality: u128,
    pub feasible_profiles: u64,
    /// Feasible profile with the largest total reward; first in enumeration
    /// order on ties.
    pub social_optimum: Option<Profile>,
    pub social_optimum_reward: f64,
    /// Feasible pure-strategy ε-Nash profiles in enumeration order.
    pub nash_profiles: Vec<Profile>,
    /// Every profile, when requested.
    pub table: Vec<ProfileRewards>,
}

impl OracleReport {
    pub fn is_nash(&self, profile: &Profile) -> bool {
        self.nash_profiles.contains(profile)
    }
}

/// Number of joint grid profiles of `game`.
pub fn oracle_cardinality(game: &GameInstance) -> u128 {
    let devices = (0..game.n_devices()).map(|i| game.options(i).len() as u128);
    let servers = (0..game.n_servers()).map(|k| game.server_grid_len(k) as u128);
    devices
        .chain(servers)
        .fold(1u128, |acc, n| acc.saturating_mul(n))
}

/// Device digits first (device 0 fastest), then servers.
fn decode(game: &GameInstance, mut index: u64) -> Profile {
    let mut devices = Vec::with_capacity(game.n_devices());
    for i in 0..game.n_devices() {
        let n = game.options(i).len() as u64;
        devices.push((index % n) as usize);
        index /= n;
    }
    let mut servers = Vec::with_capacity(game.n_servers());
    for k in 0..game.n_servers() {
        let n = game.server_grid_len(k) as u64;
        servers.push(game.server_choice(k, (index % n) as usize));
        index /= n;
    }
    Profile { devices, servers }
}

#[derive(Default)]
struct Partial {
    feasible: u64,
    best: Option<(u64, f64)>,
    nash: Vec<u64>,
    table: Vec<ProfileRewards>,
}

/// Enumerates every joint profile and reports the social optimum, the
/// ε-Nash set, and optionally the full reward table.
///
/// Refuses instances with more than [`ORACLE_MAX_DEVICES`] devices,
/// [`ORACLE_MAX_SERVERS`] servers or [`ORACLE_MAX_PROFILES`] joint profiles.
/// Work is split into fixed chunks evaluated in parallel and merged in index
/// order, so the result does not depend on thread scheduling.
pub fn brute_force_oracle(game: &GameInstance, opts: &OracleOptions) -> Result<OracleReport> {
    let cardinality = oracle_cardinality(game);
    if game.n_devices() > ORACLE_MAX_DEVICES
        || game.n_servers() > ORACLE_MAX_SERVERS
        || cardinality > ORACLE_MAX_PROFILES
    {
        return Err(Error::OracleTooLarge {
            cardinality,
            devices: game.n_devices(),
            servers: game.n_servers(),
        });
    }
    let total = cardinality as u64;
    let chunks = total.div_ceil(CHUNK);

    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = Partial::default();
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let profile = decode(game, index);
                let feasible = game.is_feasible(&profile);
                if opts.record_table {
                    let device_rewards = game.device_rewards(&profile);
                    let server_rewards = game.server_rewards(&profile);
                    let social = device_rewards.iter().sum::<f64>()
                        + server_rewards.iter().sum::<f64>();
                    part.table.push(ProfileRewards {
                        profile: profile.clone(),
                        feasible,
                        device_rewards,
                        server_rewards,
                        social,
                    });
                }
                if !feasible {
                    continue;
                }
                part.feasible += 1;
                let social = game.social_reward(&profile);
                if part.best.map_or(true, |(_, b)| social > b) {
                    part.best = Some((index, social));
                }
                if is_epsilon_nash(game, &profile, opts.epsilon) {
                    part.nash.push(index);
                }
            }
            part
        })
        .collect();

    let mut report = OracleReport {
        cardinality,
        feasible_profiles: 0,
        social_optimum: None,
        social_optimum_reward: f64::NEG_INFINITY,
        nash_profiles: Vec::new(),
        table: Vec::new(),
    };
    let mut best: Option<(u64, f64)> = None;
    for part in partials {
        report.feasible_profiles += part.feasible;
        if let Some((idx, s)) = part.best {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((idx, s));
            }
        }
        report
            .nash_profiles
            .extend(part.nash.into_iter().map(|i| decode(game, i)));
        report.table.extend(part.table);
    }
    if let Some((idx, s)) = best {
        report.social_optimum = Some(decode(game, idx));
        report.social_optimum_reward = s;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::game::tests::{device, server, task};
    use crate::policy::game::{GameConfig, PriceGrid};
    use crate::policy::nash::check_epsilon_nash;

    fn tiny_config() -> GameConfig {
        GameConfig {
            alloc_levels: 1,
            price_grid: PriceGrid::single(1e-10),
            backup_fractions: vec![0.0],
            ..Default::default()
        }
    }

    #[test]
    fn two_entry_table() {
        let tasks = [task(0, 5.0)];
        let g = GameInstance::new(&tasks, &[device(0)], &[server(0, 1e10)], 0, &tiny_config())
            .unwrap();
        let r = brute_force_oracle(
            &g,
            &OracleOptions {
                epsilon: 0.0,
                record_table: true,
            },
        )
        .unwrap();
        assert_eq!(r.cardinality, 2);
        assert_eq!(r.table.len(), 2);
        let best = r.table.iter().map(|row| row.social).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.social_optimum_reward, best);
    }

    #[test]
    fn symmetric_devices_give_symmetric_optimum() {
        let tasks = [task(0, 5.0), task(1, 5.0)];
        let devices = [device(0), device(1)];
        let mut c = tiny_config();
        c.alloc_levels = 4;
        let g = GameInstance::new(&tasks, &devices, &[server(0, 4e9)], 0, &c).unwrap();
        let r = brute_force_oracle(
            &g,
            &OracleOptions {
                epsilon: 0.0,
                record_table: false,
            },
        )
        .unwrap();
        let opt = r.social_optimum.clone().unwrap();
        let swapped = Profile {
            devices: vec![opt.devices[1], opt.devices[0]],
            servers: opt.servers.clone(),
        };
        assert!(g.is_feasible(&swapped));
        assert!((g.social_reward(&swapped) - r.social_optimum_reward).abs() < 1e-12);
    }

    #[test]
    fn nash_set_agrees_with_checker_and_contains_equilibrium() {
        let tasks = [task(0, 5.0), task(1, 5.0)];
        let devices = [device(0), device(1)];
        let mut c = GameConfig::default();
        c.coefficients.mu = 1.0;
        c.price_grid.points = 4;
        c.alloc_levels = 4;
        let g = GameInstance::new(&tasks, &devices, &[server(0, 4e9)], 0, &c).unwrap();
        let eq = g.best_response_equilibrium();
        assert!(eq.converged);
        let eps = 1e-6 * g.social_reward(&eq.profile).abs().max(1.0);
        let r = brute_force_oracle(
            &g,
            &OracleOptions {
                epsilon: eps,
                record_table: false,
            },
        )
        .unwrap();
        assert!(r.is_nash(&eq.profile));
        for p in &r.nash_profiles {
            assert!(check_epsilon_nash(&g, p, eps).holds());
        }
        assert!(g.social_reward(&eq.profile) <= r.social_optimum_reward);
    }

    #[test]
    fn oversize_is_refused() {
        let tasks: Vec<_> = (0..5).map(|i| task(i, 5.0)).collect();
        let devices: Vec<_> = (0..5).map(device).collect();
        let g = GameInstance::new(&tasks, &devices, &[server(0, 1e10)], 0, &tiny_config()).unwrap();
        assert!(matches!(
            brute_force_oracle(
                &g,
                &OracleOptions {
                    epsilon: 0.0,
                    record_table: false
                }
            ),
            Err(Error::OracleTooLarge { devices: 5, .. })
        ));
    }
}
