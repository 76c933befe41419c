//! ε-Nash certification of grid profiles.
//!
//! A device deviates unilaterally: it may move to any grid option that fits
//! next to everyone else's current allocation. A server deviates as a price
//! leader: it moves to another grid point and devices re-settle before its
//! reward is measured.

use crate::policy::game::{GameInstance, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Device(usize),
    Server(usize),
}

/// An improving unilateral move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub player: Player,
    /// Device option index, or flat server grid index.
    pub to: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NashCheck {
    Holds,
    /// The most profitable deviation found.
    Improvable(Deviation),
}

impl NashCheck {
    pub fn holds(&self) -> bool {
        matches!(self, NashCheck::Holds)
    }
}

/// Most profitable device deviation from `profile`, if any gains at all.
pub(crate) fn best_device_deviation(
    game: &GameInstance,
    i: usize,
    profile: &Profile,
) -> Option<Deviation> {
    let current = game.option_reward(i, profile.devices[i], profile);
    let resp = game.device_best_response(i, profile);
    let gain = resp.reward - current;
    (resp.option != profile.devices[i] && gain > 0.0).then_some(Deviation {
        player: Player::Device(i),
        to: resp.option,
        gain,
    })
}

/// Most profitable server deviation from `profile`, if any gains at all.
pub(crate) fn best_server_deviation(
    game: &GameInstance,
    k: usize,
    profile: &Profile,
) -> Option<Deviation> {
    let current = game.server_rewards(profile)[k];
    let here = game.server_choice_index(k, profile.servers[k]);
    let mut best: Option<Deviation> = None;
    for idx in (0..game.server_grid_len(k)).filter(|&idx| idx != here) {
        let r = game.server_deviation_reward(k, game.server_choice(k, idx), profile);
        let gain = r - current;
        if gain > 0.0 && best.map_or(true, |b| gain > b.gain) {
            best = Some(Deviation {
                player: Player::Server(k),
                to: idx,
                gain,
            });
        }
    }
    best
}

/// Whether no player can gain more than `epsilon` by deviating alone. On
/// failure the witness is the deviation with the largest gain over all
/// players.
pub fn check_epsilon_nash(game: &GameInstance, profile: &Profile, epsilon: f64) -> NashCheck {
    let devices = (0..game.n_devices()).filter_map(|i| best_device_deviation(game, i, profile));
    let servers = (0..game.n_servers()).filter_map(|k| best_server_deviation(game, k, profile));
    let worst = devices
        .chain(servers)
        .filter(|d| d.gain > epsilon)
        .fold(None, |acc: Option<Deviation>, d| match acc {
            Some(a) if a.gain >= d.gain => Some(a),
            _ => Some(d),
        });
    match worst {
        Some(d) => NashCheck::Improvable(d),
        None => NashCheck::Holds,
    }
}

/// Short-circuiting form of [`check_epsilon_nash`]; devices are checked first
/// because their deviations are cheap.
pub fn is_epsilon_nash(game: &GameInstance, profile: &Profile, epsilon: f64) -> bool {
    (0..game.n_devices())
        .all(|i| best_device_deviation(game, i, profile).map_or(true, |d| d.gain <= epsilon))
        && (0..game.n_servers())
            .all(|k| best_server_deviation(game, k, profile).map_or(true, |d| d.gain <= epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::game::tests::{device, server, task};
    use crate::policy::game::{GameConfig, PriceGrid};

    #[test]
    fn single_device_best_response_passes_at_zero() {
        let tasks = [task(0, 5.0)];
        let c = GameConfig {
            price_grid: PriceGrid::single(1e-10),
            backup_fractions: vec![0.0],
            ..Default::default()
        };
        let g = GameInstance::new(&tasks, &[device(0)], &[server(0, 1e10)], 0, &c).unwrap();
        let mut p = g.initial_profile();
        p.devices[0] = g.device_best_response(0, &p).option;
        assert!(check_epsilon_nash(&g, &p, 0.0).holds());
        assert!(is_epsilon_nash(&g, &p, 0.0));
    }

    #[test]
    fn off_best_response_device_is_the_witness() {
        let tasks = [task(0, 5.0), task(1, 5.0)];
        let devices = [device(0), device(1)];
        let c = GameConfig {
            price_grid: PriceGrid::single(1e-10),
            ..Default::default()
        };
        let g = GameInstance::new(&tasks, &devices, &[server(0, 2e10)], 0, &c).unwrap();
        let eq = g.best_response_equilibrium();
        assert!(check_epsilon_nash(&g, &eq.profile, 0.0).holds());

        let mover = (0..2).find(|&i| eq.profile.devices[i] != 0).unwrap();
        let mut bad = eq.profile.clone();
        bad.devices[mover] = 0;
        match check_epsilon_nash(&g, &bad, 0.0) {
            NashCheck::Improvable(d) => {
                assert!(matches!(d.player, Player::Device(_)));
                assert!(d.gain > 0.0);
            }
            NashCheck::Holds => panic!("an idle device should want to offload"),
        }
        assert!(!is_epsilon_nash(&g, &bad, 0.0));
    }
}
