//! Comparison baselines.

use rand::Rng;

use crate::costs::{split_cost, uplink_rate};
use crate::error::Result;
use crate::model::{Assignment, ServerDecision, SplitDecision, TaskDecision};
use crate::policy::game::{GameInstance, Profile, ServerChoice};

fn cheapest_servers(game: &GameInstance) -> Vec<ServerDecision> {
    (0..game.n_servers())
        .map(|k| game.server_decision(k, ServerChoice::default()))
        .collect()
}

/// Every task runs fully on its device.
pub fn all_local(game: &GameInstance) -> Assignment {
    Assignment {
        tasks: game
            .tasks()
            .iter()
            .map(|t| TaskDecision::local(t.id))
            .collect(),
        servers: cheapest_servers(game),
    }
}

/// Every task goes to its fastest-uplink server, which splits its capacity
/// equally among the tasks it admits. Tasks that would then miss their
/// deadline are dropped when dropping is allowed, otherwise kept local.
/// Tasks over a server's admission cap, or with no reachable server, stay
/// local.
pub fn all_edge_greedy(game: &GameInstance) -> Result<Assignment> {
    let n_servers = game.n_servers();
    let mut target = Vec::with_capacity(game.n_devices());
    for i in 0..game.n_devices() {
        let device = game.device(i);
        let mut best: Option<(usize, f64)> = None;
        for k in 0..n_servers {
            let spec = game.server_spec(k);
            if spec.admission_cap == Some(0) {
                continue;
            }
            let rate = uplink_rate(device, spec)?;
            if rate > 0.0 && best.map_or(true, |(_, r)| rate > r) {
                best = Some((k, rate));
            }
        }
        target.push(best.map(|(k, _)| k));
    }

    let mut admitted = vec![0usize; n_servers];
    let mut chosen = vec![None; game.n_devices()];
    for (i, t) in target.iter().enumerate() {
        if let Some(k) = *t {
            if game.server_spec(k).admission_cap.map_or(true, |cap| admitted[k] < cap) {
                admitted[k] += 1;
                chosen[i] = Some(k);
            }
        }
    }

    let allow_drop = game.config().allow_drop;
    let mut tasks = Vec::with_capacity(game.n_devices());
    for (i, task) in game.tasks().iter().enumerate() {
        let decision = match chosen[i] {
            None => TaskDecision::local(task.id),
            Some(k) => {
                let spec = game.server_spec(k);
                let share = spec.f_max_cycles_per_s / admitted[k] as f64;
                let device = game.device(i);
                let cost = split_cost(
                    task,
                    &SplitDecision::EDGE,
                    device,
                    spec,
                    device.f_max_cycles_per_s,
                    share,
                    game.config().combine,
                )?;
                if cost.total_delay <= task.deadline_s {
                    TaskDecision {
                        task_id: task.id,
                        split: SplitDecision::EDGE,
                        server: Some(k),
                        alloc_rate: share,
                    }
                } else if allow_drop {
                    TaskDecision::dropped(task.id)
                } else {
                    TaskDecision::local(task.id)
                }
            }
        };
        tasks.push(decision);
    }
    Ok(Assignment {
        tasks,
        servers: cheapest_servers(game),
    })
}

/// Servers pick a uniformly random grid point; then each device, in index
/// order, picks uniformly among the grid options that still fit.
pub fn random_feasible<R: Rng + ?Sized>(game: &GameInstance, rng: &mut R) -> Profile {
    let servers = (0..game.n_servers())
        .map(|k| game.server_choice(k, rng.gen_range(0..game.server_grid_len(k))))
        .collect();
    let mut profile = Profile {
        devices: vec![0; game.n_devices()],
        servers,
    };
    let (mut load, mut count) = game.loads(&profile);
    for i in 0..game.n_devices() {
        let fitting: Vec<usize> = (0..game.options(i).len())
            .filter(|&o| game.fits(i, o, &profile, &load, &count))
            .collect();
        let o = fitting[rng.gen_range(0..fitting.len())];
        let opt = &game.options(i)[o];
        if let Some(k) = opt.server() {
            load[k] += opt.alloc();
            count[k] += 1;
        }
        profile.devices[i] = o;
    }
    profile
}
