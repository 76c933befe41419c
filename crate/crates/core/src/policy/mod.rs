//! Offloading decision makers and game-theoretic verification tools.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{split_cost, CostBreakdown};
use crate::error::{Error, Result};
use crate::model::Assignment;

pub mod baselines;
pub mod game;
pub mod nash;
pub mod oracle;
pub mod reward;

pub use game::{
    Choice, DeviceOption, DeviceResponse, Equilibrium, GameConfig, GameInstance, PriceGrid,
    Profile, ServerChoice, ServerResponse,
};
pub use nash::{check_epsilon_nash, is_epsilon_nash, Deviation, NashCheck, Player};
pub use oracle::{brute_force_oracle, oracle_cardinality, OracleOptions, OracleReport};
pub use reward::{device_reward, server_reward, OffloadTerms, RewardCoefficients};

/// Which decision maker drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    AllLocal,
    AllEdgeGreedy,
    RandomFeasible,
    Equilibrium,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::AllLocal,
        PolicyKind::AllEdgeGreedy,
        PolicyKind::RandomFeasible,
        PolicyKind::Equilibrium,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            PolicyKind::AllLocal => "all_local",
            PolicyKind::AllEdgeGreedy => "all_edge_greedy",
            PolicyKind::RandomFeasible => "random_feasible",
            PolicyKind::Equilibrium => "equilibrium",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                let known: Vec<_> = PolicyKind::ALL.iter().map(|p| p.id()).collect();
                Error::Config(format!(
                    "unknown policy `{s}`; known policies: {}",
                    known.join(", ")
                ))
            })
    }
}

/// What a policy decided for one slot, with the rewards it earns.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub assignment: Assignment,
    pub costs: Vec<CostBreakdown>,
    pub device_rewards: Vec<f64>,
    pub server_rewards: Vec<f64>,
    /// Best-response iterations; one for one-shot policies.
    pub iterations: usize,
    pub converged: bool,
    /// Grid points evaluated while deciding.
    pub evaluations: u64,
    /// Grid profile, for policies that stay on the grid.
    pub profile: Option<Profile>,
}

/// Costs and rewards of an arbitrary assignment in `game`.
pub fn score_assignment(
    game: &GameInstance,
    assignment: &Assignment,
) -> Result<(Vec<CostBreakdown>, Vec<f64>, Vec<f64>)> {
    let coeffs = &game.config().coefficients;
    let mut costs = Vec::with_capacity(game.n_devices());
    let mut device_rewards = Vec::with_capacity(game.n_devices());
    for (i, d) in assignment.tasks.iter().enumerate() {
        let device = game.device(i);
        let cost = match d.server {
            None if d.split.drop => CostBreakdown::dropped(),
            None => *game.baseline(i),
            Some(k) => split_cost(
                &game.tasks()[i],
                &d.split,
                device,
                game.server_spec(k),
                device.f_max_cycles_per_s,
                d.alloc_rate,
                game.config().combine,
            )?,
        };
        let terms = d.server.map(|k| OffloadTerms {
            delay: cost.total_delay,
            energy: cost.device_energy,
            price: assignment.servers[k].price,
            alloc: d.alloc_rate,
        });
        device_rewards.push(device_reward(game.baseline(i), terms.as_ref(), coeffs));
        costs.push(cost);
    }
    let server_rewards = (0..game.n_servers())
        .map(|k| {
            server_reward(
                game.server_spec(k),
                game.green_rate(k),
                assignment.load(k),
                &assignment.servers[k],
            )
        })
        .collect();
    Ok((costs, device_rewards, server_rewards))
}

fn outcome_from_assignment(
    game: &GameInstance,
    assignment: Assignment,
    profile: Option<Profile>,
    iterations: usize,
    converged: bool,
    evaluations: u64,
) -> Result<PolicyOutcome> {
    let (costs, device_rewards, server_rewards) = score_assignment(game, &assignment)?;
    Ok(PolicyOutcome {
        assignment,
        costs,
        device_rewards,
        server_rewards,
        iterations,
        converged,
        evaluations,
        profile,
    })
}

/// Runs `kind` on one slot's game. `rng` is only drawn from by
/// [`PolicyKind::RandomFeasible`].
pub fn run_policy<R: Rng + ?Sized>(
    kind: PolicyKind,
    game: &GameInstance,
    rng: &mut R,
) -> Result<PolicyOutcome> {
    match kind {
        PolicyKind::AllLocal => {
            outcome_from_assignment(game, baselines::all_local(game), None, 1, true, 0)
        }
        PolicyKind::AllEdgeGreedy => {
            let a = baselines::all_edge_greedy(game)?;
            let evals = (game.n_devices() * game.n_servers()) as u64;
            outcome_from_assignment(game, a, None, 1, true, evals)
        }
        PolicyKind::RandomFeasible => {
            let p = baselines::random_feasible(game, rng);
            let evals = (0..game.n_devices())
                .map(|i| game.options(i).len() as u64)
                .sum();
            outcome_from_assignment(game, game.assignment(&p), Some(p), 1, true, evals)
        }
        PolicyKind::Equilibrium => {
            let eq = game.best_response_equilibrium();
            outcome_from_assignment(
                game,
                game.assignment(&eq.profile),
                Some(eq.profile),
                eq.iterations,
                eq.converged,
                eq.evaluations,
            )
        }
    }
}
