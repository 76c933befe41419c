//! The discretized offloading game played in one slot.
//!
//! Devices choose among staying local (or dropping) and offloading to one
//! server at one allocation level (and, optionally, one edge fraction).
//! Servers choose a posted price and a backup draw. Every strategy space is a
//! finite grid, so best responses are exact argmaxes and the whole game can be
//! enumerated on small instances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::costs::{full_local_cost, split_cost, uplink_rate, CostBreakdown, SplitCombine};
use crate::error::{Error, Result};
use crate::model::{
    Assignment, DeviceSpec, ServerDecision, ServerSpec, SplitDecision, Task, TaskDecision,
    CAPACITY_RTOL,
};
use crate::policy::reward::{server_reward, RewardCoefficients};

/// Relative margin a server's best response must beat its incumbent by
/// before the equilibrium loop switches.
pub const SERVER_TIE_RTOL: f64 = 1e-9;

/// Upper bound on device sweeps inside one follower response.
const MAX_FOLLOWER_SWEEPS: usize = 10_000;

/// Geometric grid of posted prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for PriceGrid {
    fn default() -> Self {
        PriceGrid {
            min: 1e-11,
            max: 1e-9,
            points: 16,
        }
    }
}

impl PriceGrid {
    /// A grid with a single price.
    pub fn single(price: f64) -> Self {
        PriceGrid {
            min: price,
            max: price,
            points: 1,
        }
    }

    /// Grid values in ascending order.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Config("price grid is empty".into()));
        }
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::Config(format!(
                "price grid needs 0 < min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let ratio = (self.max / self.min).powf(1.0 / (self.points - 1) as f64);
        let mut v: Vec<f64> = (0..self.points)
            .map(|j| self.min * ratio.powi(j as i32))
            .collect();
        v[self.points - 1] = self.max;
        Ok(v)
    }
}

/// Grids, reward weights and solver settings of the slot game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(default)]
    pub coefficients: RewardCoefficients,
    /// Allocation grid is `f_max * j / alloc_levels` for `j = 1..=alloc_levels`.
    #[serde(default = "default_alloc_levels")]
    pub alloc_levels: usize,
    /// Whether devices may split tasks between local and edge execution.
    #[serde(default)]
    pub fractional_splits: bool,
    /// Non-zero edge fractions offered when fractional splits are enabled.
    #[serde(default = "default_edge_fractions")]
    pub edge_fractions: Vec<f64>,
    #[serde(default = "default_true")]
    pub allow_drop: bool,
    #[serde(default)]
    pub price_grid: PriceGrid,
    /// Backup draws as fractions of `f_max`, capped by the backup pool.
    #[serde(default = "default_backup_fractions")]
    pub backup_fractions: Vec<f64>,
    /// Convergence threshold on the normalized strategy change.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub combine: SplitCombine,
}

fn default_alloc_levels() -> usize {
    8
}

fn default_edge_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

fn default_true() -> bool {
    true
}

fn default_backup_fractions() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    1000
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            coefficients: RewardCoefficients::default(),
            alloc_levels: default_alloc_levels(),
            fractional_splits: false,
            edge_fractions: default_edge_fractions(),
            allow_drop: true,
            price_grid: PriceGrid::default(),
            backup_fractions: default_backup_fractions(),
            tol: default_tol(),
            max_iters: default_max_iters(),
            combine: SplitCombine::Parallel,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !self.coefficients.is_valid() {
            return bad(format!(
                "reward coefficients must be non-negative: {:?}",
                self.coefficients
            ));
        }
        if self.alloc_levels == 0 {
            return bad("alloc_levels must be at least 1".into());
        }
        if self.fractional_splits
            && (self.edge_fractions.is_empty()
                || self
                    .edge_fractions
                    .iter()
                    .any(|e| !(*e > 0.0 && *e <= 1.0)))
        {
            return bad("edge_fractions must be non-empty and within (0, 1]".into());
        }
        if self.backup_fractions.is_empty()
            || self
                .backup_fractions
                .iter()
                .any(|b| !(*b >= 0.0 && b.is_finite()))
        {
            return bad("backup grid must be non-empty and non-negative".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        self.price_grid.values().map(|_| ())
    }
}

/// What a device does with its task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Choice {
    Local,
    Drop,
    /// Local execution that misses the deadline, used when nothing meets it
    /// and dropping is disabled.
    ForcedLocal,
    Offload {
        server: usize,
        /// Index into the allocation grid, from zero.
        level: usize,
        alloc: f64,
        edge: f64,
    },
}

/// One entry of a device's strategy grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceOption {
    pub choice: Choice,
    pub split: SplitDecision,
    pub cost: CostBreakdown,
    /// Reward before the price term.
    pub base_reward: f64,
}

impl DeviceOption {
    pub fn server(&self) -> Option<usize> {
        match self.choice {
            Choice::Offload { server, .. } => Some(server),
            _ => None,
        }
    }

    pub fn alloc(&self) -> f64 {
        match self.choice {
            Choice::Offload { alloc, .. } => alloc,
            _ => 0.0,
        }
    }
}

/// A server's grid position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ServerChoice {
    pub price: usize,
    pub backup: usize,
}

/// A joint strategy profile as grid indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    pub devices: Vec<usize>,
    pub servers: Vec<ServerChoice>,
}

/// Outcome of one device's best response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceResponse {
    pub option: usize,
    pub reward: f64,
    /// Nothing met the deadline and dropping is disabled.
    pub forced_local: bool,
}

/// Outcome of one server's best response.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerResponse {
    pub choice: ServerChoice,
    pub reward: f64,
    /// Reward the server would get by keeping its current choice.
    pub incumbent_reward: f64,
    /// Device profile after followers settle on `choice`.
    pub followers: Profile,
}

/// Result of the best-response loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub profile: Profile,
    pub iterations: usize,
    pub converged: bool,
    /// Grid points evaluated, device options and server options combined.
    pub evaluations: u64,
}

/// Per-server capacity data pulled out of [`ServerSpec`].
#[derive(Debug, Clone)]
struct ServerSlot {
    spec: ServerSpec,
    green_rate: f64,
}

/// The game for one slot: option grids, price grid and backup grids.
#[derive(Debug, Clone)]
pub struct GameInstance {
    tasks: Vec<Task>,
    devices: Vec<DeviceSpec>,
    baselines: Vec<CostBreakdown>,
    options: Vec<Vec<DeviceOption>>,
    servers: Vec<ServerSlot>,
    prices: Vec<f64>,
    backups: Vec<Vec<f64>>,
    config: GameConfig,
}

impl GameInstance {
    /// Builds the option grids. `servers` must carry this slot's channel
    /// gains; `slot` selects per-slot green rates.
    pub fn new(
        tasks: &[Task],
        devices: &[DeviceSpec],
        servers: &[ServerSpec],
        slot: usize,
        config: &GameConfig,
    ) -> Result<Self> {
        config.validate()?;
        let prices = config.price_grid.values()?;
        let backups = servers
            .iter()
            .map(|s| {
                let mut v: Vec<f64> = config
                    .backup_fractions
                    .iter()
                    .map(|f| (f * s.f_max_cycles_per_s).min(s.backup_capacity_cycles_per_s))
                    .collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();

        let edges: Vec<f64> = if config.fractional_splits {
            let mut e = config.edge_fractions.clone();
            e.sort_by(f64::total_cmp);
            e.dedup();
            e
        } else {
            vec![1.0]
        };

        let mut task_devices = Vec::with_capacity(tasks.len());
        let mut baselines = Vec::with_capacity(tasks.len());
        let mut options = Vec::with_capacity(tasks.len());
        for task in tasks {
            let device = devices.get(task.device_id).ok_or(Error::UnknownDevice {
                task: task.id,
                device: task.device_id,
            })?;
            let base = full_local_cost(task, device)?;
            let coeffs = &config.coefficients;

            let baseline = if base.total_delay <= task.deadline_s {
                DeviceOption {
                    choice: Choice::Local,
                    split: SplitDecision::LOCAL,
                    cost: base,
                    base_reward: 0.0,
                }
            } else if config.allow_drop {
                DeviceOption {
                    choice: Choice::Drop,
                    split: SplitDecision::DROPPED,
                    cost: CostBreakdown::dropped(),
                    base_reward: 0.0,
                }
            } else {
                DeviceOption {
                    choice: Choice::ForcedLocal,
                    split: SplitDecision::LOCAL,
                    cost: base,
                    base_reward: 0.0,
                }
            };
            let mut opts = vec![baseline];

            for (k, server) in servers.iter().enumerate() {
                if server.admission_cap == Some(0) || !(uplink_rate(device, server)? > 0.0) {
                    continue;
                }
                for &edge in &edges {
                    let split = SplitDecision::partial(edge);
                    for level in 0..config.alloc_levels {
                        let alloc = server.f_max_cycles_per_s * (level + 1) as f64
                            / config.alloc_levels as f64;
                        let cost = split_cost(
                            task,
                            &split,
                            device,
                            server,
                            device.f_max_cycles_per_s,
                            alloc,
                            config.combine,
                        )?;
                        if cost.total_delay > task.deadline_s {
                            continue;
                        }
                        let base_reward = coeffs.lambda * (base.total_delay - cost.total_delay)
                            + coeffs.epsilon * (base.device_energy - cost.device_energy);
                        opts.push(DeviceOption {
                            choice: Choice::Offload {
                                server: k,
                                level,
                                alloc,
                                edge,
                            },
                            split,
                            cost,
                            base_reward,
                        });
                    }
                }
            }
            task_devices.push(device.clone());
            baselines.push(base);
            options.push(opts);
        }

        Ok(GameInstance {
            tasks: tasks.to_vec(),
            devices: task_devices,
            baselines,
            options,
            servers: servers
                .iter()
                .map(|s| ServerSlot {
                    spec: s.clone(),
                    green_rate: s.green_rate_at(slot),
                })
                .collect(),
            prices,
            backups,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Device owning task `i`.
    pub fn device(&self, i: usize) -> &DeviceSpec {
        &self.devices[i]
    }

    pub fn n_devices(&self) -> usize {
        self.tasks.len()
    }

    pub fn n_servers(&self) -> usize {
        self.servers.len()
    }

    /// Full-local cost of device `i`'s task.
    pub fn baseline(&self, i: usize) -> &CostBreakdown {
        &self.baselines[i]
    }

    /// Strategy grid of device `i`; entry zero is the stay-local/drop option.
    pub fn options(&self, i: usize) -> &[DeviceOption] {
        &self.options[i]
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn backups(&self, k: usize) -> &[f64] {
        &self.backups[k]
    }

    pub fn server_spec(&self, k: usize) -> &ServerSpec {
        &self.servers[k].spec
    }

    pub fn green_rate(&self, k: usize) -> f64 {
        self.servers[k].green_rate
    }

    /// Number of grid points in server `k`'s strategy space.
    pub fn server_grid_len(&self, k: usize) -> usize {
        self.prices.len() * self.backups[k].len()
    }

    /// Server grid point by flat index, price-major.
    pub fn server_choice(&self, k: usize, index: usize) -> ServerChoice {
        let nb = self.backups[k].len();
        ServerChoice {
            price: index / nb,
            backup: index % nb,
        }
    }

    pub fn server_choice_index(&self, k: usize, c: ServerChoice) -> usize {
        c.price * self.backups[k].len() + c.backup
    }

    pub fn server_decision(&self, k: usize, c: ServerChoice) -> ServerDecision {
        ServerDecision {
            price: self.prices[c.price],
            backup: self.backups[k][c.backup],
        }
    }

    /// Everyone at their stay-local option; servers at the lowest price and
    /// smallest backup.
    pub fn initial_profile(&self) -> Profile {
        Profile {
            devices: vec![0; self.n_devices()],
            servers: vec![ServerChoice::default(); self.n_servers()],
        }
    }

    fn capacity(&self, k: usize, c: ServerChoice) -> f64 {
        self.servers[k].spec.capacity_with(self.backups[k][c.backup])
    }

    /// Allocated load and admitted count per server.
    pub fn loads(&self, profile: &Profile) -> (Vec<f64>, Vec<usize>) {
        let mut load = vec![0.0; self.n_servers()];
        let mut count = vec![0; self.n_servers()];
        for (i, &o) in profile.devices.iter().enumerate() {
            let opt = &self.options[i][o];
            if let Some(k) = opt.server() {
                load[k] += opt.alloc();
                count[k] += 1;
            }
        }
        (load, count)
    }

    fn within_capacity(&self, k: usize, c: ServerChoice, load: f64, count: usize) -> bool {
        let cap_ok = load <= self.capacity(k, c) * (1.0 + CAPACITY_RTOL);
        let admit_ok = self.servers[k]
            .spec
            .admission_cap
            .map_or(true, |cap| count <= cap);
        cap_ok && admit_ok
    }

    /// Whether every server's capacity and admission bounds hold.
    pub fn is_feasible(&self, profile: &Profile) -> bool {
        let (load, count) = self.loads(profile);
        (0..self.n_servers())
            .all(|k| self.within_capacity(k, profile.servers[k], load[k], count[k]))
    }

    /// Whether device `i` can take option `o` given the others' load.
    pub(crate) fn fits(&self, i: usize, o: usize, profile: &Profile, load: &[f64], count: &[usize]) -> bool {
        let opt = &self.options[i][o];
        match opt.server() {
            None => true,
            Some(k) => {
                let own = &self.options[i][profile.devices[i]];
                let (mut l, mut c) = (load[k], count[k]);
                if own.server() == Some(k) {
                    l -= own.alloc();
                    c -= 1;
                }
                self.within_capacity(k, profile.servers[k], l + opt.alloc(), c + 1)
            }
        }
    }

    /// Reward of device `i` taking option `o` under the posted prices.
    pub fn option_reward(&self, i: usize, o: usize, profile: &Profile) -> f64 {
        let opt = &self.options[i][o];
        match opt.server() {
            None => opt.base_reward,
            Some(k) => {
                let price = self.prices[profile.servers[k].price];
                opt.base_reward - self.config.coefficients.mu * price * opt.alloc()
            }
        }
    }

    pub fn device_rewards(&self, profile: &Profile) -> Vec<f64> {
        (0..self.n_devices())
            .map(|i| self.option_reward(i, profile.devices[i], profile))
            .collect()
    }

    fn server_reward_with_load(&self, k: usize, c: ServerChoice, load: f64) -> f64 {
        server_reward(
            &self.servers[k].spec,
            self.servers[k].green_rate,
            load,
            &self.server_decision(k, c),
        )
    }

    pub fn server_rewards(&self, profile: &Profile) -> Vec<f64> {
        let (load, _) = self.loads(profile);
        (0..self.n_servers())
            .map(|k| self.server_reward_with_load(k, profile.servers[k], load[k]))
            .collect()
    }

    /// Sum of all device and server rewards.
    pub fn social_reward(&self, profile: &Profile) -> f64 {
        self.device_rewards(profile).iter().sum::<f64>()
            + self.server_rewards(profile).iter().sum::<f64>()
    }

    /// Best option for device `i` against everyone else in `profile`.
    ///
    /// Options are scanned in grid order (stay-local first, then by server
    /// index, then most-local split, then smallest allocation) and only a
    /// strictly larger reward displaces the current best, which fixes the
    /// tie-break.
    pub fn device_best_response(&self, i: usize, profile: &Profile) -> DeviceResponse {
        let (load, count) = self.loads(profile);
        let mut evals = 0;
        self.best_option(i, profile, &load, &count, &mut evals)
    }

    fn best_option(
        &self,
        i: usize,
        profile: &Profile,
        load: &[f64],
        count: &[usize],
        evals: &mut u64,
    ) -> DeviceResponse {
        let mut best = 0;
        let mut best_reward = self.option_reward(i, 0, profile);
        *evals += self.options[i].len() as u64;
        for o in 1..self.options[i].len() {
            let r = self.option_reward(i, o, profile);
            if r > best_reward && self.fits(i, o, profile, load, count) {
                best = o;
                best_reward = r;
            }
        }
        DeviceResponse {
            option: best,
            reward: best_reward,
            forced_local: matches!(self.options[i][best].choice, Choice::ForcedLocal),
        }
    }

    /// One Gauss-Seidel pass: devices respond in index order, each seeing
    /// the choices already made in this pass. Returns whether anyone moved.
    fn device_sweep(&self, profile: &mut Profile, evals: &mut u64) -> bool {
        let (mut load, mut count) = self.loads(profile);
        let mut changed = false;
        for i in 0..self.n_devices() {
            let resp = self.best_option(i, profile, &load, &count, evals);
            let old = profile.devices[i];
            if resp.option != old {
                let (from, to) = (&self.options[i][old], &self.options[i][resp.option]);
                if let Some(k) = from.server() {
                    load[k] -= from.alloc();
                    count[k] -= 1;
                }
                if let Some(k) = to.server() {
                    load[k] += to.alloc();
                    count[k] += 1;
                }
                profile.devices[i] = resp.option;
                changed = true;
            }
        }
        changed
    }

    /// Devices repeatedly best-respond to fixed server choices until nobody
    /// moves.
    pub fn follower_response(&self, profile: &Profile) -> Profile {
        let mut evals = 0;
        self.follower_response_counted(profile, &mut evals)
    }

    fn follower_response_counted(&self, profile: &Profile, evals: &mut u64) -> Profile {
        let mut p = profile.clone();
        for _ in 0..MAX_FOLLOWER_SWEEPS {
            if !self.device_sweep(&mut p, evals) {
                break;
            }
        }
        p
    }

    /// Server `k`'s reward if it switches to `c` and devices re-settle.
    pub fn server_deviation_reward(&self, k: usize, c: ServerChoice, profile: &Profile) -> f64 {
        let mut evals = 0;
        self.server_deviation_counted(k, c, profile, &mut evals).0
    }

    fn server_deviation_counted(
        &self,
        k: usize,
        c: ServerChoice,
        profile: &Profile,
        evals: &mut u64,
    ) -> (f64, Profile) {
        let mut p = profile.clone();
        p.servers[k] = c;
        let followers = self.follower_response_counted(&p, evals);
        let (load, _) = self.loads(&followers);
        *evals += 1;
        (self.server_reward_with_load(k, c, load[k]), followers)
    }

    /// Best grid point for server `k`, anticipating how devices react to
    /// each price and backup level. Ties go to the lower price, then the
    /// smaller backup.
    pub fn server_best_response(&self, k: usize, profile: &Profile) -> ServerResponse {
        let mut evals = 0;
        self.server_best_response_counted(k, profile, &mut evals)
    }

    fn server_best_response_counted(
        &self,
        k: usize,
        profile: &Profile,
        evals: &mut u64,
    ) -> ServerResponse {
        let incumbent = profile.servers[k];
        let mut best: Option<(ServerChoice, f64, Profile)> = None;
        let mut incumbent_reward = f64::NEG_INFINITY;
        for idx in 0..self.server_grid_len(k) {
            let c = self.server_choice(k, idx);
            let (r, followers) = self.server_deviation_counted(k, c, profile, evals);
            if c == incumbent {
                incumbent_reward = r;
            }
            if best.as_ref().map_or(true, |(_, b, _)| r > *b) {
                best = Some((c, r, followers));
            }
        }
        let (choice, reward, followers) = best.expect("server grid is non-empty");
        ServerResponse {
            choice,
            reward,
            incumbent_reward,
            followers,
        }
    }

    /// Largest normalized change between two profiles: split fractions,
    /// allocations over `f_max`, prices over the top price, backups over
    /// `f_max`, and a unit jump for switching server or drop status.
    pub fn strategy_change(&self, a: &Profile, b: &Profile) -> f64 {
        let mut change: f64 = 0.0;
        for i in 0..self.n_devices() {
            let (x, y) = (&self.options[i][a.devices[i]], &self.options[i][b.devices[i]]);
            if a.devices[i] == b.devices[i] {
                continue;
            }
            if x.server() != y.server() || x.split.drop != y.split.drop {
                change = change.max(1.0);
            }
            change = change
                .max((x.split.local - y.split.local).abs())
                .max((x.split.edge - y.split.edge).abs());
            if let (Some(k), Some(_)) = (x.server(), y.server()) {
                change = change
                    .max((x.alloc() - y.alloc()).abs() / self.servers[k].spec.f_max_cycles_per_s);
            }
        }
        let top = *self.prices.last().expect("non-empty price grid");
        for k in 0..self.n_servers() {
            let (x, y) = (
                self.server_decision(k, a.servers[k]),
                self.server_decision(k, b.servers[k]),
            );
            change = change
                .max((x.price - y.price).abs() / top)
                .max((x.backup - y.backup).abs() / self.servers[k].spec.f_max_cycles_per_s);
        }
        change
    }

    /// Round-robin best responses from [`initial_profile`](Self::initial_profile):
    /// all devices respond, then each server responds with the devices'
    /// reaction in mind. Stops when an iteration changes no strategy variable
    /// by `tol` or more, or after `max_iters` iterations.
    pub fn best_response_equilibrium(&self) -> Equilibrium {
        self.best_response_from(self.initial_profile())
    }

    /// One round: a device sweep, then each server's best response.
    fn round(&self, profile: &mut Profile, evals: &mut u64) {
        self.device_sweep(profile, evals);
        for k in 0..self.n_servers() {
            let resp = self.server_best_response_counted(k, profile, evals);
            let margin = SERVER_TIE_RTOL * resp.incumbent_reward.abs().max(1.0);
            if resp.choice != profile.servers[k] && resp.reward > resp.incumbent_reward + margin {
                profile.servers[k] = resp.choice;
                profile.devices = resp.followers.devices;
            }
        }
    }

    pub fn best_response_from(&self, start: Profile) -> Equilibrium {
        // One iteration is a pure function of the profile, so a revisited
        // profile means the dynamics are periodic from there on. The outcome
        // after `max_iters` is then read off the recorded cycle.
        let mut seen: HashMap<Profile, usize> = HashMap::new();
        let mut history = vec![start.clone()];
        let mut evals_at = vec![0u64];
        seen.insert(start.clone(), 0);
        let mut profile = start;
        let mut evals = 0u64;
        for iter in 1..=self.config.max_iters {
            let before = profile.clone();
            self.round(&mut profile, &mut evals);
            if self.strategy_change(&before, &profile) < self.config.tol {
                return Equilibrium {
                    profile,
                    iterations: iter,
                    converged: true,
                    evaluations: evals,
                };
            }
            if let Some(&j) = seen.get(&profile) {
                let period = iter - j;
                let left = self.config.max_iters - iter;
                let r = left % period;
                let per_cycle = evals - evals_at[j];
                return Equilibrium {
                    profile: history[j + r].clone(),
                    iterations: self.config.max_iters,
                    converged: false,
                    evaluations: evals
                        + (left / period) as u64 * per_cycle
                        + (evals_at[j + r] - evals_at[j]),
                };
            }
            seen.insert(profile.clone(), iter);
            history.push(profile.clone());
            evals_at.push(evals);
        }
        Equilibrium {
            profile,
            iterations: self.config.max_iters,
            converged: false,
            evaluations: evals,
        }
    }

    /// Concrete decisions for a profile.
    pub fn assignment(&self, profile: &Profile) -> Assignment {
        let tasks = profile
            .devices
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let opt = &self.options[i][o];
                TaskDecision {
                    task_id: self.tasks[i].id,
                    split: opt.split,
                    server: opt.server(),
                    alloc_rate: opt.alloc(),
                }
            })
            .collect();
        let servers = profile
            .servers
            .iter()
            .enumerate()
            .map(|(k, &c)| self.server_decision(k, c))
            .collect();
        Assignment { tasks, servers }
    }
}
