//! Discrete time-slotted simulation over a scheduling horizon.
//!
//! Each slot: materialize arrivals, read green supply, let the configured
//! policy decide, cost every task, step device batteries, account server
//! energy green-first and record metrics. Randomness comes from one root seed
//! split into independent streams per purpose and per slot, so any slot can
//! be rebuilt on its own and switching policy never perturbs arrivals.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{ledger_entry, server_energy_demand, DeviceBattery, GreenProfile};
use crate::error::{Error, Result};
use crate::model::{validate_assignment, DeviceSpec, ServerSpec, Task, CONNECTION_TIME_RANGE_S};
use crate::policy::{run_policy, server_reward, GameConfig, GameInstance, PolicyKind};

/// Inclusive uniform range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub min: f64,
    pub max: f64,
}

impl Span {
    pub fn new(min: f64, max: f64) -> Self {
        Span { min, max }
    }

    pub fn fixed(v: f64) -> Self {
        Span { min: v, max: v }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..=self.max)
        }
    }

    fn is_valid_positive(&self) -> bool {
        self.min > 0.0 && self.max >= self.min && self.max.is_finite()
    }
}

/// A task as written in an explicit arrival list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub device_id: usize,
    pub data_bits: f64,
    /// Work in instructions; scaled by the scenario's instructions-to-cycles
    /// factor.
    pub instructions: f64,
    pub deadline_s: f64,
}

/// Which devices have a task in each slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArrivalModel {
    /// Slot-by-slot task lists; slots past the end of the list are empty.
    Explicit { slots: Vec<Vec<TaskSpec>> },
    /// Each device independently has a task with probability `probability`
    /// (or its entry in `per_device`), with uniformly drawn parameters.
    Bernoulli {
        probability: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_device: Option<Vec<f64>>,
        data_bits: Span,
        instructions: Span,
        deadline_s: Span,
    },
}

impl ArrivalModel {
    pub fn none() -> Self {
        ArrivalModel::Explicit { slots: Vec::new() }
    }
}

/// Channel gain of each server per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainModel {
    /// Keep each server's configured `channel.gain`.
    Fixed,
    /// `per_server[k][t]`; the last sample repeats past the end.
    Trace { per_server: Vec<Vec<f64>> },
    /// Independent log-uniform draw per server per slot.
    LogUniform { min: f64, max: f64 },
}

/// Everything needed to run a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub horizon_slots: usize,
    pub slot_len_s: f64,
    pub seed: u64,
    pub instructions_to_cycles: f64,
    pub connection_time_range_s: (f64, f64),
    pub policy: PolicyKind,
    pub game: GameConfig,
    pub devices: Vec<DeviceSpec>,
    pub servers: Vec<ServerSpec>,
    /// One profile per server.
    pub green: Vec<GreenProfile>,
    pub arrivals: ArrivalModel,
    pub gains: GainModel,
}

impl Scenario {
    /// Sets device and server ids to their positions.
    pub fn renumber(&mut self) {
        for (i, d) in self.devices.iter_mut().enumerate() {
            d.id = i;
        }
        for (k, s) in self.servers.iter_mut().enumerate() {
            s.id = k;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.horizon_slots == 0 {
            return bad("horizon_slots must be at least 1".into());
        }
        if !(self.slot_len_s > 0.0 && self.slot_len_s.is_finite()) {
            return bad(format!("slot_len_s must be positive, got {}", self.slot_len_s));
        }
        if !(self.instructions_to_cycles > 0.0 && self.instructions_to_cycles.is_finite()) {
            return bad("instructions_to_cycles must be positive".into());
        }
        let (lo, hi) = self.connection_time_range_s;
        if !(0.0 <= lo && lo <= hi) {
            return bad(format!("connection_time_range_s [{lo}, {hi}] is empty"));
        }
        if self.servers.is_empty() {
            return bad("at least one server is required".into());
        }
        if self.green.len() != self.servers.len() {
            return bad(format!(
                "{} green profiles for {} servers",
                self.green.len(),
                self.servers.len()
            ));
        }
        for (i, d) in self.devices.iter().enumerate() {
            if d.id != i {
                return bad(format!("device at position {i} has id {}", d.id));
            }
            d.validate()?;
        }
        for (k, s) in self.servers.iter().enumerate() {
            if s.id != k {
                return bad(format!("server at position {k} has id {}", s.id));
            }
            s.validate(self.connection_time_range_s)?;
        }
        for g in &self.green {
            g.validate(self.horizon_slots)?;
        }
        self.game.validate().map_err(|e| Error::InvalidScenario(e.to_string()))?;

        let n = self.devices.len();
        match &self.arrivals {
            ArrivalModel::Explicit { slots } => {
                for (t, tasks) in slots.iter().enumerate() {
                    let mut seen = vec![false; n];
                    for ts in tasks {
                        if ts.device_id >= n {
                            return bad(format!(
                                "slot {t}: task references unknown device {}",
                                ts.device_id
                            ));
                        }
                        if std::mem::replace(&mut seen[ts.device_id], true) {
                            return bad(format!(
                                "slot {t}: device {} has more than one task",
                                ts.device_id
                            ));
                        }
                        if !(ts.data_bits > 0.0 && ts.instructions > 0.0 && ts.deadline_s > 0.0) {
                            return bad(format!(
                                "slot {t}: task parameters must be positive: {ts:?}"
                            ));
                        }
                    }
                }
            }
            ArrivalModel::Bernoulli {
                probability,
                per_device,
                data_bits,
                instructions,
                deadline_s,
            } => {
                if !(0.0..=1.0).contains(probability) {
                    return bad(format!("arrival probability {probability} outside [0, 1]"));
                }
                if let Some(p) = per_device {
                    if p.len() != n || p.iter().any(|p| !(0.0..=1.0).contains(p)) {
                        return bad(format!(
                            "per_device needs {n} probabilities within [0, 1]"
                        ));
                    }
                }
                for (name, s) in [
                    ("data_bits", data_bits),
                    ("instructions", instructions),
                    ("deadline_s", deadline_s),
                ] {
                    if !s.is_valid_positive() {
                        return bad(format!("arrival {name} range {s:?} must be positive"));
                    }
                }
            }
        }
        match &self.gains {
            GainModel::Fixed => {}
            GainModel::Trace { per_server } => {
                if per_server.len() != self.servers.len()
                    || per_server
                        .iter()
                        .any(|t| t.is_empty() || t.iter().any(|g| !(*g >= 0.0 && g.is_finite())))
                {
                    return bad("gain trace needs a non-empty non-negative series per server".into());
                }
            }
            GainModel::LogUniform { min, max } => {
                if !(*min > 0.0 && max >= min && max.is_finite()) {
                    return bad(format!("gain range [{min}, {max}] must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Tasks arriving in `slot`, in device order. Task ids equal device ids.
    pub fn arrivals_at(&self, slot: usize) -> Vec<Task> {
        let k = self.instructions_to_cycles;
        let to_task = |ts: &TaskSpec| Task {
            id: ts.device_id,
            device_id: ts.device_id,
            data_bits: ts.data_bits,
            cycles: ts.instructions * k,
            deadline_s: ts.deadline_s,
        };
        match &self.arrivals {
            ArrivalModel::Explicit { slots } => {
                let mut tasks: Vec<Task> = slots
                    .get(slot)
                    .map(|v| v.iter().map(to_task).collect())
                    .unwrap_or_default();
                tasks.sort_by_key(|t| t.device_id);
                tasks
            }
            ArrivalModel::Bernoulli {
                probability,
                per_device,
                data_bits,
                instructions,
                deadline_s,
            } => {
                let mut rng = stream(self.seed, Stream::Arrivals, slot);
                let mut tasks = Vec::new();
                for d in 0..self.devices.len() {
                    let p = per_device.as_ref().map_or(*probability, |v| v[d]);
                    // Draw every field for every device so one device's
                    // outcome never shifts another's parameters.
                    let hit = rng.gen::<f64>() < p;
                    let spec = TaskSpec {
                        device_id: d,
                        data_bits: data_bits.sample(&mut rng),
                        instructions: instructions.sample(&mut rng),
                        deadline_s: deadline_s.sample(&mut rng),
                    };
                    if hit {
                        tasks.push(to_task(&spec));
                    }
                }
                tasks
            }
        }
    }

    /// Servers with their channel gain set for `slot`.
    pub fn servers_at(&self, slot: usize) -> Vec<ServerSpec> {
        let mut servers = self.servers.clone();
        match &self.gains {
            GainModel::Fixed => {}
            GainModel::Trace { per_server } => {
                for (s, trace) in servers.iter_mut().zip(per_server) {
                    s.channel.gain = trace[slot.min(trace.len() - 1)];
                }
            }
            GainModel::LogUniform { min, max } => {
                let mut rng = stream(self.seed, Stream::Gains, slot);
                let (lo, hi) = (min.ln(), max.ln());
                for s in &mut servers {
                    let x: f64 = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                    s.channel.gain = x.exp();
                }
            }
        }
        servers
    }

    /// The offloading game faced in `slot`. Does not depend on battery state.
    pub fn slot_game(&self, slot: usize) -> Result<GameInstance> {
        GameInstance::new(
            &self.arrivals_at(slot),
            &self.devices,
            &self.servers_at(slot),
            slot,
            &self.game,
        )
    }

    /// The same scenario with every green profile scaled by `factor`.
    pub fn with_green_scaled(&self, factor: f64) -> Self {
        Scenario {
            green: self.green.iter().map(|g| g.scaled(factor)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Stream {
    Arrivals = 1,
    Gains = 2,
    Policy = 3,
}

fn stream(seed: u64, which: Stream, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((which as u64) << 48) | slot as u64);
    rng
}

/// How a task ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskOutcome {
    OnTime,
    DeadlineMissed,
    DroppedByPolicy,
    DroppedByDepletion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub device_id: usize,
    pub server: Option<usize>,
    pub outcome: TaskOutcome,
    pub total_delay_s: f64,
    pub device_energy_j: f64,
    pub reward: f64,
}

impl TaskRecord {
    pub fn deadline_met(&self) -> bool {
        self.outcome == TaskOutcome::OnTime
    }

    pub fn executed(&self) -> bool {
        matches!(
            self.outcome,
            TaskOutcome::OnTime | TaskOutcome::DeadlineMissed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerRecord {
    pub load_cycles_per_s: f64,
    pub utilization: f64,
    pub demand_j: f64,
    pub green_available_j: f64,
    pub green_used_j: f64,
    pub brown_used_j: f64,
    pub green_wasted_j: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub energy_j: f64,
    pub battery_level_j: f64,
    pub depleted: bool,
}

/// Everything recorded about one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMetrics {
    pub slot: usize,
    pub tasks: Vec<TaskRecord>,
    pub servers: Vec<ServerRecord>,
    pub devices: Vec<DeviceRecord>,
    pub iterations: usize,
    pub converged: bool,
    pub evaluations: u64,
}

impl SlotMetrics {
    pub fn count(&self, outcome: TaskOutcome) -> usize {
        self.tasks.iter().filter(|t| t.outcome == outcome).count()
    }

    /// Mean delay of executed tasks; zero when none ran.
    pub fn mean_delay_s(&self) -> f64 {
        let (sum, n) = self
            .tasks
            .iter()
            .filter(|t| t.executed())
            .fold((0.0, 0usize), |(s, n), t| (s + t.total_delay_s, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn device_energy_j(&self) -> f64 {
        self.devices.iter().map(|d| d.energy_j).sum()
    }

    pub fn device_reward_total(&self) -> f64 {
        self.tasks.iter().map(|t| t.reward).sum()
    }

    pub fn server_sum(&self, f: impl Fn(&ServerRecord) -> f64) -> f64 {
        self.servers.iter().map(f).sum()
    }

    pub fn mean_utilization(&self) -> f64 {
        self.server_sum(|s| s.utilization) / self.servers.len() as f64
    }
}

/// Totals and means over a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub policy: String,
    pub slots: usize,
    pub tasks: usize,
    pub completed_on_time: usize,
    pub deadline_missed: usize,
    pub dropped_by_policy: usize,
    pub dropped_by_depletion: usize,
    pub drop_rate: f64,
    pub deadline_miss_rate: f64,
    pub mean_delay_s: f64,
    pub total_device_energy_j: f64,
    pub total_device_reward: f64,
    pub mean_device_reward: f64,
    pub total_server_reward: f64,
    pub mean_server_reward: f64,
    pub total_server_demand_j: f64,
    pub total_green_available_j: f64,
    pub total_green_used_j: f64,
    pub total_brown_used_j: f64,
    pub total_green_wasted_j: f64,
    pub green_utilization: f64,
    pub mean_utilization: f64,
    pub total_iterations: usize,
    pub converged_slots: usize,
    pub converged_fraction: f64,
    pub evaluations: u64,
    /// Monotonic wall-clock time of the run; excluded from determinism.
    pub wall_clock_s: f64,
}

impl RunSummary {
    pub fn from_slots(policy: PolicyKind, slots: &[SlotMetrics], wall_clock_s: f64) -> Self {
        let mut s = RunSummary {
            policy: policy.id().to_string(),
            slots: slots.len(),
            wall_clock_s,
            ..Default::default()
        };
        let mut delay_sum = 0.0;
        let mut executed = 0usize;
        let mut util_sum = 0.0;
        let mut server_slots = 0usize;
        for m in slots {
            s.tasks += m.tasks.len();
            s.completed_on_time += m.count(TaskOutcome::OnTime);
            s.deadline_missed += m.count(TaskOutcome::DeadlineMissed);
            s.dropped_by_policy += m.count(TaskOutcome::DroppedByPolicy);
            s.dropped_by_depletion += m.count(TaskOutcome::DroppedByDepletion);
            for t in m.tasks.iter().filter(|t| t.executed()) {
                delay_sum += t.total_delay_s;
                executed += 1;
            }
            s.total_device_energy_j += m.device_energy_j();
            s.total_device_reward += m.device_reward_total();
            s.total_server_reward += m.server_sum(|r| r.reward);
            s.total_server_demand_j += m.server_sum(|r| r.demand_j);
            s.total_green_available_j += m.server_sum(|r| r.green_available_j);
            s.total_green_used_j += m.server_sum(|r| r.green_used_j);
            s.total_brown_used_j += m.server_sum(|r| r.brown_used_j);
            s.total_green_wasted_j += m.server_sum(|r| r.green_wasted_j);
            util_sum += m.server_sum(|r| r.utilization);
            server_slots += m.servers.len();
            s.total_iterations += m.iterations;
            s.converged_slots += usize::from(m.converged);
            s.evaluations += m.evaluations;
        }
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        let tasks = s.tasks as f64;
        s.drop_rate = ratio((s.dropped_by_policy + s.dropped_by_depletion) as f64, tasks);
        s.deadline_miss_rate = ratio(s.deadline_missed as f64, tasks);
        s.mean_delay_s = ratio(delay_sum, executed as f64);
        s.mean_device_reward = ratio(s.total_device_reward, tasks);
        s.mean_server_reward = ratio(s.total_server_reward, server_slots as f64);
        s.green_utilization = ratio(s.total_green_used_j, s.total_green_available_j);
        s.mean_utilization = ratio(util_sum, server_slots as f64);
        s.converged_fraction = ratio(s.converged_slots as f64, s.slots as f64);
        s
    }
}

/// Runs `scenario` over its whole horizon.
pub fn run(scenario: &Scenario) -> Result<(RunSummary, Vec<SlotMetrics>)> {
    scenario.validate()?;
    let start = Instant::now();
    let mut batteries: Vec<DeviceBattery> =
        scenario.devices.iter().map(|d| d.battery).collect();
    let mut trace = Vec::with_capacity(scenario.horizon_slots);
    for t in 0..scenario.horizon_slots {
        trace.push(run_slot(scenario, t, &mut batteries)?);
    }
    let summary = RunSummary::from_slots(scenario.policy, &trace, start.elapsed().as_secs_f64());
    Ok((summary, trace))
}

fn run_slot(
    scenario: &Scenario,
    t: usize,
    batteries: &mut [DeviceBattery],
) -> Result<SlotMetrics> {
    let servers = scenario.servers_at(t);
    let game = GameInstance::new(
        &scenario.arrivals_at(t),
        &scenario.devices,
        &servers,
        t,
        &scenario.game,
    )?;
    let mut rng = stream(scenario.seed, Stream::Policy, t);
    let outcome = run_policy(scenario.policy, &game, &mut rng)?;
    let report = validate_assignment(&outcome.assignment, &servers, game.tasks())?;
    if !report.is_ok() {
        return Err(Error::Config(format!(
            "policy {} produced an infeasible assignment in slot {t}: {report}",
            scenario.policy
        )));
    }

    // Batteries first: a device that cannot afford its plan runs nothing,
    // and its allocation never reaches the server.
    let mut device_energy = vec![0.0; scenario.devices.len()];
    for (i, task) in game.tasks().iter().enumerate() {
        device_energy[task.device_id] = outcome.costs[i].device_energy;
    }
    let mut devices = Vec::with_capacity(scenario.devices.len());
    for (d, battery) in batteries.iter_mut().enumerate() {
        let step = battery.step(device_energy[d]);
        *battery = step.battery();
        devices.push(DeviceRecord {
            energy_j: if step.is_depleted() { 0.0 } else { device_energy[d] },
            battery_level_j: battery.level_j,
            depleted: step.is_depleted(),
        });
    }

    let mut tasks = Vec::with_capacity(game.n_devices());
    let mut load = vec![0.0; servers.len()];
    for (i, task) in game.tasks().iter().enumerate() {
        let decision = &outcome.assignment.tasks[i];
        let cost = &outcome.costs[i];
        let depleted = devices[task.device_id].depleted;
        let outcome_kind = if decision.split.drop {
            TaskOutcome::DroppedByPolicy
        } else if depleted {
            TaskOutcome::DroppedByDepletion
        } else if cost.total_delay <= task.deadline_s {
            TaskOutcome::OnTime
        } else {
            TaskOutcome::DeadlineMissed
        };
        let ran = !decision.split.drop && !depleted;
        if ran {
            if let Some(k) = decision.server {
                load[k] += decision.alloc_rate;
            }
        }
        tasks.push(TaskRecord {
            device_id: task.device_id,
            server: decision.server.filter(|_| ran),
            outcome: outcome_kind,
            total_delay_s: if ran { cost.total_delay } else { 0.0 },
            device_energy_j: if ran { cost.device_energy } else { 0.0 },
            reward: if ran { outcome.device_rewards[i] } else { 0.0 },
        });
    }

    let mut server_records = Vec::with_capacity(servers.len());
    for (k, spec) in servers.iter().enumerate() {
        let green = scenario.green[k].available(t, scenario.slot_len_s)?;
        let demand = server_energy_demand(
            load[k],
            spec.f_max_cycles_per_s,
            scenario.slot_len_s,
            &spec.power,
        );
        let entry = ledger_entry(demand, green);
        server_records.push(ServerRecord {
            load_cycles_per_s: load[k],
            utilization: load[k] / spec.f_max_cycles_per_s,
            demand_j: entry.demand,
            green_available_j: entry.available_green,
            green_used_j: entry.green_used,
            brown_used_j: entry.brown_used,
            green_wasted_j: entry.green_wasted,
            reward: server_reward(
                spec,
                spec.green_rate_at(t),
                load[k],
                &outcome.assignment.servers[k],
            ),
        });
    }

    Ok(SlotMetrics {
        slot: t,
        tasks,
        servers: server_records,
        devices,
        iterations: outcome.iterations,
        converged: outcome.converged,
        evaluations: outcome.evaluations,
    })
}

/// Runs every scenario, in parallel, returning results in input order.
pub fn sweep(scenarios: &[Scenario]) -> Vec<Result<RunSummary>> {
    scenarios
        .par_iter()
        .map(|s| run(s).map(|(summary, _)| summary))
        .collect()
}

/// Default scenario pieces, shared by the synthetic generator and the CLI.
pub fn default_connection_range() -> (f64, f64) {
    CONNECTION_TIME_RANGE_S
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthetic_scenario, SyntheticParams};

    fn small() -> Scenario {
        synthetic_scenario(&SyntheticParams {
            devices: 3,
            servers: 2,
            horizon_slots: 6,
            ..Default::default()
        })
    }

    #[test]
    fn arrivals_do_not_depend_on_policy() {
        let a = small();
        let mut b = a.clone();
        b.policy = PolicyKind::RandomFeasible;
        for t in 0..a.horizon_slots {
            assert_eq!(a.arrivals_at(t), b.arrivals_at(t));
            assert_eq!(a.servers_at(t), b.servers_at(t));
        }
    }

    #[test]
    fn per_device_rates_thin_arrivals() {
        let mut s = small();
        if let ArrivalModel::Bernoulli { per_device, .. } = &mut s.arrivals {
            *per_device = Some(vec![1.0, 0.0, 1.0]);
        }
        for t in 0..s.horizon_slots {
            let ids: Vec<_> = s.arrivals_at(t).iter().map(|t| t.device_id).collect();
            assert_eq!(ids, vec![0, 2]);
        }
    }

    #[test]
    fn explicit_arrivals_scale_instructions() {
        let mut s = small();
        s.instructions_to_cycles = 3.0;
        s.arrivals = ArrivalModel::Explicit {
            slots: vec![vec![TaskSpec {
                device_id: 1,
                data_bits: 1e6,
                instructions: 1e9,
                deadline_s: 2.0,
            }]],
        };
        let tasks = s.arrivals_at(0);
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].cycles, 3e9);
        assert!(s.arrivals_at(1).is_empty());
    }

    #[test]
    fn validation_catches_bad_scenarios() {
        let mut s = small();
        s.green.pop();
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));

        let mut s = small();
        s.arrivals = ArrivalModel::Explicit {
            slots: vec![vec![
                TaskSpec {
                    device_id: 0,
                    data_bits: 1.0,
                    instructions: 1.0,
                    deadline_s: 1.0,
                };
                2
            ]],
        };
        assert!(s.validate().is_err());

        let mut s = small();
        s.devices[1].id = 7;
        assert!(s.validate().is_err());
        s.renumber();
        assert!(s.validate().is_ok());

        let mut s = small();
        s.gains = GainModel::Trace {
            per_server: vec![vec![1e-7]],
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn gain_trace_holds_last_sample() {
        let mut s = small();
        s.gains = GainModel::Trace {
            per_server: vec![vec![1e-7, 2e-7], vec![3e-7]],
        };
        let at5 = s.servers_at(5);
        assert_eq!(at5[0].channel.gain, 2e-7);
        assert_eq!(at5[1].channel.gain, 3e-7);
    }
}
