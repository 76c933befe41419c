//! Domain types for devices, servers, tasks and per-slot decisions, plus the
//! constraint checks that every decision must pass.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::DeviceBattery;
use crate::error::{Error, Result};

/// Absolute slack allowed on `local + edge + drop = 1`.
pub const SPLIT_TOLERANCE: f64 = 1e-9;

/// Relative slack on the per-server capacity bound. Equal shares such as
/// `f / 3` summed three times can land a few ulps above `f`.
pub const CAPACITY_RTOL: f64 = 1e-12;

/// One device's compute job for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub id: usize,
    pub device_id: usize,
    /// Input data that must be shipped when offloading.
    pub data_bits: f64,
    /// Required computation.
    pub cycles: f64,
    pub deadline_s: f64,
}

impl Task {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("data_bits", self.data_bits),
            ("cycles", self.cycles),
            ("deadline_s", self.deadline_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "task {}: {name} must be positive and finite, got {v}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// How a task is divided between local execution, edge execution and
/// admission-control dropping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitDecision {
    pub local: f64,
    pub edge: f64,
    pub drop: bool,
}

impl SplitDecision {
    pub const LOCAL: SplitDecision = SplitDecision {
        local: 1.0,
        edge: 0.0,
        drop: false,
    };
    pub const EDGE: SplitDecision = SplitDecision {
        local: 0.0,
        edge: 1.0,
        drop: false,
    };
    pub const DROPPED: SplitDecision = SplitDecision {
        local: 0.0,
        edge: 0.0,
        drop: true,
    };

    /// A non-dropped split with `edge` offloaded and the rest local.
    pub fn partial(edge: f64) -> Self {
        SplitDecision {
            local: 1.0 - edge,
            edge,
            drop: false,
        }
    }

    pub fn is_dropped(&self) -> bool {
        self.drop
    }
}

/// Wireless link from a device to a server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    /// Channel gain for the current slot. The simulator rewrites it every
    /// slot from the scenario's gain model.
    #[serde(default = "default_gain")]
    pub gain: f64,
}

fn default_gain() -> f64 {
    1.0
}

/// Linear utilization power model for a server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerPower {
    pub idle_w: f64,
    pub peak_w: f64,
}

impl Default for ServerPower {
    fn default() -> Self {
        ServerPower {
            idle_w: 100.0,
            peak_w: 200.0,
        }
    }
}

/// An IoT device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    #[serde(skip)]
    pub id: usize,
    pub f_max_cycles_per_s: f64,
    /// Energy factor of the local CPU (J·s/cycle²).
    #[serde(default = "default_kappa")]
    pub kappa_j_s_per_cycle2: f64,
    /// Radio power used in the SNR of the uplink.
    pub tx_power_w: f64,
    /// Power charged to the device for the whole offload episode.
    pub p_sched_w: f64,
    pub battery: DeviceBattery,
}

pub const DEFAULT_KAPPA: f64 = 1e-27;

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_max_cycles_per_s", self.f_max_cycles_per_s),
            ("kappa_j_s_per_cycle2", self.kappa_j_s_per_cycle2),
            ("tx_power_w", self.tx_power_w),
            ("p_sched_w", self.p_sched_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidScenario(format!(
                    "device {}: {name} must be positive and finite, got {v}",
                    self.id
                )));
            }
        }
        self.battery
            .validate()
            .map_err(|e| Error::InvalidScenario(format!("device {}: {e}", self.id)))
    }
}

/// A hybrid-powered edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerSpec {
    #[serde(skip)]
    pub id: usize,
    pub f_max_cycles_per_s: f64,
    pub connection_time_s: f64,
    pub channel: Channel,
    #[serde(default)]
    pub backup_capacity_cycles_per_s: f64,
    /// Price paid per unit of backup capacity drawn.
    #[serde(default)]
    pub backup_price: f64,
    /// Cost coefficient on green-served resources.
    #[serde(default)]
    pub green_rate: f64,
    /// Optional per-slot override of `green_rate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green_rate_trace: Option<Vec<f64>>,
    /// Maximum number of tasks admitted per slot; `None` is unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admission_cap: Option<usize>,
    #[serde(default)]
    pub power: ServerPower,
}

/// Default bounds for the connection time.
pub const CONNECTION_TIME_RANGE_S: (f64, f64) = (0.005, 0.050);

impl ServerSpec {
    /// Green rate in effect at `slot`.
    pub fn green_rate_at(&self, slot: usize) -> f64 {
        match &self.green_rate_trace {
            Some(trace) if !trace.is_empty() => trace[slot.min(trace.len() - 1)],
            _ => self.green_rate,
        }
    }

    /// Capacity available for a given backup draw.
    pub fn capacity_with(&self, backup: f64) -> f64 {
        self.f_max_cycles_per_s + backup
    }

    pub fn validate(&self, connection_range: (f64, f64)) -> Result<()> {
        let bad = |msg: String| Error::InvalidScenario(format!("server {}: {msg}", self.id));
        for (name, v) in [
            ("f_max_cycles_per_s", self.f_max_cycles_per_s),
            ("channel.bandwidth_hz", self.channel.bandwidth_hz),
            ("channel.noise_w", self.channel.noise_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [
            ("backup_capacity_cycles_per_s", self.backup_capacity_cycles_per_s),
            ("backup_price", self.backup_price),
            ("green_rate", self.green_rate),
            ("channel.gain", self.channel.gain),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} must be non-negative, got {v}")));
            }
        }
        let (lo, hi) = connection_range;
        if !(self.connection_time_s >= lo && self.connection_time_s <= hi) {
            return Err(bad(format!(
                "connection_time_s {} outside [{lo}, {hi}]",
                self.connection_time_s
            )));
        }
        if let Some(trace) = &self.green_rate_trace {
            if trace.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
                return Err(bad("green_rate_trace entries must be non-negative".into()));
            }
        }
        if !(self.power.idle_w >= 0.0 && self.power.peak_w >= self.power.idle_w) {
            return Err(bad(format!(
                "power model needs 0 <= idle_w <= peak_w, got {:?}",
                self.power
            )));
        }
        Ok(())
    }
}

/// Decision for one task within an [`Assignment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskDecision {
    pub task_id: usize,
    pub split: SplitDecision,
    /// Selected server. At most one server per task.
    pub server: Option<usize>,
    /// Compute rate dedicated to the task by the selected server (cycles/s).
    pub alloc_rate: f64,
}

impl TaskDecision {
    pub fn local(task_id: usize) -> Self {
        TaskDecision {
            task_id,
            split: SplitDecision::LOCAL,
            server: None,
            alloc_rate: 0.0,
        }
    }

    pub fn dropped(task_id: usize) -> Self {
        TaskDecision {
            task_id,
            split: SplitDecision::DROPPED,
            server: None,
            alloc_rate: 0.0,
        }
    }

    /// Load this decision places on `server`.
    pub fn load_on(&self, server: usize) -> f64 {
        match self.server {
            Some(k) if k == server && !self.split.drop => self.alloc_rate,
            _ => 0.0,
        }
    }
}

/// Posted price and backup draw of one server.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ServerDecision {
    pub price: f64,
    pub backup: f64,
}

/// A full decision for one slot.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Assignment {
    pub tasks: Vec<TaskDecision>,
    pub servers: Vec<ServerDecision>,
}

impl Assignment {
    /// Total compute rate allocated on `server`.
    pub fn load(&self, server: usize) -> f64 {
        self.tasks.iter().map(|t| t.load_on(server)).sum()
    }

    pub fn admitted(&self, server: usize) -> usize {
        self.tasks
            .iter()
            .filter(|t| t.server == Some(server) && !t.split.drop)
            .count()
    }
}

/// A single broken constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `local + edge + drop` differs from one.
    SplitSum { task: Option<usize>, residual: f64 },
    /// A fraction is outside `[0, 1]` or not a number.
    FractionRange {
        task: Option<usize>,
        field: &'static str,
        value: f64,
    },
    /// A dropped task still carries local or edge work.
    DropNotExclusive { task: Option<usize> },
    /// Edge work without a selected server.
    EdgeWithoutServer { task: usize },
    /// A server is selected but nothing is offloaded to it.
    ServerWithoutEdge { task: usize, server: usize },
    /// Offloaded task with a non-positive or non-finite allocation.
    BadAllocation { task: usize, alloc: f64 },
    /// Allocated load exceeds processing plus backup capacity.
    Capacity {
        server: usize,
        load: f64,
        capacity: f64,
        residual: f64,
    },
    /// Backup draw exceeds what the backup pool offers, or is negative.
    BackupBound {
        server: usize,
        backup: f64,
        limit: f64,
    },
    NegativePrice { server: usize, price: f64 },
    AdmissionCap {
        server: usize,
        admitted: usize,
        cap: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = |t: &Option<usize>| t.map(|t| format!("task {t}: ")).unwrap_or_default();
        match self {
            Violation::SplitSum { task, residual } => write!(
                f,
                "{}local + edge + drop must equal 1 (residual {residual:+e})",
                tag(task)
            ),
            Violation::FractionRange { task, field, value } => {
                write!(f, "{}{field} = {value} outside [0, 1]", tag(task))
            }
            Violation::DropNotExclusive { task } => {
                write!(f, "{}dropped task has non-zero local/edge share", tag(task))
            }
            Violation::EdgeWithoutServer { task } => {
                write!(f, "task {task}: edge share without a server")
            }
            Violation::ServerWithoutEdge { task, server } => {
                write!(f, "task {task}: server {server} selected with zero edge share")
            }
            Violation::BadAllocation { task, alloc } => {
                write!(f, "task {task}: allocation {alloc} must be positive")
            }
            Violation::Capacity {
                server,
                load,
                capacity,
                residual,
            } => write!(
                f,
                "server {server}: load {load} exceeds capacity {capacity} by {residual}"
            ),
            Violation::BackupBound {
                server,
                backup,
                limit,
            } => write!(f, "server {server}: backup {backup} outside [0, {limit}]"),
            Violation::NegativePrice { server, price } => {
                write!(f, "server {server}: price {price} is negative")
            }
            Violation::AdmissionCap {
                server,
                admitted,
                cap,
            } => write!(f, "server {server}: {admitted} tasks admitted, cap {cap}"),
        }
    }
}

/// Result of a validation pass. Empty means every constraint holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn split_violations(d: &SplitDecision, task: Option<usize>, out: &mut Vec<Violation>) {
    for (field, value) in [("local", d.local), ("edge", d.edge)] {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::FractionRange { task, field, value });
        }
    }
    let drop = if d.drop { 1.0 } else { 0.0 };
    let residual = d.local + d.edge + drop - 1.0;
    // NaN residuals also land here.
    if !(residual.abs() <= SPLIT_TOLERANCE) {
        out.push(Violation::SplitSum { task, residual });
    }
    if d.drop && (d.local != 0.0 || d.edge != 0.0) {
        out.push(Violation::DropNotExclusive { task });
    }
}

/// Checks the simplex and domain constraints of a split.
pub fn validate_split(d: &SplitDecision) -> ValidationReport {
    let mut violations = Vec::new();
    split_violations(d, None, &mut violations);
    ValidationReport { violations }
}

/// Checks every per-task and per-server constraint of a slot decision.
///
/// Structural problems (wrong lengths, unknown server ids) are errors; broken
/// constraints are collected into the report.
pub fn validate_assignment(
    a: &Assignment,
    servers: &[ServerSpec],
    tasks: &[Task],
) -> Result<ValidationReport> {
    if a.tasks.len() != tasks.len() {
        return Err(Error::Config(format!(
            "assignment has {} task decisions for {} tasks",
            a.tasks.len(),
            tasks.len()
        )));
    }
    if a.servers.len() != servers.len() {
        return Err(Error::Config(format!(
            "assignment has {} server decisions for {} servers",
            a.servers.len(),
            servers.len()
        )));
    }
    for (d, t) in a.tasks.iter().zip(tasks) {
        if let Some(k) = d.server {
            if k >= servers.len() {
                return Err(Error::UnknownServer {
                    task: t.id,
                    server: k,
                });
            }
        }
    }

    let mut violations = Vec::new();
    for (d, t) in a.tasks.iter().zip(tasks) {
        split_violations(&d.split, Some(t.id), &mut violations);
        match d.server {
            None if d.split.edge > 0.0 => {
                violations.push(Violation::EdgeWithoutServer { task: t.id })
            }
            Some(k) if !(d.split.edge > 0.0) => violations.push(Violation::ServerWithoutEdge {
                task: t.id,
                server: k,
            }),
            Some(_) if !(d.alloc_rate > 0.0 && d.alloc_rate.is_finite()) => {
                violations.push(Violation::BadAllocation {
                    task: t.id,
                    alloc: d.alloc_rate,
                })
            }
            _ => {}
        }
    }

    for (k, (s, dec)) in servers.iter().zip(&a.servers).enumerate() {
        if !(dec.price >= 0.0) {
            violations.push(Violation::NegativePrice {
                server: k,
                price: dec.price,
            });
        }
        if !(dec.backup >= 0.0 && dec.backup <= s.backup_capacity_cycles_per_s) {
            violations.push(Violation::BackupBound {
                server: k,
                backup: dec.backup,
                limit: s.backup_capacity_cycles_per_s,
            });
        }
        let load = a.load(k);
        let capacity = s.capacity_with(dec.backup.max(0.0));
        if !(load <= capacity * (1.0 + CAPACITY_RTOL)) {
            violations.push(Violation::Capacity {
                server: k,
                load,
                capacity,
                residual: load - capacity,
            });
        }
        if let Some(cap) = s.admission_cap {
            let admitted = a.admitted(k);
            if admitted > cap {
                violations.push(Violation::AdmissionCap {
                    server: k,
                    admitted,
                    cap,
                });
            }
        }
    }
    Ok(ValidationReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn server(f_max: f64) -> ServerSpec {
        ServerSpec {
            id: 0,
            f_max_cycles_per_s: f_max,
            connection_time_s: 0.01,
            channel: Channel {
                bandwidth_hz: 1e6,
                noise_w: 1e-7,
                gain: 1e-6,
            },
            backup_capacity_cycles_per_s: 5.0,
            backup_price: 1.0,
            green_rate: 0.3,
            green_rate_trace: None,
            admission_cap: None,
            power: ServerPower::default(),
        }
    }

    fn task(id: usize) -> Task {
        Task {
            id,
            device_id: id,
            data_bits: 1e6,
            cycles: 1e9,
            deadline_s: 1.0,
        }
    }

    fn offload(task_id: usize, alloc: f64) -> TaskDecision {
        TaskDecision {
            task_id,
            split: SplitDecision::EDGE,
            server: Some(0),
            alloc_rate: alloc,
        }
    }

    #[test]
    fn split_examples() {
        assert!(validate_split(&SplitDecision::LOCAL).is_ok());
        assert!(validate_split(&SplitDecision::partial(0.7)).is_ok());
        assert!(validate_split(&SplitDecision::DROPPED).is_ok());
        let bad = validate_split(&SplitDecision {
            local: 0.5,
            edge: 0.6,
            drop: false,
        });
        match bad.violations.as_slice() {
            [Violation::SplitSum { residual, .. }] => assert!((residual - 0.1).abs() < 1e-12),
            other => panic!("unexpected report {other:?}"),
        }
    }

    #[test]
    fn drop_must_be_exclusive() {
        let r = validate_split(&SplitDecision {
            local: 0.0,
            edge: 1.0,
            drop: true,
        });
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DropNotExclusive { .. })));
    }

    #[test]
    fn nan_fractions_are_rejected() {
        let r = validate_split(&SplitDecision {
            local: f64::NAN,
            edge: 0.0,
            drop: false,
        });
        assert!(!r.is_ok());
    }

    #[test]
    fn capacity_examples() {
        let servers = [server(10.0)];
        let tasks = [task(0), task(1)];
        let mut a = Assignment {
            tasks: vec![offload(0, 4.0), offload(1, 5.0)],
            servers: vec![ServerDecision::default()],
        };
        assert!(validate_assignment(&a, &servers, &tasks).unwrap().is_ok());

        a.tasks = vec![offload(0, 6.0), offload(1, 6.0)];
        let r = validate_assignment(&a, &servers, &tasks).unwrap();
        match r.violations.as_slice() {
            [Violation::Capacity { residual, .. }] => assert_eq!(*residual, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        a.servers[0].backup = 2.0;
        assert!(validate_assignment(&a, &servers, &tasks).unwrap().is_ok());

        a.servers[0].backup = servers[0].backup_capacity_cycles_per_s + 1.0;
        let r = validate_assignment(&a, &servers, &tasks).unwrap();
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::BackupBound { .. })));
    }

    #[test]
    fn unknown_server_is_structural() {
        let servers = [server(10.0)];
        let tasks = [task(0)];
        let mut d = offload(0, 1.0);
        d.server = Some(3);
        let a = Assignment {
            tasks: vec![d],
            servers: vec![ServerDecision::default()],
        };
        assert_eq!(
            validate_assignment(&a, &servers, &tasks),
            Err(Error::UnknownServer { task: 0, server: 3 })
        );
    }

    #[test]
    fn admission_cap_counts_tasks() {
        let mut s = server(10.0);
        s.admission_cap = Some(1);
        let tasks = [task(0), task(1)];
        let a = Assignment {
            tasks: vec![offload(0, 1.0), offload(1, 1.0)],
            servers: vec![ServerDecision::default()],
        };
        let r = validate_assignment(&a, &[s], &tasks).unwrap();
        assert_eq!(
            r.violations,
            vec![Violation::AdmissionCap {
                server: 0,
                admitted: 2,
                cap: 1
            }]
        );
    }

    #[test]
    fn validation_is_repeatable() {
        let servers = [server(10.0)];
        let tasks = [task(0), task(1)];
        let a = Assignment {
            tasks: vec![offload(0, 7.0), offload(1, 7.0)],
            servers: vec![ServerDecision {
                price: -1.0,
                backup: 0.0,
            }],
        };
        let before = a.clone();
        let r1 = validate_assignment(&a, &servers, &tasks).unwrap();
        let r2 = validate_assignment(&a, &servers, &tasks).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(a, before);
        assert_eq!(r1.violations.len(), 2);
    }

    #[test]
    fn split_grid_is_exact() {
        // Every point of a 0.05 grid over [0,1]^2 is accepted iff it sums to 1.
        for i in 0..=20 {
            for j in 0..=20 {
                let (l, e) = (i as f64 / 20.0, j as f64 / 20.0);
                let d = SplitDecision {
                    local: l,
                    edge: e,
                    drop: false,
                };
                assert_eq!(validate_split(&d).is_ok(), i + j == 20, "({l}, {e})");
                let dropped = SplitDecision { drop: true, ..d };
                assert_eq!(validate_split(&dropped).is_ok(), i == 0 && j == 0);
            }
        }
    }
}
