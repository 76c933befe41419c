//! Delay and energy models for local execution, the uplink and edge
//! execution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeviceSpec, ServerSpec, SplitDecision, Task};

/// Delay and energy of one task under one decision.
///
/// For an edge-only or local-only decision the unused fields are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub local_delay: f64,
    pub transmit_delay: f64,
    pub compute_delay: f64,
    pub connect_delay: f64,
    pub total_delay: f64,
    pub device_energy: f64,
    pub local_energy_component: f64,
    pub edge_energy_component: f64,
    pub dropped: bool,
}

impl CostBreakdown {
    pub fn dropped() -> Self {
        CostBreakdown {
            dropped: true,
            ..Default::default()
        }
    }

    /// Delay of the edge branch alone.
    pub fn edge_delay(&self) -> f64 {
        self.transmit_delay + self.compute_delay + self.connect_delay
    }
}

/// How the local and edge branches of a fractional split combine in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCombine {
    /// Both branches run at once; the slower one sets the delay.
    #[default]
    Parallel,
    /// The edge branch starts after the local branch finishes.
    Sequential,
}

fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} must be non-negative, got {v}")))
    }
}

/// Time to run `cycles` on the device at `f_local`, bounded by `f_max_local`.
pub fn local_delay(cycles: f64, f_local: f64, f_max_local: f64) -> Result<f64> {
    positive("local_delay", "cycles", cycles)?;
    positive("local_delay", "f_local", f_local)?;
    if f_local > f_max_local {
        return Err(Error::domain(
            "local_delay",
            format!("f_local {f_local} exceeds device maximum {f_max_local}"),
        ));
    }
    Ok(cycles / f_local)
}

/// Dynamic CPU energy `kappa * f^2 * delay`.
pub fn local_energy(kappa: f64, f_local: f64, delay: f64) -> Result<f64> {
    positive("local_energy", "kappa", kappa)?;
    positive("local_energy", "f_local", f_local)?;
    positive("local_energy", "delay", delay)?;
    Ok(kappa * f_local * f_local * delay)
}

/// Shannon-Hartley uplink rate in bits/s.
pub fn shannon_rate(bandwidth_hz: f64, tx_power_w: f64, gain: f64, noise_w: f64) -> Result<f64> {
    positive("shannon_rate", "bandwidth", bandwidth_hz)?;
    positive("shannon_rate", "noise", noise_w)?;
    non_negative("shannon_rate", "tx_power", tx_power_w)?;
    non_negative("shannon_rate", "gain", gain)?;
    let snr = tx_power_w * gain / noise_w;
    Ok(bandwidth_hz * (1.0 + snr).log2())
}

/// Uplink rate from `device` to `server` under the server's current gain.
pub fn uplink_rate(device: &DeviceSpec, server: &ServerSpec) -> Result<f64> {
    shannon_rate(
        server.channel.bandwidth_hz,
        device.tx_power_w,
        server.channel.gain,
        server.channel.noise_w,
    )
}

/// Edge delay: ship the data, compute on the allocated slice, and pay the
/// connection setup time, one after another.
pub fn edge_delay(
    data_bits: f64,
    rate: f64,
    cycles: f64,
    f_alloc: f64,
    connection_time_s: f64,
) -> Result<CostBreakdown> {
    if !(rate > 0.0) {
        return Err(Error::domain("edge_delay", "zero uplink rate: server unreachable"));
    }
    if !(f_alloc > 0.0) {
        return Err(Error::domain(
            "edge_delay",
            "zero allocation: server unprovisioned",
        ));
    }
    non_negative("edge_delay", "data_bits", data_bits)?;
    non_negative("edge_delay", "cycles", cycles)?;
    non_negative("edge_delay", "connection_time", connection_time_s)?;
    let transmit_delay = data_bits / rate;
    let compute_delay = cycles / f_alloc;
    Ok(CostBreakdown {
        transmit_delay,
        compute_delay,
        connect_delay: connection_time_s,
        total_delay: transmit_delay + compute_delay + connection_time_s,
        ..Default::default()
    })
}

/// Device energy spent over an offload episode at scheduled power `p_sched`.
pub fn edge_energy(p_sched_w: f64, edge_delay_total: f64) -> Result<f64> {
    non_negative("edge_energy", "p_sched", p_sched_w)?;
    non_negative("edge_energy", "delay", edge_delay_total)?;
    Ok(p_sched_w * edge_delay_total)
}

/// Cost of running the whole task locally at the device's peak rate.
pub fn full_local_cost(task: &Task, device: &DeviceSpec) -> Result<CostBreakdown> {
    let f = device.f_max_cycles_per_s;
    let delay = local_delay(task.cycles, f, f)?;
    let energy = local_energy(device.kappa_j_s_per_cycle2, f, delay)?;
    Ok(CostBreakdown {
        local_delay: delay,
        total_delay: delay,
        device_energy: energy,
        local_energy_component: energy,
        ..Default::default()
    })
}

/// Cost of a (possibly fractional) split of `task`.
///
/// The local branch processes `split.local * cycles`; the edge branch ships
/// `split.edge * data_bits` and processes `split.edge * cycles`. Energies
/// add; delays combine according to `combine`. Server parameters are only
/// read when `split.edge > 0`.
pub fn split_cost(
    task: &Task,
    split: &SplitDecision,
    device: &DeviceSpec,
    server: &ServerSpec,
    f_local: f64,
    f_alloc: f64,
    combine: SplitCombine,
) -> Result<CostBreakdown> {
    if split.drop {
        return Ok(CostBreakdown::dropped());
    }
    let mut out = CostBreakdown::default();
    if split.local > 0.0 {
        let delay = local_delay(split.local * task.cycles, f_local, device.f_max_cycles_per_s)?;
        out.local_delay = delay;
        out.local_energy_component = local_energy(device.kappa_j_s_per_cycle2, f_local, delay)?;
    }
    if split.edge > 0.0 {
        let rate = uplink_rate(device, server)?;
        let edge = edge_delay(
            split.edge * task.data_bits,
            rate,
            split.edge * task.cycles,
            f_alloc,
            server.connection_time_s,
        )?;
        out.transmit_delay = edge.transmit_delay;
        out.compute_delay = edge.compute_delay;
        out.connect_delay = edge.connect_delay;
        out.edge_energy_component = edge_energy(device.p_sched_w, edge.total_delay)?;
    }
    let edge_total = out.edge_delay();
    out.total_delay = match combine {
        SplitCombine::Parallel => out.local_delay.max(edge_total),
        SplitCombine::Sequential => out.local_delay + edge_total,
    };
    out.device_energy = out.local_energy_component + out.edge_energy_component;
    Ok(out)
}
