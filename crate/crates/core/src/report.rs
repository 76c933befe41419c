//! Per-slot CSV output.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sim::{SlotMetrics, TaskOutcome};

pub const SLOTS_CSV_HEADER: [&str; 19] = [
    "slot",
    "tasks",
    "on_time",
    "deadline_missed",
    "dropped_by_policy",
    "dropped_by_depletion",
    "mean_delay_s",
    "device_energy_j",
    "device_reward",
    "server_reward",
    "server_demand_j",
    "green_available_j",
    "green_used_j",
    "brown_used_j",
    "green_wasted_j",
    "mean_utilization",
    "iterations",
    "converged",
    "evaluations",
];

/// Formats `x` with nine significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.8e}", x);
    // Round-trip through parse to drop trailing zeros in a stable way.
    let v: f64 = s.parse().expect("formatted float parses");
    let mag = v.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        let decimals = (8 - mag).max(0) as usize;
        let mut out = format!("{:.*}", decimals, v);
        if out.contains('.') {
            while out.ends_with('0') {
                out.pop();
            }
            if out.ends_with('.') {
                out.pop();
            }
        }
        out
    } else {
        s
    }
}

fn row(m: &SlotMetrics) -> Vec<String> {
    vec![
        m.slot.to_string(),
        m.tasks.len().to_string(),
        m.count(TaskOutcome::OnTime).to_string(),
        m.count(TaskOutcome::DeadlineMissed).to_string(),
        m.count(TaskOutcome::DroppedByPolicy).to_string(),
        m.count(TaskOutcome::DroppedByDepletion).to_string(),
        fmt_sig(m.mean_delay_s()),
        fmt_sig(m.device_energy_j()),
        fmt_sig(m.device_reward_total()),
        fmt_sig(m.server_sum(|s| s.reward)),
        fmt_sig(m.server_sum(|s| s.demand_j)),
        fmt_sig(m.server_sum(|s| s.green_available_j)),
        fmt_sig(m.server_sum(|s| s.green_used_j)),
        fmt_sig(m.server_sum(|s| s.brown_used_j)),
        fmt_sig(m.server_sum(|s| s.green_wasted_j)),
        fmt_sig(m.mean_utilization()),
        m.iterations.to_string(),
        m.converged.to_string(),
        m.evaluations.to_string(),
    ]
}

/// Writes one row per slot under [`SLOTS_CSV_HEADER`].
pub fn write_slots_csv<W: Write>(out: W, slots: &[SlotMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("writing slot table: {e}"));
    w.write_record(SLOTS_CSV_HEADER).map_err(io)?;
    for m in slots {
        w.write_record(row(m)).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing slot table: {e}")))?;
    Ok(())
}
