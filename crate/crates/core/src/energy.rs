//! Green-energy supply, green-first accounting and the device energy buffer.

use std::f64::consts::PI;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ServerPower;

/// Green energy available to one server, per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GreenProfile {
    /// Per-slot samples, held constant over each slot.
    Trace { samples_j: Vec<f64> },
    /// Solar-like half sine between sunrise and sunset, zero at night.
    DiurnalSine {
        peak_j: f64,
        #[serde(default = "default_sunrise")]
        sunrise_h: f64,
        #[serde(default = "default_sunset")]
        sunset_h: f64,
        /// Hour of day at the start of slot 0.
        #[serde(default)]
        start_hour: f64,
    },
    Constant { level_j: f64 },
}

fn default_sunrise() -> f64 {
    6.0
}

fn default_sunset() -> f64 {
    18.0
}

impl GreenProfile {
    pub fn diurnal(peak_j: f64) -> Self {
        GreenProfile::DiurnalSine {
            peak_j,
            sunrise_h: default_sunrise(),
            sunset_h: default_sunset(),
            start_hour: 0.0,
        }
    }

    /// Green energy available during `slot`.
    pub fn available(&self, slot: usize, slot_len_s: f64) -> Result<f64> {
        match self {
            GreenProfile::Trace { samples_j } => {
                samples_j
                    .get(slot)
                    .copied()
                    .ok_or(Error::SlotOutOfRange {
                        slot,
                        len: samples_j.len(),
                    })
            }
            GreenProfile::DiurnalSine {
                peak_j,
                sunrise_h,
                sunset_h,
                start_hour,
            } => {
                let hour = (start_hour + slot as f64 * slot_len_s / 3600.0).rem_euclid(24.0);
                let phase = PI * (hour - sunrise_h) / (sunset_h - sunrise_h);
                if hour < *sunrise_h || hour > *sunset_h {
                    Ok(0.0)
                } else {
                    Ok(peak_j * phase.sin().max(0.0))
                }
            }
            GreenProfile::Constant { level_j } => Ok(*level_j),
        }
    }

    /// Checks non-negativity and, for traces, coverage of `horizon` slots.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        match self {
            GreenProfile::Trace { samples_j } => {
                if samples_j.len() < horizon {
                    return bad(format!(
                        "green trace has {} samples, horizon is {horizon}",
                        samples_j.len()
                    ));
                }
                if let Some(v) = samples_j.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return bad(format!("green trace sample {v} is negative or not finite"));
                }
            }
            GreenProfile::DiurnalSine {
                peak_j,
                sunrise_h,
                sunset_h,
                start_hour,
            } => {
                if !(*peak_j >= 0.0 && peak_j.is_finite()) {
                    return bad(format!("diurnal peak {peak_j} must be non-negative"));
                }
                if !(0.0 <= *sunrise_h && sunrise_h < sunset_h && *sunset_h <= 24.0) {
                    return bad(format!(
                        "need 0 <= sunrise < sunset <= 24, got {sunrise_h}..{sunset_h}"
                    ));
                }
                if !start_hour.is_finite() {
                    return bad("start_hour must be finite".into());
                }
            }
            GreenProfile::Constant { level_j } => {
                if !(*level_j >= 0.0 && level_j.is_finite()) {
                    return bad(format!("constant green level {level_j} must be non-negative"));
                }
            }
        }
        Ok(())
    }

    /// The same profile with every slot's supply multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self.clone() {
            GreenProfile::Trace { samples_j } => GreenProfile::Trace {
                samples_j: samples_j.into_iter().map(|v| v * factor).collect(),
            },
            GreenProfile::DiurnalSine {
                peak_j,
                sunrise_h,
                sunset_h,
                start_hour,
            } => GreenProfile::DiurnalSine {
                peak_j: peak_j * factor,
                sunrise_h,
                sunset_h,
                start_hour,
            },
            GreenProfile::Constant { level_j } => GreenProfile::Constant {
                level_j: level_j * factor,
            },
        }
    }
}

/// Reads a green trace: a header line, then `slot_index,joules` rows with
/// slot indices contiguous from zero.
pub fn read_green_trace<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut samples = Vec::new();
    for (row, record) in rdr.deserialize::<(usize, f64)>().enumerate() {
        let (slot, joules) = record.map_err(|e| {
            Error::InvalidScenario(format!("green trace row {}: {e}", row + 2))
        })?;
        if slot != row {
            return Err(Error::InvalidScenario(format!(
                "green trace row {}: slot index {slot}, expected {row}",
                row + 2
            )));
        }
        if !(joules >= 0.0 && joules.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "green trace row {}: energy {joules} must be non-negative",
                row + 2
            )));
        }
        samples.push(joules);
    }
    Ok(samples)
}

/// Green/brown split of one server's demand in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerEntry {
    pub demand: f64,
    pub available_green: f64,
    pub green_used: f64,
    pub brown_used: f64,
    pub green_wasted: f64,
}

/// Serves `demand` from green supply first and covers the rest with brown.
///
/// The split always sums to `demand` exactly in floating point. When the
/// plain difference would round away from that, brown is nudged up by a few
/// ulps, so green can fall short of `min(demand, available_green)` by about
/// one ulp of `demand` and never exceeds it.
pub fn account_server_energy(demand: f64, available_green: f64) -> (f64, f64) {
    let green = demand.min(available_green);
    let mut brown = demand - green;
    if green + brown == demand {
        return (green, brown);
    }
    for _ in 0..16 {
        brown = brown.next_up();
        let g = demand - brown;
        if g + brown == demand && g <= green {
            return (g, brown);
        }
    }
    (0.0, demand)
}

/// [`account_server_energy`] with the surplus recorded as wasted.
pub fn ledger_entry(demand: f64, available_green: f64) -> LedgerEntry {
    let (green_used, brown_used) = account_server_energy(demand, available_green);
    LedgerEntry {
        demand,
        available_green,
        green_used,
        brown_used,
        green_wasted: available_green - green_used,
    }
}

/// Energy drawn by a server over one slot under a linear utilization model.
/// Utilization saturates at one when backup capacity is in use.
pub fn server_energy_demand(
    alloc_total: f64,
    f_max: f64,
    slot_len_s: f64,
    power: &ServerPower,
) -> f64 {
    let util = (alloc_total / f_max).clamp(0.0, 1.0);
    slot_len_s * (power.idle_w + (power.peak_w - power.idle_w) * util)
}

/// Energy buffer of an IoT device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBattery {
    pub capacity_j: f64,
    pub level_j: f64,
    #[serde(default)]
    pub harvest_j_per_slot: f64,
}

/// Outcome of advancing a battery by one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatteryStep {
    /// The plan was affordable; holds the new state.
    Powered(DeviceBattery),
    /// The plan was not affordable. Nothing ran; holds the state after
    /// harvesting only.
    Depleted(DeviceBattery),
}

impl BatteryStep {
    pub fn battery(&self) -> DeviceBattery {
        match self {
            BatteryStep::Powered(b) | BatteryStep::Depleted(b) => *b,
        }
    }

    pub fn is_depleted(&self) -> bool {
        matches!(self, BatteryStep::Depleted(_))
    }
}

impl DeviceBattery {
    /// A battery that never runs out.
    pub fn unlimited() -> Self {
        DeviceBattery {
            capacity_j: f64::INFINITY,
            level_j: f64::INFINITY,
            harvest_j_per_slot: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_j >= 0.0
            && self.level_j >= 0.0
            && self.level_j <= self.capacity_j
            && self.harvest_j_per_slot >= 0.0
            && self.harvest_j_per_slot.is_finite())
        {
            return Err(Error::InvalidScenario(format!(
                "battery needs 0 <= level <= capacity and harvest >= 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Harvests for one slot, then pays `consumed` if affordable.
    pub fn step(&self, consumed: f64) -> BatteryStep {
        let charged = (self.level_j + self.harvest_j_per_slot).min(self.capacity_j);
        let after = charged - consumed;
        if after >= 0.0 {
            BatteryStep::Powered(DeviceBattery {
                level_j: after,
                ..*self
            })
        } else {
            BatteryStep::Depleted(DeviceBattery {
                level_j: charged,
                ..*self
            })
        }
    }
}

/// Free-function form of [`DeviceBattery::step`].
pub fn step_battery(b: &DeviceBattery, consumed: f64) -> BatteryStep {
    b.step(consumed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diurnal_examples() {
        let p = GreenProfile::diurnal(40.0);
        // One-hour slots starting at midnight.
        assert_eq!(p.available(0, 3600.0).unwrap(), 0.0);
        assert_eq!(p.available(3, 3600.0).unwrap(), 0.0);
        assert_eq!(p.available(12, 3600.0).unwrap(), 40.0);
        assert_eq!(p.available(36, 3600.0).unwrap(), 40.0);
        assert_eq!(p.available(23, 3600.0).unwrap(), 0.0);
        let c = GreenProfile::Constant { level_j: 5.0 };
        assert_eq!(c.available(0, 1.0).unwrap(), 5.0);
        assert_eq!(c.available(1_000_000, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn trace_bounds() {
        let p = GreenProfile::Trace {
            samples_j: vec![1.0, 2.0],
        };
        assert_eq!(p.available(1, 1.0).unwrap(), 2.0);
        assert_eq!(
            p.available(2, 1.0),
            Err(Error::SlotOutOfRange { slot: 2, len: 2 })
        );
        assert!(p.validate(3).is_err());
        assert!(p.validate(2).is_ok());
    }

    #[test]
    fn diurnal_quadrature() {
        // Riemann sum over one day against 2 * peak * daylight / pi.
        let peak = 250.0;
        let p = GreenProfile::DiurnalSine {
            peak_j: peak,
            sunrise_h: 5.5,
            sunset_h: 19.0,
            start_hour: 0.0,
        };
        for slot_len in [60.0, 150.0, 300.0] {
            let slots = (86_400.0 / slot_len) as usize;
            let sum: f64 = (0..slots)
                .map(|t| p.available(t, slot_len).unwrap() * slot_len)
                .sum();
            let closed = 2.0 * peak * (19.0 - 5.5) * 3600.0 / PI;
            assert!((sum - closed).abs() / closed < 0.01, "{slot_len}: {sum} vs {closed}");
        }
    }

    #[test]
    fn accounting_examples() {
        assert_eq!(account_server_energy(10.0, 6.0), (6.0, 4.0));
        assert_eq!(account_server_energy(10.0, 25.0), (10.0, 0.0));
        assert_eq!(account_server_energy(0.0, 7.0), (0.0, 0.0));
        assert_eq!(ledger_entry(10.0, 25.0).green_wasted, 15.0);
    }

    #[test]
    fn battery_examples() {
        let b = DeviceBattery {
            capacity_j: 10.0,
            level_j: 5.0,
            harvest_j_per_slot: 2.0,
        };
        assert_eq!(b.step(3.0), BatteryStep::Powered(DeviceBattery { level_j: 4.0, ..b }));
        let full = DeviceBattery {
            level_j: 9.0,
            harvest_j_per_slot: 5.0,
            ..b
        };
        assert_eq!(full.step(0.0).battery().level_j, 10.0);
        let low = DeviceBattery {
            capacity_j: 10.0,
            level_j: 1.0,
            harvest_j_per_slot: 0.0,
        };
        assert!(step_battery(&low, 2.0).is_depleted());
        assert_eq!(low.step(2.0).battery().level_j, 1.0);
    }

    #[test]
    fn server_demand_examples() {
        let pw = ServerPower {
            idle_w: 100.0,
            peak_w: 200.0,
        };
        assert_eq!(server_energy_demand(0.0, 10.0, 1.0, &pw), 100.0);
        assert_eq!(server_energy_demand(10.0, 10.0, 2.0, &pw), 400.0);
        assert_eq!(server_energy_demand(5.0, 10.0, 1.0, &pw), 150.0);
        assert_eq!(server_energy_demand(15.0, 10.0, 1.0, &pw), 200.0);
    }

    #[test]
    fn trace_file_format() {
        let text = "slot_index,joules\n0,1.5\n1, 2\n2,0\n";
        assert_eq!(read_green_trace(text.as_bytes()).unwrap(), vec![1.5, 2.0, 0.0]);
        let gap = "slot_index,joules\n0,1\n2,1\n";
        assert!(read_green_trace(gap.as_bytes()).is_err());
        let negative = "slot_index,joules\n0,-1\n";
        assert!(read_green_trace(negative.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn conservation_and_priority(demand in 0.0f64..1e6, avail in 0.0f64..1e6) {
            let (g, b) = account_server_energy(demand, avail);
            prop_assert_eq!(g + b, demand);
            prop_assert!(g >= 0.0 && b >= 0.0 && g <= avail);
            prop_assert!(g <= demand.min(avail));
            if b > 0.0 {
                prop_assert!(avail - g <= 4.0 * f64::EPSILON * demand);
            }
        }

        #[test]
        fn more_green_never_more_brown(demand in 0.0f64..1e6, avail in 0.0f64..1e6, extra in 0.0f64..1e6) {
            let (_, b1) = account_server_energy(demand, avail);
            let (_, b2) = account_server_energy(demand, avail + extra);
            prop_assert!(b2 <= b1);
        }

        #[test]
        fn battery_stays_in_range(cap in 1.0f64..100.0, start in 0.0f64..1.0, harvest in 0.0f64..5.0,
                                  draws in proptest::collection::vec(0.0f64..10.0, 1..50)) {
            let mut b = DeviceBattery { capacity_j: cap, level_j: start * cap, harvest_j_per_slot: harvest };
            for d in draws {
                b = b.step(d).battery();
                prop_assert!(b.level_j >= 0.0 && b.level_j <= cap);
            }
        }
    }
}
