//! Device and server reward functions.

use serde::{Deserialize, Serialize};

use crate::costs::CostBreakdown;
use crate::model::{ServerDecision, ServerSpec};

/// Weights of the device reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardCoefficients {
    /// Weight on delay saved (per second).
    pub lambda: f64,
    /// Weight on device energy saved (per joule).
    pub epsilon: f64,
    /// Weight on the payment `price * alloc`. Zero leaves devices blind to
    /// prices.
    #[serde(default)]
    pub mu: f64,
}

impl Default for RewardCoefficients {
    fn default() -> Self {
        RewardCoefficients {
            lambda: 1.0,
            epsilon: 1.0,
            mu: 0.0,
        }
    }
}

impl RewardCoefficients {
    pub fn is_valid(&self) -> bool {
        [self.lambda, self.epsilon, self.mu]
            .iter()
            .all(|c| *c >= 0.0 && c.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RewardCoefficients {
            lambda: self.lambda * factor,
            epsilon: self.epsilon * factor,
            mu: self.mu * factor,
        }
    }
}

/// Delay, energy and payment of an offload decision, as seen by the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadTerms {
    pub delay: f64,
    pub energy: f64,
    pub price: f64,
    pub alloc: f64,
}

/// Reward of a device relative to running its task fully locally.
///
/// `baseline` is the full-local cost at peak device rate. `None` (stay local
/// or drop) scores zero.
pub fn device_reward(
    baseline: &CostBreakdown,
    offload: Option<&OffloadTerms>,
    coeffs: &RewardCoefficients,
) -> f64 {
    match offload {
        None => 0.0,
        Some(o) => {
            coeffs.lambda * (baseline.total_delay - o.delay)
                + coeffs.epsilon * (baseline.device_energy - o.energy)
                - coeffs.mu * o.price * o.alloc
        }
    }
}

/// Server profit: revenue on all allocated resources, minus the green cost
/// on the part served by its own capacity, minus the backup bill.
pub fn server_reward(
    server: &ServerSpec,
    green_rate: f64,
    demand_total: f64,
    decision: &ServerDecision,
) -> f64 {
    decision.price * demand_total
        - green_rate * demand_total.min(server.f_max_cycles_per_s)
        - server.backup_price * decision.backup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Channel, ServerPower};

    #[test]
    fn device_examples() {
        let base = CostBreakdown {
            total_delay: 8.0,
            device_energy: 6.0,
            ..Default::default()
        };
        let coeffs = RewardCoefficients {
            lambda: 0.5,
            epsilon: 0.5,
            mu: 0.0,
        };
        let offload = OffloadTerms {
            delay: 4.0,
            energy: 2.0,
            price: 3.0,
            alloc: 7.0,
        };
        assert_eq!(device_reward(&base, Some(&offload), &coeffs), 4.0);
        assert_eq!(device_reward(&base, None, &coeffs), 0.0);
        let same = OffloadTerms {
            delay: 8.0,
            energy: 6.0,
            ..offload
        };
        assert_eq!(device_reward(&base, Some(&same), &coeffs), 0.0);
        let priced = RewardCoefficients { mu: 0.1, ..coeffs };
        assert!((device_reward(&base, Some(&offload), &priced) - (4.0 - 2.1)).abs() < 1e-12);
    }

    #[test]
    fn server_examples() {
        let s = ServerSpec {
            id: 0,
            f_max_cycles_per_s: 10.0,
            connection_time_s: 0.01,
            channel: Channel {
                bandwidth_hz: 1.0,
                noise_w: 1.0,
                gain: 1.0,
            },
            backup_capacity_cycles_per_s: 10.0,
            backup_price: 1.0,
            green_rate: 0.3,
            green_rate_trace: None,
            admission_cap: None,
            power: ServerPower::default(),
        };
        let d = ServerDecision {
            price: 2.0,
            backup: 0.0,
        };
        assert!((server_reward(&s, 0.3, 5.0, &d) - 8.5).abs() < 1e-12);
        let backup_only = ServerDecision {
            price: 2.0,
            backup: 4.0,
        };
        assert_eq!(server_reward(&s, 0.3, 0.0, &backup_only), -4.0);
        assert!((server_reward(&s, 0.3, 15.0, &backup_only) - (30.0 - 3.0 - 4.0)).abs() < 1e-12);
    }
}
