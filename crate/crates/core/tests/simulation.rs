use greenoffload_core::*;

fn scenario(policy: PolicyKind, seed: u64) -> Scenario {
    synthetic_scenario(&SyntheticParams {
        devices: 5,
        servers: 2,
        horizon_slots: 12,
        seed,
        policy,
        ..Default::default()
    })
}

#[test]
fn every_task_has_exactly_one_outcome() {
    for policy in PolicyKind::ALL {
        let (summary, slots) = run(&scenario(policy, 3)).unwrap();
        let counted = summary.completed_on_time
            + summary.deadline_missed
            + summary.dropped_by_policy
            + summary.dropped_by_depletion;
        assert_eq!(counted, summary.tasks, "{policy}");
        assert_eq!(summary.tasks, slots.iter().map(|s| s.tasks.len()).sum::<usize>());
        for s in &slots {
            for t in &s.tasks {
                assert_eq!(t.deadline_met(), t.outcome == TaskOutcome::OnTime);
            }
        }
    }
}

#[test]
fn energy_ledger_closes_every_slot() {
    let (summary, slots) = run(&scenario(PolicyKind::Equilibrium, 4)).unwrap();
    let mut brown = 0.0;
    for s in &slots {
        for r in &s.servers {
            assert_eq!(r.green_used_j + r.brown_used_j, r.demand_j);
            assert!(r.green_used_j <= r.green_available_j);
            assert_eq!(r.green_used_j + r.green_wasted_j, r.green_available_j);
        }
        brown += s.server_sum(|r| r.brown_used_j);
    }
    assert_eq!(summary.total_brown_used_j, brown);
    assert!(summary.green_utilization >= 0.0 && summary.green_utilization <= 1.0);
}

#[test]
fn rates_are_fractions() {
    for policy in PolicyKind::ALL {
        let (s, _) = run(&scenario(policy, 5)).unwrap();
        for r in [s.drop_rate, s.deadline_miss_rate, s.converged_fraction] {
            assert!((0.0..=1.0).contains(&r), "{policy}: {r}");
        }
    }
}

#[test]
fn default_equilibrium_runs_converge() {
    for seed in 0..5 {
        let (s, _) = run(&scenario(PolicyKind::Equilibrium, seed)).unwrap();
        assert!(s.converged_fraction >= 0.95, "seed {seed}: {}", s.converged_fraction);
    }
}

#[test]
fn empty_battery_drops_work() {
    let mut s = scenario(PolicyKind::Equilibrium, 6);
    for d in &mut s.devices {
        d.battery = DeviceBattery {
            capacity_j: 1e-3,
            level_j: 0.0,
            harvest_j_per_slot: 0.0,
        };
    }
    let (summary, slots) = run(&s).unwrap();
    assert!(summary.tasks > 0);
    assert_eq!(summary.dropped_by_depletion + summary.dropped_by_policy, summary.tasks);
    for slot in &slots {
        for r in &slot.servers {
            assert_eq!(r.load_cycles_per_s, 0.0);
        }
    }
}

#[test]
fn unlimited_battery_never_depletes() {
    let mut s = scenario(PolicyKind::AllLocal, 7);
    for d in &mut s.devices {
        d.battery = DeviceBattery::unlimited();
    }
    let (summary, _) = run(&s).unwrap();
    assert_eq!(summary.dropped_by_depletion, 0);
}

#[test]
fn sweep_matches_individual_runs() {
    let scenarios: Vec<_> = (0..4).map(|seed| scenario(PolicyKind::Equilibrium, seed)).collect();
    let mut bad = scenarios[0].clone();
    bad.slot_len_s = -1.0;
    let mut all = scenarios.clone();
    all.insert(2, bad);
    let results = sweep(&all);
    assert_eq!(results.len(), 5);
    assert!(matches!(results[2], Err(Error::InvalidScenario(_))));
    let ok: Vec<_> = results.into_iter().filter_map(|r| r.ok()).collect();
    for (r, s) in ok.iter().zip(&scenarios) {
        let (alone, _) = run(s).unwrap();
        assert_eq!(
            RunSummary { wall_clock_s: 0.0, ..r.clone() },
            RunSummary { wall_clock_s: 0.0, ..alone }
        );
    }
}

#[test]
fn slot_games_match_the_run() {
    let s = scenario(PolicyKind::Equilibrium, 8);
    let (_, slots) = run(&s).unwrap();
    for (t, m) in slots.iter().enumerate() {
        let game = s.slot_game(t).unwrap();
        assert_eq!(game.n_devices(), m.tasks.len());
    }
}

#[test]
fn csv_has_one_row_per_slot() {
    let (_, slots) = run(&scenario(PolicyKind::AllEdgeGreedy, 9)).unwrap();
    let mut buf = Vec::new();
    write_slots_csv(&mut buf, &slots).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), slots.len() + 1);
    assert_eq!(lines[0], SLOTS_CSV_HEADER.join(","));
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').count() == SLOTS_CSV_HEADER.len()));
}

#[test]
fn idle_servers_draw_idle_power_only() {
    let mut s = scenario(PolicyKind::Equilibrium, 8);
    s.arrivals = ArrivalModel::none();
    let (summary, slots) = run(&s).unwrap();
    assert_eq!(summary.tasks, 0);
    let idle: f64 = s.servers.iter().map(|k| k.power.idle_w).sum();
    let expected = idle * s.slot_len_s * s.horizon_slots as f64;
    assert!((summary.total_server_demand_j - expected).abs() <= 1e-9 * expected);
    for slot in &slots {
        assert!(slot.servers.iter().all(|r| r.utilization == 0.0));
    }
}

#[test]
fn single_local_task_matches_hand_evaluation() {
    let mut s = synthetic_scenario(&SyntheticParams {
        devices: 1,
        servers: 1,
        horizon_slots: 1,
        policy: PolicyKind::AllLocal,
        ..Default::default()
    });
    s.instructions_to_cycles = 2.0;
    s.arrivals = ArrivalModel::Explicit {
        slots: vec![vec![TaskSpec {
            device_id: 0,
            data_bits: 1e6,
            instructions: 5e8,
            deadline_s: 3.0,
        }]],
    };
    let d = s.devices[0].clone();
    let (summary, slots) = run(&s).unwrap();

    let cycles = 5e8 * 2.0;
    let delay = cycles / d.f_max_cycles_per_s;
    let energy = d.kappa_j_s_per_cycle2 * d.f_max_cycles_per_s.powi(2) * delay;
    let t = &slots[0].tasks[0];
    assert_eq!(t.server, None);
    assert_eq!(t.outcome, TaskOutcome::OnTime);
    assert!((t.total_delay_s - delay).abs() <= 1e-12 * delay);
    assert!((t.device_energy_j - energy).abs() <= 1e-12 * energy);
    assert_eq!(t.reward, 0.0);
    assert_eq!(summary.completed_on_time, 1);

    let charged = (d.battery.level_j + d.battery.harvest_j_per_slot).min(d.battery.capacity_j);
    assert!((slots[0].devices[0].battery_level_j - (charged - energy)).abs() <= 1e-9);
    let idle = s.servers[0].power.idle_w * s.slot_len_s;
    assert!((slots[0].servers[0].demand_j - idle).abs() <= 1e-9 * idle);
}
