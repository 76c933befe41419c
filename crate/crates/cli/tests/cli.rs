use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greenoffload"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SLOTS_HEADER: &str = "slot,tasks,on_time,deadline_missed,dropped_by_policy,dropped_by_depletion,mean_delay_s,device_energy_j,device_reward,server_reward,server_demand_j,green_available_j,green_used_j,brown_used_j,green_wasted_j,mean_utilization,iterations,converged,evaluations";

#[test]
fn run_writes_three_files_with_one_row_per_slot() {
    let out = tempfile::tempdir().unwrap();
    let o = exec(&["run", "--scenario", s(&bundled("example.toml")), "--out", s(out.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.path().join("slots.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], SLOTS_HEADER);
    assert_eq!(lines.len(), 48 + 1);
    let summary = fs::read_to_string(out.path().join("summary.toml")).unwrap();
    assert!(summary.contains("slots = 48"));
    assert!(out.path().join("resolved_scenario.toml").exists());
}

#[test]
fn reruns_and_resolved_scenarios_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let scenario = bundled("example.toml");
    for dir in [&a, &b] {
        assert!(exec(&["run", "--scenario", s(&scenario), "--out", s(dir.path())]).status.success());
    }
    let first = fs::read(a.path().join("slots.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("slots.csv")).unwrap());

    let resolved = a.path().join("resolved_scenario.toml");
    let text = fs::read_to_string(&resolved).unwrap();
    assert!(text.contains("samples_j"), "trace should be inlined");
    assert!(text.contains("kappa_j_s_per_cycle2"));
    assert!(exec(&["run", "--scenario", s(&resolved), "--out", s(c.path())]).status.success());
    assert_eq!(first, fs::read(c.path().join("slots.csv")).unwrap());
}

#[test]
fn seed_flag_overrides_the_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let scenario = bundled("example.toml");
    exec(&["run", "--scenario", s(&scenario), "--out", s(a.path())]);
    exec(&["run", "--scenario", s(&scenario), "--out", s(b.path()), "--seed", "99"]);
    assert_ne!(
        fs::read(a.path().join("slots.csv")).unwrap(),
        fs::read(b.path().join("slots.csv")).unwrap()
    );
    let resolved = fs::read_to_string(b.path().join("resolved_scenario.toml")).unwrap();
    assert!(resolved.contains("seed = 99"));
}

fn write_variant(dir: &Path, from: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = fs::read_to_string(bundled(from)).unwrap();
    let p = dir.join("variant.toml");
    fs::write(&p, edit(text)).unwrap();
    p
}

#[test]
fn unknown_key_is_a_parse_error_naming_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "tiny.toml", |t| t.replacen("p_sched_w", "p_schedule_w", 1));
    let out = dir.path().join("out");
    let o = exec(&["run", "--scenario", s(&p), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p_schedule_w"), "{err}");
    assert!(err.contains("line"), "{err}");
    assert!(!out.exists());
}

#[test]
fn invalid_scenario_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "tiny.toml", |t| {
        t.replace("connection_time_s = 0.02", "connection_time_s = 0.5")
    });
    let out = dir.path().join("out");
    let o = exec(&["run", "--scenario", s(&p), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn compare_rows_and_ordering() {
    let out = tempfile::tempdir().unwrap();
    let o = exec(&[
        "compare",
        "--scenario",
        s(&bundled("offload_favorable.toml")),
        "--out",
        s(out.path()),
        "--policy",
        "all_local",
        "--policy",
        "all_edge_greedy",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.path().join("comparison.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let delay = |r: &Vec<&str>| r[1].parse::<f64>().unwrap();
    assert_eq!(rows[0][0], "all_local");
    assert!(delay(&rows[1]) < delay(&rows[0]));
}

#[test]
fn compare_rejects_one_policy_and_unknown_ids() {
    let scenario = bundled("tiny.toml");
    let o = exec(&["compare", "--scenario", s(&scenario), "--policy", "all_local"]);
    assert_eq!(o.status.code(), Some(2));
    let o = exec(&["compare", "--scenario", s(&scenario), "--policy", "cheapest", "--policy", "all_local"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for id in ["all_local", "all_edge_greedy", "random_feasible", "equilibrium"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn oracle_check_certifies_tiny_scenario() {
    let out = tempfile::tempdir().unwrap();
    let o = exec(&[
        "oracle-check",
        "--scenario",
        s(&bundled("tiny.toml")),
        "--slot",
        "0",
        "--out",
        s(out.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("certified ε-Nash"), "{stdout}");
    let report = fs::read_to_string(out.path().join("oracle_report.toml")).unwrap();
    let gap: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("social_optimum_gap = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(gap >= 0.0);
}

#[test]
fn oracle_check_guards() {
    let scenario = bundled("tiny.toml");
    let o = exec(&["oracle-check", "--scenario", s(&scenario), "--slot", "3"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let p = write_variant(dir.path(), "offload_favorable.toml", |t| {
        let device = "\n[[devices]]\nf_max_cycles_per_s = 5.0e8\ntx_power_w = 0.5\np_sched_w = 0.2\nbattery = { capacity_j = inf, level_j = inf }\n";
        let mut extra = String::new();
        for _ in 0..47 {
            extra.push_str(device);
        }
        t.replacen("\n[[servers]]", &format!("{extra}\n[[servers]]"), 1)
    });
    let o = exec(&["oracle-check", "--scenario", s(&p), "--slot", "0"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("profiles"));
}

#[test]
fn sweep_reports_each_scenario_in_order() {
    let out = tempfile::tempdir().unwrap();
    let o = exec(&[
        "sweep",
        "--scenario",
        s(&bundled("tiny.toml")),
        "--scenario",
        s(&bundled("offload_favorable.toml")),
        "--out",
        s(out.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.path().join("sweep.csv")).unwrap();
    let rows: Vec<_> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("tiny.toml"));
    assert!(rows[1].contains("offload_favorable.toml"));
}
