//! `greenoffload`: batch driver for offloading simulations.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage or parse error,
//! 3 invalid scenario, 4 instance too large for the oracle.

mod scenario_file;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greenoffload_core::policy::oracle::OracleOptions;
use greenoffload_core::report::fmt_sig;
use greenoffload_core::{
    brute_force_oracle, check_epsilon_nash, run, sweep, write_slots_csv, Error, PolicyKind,
    RunSummary, Scenario,
};

use scenario_file::{load, resolved_text};

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidScenario(_) => 3,
            Error::OracleTooLarge { .. } => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "greenoffload", version, about = "Green-energy-aware task offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write summary.toml, slots.csv and resolved_scenario.toml.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's policy.
        #[arg(long)]
        policy: Option<PolicyKind>,
    },
    /// Run the same scenario under several policies and write comparison.csv.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Policy to include; repeat for each. Defaults to every policy.
        #[arg(long)]
        policy: Vec<PolicyKind>,
    },
    /// Certify one slot's equilibrium against exhaustive search.
    OracleCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        slot: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several scenarios in parallel and write sweep.csv.
    Sweep {
        /// Scenario file; repeat for each.
        #[arg(long, required = true)]
        scenario: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        policy: Option<PolicyKind>,
    },
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| Failure::runtime(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn out_dir(flag: Option<PathBuf>, from_file: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag.or(from_file).unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .map_err(|e| Failure::runtime(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_valid(path: &Path, seed: Option<u64>) -> Result<scenario_file::Loaded, Failure> {
    let mut loaded = load(path)?;
    if let Some(seed) = seed {
        loaded.scenario.seed = seed;
    }
    loaded.scenario.validate()?;
    Ok(loaded)
}

fn summary_text(summary: &RunSummary) -> Result<String, Failure> {
    toml::to_string(summary).map_err(|e| Failure::runtime(format!("serializing summary: {e}")))
}

fn cmd_run(
    scenario: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    policy: Option<PolicyKind>,
) -> Result<(), Failure> {
    let mut loaded = load_valid(scenario, seed)?;
    if let Some(p) = policy {
        loaded.scenario.policy = p;
    }
    let (summary, slots) = run(&loaded.scenario)?;
    let dir = out_dir(out, loaded.output.dir)?;

    let mut csv = Vec::new();
    write_slots_csv(&mut csv, &slots)?;
    let summary_toml = summary_text(&summary)?;
    let resolved = resolved_text(&loaded.scenario)?;
    write_atomic(&dir.join("slots.csv"), &csv)?;
    write_atomic(&dir.join("summary.toml"), summary_toml.as_bytes())?;
    write_atomic(&dir.join("resolved_scenario.toml"), resolved.as_bytes())?;
    println!(
        "{}: {} slots, {} tasks, drop rate {}, brown {} J -> {}",
        summary.policy,
        summary.slots,
        summary.tasks,
        fmt_sig(summary.drop_rate),
        fmt_sig(summary.total_brown_used_j),
        dir.display()
    );
    Ok(())
}

const COMPARISON_HEADER: &str = "policy,mean_delay_s,total_brown_j,green_utilization,drop_rate,mean_device_reward,mean_server_reward,wall_clock_s";

fn comparison_row(s: &RunSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        s.policy,
        fmt_sig(s.mean_delay_s),
        fmt_sig(s.total_brown_used_j),
        fmt_sig(s.green_utilization),
        fmt_sig(s.drop_rate),
        fmt_sig(s.mean_device_reward),
        fmt_sig(s.mean_server_reward),
        fmt_sig(s.wall_clock_s)
    )
}

fn cmd_compare(
    scenario: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    policies: Vec<PolicyKind>,
) -> Result<(), Failure> {
    let policies = if policies.is_empty() {
        PolicyKind::ALL.to_vec()
    } else {
        policies
    };
    if policies.len() < 2 {
        return Err(Failure::usage("compare needs at least two --policy values"));
    }
    let loaded = load_valid(scenario, seed)?;
    let mut table = String::from(COMPARISON_HEADER);
    table.push('\n');
    for p in policies {
        let s = Scenario {
            policy: p,
            ..loaded.scenario.clone()
        };
        let (summary, _) = run(&s)?;
        table.push_str(&comparison_row(&summary));
        table.push('\n');
    }
    let dir = out_dir(out, loaded.output.dir)?;
    write_atomic(&dir.join("comparison.csv"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn cmd_oracle_check(
    scenario: &Path,
    slot: usize,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let loaded = load_valid(scenario, seed)?;
    let s = &loaded.scenario;
    if slot >= s.horizon_slots {
        return Err(Failure::usage(format!(
            "slot {slot} is outside the horizon of {} slots",
            s.horizon_slots
        )));
    }
    let game = s.slot_game(slot)?;
    let eq = game.best_response_equilibrium();
    let rewards = game
        .device_rewards(&eq.profile)
        .into_iter()
        .chain(game.server_rewards(&eq.profile));
    let epsilon = game.config().tol * rewards.fold(1.0f64, |a, r| a.max(r.abs()));
    let report = brute_force_oracle(
        &game,
        &OracleOptions {
            epsilon,
            record_table: false,
        },
    )?;
    let social = game.social_reward(&eq.profile);
    let in_set = report.is_nash(&eq.profile);
    let holds = check_epsilon_nash(&game, &eq.profile, epsilon).holds();
    let certified = eq.converged && in_set && holds;
    let gap = report.social_optimum_reward - social;

    let text = format!(
        "slot = {slot}\ncertified = {certified}\nconverged = {}\niterations = {}\nin_oracle_nash_set = {in_set}\nepsilon = {}\njoint_profiles = {}\nfeasible_profiles = {}\nnash_profiles = {}\nequilibrium_social_reward = {}\noptimum_social_reward = {}\nsocial_optimum_gap = {}\n",
        eq.converged,
        eq.iterations,
        fmt_sig(epsilon),
        report.cardinality,
        report.feasible_profiles,
        report.nash_profiles.len(),
        fmt_sig(social),
        fmt_sig(report.social_optimum_reward),
        fmt_sig(gap),
    );
    if let Some(dir) = out.or(loaded.output.dir) {
        let dir = out_dir(Some(dir), None)?;
        write_atomic(&dir.join("oracle_report.toml"), text.as_bytes())?;
    }
    if certified {
        println!("certified ε-Nash (social optimum gap {})", fmt_sig(gap));
    } else {
        println!("NOT certified");
    }
    print!("{text}");
    Ok(())
}

const SWEEP_HEADER: &str = "scenario,policy,devices,servers,slots,tasks,mean_delay_s,total_brown_j,drop_rate,mean_device_reward,converged_fraction,evaluations,wall_clock_s";

fn cmd_sweep(
    files: &[PathBuf],
    out: Option<PathBuf>,
    seed: Option<u64>,
    policy: Option<PolicyKind>,
) -> Result<(), Failure> {
    let mut scenarios = Vec::with_capacity(files.len());
    for f in files {
        let mut loaded = load_valid(f, seed)?;
        if let Some(p) = policy {
            loaded.scenario.policy = p;
        }
        scenarios.push(loaded.scenario);
    }
    let mut table = String::from(SWEEP_HEADER);
    table.push('\n');
    for ((file, s), result) in files.iter().zip(&scenarios).zip(sweep(&scenarios)) {
        let r = result?;
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            file.display(),
            r.policy,
            s.devices.len(),
            s.servers.len(),
            r.slots,
            r.tasks,
            fmt_sig(r.mean_delay_s),
            fmt_sig(r.total_brown_used_j),
            fmt_sig(r.drop_rate),
            fmt_sig(r.mean_device_reward),
            fmt_sig(r.converged_fraction),
            r.evaluations,
            fmt_sig(r.wall_clock_s)
        ));
    }
    let dir = out_dir(out, None)?;
    write_atomic(&dir.join("sweep.csv"), table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            policy,
        } => cmd_run(&scenario, out, seed, policy),
        Command::Compare {
            scenario,
            out,
            seed,
            policy,
        } => cmd_compare(&scenario, out, seed, policy),
        Command::OracleCheck {
            scenario,
            slot,
            out,
            seed,
        } => cmd_oracle_check(&scenario, slot, out, seed),
        Command::Sweep {
            scenario,
            out,
            seed,
            policy,
        } => cmd_sweep(&scenario, out, seed, policy),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
