use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use intersection_supervisor::efficient::approx_verify;
use intersection_supervisor::exact::exact_verify_capped;
use intersection_supervisor::sim::bench::{bench_scaling, log_log_slope, rows_text};
use intersection_supervisor::sim::output::emit_outputs;
use intersection_supervisor::sim::run::{run_simulation_with, supervisor_config, RunOptions};
use intersection_supervisor::sim::scenario::ScenarioConfig;
use intersection_supervisor::supervisor::Mode;
use intersection_supervisor::Error;

#[derive(Parser)]
#[command(version, about = "Intersection collision-avoidance supervisors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimMode {
    Exact,
    Efficient,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Exact,
    Approx,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario in closed loop and write the trace and metrics.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: SimMode,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario step count.
        #[arg(long)]
        steps: Option<usize>,
        /// Write measured wall times instead of zeros.
        #[arg(long)]
        timing: bool,
        /// Give up after this many sequences in exact mode.
        #[arg(long)]
        exact_cap: Option<u64>,
    },
    /// Verify the scenario's initial condition (exit 0 = yes, 2 = no).
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
        #[arg(long)]
        exact_cap: Option<u64>,
    },
    /// Per-iteration timing of both supervisors against the number of controlled vehicles.
    Bench {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated controlled-vehicle counts.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Supervisor iterations per run.
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Exact mode is skipped above this many controlled vehicles.
        #[arg(long, default_value_t = 8)]
        exact_max_n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        exact_cap: u64,
    },
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate {
            scenario,
            mode,
            trace,
            metrics,
            seed,
            steps,
            timing,
            exact_cap,
        } => {
            let mut cfg = ScenarioConfig::load(&scenario)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = steps {
                cfg.steps = n;
            }
            let mode = match mode {
                SimMode::Exact => Mode::Exact,
                SimMode::Efficient => Mode::Efficient,
            };
            let opts = RunOptions {
                exact_cap,
                ..RunOptions::default()
            };
            let (tr, m) = run_simulation_with(&cfg, mode, &opts)?;
            emit_outputs(&tr, &m, trace.as_deref(), metrics.as_deref(), timing)?;
            println!(
                "collisions={} overrides={} blocked={} completed={}",
                m.collisions, m.overrides, m.blocked, m.completed
            );
            Ok(if m.collisions > 0 || m.blocked > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify {
            scenario,
            mode,
            exact_cap,
        } => {
            let cfg = ScenarioConfig::load(&scenario)?;
            let sched = supervisor_config(&cfg, &RunOptions::default()).sched;
            let (params, est) = (cfg.params(), cfg.nominal_estimate());
            let v = match mode {
                VerifyMode::Exact => exact_verify_capped(&params, &est, &sched, exact_cap)?,
                VerifyMode::Approx => approx_verify(&params, &est, &sched)?,
            };
            println!("{}", if v.answer { "yes" } else { "no" });
            if let Some(s) = v.schedule.filter(|_| v.answer) {
                for (id, t) in &s.entries {
                    println!("vehicle {} enters at {t:.4}", cfg.vehicles[*id].label);
                }
            }
            Ok(if v.answer { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Bench {
            scenario,
            n,
            reps,
            exact_max_n,
            exact_cap,
        } => {
            let cfg = ScenarioConfig::load(&scenario)?;
            let opts = RunOptions {
                exact_cap: Some(exact_cap),
                ..RunOptions::default()
            };
            let rows = bench_scaling(&cfg, &n, reps, exact_max_n, &opts)?;
            print!("{}", rows_text(&rows));
            let eff: Vec<_> = rows.into_iter().filter(|r| r.mode == Mode::Efficient).collect();
            if let Some(k) = log_log_slope(&eff) {
                println!("efficient log-log slope: {k:.3}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::InfeasibleInitialCondition) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
