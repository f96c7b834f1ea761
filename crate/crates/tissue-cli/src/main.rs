use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tissue_core::{
    builtin_profile, parse_params, parse_runlog, response_rate_series, session_stats,
    serialize_trace, synthesize, twocell_policy, Engine, InjectionRecord, ParameterSet,
    ReplayOptions, SessionTrace,
};

use tissue_cli::artifacts::{rate_series_csv, single_policy_csv};
use tissue_cli::experiments::{
    freq_selectivity, load_trace, policy_eval, signal_effect, single_run, ExperimentConfig,
};
use tissue_cli::pacer::SleepPacer;

#[derive(Parser)]
#[command(name = "tissue", about = "Tissue-compartment anomaly detector: replay, experiments, policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted experiment and write its CSV artifacts.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        #[command(flatten)]
        run_args: RunArgs,
        /// Runs per dataset.
        #[arg(long, default_value_t = 20)]
        runs: u32,
        /// Trace file override for the single-run experiment.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Output directory for artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Synthesize a session trace from a builtin profile.
    Synth {
        /// One of: normal1, normal2, success1, success2, failure1, failure2.
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output trace file.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print statistics from a trace or run-log file as CSV.
    Stats {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = StatsKind::Session)]
        which: StatsKind,
        /// Trace supplying the antigen column for `--which rates`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Replay a trace through the engine and write the run log.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        run_args: RunArgs,
        /// Run-log output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    FreqSelectivity,
    SingleRun,
    PolicyEval,
    SignalEffect,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsKind {
    /// Session summary of a trace file.
    Session,
    /// Policy (responded syscalls and counts) of a run log.
    Policy,
    /// Rate series of a run log.
    Rates,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalMode {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    /// Parameter file (`name = value` lines).
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Virtual time (default): trace timestamps drive the clock.
    #[arg(long, conflicts_with = "realtime")]
    r#virtual: bool,
    /// Realtime pacing with the 10 s client start delay.
    #[arg(long)]
    realtime: bool,
    /// Cytokine receptor on Type 1 cells.
    #[arg(long, value_enum)]
    signal: Option<SignalMode>,
    /// Action-time reset value when the signal increases.
    #[arg(long)]
    reset_action_time: Option<u32>,
}

impl RunArgs {
    fn load_params(&self) -> Result<ParameterSet> {
        let mut params = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading parameter file {}", path.display()))?;
                parse_params(&text)
                    .with_context(|| format!("parsing parameter file {}", path.display()))?
            }
            None => ParameterSet::default(),
        };
        params.rng_seed = self.seed;
        Ok(params)
    }

    fn signal_override(&self) -> Option<bool> {
        self.signal.map(|mode| matches!(mode, SignalMode::On))
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Experiment {
            name,
            run_args,
            runs,
            trace,
            out,
        } => cmd_experiment(name, &run_args, runs, trace, out),
        Command::Synth { profile, seed, out } => cmd_synth(&profile, seed, &out),
        Command::Stats { path, which, trace } => cmd_stats(&path, which, trace.as_deref()),
        Command::Replay {
            trace,
            run_args,
            out,
        } => cmd_replay(&trace, &run_args, out.as_deref()),
    }
}

fn cmd_experiment(
    name: ExperimentName,
    run_args: &RunArgs,
    runs: u32,
    trace: Option<PathBuf>,
    out: PathBuf,
) -> Result<()> {
    let cfg = ExperimentConfig {
        params: run_args.load_params()?,
        base_seed: run_args.seed,
        runs,
        out_dir: out,
        realtime: run_args.realtime,
        trace,
        signal: run_args.signal_override(),
        reset_action_time: run_args.reset_action_time,
    };
    match name {
        ExperimentName::FreqSelectivity => {
            let report = freq_selectivity(&cfg)?;
            println!(
                "freq-selectivity: {} policies, union permits {}/{} training syscalls, rho={:.4}",
                2 * cfg.runs,
                report
                    .training_syscalls
                    .iter()
                    .filter(|s| report.union.permits(**s))
                    .count(),
                report.training_syscalls.len(),
                report.rho
            );
            println!("wrote {}", report.artifact.display());
        }
        ExperimentName::SingleRun => {
            let report = single_run(&cfg)?;
            println!(
                "single-run: {} responses over {} syscalls",
                report.log.stats.responses,
                report.policy.permitted.len()
            );
            for path in &report.artifacts {
                println!("wrote {}", path.display());
            }
        }
        ExperimentName::PolicyEval => {
            let report = policy_eval(&cfg)?;
            for (dataset, _, naive, union) in &report.rows {
                let (np, nd) = naive.rounded();
                let (tp, td) = union.rounded();
                println!("{dataset}: naive {np}/{nd}, twocell {tp}/{td}");
            }
            println!("wrote {}", report.artifact.display());
        }
        ExperimentName::SignalEffect => {
            let report = signal_effect(&cfg)?;
            println!(
                "signal-effect: mean action time {:.2} -> {}, rho={:.4}, span on/off {:.1}s/{:.1}s",
                report.mean_action_time,
                report.action_time_used,
                report.rho,
                report.on_mean_span_us / 1e6,
                report.off_mean_span_us / 1e6,
            );
            println!("wrote {}", report.artifact.display());
        }
    }
    Ok(())
}

fn cmd_synth(profile_name: &str, seed: u64, out: &Path) -> Result<()> {
    let profile = builtin_profile(profile_name)
        .ok_or_else(|| anyhow!("unknown profile `{profile_name}`"))?;
    let trace = synthesize(&profile, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(out, serialize_trace(&trace))
        .with_context(|| format!("writing {}", out.display()))?;
    print_session_stats(&trace);
    Ok(())
}

fn print_session_stats(trace: &SessionTrace) {
    let stats = session_stats(trace);
    println!("session,total_time_s,total_antigen,max_rate,num_signals,total_signals");
    println!(
        "{},{},{},{},{},{}",
        trace.name,
        stats.total_time_s,
        stats.total_antigen,
        stats.max_rate,
        stats.num_signals,
        stats.total_signals
    );
}

fn cmd_stats(path: &Path, which: StatsKind, trace: Option<&Path>) -> Result<()> {
    match which {
        StatsKind::Session => {
            let trace = load_trace(path)?;
            print_session_stats(&trace);
        }
        StatsKind::Policy => {
            let log = load_runlog(path)?;
            print!("{}", single_policy_csv(&twocell_policy(&log)));
        }
        StatsKind::Rates => {
            let mut log = load_runlog(path)?;
            if let Some(trace_path) = trace {
                let trace = load_trace(trace_path)?;
                log.injections = trace
                    .antigen_events()
                    .map(|(at, syscall)| InjectionRecord {
                        at,
                        syscall,
                        copies_stored: 0,
                    })
                    .collect();
            }
            print!("{}", rate_series_csv(&response_rate_series(&log, 1_000_000)));
        }
    }
    Ok(())
}

fn load_runlog(path: &Path) -> Result<tissue_core::RunLog> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading run log {}", path.display()))?;
    parse_runlog(&text).with_context(|| format!("parsing run log {}", path.display()))
}

fn cmd_replay(trace_path: &Path, run_args: &RunArgs, out: Option<&Path>) -> Result<()> {
    let trace = load_trace(trace_path)?;
    let params = run_args.load_params()?;
    let options = ReplayOptions {
        signal_enabled: run_args.signal_override().unwrap_or(false),
        reset_action_time: run_args.reset_action_time,
        trace_offset_us: if run_args.realtime { 10_000_000 } else { 0 },
        ..ReplayOptions::default()
    };
    let log = if run_args.realtime {
        let started = std::time::Instant::now();
        let mut pacer = SleepPacer::new();
        let log = Engine::run_with_pacer(params, &trace, &options, &mut pacer)?;
        if let Some(pct) = tissue_cli::pacer::cpu_usage_pct(started.elapsed()) {
            eprintln!("realtime replay: ~{pct:.1}% CPU over {:.1} s", started.elapsed().as_secs_f64());
        }
        log
    } else {
        Engine::run(params, &trace, &options)?
    };
    eprintln!(
        "replayed {}: {} responses, {} copies injected, {} ticks",
        trace.name, log.stats.responses, log.stats.injected_copies, log.stats.ticks
    );
    match out {
        Some(path) => std::fs::write(path, log.serialize())
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", log.serialize()),
    }
    Ok(())
}
