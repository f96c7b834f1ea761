//! The four scripted experiments.
//!
//! Seeds are derived from one base seed: run r of dataset d uses
//! `base + d*runs + r`, synthesized traces use `base + 1000 + profile
//! offset` (normal1 0, normal2 1, success1 2, success2 3, failure1 4,
//! failure2 5). Reruns with the same base seed write byte-identical
//! artifacts.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use tissue_core::{
    builtin_profile, coefficient_of_variation, evaluate_policy, mean_sd, naive_policy,
    parse_trace, receptor_raster, response_rate_series, spearman_rho, synthesize,
    twocell_policy, union_policies, Engine, ParameterSet, PolicyEvaluation, RateSeries,
    ReplayOptions, RunLog, SessionTrace, SyscallPolicy,
};

use crate::artifacts::{
    evaluation_csv, paired_series_csv, policy_table_csv, rate_series_csv, raster_csv,
    single_policy_csv, write_artifact, EvalRow,
};
use crate::pacer::SleepPacer;

const TRACE_SEED_BASE: u64 = 1000;
const REALTIME_CLIENT_DELAY_US: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: ParameterSet,
    pub base_seed: u64,
    /// Runs per dataset.
    pub runs: u32,
    pub out_dir: PathBuf,
    pub realtime: bool,
    /// Trace file override (single-run experiment and replay).
    pub trace: Option<PathBuf>,
    /// Cytokine receptor override; each experiment has its own default.
    pub signal: Option<bool>,
    pub reset_action_time: Option<u32>,
}

impl ExperimentConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            params: ParameterSet::default(),
            base_seed: 1,
            runs: 20,
            out_dir: out_dir.into(),
            realtime: false,
            trace: None,
            signal: None,
            reset_action_time: None,
        }
    }

    fn replay_options(&self, signal_default: bool) -> ReplayOptions {
        ReplayOptions {
            signal_enabled: self.signal.unwrap_or(signal_default),
            reset_action_time: self.reset_action_time,
            trace_offset_us: if self.realtime {
                REALTIME_CLIENT_DELAY_US
            } else {
                0
            },
            ..ReplayOptions::default()
        }
    }

    fn trace_seed(&self, profile_offset: u64) -> u64 {
        self.base_seed + TRACE_SEED_BASE + profile_offset
    }

    fn run_seed(&self, index: u32) -> u64 {
        self.base_seed + index as u64
    }
}

fn synth_builtin(name: &str, seed: u64) -> Result<SessionTrace> {
    let profile =
        builtin_profile(name).ok_or_else(|| anyhow!("unknown builtin profile `{name}`"))?;
    Ok(synthesize(&profile, seed)?)
}

pub fn load_trace(path: &Path) -> Result<SessionTrace> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trace {}", path.display()))?;
    parse_trace(&text).with_context(|| format!("parsing trace {}", path.display()))
}

fn run_once(
    params: &ParameterSet,
    trace: &SessionTrace,
    options: &ReplayOptions,
    seed: u64,
    realtime: bool,
) -> Result<RunLog> {
    let params = ParameterSet {
        rng_seed: seed,
        ..params.clone()
    };
    let log = if realtime {
        let started = Instant::now();
        let mut pacer = SleepPacer::new();
        let log = Engine::run_with_pacer(params, trace, options, &mut pacer)?;
        if let Some(pct) = crate::pacer::cpu_usage_pct(started.elapsed()) {
            eprintln!("realtime run: ~{pct:.1}% CPU over {:.1} s", started.elapsed().as_secs_f64());
        }
        log
    } else {
        Engine::run(params, trace, options)?
    };
    Ok(log)
}

/// One row of the frequency-selectivity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyTableRow {
    pub syscall: u32,
    /// Occurrences in the training traces.
    pub frequency: u64,
    /// Mean response count per run policy.
    pub mean: f64,
    pub sd: f64,
    pub cv: f64,
}

#[derive(Debug)]
pub struct FreqSelectivityReport {
    pub rows: Vec<PolicyTableRow>,
    /// Rank correlation between training frequency and mean response count.
    pub rho: f64,
    pub union: SyscallPolicy,
    pub training_syscalls: BTreeSet<u32>,
    pub artifact: PathBuf,
}

/// Trains `runs` policies on each normal-usage trace (signal off) and
/// reports how policy content tracks input frequency.
pub fn freq_selectivity(cfg: &ExperimentConfig) -> Result<FreqSelectivityReport> {
    let traces = [
        synth_builtin("normal1", cfg.trace_seed(0))?,
        synth_builtin("normal2", cfg.trace_seed(1))?,
    ];
    let options = cfg.replay_options(false);

    let mut policies = Vec::with_capacity(2 * cfg.runs as usize);
    for (t_idx, trace) in traces.iter().enumerate() {
        for r in 0..cfg.runs {
            let seed = cfg.run_seed(t_idx as u32 * cfg.runs + r);
            let log = run_once(&cfg.params, trace, &options, seed, cfg.realtime)?;
            policies.push(twocell_policy(&log));
        }
    }

    let training = naive_policy(&traces);
    let mut rows = Vec::with_capacity(training.per_syscall_frequency.len());
    for (&syscall, &frequency) in &training.per_syscall_frequency {
        let counts: Vec<f64> = policies
            .iter()
            .map(|p| p.per_syscall_frequency.get(&syscall).copied().unwrap_or(0) as f64)
            .collect();
        let (mean, sd) = mean_sd(&counts);
        let cv = coefficient_of_variation(mean, sd).unwrap_or(0.0);
        rows.push(PolicyTableRow {
            syscall,
            frequency,
            mean,
            sd,
            cv,
        });
    }
    rows.sort_by(|a, b| a.frequency.cmp(&b.frequency).then(a.syscall.cmp(&b.syscall)));

    let freqs: Vec<f64> = rows.iter().map(|r| r.frequency as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let rho = spearman_rho(&freqs, &means)?;

    let artifact = write_artifact(&cfg.out_dir, "table4.csv", &policy_table_csv(&rows, Some(rho)))?;
    Ok(FreqSelectivityReport {
        rows,
        rho,
        union: union_policies(&policies),
        training_syscalls: training.permitted,
        artifact,
    })
}

#[derive(Debug)]
pub struct SingleRunReport {
    pub trace: SessionTrace,
    pub log: RunLog,
    pub policy: SyscallPolicy,
    pub series: RateSeries,
    pub artifacts: Vec<PathBuf>,
}

/// One training run, logged in full: policy, rate series, receptor raster,
/// and the raw run log.
pub fn single_run(cfg: &ExperimentConfig) -> Result<SingleRunReport> {
    let trace = match &cfg.trace {
        Some(path) => load_trace(path)?,
        None => synth_builtin("normal2", cfg.trace_seed(1))?,
    };
    let options = cfg.replay_options(false);
    let log = run_once(&cfg.params, &trace, &options, cfg.run_seed(0), cfg.realtime)?;

    let policy = twocell_policy(&log);
    let series = response_rate_series(&log, 1_000_000);
    let raster = receptor_raster(&log);

    let artifacts = vec![
        write_artifact(&cfg.out_dir, "policy.csv", &single_policy_csv(&policy))?,
        write_artifact(&cfg.out_dir, "rates.csv", &rate_series_csv(&series))?,
        write_artifact(&cfg.out_dir, "raster.csv", &raster_csv(&raster))?,
        write_artifact(&cfg.out_dir, "run.log", &log.serialize())?,
    ];
    Ok(SingleRunReport {
        trace,
        log,
        policy,
        series,
        artifacts,
    })
}

#[derive(Debug)]
pub struct PolicyEvalReport {
    pub naive: SyscallPolicy,
    pub union: SyscallPolicy,
    /// (dataset name, trace, naive evaluation, union-policy evaluation)
    pub rows: Vec<(String, SessionTrace, PolicyEvaluation, PolicyEvaluation)>,
    pub artifact: PathBuf,
}

/// Trains the naive and union policies on the normal-usage traces and
/// applies both to the attack/failed sessions.
pub fn policy_eval(cfg: &ExperimentConfig) -> Result<PolicyEvalReport> {
    let training = [
        synth_builtin("normal1", cfg.trace_seed(0))?,
        synth_builtin("normal2", cfg.trace_seed(1))?,
    ];
    let naive = naive_policy(&training);

    let options = cfg.replay_options(false);
    let mut policies = Vec::with_capacity(2 * cfg.runs as usize);
    for (t_idx, trace) in training.iter().enumerate() {
        for r in 0..cfg.runs {
            let seed = cfg.run_seed(t_idx as u32 * cfg.runs + r);
            let log = run_once(&cfg.params, trace, &options, seed, cfg.realtime)?;
            policies.push(twocell_policy(&log));
        }
    }
    let union = union_policies(&policies);

    let datasets = [
        ("success1", 2u64),
        ("success2", 3),
        ("failure1", 4),
        ("failure2", 5),
    ];
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for (name, offset) in datasets {
        let trace = synth_builtin(name, cfg.trace_seed(offset))?;
        let naive_eval = evaluate_policy(&naive, &trace);
        let union_eval = evaluate_policy(&union, &trace);
        let (np, nd) = naive_eval.rounded();
        let (tp, td) = union_eval.rounded();
        csv_rows.push(EvalRow {
            dataset: name.to_string(),
            naive_permitted: np,
            naive_denied: nd,
            twocell_permitted: tp,
            twocell_denied: td,
        });
        rows.push((name.to_string(), trace, naive_eval, union_eval));
    }

    let artifact = write_artifact(&cfg.out_dir, "table6.csv", &evaluation_csv(&csv_rows))?;
    Ok(PolicyEvalReport {
        naive,
        union,
        rows,
        artifact,
    })
}

#[derive(Debug)]
pub struct SignalEffectReport {
    /// Mean action time observed on producers over the signal-on batch.
    pub mean_action_time: f64,
    /// The rounded value used for the matched signal-off batch.
    pub action_time_used: u32,
    /// Rank correlation between the on/off mean response-rate curves.
    pub rho: f64,
    pub on_mean_rate: Vec<f64>,
    pub off_mean_rate: Vec<f64>,
    /// Mean first-to-last response span per batch, microseconds.
    pub on_mean_span_us: f64,
    pub off_mean_span_us: f64,
    pub artifact: PathBuf,
}

fn response_span_us(log: &RunLog) -> u64 {
    let mut responses = log.responses().map(|(at, _, _)| at);
    let Some(first) = responses.next() else {
        return 0;
    };
    responses.last().map_or(0, |last| last - first)
}

fn mean_rate_curve(series_list: &[RateSeries]) -> Vec<f64> {
    let len = series_list.iter().map(|s| s.bins.len()).max().unwrap_or(0);
    let mut curve = vec![0.0; len];
    for series in series_list {
        for (i, bin) in series.bins.iter().enumerate() {
            curve[i] += bin.responses as f64;
        }
    }
    let n = series_list.len().max(1) as f64;
    for value in &mut curve {
        *value /= n;
    }
    curve
}

/// Runs the signal-on batch (cytokine receptor enabled, action time reset
/// value 100), then a matched signal-off batch with the producer action time
/// fixed to the rounded mean observed on the first batch.
pub fn signal_effect(cfg: &ExperimentConfig) -> Result<SignalEffectReport> {
    let trace = synth_builtin("success2", cfg.trace_seed(3))?;

    let on_options = ReplayOptions {
        signal_enabled: cfg.signal.unwrap_or(true),
        reset_action_time: Some(cfg.reset_action_time.unwrap_or(100)),
        trace_offset_us: if cfg.realtime { REALTIME_CLIENT_DELAY_US } else { 0 },
        ..ReplayOptions::default()
    };

    let mut on_series = Vec::new();
    let mut on_spans = Vec::new();
    let mut action_sum = 0u64;
    let mut action_samples = 0u64;
    for r in 0..cfg.runs {
        let log = run_once(&cfg.params, &trace, &on_options, cfg.run_seed(r), cfg.realtime)?;
        action_sum += log.stats.action_time_sum;
        action_samples += log.stats.action_time_samples;
        on_spans.push(response_span_us(&log) as f64);
        on_series.push(response_rate_series(&log, 1_000_000));
    }
    if action_samples == 0 {
        bail!("signal-on batch produced no producer samples");
    }
    let mean_action_time = action_sum as f64 / action_samples as f64;
    let action_time_used = mean_action_time.round().max(1.0) as u32;

    let off_params = ParameterSet {
        antigen_producer_action_time: action_time_used,
        ..cfg.params.clone()
    };
    let off_options = ReplayOptions {
        signal_enabled: false,
        trace_offset_us: on_options.trace_offset_us,
        ..ReplayOptions::default()
    };
    let mut off_series = Vec::new();
    let mut off_spans = Vec::new();
    for r in 0..cfg.runs {
        let log = run_once(&off_params, &trace, &off_options, cfg.run_seed(r), cfg.realtime)?;
        off_spans.push(response_span_us(&log) as f64);
        off_series.push(response_rate_series(&log, 1_000_000));
    }

    let on_mean_rate = mean_rate_curve(&on_series);
    let off_mean_rate = mean_rate_curve(&off_series);
    let len = on_mean_rate.len().max(off_mean_rate.len());
    let pad = |v: &[f64]| {
        let mut padded = v.to_vec();
        padded.resize(len, 0.0);
        padded
    };
    let rho = spearman_rho(&pad(&on_mean_rate), &pad(&off_mean_rate))?;

    let (on_mean_span_us, _) = mean_sd(&on_spans);
    let (off_mean_span_us, _) = mean_sd(&off_spans);

    let artifact = write_artifact(
        &cfg.out_dir,
        "fig6.csv",
        &paired_series_csv(&on_mean_rate, &off_mean_rate, mean_action_time, action_time_used, rho),
    )?;
    Ok(SignalEffectReport {
        mean_action_time,
        action_time_used,
        rho,
        on_mean_rate,
        off_mean_rate,
        on_mean_span_us,
        off_mean_span_us,
        artifact,
    })
}
