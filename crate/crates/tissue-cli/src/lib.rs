//! Experiment pipeline around `tissue-core`: seeded run batches, policy
//! construction and evaluation, CSV artifacts, and realtime pacing.

pub mod artifacts;
pub mod experiments;
pub mod pacer;

pub use experiments::{
    freq_selectivity, policy_eval, signal_effect, single_run, ExperimentConfig,
    FreqSelectivityReport, PolicyEvalReport, PolicyTableRow, SignalEffectReport, SingleRunReport,
};
