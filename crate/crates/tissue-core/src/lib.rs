//! An agent-based process anomaly detector built around a tissue compartment:
//! a bounded store of antigen (syscall numbers) and signal channels (resource
//! usage), inhabited by two cell populations. Type 1 cells ingest antigen and
//! present it for a signal-controlled action time; Type 2 cells bind Type 1
//! cells, match presented antigen against randomised VR receptors, and log a
//! response per match. Responses made during replay of normal-usage traces
//! become permit policies over syscall numbers.
//!
//! The crate is `no_std` (alloc only). Everything that runs under a fixed
//! seed (replay, trace synthesis, policy construction) is a pure function
//! of its inputs. File IO, CSV artifacts and the CLI live in the companion
//! `tissue-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cell;
pub mod compartment;
pub mod engine;
pub mod params;
pub mod policy;
pub mod rng;
pub mod runlog;
pub mod stats;
pub mod synth;
pub mod trace;

pub use cell::{match_vr, update_action_time, AntigenProducer, Type1Cell, Type2Cell};
pub use compartment::{Antigen, AntigenState, Compartment, SignalChannel};
pub use engine::{Engine, EngineError, NoPacer, Pacer, ReplayOptions, TickReport};
pub use params::{parse_params, ParamError, ParameterSet};
pub use policy::{
    evaluate_policy, naive_policy, twocell_policy, union_policies, PolicyEvaluation,
    PolicyProvenance, SyscallPolicy,
};
pub use runlog::{
    parse_runlog, InjectionRecord, LogEvent, ProbeSnapshot, RunLog, RunLogError, RunStats,
};
pub use stats::{
    coefficient_of_variation, mean_sd, receptor_raster, response_rate_series, spearman_rho,
    RasterRow, RateBin, RateSeries, StatsError,
};
pub use synth::{builtin_profile, synthesize, normal_usage_frequencies, AttackSpec, SynthError, SynthProfile};
pub use trace::{
    parse_trace, serialize_trace, session_stats, SessionStats, SessionTrace, TraceError,
    TraceEvent, TraceEventKind,
};
