//! Run logs: the timestamped event record produced by a replay.
//!
//! The on-disk format is line based, one event per line, timestamps in
//! microseconds of virtual time:
//!
//! ```text
//! R <t_us> <cell_id> <syscall>       response
//! X <t_us> <cell_id>                 VR randomisation
//! P <t_us> <antigen_count> <resp>    probe snapshot
//! D <t_us> <syscall>                 antigen destroyed
//! ```
//!
//! The in-memory log additionally carries full probe snapshots (per-cell VR
//! locks, for the receptor raster), injection records (for rate series) and
//! run counters; those are not part of the file format and are empty on a
//! parsed log.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use core::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogEvent {
    Response { at: u64, cell_id: u32, syscall: u32 },
    Randomise { at: u64, cell_id: u32 },
    Probe { at: u64, antigen_count: u32, response_total: u64 },
    Destroyed { at: u64, syscall: u32 },
}

impl LogEvent {
    pub fn at(&self) -> u64 {
        match *self {
            LogEvent::Response { at, .. }
            | LogEvent::Randomise { at, .. }
            | LogEvent::Probe { at, .. }
            | LogEvent::Destroyed { at, .. } => at,
        }
    }
}

/// Periodic snapshot of engine state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSnapshot {
    pub taken_at: u64,
    pub antigen_count: u32,
    pub per_cell_vr_locks: BTreeMap<u32, Vec<u32>>,
    pub response_count_so_far: u64,
}

/// One injection call made by the replay client (pre-multiplier event).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectionRecord {
    pub at: u64,
    pub syscall: u32,
    pub copies_stored: u32,
}

/// Counters accumulated over a run. Conservation holds at run end:
/// `injected_copies == evicted + destroyed + residual_antigen`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub injected_copies: u64,
    pub evicted: u64,
    /// Copies destroyed by presentation expiry or by a match.
    pub destroyed: u64,
    pub responses: u64,
    pub randomisations: u64,
    pub ticks: u64,
    /// Copies still alive at run end (compartment + internal stores + presented).
    pub residual_antigen: u64,
    /// Sum over ticks of all Type 1 producer action times, and the number of
    /// producer-tick samples; their ratio is the observed mean action time.
    pub action_time_sum: u64,
    pub action_time_samples: u64,
}

impl RunStats {
    pub fn mean_action_time(&self) -> Option<f64> {
        if self.action_time_samples == 0 {
            None
        } else {
            Some(self.action_time_sum as f64 / self.action_time_samples as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub events: Vec<LogEvent>,
    pub probes: Vec<ProbeSnapshot>,
    pub injections: Vec<InjectionRecord>,
    pub stats: RunStats,
}

impl RunLog {
    pub fn responses(&self) -> impl Iterator<Item = (u64, u32, u32)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            LogEvent::Response { at, cell_id, syscall } => Some((at, cell_id, syscall)),
            _ => None,
        })
    }

    pub fn randomisations(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            LogEvent::Randomise { at, cell_id } => Some((at, cell_id)),
            _ => None,
        })
    }

    /// Canonical text form (the external file format).
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            match *event {
                LogEvent::Response { at, cell_id, syscall } => {
                    let _ = writeln!(out, "R {at} {cell_id} {syscall}");
                }
                LogEvent::Randomise { at, cell_id } => {
                    let _ = writeln!(out, "X {at} {cell_id}");
                }
                LogEvent::Probe { at, antigen_count, response_total } => {
                    let _ = writeln!(out, "P {at} {antigen_count} {response_total}");
                }
                LogEvent::Destroyed { at, syscall } => {
                    let _ = writeln!(out, "D {at} {syscall}");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunLogError {
    #[error("line {line}: malformed log line `{text}`")]
    Malformed { line: usize, text: String },
}

/// Parses the file format back into a log. Only the event list and the
/// counters derivable from it are populated.
pub fn parse_runlog(text: &str) -> Result<RunLog, RunLogError> {
    let mut log = RunLog::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_ascii_whitespace();
        let tag = fields.next().unwrap();
        let malformed = || RunLogError::Malformed {
            line,
            text: trimmed.to_string(),
        };
        let mut next_u64 = {
            let fields = &mut fields;
            move || -> Result<u64, RunLogError> {
                fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(malformed)
            }
        };
        let event = match tag {
            "R" => LogEvent::Response {
                at: next_u64()?,
                cell_id: next_u64()? as u32,
                syscall: next_u64()? as u32,
            },
            "X" => LogEvent::Randomise {
                at: next_u64()?,
                cell_id: next_u64()? as u32,
            },
            "P" => LogEvent::Probe {
                at: next_u64()?,
                antigen_count: next_u64()? as u32,
                response_total: next_u64()?,
            },
            "D" => LogEvent::Destroyed {
                at: next_u64()?,
                syscall: next_u64()? as u32,
            },
            _ => return Err(malformed()),
        };
        if fields.next().is_some() {
            return Err(malformed());
        }
        match event {
            LogEvent::Response { .. } => log.stats.responses += 1,
            LogEvent::Randomise { .. } => log.stats.randomisations += 1,
            LogEvent::Destroyed { .. } => log.stats.destroyed += 1,
            LogEvent::Probe { .. } => {}
        }
        log.events.push(event);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn serialize_format_is_exact() {
        let log = RunLog {
            events: vec![
                LogEvent::Response { at: 100000, cell_id: 51, syscall: 6 },
                LogEvent::Destroyed { at: 100000, syscall: 6 },
                LogEvent::Randomise { at: 200000, cell_id: 52 },
                LogEvent::Probe { at: 1000000, antigen_count: 3, response_total: 1 },
            ],
            ..RunLog::default()
        };
        assert_eq!(
            log.serialize(),
            "R 100000 51 6\nD 100000 6\nX 200000 52\nP 1000000 3 1\n"
        );
    }

    #[test]
    fn parse_round_trips_events() {
        let text = "R 1 2 3\nX 4 5\nP 6 7 8\nD 9 10\n";
        let log = parse_runlog(text).unwrap();
        assert_eq!(log.serialize(), text);
        assert_eq!(log.stats.responses, 1);
        assert_eq!(log.stats.destroyed, 1);
        assert_eq!(log.stats.randomisations, 1);
    }

    #[test]
    fn junk_line_reports_number() {
        let err = parse_runlog("R 1 2 3\nQ 9\n").unwrap_err();
        assert!(matches!(err, RunLogError::Malformed { line: 2, .. }));
        let err = parse_runlog("R 1 2\n").unwrap_err();
        assert!(matches!(err, RunLogError::Malformed { line: 1, .. }));
        let err = parse_runlog("X 1 2 3\n").unwrap_err();
        assert!(matches!(err, RunLogError::Malformed { line: 1, .. }));
    }
}
