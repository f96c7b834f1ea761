//! Session traces: the timestamped syscall and signal record of one
//! monitored process session.
//!
//! File format (UTF-8, `#` comment lines permitted anywhere):
//!
//! ```text
//! #session <name> <duration_s>
//! A <t_us> <syscall>
//! S <t_us> <channel> <value>
//! ```

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use core::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEventKind {
    Antigen { syscall: u32 },
    Signal { channel: u8, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub at: u64,
    pub kind: TraceEventKind,
}

/// A parsed session. Events are sorted by time, ties kept in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub name: String,
    pub declared_duration_s: u64,
    pub events: Vec<TraceEvent>,
}

impl SessionTrace {
    pub fn antigen_events(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            TraceEventKind::Antigen { syscall } => Some((e.at, syscall)),
            _ => None,
        })
    }

    pub fn last_event_at(&self) -> Option<u64> {
        self.events.last().map(|e| e.at)
    }
}

/// The five summary columns reported per session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionStats {
    pub total_time_s: u64,
    pub total_antigen: u64,
    /// Maximum antigen count over 1 s sliding windows anchored at each
    /// antigen event.
    pub max_rate: u64,
    pub num_signals: u64,
    pub total_signals: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: malformed trace line `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: missing or bad `#session <name> <duration_s>` header")]
    BadHeader { line: usize },
    #[error("event at {at}us exceeds declared duration of {duration_s}s")]
    DurationExceeded { at: u64, duration_s: u64 },
}

/// Parses trace text into a sorted, validated session.
pub fn parse_trace(text: &str) -> Result<SessionTrace, TraceError> {
    let mut header: Option<(String, u64)> = None;
    let mut events: Vec<TraceEvent> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed
            .strip_prefix("#session")
            .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        {
            let mut fields = rest.split_ascii_whitespace();
            let name = fields.next().ok_or(TraceError::BadHeader { line })?;
            let duration: u64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or(TraceError::BadHeader { line })?;
            if fields.next().is_some() || header.is_some() {
                return Err(TraceError::BadHeader { line });
            }
            header = Some((name.to_string(), duration));
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        if header.is_none() {
            return Err(TraceError::BadHeader { line });
        }
        let malformed = || TraceError::Malformed {
            line,
            text: trimmed.to_string(),
        };
        let mut fields = trimmed.split_ascii_whitespace();
        let tag = fields.next().unwrap();
        let kind = match tag {
            "A" => {
                let at: u64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
                let syscall: u32 =
                    fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
                TraceEvent {
                    at,
                    kind: TraceEventKind::Antigen { syscall },
                }
            }
            "S" => {
                let at: u64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
                let channel: u8 =
                    fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
                let value: f64 =
                    fields.next().and_then(|f| f.parse().ok()).ok_or_else(malformed)?;
                if !value.is_finite() {
                    return Err(malformed());
                }
                TraceEvent {
                    at,
                    kind: TraceEventKind::Signal { channel, value },
                }
            }
            _ => return Err(malformed()),
        };
        if fields.next().is_some() {
            return Err(malformed());
        }
        events.push(kind);
    }

    let (name, declared_duration_s) = header.ok_or(TraceError::BadHeader { line: 1 })?;
    // stable: ties keep file order
    events.sort_by_key(|e| e.at);
    if let Some(last) = events.last() {
        if last.at > declared_duration_s * 1_000_000 {
            return Err(TraceError::DurationExceeded {
                at: last.at,
                duration_s: declared_duration_s,
            });
        }
    }
    Ok(SessionTrace {
        name,
        declared_duration_s,
        events,
    })
}

/// Canonical text form; `parse_trace(serialize_trace(t)) == t`.
pub fn serialize_trace(trace: &SessionTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#session {} {}", trace.name, trace.declared_duration_s);
    for event in &trace.events {
        match event.kind {
            TraceEventKind::Antigen { syscall } => {
                let _ = writeln!(out, "A {} {}", event.at, syscall);
            }
            TraceEventKind::Signal { channel, value } => {
                let _ = writeln!(out, "S {} {} {}", event.at, channel, value);
            }
        }
    }
    out
}

/// Computes the per-session summary columns.
pub fn session_stats(trace: &SessionTrace) -> SessionStats {
    let antigen_times: Vec<u64> = trace.antigen_events().map(|(at, _)| at).collect();
    let mut max_rate = 0u64;
    let mut hi = 0usize;
    for lo in 0..antigen_times.len() {
        if hi < lo {
            hi = lo;
        }
        let window_end = antigen_times[lo] + 1_000_000;
        while hi < antigen_times.len() && antigen_times[hi] < window_end {
            hi += 1;
        }
        max_rate = max_rate.max((hi - lo) as u64);
    }

    let mut channels = alloc::collections::BTreeSet::new();
    let mut total_signals = 0u64;
    for event in &trace.events {
        if let TraceEventKind::Signal { channel, .. } = event.kind {
            channels.insert(channel);
            total_signals += 1;
        }
    }

    SessionStats {
        total_time_s: trace.declared_duration_s,
        total_antigen: antigen_times.len() as u64,
        max_rate,
        num_signals: channels.len() as u64,
        total_signals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_antigen_events() {
        let t = parse_trace("#session tiny 1\nA 0 6\nA 500000 5\n").unwrap();
        assert_eq!(t.name, "tiny");
        assert_eq!(t.declared_duration_s, 1);
        assert_eq!(t.antigen_events().count(), 2);
        assert_eq!(
            t.events[1],
            TraceEvent {
                at: 500000,
                kind: TraceEventKind::Antigen { syscall: 5 }
            }
        );
    }

    #[test]
    fn parses_signal_events() {
        let t = parse_trace("#session s 1\nS 0 0 0.25\n").unwrap();
        assert_eq!(
            t.events[0],
            TraceEvent {
                at: 0,
                kind: TraceEventKind::Signal { channel: 0, value: 0.25 }
            }
        );
    }

    #[test]
    fn negative_syscall_is_a_parse_error() {
        let err = parse_trace("#session s 1\nA 0 -6\n").unwrap_err();
        assert!(matches!(err, TraceError::Malformed { line: 2, .. }));
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(matches!(
            parse_trace("A 0 6\n").unwrap_err(),
            TraceError::BadHeader { line: 1 }
        ));
        assert!(matches!(
            parse_trace("#session broken\nA 0 6\n").unwrap_err(),
            TraceError::BadHeader { line: 1 }
        ));
    }

    #[test]
    fn event_past_declared_duration_is_rejected() {
        let err = parse_trace("#session s 1\nA 1500000 6\n").unwrap_err();
        assert_eq!(
            err,
            TraceError::DurationExceeded {
                at: 1500000,
                duration_s: 1
            }
        );
    }

    #[test]
    fn unsorted_input_is_sorted_stably() {
        let t = parse_trace("#session s 2\nA 900000 5\nA 0 6\nS 900000 0 0.5\n").unwrap();
        let times: Vec<u64> = t.events.iter().map(|e| e.at).collect();
        assert_eq!(times, vec![0, 900000, 900000]);
        // tie keeps file order: A line before S line
        assert!(matches!(t.events[1].kind, TraceEventKind::Antigen { .. }));
    }

    #[test]
    fn comments_allowed_anywhere() {
        let t = parse_trace("# preamble\n#session s 1\n# middle\nA 0 6\n").unwrap();
        assert_eq!(t.antigen_events().count(), 1);
        // `#session` needs a following space to count as the header
        let t = parse_trace("#sessionish comment\n#session s 1\nA 0 6\n").unwrap();
        assert_eq!(t.name, "s");
    }

    #[test]
    fn stats_of_empty_trace_are_zero() {
        let t = parse_trace("#session empty 0\n").unwrap();
        assert_eq!(session_stats(&t), SessionStats::default());
    }

    #[test]
    fn max_rate_counts_one_second_windows() {
        let t = parse_trace("#session s 3\nA 0 1\nA 400000 1\nA 999999 1\nA 2000000 1\n").unwrap();
        let stats = session_stats(&t);
        assert_eq!(stats.total_antigen, 4);
        assert_eq!(stats.max_rate, 3);
    }

    #[test]
    fn round_trip_identity() {
        let text = "#session t 2\nA 0 6\nS 100 0 0.25\nA 1999999 5\n";
        let t = parse_trace(text).unwrap();
        assert_eq!(parse_trace(&serialize_trace(&t)).unwrap(), t);
    }
}
