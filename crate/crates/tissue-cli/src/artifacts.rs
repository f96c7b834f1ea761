//! CSV artifact emitters. All formatting is fixed-precision so reruns with
//! the same seeds produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

use tissue_core::{RasterRow, RateSeries, SyscallPolicy};

use crate::experiments::PolicyTableRow;

/// Policy table: syscall, observed frequency, and the per-run response-count
/// mean/sd/cv over a batch. Optional `rho=` footer carries the rank
/// correlation between the frequency and mean columns.
pub fn policy_table_csv(rows: &[PolicyTableRow], rho: Option<f64>) -> String {
    let mut out = String::from("syscall,frequency,mean,sd,cv\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4},{:.0}",
            row.syscall, row.frequency, row.mean, row.sd, row.cv
        );
    }
    if let Some(rho) = rho {
        let _ = writeln!(out, "rho={rho:.4}");
    }
    out
}

/// Single-run policy: syscall and response frequency.
pub fn single_policy_csv(policy: &SyscallPolicy) -> String {
    let mut out = String::from("syscall,frequency\n");
    for (&syscall, &frequency) in &policy.per_syscall_frequency {
        let _ = writeln!(out, "{syscall},{frequency}");
    }
    out
}

/// Permit/deny percentages per dataset for two policies side by side.
pub struct EvalRow {
    pub dataset: String,
    pub naive_permitted: u32,
    pub naive_denied: u32,
    pub twocell_permitted: u32,
    pub twocell_denied: u32,
}

pub fn evaluation_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from(
        "dataset,naive_permitted_pct,naive_denied_pct,twocell_permitted_pct,twocell_denied_pct\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.dataset,
            row.naive_permitted,
            row.naive_denied,
            row.twocell_permitted,
            row.twocell_denied
        );
    }
    out
}

/// Rate series: per-bin antigen and response counts.
pub fn rate_series_csv(series: &RateSeries) -> String {
    let mut out = String::from("t,antigen_rate,response_rate\n");
    for bin in &series.bins {
        let _ = writeln!(
            out,
            "{},{},{}",
            bin.start_us / 1_000_000,
            bin.antigen,
            bin.responses
        );
    }
    out
}

/// Paired mean response-rate curves (signal on vs off) with report footers.
pub fn paired_series_csv(
    on: &[f64],
    off: &[f64],
    mean_action_time: f64,
    action_time_used: u32,
    rho: f64,
) -> String {
    let mut out = String::from("t,signal_on_rate,signal_off_rate\n");
    let len = on.len().max(off.len());
    for i in 0..len {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4}",
            i,
            on.get(i).copied().unwrap_or(0.0),
            off.get(i).copied().unwrap_or(0.0)
        );
    }
    let _ = writeln!(out, "mean_action_time={mean_action_time:.4}");
    let _ = writeln!(out, "action_time_used={action_time_used}");
    let _ = writeln!(out, "rho={rho:.4}");
    out
}

/// Receptor raster: each probe instant a cell expressed a lock for a
/// syscall, flagged when that (cell, syscall) pair ever responded.
pub fn raster_csv(rows: &[RasterRow]) -> String {
    let mut out = String::from("t,cell_id,syscall,responded_flag\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.at_us / 1_000_000,
            row.cell_id,
            row.syscall,
            u8::from(row.responded)
        );
    }
    out
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
