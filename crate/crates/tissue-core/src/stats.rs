//! Rank statistics and log-derived series.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::runlog::{LogEvent, RunLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("input vectors differ in length")]
    LengthMismatch,
    #[error("need at least two observations")]
    TooFew,
    #[error("inputs must be finite")]
    NonFinite,
    #[error("rank correlation undefined for a constant input")]
    ConstantInput,
    #[error("coefficient of variation undefined for zero mean with nonzero sd")]
    UndefinedCv,
    #[error("inputs must be non-negative")]
    NegativeInput,
}

/// Ranks with ties assigned the average of the positions they occupy
/// (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite inputs"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j + 1) as f64 / 2.0;
        for &slot in &order[i..=j] {
            ranks[slot] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of the average-rank
/// vectors. Requires equal lengths, n >= 2, finite non-constant inputs.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch);
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFew);
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let dx = a - mx;
        let dy = b - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok(cov / libm::sqrt(vx * vy))
}

/// Coefficient of variation in percent: `100 * sd / mean`. Zero sd gives 0
/// regardless of the mean; zero mean with nonzero sd is undefined.
pub fn coefficient_of_variation(mean: f64, sd: f64) -> Result<f64, StatsError> {
    if mean < 0.0 || sd < 0.0 || !mean.is_finite() || !sd.is_finite() {
        return Err(StatsError::NegativeInput);
    }
    if sd == 0.0 {
        return Ok(0.0);
    }
    if mean == 0.0 {
        return Err(StatsError::UndefinedCv);
    }
    Ok(100.0 * sd / mean)
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1.0)))
}

/// One histogram bin of a rate series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateBin {
    pub start_us: u64,
    /// Responses in the bin.
    pub responses: u64,
    /// Antigen injection events (syscalls, pre-multiplier) in the bin.
    pub antigen: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateSeries {
    pub bin_us: u64,
    pub bins: Vec<RateBin>,
}

impl RateSeries {
    pub fn total_responses(&self) -> u64 {
        self.bins.iter().map(|b| b.responses).sum()
    }

    pub fn total_antigen(&self) -> u64 {
        self.bins.iter().map(|b| b.antigen).sum()
    }

    pub fn response_rates(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.responses as f64).collect()
    }

    pub fn antigen_rates(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.antigen as f64).collect()
    }
}

/// Bins responses and antigen injections over the run duration. Injections
/// come from the in-memory log; a log parsed from a file has none and yields
/// a zero antigen column.
pub fn response_rate_series(log: &RunLog, bin_us: u64) -> RateSeries {
    assert!(bin_us > 0, "bin width must be positive");
    let last_event = log.events.iter().map(LogEvent::at).max();
    let last_injection = log.injections.iter().map(|i| i.at).max();
    let Some(span_end) = last_event.max(last_injection) else {
        return RateSeries {
            bin_us,
            bins: Vec::new(),
        };
    };
    let nbins = (span_end / bin_us + 1) as usize;
    let mut bins: Vec<RateBin> = (0..nbins)
        .map(|i| RateBin {
            start_us: i as u64 * bin_us,
            ..RateBin::default()
        })
        .collect();
    for (at, _, _) in log.responses() {
        bins[(at / bin_us) as usize].responses += 1;
    }
    for record in &log.injections {
        bins[(record.at / bin_us) as usize].antigen += 1;
    }
    RateSeries { bin_us, bins }
}

/// One point of the receptor raster: at probe time `at_us`, `cell_id`
/// expressed a VR lock for `syscall`; `responded` marks the (cell, syscall)
/// pairs that produced a response at some point in the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RasterRow {
    pub at_us: u64,
    pub cell_id: u32,
    pub syscall: u32,
    pub responded: bool,
}

/// Expands probe snapshots into the receptor-expression raster.
pub fn receptor_raster(log: &RunLog) -> Vec<RasterRow> {
    let responders: BTreeSet<(u32, u32)> = log
        .responses()
        .map(|(_, cell_id, syscall)| (cell_id, syscall))
        .collect();
    let mut rows = Vec::new();
    for probe in &log.probes {
        for (&cell_id, locks) in &probe.per_cell_vr_locks {
            for &syscall in locks {
                rows.push(RasterRow {
                    at_us: probe.taken_at,
                    cell_id,
                    syscall,
                    responded: responders.contains(&(cell_id, syscall)),
                });
            }
        }
    }
    rows
}
