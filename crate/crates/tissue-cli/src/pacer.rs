//! Wall-clock pacing for realtime replay.

use std::time::{Duration, Instant};

use tissue_core::Pacer;

/// Sleeps until each virtual timestamp, anchored at construction time.
pub struct SleepPacer {
    start: Instant,
}

impl SleepPacer {
    pub fn new() -> Self {
        SleepPacer {
            start: Instant::now(),
        }
    }
}

impl Default for SleepPacer {
    fn default() -> Self {
        Self::new()
    }
}

impl Pacer for SleepPacer {
    fn pace(&mut self, virtual_time_us: u64) {
        let target = self.start + Duration::from_micros(virtual_time_us);
        let now = Instant::now();
        if target > now {
            std::thread::sleep(target - now);
        }
    }
}

/// Approximate process CPU use since `from`, as a percentage of wall time.
/// Linux-only soft report; returns None where /proc is unavailable.
pub fn cpu_usage_pct(wall: Duration) -> Option<f64> {
    let stat = std::fs::read_to_string("/proc/self/stat").ok()?;
    // fields 14/15 are utime/stime in clock ticks; USER_HZ is 100 on Linux
    let after_comm = stat.rsplit(')').next()?;
    let fields: Vec<&str> = after_comm.split_ascii_whitespace().collect();
    let utime: f64 = fields.get(11)?.parse().ok()?;
    let stime: f64 = fields.get(12)?.parse().ok()?;
    let cpu_seconds = (utime + stime) / 100.0;
    if wall.as_secs_f64() == 0.0 {
        return None;
    }
    Some(100.0 * cpu_seconds / wall.as_secs_f64())
}
