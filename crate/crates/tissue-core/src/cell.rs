//! The two cell types and their receptor/producer machinery.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::compartment::Antigen;

/// A presentation slot on a Type 1 cell. Holds one antigen for
/// `action_time` ticks, counted in `ticks_presented`.
#[derive(Debug, Clone)]
pub struct AntigenProducer {
    pub presented: Option<Antigen>,
    pub action_time: u32,
    pub ticks_presented: u32,
}

impl AntigenProducer {
    pub fn new(action_time: u32) -> Self {
        debug_assert!(action_time >= 1);
        AntigenProducer {
            presented: None,
            action_time,
            ticks_presented: 0,
        }
    }
}

/// Dendritic-cell analogue: ingests antigen from the compartment into a
/// bounded internal store and presents it on producers. When the cytokine
/// receptor is enabled, the presentation time tracks the compartment's CPU
/// signal via [`update_action_time`].
#[derive(Debug, Clone)]
pub struct Type1Cell {
    pub id: u32,
    pub iterations: u64,
    pub position: u64,
    pub internal_store: VecDeque<Antigen>,
    pub internal_capacity: u32,
    pub producers: Vec<AntigenProducer>,
    pub cytokine_receptor_enabled: bool,
    pub last_signal_seen: f64,
}

/// T-cell analogue: binds Type 1 cells each tick, matches presented antigen
/// against its VR locks, and freezes its repertoire after the first match.
#[derive(Debug, Clone)]
pub struct Type2Cell {
    pub id: u32,
    pub iterations: u64,
    pub position: u64,
    /// Current lock values, kept sorted (randomisation order is not
    /// observable; sorted locks make probe output canonical).
    pub vr_locks: Vec<u32>,
    /// Type 1 cell ids bound this tick. Re-formed every tick.
    pub bound_to: Vec<u32>,
    pub internal_cytokine: u64,
    pub matched_ever: bool,
}

/// Signal-driven presentation-time update. An increased signal resets the
/// action time, a decrease halves it (never below 1), no change keeps it.
pub fn update_action_time(
    previous_signal: f64,
    current_signal: f64,
    current: u32,
    reset_value: u32,
) -> u32 {
    debug_assert!(current >= 1 && reset_value >= 1);
    if current_signal > previous_signal {
        reset_value
    } else if current_signal < previous_signal {
        (current / 2).max(1)
    } else {
        current
    }
}

/// Exact matching between VR locks and presented antigen values. Every
/// presented value equal to at least one lock is returned, in presentation
/// order; duplicate presented values each count separately.
pub fn match_vr(vr_locks: &[u32], presented: &[u32]) -> Vec<u32> {
    presented
        .iter()
        .copied()
        .filter(|value| vr_locks.contains(value))
        .collect()
}
