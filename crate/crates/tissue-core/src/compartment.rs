//! The tissue compartment: bounded antigen store plus signal channels.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

/// Lifecycle of one antigen copy. Transitions only move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AntigenState {
    InCompartment,
    Ingested,
    Presented,
    Destroyed,
}

/// One stored copy of an injected syscall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Antigen {
    pub value: u32,
    pub injected_at: u64,
    pub state: AntigenState,
}

impl Antigen {
    pub fn new(value: u32, injected_at: u64) -> Self {
        Antigen {
            value,
            injected_at,
            state: AntigenState::InCompartment,
        }
    }

    /// Moves the copy forward in its lifecycle.
    pub fn advance(&mut self, to: AntigenState) {
        debug_assert!(to >= self.state, "antigen state may only move forward");
        self.state = to;
    }
}

/// A scalar context stream (e.g. CPU usage fraction) written by the replay
/// client and read by cytokine receptors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalChannel {
    pub channel_id: u8,
    pub current_value: f64,
    pub previous_value: f64,
    pub updated_at: u64,
}

impl SignalChannel {
    fn new(channel_id: u8) -> Self {
        SignalChannel {
            channel_id,
            current_value: 0.0,
            previous_value: 0.0,
            updated_at: 0,
        }
    }
}

/// Result of one injection call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InjectOutcome {
    /// Copies appended to the store.
    pub stored: u32,
    /// Oldest copies silently destroyed to make room.
    pub evicted: u32,
}

/// Bounded antigen store and signal channels. Cells live next to the
/// compartment in the engine so that their cycle callbacks can borrow both.
#[derive(Debug, Clone)]
pub struct Compartment {
    store: VecDeque<Antigen>,
    max_antigen: usize,
    signals: Vec<SignalChannel>,
    pub tick_count: u64,
    pub clock_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownChannel(pub u8);

impl Compartment {
    pub fn new(max_antigen: u32, num_channels: usize) -> Self {
        Compartment {
            store: VecDeque::new(),
            max_antigen: max_antigen as usize,
            signals: (0..num_channels).map(|i| SignalChannel::new(i as u8)).collect(),
            tick_count: 0,
            clock_us: 0,
        }
    }

    /// Appends `copies` copies of `value`, evicting the oldest stored copies
    /// when the capacity would be exceeded. Eviction is silent; the caller
    /// accounts for it via the returned outcome.
    pub fn inject(&mut self, value: u32, at: u64, copies: u32) -> InjectOutcome {
        let mut out = InjectOutcome::default();
        if self.max_antigen == 0 {
            return out;
        }
        for _ in 0..copies {
            if self.store.len() == self.max_antigen {
                if let Some(mut old) = self.store.pop_front() {
                    old.advance(AntigenState::Destroyed);
                    out.evicted += 1;
                }
            }
            self.store.push_back(Antigen::new(value, at));
            out.stored += 1;
        }
        out
    }

    pub fn set_signal(&mut self, channel: u8, value: f64, at: u64) -> Result<(), UnknownChannel> {
        let slot = self
            .signals
            .get_mut(channel as usize)
            .ok_or(UnknownChannel(channel))?;
        slot.previous_value = slot.current_value;
        slot.current_value = value;
        slot.updated_at = at;
        Ok(())
    }

    pub fn signal(&self, channel: u8) -> Option<&SignalChannel> {
        self.signals.get(channel as usize)
    }

    pub fn antigen_count(&self) -> usize {
        self.store.len()
    }

    pub fn store(&self) -> &VecDeque<Antigen> {
        &self.store
    }

    /// Removes the copy at `index`. Used by ingestion, which samples indices
    /// and removes them back-to-front so earlier indices stay valid.
    pub(crate) fn take_at(&mut self, index: usize) -> Antigen {
        self.store.remove(index).expect("sampled index in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inject_stores_multiplier_copies() {
        let mut c = Compartment::new(1000, 2);
        let out = c.inject(6, 0, 10);
        assert_eq!(out, InjectOutcome { stored: 10, evicted: 0 });
        assert_eq!(c.antigen_count(), 10);
        assert!(c.store().iter().all(|a| a.value == 6 && a.state == AntigenState::InCompartment));
    }

    #[test]
    fn full_store_evicts_oldest() {
        let mut c = Compartment::new(3, 2);
        c.inject(1, 0, 1);
        c.inject(2, 1, 1);
        c.inject(3, 2, 1);
        let out = c.inject(4, 3, 1);
        assert_eq!(out, InjectOutcome { stored: 1, evicted: 1 });
        assert_eq!(c.antigen_count(), 3);
        let values: Vec<u32> = c.store().iter().map(|a| a.value).collect();
        assert_eq!(values, alloc::vec![2, 3, 4]);
    }

    #[test]
    fn zero_capacity_stores_nothing() {
        let mut c = Compartment::new(0, 2);
        let out = c.inject(6, 0, 10);
        assert_eq!(out, InjectOutcome::default());
        assert_eq!(c.antigen_count(), 0);
    }

    #[test]
    fn set_signal_shifts_previous() {
        let mut c = Compartment::new(10, 2);
        c.set_signal(0, 0.5, 100).unwrap();
        assert_eq!(c.signal(0).unwrap().current_value, 0.5);
        c.set_signal(0, 0.2, 200).unwrap();
        let s = c.signal(0).unwrap();
        assert_eq!(s.previous_value, 0.5);
        assert_eq!(s.current_value, 0.2);
        assert_eq!(s.updated_at, 200);
    }

    #[test]
    fn unknown_channel_is_rejected() {
        let mut c = Compartment::new(10, 2);
        assert_eq!(c.set_signal(7, 0.1, 0), Err(UnknownChannel(7)));
    }
}
