//! Virtual time: a cycle clock and the latency function.
//!
//! Latency is a deterministic function of (parameters, microarchitectural
//! outcome) and nothing else. The parameters carry no claim of realism;
//! they are scenario configuration, and every expected value in the test
//! suite is derived from them.

use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub type Cycles = u64;

/// Latency parameters, in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeModelParams {
    pub l1_hit: Cycles,
    pub llc_hit: Cycles,
    pub mem: Cycles,
    pub predict_ok: Cycles,
    pub mispredict: Cycles,
    pub tlb_miss_penalty: Cycles,
    pub flush_base: Cycles,
    pub writeback_per_line: Cycles,
    pub kernel_entry: Cycles,
    pub kernel_exit: Cycles,
}

impl Default for TimeModelParams {
    fn default() -> Self {
        TimeModelParams {
            l1_hit: 1,
            llc_hit: 12,
            mem: 100,
            predict_ok: 1,
            mispredict: 15,
            tlb_miss_penalty: 30,
            flush_base: 20,
            writeback_per_line: 10,
            kernel_entry: 50,
            kernel_exit: 50,
        }
    }
}

impl TimeModelParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.l1_hit > self.llc_hit || self.llc_hit > self.mem {
            return Err(SimError::Validation(format!(
                "latency ordering violated: l1_hit={} llc_hit={} mem={}",
                self.l1_hit, self.llc_hit, self.mem
            )));
        }
        Ok(())
    }
}

/// Deepest level that had to service a data or instruction access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitLevel {
    L1,
    Llc,
    Mem,
}

/// Latency of a single memory access: the flat cost of the level that hit,
/// plus the translation penalty if the TLB missed.
pub fn access_latency(p: &TimeModelParams, level: HitLevel, tlb_miss: bool) -> Cycles {
    let base = match level {
        HitLevel::L1 => p.l1_hit,
        HitLevel::Llc => p.llc_hit,
        HitLevel::Mem => p.mem,
    };
    base + if tlb_miss { p.tlb_miss_penalty } else { 0 }
}

/// Latency of invalidating the flushable state. Affine in the number of
/// dirty lines written back; with padding disabled this is the carrier of
/// the flush-latency channel.
pub fn flush_latency(p: &TimeModelParams, dirty_lines: usize) -> Cycles {
    p.flush_base + dirty_lines as Cycles * p.writeback_per_line
}

/// The virtual cycle counter. Never decreases during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Clock {
    now: Cycles,
}

impl Clock {
    pub fn new() -> Self {
        Clock::default()
    }

    pub fn now(&self) -> Cycles {
        self.now
    }

    pub fn advance(&mut self, d: Cycles) {
        self.now += d;
    }

    /// Jump forward to an absolute time. `t` must not be in the past.
    pub fn advance_to(&mut self, t: Cycles) {
        debug_assert!(t >= self.now, "clock would go backwards: {} -> {t}", self.now);
        self.now = t;
    }
}
