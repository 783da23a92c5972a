//! Timestamped event traces. A run produces one [`Trace`]; the observer's
//! projection of it is the object compared by the noninterference check.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::SimError;
use crate::timemodel::Cycles;

/// Index of a security domain within a machine.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct DomainId(pub usize);

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum EventKind {
    /// A user instruction completed; `latency` is its total duration.
    InstructionRetired { latency: Cycles },
    /// An OBSERVE instruction: the program read its clock and noted the
    /// latency of its most recent timed operation.
    Observe { label: String, value: Cycles },
    /// An interrupt was delivered; attributed to the owning domain.
    IrqDelivered { irq: u32 },
    SwitchBegin { to: DomainId },
    SwitchEnd { to: DomainId },
    SyscallEnter,
    SyscallExit { duration: Cycles },
}

/// One trace record. Serializes as a flat JSON object with fixed fields
/// `time`, `domain`, `kind`, `detail`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub time: Cycles,
    pub domain: DomainId,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Append-only event sequence with non-decreasing timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<Event>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn push(&mut self, event: Event) {
        if let Some(last) = self.events.last() {
            debug_assert!(
                event.time >= last.time,
                "trace time went backwards: {} -> {}",
                last.time,
                event.time
            );
        }
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    /// Write the trace as JSON lines, one event per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), SimError> {
        for ev in &self.events {
            let line = serde_json::to_string(ev)
                .map_err(|e| SimError::Io(std::io::Error::other(e)))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}
