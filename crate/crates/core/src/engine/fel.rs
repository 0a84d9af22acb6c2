use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaffingDirective {
    /// Switch to a fixed desk count.
    Set(u32),
    /// Re-evaluate the congestion policy.
    Review,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    FlightArrival { flight: usize },
    PassengerQueueArrival { passenger: usize },
    ServiceCompletion { desk: usize, passenger: usize },
    StaffingChange(StaffingDirective),
}

/// A scheduled event. `sequence` is assigned by the list at insertion and
/// orders events that share a timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventNotice {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
}

struct Entry(EventNotice);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.time.total_cmp(&other.0.time).then(self.0.sequence.cmp(&other.0.sequence))
    }
}

/// Future event list: a min-heap on `(time, sequence)`.
pub struct FutureEventList {
    heap: BinaryHeap<Reverse<Entry>>,
    next_sequence: u64,
    clock: f64,
    /// Pending events other than staffing changes.
    pending_flow: usize,
}

impl Default for FutureEventList {
    fn default() -> Self {
        Self::new(f64::NEG_INFINITY)
    }
}

impl FutureEventList {
    pub fn new(start: f64) -> Self {
        FutureEventList { heap: BinaryHeap::new(), next_sequence: 0, clock: start, pending_flow: 0 }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Inserts an event; scheduling before the current clock is a causality error.
    pub fn schedule(&mut self, time: f64, kind: EventKind) -> Result<u64, EngineError> {
        if time.is_nan() || time < self.clock {
            return Err(EngineError::Causality { time, clock: self.clock });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        if !matches!(kind, EventKind::StaffingChange(_)) {
            self.pending_flow += 1;
        }
        self.heap.push(Reverse(Entry(EventNotice { time, sequence, kind })));
        Ok(sequence)
    }

    pub fn peek(&self) -> Option<&EventNotice> {
        self.heap.peek().map(|Reverse(Entry(n))| n)
    }

    /// Removes the earliest event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<EventNotice> {
        let Reverse(Entry(n)) = self.heap.pop()?;
        self.clock = n.time;
        if !matches!(n.kind, EventKind::StaffingChange(_)) {
            self.pending_flow -= 1;
        }
        Some(n)
    }

    /// Whether any flight, queue-arrival or service-completion event is pending.
    pub fn has_pending_flow(&self) -> bool {
        self.pending_flow > 0
    }
}
