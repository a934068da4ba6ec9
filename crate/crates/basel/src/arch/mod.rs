//! Runtime object model: packets, queues, ports and shared buffers, with
//! comparator-ordered views and push-out admission.

mod view;
mod world;

pub use world::{AdmissionOutcome, BufferState, PortState, QueueState, World};

/// The unit of traffic. All fields except `processing` are fixed at arrival;
/// `processing` counts remaining work and only ever decreases once admitted.
/// `seq` is assigned by the trace in arrival order and is unique per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub seq: u64,
    /// Size in bytes.
    pub size: i64,
    /// Application-defined worth; throughput counts sum to it.
    pub value: i64,
    /// Remaining processing cycles.
    pub processing: i64,
    /// Arrival slot.
    pub arrival: i64,
    /// Latest transmit offset from arrival; `None` is unconstrained.
    pub slack: Option<i64>,
    /// Index of the destination queue.
    pub queue: usize,
}

impl Packet {
    /// Common case for throughput experiments: unit size and value.
    pub fn unit(seq: u64, arrival: i64, processing: i64, queue: usize) -> Packet {
        Packet {
            seq,
            size: 1,
            value: 1,
            processing,
            arrival,
            slack: None,
            queue,
        }
    }

    /// Numeric view of slack for expressions; unconstrained reads as i64::MAX.
    pub fn slack_value(&self) -> i64 {
        self.slack.unwrap_or(i64::MAX)
    }
}

/// Why a packet left the system without being transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    /// A stored packet evicted to make room during admission.
    PushOut,
    /// The arriving packet itself was the best eviction candidate.
    SelfRejected,
    /// Stored past its slack bound and expired at a slot boundary.
    SlackExpired,
}

/// Mutation signals produced by actions, for logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightProp {
    Adm,
    Sched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    Weight {
        queue: usize,
        prop: WeightProp,
        delta: i64,
    },
    Mark,
    Notify,
}
