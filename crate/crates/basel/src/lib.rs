//! Buffering architectures as data: a small specification language for
//! admission, processing and scheduling policies, a discrete-time simulator
//! that executes them, and an exhaustive offline-optimal oracle for measuring
//! how far an online policy is from the best possible throughput.
//!
//! A buffering architecture is declared in a `.basel` program as a handful of
//! comparators and predicates attached to queues, ports and shared buffers:
//!
//! ```text
//! srpt(p1,p2) = (p1.processing < p2.processing)
//! rsrpt(p1,p2) = (p1.processing > p2.processing)
//! defCongestion() = lambda q, (q.currSize >= q.size)
//! q1 = Queue(B)
//! out = Port(q1)
//! q1.procPrio = srpt
//! q1.admPrio = rsrpt
//! q1.congestion = defCongestion(q1)
//! ```
//!
//! The crate is organised around that pipeline:
//!
//! - [`dsl`] lexes, parses, validates and pretty-prints programs;
//! - [`arch`] is the runtime object model (packets, queues, ports, buffers)
//!   with comparator-ordered priority views and push-out admission;
//! - [`engine`] runs a program against a trace slot by slot and accumulates
//!   [`engine::Metrics`];
//! - [`traffic`] generates deterministic ON-OFF modulated Poisson traces and
//!   reads/writes the trace CSV format;
//! - [`oracle`] computes exact offline-optimal throughput on small instances
//!   and competitive ratios;
//! - [`experiment`] sweeps parameters, runs simulator plus oracle per point,
//!   and writes reproducible CSV result tables.
//!
//! Every runnable capability has a corresponding example under `examples/`;
//! the `basel` binary wraps [`experiment`] for batch use.

pub mod arch;
pub mod diag;
pub mod dsl;
pub mod engine;
pub mod eval;
pub mod experiment;
pub mod oracle;
pub mod traffic;

pub use arch::{AdmissionOutcome, DropCause, Packet, World};
pub use diag::Diagnostic;
pub use dsl::ArchSpec;
pub use engine::{Metrics, SimConfig};
pub use oracle::{OracleBounds, OracleShape, RatioReport};
pub use traffic::{MmppParams, Trace};
