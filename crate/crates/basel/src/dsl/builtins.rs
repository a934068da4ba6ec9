//! Catalog of the builtin comparators, predicates and actions.
//!
//! Programs are self-contained and define what they use, so nothing here is
//! injected implicitly. The catalog serves three purposes: `--list-builtins`
//! prints it, [`super::super::experiment`] templates splice these sources
//! into generated architectures, and the engine's default policies (arrival
//! order processing, latest-arrival push-out, `defCongestion`) are documented
//! against it.

use super::ast::{ActionDef, ArchSpec, ComparatorDef, PredicateDef};
use super::parser::parse_program;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    Comparator,
    Predicate,
    Action,
}

#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub kind: BuiltinKind,
    /// Definitional source, exactly as it parses.
    pub source: &'static str,
}

/// The builtin set. `lqd` orders queues so that the head of the
/// victim-selection order is the longest queue, which is what longest-queue
/// -drop means operationally; note this is `>` where a head-equals-served
/// reading would use `<`.
pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "fifo",
        kind: BuiltinKind::Comparator,
        source: "fifo(p1,p2) = (p1.arrival < p2.arrival)",
    },
    Builtin {
        name: "srpt",
        kind: BuiltinKind::Comparator,
        source: "srpt(p1,p2) = (p1.processing < p2.processing)",
    },
    Builtin {
        name: "rsrpt",
        kind: BuiltinKind::Comparator,
        source: "rsrpt(p1,p2) = (p1.processing > p2.processing)",
    },
    Builtin {
        name: "lqf",
        kind: BuiltinKind::Comparator,
        source: "lqf(q1,q2) = (q1.currSize > q2.currSize)",
    },
    Builtin {
        name: "sqf",
        kind: BuiltinKind::Comparator,
        source: "sqf(q1,q2) = (q1.currSize < q2.currSize)",
    },
    Builtin {
        name: "maxqf",
        kind: BuiltinKind::Comparator,
        source: "maxqf(q1,q2) = (q1.weightSched > q2.weightSched)",
    },
    Builtin {
        name: "minqf",
        kind: BuiltinKind::Comparator,
        source: "minqf(q1,q2) = (q1.weightSched < q2.weightSched)",
    },
    Builtin {
        name: "crr",
        kind: BuiltinKind::Comparator,
        source: "crr(q1,q2) = (q1.weightSched < q2.weightSched)",
    },
    Builtin {
        name: "crrPostSchedAct",
        kind: BuiltinKind::Action,
        source: "crrPostSchedAct() = lambda port, (port.getCurrQueue().weightSched += k)",
    },
    Builtin {
        name: "prr",
        kind: BuiltinKind::Comparator,
        source: "prr(q1,q2) = (q1.weightSched < q2.weightSched)",
    },
    Builtin {
        name: "prrPostSchedAct",
        kind: BuiltinKind::Action,
        source: "prrPostSchedAct() = lambda port, (let q = port.getCurrQueue() in \
                 if (q.getHOL().processing == 0) q.weightSched += k*k)",
    },
    Builtin {
        name: "lqd",
        kind: BuiltinKind::Comparator,
        source: "lqd(q1,q2) = (q1.currSize > q2.currSize)",
    },
    Builtin {
        name: "defCongestion",
        kind: BuiltinKind::Predicate,
        source: "defCongestion() = lambda q, (q.currSize >= q.size)",
    },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

/// Parse one builtin's definition on demand.
pub fn parse_builtin(builtin: &Builtin) -> ArchSpec {
    parse_program(builtin.source).expect("builtin sources always parse")
}

pub fn comparator_def(name: &str) -> Option<ComparatorDef> {
    let b = find(name)?;
    parse_builtin(b).comparators.remove(name)
}

pub fn predicate_def(name: &str) -> Option<PredicateDef> {
    let b = find(name)?;
    parse_builtin(b).predicates.remove(name)
}

pub fn action_def(name: &str) -> Option<ActionDef> {
    let b = find(name)?;
    parse_builtin(b).actions.remove(name)
}
