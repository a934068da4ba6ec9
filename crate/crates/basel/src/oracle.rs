//! Offline-optimal throughput on small instances, and competitive-ratio
//! reporting against it.
//!
//! The optimal adversary here is the strongest offline algorithm consistent
//! with buffer capacity and the engine's slot structure: it sees the whole
//! trace, may drop any packet at arrival, may process any stored packet of
//! any non-empty queue each cycle, and runs at speedup 1. It does not push
//! out already-admitted packets — with full lookahead, admitting only what
//! it will complete is never worse.
//!
//! The search walks slots depth-first, branching over admission subsets and
//! the per-cycle processing choice, memoizing on the canonical state: the
//! sorted multiset of remaining processing per queue plus the slot index.
//! Instances outside [`OracleBounds`] are refused outright rather than
//! truncated.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::dsl::ArchSpec;
use crate::dsl::ast::ObjectKind;
use crate::dsl::validate::const_eval;
use crate::engine::{self, SimConfig, SimError};
use crate::traffic::Trace;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleBounds {
    pub max_packets: usize,
    pub max_processing: i64,
    pub max_capacity: i64,
    pub max_slots: i64,
    /// Hard cap on search nodes; exceeding it aborts with a refusal.
    pub node_budget: u64,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_packets: 24,
            max_processing: 8,
            max_capacity: 8,
            max_slots: 64,
            node_budget: 20_000_000,
        }
    }
}

/// The architecture shapes the exhaustive search understands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleShape {
    SingleQueue { capacity: i64 },
    /// One port serving per-class queues, each with its own capacity.
    MultiQueue { capacities: Vec<i64> },
}

impl OracleShape {
    pub fn capacities(&self) -> Vec<i64> {
        match self {
            OracleShape::SingleQueue { capacity } => vec![*capacity],
            OracleShape::MultiQueue { capacities } => capacities.clone(),
        }
    }

    /// Extract the shape from a program: a single port over unbuffered
    /// queues. Shared buffers are outside the oracle's scope.
    pub fn from_spec(
        spec: &ArchSpec,
        consts: &BTreeMap<String, i64>,
    ) -> Result<OracleShape, OracleError> {
        let all = spec.resolved_constants(consts);
        let ports: Vec<_> = spec
            .declarations
            .iter()
            .filter(|d| d.kind == ObjectKind::Port)
            .collect();
        if ports.len() != 1 {
            return Err(OracleError::Unsupported(format!(
                "oracle needs exactly one port, found {}",
                ports.len()
            )));
        }
        if spec
            .declarations
            .iter()
            .any(|d| d.kind == ObjectKind::Buffer)
        {
            return Err(OracleError::Unsupported(
                "oracle does not model shared buffers".to_string(),
            ));
        }
        let mut capacities = Vec::new();
        for member in &ports[0].members {
            let decl = spec
                .declaration(member)
                .expect("validated member is declared");
            let capacity = const_eval(decl.capacity.as_ref().unwrap(), &all)
                .map_err(OracleError::Unsupported)?;
            capacities.push(capacity);
        }
        Ok(match capacities.len() {
            1 => OracleShape::SingleQueue {
                capacity: capacities[0],
            },
            _ => OracleShape::MultiQueue { capacities },
        })
    }
}

#[derive(Debug)]
pub enum OracleError {
    /// Instance exceeds the configured exhaustive-search bounds.
    OutOfBounds(String),
    /// Instance shape the oracle does not model (heterogeneous value or
    /// size, finite slack, shared buffers).
    Unsupported(String),
    Sim(SimError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::OutOfBounds(msg) => write!(f, "instance out of oracle bounds: {}", msg),
            OracleError::Unsupported(msg) => write!(f, "unsupported instance: {}", msg),
            OracleError::Sim(e) => write!(f, "reference policy run failed: {}", e),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<SimError> for OracleError {
    fn from(e: SimError) -> Self {
        OracleError::Sim(e)
    }
}

/// Exact maximum number of packets an offline algorithm can transmit within
/// `slots`, over all admission and processing decisions.
pub fn brute_force_opt(
    shape: &OracleShape,
    trace: &Trace,
    slots: i64,
    bounds: &OracleBounds,
) -> Result<i64, OracleError> {
    search(shape, trace, slots, bounds, true)
}

/// As [`brute_force_opt`] but without the memo table; exists so tests can
/// confirm memoization never changes a result.
pub fn brute_force_opt_unmemoized(
    shape: &OracleShape,
    trace: &Trace,
    slots: i64,
    bounds: &OracleBounds,
) -> Result<i64, OracleError> {
    search(shape, trace, slots, bounds, false)
}

fn search(
    shape: &OracleShape,
    trace: &Trace,
    slots: i64,
    bounds: &OracleBounds,
    memoize: bool,
) -> Result<i64, OracleError> {
    let capacities = shape.capacities();
    let relevant: Vec<&crate::arch::Packet> = trace
        .packets
        .iter()
        .filter(|p| p.arrival < slots)
        .collect();

    for p in &relevant {
        if p.size != 1 || p.value != 1 {
            return Err(OracleError::Unsupported(format!(
                "packet {} is not unit size/value",
                p.seq
            )));
        }
        if p.slack.is_some() {
            return Err(OracleError::Unsupported(format!(
                "packet {} carries a slack bound",
                p.seq
            )));
        }
        if p.queue >= capacities.len() {
            return Err(OracleError::Unsupported(format!(
                "packet {} targets queue {} outside the shape",
                p.seq, p.queue
            )));
        }
    }
    if relevant.len() > bounds.max_packets {
        return Err(OracleError::OutOfBounds(format!(
            "{} packets exceed max {}",
            relevant.len(),
            bounds.max_packets
        )));
    }
    if slots > bounds.max_slots {
        return Err(OracleError::OutOfBounds(format!(
            "{} slots exceed max {}",
            slots, bounds.max_slots
        )));
    }
    if let Some(p) = relevant
        .iter()
        .find(|p| p.processing > bounds.max_processing)
    {
        return Err(OracleError::OutOfBounds(format!(
            "packet {} needs {} cycles, max {}",
            p.seq, p.processing, bounds.max_processing
        )));
    }
    if let Some(&capacity) = capacities.iter().find(|&&c| c > bounds.max_capacity) {
        return Err(OracleError::OutOfBounds(format!(
            "queue capacity {} exceeds max {}",
            capacity, bounds.max_capacity
        )));
    }

    let mut by_slot: Vec<Vec<(usize, i64)>> = vec![Vec::new(); slots.max(0) as usize];
    for p in &relevant {
        by_slot[p.arrival as usize].push((p.queue, p.processing));
    }

    let mut ctx = Search {
        capacities,
        by_slot,
        slots,
        memo: HashMap::new(),
        memoize,
        nodes: 0,
        node_budget: bounds.node_budget,
    };
    let state = vec![Vec::new(); ctx.capacities.len()];
    ctx.best(0, state)
        .map_err(|_| OracleError::OutOfBounds("node budget exhausted".to_string()))
}

struct Search {
    capacities: Vec<i64>,
    by_slot: Vec<Vec<(usize, i64)>>,
    slots: i64,
    memo: HashMap<(i64, Vec<Vec<i64>>), i64>,
    memoize: bool,
    nodes: u64,
    node_budget: u64,
}

struct BudgetExhausted;

impl Search {
    fn best(&mut self, t: i64, state: Vec<Vec<i64>>) -> Result<i64, BudgetExhausted> {
        if t >= self.slots {
            return Ok(0);
        }
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(BudgetExhausted);
        }
        let key = (t, state.clone());
        if self.memoize {
            if let Some(&v) = self.memo.get(&key) {
                return Ok(v);
            }
        }

        let arrivals = self.by_slot[t as usize].clone();
        let mut best = 0i64;
        // Every admission subset, encoded as a bitmask over this slot's
        // arrivals; capacity-violating masks are skipped.
        for mask in 0u32..(1u32 << arrivals.len()) {
            let mut with_arrivals = state.clone();
            let mut feasible = true;
            for (i, (queue, processing)) in arrivals.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    if (with_arrivals[*queue].len() as i64) < self.capacities[*queue] {
                        let pos = with_arrivals[*queue]
                            .binary_search(processing)
                            .unwrap_or_else(|e| e);
                        with_arrivals[*queue].insert(pos, *processing);
                    } else {
                        feasible = false;
                        break;
                    }
                }
            }
            if !feasible {
                continue;
            }

            if with_arrivals.iter().all(|q| q.is_empty()) {
                best = best.max(self.best(t + 1, with_arrivals)?);
                continue;
            }
            // one processing cycle: each distinct (queue, remaining) choice
            for q in 0..with_arrivals.len() {
                let mut last = None;
                for idx in 0..with_arrivals[q].len() {
                    let remaining = with_arrivals[q][idx];
                    if last == Some(remaining) {
                        continue;
                    }
                    last = Some(remaining);
                    let mut next = with_arrivals.clone();
                    next[q].remove(idx);
                    let transmitted = if remaining == 1 {
                        1
                    } else {
                        let pos = next[q]
                            .binary_search(&(remaining - 1))
                            .unwrap_or_else(|e| e);
                        next[q].insert(pos, remaining - 1);
                        0
                    };
                    best = best.max(transmitted + self.best(t + 1, next)?);
                }
            }
        }

        if self.memoize {
            self.memo.insert(key, best);
        }
        Ok(best)
    }
}

/// Transmitted count of the push-out policy that admits by largest remaining
/// work and processes by smallest, run through the simulator at speedup 1.
/// On single-queue unit instances this policy is throughput-optimal, which
/// makes it a cheap stand-in for [`brute_force_opt`] beyond search bounds.
pub fn reference_optimal_value(
    trace: &Trace,
    capacity: i64,
    slots: i64,
) -> Result<i64, SimError> {
    let spec = ArchSpec::parse(REFERENCE_POLICY).expect("reference policy parses");
    let mut cfg = SimConfig::new(slots, 1);
    cfg.constants.insert("B".to_string(), capacity);
    let metrics = engine::run(&spec, trace, &cfg)?;
    Ok(metrics.transmitted_value)
}

/// Single-queue push-out architecture: admit victims by largest remaining
/// work, process shortest-first.
pub const REFERENCE_POLICY: &str = "\
srpt(p1,p2) = (p1.processing < p2.processing)
rsrpt(p1,p2) = (p1.processing > p2.processing)
defCongestion() = lambda q, (q.currSize >= q.size)
q1 = Queue(B)
out = Port(q1)
q1.procPrio = srpt
q1.admPrio = rsrpt
q1.congestion = defCongestion(q1)
";

/// Competitive-ratio record for one (instance, policy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub opt_value: i64,
    pub alg_value: i64,
    pub ratio: f64,
}

impl RatioReport {
    pub fn csv_fields(&self) -> String {
        format!("{},{},{:.6}", self.opt_value, self.alg_value, self.ratio)
    }

    pub fn csv_header() -> &'static str {
        "optValue,algValue,ratio"
    }
}

/// OPT over ALG. A vacuous instance (both zero) reports 1; a zero ALG on a
/// non-vacuous instance reports infinity. Values below 1 are legitimate: an
/// online algorithm with speedup can beat the speedup-1 optimum.
pub fn competitive_ratio(opt_value: i64, alg_value: i64) -> RatioReport {
    let ratio = if opt_value == 0 && alg_value == 0 {
        1.0
    } else if alg_value == 0 {
        f64::INFINITY
    } else {
        opt_value as f64 / alg_value as f64
    };
    RatioReport {
        opt_value,
        alg_value,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::rng::SplitMix64;

    fn single(capacity: i64) -> OracleShape {
        OracleShape::SingleQueue { capacity }
    }

    #[test]
    fn empty_trace_has_zero_opt() {
        let trace = Trace::new(vec![]).unwrap();
        let opt = brute_force_opt(&single(2), &trace, 5, &OracleBounds::default()).unwrap();
        assert_eq!(opt, 0);
    }

    #[test]
    fn uncontended_unit_work_all_transmits() {
        // one 1-cycle packet per slot never exceeds capacity: OPT = count
        let trace = Trace::from_unit_arrivals((0..6).map(|t| (t, 1, 0))).unwrap();
        let opt = brute_force_opt(&single(2), &trace, 6, &OracleBounds::default()).unwrap();
        assert_eq!(opt, 6);
    }

    #[test]
    fn capacity_one_forces_a_choice() {
        // arrivals: 2 cycles at t=0, 1 cycle at t=1, horizon 3, capacity 1.
        // The arrival at t=1 finds the buffer holding the half-done first
        // packet, so one of the two must be forfeited: OPT = 1.
        let trace = Trace::from_unit_arrivals([(0, 2, 0), (1, 1, 0)]).unwrap();
        let opt = brute_force_opt(&single(1), &trace, 3, &OracleBounds::default()).unwrap();
        assert_eq!(opt, 1);
        // with capacity 2 both fit and both finish
        let opt2 = brute_force_opt(&single(2), &trace, 3, &OracleBounds::default()).unwrap();
        assert_eq!(opt2, 2);
    }

    #[test]
    fn oracle_prefers_short_work_under_pressure() {
        // four 1-cycle packets at t=0 with capacity 2: admit two, finish
        // them, nothing else ever arrives: OPT = 2
        let trace = Trace::from_unit_arrivals([(0, 1, 0), (0, 1, 0), (0, 1, 0), (0, 1, 0)])
            .unwrap();
        let opt = brute_force_opt(&single(2), &trace, 4, &OracleBounds::default()).unwrap();
        assert_eq!(opt, 2);
    }

    #[test]
    fn multi_queue_schedules_across_queues() {
        // two queues, one packet each, two slots: both complete
        let trace = Trace::from_unit_arrivals([(0, 1, 0), (0, 1, 1)]).unwrap();
        let shape = OracleShape::MultiQueue {
            capacities: vec![1, 1],
        };
        let opt = brute_force_opt(&shape, &trace, 2, &OracleBounds::default()).unwrap();
        assert_eq!(opt, 2);
    }

    #[test]
    fn refusal_is_explicit_when_out_of_bounds() {
        let trace = Trace::from_unit_arrivals((0..30).map(|t| (t, 1, 0))).unwrap();
        let err = brute_force_opt(&single(2), &trace, 40, &OracleBounds::default()).unwrap_err();
        assert!(matches!(err, OracleError::OutOfBounds(_)));
    }

    #[test]
    fn heterogeneous_values_are_unsupported() {
        let mut packets = vec![crate::arch::Packet::unit(0, 0, 1, 0)];
        packets[0].value = 3;
        let trace = Trace::new(packets).unwrap();
        let err = brute_force_opt(&single(2), &trace, 2, &OracleBounds::default()).unwrap_err();
        assert!(matches!(err, OracleError::Unsupported(_)));
    }

    #[test]
    fn memoization_never_changes_results() {
        let mut rng = SplitMix64::new(404);
        let bounds = OracleBounds::default();
        for _ in 0..25 {
            let n = 2 + (rng.below(4) as usize);
            let arrivals: Vec<(i64, i64, usize)> = (0..n)
                .map(|_| ((rng.below(4)) as i64, 1 + (rng.below(3)) as i64, 0))
                .collect();
            let mut sorted = arrivals.clone();
            sorted.sort();
            let trace = Trace::from_unit_arrivals(sorted).unwrap();
            let slots = 10;
            let with = brute_force_opt(&single(2), &trace, slots, &bounds).unwrap();
            let without =
                brute_force_opt_unmemoized(&single(2), &trace, slots, &bounds).unwrap();
            assert_eq!(with, without);
        }
    }

    #[test]
    fn reference_policy_matches_brute_force_on_small_instances() {
        let mut rng = SplitMix64::new(2024);
        let bounds = OracleBounds::default();
        for _ in 0..50 {
            let n = 1 + (rng.below(6) as usize);
            let mut arrivals: Vec<(i64, i64, usize)> = (0..n)
                .map(|_| ((rng.below(5)) as i64, 1 + (rng.below(3)) as i64, 0))
                .collect();
            arrivals.sort();
            let trace = Trace::from_unit_arrivals(arrivals).unwrap();
            let slots = 5 + 3 * 6;
            let opt = brute_force_opt(&single(2), &trace, slots, &bounds).unwrap();
            let reference = reference_optimal_value(&trace, 2, slots).unwrap();
            assert_eq!(opt, reference, "trace {:?}", trace.packets);
        }
    }

    #[test]
    fn oracle_dominates_every_policy_it_meets() {
        use crate::engine::{run, SimConfig};
        let policies = [
            ("fifo", "fifo(p1,p2) = (p1.arrival < p2.arrival)\nq1 = Queue(B)\nout = Port(q1)\nq1.procPrio = fifo"),
            ("fifo-dropfront", "fifo(p1,p2) = (p1.arrival < p2.arrival)\nq1 = Queue(B)\nout = Port(q1)\nq1.procPrio = fifo\nq1.admPrio = fifo"),
            ("srpt", "srpt(p1,p2) = (p1.processing < p2.processing)\nq1 = Queue(B)\nout = Port(q1)\nq1.procPrio = srpt"),
            ("reference", REFERENCE_POLICY),
        ];
        let mut rng = SplitMix64::new(77);
        let bounds = OracleBounds::default();
        for round in 0..30 {
            let n = 1 + (rng.below(6) as usize);
            let mut arrivals: Vec<(i64, i64, usize)> = (0..n)
                .map(|_| ((rng.below(5)) as i64, 1 + (rng.below(3)) as i64, 0))
                .collect();
            arrivals.sort();
            let trace = Trace::from_unit_arrivals(arrivals).unwrap();
            let slots = 24;
            let opt = brute_force_opt(&single(2), &trace, slots, &bounds).unwrap();
            for (name, src) in &policies {
                let spec = ArchSpec::parse(src).unwrap();
                let cfg = SimConfig::new(slots, 1).with_consts(&[("B", 2)]);
                let m = run(&spec, &trace, &cfg).unwrap();
                assert!(
                    opt >= m.transmitted_value,
                    "round {}: policy {} beat the oracle: {} > {}",
                    round,
                    name,
                    m.transmitted_value,
                    opt
                );
            }
        }
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(competitive_ratio(10, 5).ratio, 2.0);
        assert_eq!(competitive_ratio(0, 0).ratio, 1.0);
        assert_eq!(competitive_ratio(7, 7).ratio, 1.0);
        assert!(competitive_ratio(3, 0).ratio.is_infinite());
        assert!(competitive_ratio(3, 6).ratio < 1.0);
    }

    #[test]
    fn shape_extraction_from_program() {
        let spec = ArchSpec::parse(
            "q1 = Queue(B/k)\nq2 = Queue(B/k)\nq3 = Queue(B/k)\nout = Port(q1, q2, q3)",
        )
        .unwrap();
        let consts: BTreeMap<String, i64> =
            [("B".to_string(), 6i64), ("k".to_string(), 3i64)].into();
        let shape = OracleShape::from_spec(&spec, &consts).unwrap();
        assert_eq!(
            shape,
            OracleShape::MultiQueue {
                capacities: vec![2, 2, 2]
            }
        );

        let buffered = ArchSpec::parse("q1 = Queue(4)\nout = Port(q1)\nb = Buffer(4, q1)").unwrap();
        assert!(OracleShape::from_spec(&buffered, &BTreeMap::new()).is_err());
    }
}
