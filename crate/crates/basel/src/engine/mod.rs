//! Discrete-time execution.
//!
//! Each slot runs four phases in order: slack expiry, arrivals (admission in
//! sequence order), `C` processing cycles per port in declaration order, and
//! queue-length sampling. A packet departs the instant its remaining
//! processing reaches zero, so with `C = 1` a one-cycle packet arriving into
//! an empty queue is transmitted within its arrival slot.
//!
//! Runs are pure functions of `(program, trace, config)`: identical inputs
//! produce identical [`Metrics`].

mod metrics;

pub use metrics::{Metrics, QueueLengthStats, SignalEvent, SignalKind};

use std::collections::BTreeMap;
use std::fmt;

use crate::arch::{Effect, Packet, World};
use crate::diag::{Diagnostic, EvalError};
use crate::dsl::ArchSpec;
use crate::traffic::Trace;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub slots: i64,
    /// Processing cycles per port per slot.
    pub speedup: i64,
    /// Constant overrides handed to the program (command-line `--const`).
    pub constants: BTreeMap<String, i64>,
    /// Echoed into metrics; the engine itself draws no randomness.
    pub seed: u64,
    /// Drop stored packets at slot start once their slack bound has passed.
    pub slack_enforced: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            slots: 0,
            speedup: 1,
            constants: BTreeMap::new(),
            seed: 0,
            slack_enforced: true,
        }
    }
}

impl SimConfig {
    pub fn new(slots: i64, speedup: i64) -> SimConfig {
        SimConfig {
            slots,
            speedup,
            ..SimConfig::default()
        }
    }

    pub fn with_consts(mut self, consts: &[(&str, i64)]) -> SimConfig {
        for (k, v) in consts {
            self.constants.insert(k.to_string(), *v);
        }
        self
    }
}

#[derive(Debug)]
pub enum SimError {
    /// The program failed validation or instantiation.
    Invalid(Vec<Diagnostic>),
    /// The trace does not fit the architecture or violates its invariants.
    Trace(String),
    /// An expression faulted; carries the slot it happened in.
    Eval { slot: i64, fault: EvalError },
    Config(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Invalid(diags) => {
                write!(f, "invalid program:")?;
                for d in diags {
                    write!(f, "\n  {}", d)?;
                }
                Ok(())
            }
            SimError::Trace(msg) => write!(f, "trace error: {}", msg),
            SimError::Eval { slot, fault } => write!(f, "slot {}: {}", slot, fault),
            SimError::Config(msg) => write!(f, "config error: {}", msg),
        }
    }
}

impl std::error::Error for SimError {}

/// Result of one processing cycle on a port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResult {
    pub queue: usize,
    pub transmitted: Option<Packet>,
    pub effects: Vec<Effect>,
}

/// One processing cycle: pick the best non-empty queue, serve its HOL packet
/// one cycle, then run the port's post-scheduling action. The action sees
/// the packet after the decrement — a completed packet is still at the head
/// with `processing == 0` — and only then is a completed packet removed.
/// Returns `None` on an idle cycle (every member queue empty).
pub fn process_cycle(world: &mut World, pid: usize) -> Result<Option<CycleResult>, EvalError> {
    let qid = match world.best_queue_opt(pid)? {
        Some(q) => q,
        None => {
            world.set_curr_queue(pid, None);
            return Ok(None);
        }
    };
    world.set_curr_queue(pid, Some(qid));
    let (seq, completed) = world.begin_hol_cycle(qid)?;
    let effects = world.run_post_sched(pid)?;
    let transmitted = if completed {
        Some(world.finish_hol_cycle(qid, seq))
    } else {
        None
    };
    Ok(Some(CycleResult {
        queue: qid,
        transmitted,
        effects,
    }))
}

/// Execute a validated program against a trace.
pub fn run(spec: &ArchSpec, trace: &Trace, cfg: &SimConfig) -> Result<Metrics, SimError> {
    if cfg.speedup < 1 {
        return Err(SimError::Config(format!(
            "speedup must be at least 1, got {}",
            cfg.speedup
        )));
    }
    if cfg.slots < 0 {
        return Err(SimError::Config("slots must be non-negative".to_string()));
    }
    let mut world = World::instantiate(spec, &cfg.constants).map_err(SimError::Invalid)?;
    for p in &trace.packets {
        if p.queue >= world.queue_count() {
            return Err(SimError::Trace(format!(
                "packet {} targets queue index {} but only {} queues are declared",
                p.seq,
                p.queue,
                world.queue_count()
            )));
        }
    }

    let mut metrics = Metrics::new(cfg.seed, cfg.slots, cfg.speedup, world.queue_names());
    let mut cursor = 0usize;
    let port_count = world.port_count();

    for slot in 0..cfg.slots {
        let fail = |fault: EvalError| SimError::Eval { slot, fault };

        // phase 1: slack expiry
        if cfg.slack_enforced {
            for qid in 0..world.queue_count() {
                let expired: Vec<u64> = world
                    .queue(qid)
                    .packets()
                    .filter(|p| p.slack.map(|s| p.arrival + s < slot).unwrap_or(false))
                    .map(|p| p.seq)
                    .collect();
                for seq in expired {
                    world.remove_stored(qid, seq);
                    metrics.drops_slack_expired += 1;
                }
            }
        }

        // phase 2: arrivals in sequence order
        while cursor < trace.packets.len() && trace.packets[cursor].arrival == slot {
            let p = trace.packets[cursor];
            cursor += 1;
            metrics.arrivals += 1;
            let queue_name = world.queue(p.queue).name.clone();
            let buffer_name = world.queue(p.queue).buffer.map(|b| world.buffer(b).name.clone());
            let outcome = world.admit(p).map_err(fail)?;
            metrics.drops_pushout += outcome.pushed_out.len() as u64;
            if !outcome.admitted {
                metrics.drops_self_rejected += 1;
            }
            let object = buffer_name.unwrap_or(queue_name);
            log_effects(&mut metrics, slot, &object, &outcome.effects);
        }

        // phase 3: C processing cycles per port, in declaration order
        for pid in 0..port_count {
            for _ in 0..cfg.speedup {
                match process_cycle(&mut world, pid).map_err(fail)? {
                    Some(cycle) => {
                        let port_name = world.port(pid).name.clone();
                        log_effects(&mut metrics, slot, &port_name, &cycle.effects);
                        if let Some(p) = cycle.transmitted {
                            metrics.record_transmit(&p, slot);
                        }
                    }
                    None => {
                        debug_assert!(world
                            .port(pid)
                            .members
                            .iter()
                            .all(|&q| world.queue(q).is_empty()));
                    }
                }
            }
        }

        // phase 4: sample queue lengths at slot end
        let lengths: Vec<i64> = (0..world.queue_count())
            .map(|q| world.queue(q).curr_size)
            .collect();
        metrics.sample_queue_lengths(&lengths);
    }

    metrics.stored_at_end = (0..world.queue_count())
        .map(|q| world.queue(q).packet_count() as u64)
        .sum();
    debug_assert!(metrics.conservation_holds());
    Ok(metrics)
}

fn log_effects(metrics: &mut Metrics, slot: i64, object: &str, effects: &[Effect]) {
    for e in effects {
        let signal = match e {
            Effect::Mark => SignalKind::Mark,
            Effect::Notify => SignalKind::Notify,
            Effect::Weight { .. } => continue,
        };
        metrics.events.push(SignalEvent {
            slot,
            object: object.to_string(),
            signal,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_QUEUE: &str = "\
        fifo(p1,p2) = (p1.arrival < p2.arrival)\n\
        srpt(p1,p2) = (p1.processing < p2.processing)\n\
        rsrpt(p1,p2) = (p1.processing > p2.processing)\n\
        defCongestion() = lambda q, (q.currSize >= q.size)\n\
        q1 = Queue(B)\n\
        out = Port(q1)\n\
        q1.procPrio = fifo\n\
        q1.congestion = defCongestion(q1)\n";

    fn spec(src: &str) -> ArchSpec {
        ArchSpec::parse(src).expect("test program parses")
    }

    #[test]
    fn empty_trace_gives_zero_metrics() {
        let trace = Trace::new(vec![]).unwrap();
        let cfg = SimConfig::new(10, 1).with_consts(&[("B", 6)]);
        let m = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(m.transmitted_count, 0);
        assert_eq!(m.total_drops(), 0);
        assert_eq!(m.mean_queue_length(), 0.0);
        assert!(m.conservation_holds());
    }

    #[test]
    fn single_packet_transmits_with_unit_latency() {
        let trace = Trace::from_unit_arrivals([(0, 1, 0)]).unwrap();
        let cfg = SimConfig::new(2, 1).with_consts(&[("B", 6)]);
        let m = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(m.transmitted_count, 1);
        assert_eq!(m.mean_latency(), 1.0);
    }

    #[test]
    fn same_slot_overflow_keeps_first_arrival() {
        // capacity 1, two same-slot arrivals, default push-out priority:
        // the second arrival is the latest and rejects itself
        let trace = Trace::from_unit_arrivals([(0, 1, 0), (0, 1, 0)]).unwrap();
        let cfg = SimConfig::new(3, 1).with_consts(&[("B", 1)]);
        let m = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(m.drops_self_rejected, 1);
        assert_eq!(m.drops_pushout, 0);
        assert_eq!(m.transmitted_count, 1);
    }

    #[test]
    fn slack_zero_expires_at_next_slot_start() {
        // two slack-0 packets in one slot at C=1: the first is transmitted
        // within its arrival slot, the second expires at slot start t+1
        let mut packets = vec![
            Packet::unit(0, 0, 1, 0),
            Packet::unit(1, 0, 1, 0),
        ];
        packets[0].slack = Some(0);
        packets[1].slack = Some(0);
        let trace = Trace::new(packets).unwrap();
        let cfg = SimConfig::new(4, 1).with_consts(&[("B", 6)]);
        let m = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(m.transmitted_count, 1);
        assert_eq!(m.drops_slack_expired, 1);
        assert!(m.conservation_holds());
    }

    #[test]
    fn slack_not_enforced_when_disabled() {
        let mut packets = vec![Packet::unit(0, 0, 3, 0)];
        packets[0].slack = Some(0);
        let trace = Trace::new(packets).unwrap();
        let mut cfg = SimConfig::new(5, 1).with_consts(&[("B", 6)]);
        cfg.slack_enforced = false;
        let m = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(m.transmitted_count, 1);
        assert_eq!(m.drops_slack_expired, 0);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let trace = Trace::from_unit_arrivals([(0, 2, 0), (0, 1, 0), (3, 2, 0), (4, 1, 0)]).unwrap();
        let cfg = SimConfig::new(10, 1).with_consts(&[("B", 2)]);
        let a = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        let b = run(&spec(SINGLE_QUEUE), &trace, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eval_fault_reports_slot() {
        let src = "bad(p1,p2) = (p1.arrival / (p1.size - p2.size) < 1)\n\
                   q1 = Queue(4)\nout = Port(q1)\nq1.procPrio = bad";
        let trace = Trace::from_unit_arrivals([(2, 1, 0), (2, 1, 0)]).unwrap();
        let cfg = SimConfig::new(5, 1);
        match run(&spec(src), &trace, &cfg) {
            Err(SimError::Eval { slot, fault }) => {
                assert_eq!(slot, 2);
                assert!(fault.message.contains("division by zero"));
            }
            other => panic!("expected eval fault, got {:?}", other.map(|m| m.transmitted_count)),
        }
    }

    const TWO_QUEUE_SCHED: &str = "\
        crr(q1,q2) = (q1.weightSched < q2.weightSched)\n\
        crrPostSchedAct() = lambda port, (port.getCurrQueue().weightSched += k)\n\
        qa = Queue(8)\nqb = Queue(8)\n\
        out = Port(qa, qb)\n\
        out.schedPrio = crr\n\
        out.postSchedAct = crrPostSchedAct(out)\n\
        qa.weightSched = 1\nqb.weightSched = 2\n";

    #[test]
    fn crr_round_robins_per_cycle() {
        // worked example: k = 2, initial weights {1, 2}; cycle 1 serves the
        // first queue (weight 1 -> 3), cycle 2 the second (2 -> 4), cycle 3
        // the first again
        let spec = spec(TWO_QUEUE_SCHED);
        let consts: BTreeMap<String, i64> = [("k".to_string(), 2i64)].into();
        let mut world = World::instantiate(&spec, &consts).unwrap();
        for (seq, queue) in [(0u64, 0usize), (1, 0), (2, 1), (3, 1)] {
            world.admit(Packet::unit(seq, 0, 3, queue)).unwrap();
        }

        let mut served = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..4 {
            let cycle = process_cycle(&mut world, 0).unwrap().unwrap();
            served.push(cycle.queue);
            weights.push((world.queue(0).weight_sched, world.queue(1).weight_sched));
        }
        assert_eq!(served, vec![0, 1, 0, 1]);
        assert_eq!(weights, vec![(3, 2), (3, 4), (5, 4), (5, 6)]);
    }

    const TWO_QUEUE_PRR: &str = "\
        prr(q1,q2) = (q1.weightSched < q2.weightSched)\n\
        prrPostSchedAct() = lambda port, (let q = port.getCurrQueue() in \
        if (q.getHOL().processing == 0) q.weightSched += k*k)\n\
        qa = Queue(8)\nqb = Queue(8)\n\
        out = Port(qa, qb)\n\
        out.schedPrio = prr\n\
        out.postSchedAct = prrPostSchedAct(out)\n\
        qa.weightSched = 1\nqb.weightSched = 2\n";

    #[test]
    fn prr_round_robins_per_packet() {
        // k = 2: the first queue keeps the port until its HOL completes,
        // then its weight jumps by k*k = 4 and the second queue takes over
        let spec = spec(TWO_QUEUE_PRR);
        let consts: BTreeMap<String, i64> = [("k".to_string(), 2i64)].into();
        let mut world = World::instantiate(&spec, &consts).unwrap();
        for (seq, queue) in [(0u64, 0usize), (1, 0), (2, 1), (3, 1)] {
            world.admit(Packet::unit(seq, 0, 2, queue)).unwrap();
        }

        let mut served = Vec::new();
        let mut weights = Vec::new();
        let mut transmitted = Vec::new();
        for _ in 0..8 {
            let cycle = process_cycle(&mut world, 0).unwrap().unwrap();
            served.push(cycle.queue);
            weights.push((world.queue(0).weight_sched, world.queue(1).weight_sched));
            transmitted.push(cycle.transmitted.is_some());
        }
        assert_eq!(served, vec![0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(
            weights,
            vec![
                (1, 2),
                (5, 2),
                (5, 2),
                (5, 6),
                (5, 6),
                (9, 6),
                (9, 6),
                (9, 10)
            ]
        );
        assert_eq!(
            transmitted,
            vec![false, true, false, true, false, true, false, true]
        );
    }

    #[test]
    fn port_never_idles_while_a_member_holds_work() {
        // one queue drains early; every remaining cycle serves the other
        let src = "qa = Queue(8)\nqb = Queue(8)\nout = Port(qa, qb)";
        let trace =
            Trace::from_unit_arrivals([(0, 1, 0), (0, 5, 1), (0, 5, 1)]).unwrap();
        let m = run(&spec(src), &trace, &SimConfig::new(11, 1)).unwrap();
        // 11 cycles cover exactly 1 + 5 + 5 cycles of admitted work
        assert_eq!(m.transmitted_count, 3);
        assert_eq!(m.stored_at_end, 0);
    }

    #[test]
    fn idle_cycle_unsets_current_queue() {
        let spec = spec(TWO_QUEUE_SCHED);
        let consts: BTreeMap<String, i64> = [("k".to_string(), 2i64)].into();
        let mut world = World::instantiate(&spec, &consts).unwrap();
        world.admit(Packet::unit(0, 0, 1, 0)).unwrap();
        assert!(process_cycle(&mut world, 0).unwrap().is_some());
        assert!(process_cycle(&mut world, 0).unwrap().is_none());
        assert_eq!(world.port(0).curr_queue, None);
    }

    #[test]
    fn mark_events_are_logged_with_slot_and_object() {
        let src = "markOnAdm() = lambda q, MARK\n\
                   q1 = Queue(4)\nout = Port(q1)\nq1.postAdmAct = markOnAdm(q1)";
        let trace = Trace::from_unit_arrivals([(1, 1, 0)]).unwrap();
        let cfg = SimConfig::new(3, 1);
        let m = run(&spec(src), &trace, &cfg).unwrap();
        assert_eq!(m.events.len(), 1);
        assert_eq!(m.events[0].slot, 1);
        assert_eq!(m.events[0].object, "q1");
        assert_eq!(m.events[0].signal, SignalKind::Mark);
        assert_eq!(
            m.render_event_log(),
            "{\"slot\":1,\"object\":\"q1\",\"event\":\"MARK\"}\n"
        );
    }

    #[test]
    fn weight_effects_do_not_enter_event_log() {
        let spec = spec(TWO_QUEUE_SCHED);
        let trace = Trace::from_unit_arrivals([(0, 1, 0)]).unwrap();
        let cfg = SimConfig::new(2, 1).with_consts(&[("k", 2)]);
        let m = run(&spec, &trace, &cfg).unwrap();
        assert!(m.events.is_empty());
        assert_eq!(m.transmitted_count, 1);
    }

    #[test]
    fn multi_port_declaration_order_is_observationally_irrelevant() {
        let forward = "qa = Queue(4)\nqb = Queue(4)\np1 = Port(qa)\np2 = Port(qb)";
        let swapped = "qa = Queue(4)\nqb = Queue(4)\np2 = Port(qb)\np1 = Port(qa)";
        let trace =
            Trace::from_unit_arrivals([(0, 2, 0), (0, 1, 1), (1, 1, 1), (2, 2, 0)]).unwrap();
        let cfg = SimConfig::new(6, 1);
        let a = run(&spec(forward), &trace, &cfg).unwrap();
        let b = run(&spec(swapped), &trace, &cfg).unwrap();
        assert_eq!(a.transmitted_count, b.transmitted_count);
        assert_eq!(a.total_drops(), b.total_drops());
        assert_eq!(a.mean_latency(), b.mean_latency());
        // per-queue stats agree when matched by name
        for stats in &a.per_queue {
            let other = b.per_queue.iter().find(|s| s.name == stats.name).unwrap();
            assert_eq!(stats, other);
        }
    }

    #[test]
    fn initial_weights_come_from_bindings() {
        let spec = spec(TWO_QUEUE_SCHED);
        let consts: BTreeMap<String, i64> = [("k".to_string(), 2i64)].into();
        let world = World::instantiate(&spec, &consts).unwrap();
        assert_eq!(world.queue(0).weight_sched, 1);
        assert_eq!(world.queue(1).weight_sched, 2);
        assert_eq!(world.queue(0).weight_adm, 0);
    }
}
