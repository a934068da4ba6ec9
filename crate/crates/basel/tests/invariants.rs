//! Property tests for the runtime invariants: view order against a linear
//! scan, comparator purity, single-store consistency, decongestion bounds,
//! conservation, and throughput monotonicity in speedup.

use std::collections::BTreeMap;

use proptest::prelude::*;

use basel::engine::{self, SimConfig};
use basel::eval;
use basel::traffic::rng::SplitMix64;
use basel::{ArchSpec, Packet, Trace, World};

// ---- generators ----

#[derive(Debug, Clone, Copy)]
enum Field {
    Arrival,
    Size,
    Value,
    Processing,
    Slack,
}

impl Field {
    fn name(self) -> &'static str {
        match self {
            Field::Arrival => "arrival",
            Field::Size => "size",
            Field::Value => "value",
            Field::Processing => "processing",
            Field::Slack => "slack",
        }
    }

    fn of(self, p: &Packet) -> i64 {
        match self {
            Field::Arrival => p.arrival,
            Field::Size => p.size,
            Field::Value => p.value,
            Field::Processing => p.processing,
            Field::Slack => p.slack_value(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Dir {
    Lt,
    Gt,
    Le,
    Ge,
}

impl Dir {
    fn symbol(self) -> &'static str {
        match self {
            Dir::Lt => "<",
            Dir::Gt => ">",
            Dir::Le => "<=",
            Dir::Ge => ">=",
        }
    }

    fn compare(self, a: i64, b: i64) -> bool {
        match self {
            Dir::Lt => a < b,
            Dir::Gt => a > b,
            Dir::Le => a <= b,
            Dir::Ge => a >= b,
        }
    }
}

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![
        Just(Field::Arrival),
        Just(Field::Size),
        Just(Field::Value),
        Just(Field::Processing),
        Just(Field::Slack),
    ]
}

fn dir_strategy() -> impl Strategy<Value = Dir> {
    prop_oneof![Just(Dir::Lt), Just(Dir::Gt), Just(Dir::Le), Just(Dir::Ge)]
}

/// Packets with small clustered fields so comparator ties actually happen.
fn packets_strategy() -> impl Strategy<Value = Vec<Packet>> {
    prop::collection::vec(
        (0i64..6, 1i64..4, 0i64..4, 1i64..5, prop::option::of(0i64..6)),
        1..64,
    )
    .prop_map(|rows| {
        let mut sorted = rows;
        sorted.sort_by_key(|r| r.0);
        sorted
            .into_iter()
            .enumerate()
            .map(|(seq, (arrival, size, value, processing, slack))| Packet {
                seq: seq as u64,
                size,
                value,
                processing,
                arrival,
                slack,
                queue: 0,
            })
            .collect()
    })
}

fn comparator_world(field: Field, dir: Dir) -> (World, ArchSpec) {
    let src = format!(
        "cmp(p1,p2) = (p1.{f} {d} p2.{f})\n\
         q1 = Queue(100000)\nout = Port(q1)\n\
         q1.procPrio = cmp\nq1.admPrio = cmp\n",
        f = field.name(),
        d = dir.symbol()
    );
    let spec = ArchSpec::parse(&src).unwrap();
    let world = World::instantiate(&spec, &BTreeMap::new()).unwrap();
    (world, spec)
}

/// The independent selection oracle: scan all stored packets in seq order,
/// keeping the one that strictly precedes the incumbent.
fn linear_scan_head(
    packets: &[Packet],
    cmp: impl Fn(&Packet, &Packet) -> bool,
    larger_seq_on_tie: bool,
) -> Packet {
    let mut best = packets[0];
    for p in &packets[1..] {
        let pb = cmp(p, &best);
        let bp = cmp(&best, p);
        let precedes = if pb != bp {
            pb
        } else if larger_seq_on_tie {
            p.seq > best.seq
        } else {
            p.seq < best.seq
        };
        if precedes {
            best = *p;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // view heads equal the head a linear scan with the same comparator and
    // tie-break finds, across admissions and re-keying cycles
    #[test]
    fn view_heads_match_linear_scan(
        field in field_strategy(),
        dir in dir_strategy(),
        packets in packets_strategy(),
        cycles in 0usize..8,
    ) {
        let (mut world, spec) = comparator_world(field, dir);
        let def = &spec.comparators["cmp"];
        let raw = |a: &Packet, b: &Packet| dir.compare(field.of(a), field.of(b));

        for p in &packets {
            world.admit(*p).unwrap();
            let stored: Vec<Packet> = world.queue(0).packets().copied().collect();
            let hol = world.hol(0).unwrap();
            prop_assert_eq!(hol.seq, linear_scan_head(&stored, raw, false).seq);
            let victim = world.select_victim(0).unwrap();
            prop_assert_eq!(victim.seq, linear_scan_head(&stored, raw, true).seq);
            // the evaluated comparator agrees with its plain reading
            prop_assert_eq!(
                eval::packet_comparator(world.defs(), def, &stored[0], &hol).unwrap(),
                raw(&stored[0], &hol)
            );
        }

        // processing decrements re-key the served packet in both views
        for _ in 0..cycles {
            if world.queue(0).is_empty() {
                break;
            }
            world.remove_hol_cycle(0).unwrap();
            world.assert_consistent();
            if world.queue(0).is_empty() {
                break;
            }
            let stored: Vec<Packet> = world.queue(0).packets().copied().collect();
            prop_assert_eq!(
                world.hol(0).unwrap().seq,
                linear_scan_head(&stored, raw, false).seq
            );
            prop_assert_eq!(
                world.select_victim(0).unwrap().seq,
                linear_scan_head(&stored, raw, true).seq
            );
        }
    }

    // evaluating a comparator mutates nothing and repeats identically
    #[test]
    fn comparator_evaluation_is_pure(
        field in field_strategy(),
        dir in dir_strategy(),
        packets in packets_strategy(),
    ) {
        let (mut world, spec) = comparator_world(field, dir);
        for p in packets.iter().take(8) {
            world.admit(*p).unwrap();
        }
        let def = &spec.comparators["cmp"];
        let stored: Vec<Packet> = world.queue(0).packets().copied().collect();
        if stored.len() >= 2 {
            let before = (
                world.queue(0).curr_size,
                world.queue(0).packet_count(),
                world.hol(0).unwrap(),
            );
            let first = eval::packet_comparator(world.defs(), def, &stored[0], &stored[1]).unwrap();
            let second = eval::packet_comparator(world.defs(), def, &stored[0], &stored[1]).unwrap();
            prop_assert_eq!(first, second);
            let after = (
                world.queue(0).curr_size,
                world.queue(0).packet_count(),
                world.hol(0).unwrap(),
            );
            prop_assert_eq!(before, after);
        }
    }
}

// ---- typed expression round trips ----

fn int_expr(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        (0i64..50).prop_map(|n| n.to_string()),
        field_strategy().prop_map(|f| format!("p1.{}", f.name())),
        field_strategy().prop_map(|f| format!("p2.{}", f.name())),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let inner = int_expr(depth - 1);
    prop_oneof![
        leaf,
        (int_expr(depth - 1), inner, prop_oneof![Just("+"), Just("-"), Just("*")])
            .prop_map(|(a, b, op)| format!("({} {} {})", a, op, b)),
    ]
    .boxed()
}

fn bool_expr(depth: u32) -> BoxedStrategy<String> {
    let leaf = (int_expr(1), int_expr(1), dir_strategy())
        .prop_map(|(a, b, d)| format!("{} {} {}", a, d.symbol(), b));
    if depth == 0 {
        return leaf.boxed();
    }
    let inner = bool_expr(depth - 1);
    prop_oneof![
        leaf,
        (bool_expr(depth - 1), inner, prop_oneof![Just("and"), Just("or")])
            .prop_map(|(a, b, op)| format!("({}) {} ({})", a, op, b)),
        bool_expr(depth - 1).prop_map(|e| format!("not ({})", e)),
    ]
    .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_comparators_round_trip(body in bool_expr(3)) {
        let src = format!("gen(p1,p2) = ({})", body);
        let first = ArchSpec::parse(&src).unwrap();
        let printed = first.to_source();
        let second = ArchSpec::parse(&printed).unwrap();
        prop_assert_eq!(first, second);
    }
}

// ---- seeded engine-level invariants ----

struct PolicyPick {
    label: &'static str,
    src: String,
}

fn random_single_queue_policy(rng: &mut SplitMix64, capacity: i64) -> PolicyPick {
    let defs = "fifo(p1,p2) = (p1.arrival < p2.arrival)\n\
                srpt(p1,p2) = (p1.processing < p2.processing)\n\
                rsrpt(p1,p2) = (p1.processing > p2.processing)\n\
                defCongestion() = lambda q, (q.currSize >= q.size)\n";
    let procs = ["fifo", "srpt", "rsrpt"];
    let adms: [Option<&str>; 3] = [None, Some("fifo"), Some("rsrpt")];
    let proc_prio = procs[rng.below(3) as usize];
    let adm_prio = adms[rng.below(3) as usize];
    let mut src = format!("{defs}q1 = Queue({capacity})\nout = Port(q1)\n");
    src.push_str(&format!("q1.procPrio = {}\n", proc_prio));
    if let Some(a) = adm_prio {
        src.push_str(&format!("q1.admPrio = {}\n", a));
    }
    src.push_str("q1.congestion = defCongestion(q1)\n");
    PolicyPick {
        label: "single",
        src,
    }
}

fn random_shared_buffer_policy(rng: &mut SplitMix64, capacity: i64) -> PolicyPick {
    let lqd_or_default = rng.below(2) == 0;
    let mut src = String::from("lqd(q1,q2) = (q1.currSize > q2.currSize)\n");
    src.push_str(&format!(
        "q1 = Queue({capacity})\nq2 = Queue({capacity})\nout = Port(q1, q2)\n\
         shared = Buffer({capacity}, q1, q2)\n"
    ));
    if lqd_or_default {
        src.push_str("shared.queuePrio = lqd\n");
    }
    PolicyPick {
        label: "shared",
        src,
    }
}

fn random_trace(rng: &mut SplitMix64, max_packets: u64, queues: u64) -> Trace {
    let n = 1 + rng.below(max_packets);
    let mut rows: Vec<(i64, i64, usize)> = (0..n)
        .map(|_| {
            (
                rng.below(16) as i64,
                1 + rng.below(4) as i64,
                rng.below(queues) as usize,
            )
        })
        .collect();
    rows.sort();
    Trace::from_unit_arrivals(rows).unwrap()
}

/// Criterion-style invariant sweep: random policies and traces, operations
/// driven directly so every inter-operation point is observable.
#[test]
fn admission_invariants_hold_under_random_policies() {
    let mut rng = SplitMix64::new(0xBA5E);
    for round in 0..150 {
        let capacity = 1 + (rng.below(5) as i64);
        let shared = rng.below(3) == 0;
        let pick = if shared {
            random_shared_buffer_policy(&mut rng, capacity)
        } else {
            random_single_queue_policy(&mut rng, capacity)
        };
        let spec = ArchSpec::parse(&pick.src).unwrap();
        let mut world = World::instantiate(&spec, &BTreeMap::new()).unwrap();
        let queues = if shared { 2 } else { 1 };
        let trace = random_trace(&mut rng, 64, queues);

        let mut admitted = 0i64;
        let mut rejected = 0i64;
        let mut pushed_out = 0i64;
        let mut transmitted = 0i64;
        for p in &trace.packets {
            let outcome = world.admit(*p).unwrap();
            world.assert_consistent();
            pushed_out += outcome.pushed_out.len() as i64;
            if outcome.admitted {
                admitted += 1;
            } else {
                rejected += 1;
            }
            // decongestion: defCongestion-style bounds hold at every
            // inter-operation point
            for q in 0..world.queue_count() {
                assert!(
                    world.queue(q).curr_size <= world.queue(q).capacity,
                    "round {} ({}): queue over capacity",
                    round,
                    pick.label
                );
            }
            for b in 0..world.buffer_count() {
                assert!(
                    world.buffer_occupancy(b) <= world.buffer(b).capacity,
                    "round {} ({}): buffer over capacity",
                    round,
                    pick.label
                );
            }
            // interleave some processing
            if rng.below(2) == 0 {
                for q in 0..world.queue_count() {
                    if !world.queue(q).is_empty() {
                        if world.remove_hol_cycle(q).unwrap().is_some() {
                            transmitted += 1;
                        }
                        world.assert_consistent();
                    }
                }
            }
        }
        // conservation: every arrival is either admitted or rejected, and
        // every admitted packet ends up stored, transmitted, or pushed out
        let stored: i64 = (0..world.queue_count())
            .map(|q| world.queue(q).packet_count() as i64)
            .sum();
        assert_eq!(
            admitted + rejected,
            trace.packets.len() as i64,
            "round {}: admissions unaccounted",
            round
        );
        assert_eq!(
            stored + transmitted + pushed_out,
            admitted,
            "round {}: admitted packets unaccounted",
            round
        );
    }
}

#[test]
fn conservation_holds_across_engine_runs() {
    let mut rng = SplitMix64::new(0xC0C0);
    for _ in 0..60 {
        let capacity = 1 + (rng.below(4) as i64);
        let pick = random_single_queue_policy(&mut rng, capacity);
        let spec = ArchSpec::parse(&pick.src).unwrap();
        let trace = random_trace(&mut rng, 64, 1);
        let slots = 20 + rng.below(20) as i64;
        let speedup = 1 + rng.below(3) as i64;
        let m = engine::run(&spec, &trace, &SimConfig::new(slots, speedup)).unwrap();
        assert!(m.conservation_holds(), "metrics: {:?}", m);
    }
}

#[test]
fn transmitted_count_is_monotone_in_speedup() {
    // the three greedy single-queue policy rows, randomized traces
    let policies = [
        ("fifo/fifo", "fifo", None),
        ("fifo/srpt", "srpt", None),
        ("rsrpt/srpt", "srpt", Some("rsrpt")),
    ];
    let defs = "fifo(p1,p2) = (p1.arrival < p2.arrival)\n\
                srpt(p1,p2) = (p1.processing < p2.processing)\n\
                rsrpt(p1,p2) = (p1.processing > p2.processing)\n\
                defCongestion() = lambda q, (q.currSize >= q.size)\n";
    let mut rng = SplitMix64::new(0x5EED);
    for round in 0..80 {
        let capacity = 1 + (rng.below(4) as i64);
        let trace = random_trace(&mut rng, 40, 1);
        let slots = 40;
        for (label, proc_prio, adm_prio) in &policies {
            let mut src = format!("{defs}q1 = Queue({capacity})\nout = Port(q1)\n");
            src.push_str(&format!("q1.procPrio = {}\n", proc_prio));
            if let Some(a) = adm_prio {
                src.push_str(&format!("q1.admPrio = {}\n", a));
            }
            src.push_str("q1.congestion = defCongestion(q1)\n");
            let spec = ArchSpec::parse(&src).unwrap();
            let mut last = 0;
            for c in 1..=4 {
                let m = engine::run(&spec, &trace, &SimConfig::new(slots, c)).unwrap();
                assert!(
                    m.transmitted_count >= last,
                    "round {} {}: C={} transmitted {} < {}",
                    round,
                    label,
                    c,
                    m.transmitted_count,
                    last
                );
                last = m.transmitted_count;
            }
        }
    }
}

#[test]
fn slack_bound_holds_for_transmitted_packets() {
    // slack 0: anything transmitted finished within its arrival slot, so
    // every latency is exactly one slot
    let mut rng = SplitMix64::new(0x51AC);
    let src = "srpt(p1,p2) = (p1.processing < p2.processing)\n\
               q1 = Queue(4)\nout = Port(q1)\nq1.procPrio = srpt";
    let spec = ArchSpec::parse(src).unwrap();
    for _ in 0..40 {
        let n = 1 + rng.below(30);
        let mut packets: Vec<Packet> = (0..n)
            .map(|i| {
                let mut p = Packet::unit(i, rng.below(12) as i64, 1 + rng.below(3) as i64, 0);
                p.slack = Some(0);
                p
            })
            .collect();
        packets.sort_by_key(|p| p.arrival);
        for (i, p) in packets.iter_mut().enumerate() {
            p.seq = i as u64;
        }
        let trace = Trace::new(packets).unwrap();
        let m = engine::run(&spec, &trace, &SimConfig::new(16, 2)).unwrap();
        if m.transmitted_count > 0 {
            assert_eq!(m.mean_latency(), 1.0);
        }
        assert!(m.conservation_holds());
    }
}
