//! Helpers shared by the integration suites: policy source builders and
//! seeded instance generators.

#![allow(dead_code)]

use basel::traffic::rng::SplitMix64;
use basel::Trace;

pub const POLICY_DEFS: &str = "\
fifo(p1,p2) = (p1.arrival < p2.arrival)
srpt(p1,p2) = (p1.processing < p2.processing)
rsrpt(p1,p2) = (p1.processing > p2.processing)
defCongestion() = lambda q, (q.currSize >= q.size)
";

/// Single queue of capacity `B` behind one port. `adm_prio = None` leaves
/// the default push-out order (victim = latest arrival, i.e. greedy
/// tail-drop), which is the "admits every incoming packet if possible"
/// baseline.
pub fn single_queue_policy(proc_prio: &str, adm_prio: Option<&str>) -> String {
    let mut src = format!("{POLICY_DEFS}q1 = Queue(B)\nout = Port(q1)\n");
    src.push_str(&format!("q1.procPrio = {}\n", proc_prio));
    if let Some(a) = adm_prio {
        src.push_str(&format!("q1.admPrio = {}\n", a));
    }
    src.push_str("q1.congestion = defCongestion(q1)\n");
    src
}

/// Per-class multi-queue architecture: `k` queues of capacity `B` each,
/// one scheduling policy over them, weights initialised 1..k where the
/// policy reads them.
pub fn multi_queue_policy(sched: &str, k: i64) -> String {
    let mut src = String::new();
    src.push_str(match sched {
        "minqf" => "minqf(q1,q2) = (q1.weightSched < q2.weightSched)\n",
        "crr" => {
            "crr(q1,q2) = (q1.weightSched < q2.weightSched)\n\
             crrPostSchedAct() = lambda port, (port.getCurrQueue().weightSched += k)\n"
        }
        "prr" => {
            "prr(q1,q2) = (q1.weightSched < q2.weightSched)\n\
             prrPostSchedAct() = lambda port, (let q = port.getCurrQueue() in \
             if (q.getHOL().processing == 0) q.weightSched += k*k)\n"
        }
        other => panic!("unknown sched {}", other),
    });
    for i in 1..=k {
        src.push_str(&format!("q{} = Queue(B)\n", i));
    }
    let members: Vec<String> = (1..=k).map(|i| format!("q{}", i)).collect();
    src.push_str(&format!("out = Port({})\n", members.join(", ")));
    src.push_str(&format!("out.schedPrio = {}\n", sched));
    if sched == "crr" {
        src.push_str("out.postSchedAct = crrPostSchedAct(out)\n");
    }
    if sched == "prr" {
        src.push_str("out.postSchedAct = prrPostSchedAct(out)\n");
    }
    for i in 1..=k {
        src.push_str(&format!("q{}.weightSched = {}\n", i, i));
    }
    src
}

/// Seeded single-queue instance: up to `max_packets` unit packets with
/// processing in `1..=max_k`, arrivals in `0..window`.
pub fn random_single_queue_instance(
    seed: u64,
    max_packets: u64,
    max_k: u64,
    window: u64,
) -> Trace {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1));
    let n = 1 + rng.below(max_packets);
    let mut rows: Vec<(i64, i64, usize)> = (0..n)
        .map(|_| (rng.below(window) as i64, 1 + rng.below(max_k) as i64, 0))
        .collect();
    rows.sort();
    Trace::from_unit_arrivals(rows).unwrap()
}

/// Seeded per-class instance: packets go to the queue of their processing
/// class (`queue = processing - 1`).
pub fn random_by_processing_instance(
    seed: u64,
    max_packets: u64,
    k: u64,
    window: u64,
) -> Trace {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0xA24BAED4963EE407).wrapping_add(3));
    let n = 1 + rng.below(max_packets);
    let mut rows: Vec<(i64, i64, usize)> = (0..n)
        .map(|_| {
            let processing = 1 + rng.below(k) as i64;
            (
                rng.below(window) as i64,
                processing,
                (processing - 1) as usize,
            )
        })
        .collect();
    rows.sort();
    Trace::from_unit_arrivals(rows).unwrap()
}

/// The adversarial long-work family: `b` packets needing `k` cycles at slot
/// 0, then one 1-cycle packet per slot for `4k` slots.
pub fn long_work_burst_family(k: i64, b: i64) -> Trace {
    let mut rows: Vec<(i64, i64, usize)> = (0..b).map(|_| (0, k, 0)).collect();
    for t in 1..=(4 * k) {
        rows.push((t, 1, 0));
    }
    Trace::from_unit_arrivals(rows).unwrap()
}
