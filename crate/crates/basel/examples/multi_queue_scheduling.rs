//! Scheduling policies over per-class queues: weight-driven round robin at
//! per-cycle (CRR) and per-packet (PRR) resolution, against serving the
//! smallest processing class first (MQF). Prints the cycle-by-cycle weight
//! trajectories that make the round-robin mechanics visible.
//!
//! ```bash
//! cargo run -p basel --example multi_queue_scheduling
//! ```

use std::collections::BTreeMap;

use basel::engine::process_cycle;
use basel::{ArchSpec, Packet, World};

fn arch(sched: &str, k: i64) -> String {
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
        _ => unreachable!(),
    });
    for i in 1..=k {
        src.push_str(&format!("q{} = Queue(4)\n", i));
    }
    let members: Vec<String> = (1..=k).map(|i| format!("q{}", i)).collect();
    src.push_str(&format!("out = Port({})\n", members.join(", ")));
    src.push_str(&format!("out.schedPrio = {}\n", sched));
    match sched {
        "crr" => src.push_str("out.postSchedAct = crrPostSchedAct(out)\n"),
        "prr" => src.push_str("out.postSchedAct = prrPostSchedAct(out)\n"),
        _ => {}
    }
    for i in 1..=k {
        src.push_str(&format!("q{}.weightSched = {}\n", i, i));
    }
    src
}

fn demo(sched: &str, cycles: usize) {
    let k = 2i64;
    let spec = ArchSpec::parse(&arch(sched, k)).unwrap();
    let consts: BTreeMap<String, i64> = [("k".to_string(), k)].into();
    let mut world = World::instantiate(&spec, &consts).unwrap();
    // two 2-cycle packets in each class queue
    for (seq, queue) in [(0u64, 0usize), (1, 0), (2, 1), (3, 1)] {
        world.admit(Packet::unit(seq, 0, 2, queue)).unwrap();
    }
    println!("{} over {} queues, weights start at (1, 2):", sched, k);
    println!("  {:<6} {:<8} {:<10} transmitted", "cycle", "served", "weights");
    for c in 1..=cycles {
        let cycle = process_cycle(&mut world, 0).unwrap().unwrap();
        println!(
            "  {:<6} {:<8} ({}, {})    {}",
            c,
            world.queue(cycle.queue).name.clone(),
            world.queue(0).weight_sched,
            world.queue(1).weight_sched,
            cycle
                .transmitted
                .map(|p| format!("seq {}", p.seq))
                .unwrap_or_else(|| String::from("-"))
        );
    }
    println!();
}

fn main() {
    // CRR alternates queues every cycle: each service bumps the served
    // queue's weight by k, handing the next cycle to the other queue
    demo("crr", 4);
    // PRR holds a queue until its head completes, then jumps the weight by
    // k*k so the other queue takes over packet-by-packet
    demo("prr", 8);
    // MQF ignores the actions and always serves the smallest-weight
    // non-empty queue
    demo("minqf", 4);
}
