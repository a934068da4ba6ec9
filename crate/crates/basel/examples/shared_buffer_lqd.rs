//! Longest-queue-drop over a shared memory pool: two queues share one
//! buffer, and on congestion the victim comes from whichever queue is
//! currently longest — so a heavy flow cannot starve a light one.
//!
//! ```bash
//! cargo run -p basel --example shared_buffer_lqd
//! ```

use std::collections::BTreeMap;

use basel::{ArchSpec, Packet, World};

const SHARED: &str = "\
lqd(q1,q2) = (q1.currSize > q2.currSize)
heavy = Queue(8)
light = Queue(8)
out = Port(heavy, light)
shared = Buffer(8, heavy, light)
shared.queuePrio = lqd
";

fn main() {
    let spec = ArchSpec::parse(SHARED).unwrap();
    let mut world = World::instantiate(&spec, &BTreeMap::new()).unwrap();

    // the heavy flow fills most of the shared pool
    let mut seq = 0u64;
    for _ in 0..6 {
        world.admit(Packet::unit(seq, 0, 1, 0)).unwrap();
        seq += 1;
    }
    for _ in 0..2 {
        world.admit(Packet::unit(seq, 0, 1, 1)).unwrap();
        seq += 1;
    }
    println!(
        "slot 0: heavy={} light={} (shared pool {}/{})",
        world.queue(0).packet_count(),
        world.queue(1).packet_count(),
        world.buffer_occupancy(0),
        world.buffer(0).capacity
    );

    // arrivals to the light flow push packets out of the heavy one
    for t in 1..=3 {
        let outcome = world.admit(Packet::unit(seq, t, 1, 1)).unwrap();
        seq += 1;
        let victims: Vec<String> = outcome
            .pushed_out
            .iter()
            .map(|p| format!("{} (seq {})", world.queue(p.queue).name, p.seq))
            .collect();
        println!(
            "slot {}: light arrival admitted={} pushed out {:?} -> heavy={} light={}",
            t,
            outcome.admitted,
            victims,
            world.queue(0).packet_count(),
            world.queue(1).packet_count()
        );
    }

    println!(
        "\nthe shared pool never exceeds its capacity: {}/{}",
        world.buffer_occupancy(0),
        world.buffer(0).capacity
    );
}
