//! Three single-queue admission/processing policies on an adversarial
//! arrival pattern: a burst of long-work packets followed by a steady feed
//! of one-cycle packets. Processing order alone helps a lot; pairing it
//! with push-out by largest remaining work is optimal.
//!
//! ```bash
//! cargo run -p basel --example single_queue_policies
//! ```

use basel::engine::{self, SimConfig};
use basel::oracle;
use basel::{ArchSpec, Trace};

const DEFS: &str = "\
fifo(p1,p2) = (p1.arrival < p2.arrival)
srpt(p1,p2) = (p1.processing < p2.processing)
rsrpt(p1,p2) = (p1.processing > p2.processing)
defCongestion() = lambda q, (q.currSize >= q.size)
q1 = Queue(B)
out = Port(q1)
q1.congestion = defCongestion(q1)
";

fn policy(proc_prio: &str, adm_prio: Option<&str>) -> ArchSpec {
    let mut src = format!("{DEFS}q1.procPrio = {}\n", proc_prio);
    if let Some(a) = adm_prio {
        src.push_str(&format!("q1.admPrio = {}\n", a));
    }
    ArchSpec::parse(&src).expect("policy parses")
}

fn main() {
    let buffer = 4i64;
    let k = 8i64;
    // B long packets at slot 0, then one short packet per slot
    let mut rows: Vec<(i64, i64, usize)> = (0..buffer).map(|_| (0, k, 0)).collect();
    for t in 1..=(4 * k) {
        rows.push((t, 1, 0));
    }
    let trace = Trace::from_unit_arrivals(rows).unwrap();
    let slots = 5 * k + 2;
    println!(
        "adversarial trace: {} packets ({} needing {} cycles, then one 1-cycle per slot), B = {}, {} slots\n",
        trace.packets.len(),
        buffer,
        k,
        buffer,
        slots
    );

    let opt = oracle::reference_optimal_value(&trace, buffer, slots).unwrap();
    println!("offline-optimal transmits: {}\n", opt);

    let policies = [
        ("greedy fifo (tail-drop)", policy("fifo", None)),
        ("greedy + srpt processing", policy("srpt", None)),
        ("rsrpt push-out + srpt", policy("srpt", Some("rsrpt"))),
    ];
    println!("{:<28} {:>11} {:>9} {:>8}", "policy", "transmitted", "dropped", "OPT/ALG");
    for (name, spec) in &policies {
        let cfg = SimConfig::new(slots, 1).with_consts(&[("B", buffer)]);
        let m = engine::run(spec, &trace, &cfg).unwrap();
        let ratio = oracle::competitive_ratio(opt, m.transmitted_value);
        println!(
            "{:<28} {:>11} {:>9} {:>8.3}",
            name,
            m.transmitted_count,
            m.total_drops(),
            ratio.ratio
        );
    }
}
