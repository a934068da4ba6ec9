//! The exhaustive offline-optimal oracle on desk-scale instances: exact
//! optimum by memoized search, the optimal push-out policy matching it
//! through the simulator, and competitive ratios for a weaker policy.
//!
//! ```bash
//! cargo run -p basel --example optimal_oracle
//! ```

use basel::engine::{self, SimConfig};
use basel::oracle::{self, OracleBounds, OracleShape};
use basel::traffic::rng::SplitMix64;
use basel::{ArchSpec, Trace};

fn main() {
    let bounds = OracleBounds::default();
    let shape = OracleShape::SingleQueue { capacity: 2 };
    let fifo = ArchSpec::parse(
        "fifo(p1,p2) = (p1.arrival < p2.arrival)\n\
         q1 = Queue(2)\nout = Port(q1)\nq1.procPrio = fifo",
    )
    .unwrap();

    let mut rng = SplitMix64::new(99);
    let mut worst: (f64, Option<Trace>) = (0.0, None);
    let mut exact_matches = 0;
    let rounds = 200;
    for _ in 0..rounds {
        let n = 1 + rng.below(6);
        let mut rows: Vec<(i64, i64, usize)> = (0..n)
            .map(|_| (rng.below(6) as i64, 1 + rng.below(3) as i64, 0))
            .collect();
        rows.sort();
        let trace = Trace::from_unit_arrivals(rows).unwrap();
        let slots = 24;

        let opt = oracle::brute_force_opt(&shape, &trace, slots, &bounds).unwrap();
        // the push-out policy admitting by largest remaining work and
        // processing shortest-first reaches the optimum exactly
        let reference = oracle::reference_optimal_value(&trace, 2, slots).unwrap();
        assert_eq!(opt, reference);
        exact_matches += 1;

        let cfg = SimConfig::new(slots, 1);
        let greedy = engine::run(&fifo, &trace, &cfg).unwrap().transmitted_value;
        let ratio = oracle::competitive_ratio(opt, greedy);
        if ratio.ratio > worst.0 {
            worst = (ratio.ratio, Some(trace));
        }
    }

    println!(
        "over {} random instances (<=6 packets, work <=3, B=2):",
        rounds
    );
    println!(
        "  reference push-out policy == exhaustive optimum on all {} instances",
        exact_matches
    );
    println!("  worst greedy-fifo ratio: {:.3}", worst.0);
    if let Some(trace) = worst.1 {
        println!("  achieved on arrivals (slot, work):");
        for p in &trace.packets {
            println!("    t={} processing={}", p.arrival, p.processing);
        }
    }
}
