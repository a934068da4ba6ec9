//! A small end-to-end experiment: sweep port speedup with generated
//! traffic, compute the offline-optimal ratio per run, and print the
//! plot-ready per-axis aggregate. The same sweep is reproducible from the
//! command line:
//!
//! ```bash
//! cargo run -p basel --example speedup_sweep
//! cargo run -p basel -- --arch crates/basel/programs/single_queue.basel \
//!     --const B=2 --mmpp lambda=0.4,k=3 --slots 16 --speedup 1,2,4 \
//!     --seeds 1..30 --oracle --no-timestamp
//! ```

use basel::experiment::{
    run_experiment, ArchSource, ExperimentSpec, MmppConfig, TraceSource,
};
use basel::oracle::OracleBounds;

const GREEDY_FIFO: &str = "\
fifo(p1,p2) = (p1.arrival < p2.arrival)
defCongestion() = lambda q, (q.currSize >= q.size)
q1 = Queue(B)
out = Port(q1)
q1.procPrio = fifo
q1.congestion = defCongestion(q1)
";

fn main() {
    let spec = ExperimentSpec {
        arch: ArchSource::Inline(GREEDY_FIFO.to_string()),
        policy_label: "greedy-fifo".to_string(),
        trace: TraceSource::Mmpp(MmppConfig {
            lambda: 0.4,
            max_processing: 3,
            ..MmppConfig::with_defaults()
        }),
        slots: 16,
        consts: [("B".to_string(), 2i64)].into(),
        oracle: Some(OracleBounds::default()),
        timestamp: false,
        workers: 4,
        ..ExperimentSpec::default()
    };
    let mut swept = spec;
    swept.sweep.speedup = vec![1, 2, 4];
    swept.sweep.seeds = (1..=30).collect();

    let output = run_experiment(&swept).expect("experiment runs");
    assert!(!output.any_failed());

    println!("result table ({} rows), first few:", output.rows.len());
    for line in output.table.lines().take(5) {
        println!("  {}", line);
    }
    println!("  ...");

    for (axis, csv) in &output.aggregates {
        println!("\naggregate over {} (mean/max OPT-to-policy ratio):", axis);
        for line in csv.lines() {
            println!("  {}", line);
        }
    }
    println!("\nmore processing cycles per slot close the gap to optimal.");
}
