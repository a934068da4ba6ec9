//! Parse a policy program, validate it against supplied constants, and emit
//! its canonical form — plus what diagnostics look like when a program is
//! broken.
//!
//! ```bash
//! cargo run -p basel --example parse_and_print
//! ```

use std::collections::BTreeMap;

use basel::ArchSpec;

fn main() {
    let src = "\
// push-out by largest remaining work, process shortest-first
srpt(p1,p2) = (p1.processing < p2.processing)
rsrpt(p1,p2) = (p1.processing > p2.processing)
defCongestion() = lambda q, (q.currSize >= q.size)
q1 = Queue(B); out = Port(q1);
q1.procPrio = srpt; q1.admPrio = rsrpt;
q1.congestion = defCongestion(q1);
";
    let spec = ArchSpec::parse(src).expect("program parses");
    println!(
        "parsed: {} comparators, {} predicates, {} declarations, {} bindings",
        spec.comparators.len(),
        spec.predicates.len(),
        spec.declarations.len(),
        spec.bindings.len()
    );

    // constants may come from the command line rather than the program
    let unbound = spec.validate(&BTreeMap::new());
    println!("\nwithout constants, validation reports:");
    for d in &unbound {
        println!("  {}", d);
    }
    let consts: BTreeMap<String, i64> = [("B".to_string(), 6i64)].into();
    assert!(spec.validate(&consts).is_empty());
    println!("\nwith B=6 the program validates cleanly.");

    println!("\ncanonical form:\n{}", spec.to_source());

    // a broken program: read-only property and an unresolved queue
    let broken = "q1 = Queue(4)\nq1.currSize = 5\nout = Port(q1, q2)\n";
    match ArchSpec::parse(broken) {
        Ok(_) => unreachable!("the example program is intentionally broken"),
        Err(diags) => {
            println!("diagnostics for a broken program:");
            for d in diags {
                println!("  line {}", d);
            }
        }
    }
}
