//! Witness write orders for consistent verdicts, cycles for inconsistent ones.
//!
//! Run with `cargo run --example witness`.

use mmcheck::solver::Diagnostics;
use mmcheck::{derive, parse_history, solve, verify_witness, EventId, History, ModelSpec};

fn refs(h: &History, events: &[EventId], sep: &str) -> String {
    events
        .iter()
        .map(|&e| h.event_ref(e).to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn main() {
    let h = parse_history(
        "init: x=0 y=0\n\
         thread T0\nwr x 1\nrd y 0\n\
         thread T1\nwr y 1\nrd x 0\n",
    )
    .expect("trace parses");

    for spec in [ModelSpec::sc(), ModelSpec::tso()] {
        let m = derive(&h, &spec).expect("model derives");
        let v = solve(&h, &m).expect("small history");
        println!("{spec}: {}", v.outcome);
        if let Some(tw) = &v.witness {
            println!("  tw: {}", refs(&h, tw, " < "));
            println!(
                "  re-verified: {}",
                verify_witness(&h, &m, tw).expect("permutation")
            );
        }
        if let Some(d) = &v.diagnostics {
            println!("  {d:?}");
        }
        println!(
            "  subsets evaluated: {} of {}",
            v.stats.subsets_evaluated,
            1u64 << h.k()
        );
    }

    // A read that precedes its own source in program order fails before
    // any write order is considered.
    let h = parse_history("thread T0\nrd x 1\nwr x 1\n").expect("trace parses");
    let m = derive(&h, &ModelSpec::sc()).expect("model derives");
    if let Some(Diagnostics::BaseCycle { graph, cycle }) = solve(&h, &m).expect("small").diagnostics
    {
        println!(
            "read-before-write: base {graph} cycle {}",
            refs(&h, &cycle, " -> ")
        );
    }
}
