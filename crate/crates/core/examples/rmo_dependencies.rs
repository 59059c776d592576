//! Dependencies, thin-air values and load-load hazards under RMO.
//!
//! Run with `cargo run --example rmo_dependencies`.

use mmcheck::models::oota_cycle;
use mmcheck::{derive, oota_check, oracle_total, parse_history, solve, ModelSpec};

fn verdicts(name: &str, text: &str) {
    let h = parse_history(text).expect("trace parses");
    print!(
        "{name:<24} thin-air test {:<5}",
        if oota_check(&h) { "pass" } else { "fail" }
    );
    for spec in ModelSpec::ALL {
        let m = derive(&h, &spec).expect("model derives");
        let s = solve(&h, &m).expect("small history").outcome;
        let o = oracle_total(&h, &m).expect("small history").outcome;
        assert_eq!(s, o);
        print!("  {spec}={s}");
    }
    println!();
}

fn main() {
    // Load buffering without dependencies: RMO may reorder each read with
    // the write after it.
    verdicts(
        "LB",
        "thread T0\nrd x 1\nwr y 1\nthread T1\nrd y 1\nwr x 1\n",
    );
    // The same outcome with both writes depending on the reads: each value
    // would justify itself.
    let lb_dp = "thread T0\nrd x 1\nwr y 1\nthread T1\nrd y 1\nwr x 1\n\
                 dp T0:0 -> T0:1\ndp T1:0 -> T1:1\n";
    verdicts("LB+dp", lb_dp);
    let h = parse_history(lb_dp).expect("trace parses");
    let cycle = oota_cycle(&h).expect("cyclic");
    let path: Vec<String> = cycle.iter().map(|&e| h.event_ref(e).to_string()).collect();
    println!("  dp/rf cycle: {}", path.join(" -> "));

    // Two reads of x observe the new value, then the old one.
    verdicts(
        "CoRR (load-load hazard)",
        "init: x=0\nthread T0\nwr x 1\nthread T1\nrd x 1\nrd x 0\n",
    );
    // One dependency restores the order for MP under RMO.
    verdicts(
        "MP+dp",
        "init: x=0 y=0\nthread T0\nwr x 1\nwr y 1\nthread T1\nrd y 1\nrd x 0\ndp T1:0 -> T1:1\n",
    );
}
