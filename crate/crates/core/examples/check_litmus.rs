//! Classic litmus tests under every model.
//!
//! Run with `cargo run --example check_litmus`.

use mmcheck::{derive, parse_history, solve, ModelSpec};

const LITMUS: &[(&str, &str)] = &[
    (
        "SB (store buffering)",
        "init: x=0 y=0\nthread T0\nwr x 1\nrd y 0\nthread T1\nwr y 1\nrd x 0\n",
    ),
    (
        "MP (message passing)",
        "init: x=0 y=0\nthread T0\nwr x 1\nwr y 1\nthread T1\nrd y 1\nrd x 0\n",
    ),
    (
        "LB (load buffering)",
        "thread T0\nrd x 1\nwr y 1\nthread T1\nrd y 1\nwr x 1\n",
    ),
    (
        "CoRR (read-read coherence)",
        "init: x=0\nthread T0\nwr x 1\nthread T1\nrd x 1\nrd x 0\n",
    ),
    (
        "IRIW (independent reads)",
        "init: x=0 y=0\nthread T0\nwr x 1\nthread T1\nwr y 1\n\
         thread T2\nrd x 1\nrd y 0\nthread T3\nrd y 1\nrd x 0\n",
    ),
];

fn main() {
    print!("{:<28}", "");
    for spec in ModelSpec::ALL {
        print!("{:>14}", spec.name());
    }
    println!();
    for (name, text) in LITMUS {
        let h = parse_history(text).expect("litmus parses");
        print!("{name:<28}");
        for spec in ModelSpec::ALL {
            let m = derive(&h, &spec).expect("model derives");
            let v = solve(&h, &m).expect("small history");
            print!("{:>14}", v.outcome.to_string());
        }
        println!();
    }
}
