//! The subset solver against both brute-force oracles on random histories.
//!
//! Run with `cargo run --release --example oracle_agreement -- [histories]`.

use std::collections::BTreeMap;

use mmcheck::simgen::{random_history, HistoryShape};
use mmcheck::{derive, oracle_store, oracle_total, solve, ModelSpec};

fn main() {
    let count: u64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("history count"))
        .unwrap_or(2000);
    let shape = HistoryShape::default();
    let mut tally: BTreeMap<(&str, String), u64> = BTreeMap::new();
    let mut disagreements = 0;
    for seed in 0..count {
        let h = random_history(&shape, seed);
        for spec in ModelSpec::ALL {
            let m = derive(&h, &spec).expect("model derives");
            let s = solve(&h, &m).expect("small history").outcome;
            let t = oracle_total(&h, &m).expect("within bounds").outcome;
            let st = oracle_store(&h, &m).expect("within bounds").outcome;
            if s != t || t != st {
                disagreements += 1;
                println!("seed {seed} {spec}: solve={s} total={t} store={st}");
            }
            *tally.entry((spec.name(), s.to_string())).or_default() += 1;
        }
    }
    for ((model, outcome), n) in &tally {
        println!("{model:>4} {outcome:<13} {n}");
    }
    println!("{count} histories, {disagreements} disagreements");
}
