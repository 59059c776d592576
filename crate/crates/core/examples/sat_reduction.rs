//! Compiling 3-CNF formulas to histories and comparing verdicts with
//! satisfiability.
//!
//! Run with `cargo run --release --example sat_reduction`.

use mmcheck::reduction::{
    parse_dimacs, sat_brute_force, sat_to_history_relaxed, sat_to_history_sc, Cnf3,
};
use mmcheck::{derive, solve, History, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn consistent(h: &History, spec: ModelSpec) -> bool {
    let m = derive(h, &spec).expect("model derives");
    solve(h, &m).expect("k within cap").outcome.is_consistent()
}

fn report(phi: &Cnf3) {
    let hs = sat_to_history_sc(phi);
    let hr = sat_to_history_relaxed(phi);
    println!(
        "{}  sat={} k={} sc={} tso={} pso={}",
        phi.to_dimacs().trim().replace('\n', " | "),
        sat_brute_force(phi).expect("few variables"),
        hs.k(),
        consistent(&hs, ModelSpec::sc()),
        consistent(&hr, ModelSpec::tso()),
        consistent(&hr, ModelSpec::pso()),
    );
}

fn main() {
    let phi = parse_dimacs("p cnf 3 1\n1 -2 3 0\n").expect("valid DIMACS");
    println!("{}", sat_to_history_sc(&phi));
    report(&phi);
    report(&parse_dimacs("p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").expect("valid DIMACS"));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in 1..=3 {
        report(&Cnf3::random_distinct(3, m, &mut rng));
    }

    // Satisfiable, but the clause gadgets order the false literals
    // cyclically under every assignment.
    report(
        &parse_dimacs("p cnf 2 4\n1 2 -1 0\n-2 1 -1 0\n-1 2 -2 0\n-2 2 1 0\n")
            .expect("valid DIMACS"),
    );
}
