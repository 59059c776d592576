//! How many write subsets the solver touches as the number of writes grows.
//!
//! Run with `cargo run --release --example subset_scaling`.

use std::time::Instant;

use mmcheck::reduction::{sat_to_history_sc, Cnf3, Literal};
use mmcheck::simgen::{simulate, RandomProgram, SimModel};
use mmcheck::{derive, solve, History, ModelSpec};

fn measure(label: &str, h: &History, spec: ModelSpec) {
    let m = derive(h, &spec).expect("model derives");
    let start = Instant::now();
    let v = solve(h, &m).expect("k within cap");
    println!(
        "{label:<22} k={:>2} n={:>3} {:<13} subsets={:>7} / 2^k={:>7}  {:.1} ms",
        h.k(),
        h.n(),
        v.outcome.to_string(),
        v.stats.subsets_evaluated,
        1u64 << h.k(),
        start.elapsed().as_secs_f64() * 1e3
    );
}

fn main() {
    let unit = |l: Literal| [l, l, l];
    let steps = [
        Literal::pos(1),
        Literal::pos(2),
        Literal::pos(3),
        Literal::neg(1),
        Literal::neg(2),
        Literal::neg(3),
    ];
    for i in 1..=steps.len() {
        let phi = Cnf3::new(3, steps[..i].iter().map(|&l| unit(l)).collect());
        measure(
            &format!("reduction, {i} units"),
            &sat_to_history_sc(&phi),
            ModelSpec::sc(),
        );
    }
    // x1 ∧ ¬x1 padded with more variables and literals: unsatisfiable throughout.
    let family: [(usize, &[Literal]); 5] = [
        (2, &[Literal::pos(1), Literal::neg(1)]),
        (2, &[Literal::pos(1), Literal::neg(1), Literal::pos(2)]),
        (3, &[Literal::pos(1), Literal::neg(1), Literal::pos(2)]),
        (
            3,
            &[
                Literal::pos(1),
                Literal::neg(1),
                Literal::pos(2),
                Literal::pos(3),
            ],
        ),
        (
            3,
            &[
                Literal::pos(1),
                Literal::neg(1),
                Literal::pos(2),
                Literal::pos(3),
                Literal::neg(2),
            ],
        ),
    ];
    for (n, lits) in family {
        let phi = Cnf3::new(n, lits.iter().map(|&l| unit(l)).collect());
        measure(
            &format!("unsat, n={n} |L|={}", lits.len()),
            &sat_to_history_sc(&phi),
            ModelSpec::sc(),
        );
    }
    for threads in 2..=5 {
        let prog = RandomProgram::generate(threads, 4, 2, 11);
        let h = simulate(&prog, SimModel::Pso, 11);
        measure(&format!("pso run, {threads} threads"), &h, ModelSpec::pso());
    }
}
