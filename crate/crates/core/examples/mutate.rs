//! Manufacturing inconsistent histories by rewiring reads of consistent ones.
//!
//! Run with `cargo run --example mutate`.

use mmcheck::simgen::{mutate, simulate, RandomProgram, SimModel};
use mmcheck::{derive, solve, History, ModelSpec};

fn consistent(h: &History, spec: ModelSpec) -> bool {
    let m = derive(h, &spec).expect("model derives");
    solve(h, &m).expect("small history").outcome.is_consistent()
}

fn main() {
    for model in SimModel::ALL {
        let (mut mutants, mut rejected) = (0, 0);
        for seed in 0..300 {
            let prog = RandomProgram::generate(3, 3, 2, seed);
            let h = simulate(&prog, model, seed);
            assert!(consistent(&h, model.spec()));
            if let Ok(m) = mutate(&h, seed) {
                mutants += 1;
                rejected += usize::from(!consistent(&m, model.spec()));
            }
        }
        println!("{model}: {rejected} of {mutants} mutants inconsistent");
    }

    let prog = RandomProgram::generate(2, 3, 1, 5);
    let h = simulate(&prog, SimModel::Sc, 5);
    let m = mutate(&h, 5).expect("a read with two candidate writers");
    println!("original:\n{h}\nmutant:\n{m}");
}
