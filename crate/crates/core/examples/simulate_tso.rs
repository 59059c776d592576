//! Running a random program on the TSO store-buffer machine.
//!
//! Run with `cargo run --example simulate_tso -- [seed]`.

use mmcheck::simgen::{simulate, Instr, RandomProgram, SimModel};
use mmcheck::{derive, solve, ModelSpec};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("seed"))
        .unwrap_or(3);
    let prog = RandomProgram::generate(2, 3, 2, seed);
    let h = simulate(&prog, SimModel::Tso, seed);
    print!("{h}");
    for spec in ModelSpec::ALL {
        let m = derive(&h, &spec).expect("model derives");
        println!("{spec}: {}", solve(&h, &m).expect("small history").outcome);
    }

    // Store buffering: each thread writes one variable, then reads the
    // other. Only a machine with buffers can let both reads miss.
    let prog = RandomProgram {
        threads: vec![
            vec![Instr::Write { var: 0, val: 1 }, Instr::Read { var: 1 }],
            vec![Instr::Write { var: 1, val: 1 }, Instr::Read { var: 0 }],
        ],
        vars: 2,
        seed,
    };
    let runs = 2000;
    let relaxed = (0..runs)
        .filter(|&s| {
            let h = simulate(&prog, SimModel::Tso, s);
            let m = derive(&h, &ModelSpec::sc()).expect("model derives");
            !solve(&h, &m)
                .expect("small history")
                .outcome
                .is_consistent()
        })
        .count();
    println!("{relaxed} of {runs} TSO runs are not sequentially consistent");
}
