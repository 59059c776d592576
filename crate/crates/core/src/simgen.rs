//! Corpus generation: operational store-buffer machines and mutation.
//!
//! [`simulate`] runs a [`RandomProgram`] on an SC, TSO or PSO machine under
//! a seeded, uniformly random scheduler and records the resulting history,
//! which is consistent under the generating model by construction.
//! [`mutate`] rewires one read to a different writer, producing histories
//! that are often inconsistent. [`random_history`] draws arbitrary small
//! histories (consistent or not) directly.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ModelError, SimError};
use crate::history::{EventId, EventRef, History, HistoryBuilder};
use crate::models::{ModelKind, ModelSpec};

/// Models with an operational machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SimModel {
    Sc,
    Tso,
    Pso,
}

impl SimModel {
    pub const ALL: [SimModel; 3] = [SimModel::Sc, SimModel::Tso, SimModel::Pso];

    pub fn spec(self) -> ModelSpec {
        match self {
            SimModel::Sc => ModelSpec::sc(),
            SimModel::Tso => ModelSpec::tso(),
            SimModel::Pso => ModelSpec::pso(),
        }
    }
}

impl fmt::Display for SimModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.spec().name())
    }
}

impl FromStr for SimModel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<ModelSpec>()?.kind {
            ModelKind::Sc => Ok(SimModel::Sc),
            ModelKind::Tso => Ok(SimModel::Tso),
            ModelKind::Pso => Ok(SimModel::Pso),
            ModelKind::Rmo => Err(ModelError::UnknownModel(format!(
                "{s} (no operational machine; use sc, tso or pso)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    Write { var: usize, val: u64 },
    Read { var: usize },
}

/// A straight-line program per thread over variables `x0..x{vars-1}`,
/// all initialized to 0. Every write stores a value fresh for its variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomProgram {
    pub threads: Vec<Vec<Instr>>,
    pub vars: usize,
    pub seed: u64,
}

impl RandomProgram {
    pub fn generate(threads: usize, events_per_thread: usize, vars: usize, seed: u64) -> Self {
        assert!(vars > 0, "programs need at least one variable");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next_val = vec![1u64; vars];
        let threads = (0..threads)
            .map(|_| {
                (0..events_per_thread)
                    .map(|_| {
                        let var = rng.gen_range(0..vars);
                        if rng.gen_bool(0.5) {
                            let val = next_val[var];
                            next_val[var] += 1;
                            Instr::Write { var, val }
                        } else {
                            Instr::Read { var }
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            threads,
            vars,
            seed,
        }
    }

    pub fn var_name(var: usize) -> String {
        format!("x{var}")
    }
}

/// Machine state during one simulation.
#[derive(Clone, Debug)]
pub struct MachineState {
    /// Current value and writer per variable.
    pub memory: Vec<(u64, EventRef)>,
    /// Per-thread store buffer: one FIFO for TSO, one per variable for PSO
    /// (indexed by variable), none for SC.
    pub buffers: Vec<Vec<VecDeque<(usize, u64, EventRef)>>>,
    pub pcs: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Advance(usize),
    Flush(usize, usize),
}

fn thread_name(t: usize) -> String {
    format!("T{t}")
}

/// Runs `prog` under `model` with a seeded uniform scheduler and returns
/// the observed history. Reads see the thread's newest buffered write to
/// the variable if there is one, otherwise memory.
pub fn simulate(prog: &RandomProgram, model: SimModel, seed: u64) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nthreads = prog.threads.len();
    let buffer_count = match model {
        SimModel::Sc => 0,
        SimModel::Tso => 1,
        SimModel::Pso => prog.vars,
    };
    let mut st = MachineState {
        memory: (0..prog.vars)
            .map(|x| (0, EventRef::new("init", x)))
            .collect(),
        buffers: vec![vec![VecDeque::new(); buffer_count]; nthreads],
        pcs: vec![0; nthreads],
    };
    // Observed (value, source) for each read, by thread and position.
    let mut observed: Vec<Vec<Option<(u64, EventRef)>>> =
        prog.threads.iter().map(|t| vec![None; t.len()]).collect();

    let mut steps = Vec::new();
    loop {
        steps.clear();
        for t in 0..nthreads {
            if st.pcs[t] < prog.threads[t].len() {
                steps.push(Step::Advance(t));
            }
            for (b, buf) in st.buffers[t].iter().enumerate() {
                if !buf.is_empty() {
                    steps.push(Step::Flush(t, b));
                }
            }
        }
        let Some(&step) = steps.choose(&mut rng) else {
            break;
        };
        match step {
            Step::Advance(t) => {
                let pos = st.pcs[t];
                st.pcs[t] += 1;
                let me = EventRef::new(thread_name(t), pos);
                match prog.threads[t][pos] {
                    Instr::Write { var, val } => match model {
                        SimModel::Sc => st.memory[var] = (val, me),
                        SimModel::Tso => st.buffers[t][0].push_back((var, val, me)),
                        SimModel::Pso => st.buffers[t][var].push_back((var, val, me)),
                    },
                    Instr::Read { var } => {
                        let buffered = st.buffers[t]
                            .iter()
                            .flat_map(|b| b.iter())
                            .rfind(|(v, _, _)| *v == var)
                            .map(|(_, val, w)| (*val, w.clone()));
                        observed[t][pos] = Some(buffered.unwrap_or_else(|| st.memory[var].clone()));
                    }
                }
            }
            Step::Flush(t, b) => {
                let (var, val, w) = st.buffers[t][b].pop_front().expect("enabled flush");
                st.memory[var] = (val, w);
            }
        }
    }

    let mut b = HistoryBuilder::new();
    for x in 0..prog.vars {
        b.init(&RandomProgram::var_name(x), 0);
    }
    for (t, instrs) in prog.threads.iter().enumerate() {
        b.thread(&thread_name(t));
        for (pos, ins) in instrs.iter().enumerate() {
            match *ins {
                Instr::Write { var, val } => b.write(&RandomProgram::var_name(var), val),
                Instr::Read { var } => {
                    let (val, _) = observed[t][pos].as_ref().expect("every read executed");
                    b.read(&RandomProgram::var_name(var), *val)
                }
            };
        }
    }
    let h = b.build().expect("simulated histories are data-independent");
    debug_assert!(h.reads().all(|r| {
        let (_, src) = observed[r.thread.0 - 1][r.pos].as_ref().unwrap();
        h.source_of(r.id) == h.resolve(src)
    }));
    h
}

/// Rewires one uniformly chosen read (among those whose variable has more
/// than one writer) to a different writer, adjusting the read's value.
pub fn mutate(h: &History, seed: u64) -> Result<History, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<EventId> = h
        .reads()
        .filter(|r| h.writes_on(r.var).nth(1).is_some())
        .map(|r| r.id)
        .collect();
    let &read = candidates
        .choose(&mut rng)
        .ok_or(SimError::NoAlternativeWriter)?;
    let current = h.source_of(read);
    let others: Vec<EventId> = h
        .writes_on(h.event(read).var)
        .filter(|&w| Some(w) != current)
        .collect();
    let &writer = others.choose(&mut rng).expect("variable has two writers");
    Ok(h.with_rewired_read(read, writer)?)
}

/// Bounds for [`random_history`]. Event and write counts include initial
/// writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistoryShape {
    pub max_threads: usize,
    pub max_events: usize,
    pub max_writes: usize,
    pub max_vars: usize,
    /// Draw dependency edges from reads to later events in the same thread.
    pub with_dp: bool,
}

impl Default for HistoryShape {
    fn default() -> Self {
        Self {
            max_threads: 3,
            max_events: 8,
            max_writes: 4,
            max_vars: 2,
            with_dp: true,
        }
    }
}

/// Draws an arbitrary small history. Reads pick their source uniformly among
/// all writes to their variable, so the result may well be inconsistent.
pub fn random_history(shape: &HistoryShape, seed: u64) -> History {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.gen_range(1..=shape.max_vars.max(1));
    let with_init = vars <= shape.max_writes && vars < shape.max_events && rng.gen_bool(0.5);
    let init_count = if with_init { vars } else { 0 };
    let budget = rng.gen_range(1..=shape.max_events.saturating_sub(init_count).max(1));
    let nthreads = rng.gen_range(1..=shape.max_threads.max(1));

    // (is_write, var, value)
    let mut threads: Vec<Vec<(bool, usize, u64)>> = vec![Vec::new(); nthreads];
    let mut next_val = vec![1u64; vars];
    let mut writes = init_count;
    for _ in 0..budget {
        let t = rng.gen_range(0..nthreads);
        let var = rng.gen_range(0..vars);
        if writes < shape.max_writes && rng.gen_bool(0.5) {
            threads[t].push((true, var, next_val[var]));
            next_val[var] += 1;
            writes += 1;
        } else {
            threads[t].push((false, var, 0));
        }
    }

    // Writers per variable as (value) candidates; init writes value 0.
    let mut writers: Vec<Vec<u64>> = (0..vars)
        .map(|_| if with_init { vec![0] } else { Vec::new() })
        .collect();
    for ev in threads.iter().flatten() {
        if ev.0 {
            writers[ev.1].push(ev.2);
        }
    }
    for ev in threads.iter_mut().flatten().filter(|e| !e.0) {
        if writers[ev.1].is_empty() {
            match (0..vars).find(|&x| !writers[x].is_empty()) {
                Some(x) => ev.1 = x,
                None => continue,
            }
        }
        ev.2 = *writers[ev.1].choose(&mut rng).expect("non-empty");
    }

    let mut b = HistoryBuilder::new();
    if with_init {
        for x in 0..vars {
            b.init(&RandomProgram::var_name(x), 0);
        }
    }
    let mut dp = Vec::new();
    let mut tid = 0;
    for evs in &threads {
        // Reads with no writer anywhere are dropped.
        let evs: Vec<_> = evs
            .iter()
            .filter(|e| e.0 || !writers[e.1].is_empty())
            .collect();
        if evs.is_empty() {
            continue;
        }
        let name = thread_name(tid);
        tid += 1;
        b.thread(&name);
        for (pos, &&(is_write, var, val)) in evs.iter().enumerate() {
            let var = RandomProgram::var_name(var);
            if is_write {
                b.write(&var, val);
            } else {
                b.read(&var, val);
                if shape.with_dp {
                    for later in pos + 1..evs.len() {
                        if rng.gen_bool(0.3) {
                            dp.push((
                                EventRef::new(name.clone(), pos),
                                EventRef::new(name.clone(), later),
                            ));
                        }
                    }
                }
            }
        }
    }
    for (a, c) in dp {
        b.dp(a, c);
    }
    b.build().expect("generated histories are well-formed")
}
