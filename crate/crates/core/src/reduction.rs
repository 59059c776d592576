//! 3SAT to consistency: formulas compiled into histories whose consistency
//! matches satisfiability.
//!
//! For every propositional variable `x` there are two single-write threads
//! choosing its value (`wr x 0`, `wr x 1`; the one ordered last wins). For
//! every literal `ℓ` over `x` two guarded threads copy that choice into a
//! history variable for the literal, writing `c` when `x` reads 0 and `d`
//! when it reads 1 (`c, d = 0, 1` for `x`, `1, 0` for `¬x`). Each clause
//! `ℓ₁ ∨ ℓ₂ ∨ ℓ₃` contributes three two-read threads that close a cycle
//! when all three literals end at 0.
//!
//! The clause gadgets do not compose exactly. Each pair of false literals
//! that are cyclically adjacent in a clause orders their final writes, so
//! two satisfied clauses listing the same false pair in opposite cyclic
//! directions also close a cycle; a literal repeated within a clause pins
//! its own write order. Such satisfiable formulas compile to inconsistent
//! histories (see `tests/reduction.rs`).
//!
//! [`sat_to_history_sc`] targets SC. [`sat_to_history_relaxed`] moves the
//! trailing guard read of each literal thread into a separate thread, so
//! the history has no write→read or write→write program order and its
//! TSO, PSO and SC graphs coincide.
//!
//! History variables are named `x<i>` for propositional variables and
//! `p<i>`/`n<i>` for positive/negative literals.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::ReductionError;
use crate::history::{History, HistoryBuilder};

/// Largest variable count accepted by [`sat_brute_force`].
pub const BRUTE_FORCE_MAX_VARS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Self {
        Self {
            var,
            positive: false,
        }
    }

    fn from_dimacs(lit: i64) -> Self {
        Self {
            var: lit.unsigned_abs() as usize,
            positive: lit > 0,
        }
    }

    fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    /// History variable holding this literal's value.
    pub fn history_var(self) -> String {
        format!("{}{}", if self.positive { 'p' } else { 'n' }, self.var)
    }

    /// `(c, d)`: values written when the variable reads 0 and 1.
    fn guarded_values(self) -> (u64, u64) {
        if self.positive {
            (0, 1)
        } else {
            (1, 0)
        }
    }

    fn eval(self, assignment: u64) -> bool {
        (assignment >> (self.var - 1) & 1 == 1) == self.positive
    }
}

/// A CNF formula whose clauses have exactly three literal slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Self {
        debug_assert!(clauses
            .iter()
            .flatten()
            .all(|l| (1..=num_vars).contains(&l.var)));
        Self { num_vars, clauses }
    }

    /// Distinct signed literals that occur, ordered by variable, positive
    /// before negative.
    pub fn literals(&self) -> Vec<Literal> {
        let set: BTreeSet<(usize, bool)> = self
            .clauses
            .iter()
            .flatten()
            .map(|l| (l.var, !l.positive))
            .collect();
        set.into_iter()
            .map(|(var, neg)| Literal {
                var,
                positive: !neg,
            })
            .collect()
    }

    /// Writes in either reduced history: `2n + 2|L|`.
    pub fn expected_writes(&self) -> usize {
        2 * self.num_vars + 2 * self.literals().len()
    }

    pub fn eval(&self, assignment: u64) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!(
                "{} {} {} 0\n",
                c[0].to_dimacs(),
                c[1].to_dimacs(),
                c[2].to_dimacs()
            ));
        }
        out
    }

    /// Uniformly random 3-literal clauses over `num_vars` variables.
    pub fn random<R: Rng + ?Sized>(num_vars: usize, num_clauses: usize, rng: &mut R) -> Self {
        let clauses = (0..num_clauses)
            .map(|_| {
                std::array::from_fn(|_| Literal {
                    var: rng.gen_range(1..=num_vars),
                    positive: rng.gen_bool(0.5),
                })
            })
            .collect();
        Self::new(num_vars, clauses)
    }

    /// Random clauses over three distinct variables each, in random order
    /// and with random signs. Needs `num_vars >= 3`.
    pub fn random_distinct<R: Rng + ?Sized>(
        num_vars: usize,
        num_clauses: usize,
        rng: &mut R,
    ) -> Self {
        assert!(num_vars >= 3, "three distinct variables per clause");
        let clauses = (0..num_clauses)
            .map(|_| {
                let vars = rand::seq::index::sample(rng, num_vars, 3);
                std::array::from_fn(|i| Literal {
                    var: vars.index(i) + 1,
                    positive: rng.gen_bool(0.5),
                })
            })
            .collect();
        Self::new(num_vars, clauses)
    }
}

impl fmt::Display for Cnf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}

pub fn parse_dimacs(text: &str) -> Result<Cnf3, ReductionError> {
    let malformed = |m: String| ReductionError::MalformedDimacs(m);
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<[Literal; 3]> = Vec::new();
    let mut current: Vec<i64> = Vec::new();

    'lines: for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(malformed("duplicate problem line".into()));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts[..] {
                ["cnf", n, m] => {
                    let n = n
                        .parse()
                        .map_err(|_| malformed(format!("bad variable count `{n}`")))?;
                    let m = m
                        .parse()
                        .map_err(|_| malformed(format!("bad clause count `{m}`")))?;
                    header = Some((n, m));
                }
                _ => return Err(malformed(format!("bad problem line `{line}`"))),
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(malformed("clause before problem line".into()));
        };
        for tok in line.split_whitespace() {
            if tok.starts_with('%') {
                break 'lines;
            }
            let lit: i64 = tok
                .parse()
                .map_err(|_| malformed(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                if current.len() != 3 {
                    return Err(ReductionError::NotThreeSat {
                        clause: clauses.len() + 1,
                        len: current.len(),
                    });
                }
                clauses.push([
                    Literal::from_dimacs(current[0]),
                    Literal::from_dimacs(current[1]),
                    Literal::from_dimacs(current[2]),
                ]);
                current.clear();
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(malformed(format!("literal {lit} exceeds {n} variables")));
                }
                current.push(lit);
            }
        }
    }
    let Some((n, m)) = header else {
        return Err(malformed("missing problem line".into()));
    };
    if !current.is_empty() {
        return Err(ReductionError::NotThreeSat {
            clause: clauses.len() + 1,
            len: current.len(),
        });
    }
    if clauses.len() != m {
        return Err(malformed(format!(
            "header declares {m} clauses, found {}",
            clauses.len()
        )));
    }
    Ok(Cnf3::new(n, clauses))
}

fn variable_threads(b: &mut HistoryBuilder, phi: &Cnf3) {
    for i in 1..=phi.num_vars {
        let x = format!("x{i}");
        b.thread(&format!("T0_{x}")).write(&x, 0);
        b.thread(&format!("T1_{x}")).write(&x, 1);
    }
}

fn clause_threads(b: &mut HistoryBuilder, phi: &Cnf3) {
    for (j, c) in phi.clauses.iter().enumerate() {
        let [l1, l2, l3] = c.map(Literal::history_var);
        let j = j + 1;
        b.thread(&format!("C{j}_1")).read(&l3, 0).read(&l1, 1);
        b.thread(&format!("C{j}_2")).read(&l1, 0).read(&l2, 1);
        b.thread(&format!("C{j}_3")).read(&l2, 0).read(&l3, 1);
    }
}

/// The SC reduction: literal threads `[rd x 0; wr ℓ c; rd x 0]` and
/// `[rd x 1; wr ℓ d; rd x 1]`.
pub fn sat_to_history_sc(phi: &Cnf3) -> History {
    let mut b = HistoryBuilder::new();
    variable_threads(&mut b, phi);
    for lit in phi.literals() {
        let (x, l) = (format!("x{}", lit.var), lit.history_var());
        let (c, d) = lit.guarded_values();
        b.thread(&format!("T0_{l}"))
            .read(&x, 0)
            .write(&l, c)
            .read(&x, 0);
        b.thread(&format!("T1_{l}"))
            .read(&x, 1)
            .write(&l, d)
            .read(&x, 1);
    }
    clause_threads(&mut b, phi);
    b.build().expect("reduction emits a well-formed history")
}

/// The TSO/PSO reduction: each literal contributes `[rd x 0; wr ℓ c]`,
/// `[rd x 1; wr ℓ d]`, `[rd ℓ c; rd x 0]` and `[rd ℓ d; rd x 1]`.
pub fn sat_to_history_relaxed(phi: &Cnf3) -> History {
    let mut b = HistoryBuilder::new();
    variable_threads(&mut b, phi);
    for lit in phi.literals() {
        let (x, l) = (format!("x{}", lit.var), lit.history_var());
        let (c, d) = lit.guarded_values();
        b.thread(&format!("T0_{l}")).read(&x, 0).write(&l, c);
        b.thread(&format!("T1_{l}")).read(&x, 1).write(&l, d);
        b.thread(&format!("T0'_{l}")).read(&l, c).read(&x, 0);
        b.thread(&format!("T1'_{l}")).read(&l, d).read(&x, 1);
    }
    clause_threads(&mut b, phi);
    b.build().expect("reduction emits a well-formed history")
}

/// Exhaustive satisfiability check over all `2^n` assignments.
pub fn sat_brute_force(phi: &Cnf3) -> Result<bool, ReductionError> {
    if phi.num_vars > BRUTE_FORCE_MAX_VARS {
        return Err(ReductionError::TooManyVars {
            n: phi.num_vars,
            cap: BRUTE_FORCE_MAX_VARS,
        });
    }
    Ok((0..1u64 << phi.num_vars).any(|a| phi.eval(a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{parse_history, EventKind};
    use rand::SeedableRng;

    fn unit(l: Literal) -> [Literal; 3] {
        [l, l, l]
    }

    #[test]
    fn dimacs_examples() {
        let phi = parse_dimacs("p cnf 1 1\n1 1 1 0\n").unwrap();
        assert_eq!(phi.num_vars, 1);
        assert_eq!(phi.clauses, vec![unit(Literal::pos(1))]);
        assert_eq!(phi.literals().len(), 1);

        let phi = parse_dimacs("c comment\np cnf 3 1\n1 2 3 0\n").unwrap();
        assert_eq!(phi.literals().len(), 3);

        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2 0\n"),
            Err(ReductionError::NotThreeSat { clause: 1, len: 2 })
        ));
    }

    #[test]
    fn dimacs_errors() {
        for bad in [
            "1 2 3 0\n",
            "p cnf 2 1\n1 2 3 0\n",
            "p cnf 3 2\n1 2 3 0\n",
            "p cnf 3 1\n1 x 3 0\n",
            "p dnf 3 1\n1 2 3 0\n",
        ] {
            assert!(
                matches!(parse_dimacs(bad), Err(ReductionError::MalformedDimacs(_))),
                "{bad:?}"
            );
        }
        assert!(parse_dimacs("p cnf 3 1\n1 -2\n3 0\n%\n0\n").is_ok());
    }

    #[test]
    fn dimacs_round_trip() {
        let phi = Cnf3::new(
            3,
            vec![
                [Literal::pos(1), Literal::neg(2), Literal::pos(3)],
                unit(Literal::neg(3)),
            ],
        );
        assert_eq!(parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }

    #[test]
    fn clause_threads_form_a_read_cycle() {
        let (a, b, c) = (Literal::pos(1), Literal::neg(2), Literal::pos(3));
        let phi = Cnf3::new(3, vec![[a, b, c]]);
        let h = sat_to_history_sc(&phi);
        let t = h.threads().iter().position(|t| t == "C1_1").unwrap();
        let evs: Vec<(EventKind, &str, u64)> = h
            .thread_events(crate::history::ThreadId(t))
            .iter()
            .map(|&e| {
                let e = h.event(e);
                (e.kind, h.var_name(e.var), e.val)
            })
            .collect();
        assert_eq!(
            evs,
            vec![(EventKind::Read, "p3", 0), (EventKind::Read, "p1", 1)]
        );
    }

    #[test]
    fn negative_literal_writes_one_when_variable_is_zero() {
        let phi = Cnf3::new(1, vec![unit(Literal::neg(1))]);
        let h = sat_to_history_sc(&phi);
        let text = h.to_trace();
        assert!(text.contains("thread T0_n1\nrd x1 0\nwr n1 1\nrd x1 0\n"));
        assert!(text.contains("thread T1_n1\nrd x1 1\nwr n1 0\nrd x1 1\n"));
    }

    #[test]
    fn sizes() {
        // n = 1, |L| = 1, m = 1:
        //   variables 2 events, literals 2 threads × 3, clauses 3 threads × 2
        let phi = Cnf3::new(1, vec![unit(Literal::pos(1))]);
        let h = sat_to_history_sc(&phi);
        assert_eq!(h.k(), 4);
        assert_eq!(h.n(), 2 + 6 + 6);
        let h = sat_to_history_relaxed(&phi);
        assert_eq!(h.k(), 4);
        assert_eq!(h.n(), 2 + 8 + 6);
    }

    #[test]
    fn relaxed_has_no_write_first_po_pairs() {
        let phi = Cnf3::new(
            3,
            vec![
                [Literal::pos(1), Literal::neg(2), Literal::pos(3)],
                [Literal::neg(1), Literal::neg(1), Literal::pos(2)],
            ],
        );
        let h = sat_to_history_relaxed(&phi);
        assert!(h.po().iter().all(|(a, _)| !h.event(a).is_write()));
        let round = parse_history(&h.to_trace()).unwrap();
        assert_eq!(round.to_trace(), h.to_trace());
    }

    #[test]
    fn brute_force_examples() {
        let sat = Cnf3::new(1, vec![unit(Literal::pos(1))]);
        assert!(sat_brute_force(&sat).unwrap());
        let unsat = Cnf3::new(1, vec![unit(Literal::pos(1)), unit(Literal::neg(1))]);
        assert!(!sat_brute_force(&unsat).unwrap());
        let big = Cnf3::new(21, vec![]);
        assert!(matches!(
            sat_brute_force(&big),
            Err(ReductionError::TooManyVars { n: 21, .. })
        ));
    }

    #[test]
    fn distinct_clauses_use_three_variables() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let phi = Cnf3::random_distinct(3, 3, &mut rng);
            for c in &phi.clauses {
                assert!(c[0].var != c[1].var && c[1].var != c[2].var && c[0].var != c[2].var);
            }
        }
    }
}
