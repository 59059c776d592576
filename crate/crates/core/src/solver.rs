//! Subset dynamic programming over write sets.
//!
//! `T[V]` holds when the writes in `V` admit a total order, placed above all
//! remaining writes, that keeps both the per-location graph and the model
//! graph acyclic. It satisfies
//!
//! ```text
//! T[∅] = G_loc(∅) and G_mm(∅) acyclic
//! T[V] = ⋁_{v ∈ V}  G_loc[V∖{v}, v] acyclic ∧ G_mm[V∖{v}, v] acyclic ∧ T[V∖{v}]
//! ```
//!
//! and the history is consistent iff `T[WR]`. Evaluation is top-down from
//! the full set with both outcomes memoized, so at most `2^k` entries are
//! ever computed. Each successful entry records the `v` it removed; walking
//! those choices from `WR` down to `∅` lists the writes from smallest to
//! largest, which is the witness order.

use std::collections::HashMap;
use std::fmt;

use crate::error::SolveError;
use crate::graph::{build_base_graphs, CoherenceContext, EventGraph, Scratch, WriteSubset};
use crate::history::{EventId, History, Relation};
use crate::models::{oota_cycle, DerivedModel};

pub const DEFAULT_MAX_K: usize = 30;

/// Masks are 64-bit words.
pub const MAX_SUPPORTED_K: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub max_k: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_k: DEFAULT_MAX_K,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Consistent,
    Inconsistent,
}

impl Outcome {
    pub fn is_consistent(self) -> bool {
        self == Outcome::Consistent
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Consistent => "consistent",
            Outcome::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// The per-location (uniprocessor) graph.
    Loc,
    /// The model graph.
    Mm,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Loc => "loc",
            GraphKind::Mm => "mm",
        })
    }
}

/// Why a history was found inconsistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostics {
    /// A base graph is cyclic before any write order is chosen.
    BaseCycle {
        graph: GraphKind,
        cycle: Vec<EventId>,
    },
    /// `dp ∪ rf` has a cycle.
    OutOfThinAir { cycle: Vec<EventId> },
    /// Every candidate write order closes a cycle.
    NoWriteOrder,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Distinct table entries computed, `∅` included.
    pub subsets_evaluated: u64,
    /// Coherence-graph pairs constructed.
    pub graphs_built: u64,
    pub kahn_runs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Writes in ascending order; present iff consistent.
    pub witness: Option<Vec<EventId>>,
    pub diagnostics: Option<Diagnostics>,
    pub stats: SolveStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    /// `T[∅] = 1`: the base graphs are acyclic.
    Base,
    /// Consistent by removing the write in this slot first.
    Consistent(usize),
    Inconsistent,
}

/// The memo table `T`, keyed by write-subset mask.
#[derive(Clone, Debug, Default)]
pub struct DpTable {
    memo: HashMap<u64, Entry>,
    stats: SolveStats,
}

impl DpTable {
    pub fn get(&self, subset: WriteSubset) -> Option<Entry> {
        self.memo.get(&subset.0).copied()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }
}

pub fn solve(h: &History, m: &DerivedModel) -> Result<Verdict, SolveError> {
    solve_with(h, m, &SolverConfig::default())
}

pub fn solve_with(
    h: &History,
    m: &DerivedModel,
    config: &SolverConfig,
) -> Result<Verdict, SolveError> {
    let (verdict, _) = solve_table(h, m, config)?;
    Ok(verdict)
}

/// Like [`solve_with`], also returning the evaluated table.
pub fn solve_table(
    h: &History,
    m: &DerivedModel,
    config: &SolverConfig,
) -> Result<(Verdict, DpTable), SolveError> {
    let k = h.k();
    let cap = config.max_k.min(MAX_SUPPORTED_K);
    if k > cap {
        return Err(SolveError::KTooLarge { k, cap });
    }

    if m.spec.requires_oota {
        if let Some(cycle) = oota_cycle(h) {
            return Ok((
                inconsistent(Diagnostics::OutOfThinAir { cycle }, SolveStats::default()),
                DpTable::default(),
            ));
        }
    }

    let mut table = DpTable::default();
    table.stats.subsets_evaluated = 1;
    let (loc, mm) = build_base_graphs(h, m);
    table.stats.kahn_runs += 2;
    for (graph, g) in [(GraphKind::Loc, &loc), (GraphKind::Mm, &mm)] {
        if let Some(cycle) = g.find_cycle() {
            table.memo.insert(0, Entry::Inconsistent);
            let stats = table.stats;
            return Ok((
                inconsistent(Diagnostics::BaseCycle { graph, cycle }, stats),
                table,
            ));
        }
    }
    // T[∅] = 1; the base graphs are subgraphs of every coherence graph, so
    // entry ∅ never needs re-evaluation.
    table.memo.insert(0, Entry::Base);

    let mut run = Run {
        ctx: CoherenceContext::new(h, m),
        table,
        scratch: Scratch::default(),
    };
    let full = WriteSubset::full(k);
    let ok = run.eval(full);
    let table = run.table;
    let stats = table.stats;
    debug_assert!(k >= 64 || stats.subsets_evaluated <= 1u64 << k);

    if !ok {
        return Ok((inconsistent(Diagnostics::NoWriteOrder, stats), table));
    }
    let witness = extract_witness(&table, h)?;
    if !verify_witness(h, m, &witness)? {
        return Err(SolveError::InternalWitnessInvalid);
    }
    Ok((
        Verdict {
            outcome: Outcome::Consistent,
            witness: Some(witness),
            diagnostics: None,
            stats,
        },
        table,
    ))
}

fn inconsistent(d: Diagnostics, stats: SolveStats) -> Verdict {
    Verdict {
        outcome: Outcome::Inconsistent,
        witness: None,
        diagnostics: Some(d),
        stats,
    }
}

struct Run<'h> {
    ctx: CoherenceContext<'h>,
    table: DpTable,
    scratch: Scratch,
}

impl Run<'_> {
    fn eval(&mut self, subset: WriteSubset) -> bool {
        if let Some(e) = self.table.memo.get(&subset.0) {
            return *e != Entry::Inconsistent;
        }
        self.table.stats.subsets_evaluated += 1;
        let mut choice = None;
        for slot in subset.slots() {
            let rest = subset.without(slot);
            if self.table.memo.get(&rest.0) == Some(&Entry::Inconsistent) {
                continue;
            }
            let out = self.ctx.check(rest, slot, &mut self.scratch);
            self.table.stats.graphs_built += 1;
            self.table.stats.kahn_runs += u64::from(out.kahn_runs);
            if out.both_acyclic() && self.eval(rest) {
                choice = Some(slot);
                break;
            }
        }
        let entry = choice.map_or(Entry::Inconsistent, Entry::Consistent);
        self.table.memo.insert(subset.0, entry);
        choice.is_some()
    }
}

/// Reads the witness order off an evaluated table: each recorded removal is
/// the minimum of the remaining writes.
pub fn extract_witness(table: &DpTable, h: &History) -> Result<Vec<EventId>, SolveError> {
    let mut subset = WriteSubset::full(h.k());
    let mut order = Vec::with_capacity(h.k());
    while !subset.is_empty() {
        match table.get(subset) {
            Some(Entry::Consistent(slot)) if subset.contains(slot) => {
                order.push(h.writes()[slot]);
                subset = subset.without(slot);
            }
            _ => return Err(SolveError::InternalWitnessInvalid),
        }
    }
    Ok(order)
}

/// The total write order `tw` as a relation (every earlier write before
/// every later one).
pub fn total_order_relation(h: &History, tw: &[EventId]) -> Relation {
    Relation::from_pairs(
        h.n(),
        tw.iter()
            .enumerate()
            .flat_map(|(i, &a)| tw[i + 1..].iter().map(move |&b| (a, b))),
    )
}

/// Builds `(G_loc, G_mm)` for a complete write order:
///
/// ```text
/// G_loc = po-loc ∪ rf    ∪ tw ∪ cf
/// G_mm  = po-mm  ∪ rf-mm ∪ tw ∪ cf,   cf = rf⁻¹ ∘ ⋃ₓ twₓ
/// ```
pub fn witness_graphs(
    h: &History,
    m: &DerivedModel,
    tw: &[EventId],
) -> Result<(EventGraph, EventGraph), SolveError> {
    check_permutation(h, tw)?;
    let tw_rel = total_order_relation(h, tw);
    let per_var = h
        .restrict_var(&tw_rel)
        .into_iter()
        .fold(Relation::empty(h.n()), |acc, r| acc.union(&r));
    let cf = h.rf().inverse().compose(&per_var);

    let mut loc = EventGraph::new(h.n());
    for rel in [&m.po_loc_effective, h.rf(), &tw_rel, &cf] {
        loc.add_relation(rel);
    }
    let mut mm = EventGraph::new(h.n());
    for rel in [&m.po_mm, &m.rf_mm, &tw_rel, &cf] {
        mm.add_relation(rel);
    }
    Ok((loc, mm))
}

/// Whether both graphs built from `tw` are acyclic.
pub fn verify_witness(h: &History, m: &DerivedModel, tw: &[EventId]) -> Result<bool, SolveError> {
    let (loc, mm) = witness_graphs(h, m, tw)?;
    Ok(loc.is_acyclic() && mm.is_acyclic())
}

fn check_permutation(h: &History, tw: &[EventId]) -> Result<(), SolveError> {
    let mut seen = vec![false; h.k()];
    for &w in tw {
        let slot = (w.index() < h.n())
            .then(|| h.write_slot(w))
            .flatten()
            .ok_or_else(|| SolveError::NotAPermutation(format!("{w} is not a write")))?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(SolveError::NotAPermutation(format!(
                "{} appears twice",
                h.event_ref(w)
            )));
        }
    }
    if let Some(slot) = seen.iter().position(|s| !s) {
        return Err(SolveError::NotAPermutation(format!(
            "{} is missing",
            h.event_ref(h.writes()[slot])
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::parse_history;
    use crate::models::{derive, ModelSpec};

    const SB: &str = "init: x=0 y=0\nthread T0\nwr x 1\nrd y 0\nthread T1\nwr y 1\nrd x 0\n";
    const MP: &str = "init: x=0 y=0\nthread T0\nwr x 1\nwr y 1\nthread T1\nrd y 1\nrd x 0\n";

    fn check(text: &str, spec: ModelSpec) -> Verdict {
        let h = parse_history(text).unwrap();
        let m = derive(&h, &spec).unwrap();
        solve(&h, &m).unwrap()
    }

    #[test]
    fn empty_history_is_consistent() {
        for spec in ModelSpec::ALL {
            let v = check("", spec);
            assert_eq!(v.outcome, Outcome::Consistent);
            assert_eq!(v.witness, Some(vec![]));
        }
    }

    #[test]
    fn single_write_witness() {
        let v = check("thread T0\nwr x 1\n", ModelSpec::sc());
        assert_eq!(v.witness, Some(vec![EventId(0)]));
    }

    #[test]
    fn store_buffering() {
        assert_eq!(check(SB, ModelSpec::sc()).outcome, Outcome::Inconsistent);
        let v = check(SB, ModelSpec::tso());
        assert_eq!(v.outcome, Outcome::Consistent);
        assert_eq!(v.witness.as_ref().unwrap().len(), 4);
    }

    #[test]
    fn message_passing() {
        assert_eq!(check(MP, ModelSpec::tso()).outcome, Outcome::Inconsistent);
        assert_eq!(check(MP, ModelSpec::pso()).outcome, Outcome::Consistent);
    }

    #[test]
    fn base_cycle_is_diagnosed() {
        // A read that po-precedes its own source in the same thread.
        let v = check("thread T0\nrd x 1\nwr x 1\n", ModelSpec::sc());
        match v.diagnostics {
            Some(Diagnostics::BaseCycle { graph, cycle }) => {
                assert_eq!(graph, GraphKind::Loc);
                assert_eq!(cycle.len(), 2);
            }
            other => panic!("unexpected diagnostics {other:?}"),
        }
    }

    #[test]
    fn thin_air_short_circuits_under_rmo() {
        let text = "thread T0\nrd x 1\nwr y 1\nthread T1\nrd y 1\nwr x 1\n\
                    dp T0:0 -> T0:1\ndp T1:0 -> T1:1\n";
        let v = check(text, ModelSpec::rmo());
        assert!(matches!(
            v.diagnostics,
            Some(Diagnostics::OutOfThinAir { .. })
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let h = parse_history(SB).unwrap();
        let m = derive(&h, &ModelSpec::sc()).unwrap();
        let err = solve_with(&h, &m, &SolverConfig { max_k: 3 }).unwrap_err();
        assert_eq!(err, SolveError::KTooLarge { k: 4, cap: 3 });
        assert!(err.to_string().contains('3') && err.to_string().contains('4'));
    }

    #[test]
    fn verify_witness_examples() {
        let h = History::empty();
        let m = derive(&h, &ModelSpec::sc()).unwrap();
        assert!(verify_witness(&h, &m, &[]).unwrap());

        // w1 = T0:0, w2 = T1:0; T2 reads w2 then w1. Both orders by hand:
        //   w1 < w2: T2:1 -cf-> w2 -rf-> T2:0 -po-> T2:1, a cycle.
        //   w2 < w1: T2:0 -cf-> w1 -rf-> T2:1, acyclic.
        let h = parse_history("thread T0\nwr x 1\nthread T1\nwr x 2\nthread T2\nrd x 2\nrd x 1\n")
            .unwrap();
        let m = derive(&h, &ModelSpec::sc()).unwrap();
        assert!(!verify_witness(&h, &m, &[EventId(0), EventId(1)]).unwrap());
        assert!(verify_witness(&h, &m, &[EventId(1), EventId(0)]).unwrap());
    }

    #[test]
    fn verify_witness_rejects_non_permutations() {
        let h = parse_history(SB).unwrap();
        let m = derive(&h, &ModelSpec::sc()).unwrap();
        for bad in [
            vec![EventId(0)],
            vec![EventId(0), EventId(0), EventId(1), EventId(2)],
            vec![EventId(0), EventId(1), EventId(2), EventId(3)],
        ] {
            assert!(matches!(
                verify_witness(&h, &m, &bad),
                Err(SolveError::NotAPermutation(_))
            ));
        }
    }

    #[test]
    fn deterministic_witness() {
        let a = check(SB, ModelSpec::tso());
        let b = check(SB, ModelSpec::tso());
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn subsets_bounded() {
        for text in [SB, MP] {
            for spec in ModelSpec::ALL {
                let v = check(text, spec);
                assert!(v.stats.subsets_evaluated <= 1 << 4);
            }
        }
    }
}
