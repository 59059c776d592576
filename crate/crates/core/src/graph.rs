//! Event graphs, acyclicity, write subsets and coherence graphs.
//!
//! The dynamic programme tests, for a subset `V` of writes and a write
//! `v ∉ V`, whether `v` can be the least element of `V ∪ {v}` while every
//! write outside `V ∪ {v}` is still unordered below it. Two graphs encode
//! that test:
//!
//! ```text
//! G_loc[V,v] = po-loc ∪ rf    ∪ r[V,v] ∪ cf[V,v]
//! G_mm[V,v]  = po-mm  ∪ rf-mm ∪ r[V,v] ∪ cf[V,v]
//!
//! r[V,v]  = {(w̄, w) | w̄ ∉ V∪{v}, w ∈ V∪{v}} ∪ {(v, w) | w ∈ V}
//! cf[V,v] = rf⁻¹ ∘ ⋃ₓ r[V,v]ₓ
//! ```
//!
//! [`EventGraph`] is the general, deduplicated representation used by the
//! public builders. [`CoherenceContext::check`] is the allocation-free path
//! the solver calls once per `(V, v)`; it feeds Kahn's algorithm the same
//! edge sets without deduplication, which does not change the verdict.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use crate::error::GraphError;
use crate::history::{EventId, History, Relation};
use crate::models::DerivedModel;

/// Above this many vertices, edge deduplication switches from a bit matrix
/// to a hash set.
pub const DENSE_DEDUP_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
enum EdgeSet {
    Dense { n: usize, bits: Vec<u64> },
    Sparse(HashSet<(u32, u32)>),
}

impl EdgeSet {
    fn new(n: usize) -> Self {
        if n <= DENSE_DEDUP_LIMIT {
            EdgeSet::Dense {
                n,
                bits: vec![0; (n * n).div_ceil(64)],
            }
        } else {
            EdgeSet::Sparse(HashSet::new())
        }
    }

    /// Returns true if the edge was not present before.
    fn insert(&mut self, u: u32, v: u32) -> bool {
        match self {
            EdgeSet::Dense { n, bits } => {
                let i = u as usize * *n + v as usize;
                let (word, bit) = (i / 64, 1u64 << (i % 64));
                let fresh = bits[word] & bit == 0;
                bits[word] |= bit;
                fresh
            }
            EdgeSet::Sparse(set) => set.insert((u, v)),
        }
    }

    fn contains(&self, u: u32, v: u32) -> bool {
        match self {
            EdgeSet::Dense { n, bits } => {
                let i = u as usize * *n + v as usize;
                bits[i / 64] & (1u64 << (i % 64)) != 0
            }
            EdgeSet::Sparse(set) => set.contains(&(u, v)),
        }
    }
}

/// A directed graph over the events of one history.
#[derive(Clone, Debug)]
pub struct EventGraph {
    adj: Vec<Vec<u32>>,
    in_degree: Vec<u32>,
    edges: EdgeSet,
    edge_count: usize,
}

/// Outcome of a topological sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Acyclicity {
    /// The graph is a DAG; carries one topological order.
    Acyclic(Vec<EventId>),
    Cyclic,
}

impl Acyclicity {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, Acyclicity::Acyclic(_))
    }
}

impl EventGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            in_degree: vec![0; n],
            edges: EdgeSet::new(n),
            edge_count: 0,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Adds `u → v`; returns false if the edge already existed.
    pub fn add_edge(&mut self, u: EventId, v: EventId) -> bool {
        let (a, b) = (u.index() as u32, v.index() as u32);
        if !self.edges.insert(a, b) {
            return false;
        }
        self.adj[u.index()].push(b);
        self.in_degree[v.index()] += 1;
        self.edge_count += 1;
        true
    }

    pub fn add_relation(&mut self, rel: &Relation) {
        for (a, b) in rel.iter() {
            self.add_edge(a, b);
        }
    }

    pub fn has_edge(&self, u: EventId, v: EventId) -> bool {
        self.edges.contains(u.index() as u32, v.index() as u32)
    }

    pub fn in_degree(&self, v: EventId) -> usize {
        self.in_degree[v.index()] as usize
    }

    pub fn successors(&self, u: EventId) -> impl Iterator<Item = EventId> + '_ {
        self.adj[u.index()].iter().map(|&v| EventId(v as usize))
    }

    /// All edges, grouped by source in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (EventId, EventId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (EventId(u), EventId(v as usize))))
    }

    /// Kahn's algorithm. Among ready vertices the smallest id is emitted
    /// first, so the returned order is deterministic.
    pub fn kahn(&self) -> Acyclicity {
        let n = self.vertex_count();
        let mut indeg = self.in_degree.clone();
        let mut ready: BinaryHeap<Reverse<u32>> = (0..n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(u)) = ready.pop() {
            order.push(EventId(u as usize));
            for &v in &self.adj[u as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    ready.push(Reverse(v));
                }
            }
        }
        if order.len() == n {
            Acyclicity::Acyclic(order)
        } else {
            Acyclicity::Cyclic
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.kahn().is_acyclic()
    }

    /// One directed cycle, if the graph has any. Vertices are listed in edge
    /// order; the last one has an edge back to the first.
    pub fn find_cycle(&self) -> Option<Vec<EventId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            OnStack,
            Done,
        }
        let n = self.vertex_count();
        let mut mark = vec![Mark::New; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // (vertex, next successor index)
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::OnStack;
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                if let Some(&v) = self.adj[u].get(*next) {
                    *next += 1;
                    let v = v as usize;
                    match mark[v] {
                        Mark::New => {
                            mark[v] = Mark::OnStack;
                            parent[v] = u;
                            stack.push((v, 0));
                        }
                        Mark::OnStack => {
                            let mut cycle = vec![EventId(u)];
                            let mut w = u;
                            while w != v {
                                w = parent[w];
                                cycle.push(EventId(w));
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[u] = Mark::Done;
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Free-function form of [`EventGraph::kahn`].
pub fn kahn_acyclic(g: &EventGraph) -> Acyclicity {
    g.kahn()
}

/// A subset of the history's writes, one bit per write slot
/// (see [`History::writes`]).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WriteSubset(pub u64);

impl WriteSubset {
    pub const EMPTY: WriteSubset = WriteSubset(0);

    /// All `k` writes. `k` must be at most 64.
    pub fn full(k: usize) -> Self {
        WriteSubset(universe_mask(k))
    }

    pub fn from_slots<I: IntoIterator<Item = usize>>(slots: I) -> Self {
        WriteSubset(slots.into_iter().fold(0, |m, s| m | (1u64 << s)))
    }

    pub fn contains(self, slot: usize) -> bool {
        self.0 >> slot & 1 == 1
    }

    pub fn with(self, slot: usize) -> Self {
        WriteSubset(self.0 | 1u64 << slot)
    }

    pub fn without(self, slot: usize) -> Self {
        WriteSubset(self.0 & !(1u64 << slot))
    }

    /// Complement within the `k`-write universe.
    pub fn complement(self, k: usize) -> Self {
        WriteSubset(!self.0 & universe_mask(k))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Slots in ascending order.
    pub fn slots(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let s = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(s)
        })
    }
}

impl fmt::Debug for WriteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.slots()).finish()
    }
}

fn universe_mask(k: usize) -> u64 {
    assert!(k <= 64, "write subsets hold at most 64 writes");
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn slot_of(h: &History, v: EventId) -> usize {
    h.write_slot(v)
        .unwrap_or_else(|| panic!("event {v} is not a write"))
}

/// Visits every pair of `r[V,v]`.
fn for_each_snapshot_pair(
    h: &History,
    subset: WriteSubset,
    v_slot: usize,
    mut f: impl FnMut(EventId, EventId),
) {
    let writes = h.writes();
    let upper = subset.with(v_slot);
    let lower = upper.complement(writes.len());
    for lo in lower.slots() {
        for hi in upper.slots() {
            f(writes[lo], writes[hi]);
        }
    }
    for hi in subset.slots() {
        f(writes[v_slot], writes[hi]);
    }
}

/// `r[V,v]`: the complement of `V ∪ {v}` below it, and `v` below `V`.
pub fn build_r_snapshot(
    h: &History,
    subset: WriteSubset,
    v: EventId,
) -> Result<Relation, GraphError> {
    let v_slot = slot_of(h, v);
    if subset.contains(v_slot) {
        return Err(GraphError::PreconditionViolated(h.event_ref(v).to_string()));
    }
    let mut pairs = Vec::new();
    for_each_snapshot_pair(h, subset, v_slot, |a, b| pairs.push((a, b)));
    Ok(Relation::from_pairs(h.n(), pairs))
}

/// `(G_loc(∅), G_mm(∅))`: the relation unions with no write order at all.
pub fn build_base_graphs(h: &History, m: &DerivedModel) -> (EventGraph, EventGraph) {
    let mut loc = EventGraph::new(h.n());
    loc.add_relation(&m.po_loc_effective);
    loc.add_relation(h.rf());
    let mut mm = EventGraph::new(h.n());
    mm.add_relation(&m.po_mm);
    mm.add_relation(&m.rf_mm);
    (loc, mm)
}

/// `(G_loc[V,v], G_mm[V,v])`.
pub fn build_coherence_graphs(
    h: &History,
    m: &DerivedModel,
    subset: WriteSubset,
    v: EventId,
) -> Result<(EventGraph, EventGraph), GraphError> {
    CoherenceContext::new(h, m).graphs(subset, v)
}

/// Per-history data shared by every coherence-graph query.
pub struct CoherenceContext<'h> {
    history: &'h History,
    model: &'h DerivedModel,
    /// For each write slot, the slots writing the same variable.
    same_var: Vec<u64>,
    /// For each write slot, the reads it sources.
    readers: Vec<Vec<u32>>,
    loc: Csr,
    mm: Csr,
}

/// Compressed adjacency, used by the allocation-free acyclicity check.
struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
    in_degree: Vec<u32>,
}

impl Csr {
    fn from_relations(n: usize, rels: &[&Relation]) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut in_degree = vec![0u32; n];
        offsets.push(0);
        for u in 0..n {
            for rel in rels {
                for &v in rel.successors(EventId(u)) {
                    targets.push(v.index() as u32);
                    in_degree[v.index()] += 1;
                }
            }
            offsets.push(targets.len() as u32);
        }
        Csr {
            offsets,
            targets,
            in_degree,
        }
    }

    fn successors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }
}

/// Reusable buffers for [`CoherenceContext::check`].
#[derive(Default)]
pub struct Scratch {
    extra: Vec<(u32, u32)>,
    extra_offsets: Vec<u32>,
    extra_targets: Vec<u32>,
    indeg: Vec<u32>,
    stack: Vec<u32>,
}

/// Acyclicity of the two coherence graphs for one `(V, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoherenceOutcome {
    pub loc_acyclic: bool,
    pub mm_acyclic: bool,
    /// Number of Kahn passes performed (the second is skipped when the first
    /// already found a cycle).
    pub kahn_runs: u32,
}

impl CoherenceOutcome {
    pub fn both_acyclic(&self) -> bool {
        self.loc_acyclic && self.mm_acyclic
    }
}

impl<'h> CoherenceContext<'h> {
    pub fn new(history: &'h History, model: &'h DerivedModel) -> Self {
        let k = history.k();
        let writes = history.writes();
        let same_var = (0..k)
            .map(|s| {
                let var = history.event(writes[s]).var;
                (0..k)
                    .filter(|&t| history.event(writes[t]).var == var)
                    .fold(0u64, |m, t| m | 1 << t)
            })
            .collect();
        let mut readers = vec![Vec::new(); k];
        for r in history.reads() {
            let w = history.source_of(r.id).expect("validated history");
            readers[slot_of(history, w)].push(r.id.index() as u32);
        }
        let n = history.n();
        let loc = Csr::from_relations(n, &[&model.po_loc_effective, history.rf()]);
        let mm = Csr::from_relations(n, &[&model.po_mm, &model.rf_mm]);
        Self {
            history,
            model,
            same_var,
            readers,
            loc,
            mm,
        }
    }

    pub fn history(&self) -> &History {
        self.history
    }

    /// Visits every pair of `cf[V,v] = rf⁻¹ ∘ ⋃ₓ r[V,v]ₓ`.
    fn for_each_conflict_pair(
        &self,
        subset: WriteSubset,
        v_slot: usize,
        mut f: impl FnMut(u32, u32),
    ) {
        let writes = self.history.writes();
        let upper = subset.with(v_slot);
        for (src, reads) in self.readers.iter().enumerate() {
            if reads.is_empty() {
                continue;
            }
            // Writes that follow `src` under r[V,v].
            let after = if !upper.contains(src) {
                upper.0
            } else if src == v_slot {
                subset.0
            } else {
                0
            };
            let targets = WriteSubset(after & self.same_var[src]);
            for &r in reads {
                for t in targets.slots() {
                    f(r, writes[t].index() as u32);
                }
            }
        }
    }

    /// The base graphs `G_loc(∅)` and `G_mm(∅)`.
    pub fn base_graphs(&self) -> (EventGraph, EventGraph) {
        build_base_graphs(self.history, self.model)
    }

    /// Materialized coherence graphs for `(V, v)`.
    pub fn graphs(
        &self,
        subset: WriteSubset,
        v: EventId,
    ) -> Result<(EventGraph, EventGraph), GraphError> {
        let h = self.history;
        let v_slot = slot_of(h, v);
        if subset.contains(v_slot) {
            return Err(GraphError::PreconditionViolated(h.event_ref(v).to_string()));
        }
        let (mut loc, mut mm) = self.base_graphs();
        for_each_snapshot_pair(h, subset, v_slot, |a, b| {
            loc.add_edge(a, b);
            mm.add_edge(a, b);
        });
        self.for_each_conflict_pair(subset, v_slot, |r, w| {
            let (r, w) = (EventId(r as usize), EventId(w as usize));
            loc.add_edge(r, w);
            mm.add_edge(r, w);
        });
        Ok((loc, mm))
    }

    /// The conflict relation `cf[V,v]` alone.
    pub fn conflict_relation(&self, subset: WriteSubset, v: EventId) -> Relation {
        let mut pairs = Vec::new();
        self.for_each_conflict_pair(subset, slot_of(self.history, v), |r, w| {
            pairs.push((EventId(r as usize), EventId(w as usize)))
        });
        Relation::from_pairs(self.history.n(), pairs)
    }

    /// Tests both coherence graphs for `(V, v)` without materializing them.
    /// `v_slot` must not be in `subset`.
    pub fn check(
        &self,
        subset: WriteSubset,
        v_slot: usize,
        scratch: &mut Scratch,
    ) -> CoherenceOutcome {
        debug_assert!(!subset.contains(v_slot));
        let writes = self.history.writes();
        let n = self.history.n();

        scratch.extra.clear();
        let upper = subset.with(v_slot);
        let lower = upper.complement(writes.len());
        for lo in lower.slots() {
            for hi in upper.slots() {
                scratch
                    .extra
                    .push((writes[lo].index() as u32, writes[hi].index() as u32));
            }
        }
        for hi in subset.slots() {
            scratch
                .extra
                .push((writes[v_slot].index() as u32, writes[hi].index() as u32));
        }
        let mut extra = std::mem::take(&mut scratch.extra);
        self.for_each_conflict_pair(subset, v_slot, |r, w| extra.push((r, w)));
        scratch.extra = extra;

        // Bucket the extra edges by source.
        scratch.extra_offsets.clear();
        scratch.extra_offsets.resize(n + 1, 0);
        for &(u, _) in &scratch.extra {
            scratch.extra_offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            scratch.extra_offsets[i + 1] += scratch.extra_offsets[i];
        }
        scratch.extra_targets.clear();
        scratch.extra_targets.resize(scratch.extra.len(), 0);
        {
            let mut fill = scratch.extra_offsets.clone();
            for &(u, v) in &scratch.extra {
                scratch.extra_targets[fill[u as usize] as usize] = v;
                fill[u as usize] += 1;
            }
        }

        let loc_acyclic = kahn_with_extra(&self.loc, scratch);
        let mm_acyclic = loc_acyclic && kahn_with_extra(&self.mm, scratch);
        CoherenceOutcome {
            loc_acyclic,
            mm_acyclic,
            kahn_runs: if loc_acyclic { 2 } else { 1 },
        }
    }
}

fn kahn_with_extra(base: &Csr, s: &mut Scratch) -> bool {
    let n = base.in_degree.len();
    s.indeg.clear();
    s.indeg.extend_from_slice(&base.in_degree);
    for &(_, v) in &s.extra {
        s.indeg[v as usize] += 1;
    }
    s.stack.clear();
    s.stack
        .extend((0..n as u32).filter(|&v| s.indeg[v as usize] == 0));
    let mut visited = 0;
    while let Some(u) = s.stack.pop() {
        visited += 1;
        let u = u as usize;
        let extra = &s.extra_targets[s.extra_offsets[u] as usize..s.extra_offsets[u + 1] as usize];
        for &v in base.successors(u).iter().chain(extra) {
            let d = &mut s.indeg[v as usize];
            *d -= 1;
            if *d == 0 {
                s.stack.push(v);
            }
        }
    }
    visited == n
}
