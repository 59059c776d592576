use std::collections::BTreeSet;
use std::fmt;

/// Dense index of an event inside one history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub usize);

impl EventId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A binary relation over the events `0..n` of a history.
///
/// The pair set is kept sorted and deduplicated; forward and backward
/// adjacency lists are derived from it at construction and never diverge,
/// since a `Relation` is immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    pairs: BTreeSet<(EventId, EventId)>,
    succ: Vec<Vec<EventId>>,
    pred: Vec<Vec<EventId>>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Self::from_set(n, BTreeSet::new())
    }

    /// Builds a relation over `n` events. Duplicate pairs collapse.
    ///
    /// Panics if a pair references an event outside `0..n`.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (EventId, EventId)>,
    {
        Self::from_set(n, pairs.into_iter().collect())
    }

    fn from_set(n: usize, pairs: BTreeSet<(EventId, EventId)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            assert!(
                a.index() < n && b.index() < n,
                "pair ({a}, {b}) outside universe of {n} events"
            );
            succ[a.index()].push(b);
            pred[b.index()].push(a);
        }
        Self {
            n,
            pairs,
            succ,
            pred,
        }
    }

    /// Number of events in the universe (not the number of pairs).
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: EventId, b: EventId) -> bool {
        self.pairs.contains(&(a, b))
    }

    /// Pairs in ascending lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (EventId, EventId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn successors(&self, e: EventId) -> &[EventId] {
        &self.succ[e.index()]
    }

    pub fn predecessors(&self, e: EventId) -> &[EventId] {
        &self.pred[e.index()]
    }

    /// `{(a, c) | (a, b) ∈ self, (b, c) ∈ other}`.
    pub fn compose(&self, other: &Relation) -> Relation {
        assert_eq!(
            self.n, other.n,
            "composing relations over different universes"
        );
        let mut out = BTreeSet::new();
        for &(a, b) in &self.pairs {
            for &c in other.successors(b) {
                out.insert((a, c));
            }
        }
        Self::from_set(self.n, out)
    }

    pub fn inverse(&self) -> Relation {
        Self::from_set(self.n, self.pairs.iter().map(|&(a, b)| (b, a)).collect())
    }

    pub fn union(&self, other: &Relation) -> Relation {
        assert_eq!(
            self.n, other.n,
            "union of relations over different universes"
        );
        Self::from_set(self.n, self.pairs.union(&other.pairs).copied().collect())
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        assert_eq!(self.n, other.n);
        Self::from_set(
            self.n,
            self.pairs.difference(&other.pairs).copied().collect(),
        )
    }

    pub fn filter<F>(&self, mut keep: F) -> Relation
    where
        F: FnMut(EventId, EventId) -> bool,
    {
        Self::from_set(
            self.n,
            self.pairs
                .iter()
                .copied()
                .filter(|&(a, b)| keep(a, b))
                .collect(),
        )
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn is_irreflexive(&self) -> bool {
        self.pairs.iter().all(|&(a, b)| a != b)
    }

    /// `rel⁺`, computed by a BFS from every event.
    ///
    /// Quadratic in the worst case; intended for explain output and tests.
    pub fn transitive_closure(&self) -> Relation {
        let mut out = BTreeSet::new();
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        for start in 0..self.n {
            seen.iter_mut().for_each(|s| *s = false);
            stack.clear();
            stack.extend(self.succ[start].iter().copied());
            while let Some(e) = stack.pop() {
                if seen[e.index()] {
                    continue;
                }
                seen[e.index()] = true;
                out.insert((EventId(start), e));
                stack.extend(self.succ[e.index()].iter().copied());
            }
        }
        Self::from_set(self.n, out)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.pairs.iter().map(|(a, b)| (a.0, b.0)))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> Relation {
        Relation::from_pairs(n, pairs.iter().map(|&(a, b)| (EventId(a), EventId(b))))
    }

    #[test]
    fn compose_with_empty_is_empty() {
        let r = rel(3, &[(0, 1), (1, 2)]);
        assert!(Relation::empty(3).compose(&r).is_empty());
        assert!(r.compose(&Relation::empty(3)).is_empty());
    }

    #[test]
    fn inverse_flips_pairs() {
        assert_eq!(rel(3, &[(1, 2)]).inverse(), rel(3, &[(2, 1)]));
    }

    #[test]
    fn compose_chains_through_middle() {
        let a = rel(4, &[(0, 1), (0, 2)]);
        let b = rel(4, &[(1, 3), (2, 3)]);
        assert_eq!(a.compose(&b), rel(4, &[(0, 3)]));
    }

    #[test]
    fn adjacency_matches_pairs() {
        let r = rel(3, &[(0, 1), (0, 1), (2, 1)]);
        assert_eq!(r.len(), 2);
        assert_eq!(r.successors(EventId(0)), &[EventId(1)]);
        assert_eq!(r.predecessors(EventId(1)), &[EventId(0), EventId(2)]);
    }

    #[test]
    fn closure_of_chain() {
        let c = rel(3, &[(0, 1), (1, 2)]).transitive_closure();
        assert_eq!(c, rel(3, &[(0, 1), (0, 2), (1, 2)]));
    }
}
