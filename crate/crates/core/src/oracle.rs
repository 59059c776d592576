//! Brute-force deciders used as ground truth for the solver.
//!
//! [`oracle_total`] enumerates every total order of the writes and accepts
//! the first one that passes [`verify_witness`]. [`oracle_store`] enumerates
//! store orders (one total order per variable, none across variables) and
//! checks the from-read graphs with its own cycle detector. Both are
//! exponential on purpose and refuse inputs past fixed bounds.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::history::{EventId, History, Relation, VarId};
use crate::models::DerivedModel;
use crate::solver::{verify_witness, Outcome};

/// Largest `k` accepted by [`oracle_total`] (`8! = 40320` orders).
pub const TOTAL_ORACLE_MAX_K: usize = 8;

/// Largest number of store orders [`oracle_store`] will enumerate.
pub const STORE_ORACLE_LIMIT: u128 = 1_000_000;

/// One total order per variable over that variable's writes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreOrder {
    /// Indexed by [`VarId`]; each list is ascending in the order.
    pub per_var: Vec<Vec<EventId>>,
}

impl StoreOrder {
    /// `ww = ⋃ₓ wwₓ` as a relation.
    pub fn relation(&self, h: &History) -> Relation {
        Relation::from_pairs(
            h.n(),
            self.per_var.iter().flat_map(|order| {
                order
                    .iter()
                    .enumerate()
                    .flat_map(move |(i, &a)| order[i + 1..].iter().map(move |&b| (a, b)))
            }),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub outcome: Outcome,
    /// First accepted total write order (total-order oracle only).
    pub witness: Option<Vec<EventId>>,
    /// First accepted store order (store-order oracle only).
    pub store_order: Option<StoreOrder>,
    /// Candidate orders examined.
    pub explored: u64,
}

impl OracleVerdict {
    fn rejected(explored: u64) -> Self {
        Self {
            outcome: Outcome::Inconsistent,
            witness: None,
            store_order: None,
            explored,
        }
    }
}

/// Decides consistency by trying every permutation of the writes in
/// lexicographic order of write ids.
pub fn oracle_total(h: &History, m: &DerivedModel) -> Result<OracleVerdict, OracleError> {
    let k = h.k();
    if k > TOTAL_ORACLE_MAX_K {
        return Err(OracleError::KTooLargeForOracle {
            k,
            cap: TOTAL_ORACLE_MAX_K,
        });
    }
    if m.spec.requires_oota && has_cycle(h.n(), &[h.dp(), h.rf()]) {
        return Ok(OracleVerdict::rejected(0));
    }
    let mut explored = 0;
    for tw in h.writes().iter().copied().permutations(k) {
        explored += 1;
        if verify_witness(h, m, &tw)? {
            return Ok(OracleVerdict {
                outcome: Outcome::Consistent,
                witness: Some(tw),
                store_order: None,
                explored,
            });
        }
    }
    Ok(OracleVerdict::rejected(explored))
}

/// Number of store orders of `h`, saturating.
pub fn store_order_count(h: &History) -> u128 {
    (0..h.vars().len())
        .map(|x| factorial(h.writes_on(VarId(x)).count()))
        .fold(1u128, |acc, f| acc.saturating_mul(f))
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |acc, i| acc.saturating_mul(i))
}

/// Decides validity by enumerating store orders: one permutation of
/// `WR(x)` per variable, combined by Cartesian product.
pub fn oracle_store(h: &History, m: &DerivedModel) -> Result<OracleVerdict, OracleError> {
    let size = store_order_count(h);
    if size > STORE_ORACLE_LIMIT {
        return Err(OracleError::SearchSpaceTooLarge {
            size,
            limit: STORE_ORACLE_LIMIT,
        });
    }
    if m.spec.requires_oota && has_cycle(h.n(), &[h.dp(), h.rf()]) {
        return Ok(OracleVerdict::rejected(0));
    }

    let choices: Vec<Vec<Vec<EventId>>> = (0..h.vars().len())
        .map(|x| {
            let ws: Vec<EventId> = h.writes_on(VarId(x)).collect();
            let len = ws.len();
            ws.into_iter().permutations(len).collect()
        })
        .collect();

    let candidates: Box<dyn Iterator<Item = Vec<Vec<EventId>>>> = if choices.is_empty() {
        // No variables: the single, empty store order.
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(
            choices
                .iter()
                .map(|c| c.iter().cloned())
                .multi_cartesian_product(),
        )
    };
    let mut explored = 0;
    for per_var in candidates {
        explored += 1;
        let order = StoreOrder { per_var };
        if store_order_valid(h, m, &order) {
            return Ok(OracleVerdict {
                outcome: Outcome::Consistent,
                witness: None,
                store_order: Some(order),
                explored,
            });
        }
    }
    Ok(OracleVerdict::rejected(explored))
}

/// `fr = rf⁻¹ ∘ ww`.
pub fn from_read(h: &History, ww: &Relation) -> Relation {
    h.rf().inverse().compose(ww)
}

/// Whether both `po-loc ∪ rf ∪ ww ∪ fr` and `po-mm ∪ rf-mm ∪ ww ∪ fr` are
/// acyclic for the given store order.
pub fn store_order_valid(h: &History, m: &DerivedModel, order: &StoreOrder) -> bool {
    let ww = order.relation(h);
    let fr = from_read(h, &ww);
    !has_cycle(h.n(), &[&m.po_loc_effective, h.rf(), &ww, &fr])
        && !has_cycle(h.n(), &[&m.po_mm, &m.rf_mm, &ww, &fr])
}

/// Samples up to `count` linear extensions of the model graph of a valid
/// store order and returns each one restricted to the writes.
///
/// Every such order extends `ww`, so each should pass the per-location
/// check when substituted for the store order.
pub fn induced_write_orders(
    h: &History,
    m: &DerivedModel,
    order: &StoreOrder,
    count: usize,
    seed: u64,
) -> Vec<Vec<EventId>> {
    let n = h.n();
    let ww = order.relation(h);
    let fr = from_read(h, &ww);
    let rels = [&m.po_mm, &m.rf_mm, &ww, &fr];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<EventId>> = Vec::new();
    for _ in 0..count {
        let mut indeg = vec![0usize; n];
        for rel in rels {
            for (_, b) in rel.iter() {
                indeg[b.index()] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut lin = Vec::with_capacity(n);
        while !ready.is_empty() {
            ready.shuffle(&mut rng);
            let u = ready.pop().expect("non-empty");
            lin.push(EventId(u));
            for rel in rels {
                for &v in rel.successors(EventId(u)) {
                    indeg[v.index()] -= 1;
                    if indeg[v.index()] == 0 {
                        ready.push(v.index());
                    }
                }
            }
        }
        if lin.len() != n {
            // Not a valid store order; nothing to extend.
            return Vec::new();
        }
        let tw: Vec<EventId> = lin.into_iter().filter(|&e| h.event(e).is_write()).collect();
        if !out.contains(&tw) {
            out.push(tw);
        }
    }
    out
}

/// Depth-first cycle search over the union of `rels`.
fn has_cycle(n: usize, rels: &[&Relation]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for rel in rels {
        for (a, b) in rel.iter() {
            adj[a.index()].push(b.index());
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut state = vec![0u8; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some((u, i)) = stack.pop() {
            if let Some(&v) = adj[u].get(i) {
                stack.push((u, i + 1));
                match state[v] {
                    0 => {
                        state[v] = 1;
                        stack.push((v, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                state[u] = 2;
            }
        }
    }
    false
}
