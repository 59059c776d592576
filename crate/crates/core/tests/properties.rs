use mmcheck::graph::EventGraph;
use mmcheck::models::{derive, ModelSpec};
use mmcheck::oracle::{induced_write_orders, oracle_store};
use mmcheck::simgen::{mutate, random_history, simulate, HistoryShape, RandomProgram, SimModel};
use mmcheck::solver::{solve, witness_graphs};
use mmcheck::{parse_history, EventId, History, Relation};
use proptest::prelude::*;

/// Recursive three-colour DFS, written independently of the library.
fn dfs_has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    fn visit(u: usize, adj: &[Vec<usize>], colour: &mut [u8]) -> bool {
        colour[u] = 1;
        for &v in &adj[u] {
            if colour[v] == 1 || (colour[v] == 0 && visit(v, adj, colour)) {
                return true;
            }
        }
        colour[u] = 2;
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut colour = vec![0u8; n];
    (0..n).any(|u| colour[u] == 0 && visit(u, &adj, &mut colour))
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=12).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.2), n * n).prop_map(move |bits| {
            let edges = bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| (i / n, i % n))
                .collect();
            (n, edges)
        })
    })
}

fn corpus_history() -> impl Strategy<Value = History> {
    any::<u64>().prop_map(|seed| random_history(&HistoryShape::default(), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn kahn_agrees_with_dfs((n, edges) in random_graph()) {
        let mut g = EventGraph::new(n);
        for &(a, b) in &edges {
            g.add_edge(EventId(a), EventId(b));
        }
        prop_assert_eq!(g.is_acyclic(), !dfs_has_cycle(n, &edges));
        if let Some(cycle) = g.find_cycle() {
            for i in 0..cycle.len() {
                let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                prop_assert!(g.has_edge(a, b));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn program_order_is_a_strict_partial_order(h in corpus_history()) {
        prop_assert!(h.po().is_irreflexive());
        prop_assert!(h.po().compose(h.po()).is_subset(h.po()));
    }

    #[test]
    fn reads_from_is_a_function_into_reads(h in corpus_history()) {
        prop_assert_eq!(h.rf().len(), h.reads().count());
        prop_assert_eq!(&h.infer_rf().unwrap(), h.rf());
        for (w, r) in h.rf().iter() {
            let (w, r) = (h.event(w), h.event(r));
            prop_assert!(w.is_write() && r.is_read());
            prop_assert_eq!((w.var, w.val), (r.var, r.val));
        }
        prop_assert_eq!(&h.rf().inverse().inverse(), h.rf());
    }

    #[test]
    fn model_relations_shrink_along_the_chain(h in corpus_history()) {
        let [sc, tso, pso, rmo] = ModelSpec::ALL.map(|s| derive(&h, &s).unwrap());
        prop_assert!(pso.po_mm.is_subset(&tso.po_mm));
        prop_assert!(tso.po_mm.is_subset(&sc.po_mm));
        prop_assert!(rmo.po_mm.is_subset(h.po()));
        prop_assert!(tso.rf_mm.is_subset(&sc.rf_mm));
        prop_assert_eq!(&pso.rf_mm, &tso.rf_mm);
        prop_assert!(rmo.po_loc_effective.is_subset(&sc.po_loc_effective));
    }

    #[test]
    fn traces_round_trip_byte_identically(h in corpus_history()) {
        let text = h.to_trace();
        let back = parse_history(&text).unwrap();
        prop_assert_eq!(back.to_trace(), text);
        prop_assert_eq!(back, h);
    }

    #[test]
    fn store_order_extensions_pass_both_graphs(h in corpus_history(), seed in any::<u64>()) {
        for spec in ModelSpec::ALL {
            let m = derive(&h, &spec).unwrap();
            let Some(order) = oracle_store(&h, &m).unwrap().store_order else { continue };
            for tw in induced_write_orders(&h, &m, &order, 10, seed) {
                let (loc, mm) = witness_graphs(&h, &m, &tw).unwrap();
                prop_assert!(loc.is_acyclic(), "{} loc {:?}", spec, tw);
                prop_assert!(mm.is_acyclic(), "{} mm {:?}", spec, tw);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), threads in 1usize..4, events in 1usize..5, vars in 1usize..3) {
        let prog = RandomProgram::generate(threads, events, vars, seed);
        for model in SimModel::ALL {
            prop_assert_eq!(simulate(&prog, model, seed).to_trace(), simulate(&prog, model, seed).to_trace());
        }
    }

    #[test]
    fn mutation_keeps_histories_well_formed(seed in any::<u64>()) {
        let prog = RandomProgram::generate(2, 4, 1, seed);
        let h = simulate(&prog, SimModel::Tso, seed);
        if let Ok(m) = mutate(&h, seed) {
            prop_assert_eq!(m.n(), h.n());
            let differing = h.reads().zip(m.reads()).filter(|(a, b)| a.val != b.val).count();
            prop_assert_eq!(differing, 1);
            prop_assert_eq!(&parse_history(&m.to_trace()).unwrap(), &m);
        }
    }

    #[test]
    fn solver_is_deterministic(h in corpus_history()) {
        for spec in ModelSpec::ALL {
            let m = derive(&h, &spec).unwrap();
            prop_assert_eq!(solve(&h, &m).unwrap(), solve(&h, &m).unwrap());
        }
    }
}

#[test]
fn relation_inverse_is_an_involution() {
    let r = Relation::from_pairs(4, [(EventId(0), EventId(3)), (EventId(2), EventId(1))]);
    assert_eq!(r.inverse().inverse(), r);
    assert!(r.inverse().contains(EventId(3), EventId(0)));
}
