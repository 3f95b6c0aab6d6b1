use std::collections::BTreeMap;

use loccert::cert::{Certificate, Value};
use loccert::ef::ef_equivalent;
use loccert::generate::{connected_graphs, random_bounded_treedepth_graph, random_connected_graph};
use loccert::kernel::{end_type_consistency_check, k_reduce};
use loccert::logic::{evaluate_with, random_sentence, Structure};
use loccert::treedepth::{compute_treedepth_exact, is_coherent, is_valid_model, make_coherent, Model};
use loccert::{parse_formula, Graph, NodeId, Sentence};
use proptest::prelude::*;

fn sentence(depth: usize, seed: u64) -> Sentence {
    random_sentence(&mut loccert::generate::rng_for(seed), depth)
}

/// A graph on the same vertices with identifiers permuted.
fn shuffled(g: &Graph, seed: u64) -> Graph {
    use rand::seq::SliceRandom;
    let mut ids: Vec<NodeId> = g.ids().to_vec();
    ids.shuffle(&mut loccert::generate::rng_for(seed));
    let map: BTreeMap<NodeId, NodeId> = g.ids().iter().copied().zip(ids).collect();
    g.relabel(&map).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printer_round_trips(depth in 0usize..4, seed in any::<u64>()) {
        let s = sentence(depth, seed);
        let text = s.formula().to_string();
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(&back, s.formula(), "{}", text);
    }

    #[test]
    fn prenex_preserves_truth_and_depth_count(depth in 0usize..4, seed in any::<u64>(), gseed in any::<u64>(), n in 1usize..6) {
        let s = sentence(depth, seed);
        let p = s.to_prenex();
        let g = random_connected_graph(n, gseed).unwrap();
        prop_assert_eq!(s.evaluate(&g), p.evaluate(&g));
        prop_assert_eq!(s.formula().quantifier_count(), p.formula().quantifier_count());
        let (prefix, matrix) = p.formula().prenex_parts();
        prop_assert_eq!(matrix.quantifier_depth(), 0);
        prop_assert_eq!(prefix.len(), p.quantifier_depth());
    }

    #[test]
    fn evaluation_ignores_identifiers(depth in 0usize..4, seed in any::<u64>(), gseed in any::<u64>(), n in 1usize..7) {
        let s = sentence(depth, seed);
        let g = random_connected_graph(n, gseed).unwrap();
        prop_assert_eq!(s.evaluate(&g), s.evaluate(&shuffled(&g, seed)));
    }

    #[test]
    fn ef_symmetric_and_monotone(a in 0usize..21, b in 0usize..21) {
        let five = connected_graphs(5);
        let (g, h) = (&five[a], &five[b]);
        let mut prev = true;
        for k in 0..=3 {
            let gh = ef_equivalent(g, h, k).unwrap();
            prop_assert_eq!(gh, ef_equivalent(h, g, k).unwrap());
            prop_assert!(prev || !gh, "equivalence at {} rounds but not fewer", k);
            prev = gh;
        }
    }

    #[test]
    fn ef_agrees_with_sampled_sentences(a in 0usize..21, b in 0usize..21, seed in any::<u64>()) {
        let five = connected_graphs(5);
        let (g, h) = (&five[a], &five[b]);
        for k in 1..=2 {
            if ef_equivalent(g, h, k).unwrap() {
                let report = loccert::ef::sample_sentence_check(g, h, k, 50, seed);
                prop_assert!(report.is_empty(), "{}", report.distinguishing[0].0.formula());
            }
        }
    }

    #[test]
    fn serialization_is_exact(values in proptest::collection::vec((0u64..1000, 10u32..16), 0..8), bits in proptest::collection::vec(any::<bool>(), 0..20)) {
        let mut c = Certificate::new();
        for (i, (v, w)) in values.iter().enumerate() {
            c.push(&format!("f{i}"), Value::uint(*v, *w));
        }
        c.push("b", Value::Bits { bits: bits.clone(), len_width: 5 });
        c.push("l", Value::List { items: values.iter().map(|x| x.0).collect(), item_width: 10, len_width: 4 });
        let nested = Certificate::new().with("inner", Value::Sub { cert: c.clone() });
        prop_assert_eq!(c.to_bits().len(), c.size_bits());
        prop_assert_eq!(nested.to_bits().len(), nested.size_bits());
        prop_assert_eq!(nested.size_bits(), c.size_bits());
    }

    #[test]
    fn kernels_are_consistent_and_idempotent(t in 1usize..4, n in 1usize..13, seed in any::<u64>(), k in 1usize..4) {
        let (g, m) = random_bounded_treedepth_graph(t, n, seed).unwrap();
        let r = k_reduce(&g, &m, k).unwrap();
        prop_assert!(end_type_consistency_check(&r));
        prop_assert!(r.exactly_k_check());
        prop_assert!(r.prune_log.windows(2).all(|w| w[0].1 >= w[1].1));
        let again = k_reduce(&r.kernel, &r.kernel_model(), k).unwrap();
        prop_assert!(again.prune_log.is_empty());
        prop_assert_eq!(&again.kernel, &r.kernel);
        let twice = k_reduce(&g, &m, k).unwrap();
        prop_assert_eq!(twice.prune_log, r.prune_log);
        prop_assert_eq!(twice.end_type, r.end_type);
    }

    #[test]
    fn coherence_repair(n in 2usize..10, seed in any::<u64>()) {
        use rand::Rng;
        let g = random_connected_graph(n, seed).unwrap();
        // any linear order of the vertices is a valid model
        let mut order = g.ids().to_vec();
        let mut rng = loccert::generate::rng_for(seed ^ 1);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let parents = order.iter().enumerate().map(|(i, &v)| (v, order[i.saturating_sub(1)])).collect();
        let m = Model::from_parents(parents).unwrap();
        let c = make_coherent(&g, &m).unwrap();
        prop_assert!(is_valid_model(&g, &c, m.height()).unwrap());
        prop_assert!(is_coherent(&g, &c));
        if is_coherent(&g, &m) {
            prop_assert_eq!(c, m);
        }
    }

    #[test]
    fn exact_models_are_valid_and_coherent(n in 1usize..11, seed in any::<u64>()) {
        let g = random_connected_graph(n, seed).unwrap();
        let (t, m) = compute_treedepth_exact(&g).unwrap();
        prop_assert!(is_valid_model(&g, &m, t).unwrap());
        prop_assert_eq!(m.height(), t);
        prop_assert!(is_coherent(&g, &m));
    }
}

#[test]
fn free_variables_need_assignment() {
    let g = Graph::path(2);
    let f = parse_formula("x ~ y").unwrap();
    let a: BTreeMap<String, usize> = [("x".to_string(), 0), ("y".to_string(), 1)].into();
    assert!(evaluate_with(&g, &f, &a).unwrap());
    assert!(g.related(0, 1));
}
