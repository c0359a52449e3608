mod common;

use common::*;
use jci::graph::{
    enumerate_d_statements, functionally_determined, is_d_separated, is_det_separated,
    latent_project, statement_count, DetRelation, DetRelationSet, GraphBuilder, GraphFile, VarKind,
};
use jci::statement::SepKind;
use jci::VarSet;
use proptest::prelude::*;
use rand::Rng;

fn one(v: usize) -> VarSet {
    VarSet::singleton(v)
}

#[test]
fn determined_chain_separations() {
    let (g, det) = determined_chain();
    let [x, y, z, u] = [0, 1, 2, 3];
    for (a, b) in [(y, z), (y, u), (z, u)] {
        assert!(!is_d_separated(&g, one(a), one(b), one(x)).unwrap());
        assert!(is_det_separated(&g, &det, one(a), one(b), one(x)).unwrap());
    }
}

#[test]
fn xor_collider_separations() {
    let (g, det) = xor_collider();
    let [x, y, z, u, s] = [0, 1, 2, 3, 4];
    assert_eq!(det.closure(set(&[s, y])), set(&[s, y, x]));
    for (a, b) in [(x, u), (x, z), (z, u)] {
        assert!(!is_d_separated(&g, one(a), one(b), set(&[s, y])).unwrap());
        assert!(is_det_separated(&g, &det, one(a), one(b), set(&[s, y])).unwrap());
    }
}

#[test]
fn functional_determination() {
    let (g, _) = determined_chain();
    let noiseless = one(1);
    assert!(functionally_determined(&g, 1, one(0), noiseless));
    assert!(!functionally_determined(&g, 2, one(0), noiseless));
    assert!(functionally_determined(&g, 2, one(2), VarSet::EMPTY));
}

#[test]
fn instrumented_chain_statements() {
    let g = instrumented_chain();
    let det = jci_det(&g);
    let stmts = enumerate_d_statements(&g, &det, g.observed(), 1).unwrap();
    let has = |kind: SepKind, a: usize, b: usize, w: VarSet| {
        stmts
            .iter()
            .any(|s| s.kind == kind && s.x == a.min(b) && s.y == a.max(b) && s.w == w)
    };
    let [i1, x1, x2] = [0, 1, 2];
    assert!(has(SepKind::Connected, i1, x1, VarSet::EMPTY));
    assert!(has(SepKind::Connected, i1, x2, VarSet::EMPTY));
    assert!(has(SepKind::Separated, i1, x2, one(x1)));
    assert!(has(SepKind::Connected, i1, x1, one(x2)));
    assert!(has(SepKind::Connected, x1, x2, one(i1)));
    assert!(stmts.iter().all(|s| s.weight.is_infinite()));
}

#[test]
fn statement_count_matches_enumeration() {
    let mut r = rng(3);
    for n in 2..=7 {
        let g = random_dag(&mut r, n, 0.4);
        for k in 0..n - 1 {
            let stmts = enumerate_d_statements(&g, &DetRelationSet::empty(), g.all(), k).unwrap();
            // C(n,2) * sum_{j<=k} C(n-2, j), tallied by hand
            let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
            let expected = binom(n, 2) * (0..=k).map(|j| binom(n - 2, j)).sum::<usize>();
            assert_eq!(stmts.len(), expected);
            assert_eq!(statement_count(n, k), expected);
        }
    }
}

#[test]
fn closure_examples() {
    let rel = |from: &[usize], to: usize| DetRelation {
        determiners: set(from),
        determined: to,
    };
    let det = DetRelationSet::new(vec![rel(&[0], 1), rel(&[1], 2)]).unwrap();
    assert_eq!(det.closure(one(0)), set(&[0, 1, 2]));
    assert_eq!(DetRelationSet::empty().closure(set(&[3, 5])), set(&[3, 5]));
}

#[test]
fn latent_projection_with_observed_intervention() {
    let mut b = GraphBuilder::new();
    let x1 = b.system("X1");
    let x2 = b.system("X2");
    let x3 = b.var("X3", VarKind::Latent);
    let x4 = b.system("X4");
    let i1 = b.system("I1");
    b.edge(x1, x2).edge(x3, x4).edge(i1, x3);
    let a = latent_project(&b.build().unwrap());
    assert!(a.directed.contains(&(i1, x4)));
    assert!(a.directed.contains(&(x1, x2)));
    assert_eq!(a.directed.len(), 2);
    assert!(a.bidirected.is_empty());
    assert!(!a.nodes.contains(x3));
}

#[test]
fn empty_relations_reduce_to_d_separation() {
    let mut r = rng(17);
    let empty = DetRelationSet::empty();
    for _ in 0..1000 {
        let n = r.random_range(3..=7);
        let g = random_dag(&mut r, n, 0.4);
        let x = r.random_range(0..n);
        let y = (x + r.random_range(1..n)) % n;
        let w: VarSet = (0..n)
            .filter(|&v| v != x && v != y && r.random_bool(0.3))
            .collect();
        assert_eq!(
            is_d_separated(&g, one(x), one(y), w).unwrap(),
            is_det_separated(&g, &empty, one(x), one(y), w).unwrap()
        );
    }
}

#[test]
fn d_separation_matches_path_oracle() {
    let mut r = rng(1);
    for _ in 0..100 {
        let n = r.random_range(2..=7);
        let density = r.random_range(0.2..0.7);
        let g = random_dag(&mut r, n, density);
        for (x, y, w) in all_triples(g.all(), n - 2) {
            assert_eq!(
                is_d_separated(&g, one(x), one(y), w).unwrap(),
                path_d_separated(&g, x, y, w)
            );
        }
    }
}

#[test]
fn relation_dropping_is_invisible_on_jci_graphs() {
    let mut r = rng(8);
    for _ in 0..50 {
        let p = r.random_range(1..=3);
        let i = r.random_range(1..=3);
        let latents = r.random_range(0..=1);
        let g = random_jci_graph(&mut r, p, i, latents, 0.5);
        let full = DetRelationSet::jci(0, g.interventions(), true);
        let back = *full
            .relations()
            .iter()
            .find(|rel| rel.determined == 0)
            .unwrap();
        let reduced = full.without(&back);
        let scope = g.observed();
        for (x, y, w) in all_triples(scope, scope.len() - 2) {
            assert_eq!(
                is_det_separated(&g, &full, one(x), one(y), w).unwrap(),
                is_det_separated(&g, &reduced, one(x), one(y), w).unwrap()
            );
        }
    }
}

#[test]
fn graph_file_round_trip() {
    let g = instrumented_shortcut();
    let det = jci_det(&g);
    let text = GraphFile::from_graph(&g, &det).to_json();
    let (g2, det2) = GraphFile::parse(&text).unwrap();
    assert_eq!(g2.edges(), g.edges());
    assert_eq!(det2, det);
    assert!(GraphFile::parse(r#"{"variables":[],"edges":[[0,1]],"det":[]}"#).is_err());
}

fn arb_graph() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn separation_is_symmetric((seed, n) in arb_graph(), wbits in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_dag(&mut r, n, 0.4);
        for x in 0..n {
            for y in 0..n {
                if x == y { continue; }
                let w = VarSet::from_bits(wbits & VarSet::full(n).bits()).without(x).without(y);
                prop_assert_eq!(
                    is_d_separated(&g, one(x), one(y), w).unwrap(),
                    is_d_separated(&g, one(y), one(x), w).unwrap()
                );
            }
        }
    }

    #[test]
    fn determinism_only_adds_separations(seed in any::<u64>(), n in 3usize..=6) {
        let mut r = rng(seed);
        let g = random_dag(&mut r, n, 0.5);
        let from: VarSet = (0..n).filter(|_| r.random_bool(0.4)).collect();
        let to = r.random_range(0..n);
        let det = if from.is_empty() || from.contains(to) {
            DetRelationSet::empty()
        } else {
            DetRelationSet::new(vec![DetRelation { determiners: from, determined: to }]).unwrap()
        };
        for (x, y, w) in all_triples(g.all(), 2) {
            let plain = is_d_separated(&g, one(x), one(y), w).unwrap();
            let det_sep = is_det_separated(&g, &det, one(x), one(y), w).unwrap();
            prop_assert!(!plain || det_sep);
            prop_assert_eq!(det_sep, is_det_separated(&g, &det, one(y), one(x), w).unwrap());
            prop_assert_eq!(det_sep, path_det_separated(&g, &det, x, y, w));
        }
    }

    #[test]
    fn closure_is_a_closure_operator(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let mut r = rng(seed);
        let n = 8;
        let mut rels = Vec::new();
        for to in 0..n {
            if r.random_bool(0.5) {
                let from: VarSet = (0..n).filter(|&v| v != to && r.random_bool(0.3)).collect();
                if !from.is_empty() {
                    rels.push(DetRelation { determiners: from, determined: to });
                }
            }
        }
        let det = DetRelationSet::new(rels).unwrap();
        let mask = VarSet::full(n).bits();
        let small = VarSet::from_bits(a & b & mask);
        let big = VarSet::from_bits(a & mask);
        let c = det.closure(small);
        prop_assert!(small.is_subset(c));
        prop_assert!(c.is_subset(det.closure(big)));
        prop_assert_eq!(det.closure(c), c);
        prop_assert_eq!(c, closure_by_hand(&det, small));
    }
}
