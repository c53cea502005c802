use permprime::chain::{
    construct_g1, construct_g2, construct_g3, g2_classes, g2_size, verify_chain, TupleVertex,
};
use permprime::digraph::{classify, components, induced, Digraph};
use permprime::{Config, Error};

fn chain2() -> Digraph {
    Digraph::from_edges(2, &[(0, 0), (0, 1), (1, 1)]).unwrap()
}

/// 0 -> 1 -> 2 with loops and no shortcut.
fn chain3() -> Digraph {
    Digraph::from_edges(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]).unwrap()
}

#[test]
fn summary_matches_materialized_g2() {
    let cfg = Config::default();
    for g0 in [chain2(), chain3()] {
        let g1 = construct_g1(&g0).unwrap();
        let parts = components(&g1.digraph);
        for (r, block) in parts.blocks.iter().enumerate() {
            if classify(&induced(&g1.digraph, block).unwrap()).complete {
                continue;
            }
            let g2 = construct_g2(&g1.digraph, r, &cfg).unwrap();
            assert_eq!(g2.vertices.len() as u128, g2_size(&g1.digraph, block));
            let classes = g2_classes(&g1.digraph, block);
            let comps: u128 = classes.iter().map(|c| c.multiplicity).sum();
            assert_eq!(comps, components(&g2.digraph).len() as u128);
        }
    }
}

#[test]
fn g1_contains_the_asymmetry_tuples() {
    let g1 = construct_g1(&chain3()).unwrap();
    for (a, b) in [(0, 1), (1, 2)] {
        let v = g1.index_of(TupleVertex { a, b, c: b, d: b }).unwrap();
        let w = g1.index_of(TupleVertex { a, b: a, c: a, d: b }).unwrap();
        assert!(!g1.digraph.has_edge(v, w));
    }
    // (0,2) is not an edge of chain3, so no tuple starts 0 and ends 2
    assert!(g1.tuples.iter().all(|t| !(t.a == 0 && t.d == 2)));
}

#[test]
fn chain_passes_for_several_sizes() {
    let cfg = Config::default();
    for n in 1..=3 {
        let rep = verify_chain(&chain3(), &chain2(), n, &cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.first_failure());
        assert_eq!(rep.product_components, n * rep.g3_components);
    }
}

#[test]
fn g2_respects_the_cap() {
    let cfg = Config {
        materialization_cap: 44,
        ..Config::default()
    };
    let g1 = construct_g1(&chain2()).unwrap();
    match construct_g2(&g1.digraph, 1, &cfg) {
        Err(Error::Resource { required, .. }) => assert_eq!(required, 45),
        other => panic!("{other:?}"),
    }
}

#[test]
fn g3_needs_universal_vertices() {
    let cfg = Config::default();
    let err = construct_g3(&chain3(), &chain2(), &cfg).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}
