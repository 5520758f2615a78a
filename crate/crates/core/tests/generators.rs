mod common;

use common::{has_triangle, is_connected, random_graph, seeded};
use hardcore::generators::{
    bad_vertex_deletion, clique_blowup, cycle, erdos_renyi, kneser, petersen, random_regular, triangle_free_regular,
    GenSpec,
};
use hardcore::{audit, Graph};
use proptest::prelude::*;

#[test]
fn random_regular_is_simple_regular_and_seeded() {
    for (n, d) in [(10, 3), (20, 4), (31, 2), (50, 7), (64, 12)] {
        for seed in 0..5 {
            let g = random_regular(n, d, seed).unwrap();
            assert_eq!(g.n(), n);
            assert!((0..n).all(|v| g.degree(v) == d), "rr({n},{d},{seed})");
            assert_eq!(g.edge_count(), n * d / 2);
            assert_eq!(g, random_regular(n, d, seed).unwrap());
        }
    }
    // different seeds should not all collide
    let distinct: std::collections::HashSet<_> = (0..10).map(|s| random_regular(30, 3, s).unwrap().to_edge_list()).collect();
    assert!(distinct.len() > 1);
}

#[test]
fn impossible_degree_sequences_are_rejected() {
    assert!(random_regular(5, 3, 0).is_err());
    assert!(random_regular(4, 4, 0).is_err());
    // K4 is the only 3-regular graph on 4 vertices
    assert!(triangle_free_regular(4, 3, 0).is_err());
    assert!(random_regular(4, 3, 0).is_ok());
}

#[test]
fn triangle_free_regular_small_and_large() {
    for (n, d) in [(10, 3), (16, 4), (24, 3), (40, 5), (100, 6)] {
        for seed in [1, 2, 3] {
            let g = triangle_free_regular(n, d, seed).unwrap();
            assert!((0..n).all(|v| g.degree(v) == d));
            assert!(!has_triangle(&g));
            let a = audit(&g);
            assert_eq!(a.implied_f, (d * d + 1) as f64);
            assert_eq!(g, triangle_free_regular(n, d, seed).unwrap());
        }
    }
}

#[test]
fn kneser_five_two_is_petersen_like() {
    let g = kneser(5, 2).unwrap();
    let p = petersen();
    assert_eq!(g.n(), 10);
    assert_eq!(g.edge_count(), 15);
    assert!((0..10).all(|v| g.degree(v) == 3 && p.degree(v) == 3));
    assert!(!has_triangle(&g) && !has_triangle(&p));
    assert!(is_connected(&g));
    assert!(kneser(2, 0).is_err());
}

/// Edges inside the neighbourhood of any vertex of the `b`-blow-up of a
/// triangle-free `d`-regular graph, counted directly from the construction:
/// the other `b-1` copies of the vertex form a clique, each of them sees all
/// `bd` neighbour copies, and each neighbour contributes its own `b`-clique.
fn blowup_nbhd_edges(b: u64, d: u64) -> u64 {
    (b - 1) * (b.saturating_sub(2)) / 2 + (b - 1) * b * d + d * b * (b - 1) / 2
}

#[test]
fn blowup_degree_and_neighbourhood_counts() {
    let mut bases: Vec<(Graph, usize)> = (4..=9).map(|n| (cycle(n).unwrap(), 2)).collect();
    bases.push((petersen(), 3));
    bases.push((triangle_free_regular(12, 3, 9).unwrap(), 3));
    bases.push((triangle_free_regular(16, 4, 2).unwrap(), 4));
    for (base, d) in &bases {
        for b in 1..=4usize {
            let g = clique_blowup(base, b).unwrap();
            assert_eq!(g.n(), base.n() * b);
            let a = audit(&g);
            let deg = b * (d + 1) - 1;
            assert!((0..g.n()).all(|v| g.degree(v) == deg));
            assert_eq!(a.max_degree, deg);
            let expect = blowup_nbhd_edges(b as u64, *d as u64);
            assert!(a.nbhd_edges.iter().all(|&e| e == expect), "b = {b}, d = {d}");
            // closed form (b-1)(b-2+3bd)/2
            assert_eq!(2 * expect, (b as u64 - 1) * (b as u64 + 3 * b as u64 * *d as u64 - 2));
            // each triangle seen from its three corners
            assert_eq!(a.triangle_total * 3, expect * g.n() as u64);
        }
    }
    assert!(clique_blowup(&petersen(), 0).is_err());
}

#[test]
fn blowup_spec_labels_and_builds() {
    let spec = GenSpec::Blowup {
        base: Box::new(GenSpec::Cycle { n: 5 }),
        b: 3,
    };
    assert_eq!(spec.label(), "3*C5");
    let g = spec.build().unwrap();
    assert_eq!(g.n(), 15);
    let json = serde_json::to_string(&spec).unwrap();
    let back: GenSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);
    let noted = GenSpec::TriangleFreeRegular { n: 10, d: 3, seed: 1 }.generate().unwrap();
    assert!(noted.note.is_some());
}

#[test]
fn deletion_leaves_local_sparsity() {
    let mut rng = seeded(44);
    for _ in 0..30 {
        let g = random_graph(25, 0.3, &mut rng);
        if g.max_degree() == 0 {
            continue;
        }
        let (f, eps) = (8.0, 0.5);
        let del = bad_vertex_deletion(&g, f, eps).unwrap();
        let a = audit(&g);
        assert_eq!(del.bad.len() + del.kept.len(), g.n());
        for &v in &del.bad {
            assert!(a.nbhd_edges[v] as f64 > del.threshold);
        }
        for &v in &del.kept {
            assert!(a.nbhd_edges[v] as f64 <= del.threshold);
        }
        // removing vertices only removes triangles
        let rest = audit(&del.remaining);
        for (i, &v) in del.kept.iter().enumerate() {
            assert!(rest.nbhd_edges[i] <= a.nbhd_edges[v]);
        }
    }
    assert!(bad_vertex_deletion(&Graph::empty(3), 2.0, 0.1).is_err());
    assert!(bad_vertex_deletion(&cycle(5).unwrap(), 2.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn few_bad_vertices_when_triangles_are_few(n in 8usize..40, p in 0.05f64..0.6, seed in any::<u64>(), eps in 0.2f64..1.0) {
        let g = erdos_renyi(n, p, seed).unwrap();
        prop_assume!(g.max_degree() > 0);
        let a = audit(&g);
        let d2 = (a.max_degree * a.max_degree) as f64;
        // the largest f with triangle_total <= Δ² n / f
        let f = if a.triangle_total == 0 { d2 + 1.0 } else { d2 * n as f64 / a.triangle_total as f64 };
        let del = bad_vertex_deletion(&g, f, eps).unwrap();
        prop_assert!((del.bad.len() as f64) < 3.0 * eps * eps * n as f64);
    }
}
