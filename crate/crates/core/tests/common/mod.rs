//! Shared fixtures: a corpus of small graphs up to isomorphism and
//! brute-force reference values computed straight from the definitions.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hardcore::Graph;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(p: i64, r: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(r))
}

fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    b * (b - 1) / 2 + a
}

/// Adjacency bits indexed by [`pair_index`] after relabelling with `perm`.
fn code_under(adj: &[u32], perm: &[usize]) -> u64 {
    let mut code = 0u64;
    for u in 0..adj.len() {
        let mut bits = adj[u];
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if u < v {
                code |= 1 << pair_index(perm[u], perm[v]);
            }
        }
    }
    code
}

/// Smallest code over the relabellings that list vertices in
/// nondecreasing degree order.
fn canonical_code(adj: &[u32]) -> u64 {
    let n = adj.len();
    let deg: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| deg[v]);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match classes.last_mut() {
            Some(c) if deg[c[0]] == deg[v] => c.push(v),
            _ => classes.push(vec![v]),
        }
    }
    let mut best = u64::MAX;
    let mut perm = vec![0usize; n];
    fn recurse(
        classes: &mut [Vec<usize>],
        class: usize,
        offset: usize,
        k: usize,
        perm: &mut [usize],
        adj: &[u32],
        best: &mut u64,
    ) {
        if class == classes.len() {
            *best = (*best).min(code_under(adj, perm));
            return;
        }
        let len = classes[class].len();
        if k == len {
            recurse(classes, class + 1, offset + len, 0, perm, adj, best);
            return;
        }
        for i in k..len {
            classes[class].swap(k, i);
            perm[classes[class][k]] = offset + k;
            recurse(classes, class, offset, k + 1, perm, adj, best);
            classes[class].swap(k, i);
        }
    }
    recurse(&mut classes, 0, 0, 0, &mut perm, adj, &mut best);
    best
}

fn graph_from_code(n: usize, code: u64) -> Graph {
    let mut edges = Vec::new();
    for b in 1..n {
        for a in 0..b {
            if code >> pair_index(a, b) & 1 == 1 {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// One representative per isomorphism class on exactly `n` vertices,
/// built by adding a vertex to every class on `n - 1` vertices.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 9, "corpus enumeration is meant for tiny graphs");
    let mut layer: BTreeSet<u64> = BTreeSet::from([0]);
    for m in 1..=n {
        let mut next = BTreeSet::new();
        for &code in &layer {
            let base = graph_from_code(m - 1, code);
            for nbrs in 0u32..(1 << (m - 1)) {
                let mut adj: Vec<u32> = (0..m - 1)
                    .map(|v| base.neighbors(v).iter().fold(0u32, |a, &u| a | 1 << u))
                    .collect();
                for (v, a) in adj.iter_mut().enumerate() {
                    if nbrs >> v & 1 == 1 {
                        *a |= 1 << (m - 1);
                    }
                }
                adj.push(nbrs);
                next.insert(canonical_code(&adj));
            }
        }
        layer = next;
    }
    layer.into_iter().map(|c| graph_from_code(n, c)).collect()
}

pub fn graphs_up_to(n_max: usize) -> Vec<Graph> {
    (1..=n_max).flat_map(all_graphs).collect()
}

pub fn is_connected(g: &Graph) -> bool {
    if g.n() == 0 {
        return true;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn has_triangle(g: &Graph) -> bool {
    g.edges()
        .any(|(u, v)| g.neighbors(u).iter().any(|&w| w != v && g.has_edge(w, v)))
}

pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every independent set of `g`, as vertex masks.
pub fn independent_sets(g: &Graph) -> Vec<u32> {
    let n = g.n();
    assert!(n < 32);
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    (0u32..(1u32 << n))
        .filter(|&s| (0..n).all(|v| s >> v & 1 == 0 || nbr[v] & s == 0))
        .collect()
}

/// Hard-core statistics summed set by set over every independent set.
pub struct Brute {
    pub z: BigRational,
    pub occupancy: BigRational,
    pub marginal: Vec<BigRational>,
    pub nbr_occ: Vec<BigRational>,
    pub uncovered: Vec<BigRational>,
}

pub fn brute_force(g: &Graph, lambda: &BigRational) -> Brute {
    let n = g.n();
    let zero = BigRational::zero;
    let mut z = zero();
    let mut size_sum = zero();
    let mut marginal = vec![zero(); n];
    let mut nbr_occ = vec![zero(); n];
    let mut uncovered = vec![zero(); n];
    for s in independent_sets(g) {
        let k = s.count_ones() as i32;
        let w = num_traits::pow(lambda.clone(), k as usize);
        z += &w;
        size_sum += &w * BigRational::from_integer(k.into());
        for v in 0..n {
            if s >> v & 1 == 1 {
                marginal[v] += &w;
            }
            let hits = g.neighbors(v).iter().filter(|&&u| s >> u & 1 == 1).count();
            nbr_occ[v] += &w * BigRational::from_integer(hits.into());
            // I \ N(v), then its neighbourhood
            let outside: Vec<usize> = (0..n)
                .filter(|&x| s >> x & 1 == 1 && !g.has_edge(x, v))
                .collect();
            let free = g
                .neighbors(v)
                .iter()
                .filter(|&&u| !outside.iter().any(|&x| g.has_edge(x, u)))
                .count();
            uncovered[v] += &w * BigRational::from_integer(free.into());
        }
    }
    let div = |xs: Vec<BigRational>| xs.into_iter().map(|x| x / &z).collect::<Vec<_>>();
    Brute {
        occupancy: &size_sum / &z,
        marginal: div(marginal),
        nbr_occ: div(nbr_occ),
        uncovered: div(uncovered),
        z,
    }
}

/// `Z_G(λ)` by subset enumeration.
pub fn brute_z(g: &Graph, lambda: &BigRational) -> BigRational {
    independent_sets(g)
        .into_iter()
        .map(|s| num_traits::pow(lambda.clone(), s.count_ones() as usize))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Fractional chromatic number of a vertex-transitive graph: `n / α(G)`.
pub fn vertex_transitive_chif(g: &Graph) -> BigRational {
    let alpha = independent_sets(g).into_iter().map(|s| s.count_ones()).max().unwrap();
    BigRational::new(BigInt::from(g.n()), BigInt::from(alpha))
}

pub fn one() -> BigRational {
    BigRational::one()
}
