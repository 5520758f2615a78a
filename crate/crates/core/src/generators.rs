//! Seeded graph constructions: random regular graphs, triangle-free regular
//! graphs, clique blow-ups, bad-vertex deletion and a few named families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::graph::{audit, sorted_intersection_len, Graph};

/// Restarts allowed when pairing half-edges.
pub const PAIRING_BUDGET: usize = 10_000;
/// Above this value of `n·d`, triangles are removed by switching instead of
/// restarting.
pub const REJECTION_LIMIT: usize = 200;
/// Double-edge switches allowed while removing triangles.
pub const SWITCH_BUDGET: usize = 1_000_000;

fn invalid(msg: impl Into<String>) -> GenError {
    GenError::InvalidParameter(msg.into())
}

fn check_regular(n: usize, d: usize) -> Result<(), GenError> {
    if (n * d) % 2 != 0 {
        return Err(invalid(format!("n·d must be even, got n = {n}, d = {d}")));
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(invalid(format!("degree {d} needs more than {n} vertices")));
    }
    Ok(())
}

/// Random simple `d`-regular graph on `n` vertices.
///
/// Half-edges are paired one random pair at a time; a pair that would form a
/// loop or a repeated edge is redrawn, and the whole pairing restarts when no
/// admissible pair remains. Deterministic given `seed`.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GenError> {
    check_regular(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = regular_adjacency(n, d, &mut rng)?;
    Ok(from_adjacency(n, &adj))
}

fn regular_adjacency(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>, GenError> {
    for _ in 0..PAIRING_BUDGET {
        if let Some(adj) = try_pairing(n, d, rng) {
            return Ok(adj);
        }
    }
    Err(GenError::BudgetExceeded(PAIRING_BUDGET))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    points.shuffle(rng);
    while !points.is_empty() {
        let len = points.len();
        let mut paired = false;
        for _ in 0..64 {
            let i = rng.gen_range(0..len);
            let j = rng.gen_range(0..len);
            let (u, v) = (points[i], points[j]);
            if i != j && u != v && !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
                let (hi, lo) = (i.max(j), i.min(j));
                points.swap_remove(hi);
                points.swap_remove(lo);
                paired = true;
                break;
            }
        }
        if !paired {
            // give up on this pairing only if no admissible pair is left
            let admissible = (0..len).any(|i| {
                (i + 1..len).any(|j| points[i] != points[j] && !adj[points[i]].contains(&points[j]))
            });
            if !admissible {
                return None;
            }
        }
    }
    Some(adj)
}

fn from_adjacency(n: usize, adj: &[Vec<usize>]) -> Graph {
    Graph::from_edges_unchecked(
        n,
        adj.iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v))),
    )
}

/// Random `d`-regular graph without triangles.
///
/// Small instances (`n·d <= 200`) restart the pairing until it is
/// triangle-free; larger ones, and small ones that exhaust the restart budget,
/// repair triangles by double-edge switches. The
/// output is not uniformly distributed over triangle-free regular graphs.
pub fn triangle_free_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GenError> {
    check_regular(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n * d <= REJECTION_LIMIT {
        for _ in 0..PAIRING_BUDGET {
            if let Some(adj) = try_pairing(n, d, &mut rng) {
                let g = from_adjacency(n, &adj);
                if audit(&g).triangle_total == 0 {
                    return Ok(g);
                }
            }
        }
    }
    let mut adj = regular_adjacency(n, d, &mut rng)?;
    for list in &mut adj {
        list.sort_unstable();
    }
    remove_triangles(&mut adj, &mut rng)?;
    Ok(from_adjacency(n, &adj))
}

fn common(adj: &[Vec<usize>], a: usize, b: usize) -> usize {
    sorted_intersection_len(&adj[a], &adj[b])
}

fn insert_sorted(list: &mut Vec<usize>, x: usize) {
    let at = list.binary_search(&x).unwrap_or_else(|e| e);
    list.insert(at, x);
}

fn remove_sorted(list: &mut Vec<usize>, x: usize) {
    if let Ok(at) = list.binary_search(&x) {
        list.remove(at);
    }
}

fn switch_edges(adj: &mut [Vec<usize>], remove: [(usize, usize); 2], add: [(usize, usize); 2]) {
    for (a, b) in remove {
        remove_sorted(&mut adj[a], b);
        remove_sorted(&mut adj[b], a);
    }
    for (a, b) in add {
        insert_sorted(&mut adj[a], b);
        insert_sorted(&mut adj[b], a);
    }
}

/// Switches `{u,v},{x,y}` to `{u,x},{v,y}` for a triangle edge `{u,v}`
/// whenever that does not raise the number of triangles on the switched
/// edges. Sideways moves let the walk leave local minima.
fn remove_triangles(adj: &mut [Vec<usize>], rng: &mut ChaCha8Rng) -> Result<(), GenError> {
    let n = adj.len();
    let mut switches = 0;
    loop {
        let offset = rng.gen_range(0..n.max(1));
        let bad_edge = (0..n).map(|i| (i + offset) % n).find_map(|u| {
            adj[u]
                .iter()
                .find(|&&v| common(adj, u, v) > 0)
                .map(|&v| (u, v))
        });
        let Some((u, v)) = bad_edge else {
            return Ok(());
        };
        loop {
            if switches >= SWITCH_BUDGET {
                return Err(GenError::BudgetExceeded(SWITCH_BUDGET));
            }
            switches += 1;
            let x = rng.gen_range(0..n);
            if adj[x].is_empty() {
                continue;
            }
            let y = adj[x][rng.gen_range(0..adj[x].len())];
            let distinct = x != u && x != v && y != u && y != v;
            if !distinct || adj[u].binary_search(&x).is_ok() || adj[v].binary_search(&y).is_ok() {
                continue;
            }
            let before = common(adj, u, v) + common(adj, x, y);
            switch_edges(adj, [(u, v), (x, y)], [(u, x), (v, y)]);
            let after = common(adj, u, x) + common(adj, v, y);
            if after <= before {
                break;
            }
            switch_edges(adj, [(u, x), (v, y)], [(u, v), (x, y)]);
        }
    }
}

/// Replaces every vertex by a `b`-clique and every edge by a complete
/// bipartite join. Vertex `(v, i)` is labelled `v·b + i`.
pub fn clique_blowup(g: &Graph, b: usize) -> Result<Graph, GenError> {
    if b == 0 {
        return Err(invalid("blow-up factor must be at least 1"));
    }
    let inside = (0..g.n()).flat_map(move |v| {
        (0..b).flat_map(move |i| (i + 1..b).map(move |j| (v * b + i, v * b + j)))
    });
    let across = g
        .edges()
        .flat_map(move |(u, v)| (0..b).flat_map(move |i| (0..b).map(move |j| (u * b + i, v * b + j))));
    Ok(Graph::from_edges_unchecked(g.n() * b, inside.chain(across)))
}

/// Vertices lying in too many triangles, and the graph left after removing
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deletion {
    pub remaining: Graph,
    /// Labels in the input graph of the vertices of `remaining`.
    pub kept: Vec<usize>,
    pub bad: Vec<usize>,
    /// `Δ² / (ε² f)`: a vertex is bad when it lies in more triangles.
    pub threshold: f64,
}

pub fn bad_vertex_deletion(g: &Graph, f: f64, eps: f64) -> Result<Deletion, GenError> {
    if g.max_degree() == 0 || !(f > 0.0 && eps > 0.0) {
        return Err(invalid("need Δ >= 1, f > 0 and ε > 0"));
    }
    let a = audit(g);
    let d = a.max_degree as f64;
    let threshold = d * d / (eps * eps * f);
    let (bad, keep): (Vec<usize>, Vec<usize>) = (0..g.n()).partition(|&v| a.nbhd_edges[v] as f64 > threshold);
    let (remaining, kept) = g.induced_subgraph(&keep)?;
    Ok(Deletion {
        remaining,
        kept,
        bad,
        threshold,
    })
}

pub fn cycle(n: usize) -> Result<Graph, GenError> {
    if n < 3 {
        return Err(invalid("a cycle needs at least 3 vertices"));
    }
    Ok(Graph::from_edges_unchecked(n, (0..n).map(|i| (i, (i + 1) % n))))
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges_unchecked(n, (1..n).map(|i| (i - 1, i)))
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges_unchecked(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    Graph::from_edges_unchecked(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))))
}

/// `K_{1,leaves}` with centre 0.
pub fn star(leaves: usize) -> Graph {
    complete_bipartite(1, leaves)
}

pub fn petersen() -> Graph {
    Graph::from_edges_unchecked(
        10,
        (0..5).flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (i + 5, (i + 2) % 5 + 5)]),
    )
}

/// Kneser graph: `k`-subsets of `{0..n}`, adjacent when disjoint. Subsets are
/// labelled in increasing bitmask order.
pub fn kneser(n: usize, k: usize) -> Result<Graph, GenError> {
    if k == 0 || n < k || n > 24 {
        return Err(invalid(format!("kneser needs 1 <= k <= n <= 24, got n = {n}, k = {k}")));
    }
    let subsets: Vec<u32> = (0u32..(1u32 << n)).filter(|m| m.count_ones() as usize == k).collect();
    let edges = (0..subsets.len()).flat_map(|i| {
        let subsets = &subsets;
        (i + 1..subsets.len())
            .filter(move |&j| subsets[i] & subsets[j] == 0)
            .map(move |j| (i, j))
    });
    Ok(Graph::from_edges_unchecked(subsets.len(), edges))
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges_unchecked(n, edges))
}

/// Declarative description of a generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenSpec {
    RandomRegular { n: usize, d: usize, seed: u64 },
    TriangleFreeRegular { n: usize, d: usize, seed: u64 },
    Blowup { base: Box<GenSpec>, b: usize },
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    CompleteBipartite { a: usize, b: usize },
    Star { leaves: usize },
    Empty { n: usize },
    Petersen,
    Kneser { n: usize, k: usize },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

/// A generated graph with a provenance note where the construction is not
/// uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub graph: Graph,
    pub spec: GenSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl GenSpec {
    pub fn build(&self) -> Result<Graph, GenError> {
        Ok(self.generate()?.graph)
    }

    pub fn generate(&self) -> Result<Generated, GenError> {
        let (graph, note) = match self {
            GenSpec::RandomRegular { n, d, seed } => (random_regular(*n, *d, *seed)?, None),
            GenSpec::TriangleFreeRegular { n, d, seed } => (
                triangle_free_regular(*n, *d, *seed)?,
                Some("not uniformly distributed over triangle-free regular graphs".to_string()),
            ),
            GenSpec::Blowup { base, b } => {
                let inner = base.generate()?;
                (clique_blowup(&inner.graph, *b)?, inner.note)
            }
            GenSpec::Cycle { n } => (cycle(*n)?, None),
            GenSpec::Path { n } => (path(*n), None),
            GenSpec::Complete { n } => (complete(*n), None),
            GenSpec::CompleteBipartite { a, b } => (complete_bipartite(*a, *b), None),
            GenSpec::Star { leaves } => (star(*leaves), None),
            GenSpec::Empty { n } => (Graph::empty(*n), None),
            GenSpec::Petersen => (petersen(), None),
            GenSpec::Kneser { n, k } => (kneser(*n, *k)?, None),
            GenSpec::ErdosRenyi { n, p, seed } => (erdos_renyi(*n, *p, *seed)?, None),
        };
        Ok(Generated {
            graph,
            spec: self.clone(),
            note,
        })
    }

    /// Short human-readable name, e.g. `C5` or `rr(50,3,s7)`.
    pub fn label(&self) -> String {
        match self {
            GenSpec::RandomRegular { n, d, seed } => format!("rr({n},{d},s{seed})"),
            GenSpec::TriangleFreeRegular { n, d, seed } => format!("tfr({n},{d},s{seed})"),
            GenSpec::Blowup { base, b } => format!("{b}*{}", base.label()),
            GenSpec::Cycle { n } => format!("C{n}"),
            GenSpec::Path { n } => format!("P{n}"),
            GenSpec::Complete { n } => format!("K{n}"),
            GenSpec::CompleteBipartite { a, b } => format!("K{a},{b}"),
            GenSpec::Star { leaves } => format!("K1,{leaves}"),
            GenSpec::Empty { n } => format!("E{n}"),
            GenSpec::Petersen => "Petersen".to_string(),
            GenSpec::Kneser { n, k } => format!("KG({n},{k})"),
            GenSpec::ErdosRenyi { n, p, seed } => format!("G({n},{p},s{seed})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_regular_small_cases() {
        for seed in 0..5 {
            assert_eq!(random_regular(4, 3, seed).unwrap(), complete(4));
            let g = random_regular(12, 2, seed).unwrap();
            assert!(g.degrees().iter().all(|&d| d == 2));
            let g = random_regular(50, 3, seed).unwrap();
            assert!(g.degrees().iter().all(|&d| d == 3));
        }
        assert!(random_regular(5, 3, 0).is_err());
        assert!(random_regular(4, 4, 0).is_err());
        assert_eq!(random_regular(0, 0, 0).unwrap().n(), 0);
    }

    #[test]
    fn random_regular_is_deterministic() {
        assert_eq!(random_regular(100, 5, 9).unwrap(), random_regular(100, 5, 9).unwrap());
        assert_ne!(random_regular(100, 5, 9).unwrap(), random_regular(100, 5, 10).unwrap());
    }

    #[test]
    fn triangle_free_regular_cases() {
        for seed in 0..3 {
            let g = triangle_free_regular(6, 3, seed).unwrap();
            assert_eq!(g, g.clone());
            assert_eq!(audit(&g).triangle_total, 0);
            // the only triangle-free cubic graph on six vertices is K_{3,3}
            assert_eq!(crate::fractional::maximal_independent_sets(&g, 24).unwrap().len(), 2);
            let g = triangle_free_regular(10, 3, seed).unwrap();
            assert_eq!(audit(&g).triangle_total, 0);
        }
        assert!(matches!(triangle_free_regular(4, 3, 0), Err(GenError::BudgetExceeded(_))));
    }

    #[test]
    fn switching_path_for_larger_instances() {
        let g = triangle_free_regular(200, 6, 1).unwrap();
        let a = audit(&g);
        assert_eq!(a.triangle_total, 0);
        assert!(g.degrees().iter().all(|&d| d == 6));
    }

    #[test]
    fn blowups() {
        let c5 = cycle(5).unwrap();
        assert_eq!(clique_blowup(&c5, 1).unwrap(), c5);
        let g = clique_blowup(&c5, 2).unwrap();
        assert_eq!(g.n(), 10);
        assert!(g.degrees().iter().all(|&d| d == 5));
        assert_eq!(clique_blowup(&Graph::empty(1), 4).unwrap(), complete(4));
        assert!(clique_blowup(&c5, 0).is_err());
    }

    #[test]
    fn deletion_examples() {
        let c5 = cycle(5).unwrap();
        let del = bad_vertex_deletion(&c5, 3.0, 0.5).unwrap();
        assert!(del.bad.is_empty());
        assert_eq!(del.remaining, c5);

        let del = bad_vertex_deletion(&complete(4), 9.0, 1.0).unwrap();
        assert_eq!(del.bad, vec![0, 1, 2, 3]);
        assert_eq!(del.remaining.n(), 0);

        // K3 next to a triangle-free cubic graph
        let g = complete(3).disjoint_union(&petersen());
        let del = bad_vertex_deletion(&g, 18.0, 1.0).unwrap();
        assert_eq!(del.threshold, 0.5);
        assert_eq!(del.bad, vec![0, 1, 2]);
        assert_eq!(del.remaining, petersen());
        assert!(bad_vertex_deletion(&Graph::empty(3), 2.0, 0.1).is_err());
    }

    #[test]
    fn named_families() {
        let c5 = cycle(5).unwrap();
        assert!(c5.degrees().iter().all(|&d| d == 2));
        assert_eq!(audit(&c5).triangle_total, 0);
        let kg = kneser(5, 2).unwrap();
        assert_eq!(kg.n(), 10);
        assert!(kg.degrees().iter().all(|&d| d == 3));
        assert_eq!(audit(&kg).triangle_total, 0);
        assert_eq!(complete(4).edge_count(), 6);
        assert!(cycle(2).is_err());
        assert!(kneser(3, 0).is_err());
        assert!(erdos_renyi(5, 1.5, 0).is_err());
        assert_eq!(erdos_renyi(6, 1.0, 0).unwrap(), complete(6));
    }

    #[test]
    fn gen_spec_json() {
        let spec: GenSpec = serde_json::from_str(
            r#"{"kind": "blowup", "b": 2, "base": {"kind": "cycle", "n": 5}}"#,
        )
        .unwrap();
        assert_eq!(spec.label(), "2*C5");
        assert_eq!(spec.build().unwrap().n(), 10);
        let spec: GenSpec = serde_json::from_str(r#"{"kind": "petersen"}"#).unwrap();
        assert_eq!(spec.build().unwrap(), petersen());
    }
}
