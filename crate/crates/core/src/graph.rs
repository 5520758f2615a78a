//! Simple undirected graphs, their text/JSON encodings, and the local
//! triangle-sparsity audit.
//!
//! Vertices are dense labels `0..n`. A [`Graph`] is immutable once built and
//! every constructor validates symmetry, loops and parallel edges.

use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, LineError};

/// Simple undirected graph stored as sorted adjacency lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

/// Wire form shared by the JSON reader and writer.
#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// Input encodings accepted by [`load_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    EdgeList,
    Json,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge iterator, rejecting loops, out-of-range
    /// endpoints and repeated edges. Edge `i` of the iterator is reported as
    /// index `i` in errors.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut builder = Builder::new(n);
        for (i, (u, v)) in edges.into_iter().enumerate() {
            builder
                .add(u, v)
                .map_err(|kind| GraphError::Edge { index: i, kind })?;
        }
        Ok(builder.finish())
    }

    /// Builds a graph from edges already known to be valid. Duplicates are
    /// merged; loops and out-of-range endpoints panic.
    pub(crate) fn from_edges_unchecked<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u != v && u < n && v < n, "invalid edge ({u}, {v})");
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Graph {
            adj,
            edge_count: edge_count / 2,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Whether `set` contains no edge. Out-of-range labels make it `false`.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().all(|&v| v < self.n())
            && set
                .iter()
                .enumerate()
                .all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    /// Neighbourhood bitmasks, available when `n <= 64`.
    pub fn masks(&self) -> Option<Vec<u64>> {
        if self.n() > 64 {
            return None;
        }
        Some(
            self.adj
                .iter()
                .map(|list| list.iter().fold(0u64, |m, &u| m | (1u64 << u)))
                .collect(),
        )
    }

    /// Induced subgraph on `vertices`, relabelled `0..k` in increasing order
    /// of the original labels. The returned map sends new labels to old ones.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let mut keep: Vec<usize> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&v| v >= self.n()) {
            return Err(GraphError::VertexOutOfRange { vertex: bad, n: self.n() });
        }
        let mut new_label = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            new_label[v] = i;
        }
        let adj: Vec<Vec<usize>> = keep
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter_map(|&u| (new_label[u] != usize::MAX).then_some(new_label[u]))
                    .collect()
            })
            .collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok((Graph { adj, edge_count }, keep))
    }

    /// Induced subgraph on the vertices whose bit is set in `mask`.
    pub fn induced_by_mask(&self, mask: u64) -> (Graph, Vec<usize>) {
        let vertices: Vec<usize> = (0..self.n().min(64)).filter(|&v| mask >> v & 1 == 1).collect();
        self.induced_subgraph(&vertices)
            .expect("mask bits are in range by construction")
    }

    /// Disjoint union; the vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|list| list.iter().map(|&u| u + shift).collect()),
        );
        Graph {
            adj,
            edge_count: self.edge_count + other.edge_count,
        }
    }

    pub fn complement(&self) -> Graph {
        let n = self.n();
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !self.has_edge(u, v));
        Graph::from_edges_unchecked(n, edges)
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(GraphError::InvalidPermutation);
        }
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(GraphError::InvalidPermutation);
            }
        }
        Ok(Graph::from_edges_unchecked(
            n,
            self.edges().map(|(u, v)| (perm[u], perm[v])),
        ))
    }

    /// Parses the `n m` header + `u v` lines format.
    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r').trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines.next().ok_or(GraphError::MissingHeader)?;
        let (n, m) = parse_pair(header).map_err(|kind| GraphError::Line { line: header_line, kind })?;

        let mut builder = Builder::new(n);
        let mut found = 0usize;
        for (line, content) in lines {
            let (u, v) = parse_pair(content).map_err(|kind| GraphError::Line { line, kind })?;
            builder.add(u, v).map_err(|kind| GraphError::Line { line, kind })?;
            found += 1;
        }
        if found != m {
            return Err(GraphError::EdgeCountMismatch { declared: m, found });
        }
        Ok(builder.finish())
    }

    pub fn parse_json(text: &str) -> Result<Graph, GraphError> {
        let raw: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Json {
            line: e.line(),
            message: e.to_string(),
        })?;
        Graph::from_edges(raw.n, raw.edges.iter().map(|e| (e[0], e[1])))
    }

    /// Edge-list encoding: header `n m`, then one `u v` line per edge with
    /// `u < v`, LF line endings.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edge_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialisation is infallible")
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            n: self.n(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        Graph::from_edges(raw.n, raw.edges.iter().map(|e| (e[0], e[1])))
            .map_err(serde::de::Error::custom)
    }
}

/// Reads a graph from a byte stream in the given format.
pub fn load_graph<R: Read>(mut source: R, format: GraphFormat) -> Result<Graph, GraphError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| GraphError::Io(e.to_string()))?;
    match format {
        GraphFormat::EdgeList => Graph::parse_edge_list(&text),
        GraphFormat::Json => Graph::parse_json(&text),
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize), LineError> {
    let mut fields = line.split_whitespace();
    let mut next = || -> Result<usize, LineError> {
        let token = fields
            .next()
            .ok_or_else(|| LineError::Malformed(line.to_string()))?;
        token
            .parse::<usize>()
            .map_err(|_| LineError::Malformed(line.to_string()))
    };
    let pair = (next()?, next()?);
    if fields.next().is_some() {
        return Err(LineError::Malformed(line.to_string()));
    }
    Ok(pair)
}

struct Builder {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    fn add(&mut self, u: usize, v: usize) -> Result<(), LineError> {
        let n = self.adj.len();
        for w in [u, v] {
            if w >= n {
                return Err(LineError::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(LineError::SelfLoop(u));
        }
        // Lists are unsorted while building; the linear probe is fine for the
        // sizes read from files.
        if self.adj[u].len() <= self.adj[v].len() {
            if self.adj[u].contains(&v) {
                return Err(LineError::DuplicateEdge(u.min(v), u.max(v)));
            }
        } else if self.adj[v].contains(&u) {
            return Err(LineError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edge_count += 1;
        Ok(())
    }

    fn finish(mut self) -> Graph {
        for list in &mut self.adj {
            list.sort_unstable();
        }
        Graph {
            adj: self.adj,
            edge_count: self.edge_count,
        }
    }
}

/// Degree and neighbourhood-edge statistics of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityAudit {
    pub n: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// Number of edges spanned by `N(v)`, i.e. triangles through `v`.
    pub nbhd_edges: Vec<u64>,
    /// Each triangle counted once.
    pub triangle_total: u64,
    /// Largest `f` with every neighbourhood spanning at most `max_degree^2 / f`
    /// edges; `max_degree^2 + 1` for triangle-free graphs and `1` when
    /// `max_degree == 0`.
    pub implied_f: f64,
}

impl SparsityAudit {
    pub fn max_nbhd_edges(&self) -> u64 {
        self.nbhd_edges.iter().copied().max().unwrap_or(0)
    }

    pub fn is_triangle_free(&self) -> bool {
        self.triangle_total == 0
    }
}

/// Exact per-vertex triangle counts by sorted neighbourhood intersection.
pub fn audit(g: &Graph) -> SparsityAudit {
    let nbhd_edges: Vec<u64> = (0..g.n())
        .map(|v| {
            let nv = g.neighbors(v);
            let twice: usize = nv
                .iter()
                .map(|&u| sorted_intersection_len(nv, g.neighbors(u)))
                .sum();
            (twice / 2) as u64
        })
        .collect();
    let triangle_total = nbhd_edges.iter().sum::<u64>() / 3;
    let max_degree = g.max_degree();
    let d2 = (max_degree * max_degree) as f64;
    let worst = nbhd_edges.iter().copied().max().unwrap_or(0);
    let implied_f = if max_degree == 0 {
        1.0
    } else if worst == 0 {
        d2 + 1.0
    } else {
        d2 / worst as f64
    };
    SparsityAudit {
        n: g.n(),
        edges: g.edge_count(),
        max_degree,
        nbhd_edges,
        triangle_total,
        implied_f,
    }
}

pub(crate) fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> Graph {
        Graph::from_edges_unchecked(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges_unchecked(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    #[test]
    fn parses_path() {
        let g = Graph::parse_edge_list("3 2\n0 1\n1 2").unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn parses_isolated_vertex_and_triangle() {
        let g = Graph::parse_edge_list("1 0").unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
        let t = Graph::parse_edge_list("3 3\r\n0 1\r\n1 2\r\n0 2\r\n").unwrap();
        assert_eq!(t, k(3));
    }

    #[test]
    fn rejects_bad_lines_with_line_numbers() {
        let cases = [
            ("3 2\n0 1\n1 x", 3),
            ("3 2\n0 1\n1 3", 3),
            ("3 2\n1 1\n1 2", 2),
            ("3 2\n0 1\n1 0", 3),
            ("3 2\n0 1 2\n1 2", 2),
            ("3\n0 1", 1),
        ];
        for (text, want) in cases {
            match Graph::parse_edge_list(text) {
                Err(GraphError::Line { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            Graph::parse_edge_list("3 3\n0 1\n1 2"),
            Err(GraphError::EdgeCountMismatch { declared: 3, found: 2 })
        ));
        assert!(matches!(Graph::parse_edge_list(""), Err(GraphError::MissingHeader)));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let g = Graph::parse_json(r#"{"n": 4, "edges": [[0,1],[2,3]]}"#).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(Graph::parse_json(&g.to_json()).unwrap(), g);
        assert!(matches!(
            Graph::parse_json(r#"{"n": 2, "edges": [[0,0]]}"#),
            Err(GraphError::Edge { index: 0, kind: LineError::SelfLoop(0) })
        ));
        assert!(matches!(
            Graph::parse_json(r#"{"n": 2, "edges": [[0,1],[1,0]]}"#),
            Err(GraphError::Edge { index: 1, .. })
        ));
        assert!(matches!(Graph::parse_json("{\"n\": 2,\n \"edges\": [[0,1]"), Err(GraphError::Json { .. })));
    }

    #[test]
    fn audit_of_k4() {
        let a = audit(&k(4));
        assert_eq!(a.max_degree, 3);
        assert_eq!(a.nbhd_edges, vec![3; 4]);
        assert_eq!(a.triangle_total, 4);
        assert_eq!(a.implied_f, 3.0);
    }

    #[test]
    fn audit_of_triangle_free_graphs() {
        let a = audit(&cycle(5));
        assert_eq!((a.max_degree, a.triangle_total, a.implied_f), (2, 0, 5.0));
        let petersen = Graph::from_edges_unchecked(
            10,
            (0..5).flat_map(|i| [(i, (i + 1) % 5), (i, i + 5), (i + 5, (i + 2) % 5 + 5)]),
        );
        let a = audit(&petersen);
        assert_eq!((a.max_degree, a.triangle_total, a.implied_f), (3, 0, 10.0));
    }

    #[test]
    fn audit_of_edgeless_graphs() {
        assert_eq!(audit(&Graph::empty(0)).implied_f, 1.0);
        let a = audit(&Graph::empty(3));
        assert_eq!((a.max_degree, a.implied_f), (0, 1.0));
    }

    #[test]
    fn induced_subgraphs() {
        let (h, map) = k(4).induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(h, k(3));
        assert_eq!(map, vec![0, 1, 2]);
        let (h, _) = cycle(5).induced_subgraph(&[]).unwrap();
        assert_eq!(h.n(), 0);
        let (h, map) = cycle(5).induced_subgraph(&[3, 0, 1]).unwrap();
        assert_eq!(map, vec![0, 1, 3]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(matches!(
            cycle(5).induced_subgraph(&[5]),
            Err(GraphError::VertexOutOfRange { vertex: 5, n: 5 })
        ));
    }

    #[test]
    fn relabel_validates() {
        let g = cycle(4);
        assert!(g.relabel(&[0, 0, 1, 2]).is_err());
        assert_eq!(g.relabel(&[1, 2, 3, 0]).unwrap(), g);
    }
}
