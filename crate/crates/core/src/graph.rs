//! Undirected unit-weight graphs and their Laplacian `L = D - A`.
//!
//! The Laplacian is never materialized: [`Graph::laplacian_apply`] works
//! directly on the compressed neighbor lists.
//!
//! Graphs are exchanged as SPGR text: a `SPGR <n> <m>` line followed by `m`
//! lines `<u> <v>` with `u < v`, in ascending lexicographic order.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("vector length {found} does not match node count {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("nodes {p} and {q} are not connected")]
    Unreachable { p: usize, q: usize },
    #[error("cut must put at least one node on each side")]
    ImproperCut,
    #[error("SPGR parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Immutable undirected graph with sorted, deduplicated edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Edges may be given in either orientation and may repeat; self-loops
    /// are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_sorted(n, list))
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        // edges are sorted by (u, v), so each list ends up ascending
        for &(u, v) in &edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
        }
        for &(u, v) in &edges {
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self {
            n,
            edges,
            offsets,
            neighbors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<(), GraphError> {
        if node >= self.n {
            Err(GraphError::NodeOutOfRange { node, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `(D - A) v`.
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<Vec<f64>, GraphError> {
        if v.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.laplacian_apply_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`Graph::laplacian_apply`]; both slices must
    /// have length `n`.
    pub fn laplacian_apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let nbrs = self.neighbors(i);
            let mut acc = nbrs.len() as f64 * v[i];
            for &j in nbrs {
                acc -= v[j];
            }
            out[i] = acc;
        }
    }

    /// `vᵀ L v = Σ_(u,v)∈E (v_u - v_v)²`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| {
                let d = v[a] - v[b];
                d * d
            })
            .sum()
    }

    /// Component labels `0..c`, assigned in BFS discovery order from
    /// ascending node ids.
    pub fn connected_components(&self) -> Vec<usize> {
        let mut labels = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        let mut next = 0;
        for start in 0..self.n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbors(u) {
                    if labels[w] == usize::MAX {
                        labels[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    pub fn component_count(&self) -> usize {
        self.connected_components()
            .into_iter()
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Hop counts from `src`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in self.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path hop count between `p` and `q`.
    pub fn geodesic_distance(&self, p: usize, q: usize) -> Result<usize, GraphError> {
        self.check_node(p)?;
        self.check_node(q)?;
        if p == q {
            return Ok(0);
        }
        // early-exit BFS; the full distance vector is wasted work here
        let mut dist = vec![usize::MAX; self.n];
        dist[p] = 0;
        let mut queue = VecDeque::from([p]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    if w == q {
                        return Ok(dist[w]);
                    }
                    queue.push_back(w);
                }
            }
        }
        Err(GraphError::Unreachable { p, q })
    }

    /// Number of edges crossing the cut, computed as `zᵀ L z`.
    pub fn cut_size(&self, cut: &CutSpec) -> Result<usize, GraphError> {
        if cut.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                found: cut.len(),
            });
        }
        let z = cut.indicator();
        let lz = self.laplacian_apply(&z)?;
        let value: f64 = z.iter().zip(&lz).map(|(a, b)| a * b).sum();
        Ok(value.round() as usize)
    }

    /// Edges with exactly one endpoint inside the cut.
    pub fn crossing_edges(&self, cut: &CutSpec) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| cut.contains(u) != cut.contains(v))
            .count()
    }

    /// Subgraph induced on `nodes`; node `nodes[i]` becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph, GraphError> {
        let mut index = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            self.check_node(old)?;
            index[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| index[u] != usize::MAX && index[v] != usize::MAX)
            .map(|&(u, v)| (index[u], index[v]));
        Graph::from_edges(nodes.len(), edges.collect::<Vec<_>>())
    }

    /// Dense `L`, row-major. For oracles and tests only.
    pub fn dense_laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for &(u, v) in &self.edges {
            l[u * n + u] += 1.0;
            l[v * n + v] += 1.0;
            l[u * n + v] -= 1.0;
            l[v * n + u] -= 1.0;
        }
        l
    }

    pub fn to_spgr(&self) -> String {
        let mut out = String::with_capacity(16 + self.edges.len() * 12);
        writeln!(out, "SPGR {} {}", self.n, self.edges.len()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }

    pub fn parse_spgr(text: &str) -> Result<Graph, GraphError> {
        let parse_err = |line: usize, message: String| GraphError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing SPGR header".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "SPGR" {
            return Err(parse_err(hline, format!("bad header {header:?}")));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(hline, format!("bad node count {:?}", parts[1])))?;
        let m: usize = parts[2]
            .parse()
            .map_err(|_| parse_err(hline, format!("bad edge count {:?}", parts[2])))?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(line, format!("expected `<u> <v>`, got {l:?}")));
            };
            let u: usize = a
                .parse()
                .map_err(|_| parse_err(line, format!("bad node id {a:?}")))?;
            let v: usize = b
                .parse()
                .map_err(|_| parse_err(line, format!("bad node id {b:?}")))?;
            if u >= v {
                return Err(parse_err(line, format!("edge ({u}, {v}) must have u < v")));
            }
            if v >= n {
                return Err(GraphError::NodeOutOfRange { node: v, n });
            }
            if let Some(&last) = edges.last() {
                if (u, v) <= last {
                    return Err(parse_err(line, format!("edge ({u}, {v}) out of order")));
                }
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(parse_err(
                hline,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(Graph::from_sorted(n, edges))
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Graph::parse_spgr(&text)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let path = path.as_ref();
    fs::write(path, g.to_spgr()).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A node subset `S` given by its 0/1 coloring vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    inside: Vec<bool>,
}

impl CutSpec {
    pub fn new(inside: Vec<bool>) -> Result<Self, GraphError> {
        let ones = inside.iter().filter(|&&b| b).count();
        if ones == 0 || ones == inside.len() {
            return Err(GraphError::ImproperCut);
        }
        Ok(Self { inside })
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self, GraphError> {
        let mut inside = vec![false; n];
        for &m in members {
            if m >= n {
                return Err(GraphError::NodeOutOfRange { node: m, n });
            }
            inside[m] = true;
        }
        Self::new(inside)
    }

    pub fn len(&self) -> usize {
        self.inside.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.inside[node]
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.inside.len()).filter(|&i| self.inside[i]).collect()
    }

    pub fn complement(&self) -> CutSpec {
        CutSpec {
            inside: self.inside.iter().map(|b| !b).collect(),
        }
    }

    pub fn indicator(&self) -> Vec<f64> {
        self.inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}
