//! Seeded random and hand-built instances for verification runs.
//!
//! Every generator takes its randomness from the caller's RNG so a single
//! seed reproduces a whole experiment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{CutSpec, Graph};
use crate::knn::{build_knn, KnnParams};
use crate::matrix::DenseMatrix;

/// `n` points uniform in the unit cube `[0, 1)^dim`.
pub fn random_points<R: Rng>(n: usize, dim: usize, rng: &mut R) -> DenseMatrix {
    let data = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    DenseMatrix::new(n, dim, data).expect("n and dim must be positive")
}

/// G(n, p) random graph; may be disconnected.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// G(n, p) with each extra component linked to a random earlier node.
pub fn connected_erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let g = erdos_renyi(n, p, rng);
    let labels = g.connected_components();
    let count = labels.iter().max().map_or(0, |m| m + 1);
    if count <= 1 {
        return g;
    }
    let mut edges = g.edges().to_vec();
    let mut seen = vec![false; count];
    for (node, &c) in labels.iter().enumerate() {
        if !seen[c] {
            seen[c] = true;
            if c > 0 {
                // earlier components own every node below `node`
                edges.push((rng.random_range(0..node), node));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Uniform random recursive tree with randomly permuted labels.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let edges: Vec<(usize, usize)> = (1..n)
        .map(|i| (labels[rng.random_range(0..i)], labels[i]))
        .collect();
    Graph::from_edges(n, edges).expect("generated edges are valid")
}

/// Random `d`-regular simple graph by the pairing model with rejection.
/// `n·d` must be even and `d < n`.
pub fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Graph {
    assert!(d < n && (n * d).is_multiple_of(2), "no {d}-regular graph on {n} nodes");
    loop {
        let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, d)).collect();
        stubs.shuffle(rng);
        let pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
        if pairs.iter().any(|&(a, b)| a == b) {
            continue;
        }
        let g = Graph::from_edges(n, pairs.iter().copied()).unwrap();
        if g.edge_count() == pairs.len() && g.is_connected() {
            return g;
        }
    }
}

/// Exact kNN graphs over two independent uniform point clouds, resampled
/// until both are connected.
pub fn random_knn_pair<R: Rng>(
    n: usize,
    dim_x: usize,
    dim_y: usize,
    k: usize,
    rng: &mut R,
) -> (Graph, Graph) {
    let params = KnnParams::exact(k);
    loop {
        let gx = build_knn(&random_points(n, dim_x, rng), &params).expect("k < n");
        let gy = build_knn(&random_points(n, dim_y, rng), &params).expect("k < n");
        if gx.is_connected() && gy.is_connected() {
            return (gx, gy);
        }
    }
}

/// Ten-node pair whose cut `S = {0..4}` is crossed by six input edges and a
/// single output edge. Nodes 0 and 5 are adjacent in the input graph and
/// five hops apart in the output graph. Returns `(gx, gy, S, (0, 5))`.
pub fn cut_distortion_pair() -> (Graph, Graph, CutSpec, (usize, usize)) {
    let sides = [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9)];
    let gy_edges = sides.iter().copied().chain([(4, 5)]);
    let crossing = [(0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (4, 5)];
    let gx_edges = sides.iter().copied().chain(crossing);
    let gx = Graph::from_edges(10, gx_edges).unwrap();
    let gy = Graph::from_edges(10, gy_edges).unwrap();
    let cut = CutSpec::from_members(10, &[0, 1, 2, 3, 4]).unwrap();
    (gx, gy, cut, (0, 5))
}

/// Output graph with a planted tear: the kNN graph over uniform points in
/// the unit square, minus every edge crossing the line `x₀ = 0.5` in the
/// lower half (`x₁ < 0.5`). Returns `(points, gx, gy)`; `gy` stays
/// connected through the upper half, so torn pairs become far apart.
pub fn planted_tear_pair<R: Rng>(n: usize, k: usize, rng: &mut R) -> (DenseMatrix, Graph, Graph) {
    loop {
        let points = random_points(n, 2, rng);
        let gx = build_knn(&points, &KnnParams::exact(k)).expect("k < n");
        let torn = |u: usize, v: usize| {
            let (a, b) = (points.row(u), points.row(v));
            (a[0] - 0.5) * (b[0] - 0.5) < 0.0 && (a[1] + b[1]) / 2.0 < 0.5
        };
        let kept = gx.edges().iter().copied().filter(|&(u, v)| !torn(u, v));
        let gy = Graph::from_edges(n, kept.collect::<Vec<_>>()).unwrap();
        if gx.is_connected() && gy.is_connected() {
            return (points, gx, gy);
        }
    }
}

/// Progressively rewired copies of `g`. Edges are visited in one random
/// order; level `i` has the first `round(fractions[i]·m)` of them replaced by
/// an edge from one endpoint to a random node. A rewire that would
/// disconnect the graph is skipped, so levels are nested and connected.
pub fn rewired_levels<R: Rng>(g: &Graph, fractions: &[f64], rng: &mut R) -> Vec<Graph> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.shuffle(rng);
    let targets: Vec<usize> = (0..g.edge_count()).map(|_| rng.random_range(0..n)).collect();
    let mut current = g.clone();
    let mut done = 0usize;
    let mut levels = Vec::with_capacity(fractions.len());
    for &f in fractions {
        let want = ((f * g.edge_count() as f64).round() as usize).min(order.len());
        while done < want {
            let idx = order[done];
            done += 1;
            let (u, v) = g.edges()[idx];
            let w = targets[idx];
            if w == u || w == v || !current.has_edge(u, v) {
                continue;
            }
            let edges = current
                .edges()
                .iter()
                .copied()
                .filter(|&e| e != (u, v))
                .chain([(u, w)]);
            let candidate = Graph::from_edges(n, edges.collect::<Vec<_>>()).unwrap();
            if candidate.is_connected() {
                current = candidate;
            }
        }
        levels.push(current.clone());
    }
    levels
}

/// Chain of three cliques `A – B – C` joined by paths of `len1` and `len2`
/// edges (the output graph). The input graph adds shortcut edges across
/// both paths, so each shortcut is dominantly aligned with one dominant
/// generalized eigenvector (eigenvalues `len1 + 1` and `len2 + 1`).
/// Returns `(gx, gy, shortcut1, shortcut2)`.
pub fn aligned_shortcut_pair(
    clique: usize,
    len1: usize,
    len2: usize,
) -> (Graph, Graph, (usize, usize), (usize, usize)) {
    assert!(clique >= 2 && len1 >= 2 && len2 >= 2);
    let mut next = 0usize;
    let mut take = |count: usize| {
        let ids: Vec<usize> = (next..next + count).collect();
        next += count;
        ids
    };
    let a = take(clique);
    let p1 = take(len1 - 1);
    let b = take(clique);
    let p2 = take(len2 - 1);
    let c = take(clique);
    let n = next;
    let mut edges = Vec::new();
    for group in [&a, &b, &c] {
        for (i, &u) in group.iter().enumerate() {
            for &v in &group[i + 1..] {
                edges.push((u, v));
            }
        }
    }
    let chain = |from: usize, mid: &[usize], to: usize| {
        let nodes: Vec<usize> = std::iter::once(from).chain(mid.iter().copied()).chain([to]).collect();
        nodes.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>()
    };
    edges.extend(chain(a[clique - 1], &p1, b[0]));
    edges.extend(chain(b[clique - 1], &p2, c[0]));
    let e1 = (a[clique - 1], b[0]);
    let e2 = (b[clique - 1], c[0]);
    let gy = Graph::from_edges(n, edges.iter().copied()).unwrap();
    let gx = Graph::from_edges(n, edges.into_iter().chain([e1, e2])).unwrap();
    (gx, gy, e1, e2)
}
