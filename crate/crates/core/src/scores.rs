//! Distances, distortion ratios, spectral embedding and SPADE scores.
//!
//! Distances on a graph are either effective resistance `e_pqᵀ L⁺ e_pq` or
//! hop count. The distance mapping distortion of a pair is the ratio of its
//! output-graph distance to its input-graph distance; the cut mapping
//! distortion of a cut is the ratio of its output cut to its input cut.
//!
//! The embedding stacks the dominant generalized eigenvectors weighted by
//! `√λ_i`. Edge scores are squared embedding distances over input-graph
//! edges, and a node's score is the mean score of its incident edges.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{CutSpec, Graph, GraphError};
use crate::solver::{LaplacianSolver, SolveError, SolveParams};
use crate::spectral::{top_generalized_eigenpairs, EigenError, EigenPairs, EigenParams};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("distortion needs two distinct nodes, got ({0}, {0})")]
    SameNode(usize),
    #[error("eigenvalue {index} is {value}; embedding needs positive eigenvalues")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("embedding has {found} nodes, graph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("input graph has no edge across the cut")]
    EmptyInputCut,
    #[error("sketch distortion {0} not in (0, 1)")]
    InvalidEpsilon(f64),
}

/// An input-graph edge `(p, q)` with `p < q` and its score.
pub type ScoredEdge = ((usize, usize), f64);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DistanceMetric {
    #[default]
    Resistance,
    Geodesic,
}

impl FromStr for DistanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "resistance" | "effective-resistance" => Ok(Self::Resistance),
            "geodesic" | "shortest-path" => Ok(Self::Geodesic),
            other => Err(format!("unknown metric '{other}' (expected resistance or geodesic)")),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Resistance => "resistance",
            Self::Geodesic => "geodesic",
        })
    }
}

/// `e_pqᵀ L⁺ e_pq` from one Laplacian solve.
pub fn effective_resistance(g: &Graph, p: usize, q: usize, params: SolveParams) -> Result<f64, ScoreError> {
    g.check_node(p)?;
    g.check_node(q)?;
    if p == q {
        return Ok(0.0);
    }
    resistance_with(&LaplacianSolver::new(g, params)?, p, q)
}

fn resistance_with(solver: &LaplacianSolver<'_>, p: usize, q: usize) -> Result<f64, ScoreError> {
    let mut b = vec![0.0; solver.graph().node_count()];
    b[p] = 1.0;
    b[q] = -1.0;
    let x = solver.solve(&b)?;
    Ok((x[p] - x[q]).max(0.0))
}

/// Random projection of the resistance embedding `B L⁺` (`B` is the
/// edge-node incidence matrix).
///
/// Row `j` of the sketch is `L⁺ Bᵀ s_j` for a Rademacher vector `s_j` scaled
/// by `1/√t`, with `t = ⌈24 ln n / ε²⌉`. Queries cost `O(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceSketch {
    n: usize,
    t: usize,
    epsilon: f64,
    /// Node-major: `coords[p·t + j]` is entry `p` of projection `j`.
    coords: Vec<f64>,
}

impl ResistanceSketch {
    pub fn projection_count(n: usize, epsilon: f64) -> usize {
        (24.0 * (n as f64).ln() / (epsilon * epsilon)).ceil().max(1.0) as usize
    }

    pub fn new(g: &Graph, epsilon: f64, seed: u64, params: SolveParams) -> Result<Self, ScoreError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ScoreError::InvalidEpsilon(epsilon));
        }
        let n = g.node_count();
        let solver = LaplacianSolver::new(g, params)?;
        let t = Self::projection_count(n, epsilon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..t).map(|_| rng.next_u64()).collect();
        let w = 1.0 / (t as f64).sqrt();
        let rows: Vec<Vec<f64>> = seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let mut y = vec![0.0; n];
                for &(u, v) in g.edges() {
                    let sign = if rng.random_bool(0.5) { w } else { -w };
                    y[u] += sign;
                    y[v] -= sign;
                }
                solver.solve(&y)
            })
            .collect::<Result<_, SolveError>>()?;
        let mut coords = vec![0.0; n * t];
        for (j, row) in rows.iter().enumerate() {
            for (p, &x) in row.iter().enumerate() {
                coords[p * t + j] = x;
            }
        }
        Ok(Self { n, t, epsilon, coords })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `‖Z e_pq‖²`.
    pub fn query(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (&self.coords[p * self.t..(p + 1) * self.t], &self.coords[q * self.t..(q + 1) * self.t]);
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// Distance between two nodes of one graph under `metric`.
pub fn distance(g: &Graph, p: usize, q: usize, metric: DistanceMetric, params: SolveParams) -> Result<f64, ScoreError> {
    match metric {
        DistanceMetric::Resistance => effective_resistance(g, p, q, params),
        DistanceMetric::Geodesic => Ok(g.geodesic_distance(p, q)? as f64),
    }
}

/// `d_Y(p,q) / d_X(p,q)`.
pub fn dmd_pair(
    gx: &Graph,
    gy: &Graph,
    p: usize,
    q: usize,
    metric: DistanceMetric,
    params: SolveParams,
) -> Result<f64, ScoreError> {
    if p == q {
        return Err(ScoreError::SameNode(p));
    }
    if gx.node_count() != gy.node_count() {
        return Err(ScoreError::SizeMismatch {
            expected: gx.node_count(),
            found: gy.node_count(),
        });
    }
    let dy = distance(gy, p, q, metric, params)?;
    let dx = distance(gx, p, q, metric, params)?;
    Ok(dy / dx)
}

/// Distortions of many pairs, sharing one solver (or BFS) per graph.
pub fn dmd_pairs(
    gx: &Graph,
    gy: &Graph,
    pairs: &[(usize, usize)],
    metric: DistanceMetric,
    params: SolveParams,
) -> Result<Vec<f64>, ScoreError> {
    if gx.node_count() != gy.node_count() {
        return Err(ScoreError::SizeMismatch {
            expected: gx.node_count(),
            found: gy.node_count(),
        });
    }
    for &(p, q) in pairs {
        gx.check_node(p)?;
        gx.check_node(q)?;
        if p == q {
            return Err(ScoreError::SameNode(p));
        }
    }
    match metric {
        DistanceMetric::Resistance => {
            let sx = LaplacianSolver::new(gx, params)?;
            let sy = LaplacianSolver::new(gy, params)?;
            pairs
                .par_iter()
                .map(|&(p, q)| Ok(resistance_with(&sy, p, q)? / resistance_with(&sx, p, q)?))
                .collect()
        }
        DistanceMetric::Geodesic => pairs
            .par_iter()
            .map(|&(p, q)| Ok(gy.geodesic_distance(p, q)? as f64 / gx.geodesic_distance(p, q)? as f64))
            .collect(),
    }
}

/// `cut_Y(S) / cut_X(S)`.
pub fn cmd(gx: &Graph, gy: &Graph, s: &CutSpec) -> Result<f64, ScoreError> {
    let cx = gx.cut_size(s)?;
    let cy = gy.cut_size(s)?;
    if cx == 0 {
        return Err(ScoreError::EmptyInputCut);
    }
    Ok(cy as f64 / cx as f64)
}

/// Weighted spectral coordinates `V_r = [v_1√λ_1, …, v_r√λ_r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    r: usize,
    /// Row-major `n×r`.
    coords: Vec<f64>,
    lambdas: Vec<f64>,
}

impl Embedding {
    /// Builds `V_r` from explicit eigenvalues and vectors.
    pub fn from_parts(lambdas: &[f64], vectors: &[Vec<f64>]) -> Result<Self, ScoreError> {
        let r = lambdas.len();
        let n = vectors.first().map_or(0, Vec::len);
        if vectors.len() != r {
            return Err(ScoreError::SizeMismatch {
                expected: r,
                found: vectors.len(),
            });
        }
        if let Some((index, &value)) = lambdas.iter().enumerate().find(|(_, l)| l.is_nan() || **l <= 0.0) {
            return Err(ScoreError::NonPositiveEigenvalue { index, value });
        }
        let mut coords = vec![0.0; n * r];
        for (i, (v, &l)) in vectors.iter().zip(lambdas).enumerate() {
            if v.len() != n {
                return Err(ScoreError::SizeMismatch { expected: n, found: v.len() });
            }
            let w = l.sqrt();
            for (p, &x) in v.iter().enumerate() {
                coords[p * r + i] = x * w;
            }
        }
        Ok(Self {
            n,
            r,
            coords,
            lambdas: lambdas.to_vec(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.coords[p * self.r..(p + 1) * self.r]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|p| self.coords[p * self.r + i]).collect()
    }

    fn check(&self, p: usize) -> Result<(), ScoreError> {
        if p >= self.n {
            return Err(GraphError::NodeOutOfRange { node: p, n: self.n }.into());
        }
        Ok(())
    }
}

pub fn embed(pairs: &EigenPairs) -> Result<Embedding, ScoreError> {
    Embedding::from_parts(&pairs.lambdas, &pairs.vectors)
}

/// `‖V_rᵀ e_pq‖²`.
pub fn edge_spade(emb: &Embedding, p: usize, q: usize) -> Result<f64, ScoreError> {
    emb.check(p)?;
    emb.check(q)?;
    Ok(emb
        .row(p)
        .iter()
        .zip(emb.row(q))
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

fn check_dims(emb: &Embedding, gx: &Graph) -> Result<(), ScoreError> {
    if emb.node_count() != gx.node_count() {
        return Err(ScoreError::SizeMismatch {
            expected: gx.node_count(),
            found: emb.node_count(),
        });
    }
    Ok(())
}

/// Scores of every input-graph edge, in the graph's edge order.
pub fn edge_scores(emb: &Embedding, gx: &Graph) -> Result<Vec<ScoredEdge>, ScoreError> {
    check_dims(emb, gx)?;
    gx.edges()
        .iter()
        .map(|&(p, q)| Ok(((p, q), edge_spade(emb, p, q)?)))
        .collect()
}

/// Mean incident edge score per node; isolated nodes score 0.
pub fn node_spade(emb: &Embedding, gx: &Graph) -> Result<Vec<f64>, ScoreError> {
    check_dims(emb, gx)?;
    (0..gx.node_count())
        .map(|p| {
            let nbrs = gx.neighbors(p);
            if nbrs.is_empty() {
                return Ok(0.0);
            }
            let mut total = 0.0;
            for &q in nbrs {
                total += edge_spade(emb, p, q)?;
            }
            Ok(total / nbrs.len() as f64)
        })
        .collect()
}

/// Indices of the `top_k` largest scores, descending, ties by index.
/// `top_k` beyond the length returns every index.
pub fn rank_nodes(scores: &[f64], top_k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(top_k);
    order
}

/// The `count` highest-scoring edges, descending, ties by edge order.
pub fn top_edges(scored: &[ScoredEdge], count: usize) -> Vec<ScoredEdge> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].1.total_cmp(&scored[a].1).then(a.cmp(&b)));
    order.into_iter().take(count).map(|i| scored[i]).collect()
}

/// `count` distinct edges of `g` drawn uniformly without replacement.
pub fn random_edges<R: Rng>(g: &Graph, count: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let count = count.min(g.edge_count());
    sample(rng, g.edge_count(), count)
        .into_iter()
        .map(|i| g.edges()[i])
        .collect()
}

/// Model, edge and node scores of one graph pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// `λ_max(L_Y⁺ L_X)`.
    pub model_score: f64,
    pub lambdas: Vec<f64>,
    pub node_scores: Vec<f64>,
    pub edge_scores: Vec<ScoredEdge>,
    /// Every node, by descending node score.
    pub ranking: Vec<usize>,
}

impl ScoreReport {
    pub fn compute(gx: &Graph, gy: &Graph, params: &EigenParams) -> Result<Self, ScoreError> {
        let pairs = top_generalized_eigenpairs(gx, gy, params)?;
        Self::from_pairs(gx, &pairs)
    }

    pub fn from_pairs(gx: &Graph, pairs: &EigenPairs) -> Result<Self, ScoreError> {
        let emb = embed(pairs)?;
        let node_scores = node_spade(&emb, gx)?;
        let ranking = rank_nodes(&node_scores, node_scores.len());
        Ok(Self {
            model_score: pairs.lambdas[0],
            lambdas: pairs.lambdas.clone(),
            edge_scores: edge_scores(&emb, gx)?,
            node_scores,
            ranking,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{oracle, synth};
    use proptest::prelude::*;

    fn tight() -> SolveParams {
        SolveParams::with_tol(1e-12)
    }

    #[test]
    fn resistance_examples() {
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!((effective_resistance(&p3, 0, 2, tight()).unwrap() - 2.0).abs() <= 1e-10);
        let k3 = Graph::from_edges(3, [(0, 1), (0, 2), (1, 2)]).unwrap();
        assert!((effective_resistance(&k3, 0, 1, tight()).unwrap() - 2.0 / 3.0).abs() <= 1e-10);
        assert_eq!(effective_resistance(&k3, 1, 1, tight()).unwrap(), 0.0);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            effective_resistance(&split, 0, 1, tight()),
            Err(ScoreError::Solve(SolveError::Disconnected { .. }))
        ));
    }

    #[test]
    fn tree_resistance_is_hop_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = synth::random_tree(40, &mut rng);
        for p in 0..40 {
            let hops = t.bfs_distances(p);
            for (q, hop) in hops.iter().enumerate().skip(p + 1) {
                let r = effective_resistance(&t, p, q, tight()).unwrap();
                assert!((r - hop.unwrap() as f64).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn resistance_is_metric_below_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = synth::connected_erdos_renyi(30, 0.12, &mut rng);
        let pinv = oracle::dense_pseudoinverse(&g).unwrap();
        let r = |p, q| oracle::resistance_from_pseudoinverse(&pinv, p, q);
        for p in 0..30 {
            let hops = g.bfs_distances(p);
            for (q, hop) in hops.iter().enumerate() {
                let ours = effective_resistance(&g, p, q, tight()).unwrap();
                assert!((ours - r(p, q)).abs() <= 1e-6);
                assert!((r(p, q) - r(q, p)).abs() <= 1e-8);
                assert!(ours <= hop.unwrap() as f64 + 1e-8);
                for s in 0..30 {
                    assert!(r(p, q) <= r(p, s) + r(s, q) + 1e-8);
                }
            }
        }
    }

    #[test]
    fn sketch_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = synth::connected_erdos_renyi(40, 0.15, &mut rng);
        let a = ResistanceSketch::new(&g, 0.3, 5, SolveParams::default()).unwrap();
        let b = ResistanceSketch::new(&g, 0.3, 5, SolveParams::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.query(3, 3), 0.0);
        assert_eq!(a.t(), ResistanceSketch::projection_count(40, 0.3));
        let exact = effective_resistance(&g, 0, 1, tight()).unwrap();
        assert!((a.query(0, 1) / exact - 1.0).abs() <= 0.5);
        assert!(matches!(
            ResistanceSketch::new(&g, 1.5, 5, SolveParams::default()),
            Err(ScoreError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn dmd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = synth::connected_erdos_renyi(20, 0.2, &mut rng);
        for metric in [DistanceMetric::Resistance, DistanceMetric::Geodesic] {
            let d = dmd_pair(&g, &g, 2, 11, metric, tight()).unwrap();
            assert!((d - 1.0).abs() <= 1e-9);
        }
        let (gx, gy, _, (p, q)) = synth::cut_distortion_pair();
        assert_eq!(dmd_pair(&gx, &gy, p, q, DistanceMetric::Geodesic, tight()).unwrap(), 5.0);
        assert!(matches!(
            dmd_pair(&gx, &gy, 3, 3, DistanceMetric::Geodesic, tight()),
            Err(ScoreError::SameNode(3))
        ));

        let (gx, gy) = synth::random_knn_pair(30, 2, 2, 4, &mut rng);
        let px = oracle::dense_pseudoinverse(&gx).unwrap();
        let py = oracle::dense_pseudoinverse(&gy).unwrap();
        let pairs = [(0, 1), (4, 20), (7, 29)];
        let batch = dmd_pairs(&gx, &gy, &pairs, DistanceMetric::Resistance, tight()).unwrap();
        for (&(p, q), got) in pairs.iter().zip(batch) {
            let expect = oracle::resistance_from_pseudoinverse(&py, p, q)
                / oracle::resistance_from_pseudoinverse(&px, p, q);
            let single = dmd_pair(&gx, &gy, p, q, DistanceMetric::Resistance, tight()).unwrap();
            assert!((got - expect).abs() <= 1e-6 * expect);
            assert_eq!(got, single);
        }
    }

    #[test]
    fn cmd_examples() {
        let (gx, gy, cut, _) = synth::cut_distortion_pair();
        assert_eq!(cmd(&gx, &gy, &cut).unwrap(), 1.0 / 6.0);
        assert_eq!(cmd(&gx, &gx, &cut).unwrap(), 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (gx, gy) = synth::random_knn_pair(25, 2, 2, 3, &mut rng);
        let inside: Vec<bool> = (0..25).map(|i| i % 3 == 0).collect();
        let cut = CutSpec::new(inside).unwrap();
        let z = cut.indicator();
        let quad = |g: &Graph| {
            let lz = g.laplacian_apply(&z).unwrap();
            z.iter().zip(&lz).map(|(a, b)| a * b).sum::<f64>()
        };
        assert!((cmd(&gx, &gy, &cut).unwrap() - quad(&gy) / quad(&gx)).abs() <= 1e-12);
    }

    #[test]
    fn embedding_examples() {
        let v = vec![vec![1.0, -2.0, 1.0]];
        let emb = Embedding::from_parts(&[1.0], &v).unwrap();
        assert_eq!(emb.column(0), v[0]);
        assert_eq!(edge_spade(&emb, 1, 1).unwrap(), 0.0);
        assert!(matches!(
            Embedding::from_parts(&[0.0], &v),
            Err(ScoreError::NonPositiveEigenvalue { index: 0, .. })
        ));

        let two = Graph::from_edges(2, [(0, 1)]).unwrap();
        let emb = Embedding::from_parts(&[4.0], &[vec![0.5, -0.5]]).unwrap();
        let s = edge_spade(&emb, 0, 1).unwrap();
        assert_eq!(node_spade(&emb, &two).unwrap(), vec![s, s]);

        let star = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let emb = Embedding::from_parts(&[1.0, 2.0], &[vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0, 0.0, 1.0, 0.0, 2.0]])
            .unwrap();
        let nodes = node_spade(&emb, &star).unwrap();
        let mean = (1..5).map(|q| edge_spade(&emb, 0, q).unwrap()).sum::<f64>() / 4.0;
        assert!((nodes[0] - mean).abs() <= 1e-12);
    }

    #[test]
    fn scores_match_dense_eigenpairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (gx, gy) = synth::random_knn_pair(40, 2, 2, 4, &mut rng);
        let r = 3;
        let pairs = top_generalized_eigenpairs(&gx, &gy, &EigenParams::top(r).with_tol(1e-10)).unwrap();
        let emb = embed(&pairs).unwrap();
        let dense = oracle::dense_generalized_eigen(&gx, &gy).unwrap();
        // dense vectors have unit L_Y-norm; ours carry an extra √λ_i
        let expect = |p: usize, q: usize| -> f64 {
            (0..r)
                .map(|i| {
                    let l = dense.lambdas[i];
                    let d = dense.vectors[(p, i)] - dense.vectors[(q, i)];
                    l * l * d * d
                })
                .sum()
        };
        let edges = edge_scores(&emb, &gx).unwrap();
        for &((p, q), s) in &edges {
            assert!((s - expect(p, q)).abs() <= 1e-7 * s.max(1.0), "edge ({p},{q}): {s} vs {}", expect(p, q));
        }
        let nodes = node_spade(&emb, &gx).unwrap();
        for (p, &node) in nodes.iter().enumerate() {
            let nbrs = gx.neighbors(p);
            let direct = nbrs.iter().map(|&q| edge_spade(&emb, p, q).unwrap()).sum::<f64>() / nbrs.len() as f64;
            assert!((node - direct).abs() <= 1e-12 * direct.max(1.0));
            let dense_mean = nbrs.iter().map(|&q| expect(p, q)).sum::<f64>() / nbrs.len() as f64;
            assert!((node - dense_mean).abs() <= 1e-7 * dense_mean.max(1.0));
        }
        for (i, &l) in emb.lambdas().iter().enumerate() {
            let col = emb.column(i);
            let rq = gx.quadratic_form(&col) / gy.quadratic_form(&col);
            assert!((rq - l).abs() <= 1e-8 * l);
        }
    }

    #[test]
    fn identical_regular_graphs_have_flat_edge_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let g = synth::random_regular(40, 4, &mut rng);
            let pairs = top_generalized_eigenpairs(&g, &g, &EigenParams::top(2)).unwrap();
            let emb = embed(&pairs).unwrap();
            let scores: Vec<f64> = edge_scores(&emb, &g).unwrap().into_iter().map(|(_, s)| s).collect();
            let max = scores.iter().cloned().fold(0.0, f64::max);
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            assert!(max / mean <= 10.0, "max/mean = {}", max / mean);
        }
    }

    #[test]
    fn aligned_edges_follow_cubic_law() {
        let (gx, gy, e1, e2) = synth::aligned_shortcut_pair(5, 10, 20);
        let pairs = top_generalized_eigenpairs(&gx, &gy, &EigenParams::top(2).with_tol(1e-10)).unwrap();
        let emb = embed(&pairs).unwrap();
        let points: Vec<(f64, f64)> = [e1, e2]
            .iter()
            .map(|&(p, q)| {
                let gamma = dmd_pair(&gx, &gy, p, q, DistanceMetric::Resistance, tight()).unwrap();
                (gamma, edge_spade(&emb, p, q).unwrap())
            })
            .collect();
        let c = points.iter().map(|(g, s)| s * g.powi(3)).sum::<f64>() / points.iter().map(|(g, _)| g.powi(6)).sum::<f64>();
        for (g, s) in points {
            assert!((s - c * g.powi(3)).abs() <= 0.1 * c * g.powi(3));
        }
    }

    #[test]
    fn ranking_examples() {
        assert_eq!(rank_nodes(&[0.1, 0.9, 0.5], 2), vec![1, 2]);
        assert_eq!(rank_nodes(&[1.0; 5], 3), vec![0, 1, 2]);
        assert_eq!(rank_nodes(&[0.3, 0.2], 10), vec![0, 1]);
        let scored = [((0, 1), 0.5), ((0, 2), 0.7), ((1, 2), 0.7)];
        assert_eq!(top_edges(&scored, 2), vec![((0, 2), 0.7), ((1, 2), 0.7)]);
    }

    #[test]
    fn report_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (gx, gy) = synth::random_knn_pair(50, 2, 2, 4, &mut rng);
        let report = ScoreReport::compute(&gx, &gy, &EigenParams::top(2)).unwrap();
        let mut sorted = report.ranking.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert!(report.node_scores.iter().all(|&s| s >= 0.0));
        assert_eq!(report.edge_scores.len(), gx.edge_count());
        assert_eq!(report.model_score, report.lambdas[0]);
    }

    proptest! {
        #[test]
        fn ranking_matches_full_sort(scores in proptest::collection::vec(0u8..20, 1..60), k in 0usize..70) {
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let mut pairs: Vec<(f64, usize)> = scores.iter().copied().zip(0..).collect();
            pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            let expect: Vec<usize> = pairs.into_iter().map(|(_, i)| i).take(k).collect();
            prop_assert_eq!(rank_nodes(&scores, k), expect);
        }
    }
}
