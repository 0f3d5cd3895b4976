//! kNN graph construction over sample matrices.
//!
//! Edge `(i, j)` is present when `j` is among the `k` nearest neighbors of
//! `i` or vice versa (union symmetrization), with unit weight. Exact mode
//! breaks distance ties by ascending node index.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::hnsw::{squared_distance, ProximityIndex};
use crate::matrix::DenseMatrix;

#[derive(Debug, Error)]
pub enum KnnError {
    #[error("invalid kNN parameters: {0}")]
    InvalidParams(String),
    #[error("k = {k} needs more than {k} samples, got {n}")]
    TooFewSamples { k: usize, n: usize },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("graph still has {components} components at k = {k} (cap)")]
    GrowCapReached { k: usize, components: usize },
    #[error("input has {x_rows} rows but output has {y_rows}")]
    RowMismatch { x_rows: usize, y_rows: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnnMode {
    #[default]
    Exact,
    Approximate,
}

impl std::str::FromStr for KnnMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "approximate" | "approx" => Ok(Self::Approximate),
            other => Err(format!("unknown kNN mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnParams {
    pub k: usize,
    pub metric: Metric,
    pub mode: KnnMode,
    /// Beam width for approximate queries and construction; `≥ k`.
    pub approx_ef: usize,
    pub seed: u64,
}

impl KnnParams {
    pub fn exact(k: usize) -> Self {
        Self {
            k,
            metric: Metric::Euclidean,
            mode: KnnMode::Exact,
            approx_ef: k.max(64),
            seed: 0,
        }
    }

    pub fn approximate(k: usize, approx_ef: usize, seed: u64) -> Self {
        Self {
            k,
            metric: Metric::Euclidean,
            mode: KnnMode::Approximate,
            approx_ef,
            seed,
        }
    }

    fn validate(&self, n: usize) -> Result<(), KnnError> {
        if self.k == 0 {
            return Err(KnnError::InvalidParams("k must be at least 1".into()));
        }
        if self.k >= n {
            return Err(KnnError::TooFewSamples { k: self.k, n });
        }
        if self.mode == KnnMode::Approximate && self.approx_ef < self.k {
            return Err(KnnError::InvalidParams(format!(
                "approx_ef {} is smaller than k {}",
                self.approx_ef, self.k
            )));
        }
        Ok(())
    }
}

/// Neighbor lists before symmetrization: `picks[i]` holds `i`'s own choices.
pub fn knn_lists(x: &DenseMatrix, params: &KnnParams) -> Result<Vec<Vec<usize>>, KnnError> {
    let n = x.rows();
    params.validate(n)?;
    let k = params.k;
    let lists = match params.mode {
        KnnMode::Exact => (0..n)
            .into_par_iter()
            .map(|i| {
                let q = x.row(i);
                let mut cand: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (squared_distance(q, x.row(j)), j))
                    .collect();
                let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                cand.select_nth_unstable_by(k - 1, by_dist);
                cand.truncate(k);
                cand.sort_by(by_dist);
                cand.into_iter().map(|(_, j)| j).collect()
            })
            .collect(),
        KnnMode::Approximate => {
            let m = k.clamp(8, 48);
            let index = ProximityIndex::build(x, m, params.approx_ef, params.seed);
            (0..n)
                .into_par_iter()
                .map(|i| index.neighbors_of(i, k, params.approx_ef))
                .collect()
        }
    };
    Ok(lists)
}

pub fn build_knn(x: &DenseMatrix, params: &KnnParams) -> Result<Graph, KnnError> {
    let lists = knn_lists(x, params)?;
    let edges = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&j| (i, j)));
    Ok(Graph::from_edges(x.rows(), edges.collect::<Vec<_>>())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConnectPolicy {
    #[default]
    Error,
    GrowK,
    GiantComponent,
}

impl std::str::FromStr for ConnectPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(Self::Error),
            "grow_k" | "grow-k" => Ok(Self::GrowK),
            "giant_component" | "giant-component" => Ok(Self::GiantComponent),
            other => Err(format!("unknown connect policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReport {
    /// Components of the graph as first built.
    pub components: usize,
    /// `k` of the returned graph.
    pub final_k: usize,
    /// Original indices of the kept nodes when the giant component was
    /// extracted; node `i` of the returned graph is `retained[i]`.
    pub retained: Option<Vec<usize>>,
}

/// Largest component's nodes in ascending order; ties go to the component
/// found first.
pub fn largest_component(g: &Graph) -> Vec<usize> {
    let labels = g.connected_components();
    let count = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    let best = (0..count).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap_or(0);
    (0..g.node_count()).filter(|&i| labels[i] == best).collect()
}

pub fn ensure_connected(
    g: Graph,
    x: &DenseMatrix,
    params: &KnnParams,
    policy: ConnectPolicy,
) -> Result<(Graph, ComponentReport), KnnError> {
    let components = g.component_count();
    let mut report = ComponentReport {
        components,
        final_k: params.k,
        retained: None,
    };
    if components == 1 {
        return Ok((g, report));
    }
    match policy {
        ConnectPolicy::Error => Err(KnnError::Disconnected { components }),
        ConnectPolicy::GrowK => {
            let cap = x.rows() - 1;
            let mut p = params.clone();
            let mut c = components;
            while p.k < cap {
                p.k = (p.k * 2).min(cap);
                p.approx_ef = p.approx_ef.max(p.k);
                let grown = build_knn(x, &p)?;
                c = grown.component_count();
                if c == 1 {
                    report.final_k = p.k;
                    return Ok((grown, report));
                }
            }
            Err(KnnError::GrowCapReached { k: p.k, components: c })
        }
        ConnectPolicy::GiantComponent => {
            let keep = largest_component(&g);
            let sub = g.induced_subgraph(&keep)?;
            report.retained = Some(keep);
            Ok((sub, report))
        }
    }
}

/// Input and output graphs over the same (possibly reduced) node set.
#[derive(Debug, Clone)]
pub struct GraphPair {
    pub gx: Graph,
    pub gy: Graph,
    /// Original sample index of every node.
    pub node_map: Vec<usize>,
    pub x_report: ComponentReport,
    pub y_report: ComponentReport,
}

/// Builds both kNN graphs and makes them connected under `policy`.
///
/// With [`ConnectPolicy::GiantComponent`] both graphs are restricted to a
/// common node set, alternating sides until each induced graph is connected.
pub fn build_graph_pair(
    x: &DenseMatrix,
    y: &DenseMatrix,
    params: &KnnParams,
    policy: ConnectPolicy,
) -> Result<GraphPair, KnnError> {
    if x.rows() != y.rows() {
        return Err(KnnError::RowMismatch {
            x_rows: x.rows(),
            y_rows: y.rows(),
        });
    }
    let gx0 = build_knn(x, params)?;
    let gy0 = build_knn(y, params)?;
    if policy != ConnectPolicy::GiantComponent {
        let (gx, x_report) = ensure_connected(gx0, x, params, policy)?;
        let (gy, y_report) = ensure_connected(gy0, y, params, policy)?;
        return Ok(GraphPair {
            gx,
            gy,
            node_map: (0..x.rows()).collect(),
            x_report,
            y_report,
        });
    }
    let x_components = gx0.component_count();
    let y_components = gy0.component_count();
    let mut nodes: Vec<usize> = (0..x.rows()).collect();
    let (mut gx, mut gy) = (gx0, gy0);
    loop {
        let keep_x = largest_component(&gx);
        if keep_x.len() < nodes.len() {
            nodes = keep_x.iter().map(|&i| nodes[i]).collect();
            gx = gx.induced_subgraph(&keep_x)?;
            gy = gy.induced_subgraph(&keep_x)?;
        }
        let keep_y = largest_component(&gy);
        if keep_y.len() < nodes.len() {
            nodes = keep_y.iter().map(|&i| nodes[i]).collect();
            gx = gx.induced_subgraph(&keep_y)?;
            gy = gy.induced_subgraph(&keep_y)?;
            continue;
        }
        if gx.is_connected() {
            break;
        }
    }
    let retained = (nodes.len() < x.rows()).then(|| nodes.clone());
    Ok(GraphPair {
        gx,
        gy,
        node_map: nodes,
        x_report: ComponentReport {
            components: x_components,
            final_k: params.k,
            retained: retained.clone(),
        },
        y_report: ComponentReport {
            components: y_components,
            final_k: params.k,
            retained,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn line(xs: &[f64]) -> DenseMatrix {
        DenseMatrix::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    /// Brute-force oracle: full sort of all pairwise distances per row.
    fn oracle_edges(x: &DenseMatrix, k: usize) -> BTreeSet<(usize, usize)> {
        let n = x.rows();
        let mut edges = BTreeSet::new();
        for i in 0..n {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
                    (s, j)
                })
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, j) in &d[..k] {
                edges.insert((i.min(j), i.max(j)));
            }
        }
        edges
    }

    #[test]
    fn three_points_on_a_line() {
        let g = build_knn(&line(&[0.0, 1.0, 10.0]), &KnnParams::exact(1)).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn duplicates_are_mutual_neighbors() {
        let g = build_knn(&line(&[3.0, 3.0]), &KnnParams::exact(1)).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        // node 1 is equidistant from 0 and 2
        let lists = knn_lists(&line(&[0.0, 1.0, 2.0]), &KnnParams::exact(1)).unwrap();
        assert_eq!(lists[1], vec![0]);
    }

    #[test]
    fn parameter_errors() {
        let x = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(build_knn(&x, &KnnParams::exact(3)), Err(KnnError::TooFewSamples { .. })));
        assert!(matches!(build_knn(&x, &KnnParams::exact(0)), Err(KnnError::InvalidParams(_))));
        assert!(matches!(
            build_knn(&x, &KnnParams::approximate(2, 1, 0)),
            Err(KnnError::InvalidParams(_))
        ));
    }

    #[test]
    fn approximate_recall_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = synth::random_points(1000, 8, &mut rng);
        let exact = build_knn(&x, &KnnParams::exact(10)).unwrap();
        let params = KnnParams::approximate(10, 64, 9);
        let approx = build_knn(&x, &params).unwrap();
        let approx_set: BTreeSet<_> = approx.edges().iter().copied().collect();
        let hits = exact.edges().iter().filter(|e| approx_set.contains(e)).count();
        let recall = hits as f64 / exact.edge_count() as f64;
        assert!(recall >= 0.90, "recall {recall}");
        assert_eq!(build_knn(&x, &params).unwrap(), approx);
    }

    fn two_clusters() -> DenseMatrix {
        let xs = [0.0, 0.1, 0.2, 0.3, 0.4, 100.0, 100.1, 100.2, 100.3, 100.4];
        line(&xs)
    }

    #[test]
    fn connected_graph_passes_through() {
        let x = line(&[0.0, 1.0, 10.0]);
        let g = build_knn(&x, &KnnParams::exact(1)).unwrap();
        for policy in [ConnectPolicy::Error, ConnectPolicy::GrowK, ConnectPolicy::GiantComponent] {
            let (h, report) = ensure_connected(g.clone(), &x, &KnnParams::exact(1), policy).unwrap();
            assert_eq!(h, g);
            assert_eq!(report.components, 1);
            assert_eq!(report.retained, None);
        }
    }

    #[test]
    fn grow_k_doubles_until_connected() {
        let x = two_clusters();
        let params = KnnParams::exact(2);
        let g = build_knn(&x, &params).unwrap();
        let (h, report) = ensure_connected(g.clone(), &x, &params, ConnectPolicy::GrowK).unwrap();
        assert!(h.is_connected());
        assert_eq!(report.components, 2);
        assert_eq!(report.final_k, 8);
        assert!(matches!(
            ensure_connected(g, &x, &params, ConnectPolicy::Error),
            Err(KnnError::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn giant_component_keeps_largest_cluster() {
        let x = line(&[0.0, 1.0, 2.0, 3.0, 50.0, 51.0]);
        let params = KnnParams::exact(1);
        let g = build_knn(&x, &params).unwrap();
        let (h, report) = ensure_connected(g, &x, &params, ConnectPolicy::GiantComponent).unwrap();
        assert_eq!(report.retained, Some(vec![0, 1, 2, 3]));
        assert_eq!(h.node_count(), 4);
        assert!(h.is_connected());
    }

    #[test]
    fn pair_restriction_makes_both_sides_connected() {
        let x = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = line(&[0.0, 1.0, 2.0, 40.0, 41.0, 80.0]);
        let pair = build_graph_pair(&x, &y, &KnnParams::exact(1), ConnectPolicy::GiantComponent).unwrap();
        assert!(pair.gx.is_connected() && pair.gy.is_connected());
        assert_eq!(pair.node_map, vec![0, 1, 2]);
        assert!(matches!(
            build_graph_pair(&x, &line(&[0.0, 1.0]), &KnnParams::exact(1), ConnectPolicy::Error),
            Err(KnnError::RowMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn exact_matches_oracle_and_own_picks(n in 3usize..40, dim in 1usize..4, k in 1usize..6, seed in any::<u64>()) {
            prop_assume!(k < n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = synth::random_points(n, dim, &mut rng);
            let params = KnnParams::exact(k);
            let g = build_knn(&x, &params).unwrap();
            let got: BTreeSet<_> = g.edges().iter().copied().collect();
            prop_assert_eq!(got, oracle_edges(&x, k));
            let lists = knn_lists(&x, &params).unwrap();
            for (i, list) in lists.iter().enumerate() {
                prop_assert!(g.degree(i) >= k);
                for &j in list {
                    prop_assert!(g.has_edge(i, j));
                }
            }
            prop_assert_eq!(build_knn(&x, &params).unwrap(), g);
        }
    }
}
