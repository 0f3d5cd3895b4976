//! Subcommand implementations.

use std::collections::HashMap;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spade_core::graph::{load_graph, save_graph};
use spade_core::knn::{build_graph_pair, build_knn, ensure_connected};
use spade_core::matrix::{load_matrix_with, LoadOptions};
use spade_core::oracle;
use spade_core::scores::{self, dmd_pairs, edge_spade, embed, random_edges, top_edges};
use spade_core::spectral::{riemannian_from_eigenvalues, top_generalized_eigenpairs};
use spade_core::synth;
use spade_core::{
    DenseMatrix, DistanceMetric, EigenPairs, EigenParams, Graph, KnnMode, KnnParams, ResistanceSketch, SolveParams,
};

use crate::config::{Inputs, Settings};
use crate::error::CliError;
use crate::output::{emit, meta_line, num, rounded, Table};

const DEFAULT_K: usize = 10;

/// Independent seeds drawn in a fixed order from the one user seed.
struct Seeds {
    knn: u64,
    eigen: u64,
    sketch: u64,
    sample: u64,
}

impl Seeds {
    fn new(seed: u64) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        Self {
            knn: master.next_u64(),
            eigen: master.next_u64(),
            sketch: master.next_u64(),
            sample: master.next_u64(),
        }
    }
}

/// Graph pair plus the original sample index of every node.
struct Loaded {
    gx: Graph,
    gy: Graph,
    node_map: Vec<usize>,
}

pub struct Context {
    pub command: &'static str,
    pub settings: Settings,
    seeds: Seeds,
}

impl Context {
    pub fn new(command: &'static str, settings: Settings) -> Self {
        let seeds = Seeds::new(settings.seed);
        Self {
            command,
            settings,
            seeds,
        }
    }

    fn meta(&self, extra: &[(&str, String)]) -> String {
        meta_line(self.command, self.settings.seed, extra)
    }

    fn knn_params(&self) -> KnnParams {
        let s = &self.settings;
        let k = s.k.unwrap_or(DEFAULT_K);
        match s.mode {
            KnnMode::Exact => KnnParams::exact(k),
            KnnMode::Approximate => KnnParams::approximate(k, s.ef.max(k), self.seeds.knn),
        }
    }

    fn eigen_params(&self, r: usize) -> EigenParams {
        EigenParams {
            r,
            tol: self.settings.tol,
            max_iter: self.settings.max_iter,
            seed: self.seeds.eigen,
            solve: None,
        }
    }

    fn load_matrix(&self, flag: &str, path: &Path) -> Result<DenseMatrix, CliError> {
        let options = LoadOptions {
            header: self.settings.header,
        };
        load_matrix_with(path, self.settings.format, options)
            .map_err(|e| CliError::at(format!("loading {flag} {}", path.display()))(e.into()))
    }

    fn load_pair(&self) -> Result<Loaded, CliError> {
        match &self.settings.inputs {
            Inputs::Graphs { gx, gy } => {
                let read = |flag: &str, path: &Path| {
                    load_graph(path).map_err(|e| CliError::at(format!("loading {flag} {}", path.display()))(e.into()))
                };
                let (gx, gy) = (read("--gx", gx)?, read("--gy", gy)?);
                if gx.node_count() != gy.node_count() {
                    return Err(CliError::Config(format!(
                        "--gx has {} nodes but --gy has {}",
                        gx.node_count(),
                        gy.node_count()
                    )));
                }
                let node_map = (0..gx.node_count()).collect();
                Ok(Loaded { gx, gy, node_map })
            }
            Inputs::Matrices {
                x: Some(x),
                y: Some(y),
            } => {
                let (xm, ym) = (self.load_matrix("--x", x)?, self.load_matrix("--y", y)?);
                let pair = build_graph_pair(&xm, &ym, &self.knn_params(), self.settings.connect)
                    .map_err(|e| CliError::at("building kNN graphs")(e.into()))?;
                if pair.node_map.len() < xm.rows() {
                    eprintln!(
                        "# note: kept {} of {} samples in the common giant component",
                        pair.node_map.len(),
                        xm.rows()
                    );
                }
                for (side, report) in [("x", &pair.x_report), ("y", &pair.y_report)] {
                    if report.final_k != self.knn_params().k {
                        eprintln!("# note: {side} graph connected at k = {}", report.final_k);
                    }
                }
                Ok(Loaded {
                    gx: pair.gx,
                    gy: pair.gy,
                    node_map: pair.node_map,
                })
            }
            _ => Err(CliError::Config(format!(
                "`{}` needs --x and --y, or --gx and --gy",
                self.command
            ))),
        }
    }

    fn eigenpairs(&self, loaded: &Loaded, r: usize) -> Result<EigenPairs, CliError> {
        let pairs = top_generalized_eigenpairs(&loaded.gx, &loaded.gy, &self.eigen_params(r))
            .map_err(|e| CliError::at("solving the generalized eigenproblem")(e.into()))?;
        if self.settings.oracle {
            self.oracle_eigen_report(loaded, &pairs.lambdas)?;
        }
        Ok(pairs)
    }

    fn oracle_eigen_report(&self, loaded: &Loaded, lambdas: &[f64]) -> Result<(), CliError> {
        let dense = oracle::dense_generalized_eigen(&loaded.gx, &loaded.gy)
            .map_err(|e| CliError::at("dense oracle")(e.into()))?;
        for (i, (&ours, &theirs)) in lambdas.iter().zip(&dense.lambdas).enumerate() {
            eprintln!(
                "# oracle lambda_{} iterative={} dense={} relative_difference={:.3e}",
                i + 1,
                num(ours),
                num(theirs),
                (ours - theirs).abs() / theirs
            );
        }
        Ok(())
    }
}

pub fn graph(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let (x, y) = match &s.inputs {
        Inputs::Matrices { x, y } => (x.clone(), y.clone()),
        _ => return Err(CliError::Config("`graph` needs --x and/or --y".into())),
    };
    match (x, y) {
        (Some(_), Some(_)) => {
            let out_y = s
                .out_y
                .as_deref()
                .ok_or_else(|| CliError::Config("`graph` with --x and --y needs --out and --out-y".into()))?;
            let out = s
                .out
                .as_deref()
                .ok_or_else(|| CliError::Config("`graph` with --x and --y needs --out and --out-y".into()))?;
            let loaded = ctx.load_pair()?;
            write_graph(&loaded.gx, out)?;
            write_graph(&loaded.gy, out_y)
        }
        (Some(path), None) | (None, Some(path)) => {
            let m = ctx.load_matrix("input", &path)?;
            let params = ctx.knn_params();
            let g = build_knn(&m, &params).map_err(|e| CliError::at("building kNN graph")(e.into()))?;
            let (g, report) = ensure_connected(g, &m, &params, s.connect)
                .map_err(|e| CliError::at("connecting kNN graph")(e.into()))?;
            if let Some(kept) = &report.retained {
                eprintln!("# note: kept {} of {} samples in the giant component", kept.len(), m.rows());
            }
            match s.out.as_deref() {
                Some(out) => write_graph(&g, out),
                None => emit(&g.to_spgr(), None),
            }
        }
        (None, None) => Err(CliError::Config("`graph` needs --x and/or --y".into())),
    }
}

fn write_graph(g: &Graph, path: &Path) -> Result<(), CliError> {
    save_graph(g, path).map_err(|e| CliError::at(format!("writing {}", path.display()))(e.into()))
}

pub fn score(ctx: &Context) -> Result<(), CliError> {
    let loaded = ctx.load_pair()?;
    let r = ctx.settings.m.unwrap_or(1).max(1);
    let pairs = ctx.eigenpairs(&loaded, r)?;
    let lambda = pairs.lambdas[0];
    let mut stdout = format!("{}\n", rounded(lambda));
    let mut table = Table::new(ctx.meta(&[]), &["quantity", "value"]);
    table.row(["model_spade", &num(lambda)]);
    if ctx.settings.m.is_some() {
        let d = riemannian_from_eigenvalues(&pairs.lambdas);
        stdout.push_str(&format!("{}\n", rounded(d)));
        table.row(["riemannian_distance", &num(d)]);
    }
    if let Some(out) = ctx.settings.out.as_deref() {
        emit(&table.into_string(), Some(out))?;
    }
    emit(&stdout, None)
}

fn default_r(ctx: &Context) -> usize {
    ctx.settings.r.unwrap_or(2)
}

pub fn node_scores(ctx: &Context) -> Result<(), CliError> {
    let loaded = ctx.load_pair()?;
    let pairs = ctx.eigenpairs(&loaded, default_r(ctx))?;
    let emb = embed(&pairs).map_err(|e| CliError::at("embedding")(e.into()))?;
    let nodes = scores::node_spade(&emb, &loaded.gx).map_err(|e| CliError::at("node scores")(e.into()))?;
    let mut table = Table::new(ctx.meta(&[("r", pairs.len().to_string())]), &["node_id", "score"]);
    for (i, s) in nodes.iter().enumerate() {
        table.row([loaded.node_map[i].to_string(), num(*s)]);
    }
    emit(&table.into_string(), ctx.settings.out.as_deref())
}

pub fn edge_scores(ctx: &Context) -> Result<(), CliError> {
    let loaded = ctx.load_pair()?;
    let pairs = ctx.eigenpairs(&loaded, default_r(ctx))?;
    let emb = embed(&pairs).map_err(|e| CliError::at("embedding")(e.into()))?;
    let edges = scores::edge_scores(&emb, &loaded.gx).map_err(|e| CliError::at("edge scores")(e.into()))?;
    let mut table = Table::new(ctx.meta(&[("r", pairs.len().to_string())]), &["p", "q", "score"]);
    for ((p, q), s) in edges {
        table.row([loaded.node_map[p].to_string(), loaded.node_map[q].to_string(), num(s)]);
    }
    emit(&table.into_string(), ctx.settings.out.as_deref())
}

pub fn embed_cmd(ctx: &Context) -> Result<(), CliError> {
    let loaded = ctx.load_pair()?;
    let pairs = ctx.eigenpairs(&loaded, default_r(ctx))?;
    let emb = embed(&pairs).map_err(|e| CliError::at("embedding")(e.into()))?;
    let lambdas: Vec<String> = pairs.lambdas.iter().map(|&l| num(l)).collect();
    let names: Vec<String> = (1..=emb.dim()).map(|i| format!("v{i}")).collect();
    let mut columns = vec!["node_id"];
    columns.extend(names.iter().map(String::as_str));
    let mut table = Table::new(ctx.meta(&[("lambdas", lambdas.join(";"))]), &columns);
    for p in 0..emb.node_count() {
        let mut row = vec![loaded.node_map[p].to_string()];
        row.extend(emb.row(p).iter().map(|&c| num(c)));
        table.row(row);
    }
    emit(&table.into_string(), ctx.settings.out.as_deref())
}

pub fn rank(ctx: &Context) -> Result<(), CliError> {
    let loaded = ctx.load_pair()?;
    let pairs = ctx.eigenpairs(&loaded, default_r(ctx))?;
    let emb = embed(&pairs).map_err(|e| CliError::at("embedding")(e.into()))?;
    let nodes = scores::node_spade(&emb, &loaded.gx).map_err(|e| CliError::at("node scores")(e.into()))?;
    let top = scores::rank_nodes(&nodes, ctx.settings.top_k);
    let mut table = Table::new(ctx.meta(&[("r", pairs.len().to_string())]), &["rank", "node_id", "score"]);
    for (i, &p) in top.iter().enumerate() {
        table.row([(i + 1).to_string(), loaded.node_map[p].to_string(), num(nodes[p])]);
    }
    emit(&table.into_string(), ctx.settings.out.as_deref())
}

/// Distortions of `pairs` (internal node ids) under the configured metric.
fn distortions(ctx: &Context, loaded: &Loaded, pairs: &[(usize, usize)]) -> Result<Vec<f64>, CliError> {
    let s = &ctx.settings;
    let params = SolveParams::default();
    match (s.metric, s.epsilon) {
        (DistanceMetric::Resistance, Some(eps)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seeds.sketch);
            let sx = ResistanceSketch::new(&loaded.gx, eps, rng.next_u64(), params)
                .map_err(|e| CliError::at("sketching input graph")(e.into()))?;
            let sy = ResistanceSketch::new(&loaded.gy, eps, rng.next_u64(), params)
                .map_err(|e| CliError::at("sketching output graph")(e.into()))?;
            Ok(pairs.iter().map(|&(p, q)| sy.query(p, q) / sx.query(p, q)).collect())
        }
        (metric, _) => dmd_pairs(&loaded.gx, &loaded.gy, pairs, metric, params)
            .map_err(|e| CliError::at("distance distortion")(e.into())),
    }
}

fn read_pairs(ctx: &Context, path: &Path, loaded: &Loaded) -> Result<Vec<(usize, usize)>, CliError> {
    let m = ctx.load_matrix("--pairs", path)?;
    let bad = |msg: String| CliError::Input {
        path: path.display().to_string(),
        message: msg,
    };
    if m.cols() != 2 {
        return Err(bad(format!("expected 2 columns `p,q`, found {}", m.cols())));
    }
    let index: HashMap<usize, usize> = loaded.node_map.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let node = |row: usize, v: f64| -> Result<usize, CliError> {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(bad(format!("row {}: {v} is not a node id", row + 1)));
        }
        index
            .get(&(v as usize))
            .copied()
            .ok_or_else(|| bad(format!("row {}: node {v} is not in the graphs", row + 1)))
    };
    (0..m.rows())
        .map(|i| Ok((node(i, m.get(i, 0))?, node(i, m.get(i, 1))?)))
        .collect()
}

pub fn dmd(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let loaded = ctx.load_pair()?;
    let extra = [("metric", s.metric.to_string())];
    if let Some(path) = s.pairs.as_deref() {
        let pairs = read_pairs(ctx, path, &loaded)?;
        let values = distortions(ctx, &loaded, &pairs)?;
        if s.oracle && s.metric == DistanceMetric::Resistance {
            oracle_dmd_report(&loaded, &pairs, &values)?;
        }
        let mut table = Table::new(ctx.meta(&extra), &["p", "q", "dmd"]);
        for (&(p, q), v) in pairs.iter().zip(values) {
            table.row([loaded.node_map[p].to_string(), loaded.node_map[q].to_string(), num(v)]);
        }
        return emit(&table.into_string(), s.out.as_deref());
    }
    let Some(count) = s.top else {
        return Err(CliError::Config("`dmd` needs --pairs <file> or --top <N>".into()));
    };
    let pairs = ctx.eigenpairs(&loaded, s.r.unwrap_or(1))?;
    let emb = embed(&pairs).map_err(|e| CliError::at("embedding")(e.into()))?;
    let scored = scores::edge_scores(&emb, &loaded.gx).map_err(|e| CliError::at("edge scores")(e.into()))?;
    let top: Vec<(usize, usize)> = top_edges(&scored, count).into_iter().map(|(e, _)| e).collect();
    let random = random_edges(&loaded.gx, count, &mut ChaCha8Rng::seed_from_u64(ctx.seeds.sample));
    let top_d = distortions(ctx, &loaded, &top)?;
    let random_d = distortions(ctx, &loaded, &random)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let (top_mean, random_mean) = (mean(&top_d), mean(&random_d));

    let mut table = Table::new(ctx.meta(&extra), &["is_top", "p", "q", "edge_score", "dmd"]);
    for (flag, edges, values) in [("1", &top, &top_d), ("0", &random, &random_d)] {
        for (&(p, q), &v) in edges.iter().zip(values.iter()) {
            let score = edge_spade(&emb, p, q).map_err(|e| CliError::at("edge scores")(e.into()))?;
            table.row([
                flag.to_string(),
                loaded.node_map[p].to_string(),
                loaded.node_map[q].to_string(),
                num(score),
                num(v),
            ]);
        }
    }
    if let Some(out) = s.out.as_deref() {
        emit(&table.into_string(), Some(out))?;
    }
    let summary = format!(
        "top_mean_dmd={}\nrandom_mean_dmd={}\nratio={}\n",
        rounded(top_mean),
        rounded(random_mean),
        rounded(top_mean / random_mean)
    );
    emit(&summary, None)
}

fn oracle_dmd_report(loaded: &Loaded, pairs: &[(usize, usize)], values: &[f64]) -> Result<(), CliError> {
    let px = oracle::dense_pseudoinverse(&loaded.gx).map_err(|e| CliError::at("dense oracle")(e.into()))?;
    let py = oracle::dense_pseudoinverse(&loaded.gy).map_err(|e| CliError::at("dense oracle")(e.into()))?;
    let worst = pairs
        .iter()
        .zip(values)
        .map(|(&(p, q), &v)| {
            let dense = oracle::resistance_from_pseudoinverse(&py, p, q) / oracle::resistance_from_pseudoinverse(&px, p, q);
            (v - dense).abs() / dense
        })
        .fold(0.0, f64::max);
    eprintln!("# oracle dmd max_relative_difference={worst:.3e}");
    Ok(())
}

struct Check {
    instance: usize,
    name: &'static str,
    pass: bool,
    value: f64,
    bound: f64,
}

fn check_instance(ctx: &Context, instance: usize, loaded: &Loaded, out: &mut Vec<Check>) -> Result<(), CliError> {
    let (gx, gy) = (&loaded.gx, &loaded.gy);
    let n = gx.node_count();
    let oracle_err = |e: spade_core::OracleError| CliError::at(format!("instance {instance}: dense oracle"))(e.into());
    let mut params = ctx.eigen_params(1);
    params.tol = params.tol.min(1e-10);
    let lambda = top_generalized_eigenpairs(gx, gy, &params)
        .map_err(|e| CliError::at(format!("instance {instance}: eigensolver"))(e.into()))?
        .lambdas[0];

    let dense = oracle::dense_generalized_eigen(gx, gy).map_err(oracle_err)?.lambdas[0];
    let rel = (lambda - dense).abs() / dense;
    out.push(Check {
        instance,
        name: "eigenvalue_accuracy",
        pass: rel <= 0.005,
        value: rel,
        bound: 0.005,
    });

    let (gamma, _) = oracle::gamma_max_bruteforce(gx, gy, DistanceMetric::Resistance).map_err(oracle_err)?;
    out.push(Check {
        instance,
        name: "distortion_below_eigenvalue",
        pass: gamma <= lambda * (1.0 + 1e-9),
        value: gamma,
        bound: lambda,
    });

    if n <= oracle::CUT_ENUMERATION_CAP {
        let (zeta, _) = oracle::min_cmd_exhaustive(gx, gy).map_err(oracle_err)?;
        out.push(Check {
            instance,
            name: "cut_ratio_above_inverse_eigenvalue",
            pass: zeta >= (1.0 / lambda) * (1.0 - 1e-9),
            value: zeta,
            bound: 1.0 / lambda,
        });
    }

    let mut worst = f64::NEG_INFINITY;
    for g in [gx, gy] {
        let pinv = oracle::dense_pseudoinverse(g).map_err(oracle_err)?;
        for p in 0..n {
            let hops = g.bfs_distances(p);
            for (q, hop) in hops.iter().enumerate().skip(p + 1) {
                let gap = oracle::resistance_from_pseudoinverse(&pinv, p, q) - hop.unwrap_or(usize::MAX) as f64;
                worst = worst.max(gap);
            }
        }
    }
    out.push(Check {
        instance,
        name: "resistance_below_hops",
        pass: worst <= 1e-8,
        value: worst,
        bound: 1e-8,
    });
    Ok(())
}

pub fn oracle_check(ctx: &Context) -> Result<(), CliError> {
    let s = &ctx.settings;
    let mut checks = Vec::new();
    if matches!(s.inputs, Inputs::None) {
        let k = s.k.unwrap_or(4);
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seeds.sample);
        if k >= s.n {
            return Err(CliError::Config(format!("--k {k} must be below --n {}", s.n)));
        }
        for instance in 0..s.trials {
            let (gx, gy) = synth::random_knn_pair(s.n, 2, 2, k, &mut rng);
            let node_map = (0..s.n).collect();
            check_instance(ctx, instance, &Loaded { gx, gy, node_map }, &mut checks)?;
        }
    } else {
        check_instance(ctx, 0, &ctx.load_pair()?, &mut checks)?;
    }
    let mut table = Table::new(ctx.meta(&[]), &["instance", "check", "pass", "value", "bound"]);
    for c in &checks {
        table.row([
            c.instance.to_string(),
            c.name.to_string(),
            u8::from(c.pass).to_string(),
            num(c.value),
            num(c.bound),
        ]);
    }
    emit(&table.into_string(), s.out.as_deref())?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    eprintln!("# oracle-check: {} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
