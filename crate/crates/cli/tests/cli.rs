use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use spade_core::graph::{load_graph, save_graph};
use spade_core::matrix::{load_matrix_with, save_matrix, LoadOptions};
use spade_core::{synth, DenseMatrix, MatrixFormat};

fn spade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = spade(args);
    assert!(
        out.status.success(),
        "spade {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Input points and a smooth nonlinear image of them.
fn write_samples(dir: &TempDir, n: usize, format: MatrixFormat) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x = synth::random_points(n, 3, &mut rng);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r = x.row(i);
            vec![r[0] + 0.3 * (9.0 * r[1]).sin(), r[2] * r[2]]
        })
        .collect();
    let y = DenseMatrix::from_rows(&rows).unwrap();
    let ext = if format == MatrixFormat::Binary { "spmx" } else { "csv" };
    let (px, py) = (path(dir, &format!("x.{ext}")), path(dir, &format!("y.{ext}")));
    save_matrix(&x, &px, format).unwrap();
    save_matrix(&y, &py, format).unwrap();
    (px, py)
}

#[test]
fn graph_of_three_points_on_a_line() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "line.csv");
    fs::write(&input, "0\n1\n2\n").unwrap();
    let stdout = ok(&["graph", "--x", s(&input), "--k", "1"]);
    assert_eq!(stdout, "SPGR 3 2\n0 1\n1 2\n");

    let out = path(&dir, "line.spgr");
    ok(&["graph", "--x", s(&input), "--k", "1", "--out", s(&out)]);
    assert_eq!(load_graph(&out).unwrap().edges(), &[(0, 1), (1, 2)]);
}

#[test]
fn identical_graphs_score_one() {
    let dir = TempDir::new().unwrap();
    let g = synth::connected_erdos_renyi(40, 0.15, &mut ChaCha8Rng::seed_from_u64(3));
    let (a, b) = (path(&dir, "a.spgr"), path(&dir, "b.spgr"));
    save_graph(&g, &a).unwrap();
    save_graph(&g, &b).unwrap();
    assert_eq!(ok(&["score", "--gx", s(&a), "--gy", s(&b)]), "1.0\n");
    let lines = ok(&["score", "--gx", s(&a), "--gy", s(&b), "--m", "5"]);
    assert_eq!(lines, "1.0\n0.0\n");
}

#[test]
fn top_edges_are_more_distorted_than_random_edges() {
    let dir = TempDir::new().unwrap();
    let (_, gx, gy) = synth::planted_tear_pair(500, 10, &mut ChaCha8Rng::seed_from_u64(5));
    let (a, b) = (path(&dir, "gx.spgr"), path(&dir, "gy.spgr"));
    save_graph(&gx, &a).unwrap();
    save_graph(&gy, &b).unwrap();
    let report = path(&dir, "dmd.csv");
    let stdout = ok(&[
        "dmd", "--gx", s(&a), "--gy", s(&b), "--metric", "geodesic", "--top", "100", "--out", s(&report),
    ]);
    let value = |key: &str| -> f64 {
        let line = stdout.lines().find(|l| l.starts_with(key)).unwrap();
        line[key.len() + 1..].parse().unwrap()
    };
    assert!(value("top_mean_dmd") > value("random_mean_dmd"));

    let table = load_matrix_with(&report, MatrixFormat::Csv, LoadOptions { header: true }).unwrap();
    assert_eq!(table.rows(), 200);
    let top_rows = (0..200).filter(|&i| table.get(i, 0) == 1.0).count();
    assert_eq!(top_rows, 100);
}

#[test]
fn pair_list_distortions() {
    let dir = TempDir::new().unwrap();
    let (gx, gy, _, _) = synth::cut_distortion_pair();
    let (a, b) = (path(&dir, "gx.spgr"), path(&dir, "gy.spgr"));
    save_graph(&gx, &a).unwrap();
    save_graph(&gy, &b).unwrap();
    let pairs = path(&dir, "pairs.csv");
    fs::write(&pairs, "0,5\n1,2\n").unwrap();
    let stdout = ok(&["dmd", "--gx", s(&a), "--gy", s(&b), "--metric", "geodesic", "--pairs", s(&pairs)]);
    let rows: Vec<&str> = stdout.lines().skip(2).collect();
    assert_eq!(rows, ["0,5,5.0", "1,2,1.0"]);

    let stdout = ok(&["dmd", "--gx", s(&a), "--gy", s(&b), "--pairs", s(&pairs), "--oracle"]);
    assert_eq!(stdout.lines().count(), 4);
}

#[test]
fn outputs_are_deterministic_and_reloadable() {
    let dir = TempDir::new().unwrap();
    let (x, y) = write_samples(&dir, 200, MatrixFormat::Csv);
    for mode in ["exact", "approximate"] {
        let args = ["node-scores", "--x", s(&x), "--y", s(&y), "--seed", "9", "--mode", mode];
        let first = ok(&args);
        assert_eq!(first, ok(&args));
        assert!(first.starts_with("# meta command=node-scores seed=9 version="));
        let out = path(&dir, "nodes.csv");
        fs::write(&out, &first).unwrap();
        let table = load_matrix_with(&out, MatrixFormat::Auto, LoadOptions { header: true }).unwrap();
        assert_eq!(table.cols(), 2);
        assert_eq!(table.rows(), 200);
        assert!((0..200).all(|i| table.get(i, 0) == i as f64 && table.get(i, 1) >= 0.0));
    }

    let emb = path(&dir, "emb.csv");
    ok(&["embed", "--x", s(&x), "--y", s(&y), "--r", "3", "--out", s(&emb)]);
    let table = load_matrix_with(&emb, MatrixFormat::Csv, LoadOptions { header: true }).unwrap();
    assert_eq!((table.rows(), table.cols()), (200, 4));

    let edges = ok(&["edge-scores", "--x", s(&x), "--y", s(&y)]);
    assert!(edges.lines().nth(1) == Some("p,q,score"));

    let (gx, gy) = (path(&dir, "gx.spgr"), path(&dir, "gy.spgr"));
    ok(&["graph", "--x", s(&x), "--y", s(&y), "--out", s(&gx), "--out-y", s(&gy)]);
    let from_graphs = ok(&["node-scores", "--gx", s(&gx), "--gy", s(&gy), "--seed", "9"]);
    let from_matrices = ok(&["node-scores", "--x", s(&x), "--y", s(&y), "--seed", "9"]);
    assert_eq!(from_graphs, from_matrices);
}

#[test]
fn binary_matrices_match_csv_input() {
    let dir = TempDir::new().unwrap();
    let (cx, cy) = write_samples(&dir, 150, MatrixFormat::Csv);
    let (bx, by) = write_samples(&dir, 150, MatrixFormat::Binary);
    let csv = ok(&["rank", "--x", s(&cx), "--y", s(&cy), "--top-k", "5"]);
    let binary = ok(&["rank", "--x", s(&bx), "--y", s(&by), "--top-k", "5"]);
    let explicit = ok(&["rank", "--x", s(&bx), "--y", s(&by), "--top-k", "5", "--format", "binary"]);
    assert_eq!(csv, binary);
    assert_eq!(binary, explicit);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[1], "rank,node_id,score");
    assert_eq!(rows.len(), 7);
    assert!(rows[2].starts_with("1,"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let (x, y) = write_samples(&dir, 120, MatrixFormat::Csv);
    let config = path(&dir, "run.json");
    let json = format!(
        r#"{{"command": "rank", "x": {:?}, "y": {:?}, "k": 8, "top_k": 3, "seed": 4}}"#,
        s(&x),
        s(&y)
    );
    fs::write(&config, json).unwrap();
    let from_file = ok(&["rank", "--config", s(&config)]);
    let from_flags = ok(&["rank", "--x", s(&x), "--y", s(&y), "--k", "8", "--top-k", "3", "--seed", "4"]);
    assert_eq!(from_file, from_flags);
    let overridden = ok(&["rank", "--config", s(&config), "--top-k", "2"]);
    assert_eq!(overridden.lines().count(), 4);

    let out = spade(&["score", "--config", s(&config)]);
    assert!(!out.status.success());
}

#[test]
fn failures_print_one_json_error_line() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, "1,2\n3\n").unwrap();
    let out = spade(&["score", "--x", s(&bad), "--y", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["error"]["kind"], "matrix");
    assert!(err["error"]["context"].as_str().unwrap().contains("--x"));

    let out = spade(&["score"]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");

    let out = spade(&["score", "--x", s(&bad), "--gx", s(&bad), "--gy", s(&bad)]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");

    let split = path(&dir, "split.spgr");
    fs::write(&split, "SPGR 4 2\n0 1\n2 3\n").unwrap();
    let out = spade(&["score", "--gx", s(&split), "--gy", s(&split)]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "eigen");
}

#[test]
fn oracle_check_on_random_and_supplied_instances() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&["oracle-check", "--trials", "4", "--n", "12"]);
    let rows: Vec<&str> = stdout.lines().skip(2).collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("1")));

    let (gx, gy, _, _) = synth::cut_distortion_pair();
    let (a, b) = (path(&dir, "gx.spgr"), path(&dir, "gy.spgr"));
    save_graph(&gx, &a).unwrap();
    save_graph(&gy, &b).unwrap();
    let stdout = ok(&["oracle-check", "--gx", s(&a), "--gy", s(&b)]);
    assert!(stdout.contains("cut_ratio_above_inverse_eigenvalue,1"));
}
