use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use spade_core::knn::build_graph_pair;
use spade_core::matrix::{load_matrix, save_matrix};
use spade_core::scores::{dmd_pair, rank_nodes};
use spade_core::spectral::model_spade;
use spade_core::{oracle, synth, ConnectPolicy, DenseMatrix, DistanceMetric, Dtype, KnnParams, MatrixFormat, ScoreReport};
use spade_core::{EigenParams, SolveParams};

/// Bytes laid out by hand the way an external exporter writes them.
fn spmx_bytes(dtype: u8, rows: u64, cols: u64, payload: &[u8]) -> Vec<u8> {
    let mut out = b"SPMX".to_vec();
    out.push(1);
    out.push(dtype);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(payload);
    out
}

#[test]
fn reads_externally_written_binary_matrices() {
    let dir = TempDir::new().unwrap();
    let f32_payload: Vec<u8> = [1.5f32, -2.0, 0.25, 4.0, 5.0, 6.0]
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    let path = dir.path().join("logits.spmx");
    std::fs::write(&path, spmx_bytes(0, 2, 3, &f32_payload)).unwrap();
    let m = load_matrix(&path, MatrixFormat::Auto).unwrap();
    assert_eq!((m.rows(), m.cols(), m.dtype()), (2, 3, Dtype::F32));
    assert_eq!(m.row(0), &[1.5, -2.0, 0.25]);

    let zeros = spmx_bytes(1, 1, 3, &[0u8; 24]);
    std::fs::write(&path, zeros).unwrap();
    let m = load_matrix(&path, MatrixFormat::Binary).unwrap();
    assert_eq!(m.data(), &[0.0, 0.0, 0.0]);

    let out = dir.path().join("copy.spmx");
    save_matrix(&m, &out, MatrixFormat::Binary).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&path).unwrap());
}

#[test]
fn samples_to_ranking() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x = synth::random_points(300, 4, &mut rng);
    // fold the first coordinate so far-apart inputs land close together
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|i| {
            let r = x.row(i);
            vec![(r[0] - 0.5).abs(), r[1], r[2]]
        })
        .collect();
    let y = DenseMatrix::from_rows(&rows).unwrap();
    let pair = build_graph_pair(&x, &y, &KnnParams::exact(10), ConnectPolicy::GiantComponent).unwrap();
    assert!(pair.gx.is_connected() && pair.gy.is_connected());

    let report = ScoreReport::compute(&pair.gx, &pair.gy, &EigenParams::top(2)).unwrap();
    let dense = oracle::dense_generalized_eigen(&pair.gx, &pair.gy).unwrap();
    assert!((report.model_score - dense.lambdas[0]).abs() <= 1e-5 * dense.lambdas[0]);
    assert_eq!(report.ranking[..5], rank_nodes(&report.node_scores, 5)[..]);

    let identity = model_spade(&pair.gx, &pair.gx, 1e-6, 0).unwrap();
    assert!(report.model_score > identity);

    let worst = report.ranking[0];
    let q = pair.gx.neighbors(worst)[0];
    let d = dmd_pair(&pair.gx, &pair.gy, worst, q, DistanceMetric::Resistance, SolveParams::default()).unwrap();
    assert!(d > 0.0 && d <= report.model_score * (1.0 + 1e-6));
}
