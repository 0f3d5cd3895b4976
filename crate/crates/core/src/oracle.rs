//! Dense brute-force references for small graphs.
//!
//! Everything here forms full `n×n` matrices and uses `nalgebra`'s symmetric
//! eigensolver, so each routine has a hard size cap. They exist to check the
//! scalable routines, never to replace them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::graph::{CutSpec, Graph};
use crate::scores::DistanceMetric;

pub const PSEUDOINVERSE_CAP: usize = 2000;
pub const PENCIL_CAP: usize = 500;
pub const CUT_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what} is capped at n = {cap}, got n = {n}")]
    SizeCap { what: &'static str, cap: usize, n: usize },
    #[error("graph has {components} connected components")]
    Disconnected { components: usize },
    #[error("input graph has {gx} nodes but output graph has {gy}")]
    SizeMismatch { gx: usize, gy: usize },
    #[error("need at least two nodes")]
    TooSmall,
}

fn check(g: &Graph, what: &'static str, cap: usize) -> Result<usize, OracleError> {
    let n = g.node_count();
    if n > cap {
        return Err(OracleError::SizeCap { what, cap, n });
    }
    if n < 2 {
        return Err(OracleError::TooSmall);
    }
    let components = g.component_count();
    if components != 1 {
        return Err(OracleError::Disconnected { components });
    }
    Ok(n)
}

fn check_pair(gx: &Graph, gy: &Graph, what: &'static str, cap: usize) -> Result<usize, OracleError> {
    if gx.node_count() != gy.node_count() {
        return Err(OracleError::SizeMismatch {
            gx: gx.node_count(),
            gy: gy.node_count(),
        });
    }
    check(gx, what, cap)?;
    check(gy, what, cap)
}

pub fn dense_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    DMatrix::from_row_slice(n, n, &g.dense_laplacian())
}

/// Full spectrum of one Laplacian, ascending.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    /// `0 = σ_1 < σ_2 ≤ … ≤ σ_n`.
    pub sigmas: Vec<f64>,
    /// Column `i` is the unit eigenvector for `sigmas[i]`.
    pub vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    /// `[u_2/√σ_2, …, u_n/√σ_n]`, so that `‖U_Nᵀ e_pq‖² = e_pqᵀ L⁺ e_pq`.
    pub fn weighted_nontrivial(&self) -> DMatrix<f64> {
        let n = self.sigmas.len();
        let mut out = DMatrix::zeros(n, n - 1);
        for i in 1..n {
            let w = 1.0 / self.sigmas[i].sqrt();
            out.set_column(i - 1, &(self.vectors.column(i) * w));
        }
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.sigmas.clone()));
        &self.vectors * d * self.vectors.transpose()
    }
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn dense_spectrum(g: &Graph) -> Result<DenseSpectrum, OracleError> {
    check(g, "dense spectrum", PSEUDOINVERSE_CAP)?;
    let (mut sigmas, vectors) = sorted_eigen(dense_laplacian(g));
    sigmas[0] = 0.0;
    Ok(DenseSpectrum { sigmas, vectors })
}

/// `L⁺ = Σ_{i≥2} u_i u_iᵀ / σ_i`.
pub fn dense_pseudoinverse(g: &Graph) -> Result<DMatrix<f64>, OracleError> {
    let spectrum = dense_spectrum(g)?;
    let w = spectrum.weighted_nontrivial();
    Ok(&w * w.transpose())
}

pub fn resistance_from_pseudoinverse(pinv: &DMatrix<f64>, p: usize, q: usize) -> f64 {
    pinv[(p, p)] + pinv[(q, q)] - 2.0 * pinv[(p, q)]
}

/// Orthonormal basis of `1⊥` as the columns of an `n×(n−1)` matrix: the
/// trailing columns of the Householder reflector sending `e_1` to `1/√n`.
fn complement_of_ones(n: usize) -> DMatrix<f64> {
    let s = 1.0 / (n as f64).sqrt();
    let mut w = DVector::from_element(n, s);
    w[0] -= 1.0;
    let w_norm2 = w.norm_squared();
    let mut h = DMatrix::identity(n, n);
    if w_norm2 > 0.0 {
        h -= (&w * w.transpose()) * (2.0 / w_norm2);
    }
    h.columns(1, n - 1).into_owned()
}

/// Full nontrivial spectrum of the pencil `(L_X, L_Y)`.
#[derive(Debug, Clone)]
pub struct DensePencil {
    /// The `n − 1` eigenvalues of `L_Y⁺ L_X` on `1⊥`, descending.
    pub lambdas: Vec<f64>,
    /// Column `i` is `v_i`, mean-free with `v_iᵀ L_Y v_i = 1`.
    pub vectors: DMatrix<f64>,
}

/// Reduces both Laplacians to an orthonormal basis `Q` of `1⊥`, factors
/// `QᵀL_YQ = C Cᵀ` and diagonalizes `C⁻¹ QᵀL_XQ C⁻ᵀ`.
pub fn dense_generalized_eigen(gx: &Graph, gy: &Graph) -> Result<DensePencil, OracleError> {
    let n = check_pair(gx, gy, "dense pencil", PENCIL_CAP)?;
    let q = complement_of_ones(n);
    let ax = q.transpose() * dense_laplacian(gx) * &q;
    let ay = q.transpose() * dense_laplacian(gy) * &q;
    let chol = ay
        .cholesky()
        .expect("connected Laplacian is positive definite on the complement of the constants");
    let c = chol.l();
    let c_inv = c
        .clone()
        .try_inverse()
        .expect("Cholesky factor of a positive definite matrix is invertible");
    let m = &c_inv * ax * c_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let (values, w) = sorted_eigen(m);
    let k = n - 1;
    let lifted = q * c_inv.transpose() * w;
    let mut vectors = DMatrix::zeros(n, k);
    let mut lambdas = Vec::with_capacity(k);
    for i in 0..k {
        let src = k - 1 - i;
        lambdas.push(values[src]);
        vectors.set_column(i, &lifted.column(src));
    }
    Ok(DensePencil { lambdas, vectors })
}

fn distance_table(g: &Graph, metric: DistanceMetric) -> Result<DMatrix<f64>, OracleError> {
    let n = g.node_count();
    match metric {
        DistanceMetric::Resistance => {
            let pinv = dense_pseudoinverse(g)?;
            Ok(DMatrix::from_fn(n, n, |p, q| resistance_from_pseudoinverse(&pinv, p, q)))
        }
        DistanceMetric::Geodesic => {
            let mut out = DMatrix::zeros(n, n);
            for p in 0..n {
                for (q, d) in g.bfs_distances(p).into_iter().enumerate() {
                    let d = d.ok_or(OracleError::Disconnected {
                        components: g.component_count(),
                    })?;
                    out[(p, q)] = d as f64;
                }
            }
            Ok(out)
        }
    }
}

/// Exhaustive `max_{p<q} d_Y(p,q) / d_X(p,q)`; ties keep the
/// lexicographically first pair.
pub fn gamma_max_bruteforce(
    gx: &Graph,
    gy: &Graph,
    metric: DistanceMetric,
) -> Result<(f64, (usize, usize)), OracleError> {
    let n = check_pair(gx, gy, "distortion brute force", PENCIL_CAP)?;
    let dx = distance_table(gx, metric)?;
    let dy = distance_table(gy, metric)?;
    let mut best = (f64::NEG_INFINITY, (0, 1));
    for p in 0..n {
        for q in p + 1..n {
            let gamma = dy[(p, q)] / dx[(p, q)];
            if gamma > best.0 {
                best = (gamma, (p, q));
            }
        }
    }
    Ok(best)
}

/// Exact minimum of `cut_Y(S) / cut_X(S)` over all `2^{n−1} − 1` proper cuts
/// (node `n − 1` is kept outside `S` to skip complements).
pub fn min_cmd_exhaustive(gx: &Graph, gy: &Graph) -> Result<(f64, CutSpec), OracleError> {
    let n = check_pair(gx, gy, "cut enumeration", CUT_ENUMERATION_CAP)?;
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1u32 << (n - 1)) {
        let inside = |u: usize| mask >> u & 1 == 1;
        let crossing = |g: &Graph| g.edges().iter().filter(|&&(u, v)| inside(u) != inside(v)).count();
        let zeta = crossing(gy) as f64 / crossing(gx) as f64;
        if zeta < best.0 {
            best = (zeta, mask);
        }
    }
    let inside = (0..n).map(|u| best.1 >> u & 1 == 1).collect();
    let cut = CutSpec::new(inside).expect("enumerated masks are proper cuts");
    Ok((best.0, cut))
}
