//! Dominant generalized eigenpairs of the Laplacian pencil `(L_X, L_Y)`.
//!
//! The solver is a block power iteration on `v ↦ L_Y⁺ (L_X v)`: apply `L_X`,
//! project out the mean, solve on the output graph, project again, then
//! Gram–Schmidt the block in the `L_Y` inner product. A Rayleigh–Ritz step
//! on the block after every sweep orders the directions and gives the
//! eigenvalue estimates `λ = vᵀL_X v / vᵀL_Y v`. The block carries a few guard
//! vectors beyond the requested `r` so that nearby eigenvalues do not stall
//! convergence of the last requested pair.
//!
//! A pair is accepted once its relative eigenvalue change across a sweep and
//! its relative residual `‖L_X v - λ L_Y v‖ / ‖L_X v‖` are both within `tol`.
//!
//! Returned eigenvectors `v_i` are scaled so that the dual vectors
//! `u_i = L_Y v_i` (eigenvectors of `L_X L_Y⁺`) are `L_X⁺`-orthonormal, which
//! is the same as `v_iᵀ L_Y v_i = λ_i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{axpy, dot, norm, project_out_mean, scale, symmetric_eigen_small};
use crate::solver::{LaplacianSolver, SolveError, SolveParams};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("input graph has {gx} nodes but output graph has {gy}")]
    SizeMismatch { gx: usize, gy: usize },
    #[error("requested {r} eigenpairs; need 1 <= r <= {max}")]
    InvalidCount { r: usize, max: usize },
    #[error("{side} graph has {components} connected components")]
    Disconnected { side: &'static str, components: usize },
    #[error("invalid eigensolver parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("eigensolver stopped after {iterations} sweeps with {converged} of {requested} pairs converged (worst residual {worst_residual:.3e})")]
    NotConverged {
        iterations: usize,
        requested: usize,
        converged: usize,
        worst_residual: f64,
        /// Converged leading pairs.
        partial: Box<EigenPairs>,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct EigenParams {
    pub r: usize,
    pub tol: f64,
    /// Cap on block sweeps per requested pair.
    pub max_iter: usize,
    pub seed: u64,
    /// Inner solve settings; `None` derives a tolerance from `tol`.
    pub solve: Option<SolveParams>,
}

impl Default for EigenParams {
    fn default() -> Self {
        Self {
            r: 1,
            tol: 1e-6,
            max_iter: 1000,
            seed: 0,
            solve: None,
        }
    }
}

impl EigenParams {
    pub fn top(r: usize) -> Self {
        Self {
            r,
            ..Self::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn inner_solve(&self) -> SolveParams {
        self.solve
            .unwrap_or_else(|| SolveParams::with_tol((self.tol * 1e-2).clamp(1e-12, 1e-8)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// `λ_1 ≥ … ≥ λ_r > 0`.
    pub lambdas: Vec<f64>,
    /// `vectors[i]` is `v_i`, mean-free, with `v_iᵀ L_Y v_i = λ_i`.
    pub vectors: Vec<Vec<f64>>,
    /// Relative residuals `‖L_X v - λ L_Y v‖ / ‖L_X v‖`.
    pub residuals: Vec<f64>,
    /// `degenerate[i]` marks `λ_i` within `tol` of `λ_{i-1}`.
    pub degenerate: Vec<bool>,
    /// Block sweeps performed.
    pub iterations: usize,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Dual eigenvector `u_i = L_Y v_i` of `L_X L_Y⁺`.
    pub fn dual_vector(&self, gy: &Graph, i: usize) -> Vec<f64> {
        let mut u = vec![0.0; gy.node_count()];
        gy.laplacian_apply_into(&self.vectors[i], &mut u);
        u
    }

    fn truncated(&self, count: usize) -> EigenPairs {
        EigenPairs {
            lambdas: self.lambdas[..count].to_vec(),
            vectors: self.vectors[..count].to_vec(),
            residuals: self.residuals[..count].to_vec(),
            degenerate: self.degenerate[..count].to_vec(),
            iterations: self.iterations,
        }
    }
}

fn check_pencil(gx: &Graph, gy: &Graph) -> Result<usize, EigenError> {
    let n = gx.node_count();
    if gy.node_count() != n {
        return Err(EigenError::SizeMismatch {
            gx: n,
            gy: gy.node_count(),
        });
    }
    for (side, g) in [("input", gx), ("output", gy)] {
        let components = g.component_count();
        if components != 1 {
            return Err(EigenError::Disconnected { side, components });
        }
    }
    Ok(n)
}

fn random_mean_free(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    project_out_mean(&mut v);
    v
}

/// In-place `L_Y`-orthonormalization (modified Gram–Schmidt, two passes).
/// Returns `L_Y q` for every output vector. Vectors that collapse are
/// replaced by fresh random directions.
fn ly_orthonormalize(gy: &Graph, block: &mut [Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = gy.node_count();
    let mut applied: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for j in 0..block.len() {
        let mut attempts = 0;
        loop {
            let start = norm(&block[j]);
            for _pass in 0..2 {
                for (i, ly_qi) in applied.iter().enumerate() {
                    let c = dot(ly_qi, &block[j]);
                    let (head, tail) = block.split_at_mut(j);
                    axpy(-c, &head[i], &mut tail[0]);
                }
            }
            project_out_mean(&mut block[j]);
            let mut ly = vec![0.0; n];
            gy.laplacian_apply_into(&block[j], &mut ly);
            let size = dot(&block[j], &ly).max(0.0).sqrt();
            if size > 1e-10 * start.max(f64::MIN_POSITIVE) && size > 0.0 {
                scale(&mut block[j], 1.0 / size);
                scale(&mut ly, 1.0 / size);
                applied.push(ly);
                break;
            }
            attempts += 1;
            assert!(attempts < 100, "cannot extend L_Y-orthonormal basis");
            block[j] = random_mean_free(n, rng);
        }
    }
    applied
}

/// Top `r` eigenpairs of `L_Y⁺ L_X` on the complement of the constants.
pub fn top_generalized_eigenpairs(
    gx: &Graph,
    gy: &Graph,
    params: &EigenParams,
) -> Result<EigenPairs, EigenError> {
    let n = check_pencil(gx, gy)?;
    let r = params.r;
    if r == 0 || r + 1 > n {
        return Err(EigenError::InvalidCount {
            r,
            max: n.saturating_sub(1),
        });
    }
    if !(params.tol > 0.0 && params.tol < 1.0) || params.max_iter == 0 {
        return Err(EigenError::InvalidParams(format!(
            "tol {} must be in (0, 1) and max_iter {} at least 1",
            params.tol, params.max_iter
        )));
    }
    let solver = LaplacianSolver::new(gy, params.inner_solve())?;
    let width = (r + r.max(4)).min(n - 1);
    let max_sweeps = params.max_iter.saturating_mul(r);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut block: Vec<Vec<f64>> = (0..width).map(|_| random_mean_free(n, &mut rng)).collect();
    ly_orthonormalize(gy, &mut block, &mut rng);

    let mut prev: Option<Vec<f64>> = None;
    // (eigenvalues, vectors) of the converged prefix and all residuals
    type Snapshot = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>);
    let mut last: Option<Snapshot> = None;
    for sweep in 1..=max_sweeps {
        let mut next: Vec<Vec<f64>> = block
            .par_iter()
            .map(|v| {
                let mut lx = vec![0.0; n];
                gx.laplacian_apply_into(v, &mut lx);
                project_out_mean(&mut lx);
                let mut w = solver.solve(&lx)?;
                project_out_mean(&mut w);
                Ok(w)
            })
            .collect::<Result<_, SolveError>>()?;
        ly_orthonormalize(gy, &mut next, &mut rng);

        // Rayleigh–Ritz: the block is L_Y-orthonormal, so the projected
        // pencil is the ordinary symmetric matrix Wᵀ L_X W.
        let lx_block: Vec<Vec<f64>> = next
            .iter()
            .map(|w| {
                let mut lx = vec![0.0; n];
                gx.laplacian_apply_into(w, &mut lx);
                lx
            })
            .collect();
        let mut h = vec![0.0; width * width];
        for a in 0..width {
            for b in a..width {
                let value = dot(&next[a], &lx_block[b]);
                h[a * width + b] = value;
                h[b * width + a] = value;
            }
        }
        let (thetas, rot) = symmetric_eigen_small(&h, width);
        block = (0..width)
            .map(|c| {
                let mut v = vec![0.0; n];
                for (a, w) in next.iter().enumerate() {
                    axpy(rot[a * width + c], w, &mut v);
                }
                v
            })
            .collect();

        let residuals: Vec<f64> = (0..r)
            .map(|i| {
                let mut lx = vec![0.0; n];
                let mut ly = vec![0.0; n];
                gx.laplacian_apply_into(&block[i], &mut lx);
                gy.laplacian_apply_into(&block[i], &mut ly);
                let lx_norm = norm(&lx);
                axpy(-thetas[i], &ly, &mut lx);
                if lx_norm > 0.0 {
                    norm(&lx) / lx_norm
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let changes: Vec<f64> = match &prev {
            Some(p) => (0..r).map(|i| ((thetas[i] - p[i]) / thetas[i]).abs()).collect(),
            None => vec![f64::INFINITY; r],
        };
        let converged = (0..r)
            .take_while(|&i| residuals[i] <= params.tol && changes[i] <= params.tol)
            .count();
        prev = Some(thetas[..r].to_vec());
        if converged == r {
            return Ok(finish(gy, &thetas[..r], &block[..r], &residuals, params.tol, sweep));
        }
        last = Some((thetas[..converged].to_vec(), block[..converged].to_vec(), residuals));
    }
    let (thetas, vectors, residuals) = last.expect("at least one sweep ran");
    let converged = thetas.len();
    let worst_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let partial = finish(gy, &thetas, &vectors, &residuals[..converged], params.tol, max_sweeps);
    Err(EigenError::NotConverged {
        iterations: max_sweeps,
        requested: r,
        converged,
        worst_residual,
        partial: Box::new(partial.truncated(converged)),
    })
}

fn finish(
    gy: &Graph,
    thetas: &[f64],
    vectors: &[Vec<f64>],
    residuals: &[f64],
    tol: f64,
    iterations: usize,
) -> EigenPairs {
    let n = gy.node_count();
    let mut out = Vec::with_capacity(vectors.len());
    for (v, &theta) in vectors.iter().zip(thetas) {
        let mut v = v.clone();
        project_out_mean(&mut v);
        let mut ly = vec![0.0; n];
        gy.laplacian_apply_into(&v, &mut ly);
        let size = dot(&v, &ly).sqrt();
        // v_iᵀ L_Y v_i = λ_i
        let mut s = theta.max(0.0).sqrt() / size;
        let pivot = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map_or(0.0, |(_, &x)| x);
        if pivot < 0.0 {
            s = -s;
        }
        scale(&mut v, s);
        out.push(v);
    }
    let degenerate = (0..thetas.len())
        .map(|i| i > 0 && (thetas[i - 1] - thetas[i]).abs() <= tol * thetas[i - 1].abs())
        .collect();
    EigenPairs {
        lambdas: thetas.to_vec(),
        vectors: out,
        residuals: residuals.to_vec(),
        degenerate,
        iterations,
    }
}

/// `λ_max(L_Y⁺ L_X)`: the model score, also the bi-Lipschitz constant `κ`
/// of the mapping between the two graph manifolds.
pub fn model_spade(gx: &Graph, gy: &Graph, tol: f64, seed: u64) -> Result<f64, EigenError> {
    let params = EigenParams::top(1).with_tol(tol).with_seed(seed);
    Ok(top_generalized_eigenpairs(gx, gy, &params)?.lambdas[0])
}

/// `sqrt(Σ_{i≤m} ln² λ_i)` over the `m` largest pencil eigenvalues.
pub fn riemannian_distance(
    gx: &Graph,
    gy: &Graph,
    m: usize,
    tol: f64,
    seed: u64,
) -> Result<f64, EigenError> {
    let params = EigenParams::top(m).with_tol(tol).with_seed(seed);
    let pairs = top_generalized_eigenpairs(gx, gy, &params)?;
    Ok(riemannian_from_eigenvalues(&pairs.lambdas))
}

pub fn riemannian_from_eigenvalues(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt()
}
