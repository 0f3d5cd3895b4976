//! Black-box robustness evaluation of a mapping `Y = F(X)` from paired
//! input/output samples alone.
//!
//! The pipeline builds unweighted kNN graphs over the input and output
//! samples, then studies the generalized eigenproblem of the Laplacian
//! pencil `(L_X, L_Y)`:
//!
//! - [`spectral::model_spade`]: `λ_max(L_Y⁺ L_X)`, an upper bound on the
//!   largest effective-resistance distance distortion between the graphs.
//! - [`scores::edge_spade`] / [`scores::node_spade`]: per-edge and per-node
//!   scores from the embedding spanned by the dominant generalized
//!   eigenvectors, used to rank the samples most exposed to small input
//!   perturbations.
//! - [`scores::dmd_pair`] and [`scores::cmd`]: distance and cut distortion
//!   ratios between the two graphs.
//!
//! Everything scales through a matrix-free Laplacian and a preconditioned
//! conjugate gradient solver ([`solver`]). The [`oracle`] module holds dense
//! brute-force counterparts for small graphs.

pub mod graph;
pub mod knn;
pub mod matrix;
pub mod oracle;
pub mod scores;
pub mod solver;
pub mod spectral;
pub mod synth;

mod hnsw;
mod linalg;

pub use graph::{CutSpec, Graph, GraphError};
pub use knn::{ComponentReport, ConnectPolicy, KnnError, KnnMode, KnnParams};
pub use matrix::{DenseMatrix, Dtype, MatrixError, MatrixFormat};
pub use oracle::OracleError;
pub use scores::{DistanceMetric, Embedding, ResistanceSketch, ScoreError, ScoreReport};
pub use solver::{LaplacianSolver, Preconditioner, SolveError, SolveParams};
pub use spectral::{EigenError, EigenPairs, EigenParams};

use thiserror::Error;

/// Umbrella error for callers that drive the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Knn(#[from] KnnError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl Error {
    /// Short machine-readable tag for the failing subsystem.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Matrix(_) => "matrix",
            Error::Graph(_) => "graph",
            Error::Knn(_) => "knn",
            Error::Solve(_) => "solve",
            Error::Eigen(_) => "eigen",
            Error::Score(_) => "score",
            Error::Oracle(_) => "oracle",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
