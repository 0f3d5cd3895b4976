//! Laplacian systems `L x = b` on connected graphs.
//!
//! `L` is singular with null space `span(1)`, so the right-hand side is first
//! projected onto `1⊥` and the returned solution is the minimum-norm one,
//! `x = L⁺ b̂`. The iteration is conjugate gradient with an optional Jacobi
//! (degree) preconditioner; search directions are kept mean-free so the
//! Krylov space never leaves `range(L)`.

use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::{axpy, dot, norm, project_out_mean};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("graph has {components} connected components; Laplacian solves need a connected graph")]
    Disconnected { components: usize },
    #[error("right-hand side has length {found}, graph has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    Jacobi,
    None,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveParams {
    /// Target for `‖L x - b̂‖ / ‖b̂‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `10·n`.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolveParams {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(SolveError::InvalidParams(format!("tol {} not in (0, 1)", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(SolveError::InvalidParams("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Solver bound to one graph; connectivity is checked once on construction.
#[derive(Debug, Clone)]
pub struct LaplacianSolver<'g> {
    graph: &'g Graph,
    inv_diag: Vec<f64>,
    params: SolveParams,
}

impl<'g> LaplacianSolver<'g> {
    pub fn new(graph: &'g Graph, params: SolveParams) -> Result<Self, SolveError> {
        params.validate()?;
        let components = graph.component_count();
        if components != 1 {
            return Err(SolveError::Disconnected { components });
        }
        let inv_diag = (0..graph.node_count())
            .map(|i| match (params.preconditioner, graph.degree(i)) {
                (Preconditioner::Jacobi, d) if d > 0 => 1.0 / d as f64,
                _ => 1.0,
            })
            .collect();
        Ok(Self {
            graph,
            inv_diag,
            params,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn params(&self) -> &SolveParams {
        &self.params
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.graph.node_count();
        if b.len() != n {
            return Err(SolveError::LengthMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut rhs = b.to_vec();
        project_out_mean(&mut rhs);
        let b_norm = norm(&rhs);
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok(x);
        }
        let max_iter = self.params.max_iter.unwrap_or(10 * n).max(1);
        let target = self.params.tol * b_norm;

        let mut r = rhs.clone();
        let mut z = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ap = vec![0.0; n];
        let mut iterations = 0;
        let mut residual = b_norm;
        // Outer restarts recompute the true residual so that drift in the
        // recursive update can never fake convergence.
        while iterations < max_iter {
            self.precondition(&r, &mut z);
            p.copy_from_slice(&z);
            let mut rz = dot(&r, &z);
            while iterations < max_iter {
                self.graph.laplacian_apply_into(&p, &mut ap);
                let pap = dot(&p, &ap);
                if pap <= 0.0 {
                    break;
                }
                let alpha = rz / pap;
                axpy(alpha, &p, &mut x);
                axpy(-alpha, &ap, &mut r);
                iterations += 1;
                if norm(&r) <= target {
                    break;
                }
                self.precondition(&r, &mut z);
                let rz_next = dot(&r, &z);
                let beta = rz_next / rz;
                rz = rz_next;
                for (pi, zi) in p.iter_mut().zip(&z) {
                    *pi = zi + beta * *pi;
                }
            }
            project_out_mean(&mut x);
            self.graph.laplacian_apply_into(&x, &mut ap);
            for i in 0..n {
                r[i] = rhs[i] - ap[i];
            }
            residual = norm(&r);
            if residual <= target {
                return Ok(x);
            }
        }
        Err(SolveError::NotConverged {
            iterations,
            residual: residual / b_norm,
        })
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
        project_out_mean(z);
    }
}

/// One-shot solve; prefer [`LaplacianSolver`] when solving repeatedly.
pub fn solve_laplacian(g: &Graph, b: &[f64], params: SolveParams) -> Result<Vec<f64>, SolveError> {
    LaplacianSolver::new(g, params)?.solve(b)
}
