//! Shared numerical kernels: bracketed root finding, bounded scalar
//! minimization, a symmetric tridiagonal eigensolver and adaptive quadrature.

mod minimize;
mod quad;
mod roots;
mod tridiag;

pub use minimize::{minimize_scalar, Minimum};
pub(crate) use minimize::minimize_scanned;
pub use quad::{gauss_kronrod_adaptive, simpson_weights, Quadrature};
pub use roots::root_find_monotone;
pub use tridiag::{eig_sym_tridiag, sturm_count, TridiagEigen};

use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change in bracket [{lo}, {hi}] (g(lo) = {g_lo}, g(hi) = {g_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("maximum number of iterations ({0}) exceeded")]
    MaxIterations(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("eigensolver failed to converge for eigenvalue {index}")]
    Convergence { index: usize },
    #[error("non-finite value encountered at x = {0}")]
    NonFinite(f64),
}

/// Stopping rule shared by the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self, NumericsError> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_iter,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol >= 0.0) || self.max_iter < 1 {
            return Err(NumericsError::InvalidInput(format!(
                "tolerance requires abs_tol > 0, rel_tol >= 0, max_iter >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Width below which a bracket around `x` counts as converged.
    pub fn width(&self, x: f64) -> f64 {
        self.abs_tol + self.rel_tol * x.abs()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_iter: 200,
        }
    }
}
