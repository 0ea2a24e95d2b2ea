//! Sparse and dense kernels used by the distributed solver.

mod csr;
mod dense;
mod mm;
mod partition;
mod poisson;
mod precond;

pub use csr::{spmv, spmv_with, CsrMatrix};
pub use dense::{cholesky_solve, BandCholesky, DenseMatrix};
pub use mm::{read_matrix_market, write_matrix_market};
pub use partition::Partition;
pub use poisson::gen_poisson_7pt;
pub use precond::Preconditioner;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("matrix is not symmetric positive definite (pivot {pivot} at row {row})")]
    NotSpd { row: usize, pivot: f64 },
    #[error("problem size overflows: {0}")]
    Size(String),
    #[error("invalid CSR structure: {0}")]
    Structure(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dot product with a fixed left-to-right accumulation order.
///
/// Every global reduction in the crate goes through [`dot_continue`], so a
/// reduction over row blocks visited in rank order produces the same bits as
/// this call on the assembled vectors, regardless of how many ranks exist.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    dot_continue(0.0, u, v)
}

/// Continue a running dot-product accumulator over another pair of slices.
pub fn dot_continue(acc: f64, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(LinalgError::Shape { expected: u.len(), got: v.len() });
    }
    Ok(u.iter().zip(v).fold(acc, |acc, (a, b)| acc + a * b))
}

pub fn norm2(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |acc, a| acc + a * a).sqrt()
}

pub fn norm_inf(u: &[f64]) -> f64 {
    u.iter().fold(0.0_f64, |acc, a| acc.max(a.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 14.0);
    }

    #[test]
    fn dot_is_left_to_right() {
        // sequential oracle: ((0 + 1e16) + 1) - 1e16 = 0 in binary64
        let oracle = {
            let mut s = 0.0_f64;
            for t in [1e16, 1.0, -1e16] {
                s += t;
            }
            s
        };
        assert_eq!(oracle, 0.0);
        assert_eq!(dot(&[1e16, 1.0, -1e16], &[1.0, 1.0, 1.0]).unwrap(), oracle);
    }

    #[test]
    fn dot_length_mismatch() {
        assert!(matches!(dot(&[1.0], &[1.0, 2.0]), Err(LinalgError::Shape { .. })));
    }

    #[test]
    fn chained_dot_matches_whole() {
        let u: Vec<f64> = (0..97).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..97).map(|i| (i as f64 * 1.91).cos()).collect();
        let whole = dot(&u, &v).unwrap();
        for proc in 1..=9 {
            let part = Partition::balanced(97, proc).unwrap();
            let mut acc = 0.0;
            for r in part.blocks() {
                acc = dot_continue(acc, &u[r.clone()], &v[r.clone()]).unwrap();
            }
            assert_eq!(acc.to_bits(), whole.to_bits(), "proc={proc}");
        }
    }
}
