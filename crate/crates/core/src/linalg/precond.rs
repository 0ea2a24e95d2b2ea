use std::ops::Range;

use super::{CsrMatrix, LinalgError, Result};

/// `z = P r`. Both supported kinds are diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum Preconditioner {
    Identity { n: usize },
    Jacobi { diag_inverse: Vec<f64> },
}

impl Preconditioner {
    pub fn identity(n: usize) -> Self {
        Preconditioner::Identity { n }
    }

    /// `P = diag(A)⁻¹`; requires a positive diagonal.
    pub fn jacobi(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if diag.len() != a.n_rows() {
            return Err(LinalgError::Shape { expected: a.n_rows(), got: diag.len() });
        }
        if let Some((row, &d)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
            return Err(LinalgError::NotSpd { row, pivot: d });
        }
        Ok(Preconditioner::Jacobi { diag_inverse: diag.iter().map(|d| 1.0 / d).collect() })
    }

    pub fn n(&self) -> usize {
        match self {
            Preconditioner::Identity { n } => *n,
            Preconditioner::Jacobi { diag_inverse } => diag_inverse.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preconditioner::Identity { .. } => "identity",
            Preconditioner::Jacobi { .. } => "jacobi",
        }
    }

    /// Apply to the slice `r` of global rows `rows`, writing into `z`.
    pub fn apply_rows(&self, rows: Range<usize>, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Identity { .. } => z.copy_from_slice(r),
            Preconditioner::Jacobi { diag_inverse } => {
                for ((z, r), d) in z.iter_mut().zip(r).zip(&diag_inverse[rows]) {
                    *z = d * r;
                }
            }
        }
    }

    /// Sparse matrix form of `P`, used by the reconstruction equations.
    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            Preconditioner::Identity { n } => CsrMatrix::identity(*n),
            Preconditioner::Jacobi { diag_inverse } => {
                let n = diag_inverse.len();
                CsrMatrix::new(n, n, (0..=n).collect(), (0..n).collect(), diag_inverse.clone())
                    .expect("diagonal CSR is well-formed")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gen_poisson_7pt;

    #[test]
    fn jacobi_inverts_diagonal() {
        let a = gen_poisson_7pt(3, 2, 2).unwrap();
        let p = Preconditioner::jacobi(&a).unwrap();
        let Preconditioner::Jacobi { diag_inverse } = &p else { unreachable!() };
        assert!(diag_inverse.iter().all(|&d| d == 1.0 / 6.0));
        let mut z = vec![0.0; 3];
        p.apply_rows(2..5, &[6.0, 12.0, -6.0], &mut z);
        assert_eq!(z, vec![1.0, 2.0, -1.0]);
    }

    #[test]
    fn jacobi_rejects_nonpositive_diagonal() {
        let a = CsrMatrix::new(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, -2.0]).unwrap();
        assert!(matches!(Preconditioner::jacobi(&a), Err(LinalgError::NotSpd { row: 1, .. })));
    }
}
