use super::{CsrMatrix, LinalgError, Result};

/// Row-major dense matrix, used for small extracted blocks and test oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(LinalgError::Shape { expected: n_cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n_rows: rows.len(), n_cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Self::zeros(n, n);
        for i in 0..n {
            d.set(i, i, 1.0);
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_cols {
            return Err(LinalgError::Shape { expected: self.n_cols, got: v.len() });
        }
        Ok(self
            .data
            .chunks(self.n_cols.max(1))
            .take(self.n_rows)
            .map(|row| row.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b))
            .collect())
    }
}

/// Solve `A y = w` for dense symmetric positive definite `A`.
pub fn cholesky_solve(a: &DenseMatrix, w: &[f64]) -> Result<Vec<f64>> {
    BandCholesky::from_dense(a)?.solve(w)
}

/// Cholesky factor `A = L Lᵀ` stored in band form.
///
/// Fill-in of a Cholesky factor stays inside the band of `A`, so banded
/// storage is exact. Dense inputs use the full band.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i][i-bw ..= i]
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::Shape { expected: a.n_rows(), got: a.n_cols() });
        }
        let n = a.n_rows();
        let mut bw = 0;
        for i in 0..n {
            if let Some(j) = (0..i).find(|&j| a.get(i, j) != 0.0) {
                bw = bw.max(i - j);
            }
        }
        Self::factor(n, bw, |i, j| a.get(i, j))
    }

    pub fn from_csr(a: &CsrMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::Shape { expected: a.n_rows(), got: a.n_cols() });
        }
        Self::factor(a.n_rows(), a.bandwidth(), |i, j| a.get(i, j))
    }

    fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = entry(i, j);
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(LinalgError::NotSpd { row: i, pivot: s });
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(LinalgError::Shape { expected: self.n, got: rhs.len() });
        }
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let at = |i: usize, j: usize| i * w + (j + bw - i);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[at(i, k)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[at(k, i)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_examples() {
        let y = cholesky_solve(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
        let d = DenseMatrix::from_rows(&[&[4.0, 0.0], &[0.0, 9.0]]).unwrap();
        assert_eq!(cholesky_solve(&d, &[8.0, 27.0]).unwrap(), vec![2.0, 3.0]);
        let a = DenseMatrix::from_rows(&[&[6.0, -1.0], &[-1.0, 6.0]]).unwrap();
        let y = cholesky_solve(&a, &[5.0, 5.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky_solve(&a, &[1.0, 1.0]), Err(LinalgError::NotSpd { row: 1, .. })));
        let z = DenseMatrix::from_rows(&[&[0.0]]).unwrap();
        assert!(matches!(cholesky_solve(&z, &[1.0]), Err(LinalgError::NotSpd { row: 0, .. })));
    }

    #[test]
    fn band_matches_dense_on_poisson() {
        let a = crate::linalg::gen_poisson_7pt(4, 3, 3).unwrap();
        let w: Vec<f64> = (0..a.n_rows()).map(|i| (i as f64 * 0.3).cos()).collect();
        let band = BandCholesky::from_csr(&a).unwrap().solve(&w).unwrap();
        let dense = cholesky_solve(&a.to_dense(), &w).unwrap();
        for (x, y) in band.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
