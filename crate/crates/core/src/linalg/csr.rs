use std::ops::Range;

use super::{DenseMatrix, LinalgError, Result};
use crate::exec::Execution;

/// Compressed-sparse-row matrix with strictly increasing columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(LinalgError::Structure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(LinalgError::Structure("row_offsets[0] != 0".into()));
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(LinalgError::Structure("row_offsets decreasing".into()));
        }
        let nnz = row_offsets[n_rows];
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(LinalgError::Structure(format!(
                "nnz {nnz} but {} columns and {} values",
                col_indices.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return Err(LinalgError::Index { index: c, bound: n_cols });
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::Structure(format!(
                    "row {i} columns not strictly increasing"
                )));
            }
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..d.n_rows() {
            for j in 0..d.n_cols() {
                let v = d.get(i, j);
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self { n_rows: d.n_rows(), n_cols: d.n_cols(), row_offsets, col_indices, values }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(columns, values)` of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Number of stored entries in rows `rows`.
    pub fn nnz_in_rows(&self, rows: Range<usize>) -> usize {
        self.row_offsets[rows.end] - self.row_offsets[rows.start]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, v);
            }
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols
            && (0..self.n_rows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| {
                    let (cj, vj) = self.row(j);
                    matches!(cj.binary_search(&i), Ok(k) if vj[k] == v)
                })
            })
    }

    /// Rows whose diagonal strictly exceeds the off-diagonal absolute sum,
    /// or `None` if some row is not even weakly dominant.
    pub fn strictly_dominant_rows(&self) -> Option<Vec<bool>> {
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut diag = 0.0;
                let mut off = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j == i {
                        diag = v;
                    } else {
                        off += v.abs();
                    }
                }
                if diag >= off {
                    Some(diag > off)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n_rows)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Extract rows `rows` restricted to the (strictly increasing) column set
    /// `cols`, renumbering columns by their position in `cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: &[usize]) -> Result<CsrMatrix> {
        if rows.start > rows.end || rows.end > self.n_rows {
            return Err(LinalgError::Index { index: rows.end, bound: self.n_rows });
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(LinalgError::Index { index: c, bound: self.n_cols });
        }
        if cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LinalgError::Structure("column set not strictly increasing".into()));
        }
        let mut position = vec![usize::MAX; self.n_cols];
        for (k, &c) in cols.iter().enumerate() {
            position[c] = k;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in rows.clone() {
            let (rc, rv) = self.row(i);
            for (&j, &v) in rc.iter().zip(rv) {
                let k = position[j];
                if k != usize::MAX {
                    col_indices.push(k);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Ok(CsrMatrix {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Stack row blocks that share a column count.
    pub fn vstack(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
        let n_cols = blocks.first().map_or(0, |b| b.n_cols);
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for b in blocks {
            if b.n_cols != n_cols {
                return Err(LinalgError::Shape { expected: n_cols, got: b.n_cols });
            }
            let base = values.len();
            row_offsets.extend(b.row_offsets[1..].iter().map(|o| o + base));
            col_indices.extend_from_slice(&b.col_indices);
            values.extend_from_slice(&b.values);
        }
        Ok(CsrMatrix {
            n_rows: row_offsets.len() - 1,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Rows `rows` of `A·v` into `out`, left-to-right per row.
    pub fn spmv_rows_into(&self, rows: Range<usize>, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), rows.len());
        for (o, i) in out.iter_mut().zip(rows) {
            let (cols, vals) = self.row(i);
            *o = cols.iter().zip(vals).fold(0.0, |acc, (&j, &a)| acc + a * v[j]);
        }
    }
}

const SPMV_CHUNK: usize = 512;

/// `A·v` with fixed per-row accumulation order.
pub fn spmv(a: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    spmv_with(Execution::default(), a, v)
}

/// `A·v` under an explicit execution strategy. Both strategies produce the
/// same bits since rows are independent.
pub fn spmv_with(exec: Execution, a: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.n_cols {
        return Err(LinalgError::Shape { expected: a.n_cols, got: v.len() });
    }
    let mut out = vec![0.0; a.n_rows];
    exec.fill_chunks(&mut out, SPMV_CHUNK, |start, chunk| {
        a.spmv_rows_into(start..start + chunk.len(), v, chunk);
    });
    Ok(out)
}
