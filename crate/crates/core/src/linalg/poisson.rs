use super::{CsrMatrix, LinalgError, Result};

/// 7-point stencil of the 3-D Poisson operator on an `nx × ny × nz` grid,
/// x-fastest ordering, diagonal 6 and −1 per existing axis neighbour
/// (Dirichlet truncation).
pub fn gen_poisson_7pt(nx: usize, ny: usize, nz: usize) -> Result<CsrMatrix> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(LinalgError::Size(format!("grid {nx}x{ny}x{nz} has an empty axis")));
    }
    let n = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .filter(|&n| n.checked_mul(7).is_some())
        .ok_or_else(|| LinalgError::Size(format!("grid {nx}x{ny}x{nz} overflows")))?;
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(7 * n);
    let mut values = Vec::with_capacity(7 * n);
    row_offsets.push(0);
    let (sy, sz) = (nx, nx * ny);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = x + sy * y + sz * z;
                // ascending column order
                let mut push = |c: usize, v: f64| {
                    col_indices.push(c);
                    values.push(v);
                };
                if z > 0 {
                    push(i - sz, -1.0);
                }
                if y > 0 {
                    push(i - sy, -1.0);
                }
                if x > 0 {
                    push(i - 1, -1.0);
                }
                push(i, 6.0);
                if x + 1 < nx {
                    push(i + 1, -1.0);
                }
                if y + 1 < ny {
                    push(i + sy, -1.0);
                }
                if z + 1 < nz {
                    push(i + sz, -1.0);
                }
                row_offsets.push(values.len());
            }
        }
    }
    CsrMatrix::new(n, n, row_offsets, col_indices, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_grids() {
        let a = gen_poisson_7pt(1, 1, 1).unwrap();
        assert_eq!(a.to_dense().get(0, 0), 6.0);
        assert_eq!(a.nnz(), 1);
        let b = gen_poisson_7pt(2, 1, 1).unwrap().to_dense();
        assert_eq!(
            [b.get(0, 0), b.get(0, 1), b.get(1, 0), b.get(1, 1)],
            [6.0, -1.0, -1.0, 6.0]
        );
    }

    #[test]
    fn center_of_3_cube() {
        let a = gen_poisson_7pt(3, 3, 3).unwrap();
        let (cols, vals) = a.row(13);
        let got: Vec<(usize, f64)> = cols.iter().copied().zip(vals.iter().copied()).collect();
        assert_eq!(
            got,
            vec![(4, -1.0), (10, -1.0), (12, -1.0), (13, 6.0), (14, -1.0), (16, -1.0), (22, -1.0)]
        );
    }

    #[test]
    fn symmetric_and_dominant() {
        for (nx, ny, nz) in [(1, 1, 5), (4, 4, 4), (5, 3, 2), (8, 8, 8)] {
            let a = gen_poisson_7pt(nx, ny, nz).unwrap();
            assert!(a.is_symmetric());
            // weakly dominant everywhere, strictly on every boundary cell
            let strict = a.strictly_dominant_rows().expect("weak dominance");
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let boundary = x == 0 || y == 0 || z == 0
                            || x + 1 == nx || y + 1 == ny || z + 1 == nz;
                        assert_eq!(strict[x + nx * (y + ny * z)], boundary);
                    }
                }
            }
            assert!(a.diagonal().iter().all(|&d| d == 6.0));
        }
    }

    #[test]
    fn size_errors() {
        assert!(matches!(gen_poisson_7pt(0, 1, 1), Err(LinalgError::Size(_))));
        assert!(matches!(gen_poisson_7pt(usize::MAX, 2, 2), Err(LinalgError::Size(_))));
    }
}
