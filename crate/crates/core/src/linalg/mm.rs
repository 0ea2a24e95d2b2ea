//! Matrix Market coordinate format (`real general`), 1-based indices.

use std::io::{BufRead, Write};

use super::{CsrMatrix, LinalgError, Result};

pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {}", i + 1, j + 1, v)?;
        }
    }
    out.flush()
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let bad = |m: String| LinalgError::Structure(m);
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty input".into()))?
        .map_err(|e| bad(e.to_string()))?;
    let h: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" || h[3] != "real" {
        return Err(bad(format!("unsupported header '{header}'")));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(bad(format!("unsupported symmetry '{other}'"))),
    };
    let mut size = None;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            let [r, c, nnz] = f[..] else { return Err(bad(format!("bad size line '{t}'"))) };
            let p = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad size line '{t}'")));
            size = Some((p(r)?, p(c)?, p(nnz)?));
            continue;
        }
        let (rows, cols, _) = size.unwrap();
        let [i, j, v] = f[..] else { return Err(bad(format!("bad entry '{t}'"))) };
        let idx = |s: &str, bound: usize| match s.parse::<usize>() {
            Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
            _ => Err(bad(format!("bad index in '{t}'"))),
        };
        let (i, j) = (idx(i, rows)?, idx(j, cols)?);
        let v: f64 = v.parse().map_err(|_| bad(format!("bad value in '{t}'")))?;
        entries.push((i, j, v));
        if symmetric && i != j {
            entries.push((j, i, v));
        }
    }
    let (rows, cols, _) = size.ok_or_else(|| bad("missing size line".into()))?;
    entries.sort_by_key(|&(i, j, _)| (i, j));
    if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(bad("duplicate entry".into()));
    }
    let mut offsets = vec![0; rows + 1];
    for &(i, _, _) in &entries {
        offsets[i + 1] += 1;
    }
    for i in 0..rows {
        offsets[i + 1] += offsets[i];
    }
    CsrMatrix::new(
        rows,
        cols,
        offsets,
        entries.iter().map(|e| e.1).collect(),
        entries.iter().map(|e| e.2).collect(),
    )
}
