use std::io::{BufRead, Write};

use faer::Mat;

use super::SymMatrix;
use crate::error::{Error, Result};

/// Writes `SYM n` followed by `n` rows of the full square matrix. Values use
/// the shortest representation that reads back to the same `f64`.
pub fn write_sym<W: Write>(a: &SymMatrix, mut out: W) -> Result<()> {
    let n = a.n();
    writeln!(out, "SYM {n}")?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for j in 0..n {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:?}", a.get(i, j)));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses the format produced by [`write_sym`]; asymmetry above 1e-12 is an
/// error.
pub fn read_sym<R: BufRead>(input: R) -> Result<SymMatrix> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))??;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("SYM") {
        return Err(Error::Parse(format!("bad header '{header}'")));
    }
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Parse(format!("bad dimension in '{header}'")))?;
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {i}")))??;
        let mut count = 0;
        for (j, tok) in line.split_whitespace().enumerate() {
            if j >= n {
                return Err(Error::Parse(format!("row {i} has more than {n} values")));
            }
            m[(i, j)] = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad value '{tok}' in row {i}")))?;
            count += 1;
        }
        if count != n {
            return Err(Error::Parse(format!("row {i} has {count} values, expected {n}")));
        }
    }
    SymMatrix::from_mat(m, 1e-12)
}
