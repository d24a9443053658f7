//! Plain-text matrix format.
//!
//! A dense block is a line `n` followed by `n` lines of `n` whitespace
//! separated reals. A sparse block is a line `n nnz` followed by `nnz`
//! lines `i j w`. A file may hold several blocks back to back; blank lines
//! are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{DenseMatrix, Position, SparseMatrix};

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_nonblank(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line?;
            if !line.trim().is_empty() {
                return Ok(Some((self.line_no, line)));
            }
        }
        Ok(None)
    }

    fn expect_line(&mut self) -> Result<(usize, String)> {
        self.next_nonblank()?
            .ok_or_else(|| Error::parse(self.line_no + 1, "unexpected end of input"))
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a nonnegative integer, got `{tok}`")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a real number, got `{tok}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

/// Reads every matrix block from `reader`.
pub fn read_matrices<R: BufRead>(reader: R) -> Result<Vec<DenseMatrix>> {
    let mut lines = Lines {
        inner: reader.lines(),
        line_no: 0,
    };
    let mut out = Vec::new();
    while let Some((no, header)) = lines.next_nonblank()? {
        let head: Vec<&str> = header.split_whitespace().collect();
        match head.as_slice() {
            [n] => {
                let n = parse_usize(n, no)?;
                let mut values = Vec::with_capacity(n * n);
                for _ in 0..n {
                    let (no, line) = lines.expect_line()?;
                    let before = values.len();
                    for tok in line.split_whitespace() {
                        values.push(parse_f64(tok, no)?);
                    }
                    if values.len() - before != n {
                        return Err(Error::parse(
                            no,
                            format!("expected {n} values, got {}", values.len() - before),
                        ));
                    }
                }
                out.push(DenseMatrix::from_row_major(n, n, values)?);
            }
            [n, nnz] => {
                let n = parse_usize(n, no)?;
                let nnz = parse_usize(nnz, no)?;
                let mut triples = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let (no, line) = lines.expect_line()?;
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    let [i, j, w] = toks.as_slice() else {
                        return Err(Error::parse(no, "expected `i j w`"));
                    };
                    let p = Position::new(parse_usize(i, no)?, parse_usize(j, no)?);
                    triples.push((p, parse_f64(w, no)?));
                }
                out.push(SparseMatrix::new(n, n, triples)?.to_dense());
            }
            _ => return Err(Error::parse(no, "expected a header `n` or `n nnz`")),
        }
    }
    Ok(out)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<Vec<DenseMatrix>> {
    let f = std::fs::File::open(path)?;
    read_matrices(std::io::BufReader::new(f))
}

/// Writes `m` as a dense block. Only square matrices fit the format.
pub fn write_dense<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid("matrix", "text format holds square matrices only"));
    }
    writeln!(w, "{}", m.rows())?;
    for i in 0..m.rows() {
        let row = m.row(i);
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_sparse<W: Write>(mut w: W, m: &SparseMatrix) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::invalid("matrix", "text format holds square matrices only"));
    }
    writeln!(w, "{} {}", m.rows(), m.nnz())?;
    for (p, v) in m.triples() {
        writeln!(w, "{} {} {}", p.row, p.col, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_dense_and_sparse_blocks() {
        let text = "2\n1 2\n3 4\n\n3 2\n0 1 2.5\n2 2 -1\n";
        let ms = read_matrices(text.as_bytes()).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].get(1, 0), 3.0);
        assert_eq!(ms[1].shape(), (3, 3));
        assert_eq!(ms[1].get(0, 1), 2.5);
        assert_eq!(ms[1].get(2, 2), -1.0);
        assert_eq!(ms[1].nnz(), 2);
    }

    #[test]
    fn reports_bad_tokens_with_line_numbers() {
        let err = read_matrices("2\n1 x\n3 4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_matrices("2\n1 2 3\n3 4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(read_matrices("2\n1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn dense_write_read_round_trip() {
        let m = DenseMatrix::from_rows(&[[0.1, -2.0], [1e-300, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_dense(&mut buf, &m).unwrap();
        let back = read_matrices(buf.as_slice()).unwrap();
        assert_eq!(back, vec![m]);
    }
}
