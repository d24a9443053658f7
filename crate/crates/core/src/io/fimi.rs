use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::approx::SummaryBuilder;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::summary::EntrySummary;

/// Above this many cells (`items * m`) the lift pipeline streams
/// transactions instead of materializing `A`.
pub const LIFT_DENSE_CEILING: usize = 1 << 22;

/// Transactions over item ids `0..items`, one id set per transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDB {
    items: usize,
    transactions: Vec<Vec<usize>>,
    item_freq: Vec<usize>,
}

impl TransactionDB {
    /// Builds a database; repeated ids inside a transaction count once and
    /// `items` is one past the largest id seen.
    pub fn new(transactions: Vec<Vec<usize>>) -> Self {
        let transactions: Vec<Vec<usize>> = transactions
            .into_iter()
            .map(|mut t| {
                let mut seen = std::collections::HashSet::new();
                t.retain(|&i| seen.insert(i));
                t
            })
            .collect();
        let items = transactions.iter().flatten().max().map_or(0, |&i| i + 1);
        let mut item_freq = vec![0; items];
        for &i in transactions.iter().flatten() {
            item_freq[i] += 1;
        }
        TransactionDB {
            items,
            transactions,
            item_freq,
        }
    }

    /// Number of transactions.
    pub fn m(&self) -> usize {
        self.transactions.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn transactions(&self) -> &[Vec<usize>] {
        &self.transactions
    }

    /// `f_i`: number of transactions containing item `i`.
    pub fn item_freq(&self) -> &[usize] {
        &self.item_freq
    }
}

/// Parses one transaction per line of whitespace-separated item ids. Blank
/// lines are skipped.
pub fn parse_fimi<R: BufRead>(reader: R) -> Result<TransactionDB> {
    let mut transactions = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::parse(idx + 1, format!("item id {tok:?} is not a nonnegative integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        transactions.push(t);
    }
    if transactions.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(TransactionDB::new(transactions))
}

pub fn read_fimi_file(path: impl AsRef<Path>) -> Result<TransactionDB> {
    parse_fimi(BufReader::new(File::open(path)?))
}

pub fn write_fimi<W: Write>(mut w: W, db: &TransactionDB) -> Result<()> {
    for t in &db.transactions {
        let line: Vec<String> = t.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// `items x m` matrix with `A[i][t] = 1/f_i` when item `i` is in transaction
/// `t`. Entry `(i, j)` of `A A^T` is the lift `|S_i & S_j| / (f_i f_j)`.
pub fn build_lift_matrix(db: &TransactionDB) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(db.items, db.m());
    for (t, tr) in db.transactions.iter().enumerate() {
        for &i in tr {
            a.set(i, t, 1.0 / db.item_freq[i] as f64);
        }
    }
    a
}

/// `(A, A^T)`, the factor pair whose product holds all lift values.
pub fn lift_pair(db: &TransactionDB) -> (DenseMatrix, DenseMatrix) {
    let a = build_lift_matrix(db);
    let at = a.transpose();
    (a, at)
}

/// Lift of items `i` and `j` from set counts; `0` if either never occurs.
pub fn lift_similarity(db: &TransactionDB, i: usize, j: usize) -> f64 {
    let (fi, fj) = match (db.item_freq.get(i), db.item_freq.get(j)) {
        (Some(&fi), Some(&fj)) if fi > 0 && fj > 0 => (fi, fj),
        _ => return 0.0,
    };
    let both = db
        .transactions
        .iter()
        .filter(|t| t.contains(&i) && t.contains(&j))
        .count();
    both as f64 / (fi as f64 * fj as f64)
}

/// Summary of `A A^T` built one transaction at a time; each transaction
/// contributes the outer product of its sparse column with itself.
pub fn stream_lift_summary(db: &TransactionDB, b: usize) -> Result<EntrySummary> {
    let mut builder = SummaryBuilder::new(b, db.items, db.items)?;
    for t in &db.transactions {
        let col: Vec<(usize, f64)> = t.iter().map(|&i| (i, 1.0 / db.item_freq[i] as f64)).collect();
        builder.absorb_sparse(col.iter().copied(), col.iter().copied())?;
    }
    Ok(builder.finish().0)
}
