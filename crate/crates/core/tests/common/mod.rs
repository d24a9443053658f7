//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::io::Write;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewmat::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Triple-loop product over plain `Vec<Vec<f64>>`.
pub fn naive_product(a: &DenseMatrix, b: &DenseMatrix) -> Vec<Vec<f64>> {
    assert_eq!(a.cols(), b.rows());
    let mut c = vec![vec![0.0; b.cols()]; a.rows()];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            for t in 0..a.cols() {
                *x += a.get(i, t) * b.get(t, j);
            }
        }
    }
    c
}

/// Absolute values sorted descending and their suffix sums:
/// `tail[k]` is the 1-norm without the `k` largest magnitudes.
pub struct Tail {
    pub sorted: Vec<f64>,
    pub tail: Vec<f64>,
}

impl Tail {
    pub fn new(c: &[Vec<f64>]) -> Self {
        let mut sorted: Vec<f64> = c.iter().flatten().map(|x| x.abs()).collect();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let mut tail = vec![0.0; sorted.len() + 1];
        for k in (0..sorted.len()).rev() {
            tail[k] = tail[k + 1] + sorted[k];
        }
        Tail { sorted, tail }
    }

    pub fn l1(&self) -> f64 {
        self.tail[0]
    }

    pub fn residual(&self, k: usize) -> f64 {
        self.tail[k.min(self.sorted.len())]
    }
}

/// Random nonnegative `rows x cols` matrix in one of several shapes: dense
/// uniform, sparse, heavy tailed, or with a few dominant cells.
pub fn random_nonneg(rng: &mut ChaCha8Rng, rows: usize, cols: usize, style: usize) -> DenseMatrix {
    let hot: Vec<(usize, usize)> = (0..3)
        .map(|_| (rng.random_range(0..rows), rng.random_range(0..cols)))
        .collect();
    DenseMatrix::from_fn(rows, cols, |i, j| match style % 4 {
        0 => rng.random::<f64>(),
        1 => {
            if rng.random_bool(0.25) {
                rng.random_range(1..=9) as f64
            } else {
                0.0
            }
        }
        2 => rng.random::<f64>().powi(6) * 100.0,
        _ => {
            if hot.contains(&(i, j)) {
                50.0
            } else {
                rng.random::<f64>() * 0.1
            }
        }
    })
    .require_nonnegative()
    .unwrap()
}

/// Writes one unbuffered line to the real stdout so it shows up even while
/// the harness captures test output.
pub fn report(criterion: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let line = format!("acceptance {criterion:>2} {status} {name}: {detail}\n");
    let mut out = std::io::stdout();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}
