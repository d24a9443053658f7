use crate::error::{Error, Result};

use super::{DenseMatrix, Position};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Result of an entrywise (possibly residual) norm computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub p: u32,
    pub value: f64,
    /// Number of largest-magnitude entries removed; 0 means the full norm.
    pub residual_k: usize,
}

/// `(sum over all but the k largest |C_ij| of |C_ij|^p)^(1/p)`.
///
/// The k removed entries are the largest by magnitude, ties broken by
/// position order.
pub fn entrywise_norm(c: &DenseMatrix, p: u32, k: usize) -> Result<NormReport> {
    if p == 0 {
        return Err(Error::invalid("p", "norm order must be positive"));
    }
    if k >= c.len().max(1) {
        return Err(Error::invalid(
            "k",
            format!("residual rank {k} must be below the entry count {}", c.len()),
        ));
    }
    let mut entries: Vec<(Position, f64)> = c.entries().map(|(q, v)| (q, v.abs())).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let total: CompensatedSum = entries[k..].iter().map(|&(_, a)| pow(a, p)).collect();
    Ok(NormReport {
        p,
        value: root(total.value(), p),
        residual_k: k,
    })
}

fn pow(a: f64, p: u32) -> f64 {
    match p {
        1 => a,
        2 => a * a,
        _ => a.powi(p as i32),
    }
}

fn root(s: f64, p: u32) -> f64 {
    match p {
        1 => s,
        2 => s.sqrt(),
        _ => s.powf(1.0 / p as f64),
    }
}

/// Number of entries of `m` strictly smaller than `a`, plus one.
///
/// This is the smallest-first rank; `a` need not occur in `m`.
pub fn rank_of(a: f64, m: &DenseMatrix) -> Result<usize> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::invalid("a", "rank is defined for positive reals"));
    }
    Ok(m.values().iter().filter(|&&v| v < a).count() + 1)
}

/// Magnitudes sorted in descending order with suffix sums, so every
/// k-residual 1-norm is answered in O(1).
#[derive(Debug, Clone)]
pub struct ResidualProfile {
    magnitudes: Vec<f64>,
    /// `suffix[k]` = sum of `magnitudes[k..]`.
    suffix: Vec<f64>,
}

impl ResidualProfile {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let mut magnitudes: Vec<f64> = values.into_iter().map(f64::abs).collect();
        magnitudes.sort_by(|a, b| b.total_cmp(a));
        let mut suffix = vec![0.0; magnitudes.len() + 1];
        let mut acc = CompensatedSum::default();
        for (k, &m) in magnitudes.iter().enumerate().rev() {
            acc.add(m);
            suffix[k] = acc.value();
        }
        ResidualProfile { magnitudes, suffix }
    }

    pub fn of(m: &DenseMatrix) -> Self {
        Self::new(m.values().iter().copied())
    }

    /// Total magnitude, the entrywise 1-norm.
    pub fn l1(&self) -> f64 {
        self.suffix[0]
    }

    /// k-residual entrywise 1-norm; 0 once `k` reaches the entry count.
    pub fn residual_l1(&self, k: usize) -> f64 {
        self.suffix[k.min(self.magnitudes.len())]
    }

    /// k-residual entrywise p-norm.
    pub fn residual(&self, k: usize, p: u32) -> f64 {
        let s: CompensatedSum = self.magnitudes[k.min(self.magnitudes.len())..]
            .iter()
            .map(|&a| pow(a, p))
            .collect();
        root(s.value(), p)
    }

    /// Magnitudes, largest first.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }
}
