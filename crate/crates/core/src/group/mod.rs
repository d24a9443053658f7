//! Recovery of heavy entries of arbitrary real products by group testing.
//!
//! Entries of the product are spread over residue classes modulo many primes.
//! Each class keeps its total weight and the weight of every bit-is-1
//! subgroup, which is enough to name the class's majority entry when it has
//! one. Candidates are then verified by an exact inner product.

mod majority;
mod primes;
mod residue;
mod tables;

use std::collections::{BTreeMap, HashSet};

pub use majority::majority_stream;
pub use primes::{build_prime_schedule, ceil_log, is_prime, PrimeSchedule};
pub use residue::{fold_mod, residue_histogram, BitMask, ConvolutionMode, NAIVE_PRIME_LIMIT};
pub use tables::{compute_groups, padded_dim, GroupTables};

use majority::{decode_candidate, Decoded};

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, DenseMatrix, Position};

/// `c` in the multi-pass budget `c * k^(z/(z-1))`.
///
/// On Zipf(2) products with n = 32, k = 4, s = 2 every `c` down to 0.1 (where
/// the budget clamps to `k`) found the top 8 in all 50 seeded instances; 1.0
/// keeps the full budget as margin for lighter skew.
pub const DEFAULT_ZIPF_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupOptions {
    pub mode: ConvolutionMode,
    /// Update primes on the rayon pool.
    pub parallel: bool,
    /// Sign decisions on FFT counters within this distance of a tie are
    /// redone on exact counters.
    pub dead_zone: f64,
    /// `c` in the multi-pass budget.
    pub zipf_constant: f64,
}

impl Default for GroupOptions {
    fn default() -> Self {
        GroupOptions {
            mode: ConvolutionMode::Auto,
            parallel: false,
            dead_zone: 1e-6,
            zipf_constant: DEFAULT_ZIPF_CONSTANT,
        }
    }
}

/// A verified entry of the product and the group that named it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEntry {
    pub row: usize,
    pub col: usize,
    /// Exact weight from one row-column inner product.
    pub weight: f64,
    pub prime: usize,
    pub residue: usize,
}

impl CandidateEntry {
    pub fn position(&self) -> Position {
        Position::new(self.row, self.col)
    }
}

/// Verified weights at or below this magnitude count as zero: `0` for
/// integer inputs, otherwise `1e-9` times an upper bound on `||AB||_E1`.
pub fn verification_threshold(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    if a.is_integral() && b.is_integral() {
        return 0.0;
    }
    let bound: CompensatedSum = (0..a.cols())
        .map(|t| {
            let ca: f64 = a.column(t).iter().map(|x| x.abs()).sum();
            let rb: f64 = b.row(t).iter().map(|x| x.abs()).sum();
            ca * rb
        })
        .collect();
    1e-9 * bound.value()
}

fn check_dims(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    Ok(())
}

/// Decodes one candidate per group, verifies each distinct candidate exactly
/// and keeps those with nonzero weight, in position order.
pub fn check_candidates(
    groups: &GroupTables,
    a: &DenseMatrix,
    b: &DenseMatrix,
    opts: &GroupOptions,
) -> Vec<CandidateEntry> {
    let threshold = verification_threshold(a, b);
    let width = 2 * groups.bits();
    let mut found: BTreeMap<Position, CandidateEntry> = BTreeMap::new();
    let mut rejected: HashSet<Position> = HashSet::new();
    for (idx, table) in groups.tables.iter().enumerate() {
        let fft = table.fft.is_some();
        let dead_zone = if fft { opts.dead_zone } else { 0.0 };
        let mut exact = None;
        for m in 0..table.prime {
            let range = m * width..(m + 1) * width;
            let mut decoded = decode_candidate(table.totals[m], &table.bits[range.clone()], dead_zone);
            if fft && decoded == Decoded::Undecided {
                let t = exact.get_or_insert_with(|| groups.recompute_naive(idx, a, b));
                decoded = decode_candidate(t.totals[m], &t.bits[range], 0.0);
            }
            let Decoded::Item(key) = decoded else {
                continue;
            };
            if key as usize % table.prime != m {
                continue;
            }
            let pos = groups.position(key);
            if pos.row >= a.rows() || pos.col >= b.cols() {
                continue;
            }
            if found.contains_key(&pos) || rejected.contains(&pos) {
                continue;
            }
            let weight = a.dot_row_col(pos.row, b, pos.col);
            if weight.abs() > threshold {
                found.insert(
                    pos,
                    CandidateEntry {
                        row: pos.row,
                        col: pos.col,
                        weight,
                        prime: table.prime,
                        residue: m,
                    },
                );
            } else {
                rejected.insert(pos);
            }
        }
    }
    found.into_values().collect()
}

/// Heaviest first; position breaks ties.
fn by_weight(x: &CandidateEntry, y: &CandidateEntry) -> std::cmp::Ordering {
    y.weight
        .abs()
        .total_cmp(&x.weight.abs())
        .then_with(|| x.position().cmp(&y.position()))
}

/// Returns at most `budget` verified entries of `AB`, heaviest first.
///
/// When each of the `budget` heaviest entries outweighs the sum of all
/// entries outside them, those are exactly the entries returned.
pub fn recover_heavy(
    a: &DenseMatrix,
    b: &DenseMatrix,
    budget: usize,
    opts: &GroupOptions,
) -> Result<Vec<CandidateEntry>> {
    check_dims(a, b)?;
    if budget == 0 {
        return Err(Error::invalid("b", "budget must be positive"));
    }
    let n = padded_dim(a.rows(), b.cols());
    let sched = build_prime_schedule(n, budget.max(2))?;
    let groups = compute_groups(a, b, &sched, opts.mode, opts.parallel)?;
    let mut out = check_candidates(&groups, a, b, opts);
    out.sort_by(by_weight);
    out.truncate(budget);
    Ok(out)
}

/// Isolation budget `ceil(c * k^(z/(z-1)))` used by [`multi_pass_topk`].
pub fn zipf_budget(k: usize, z: f64, c: f64) -> usize {
    let x = (c * (k as f64).powf(z / (z - 1.0))).ceil();
    (x as usize).max(k).max(2)
}

/// Finds the `k * s` heaviest entries of a Zipf-skewed product in `s` rounds.
///
/// Each round builds the group counters, removes the entries found so far
/// from them, and keeps the `k` heaviest new verified candidates. The result
/// is in discovery order, heaviest first within a round.
pub fn multi_pass_topk(
    a: &DenseMatrix,
    b: &DenseMatrix,
    k: usize,
    s: usize,
    z: f64,
    opts: &GroupOptions,
) -> Result<Vec<CandidateEntry>> {
    check_dims(a, b)?;
    if s < 1 {
        return Err(Error::invalid("s", "at least one round is required"));
    }
    if k < 1 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if !z.is_finite() || z <= 1.0 {
        return Err(Error::invalid("z", "skew must exceed 1"));
    }
    if opts.zipf_constant.is_nan() || opts.zipf_constant <= 0.0 {
        return Err(Error::invalid("zipf_constant", "must be positive"));
    }
    let n = padded_dim(a.rows(), b.cols());
    let sched = build_prime_schedule(n, zipf_budget(k, z, opts.zipf_constant))?;
    let mut found: Vec<CandidateEntry> = Vec::with_capacity(k * s);
    for _ in 0..s {
        let mut groups = compute_groups(a, b, &sched, opts.mode, opts.parallel)?;
        for e in &found {
            groups.subtract_entry(e.position(), e.weight);
        }
        let known: HashSet<Position> = found.iter().map(|e| e.position()).collect();
        let mut fresh: Vec<CandidateEntry> = check_candidates(&groups, a, b, opts)
            .into_iter()
            .filter(|e| !known.contains(&e.position()))
            .collect();
        if fresh.is_empty() {
            break;
        }
        fresh.sort_by(by_weight);
        fresh.truncate(k);
        found.extend(fresh);
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(n: usize, entries: &[(usize, usize, f64)]) -> DenseMatrix {
        let mut c = DenseMatrix::zeros(n, n);
        for &(i, j, w) in entries {
            c.set(i, j, w);
        }
        c
    }

    #[test]
    fn single_nonzero_candidate() {
        let mut a = DenseMatrix::zeros(4, 4);
        let mut b = DenseMatrix::zeros(4, 4);
        a.set(1, 3, 2.0);
        b.set(3, 2, 3.0);
        let sched = build_prime_schedule(4, 3).unwrap();
        let g = compute_groups(&a, &b, &sched, ConvolutionMode::Naive, false).unwrap();
        let c = check_candidates(&g, &a, &b, &GroupOptions::default());
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].row, c[0].col, c[0].weight), (1, 2, 6.0));
        assert_eq!(6 % c[0].prime, c[0].residue);
    }

    #[test]
    fn zero_product_has_no_candidates() {
        let z = DenseMatrix::zeros(8, 8);
        assert!(recover_heavy(&z, &z, 4, &GroupOptions::default()).unwrap().is_empty());
        assert!(multi_pass_topk(&z, &z, 2, 2, 2.0, &GroupOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn planted_support_is_recovered() {
        let c = planted(16, &[(0, 5, 3.0), (7, 7, -2.0), (15, 0, 9.0), (3, 12, -1.0)]);
        let id = DenseMatrix::identity(16);
        for mode in [ConvolutionMode::Naive, ConvolutionMode::Fft] {
            let opts = GroupOptions { mode, ..Default::default() };
            let mut got = recover_heavy(&c, &id, 4, &opts).unwrap();
            got.sort_by_key(|e| e.position());
            let got: Vec<_> = got.iter().map(|e| (e.row, e.col, e.weight)).collect();
            assert_eq!(got, vec![(0, 5, 3.0), (3, 12, -1.0), (7, 7, -2.0), (15, 0, 9.0)]);
        }
    }

    #[test]
    fn single_entry_with_budget_two() {
        let c = planted(5, &[(4, 1, 0.5)]);
        let got = recover_heavy(&c, &DenseMatrix::identity(5), 2, &GroupOptions::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].row, got[0].col, got[0].weight), (4, 1, 0.5));
    }

    #[test]
    fn rectangular_inputs() {
        // (3 x 2)(2 x 5); pads to 8
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[0.0, 0.0, 0.0, 0.0, 4.0], [0.0, -1.0, 0.0, 0.0, 0.0]]).unwrap();
        let mut got = recover_heavy(&a, &b, 2, &GroupOptions::default()).unwrap();
        got.sort_by_key(|e| e.position());
        let got: Vec<_> = got.iter().map(|e| (e.row, e.col, e.weight)).collect();
        assert_eq!(got, vec![(0, 4, 4.0), (2, 1, -2.0)]);
    }

    #[test]
    fn parameter_checks() {
        let z = DenseMatrix::zeros(4, 4);
        let o = GroupOptions::default();
        assert!(multi_pass_topk(&z, &z, 2, 0, 2.0, &o).is_err());
        assert!(multi_pass_topk(&z, &z, 2, 1, 1.0, &o).is_err());
        assert!(recover_heavy(&z, &DenseMatrix::zeros(3, 4), 2, &o).is_err());
    }

    #[test]
    fn budget_formula() {
        assert_eq!(zipf_budget(4, 2.0, 1.0), 16);
        assert_eq!(zipf_budget(1, 2.0, 1.0), 2);
    }
}
