//! Per-outer-product machinery: rank selection in the product of two sorted
//! vectors, the implicit top-b representation, position-order emission and
//! the merge into an [`EntrySummary`].
//!
//! Ranks here count from the largest value: rank 1 is the maximum product.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::Position;
use crate::summary::EntrySummary;

/// Below this length on both sides, selection enumerates all products.
pub const ENUMERATION_LIMIT: usize = 64;

/// Nonzero `(value, original index)` pairs sorted by value descending, ties
/// by index ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SortedVector {
    entries: Vec<(f64, usize)>,
}

impl SortedVector {
    /// Sorts a dense nonnegative vector, dropping zeros.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    /// Sorts `(index, value)` pairs, dropping zeros. Indices must be distinct.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries = Vec::new();
        for (pos, value) in pairs {
            if value.is_nan() || value < 0.0 || value.is_infinite() {
                return Err(Error::invalid(
                    "vector",
                    format!("value {value} at index {pos} is not a finite nonnegative real"),
                ));
            }
            if value > 0.0 {
                entries.push((value, pos));
            }
        }
        entries.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut seen: Vec<usize> = entries.iter().map(|e| e.1).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("vector", "duplicate index"));
        }
        Ok(SortedVector { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.entries[k].0
    }

    pub fn pos(&self, k: usize) -> usize {
        self.entries[k].1
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }
}

/// Number of products `u[i] * v[j]` with value `>= t` (`strict`: `> t`).
///
/// Two-index sweep: as `i` advances the admissible prefix of `v` can only shrink.
fn count_products(u: &SortedVector, v: &SortedVector, t: f64, strict: bool) -> usize {
    let admits = |x: f64| if strict { x > t } else { x >= t };
    let mut j = v.len();
    let mut count = 0;
    for &(ui, _) in &u.entries {
        while j > 0 && !admits(ui * v.value(j - 1)) {
            j -= 1;
        }
        if j == 0 {
            break;
        }
        count += j;
    }
    count
}

/// Per-row prefix lengths of products `>= t` (`strict`: `> t`).
fn row_counts(u: &SortedVector, v: &SortedVector, t: f64, strict: bool) -> Vec<usize> {
    let admits = |x: f64| if strict { x > t } else { x >= t };
    let mut j = v.len();
    u.entries
        .iter()
        .map(|&(ui, _)| {
            while j > 0 && !admits(ui * v.value(j - 1)) {
                j -= 1;
            }
            j
        })
        .collect()
}

/// Value of the `r`-th largest product `u[i] * v[j]`, or 0 when there are
/// fewer than `r` nonzero products.
///
/// Small inputs enumerate every product. Larger ones bisect over the bit
/// patterns of nonnegative doubles, whose integer order matches their
/// numeric order, using the linear counting sweep; the result is exact.
pub fn select_rank_outer(u: &SortedVector, v: &SortedVector, r: usize) -> f64 {
    assert!(r >= 1, "ranks start at 1");
    if r > u.len() * v.len() {
        return 0.0;
    }
    if u.len() <= ENUMERATION_LIMIT && v.len() <= ENUMERATION_LIMIT {
        select_by_enumeration(u, v, r)
    } else {
        select_by_search(u, v, r)
    }
}

/// [`select_rank_outer`] by sorting every product.
pub fn select_by_enumeration(u: &SortedVector, v: &SortedVector, r: usize) -> f64 {
    if r > u.len() * v.len() {
        return 0.0;
    }
    let mut products: Vec<f64> = u
        .entries
        .iter()
        .flat_map(|&(a, _)| v.entries.iter().map(move |&(b, _)| a * b))
        .collect();
    let (_, kth, _) = products.select_nth_unstable_by(r - 1, |a, b| b.total_cmp(a));
    *kth
}

/// [`select_rank_outer`] by bisection over the value domain.
pub fn select_by_search(u: &SortedVector, v: &SortedVector, r: usize) -> f64 {
    if r > u.len() * v.len() {
        return 0.0;
    }
    // Largest t with count(>= t) >= r is exactly the r-th largest product.
    let mut lo = 0u64;
    let mut hi = (u.value(0) * v.value(0)).to_bits();
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if count_products(u, v, f64::from_bits(mid), false) >= r {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    f64::from_bits(lo)
}

/// Implicit representation of the largest products of one outer product:
/// row `q` covers `u[q] * v[0..r_q)`.
#[derive(Debug, Clone)]
pub struct TopBList<'a> {
    u: &'a SortedVector,
    v: &'a SortedVector,
    cutoff: f64,
    rows: Vec<(usize, usize)>,
}

impl<'a> TopBList<'a> {
    pub fn rows(&self) -> &[(usize, usize)] {
        &self.rows
    }

    /// The value `c` the list was cut at.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Number of covered products.
    pub fn covered(&self) -> usize {
        self.rows.iter().map(|r| r.1).sum()
    }

    /// Covered products as `(original position, product)` in row order.
    pub fn products(&self) -> impl Iterator<Item = (Position, f64)> + '_ {
        self.rows.iter().flat_map(move |&(q, r)| {
            let (uq, pu) = self.u.entries[q];
            self.v.entries[..r]
                .iter()
                .map(move |&(vj, pv)| (Position::new(pu, pv), uq * vj))
        })
    }
}

/// Covers every product strictly above `c`, then admits products equal to
/// `c` in position order until `min(b, #nonzero products)` are covered.
///
/// `c` must be `select_rank_outer(u, v, b + 1)`.
pub fn enumerate_top<'a>(
    u: &'a SortedVector,
    v: &'a SortedVector,
    c: f64,
    b: usize,
) -> TopBList<'a> {
    let budget = b.min(u.len() * v.len());
    let strict = row_counts(u, v, c, true);
    let strict_total: usize = strict.iter().sum();
    assert!(
        strict_total <= b,
        "cutoff {c} leaves {strict_total} products above it, more than b = {b}"
    );
    let mut counts = strict;
    let mut need = budget - strict_total;
    if need > 0 {
        let inclusive = row_counts(u, v, c, false);
        let mut tie_rows: Vec<usize> = (0..u.len()).filter(|&q| inclusive[q] > counts[q]).collect();
        tie_rows.sort_unstable_by_key(|&q| u.pos(q));
        // Within a row the tied products share a v value, hence are in index order.
        for q in tie_rows {
            if need == 0 {
                break;
            }
            let take = (inclusive[q] - counts[q]).min(need);
            counts[q] += take;
            need -= take;
        }
    }
    let rows = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r > 0)
        .collect();
    TopBList {
        u,
        v,
        cutoff: c,
        rows,
    }
}

/// Emits the covered entries in position order, each reduced by the cutoff;
/// entries that drop to zero are omitted.
///
/// Row prefixes of `v` are nested, so each new suffix `v[r_small..r_large)`
/// is sorted by index on its own and merged into the running sorted prefix.
pub fn position_sort(list: &TopBList<'_>) -> Vec<(Position, f64)> {
    if list.rows.is_empty() {
        return Vec::new();
    }
    let mut lengths: Vec<usize> = list.rows.iter().map(|r| r.1).collect();
    lengths.sort_unstable();
    lengths.dedup();

    // prefixes[k] holds v[0..lengths[k]) sorted by original index.
    let mut prefixes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(lengths.len());
    let mut running: Vec<(usize, f64)> = Vec::new();
    let mut done = 0;
    for &len in &lengths {
        let mut fresh: Vec<(usize, f64)> = list.v.entries[done..len]
            .iter()
            .map(|&(val, pos)| (pos, val))
            .collect();
        fresh.sort_unstable_by_key(|e| e.0);
        running = merge_by_index(&running, &fresh);
        prefixes.push(running.clone());
        done = len;
    }

    let mut rows = list.rows.clone();
    rows.sort_unstable_by_key(|&(q, _)| list.u.pos(q));

    let mut out = Vec::with_capacity(list.covered());
    for (q, r) in rows {
        let (uq, pu) = list.u.entries[q];
        let k = lengths.binary_search(&r).expect("row length recorded");
        for &(pv, vj) in &prefixes[k] {
            let w = uq * vj - list.cutoff;
            if w > 0.0 {
                out.push((Position::new(pu, pv), w));
            }
        }
    }
    out
}

fn merge_by_index(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].0 <= b[j].0 {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// What one merge did to the summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeOutcome {
    /// Amount subtracted from the surviving counters (0 when no eviction ran).
    pub decrement: f64,
    /// Distinct entries whose weight was at least `decrement` when it was applied.
    pub touched: usize,
}

/// Merges position-sorted `entries` into `summary`.
///
/// Coinciding keys add up. If the union exceeds the capacity `b`, the
/// rank-(b+1) weight `w` of the union is subtracted from the `b` largest and
/// everything that reaches zero is evicted.
pub fn merge_into_summary(summary: &mut EntrySummary, entries: &[(Position, f64)]) -> MergeOutcome {
    let b = summary.capacity();
    assert!(entries.len() <= b, "at most b entries may be merged at once");
    debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));

    let current = summary.take_slots();
    let mut union = Vec::with_capacity(current.len() + entries.len());
    let (mut i, mut j) = (0, 0);
    while i < current.len() && j < entries.len() {
        match current[i].0.cmp(&entries[j].0) {
            Ordering::Less => {
                union.push(current[i]);
                i += 1;
            }
            Ordering::Greater => {
                union.push(entries[j]);
                j += 1;
            }
            Ordering::Equal => {
                union.push((current[i].0, current[i].1 + entries[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    union.extend_from_slice(&current[i..]);
    union.extend_from_slice(&entries[j..]);

    if union.len() <= b {
        summary.put_slots(union);
        return MergeOutcome {
            decrement: 0.0,
            touched: 0,
        };
    }

    let mut weights: Vec<f64> = union.iter().map(|e| e.1).collect();
    let (_, w, _) = weights.select_nth_unstable_by(b, |x, y| y.total_cmp(x));
    let w = *w;
    let touched = union.iter().filter(|e| e.1 >= w).count();
    union.retain_mut(|(_, x)| {
        *x -= w;
        *x > 0.0
    });
    summary.put_slots(union);
    MergeOutcome {
        decrement: w,
        touched,
    }
}

/// Number of products `>= t`; used to audit the decrement precondition.
pub fn count_at_least(u: &SortedVector, v: &SortedVector, t: f64) -> usize {
    count_products(u, v, t, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(values: &[f64]) -> SortedVector {
        SortedVector::from_dense(values).unwrap()
    }

    fn p(i: usize, j: usize) -> Position {
        Position::new(i, j)
    }

    #[test]
    fn sorted_vector_orders_and_prunes() {
        let s = sv(&[0.0, 2.0, 5.0, 2.0]);
        assert_eq!(s.entries(), &[(5.0, 2), (2.0, 1), (2.0, 3)]);
        assert!(SortedVector::from_dense(&[1.0, -1.0]).is_err());
        assert!(SortedVector::from_pairs([(1, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn select_examples() {
        assert_eq!(select_rank_outer(&sv(&[1.0]), &sv(&[1.0]), 1), 1.0);
        let (u, v) = (sv(&[4.0, 2.0]), sv(&[3.0, 1.0]));
        assert_eq!(select_rank_outer(&u, &v, 3), 4.0);
        assert_eq!(select_rank_outer(&u, &v, 5), 0.0);
        assert_eq!(select_by_search(&u, &v, 3), 4.0);
        assert_eq!(select_by_search(&u, &v, 1), 12.0);
        assert_eq!(select_by_search(&u, &v, 4), 2.0);
    }

    #[test]
    fn enumerate_example() {
        let (u, v) = (sv(&[4.0, 2.0]), sv(&[3.0, 1.0]));
        let c = select_rank_outer(&u, &v, 3);
        let l = enumerate_top(&u, &v, c, 2);
        assert_eq!(l.rows(), &[(0, 1), (1, 1)]);
        let mut covered: Vec<f64> = l.products().map(|e| e.1).collect();
        covered.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(covered, vec![12.0, 6.0]);
    }

    #[test]
    fn enumerate_covers_everything_when_budget_is_large() {
        let (u, v) = (sv(&[4.0, 2.0]), sv(&[3.0, 1.0]));
        let c = select_rank_outer(&u, &v, 6);
        assert_eq!(c, 0.0);
        let l = enumerate_top(&u, &v, c, 5);
        assert_eq!(l.covered(), 4);
        let zero = sv(&[0.0, 0.0]);
        assert!(enumerate_top(&zero, &v, 0.0, 3).rows().is_empty());
    }

    #[test]
    fn ties_at_cutoff_are_admitted_in_position_order() {
        // All products equal 1; three of four fit.
        let (u, v) = (sv(&[1.0, 1.0]), sv(&[1.0, 1.0]));
        let c = select_rank_outer(&u, &v, 4);
        let l = enumerate_top(&u, &v, c, 3);
        assert_eq!(l.rows(), &[(0, 2), (1, 1)]);
        let covered: Vec<Position> = l.products().map(|e| e.0).collect();
        assert_eq!(covered, vec![p(0, 0), p(0, 1), p(1, 0)]);
    }

    #[test]
    fn ties_across_rows_follow_original_row_index() {
        // Products 8, 4 (row index 1) and 4 (row index 0), 2: the tie at 4 goes
        // to the entry in original row 0.
        let (u, v) = (sv(&[2.0, 4.0]), sv(&[1.0, 2.0]));
        let c = select_rank_outer(&u, &v, 3);
        assert_eq!(c, 4.0);
        let l = enumerate_top(&u, &v, c, 2);
        let covered: Vec<Position> = l.products().map(|e| e.0).collect();
        assert_eq!(covered, vec![p(1, 1), p(0, 1)]);
    }

    #[test]
    fn position_sort_maps_back_and_subtracts_cutoff() {
        // u = [2 at index 1, 4 at index 0], v = [1 at index 0, 3 at index 1]
        let u = sv(&[4.0, 2.0]);
        let v = sv(&[1.0, 3.0]);
        let c = select_rank_outer(&u, &v, 3);
        let l = enumerate_top(&u, &v, c, 2);
        assert_eq!(position_sort(&l), vec![(p(0, 1), 8.0), (p(1, 1), 2.0)]);
    }

    #[test]
    fn position_sort_on_enumerated_example() {
        let (u, v) = (sv(&[4.0, 2.0]), sv(&[3.0, 1.0]));
        let l = enumerate_top(&u, &v, 4.0, 2);
        assert_eq!(position_sort(&l), vec![(p(0, 0), 8.0), (p(1, 0), 2.0)]);
    }

    #[test]
    fn position_sort_edge_cases() {
        let (u, v) = (sv(&[0.0]), sv(&[1.0]));
        assert!(position_sort(&enumerate_top(&u, &v, 0.0, 1)).is_empty());
        let (u, v) = (sv(&[0.0, 3.0]), sv(&[2.0, 0.0]));
        let l = enumerate_top(&u, &v, 0.0, 1);
        assert_eq!(position_sort(&l), vec![(p(1, 0), 6.0)]);
    }

    #[test]
    fn merge_examples() {
        let mut s = EntrySummary::new(4, 2, 2).unwrap();
        merge_into_summary(&mut s, &[(p(0, 1), 1.0), (p(1, 0), 2.0)]);
        assert_eq!(s.slots(), &[(p(0, 1), 1.0), (p(1, 0), 2.0)]);

        let mut s = EntrySummary::from_slots(4, 2, 2, vec![(p(0, 0), 3.0)]).unwrap();
        let out = merge_into_summary(&mut s, &[(p(0, 0), 2.0)]);
        assert_eq!(s.slots(), &[(p(0, 0), 5.0)]);
        assert_eq!(out.decrement, 0.0);

        let mut s =
            EntrySummary::from_slots(2, 2, 2, vec![(p(0, 0), 5.0), (p(0, 1), 1.0)]).unwrap();
        let out = merge_into_summary(&mut s, &[(p(1, 0), 2.0)]);
        assert_eq!(s.slots(), &[(p(0, 0), 4.0), (p(1, 0), 1.0)]);
        assert_eq!(out.decrement, 1.0);
        assert_eq!(out.touched, 3);
    }
}
