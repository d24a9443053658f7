//! One-pass approximation of a nonnegative product `C = A * B`.
//!
//! The product is consumed as the stream of its outer products
//! `A[:, t] * B[t, :]`. Each outer product is cut down to its `b` largest
//! entries (all reduced by the rank-(b+1) product), merged into the summary,
//! and the union is cut back to `b` entries the same way. Every estimate is a
//! lower bound within `||C||_E1 / b` of the true entry.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{CompensatedSum, DenseMatrix, ResidualProfile};
use crate::outer::{
    count_at_least, enumerate_top, merge_into_summary, position_sort, select_rank_outer,
    SortedVector,
};
use crate::summary::EntrySummary;

/// Audit counters for the decrement steps of a pass.
///
/// Every positive decrement must hit at least `b + 1` distinct entries;
/// `short_decrements` counts those that did not and must stay 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecrementStats {
    pub outer_products: usize,
    pub decrements: usize,
    pub min_touched: Option<usize>,
    pub short_decrements: usize,
}

impl DecrementStats {
    fn record(&mut self, delta: f64, touched: usize, b: usize) {
        if delta <= 0.0 {
            return;
        }
        self.decrements += 1;
        self.min_touched = Some(self.min_touched.map_or(touched, |m| m.min(touched)));
        if touched < b + 1 {
            self.short_decrements += 1;
        }
    }
}

/// Incremental form of the pass: feed outer products one at a time.
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    summary: EntrySummary,
    stats: DecrementStats,
}

impl SummaryBuilder {
    pub fn new(b: usize, rows: usize, cols: usize) -> Result<Self> {
        Ok(SummaryBuilder {
            summary: EntrySummary::new(b, rows, cols)?,
            stats: DecrementStats::default(),
        })
    }

    /// Adds the outer product of a column `u` (length `rows`) and a row `v`
    /// (length `cols`), both nonnegative.
    pub fn absorb_dense(&mut self, u: &[f64], v: &[f64]) -> Result<()> {
        let (rows, cols) = self.summary.shape();
        if u.len() != rows || v.len() != cols {
            return Err(Error::DimensionMismatch {
                left_rows: u.len(),
                left_cols: 1,
                right_rows: 1,
                right_cols: v.len(),
            });
        }
        let u = SortedVector::from_dense(u)?;
        let v = SortedVector::from_dense(v)?;
        self.absorb(&u, &v);
        Ok(())
    }

    /// Adds the outer product of two sparse nonnegative vectors given as
    /// `(index, value)` pairs.
    pub fn absorb_sparse(
        &mut self,
        u: impl IntoIterator<Item = (usize, f64)>,
        v: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<()> {
        let (rows, cols) = self.summary.shape();
        let u = SortedVector::from_pairs(u)?;
        let v = SortedVector::from_pairs(v)?;
        if let Some(&(_, i)) = u.entries().iter().find(|e| e.1 >= rows) {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: 0,
                rows,
                cols,
            });
        }
        if let Some(&(_, j)) = v.entries().iter().find(|e| e.1 >= cols) {
            return Err(Error::IndexOutOfRange {
                row: 0,
                col: j,
                rows,
                cols,
            });
        }
        self.absorb(&u, &v);
        Ok(())
    }

    /// Adds the outer product of two already sorted vectors.
    pub fn absorb(&mut self, u: &SortedVector, v: &SortedVector) {
        let b = self.summary.capacity();
        self.stats.outer_products += 1;
        if u.is_empty() || v.is_empty() {
            return;
        }
        let cutoff = select_rank_outer(u, v, b + 1);
        if cutoff > 0.0 {
            self.stats.record(cutoff, count_at_least(u, v, cutoff), b);
        }
        let top = enumerate_top(u, v, cutoff, b);
        let entries = position_sort(&top);
        let outcome = merge_into_summary(&mut self.summary, &entries);
        self.stats.record(outcome.decrement, outcome.touched, b);
    }

    pub fn summary(&self) -> &EntrySummary {
        &self.summary
    }

    pub fn stats(&self) -> &DecrementStats {
        &self.stats
    }

    /// Ends the pass and freezes the summary for point queries.
    pub fn finish(self) -> (EntrySummary, DecrementStats) {
        let mut summary = self.summary;
        summary.freeze();
        (summary, self.stats)
    }
}

fn check_nonnegative(m: &DenseMatrix) -> Result<()> {
    if m.is_nonnegative() {
        return Ok(());
    }
    match m.entries().find(|(_, v)| *v < 0.0) {
        Some((p, value)) => Err(Error::NegativeValue {
            row: p.row,
            col: p.col,
            value,
        }),
        None => Ok(()),
    }
}

/// Summary of `A * B` with capacity `b`, plus the decrement audit.
pub fn compute_summary_with_stats(
    a: &DenseMatrix,
    b_mat: &DenseMatrix,
    b: usize,
) -> Result<(EntrySummary, DecrementStats)> {
    if a.cols() != b_mat.rows() {
        return Err(Error::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b_mat.rows(),
            right_cols: b_mat.cols(),
        });
    }
    check_nonnegative(a)?;
    check_nonnegative(b_mat)?;
    let mut builder = SummaryBuilder::new(b, a.rows(), b_mat.cols())?;
    for t in 0..a.cols() {
        let u = SortedVector::from_dense(&a.column(t))?;
        let v = SortedVector::from_dense(&b_mat.row(t))?;
        builder.absorb(&u, &v);
    }
    Ok(builder.finish())
}

/// Summary of the nonnegative product `A * B` with capacity `b`.
pub fn compute_summary(a: &DenseMatrix, b_mat: &DenseMatrix, b: usize) -> Result<EntrySummary> {
    compute_summary_with_stats(a, b_mat, b).map(|(s, _)| s)
}

/// Parameters for an error report.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRunConfig {
    pub b: usize,
    pub p: u32,
    /// Residual ranks for the per-k residual and sparse-recovery checks.
    pub k_list: Vec<usize>,
}

impl ApproxRunConfig {
    pub fn new(b: usize, p: u32, k_list: Vec<usize>) -> Result<Self> {
        if b == 0 {
            return Err(Error::invalid("b", "summary capacity must be positive"));
        }
        if p == 0 {
            return Err(Error::invalid("p", "norm order must be at least 1"));
        }
        Ok(ApproxRunConfig { b, p, k_list })
    }
}

/// One bound compared with one measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub satisfied: bool,
}

/// Measured errors of a summary against the exact product, next to the
/// guaranteed bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub b: usize,
    pub p: u32,
    pub l1_norm: f64,
    /// `max_ij (C_ij - estimate_ij)`.
    pub max_underestimation: f64,
    /// `max_ij (estimate_ij - C_ij)`; positive values break the lower-bound guarantee.
    pub max_overestimation: f64,
    /// `||C - C_hat||_Ep`.
    pub norm_error: f64,
    /// `||C||_E1 / b`.
    pub additive_bound: f64,
    /// `min over k < b of ||C||_{E^k 1} / (b - k)` and the minimizing k.
    pub residual_bound: f64,
    pub residual_bound_k: usize,
    /// Absolute float slack used in every comparison.
    pub slack: f64,
    pub checks: Vec<BoundCheck>,
}

impl ErrorReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    /// Writes `check,bound,measured,satisfied` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["check", "bound", "measured", "satisfied"])?;
        for c in &self.checks {
            out.write_record([
                c.name.clone(),
                c.bound.to_string(),
                c.measured.to_string(),
                c.satisfied.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Relative float slack applied to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// Right-hand side of the sparse-recovery guarantee:
/// `(1 + eps)^(1/p) * (eps / k)^(1 - 1/p) * residual_l1`.
pub fn sparse_recovery_bound(eps: f64, k: usize, p: u32, residual_l1: f64) -> f64 {
    let p = p as f64;
    (1.0 + eps).powf(1.0 / p) * (eps / k as f64).powf(1.0 - 1.0 / p) * residual_l1
}

/// `min over k < b of ||C||_{E^k 1} / (b - k)` with its argmin.
pub fn best_residual_bound(profile: &ResidualProfile, b: usize) -> (f64, usize) {
    (0..b)
        .map(|k| (profile.residual_l1(k) / (b - k) as f64, k))
        .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

/// Compares `summary` against the exact product `c`.
pub fn error_report(c: &DenseMatrix, summary: &EntrySummary, cfg: &ApproxRunConfig) -> Result<ErrorReport> {
    if summary.shape() != c.shape() {
        return Err(Error::DimensionMismatch {
            left_rows: c.rows(),
            left_cols: c.cols(),
            right_rows: summary.shape().0,
            right_cols: summary.shape().1,
        });
    }
    let b = cfg.b;
    let profile = ResidualProfile::of(c);
    let l1 = profile.l1();
    let slack = BOUND_SLACK * l1.max(f64::MIN_POSITIVE);

    let mut max_under = 0.0f64;
    let mut max_over = f64::NEG_INFINITY;
    let mut diff_p = CompensatedSum::default();
    let mut heavy_excess: Option<f64> = None;
    for (pos, exact) in c.entries() {
        let est = summary.estimate_entry(pos.row, pos.col)?;
        let under = exact - est;
        max_under = max_under.max(under);
        max_over = max_over.max(-under);
        diff_p.add(under.abs().powi(cfg.p as i32));
        if b > 1 && l1 > 0.0 {
            let alpha = exact / l1;
            if alpha * b as f64 > 1.0 {
                let allowed = (1.0 - alpha) * l1 / (b - 1) as f64;
                let excess = under - allowed;
                heavy_excess = Some(heavy_excess.map_or(excess, |e: f64| e.max(excess)));
            }
        }
    }
    if c.is_empty() {
        max_over = 0.0;
    }
    let norm_error = diff_p.value().powf(1.0 / cfg.p as f64);
    let additive_bound = l1 / b as f64;
    let (residual_bound, residual_bound_k) = best_residual_bound(&profile, b);

    let mut checks = Vec::new();
    let mut push = |name: String, bound: f64, measured: f64| {
        checks.push(BoundCheck {
            name,
            bound,
            measured,
            satisfied: measured <= bound + slack,
        });
    };
    push("no_overestimation".into(), 0.0, max_over);
    push("additive_e1".into(), additive_bound, max_under);
    push(format!("residual_e1_min_k{residual_bound_k}"), residual_bound, max_under);
    if let Some(excess) = heavy_excess {
        push("heavy_entry_excess".into(), 0.0, excess);
    }
    for &k in &cfg.k_list {
        if k == 0 || k >= b {
            continue;
        }
        let residual = profile.residual_l1(k);
        push(format!("residual_e1_k{k}"), residual / (b - k) as f64, max_under);
        let eps = k as f64 / (b - k) as f64;
        push(
            format!("sparse_recovery_p{}_k{k}", cfg.p),
            sparse_recovery_bound(eps, k, cfg.p, residual),
            norm_error,
        );
    }

    Ok(ErrorReport {
        b,
        p: cfg.p,
        l1_norm: l1,
        max_underestimation: max_under,
        max_overestimation: max_over,
        norm_error,
        additive_bound,
        residual_bound,
        residual_bound_k,
        slack,
        checks,
    })
}

/// One point of an error-versus-summary-size curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub b: usize,
    pub measured_error: f64,
    pub bound_e1: f64,
    pub bound_residual: f64,
}

/// Runs the pass once per capacity in `sizes` and records the worst
/// underestimation next to both bounds.
pub fn error_curve(
    a: &DenseMatrix,
    b_mat: &DenseMatrix,
    c: &DenseMatrix,
    sizes: &[usize],
) -> Result<Vec<CurvePoint>> {
    sizes
        .iter()
        .map(|&b| {
            let s = compute_summary(a, b_mat, b)?;
            let r = error_report(c, &s, &ApproxRunConfig::new(b, 1, Vec::new())?)?;
            Ok(CurvePoint {
                b,
                measured_error: r.max_underestimation,
                bound_e1: r.additive_bound,
                bound_residual: r.residual_bound,
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(w: W, points: &[CurvePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["b", "measured_error", "bound_E1", "bound_residual"])?;
    for pt in points {
        out.write_record([
            pt.b.to_string(),
            pt.measured_error.to_string(),
            pt.bound_e1.to_string(),
            pt.bound_residual.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
