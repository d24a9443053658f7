use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::FftPlanner;

use super::primes::PrimeSchedule;
use super::residue::{col_poly, cyclic_naive, row_poly, ConvolutionMode, FftConvolver};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Position};

/// Side length after zero padding: the next power of two, at least 2.
pub fn padded_dim(rows: usize, cols: usize) -> usize {
    rows.max(cols).max(2).next_power_of_two()
}

/// Counters for a single prime.
#[derive(Clone)]
pub(crate) struct PrimeTable {
    pub(crate) prime: usize,
    pub(crate) fft: Option<Arc<FftConvolver>>,
    /// `Q`: total weight per residue.
    pub(crate) totals: Vec<f64>,
    /// `G`: weight of the bit-is-1 subgroup, indexed `residue * 2l + k`.
    pub(crate) bits: Vec<f64>,
}

impl PrimeTable {
    fn new(prime: usize, width: usize, fft: Option<Arc<FftConvolver>>) -> Self {
        PrimeTable {
            prime,
            fft,
            totals: vec![0.0; prime],
            bits: vec![0.0; prime * width],
        }
    }

    fn width(&self) -> usize {
        self.bits.len() / self.prime
    }

    fn add_bit(&mut self, k: usize, hist: &[f64]) {
        let width = self.width();
        for (m, &h) in hist.iter().enumerate() {
            self.bits[m * width + k] += h;
        }
    }

    /// Adds the outer product `a * b` (both of padded length `n = 2^l`).
    fn absorb(&mut self, a: &[f64], b: &[f64], n: usize, l: usize) {
        let p = self.prime;
        let pa = row_poly(a, n, p, |_| true);
        let pb = col_poly(b, p, |_| true);
        match self.fft.clone() {
            Some(conv) => {
                let fa = conv.transform(&pa);
                let fb = conv.transform(&pb);
                add_into(&mut self.totals, &conv.multiply(&fa, &fb));
                for k in 0..l {
                    let fbk = conv.transform(&col_poly(b, p, |j| j >> k & 1 == 1));
                    self.add_bit(k, &conv.multiply(&fa, &fbk));
                }
                for k in l..2 * l {
                    let fak = conv.transform(&row_poly(a, n, p, |i| i >> (k - l) & 1 == 1));
                    self.add_bit(k, &conv.multiply(&fak, &fb));
                }
            }
            None => {
                add_into(&mut self.totals, &cyclic_naive(&pa, &pb));
                for k in 0..l {
                    let h = cyclic_naive(&pa, &col_poly(b, p, |j| j >> k & 1 == 1));
                    self.add_bit(k, &h);
                }
                for k in l..2 * l {
                    let h = cyclic_naive(&row_poly(a, n, p, |i| i >> (k - l) & 1 == 1), &pb);
                    self.add_bit(k, &h);
                }
            }
        }
    }

    /// Removes weight `w` of item `key` from its group.
    fn subtract(&mut self, key: usize, w: f64) {
        let width = self.width();
        let m = key % self.prime;
        self.totals[m] -= w;
        for k in 0..width {
            if key >> k & 1 == 1 {
                self.bits[m * width + k] -= w;
            }
        }
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// Group counters `Q` and `G` for every prime of a schedule.
///
/// Item `(i, j)` is numbered `i * 2^l + j` on the zero-padded `2^l x 2^l`
/// product. Tables are ragged: prime `p` owns `p` residues.
#[derive(Clone)]
pub struct GroupTables {
    n: usize,
    bits: usize,
    pub(crate) tables: Vec<PrimeTable>,
    subtracted: Vec<(Position, f64)>,
}

impl std::fmt::Debug for GroupTables {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupTables")
            .field("n", &self.n)
            .field("bits", &self.bits)
            .field("primes", &self.primes())
            .finish()
    }
}

impl GroupTables {
    fn empty(sched: &PrimeSchedule, mode: ConvolutionMode) -> Self {
        let n = sched.n();
        let bits = n.trailing_zeros() as usize;
        let mut planner = FftPlanner::new();
        let tables = sched
            .primes()
            .iter()
            .map(|&p| {
                let fft = mode
                    .uses_fft(p)
                    .then(|| Arc::new(FftConvolver::new(p, &mut planner)));
                PrimeTable::new(p, 2 * bits, fft)
            })
            .collect();
        GroupTables {
            n,
            bits,
            tables,
            subtracted: Vec::new(),
        }
    }

    /// Padded side length `2^l`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `l`; each residue carries `2l` bit counters.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn primes(&self) -> Vec<usize> {
        self.tables.iter().map(|t| t.prime).collect()
    }

    /// Total weight `Q` of group `(prime index, residue)`.
    pub fn total(&self, prime_index: usize, residue: usize) -> f64 {
        self.tables[prime_index].totals[residue]
    }

    /// Weight `G` of the bit-`k`-is-1 subgroup of `(prime index, residue)`.
    pub fn bit_weight(&self, prime_index: usize, residue: usize, k: usize) -> f64 {
        let t = &self.tables[prime_index];
        t.bits[residue * 2 * self.bits + k]
    }

    pub fn totals(&self, prime_index: usize) -> &[f64] {
        &self.tables[prime_index].totals
    }

    /// Whether the prime's counters were accumulated through FFT.
    pub fn uses_fft(&self, prime_index: usize) -> bool {
        self.tables[prime_index].fft.is_some()
    }

    pub(crate) fn key(&self, pos: Position) -> usize {
        pos.row * self.n + pos.col
    }

    pub(crate) fn position(&self, key: u64) -> Position {
        let key = key as usize;
        Position::new(key >> self.bits, key & (self.n - 1))
    }

    /// Removes a known entry from every group it belongs to.
    pub fn subtract_entry(&mut self, pos: Position, w: f64) {
        assert!(pos.row < self.n && pos.col < self.n, "entry {pos} outside tables");
        let key = self.key(pos);
        for t in &mut self.tables {
            t.subtract(key, w);
        }
        self.subtracted.push((pos, w));
    }

    pub fn subtracted(&self) -> &[(Position, f64)] {
        &self.subtracted
    }

    /// Recomputes one prime's counters with the naive product, replaying
    /// every subtraction applied so far.
    pub(crate) fn recompute_naive(&self, idx: usize, a: &DenseMatrix, b: &DenseMatrix) -> PrimeTable {
        let mut table = PrimeTable::new(self.tables[idx].prime, 2 * self.bits, None);
        for t in 0..a.cols() {
            if let Some((col, row)) = padded_pair(a, b, t, self.n) {
                table.absorb(&col, &row, self.n, self.bits);
            }
        }
        for &(pos, w) in &self.subtracted {
            table.subtract(self.key(pos), w);
        }
        table
    }

    /// Dumps every counter as `prime,residue,bit,counter`; the total of a
    /// group has an empty bit field.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["prime", "residue", "bit", "counter"])?;
        let width = 2 * self.bits;
        for t in &self.tables {
            for m in 0..t.prime {
                let (p, r) = (t.prime.to_string(), m.to_string());
                out.write_record([p.as_str(), r.as_str(), "", &t.totals[m].to_string()])?;
                for k in 0..width {
                    let c = t.bits[m * width + k].to_string();
                    out.write_record([p.as_str(), r.as_str(), &k.to_string(), &c])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Column `t` of `a` and row `t` of `b`, zero padded to length `n`; `None`
/// when either is all zero.
fn padded_pair(a: &DenseMatrix, b: &DenseMatrix, t: usize, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut col = a.column(t).into_owned();
    let mut row = b.row(t).into_owned();
    if col.iter().all(|&x| x == 0.0) || row.iter().all(|&x| x == 0.0) {
        return None;
    }
    col.resize(n, 0.0);
    row.resize(n, 0.0);
    Some((col, row))
}

/// Accumulates group counters over the outer products of `a * b` in one pass.
pub fn compute_groups(
    a: &DenseMatrix,
    b: &DenseMatrix,
    sched: &PrimeSchedule,
    mode: ConvolutionMode,
    parallel: bool,
) -> Result<GroupTables> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let n = padded_dim(a.rows(), b.cols());
    if sched.n() != n {
        return Err(Error::invalid(
            "sched",
            format!("schedule built for n = {}, product pads to {n}", sched.n()),
        ));
    }
    let mut groups = GroupTables::empty(sched, mode);
    let l = groups.bits;
    for t in 0..a.cols() {
        let Some((col, row)) = padded_pair(a, b, t, n) else {
            continue;
        };
        if parallel {
            groups
                .tables
                .par_iter_mut()
                .for_each(|table| table.absorb(&col, &row, n, l));
        } else {
            for table in &mut groups.tables {
                table.absorb(&col, &row, n, l);
            }
        }
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::primes::build_prime_schedule;

    fn single_entry() -> (DenseMatrix, DenseMatrix) {
        // C = A B has the single nonzero C[1][2] = 6.
        let mut a = DenseMatrix::zeros(4, 4);
        let mut b = DenseMatrix::zeros(4, 4);
        a.set(1, 3, 2.0);
        b.set(3, 2, 3.0);
        (a, b)
    }

    #[test]
    fn single_entry_lands_in_one_residue() {
        let (a, b) = single_entry();
        let sched = build_prime_schedule(4, 3).unwrap();
        for mode in [ConvolutionMode::Naive, ConvolutionMode::Fft] {
            let g = compute_groups(&a, &b, &sched, mode, false).unwrap();
            for (idx, &p) in sched.primes().iter().enumerate() {
                for m in 0..p {
                    let want = if m == 6 % p { 6.0 } else { 0.0 };
                    assert!((g.total(idx, m) - want).abs() < 1e-9);
                }
                // 6 = 0b0110: bits 1 and 2 set
                for k in 0..4 {
                    let want = if 6 >> k & 1 == 1 { 6.0 } else { 0.0 };
                    assert!((g.bit_weight(idx, 6 % p, k) - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_matrices_give_zero_counters() {
        let z = DenseMatrix::zeros(4, 4);
        let sched = build_prime_schedule(4, 2).unwrap();
        let g = compute_groups(&z, &z, &sched, ConvolutionMode::Auto, true).unwrap();
        for idx in 0..sched.len() {
            assert!(g.totals(idx).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn subtraction_clears_the_entry() {
        let (a, b) = single_entry();
        let sched = build_prime_schedule(4, 3).unwrap();
        let mut g = compute_groups(&a, &b, &sched, ConvolutionMode::Naive, false).unwrap();
        g.subtract_entry(Position::new(1, 2), 6.0);
        for idx in 0..sched.len() {
            assert!(g.totals(idx).iter().all(|&x| x == 0.0));
            assert!(g.tables[idx].bits.iter().all(|&x| x == 0.0));
        }
        let redone = g.recompute_naive(0, &a, &b);
        assert!(redone.totals.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn schedule_must_match_padding() {
        let (a, b) = single_entry();
        let sched = build_prime_schedule(8, 3).unwrap();
        assert!(compute_groups(&a, &b, &sched, ConvolutionMode::Naive, false).is_err());
    }

    #[test]
    fn csv_dump_has_header_and_all_counters() {
        let (a, b) = single_entry();
        let sched = build_prime_schedule(4, 2).unwrap();
        let g = compute_groups(&a, &b, &sched, ConvolutionMode::Naive, false).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("prime,residue,bit,counter\n"));
        let rows = text.lines().count() - 1;
        assert_eq!(rows, sched.group_count() * (1 + 4));
    }
}
