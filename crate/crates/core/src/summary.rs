//! Capacity-bounded summary of `(entry, counter)` pairs.
//!
//! Counters are lower bounds on the accumulated weight of their entry. Slots
//! are kept sorted by position so an incoming outer product can be merged
//! with a single scan; after the pass, [`EntrySummary::freeze`] builds a hash
//! index for point queries.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{Position, SparseMatrix};

#[derive(Debug, Clone)]
pub struct EntrySummary {
    capacity: usize,
    rows: usize,
    cols: usize,
    slots: Vec<(Position, f64)>,
    index: Option<HashMap<Position, f64>>,
}

impl EntrySummary {
    /// Empty summary with room for `capacity` entries of a `rows x cols` product.
    pub fn new(capacity: usize, rows: usize, cols: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("b", "summary capacity must be positive"));
        }
        Ok(EntrySummary {
            capacity,
            rows,
            cols,
            slots: Vec::with_capacity(capacity),
            index: None,
        })
    }

    /// Summary holding `slots`, which must satisfy every summary invariant.
    pub fn from_slots(
        capacity: usize,
        rows: usize,
        cols: usize,
        slots: Vec<(Position, f64)>,
    ) -> Result<Self> {
        let mut s = Self::new(capacity, rows, cols)?;
        if slots.len() > capacity {
            return Err(Error::invalid("slots", "more slots than capacity"));
        }
        for (k, &(p, w)) in slots.iter().enumerate() {
            if p.row >= rows || p.col >= cols {
                return Err(Error::IndexOutOfRange {
                    row: p.row,
                    col: p.col,
                    rows,
                    cols,
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid("slots", format!("counter {w} at {p} is not positive")));
            }
            if k > 0 && slots[k - 1].0 >= p {
                return Err(Error::invalid("slots", "keys not strictly increasing in position order"));
            }
        }
        s.slots = slots;
        Ok(s)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Occupied slots in position order.
    pub fn slots(&self) -> &[(Position, f64)] {
        &self.slots
    }

    /// Builds the point-query index. Any later mutation drops it.
    pub fn freeze(&mut self) {
        self.index = Some(self.slots.iter().copied().collect());
    }

    pub fn is_frozen(&self) -> bool {
        self.index.is_some()
    }

    /// Stored counter for `(i, j)`, or 0 when the entry holds no slot.
    pub fn estimate_entry(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        let p = Position::new(i, j);
        Ok(match &self.index {
            Some(index) => index.get(&p).copied().unwrap_or(0.0),
            None => self
                .slots
                .binary_search_by(|(q, _)| q.cmp(&p))
                .map_or(0.0, |k| self.slots[k].1),
        })
    }

    /// Subtracts `delta` from every counter and evicts counters that reach 0.
    pub fn decrement_all(&mut self, delta: f64) -> Result<()> {
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::invalid("delta", "decrement must be nonnegative"));
        }
        if delta == 0.0 {
            return Ok(());
        }
        self.index = None;
        self.slots.retain_mut(|(_, w)| {
            *w -= delta;
            *w > 0.0
        });
        Ok(())
    }

    /// The summary as a sparse matrix; every entry without a slot is 0.
    pub fn to_sparse_matrix(&self) -> SparseMatrix {
        SparseMatrix::new(self.rows, self.cols, self.slots.clone())
            .expect("summary slots are in range and distinct")
    }

    /// Writes `i,j,estimate` rows in position order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "estimate"])?;
        for (p, v) in &self.slots {
            out.write_record([p.row.to_string(), p.col.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub(crate) fn take_slots(&mut self) -> Vec<(Position, f64)> {
        self.index = None;
        std::mem::take(&mut self.slots)
    }

    pub(crate) fn put_slots(&mut self, slots: Vec<(Position, f64)>) {
        debug_assert!(slots.len() <= self.capacity);
        debug_assert!(slots.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(slots.iter().all(|(_, w)| *w > 0.0));
        self.slots = slots;
    }
}
