//! Seeded synthetic instances. Every generator draws from `ChaCha8Rng`
//! seeded with `seed_from_u64`, so an instance is fixed by its arguments.

use rand::seq::index::sample;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Position};

/// Weights `mass / (zeta * i^z)` for ranks `i = 1..=nnz`, where `zeta` is the
/// `nnz`-term partial sum so that the weights add up to `mass`.
pub fn zipf_weights(nnz: usize, z: f64, mass: f64) -> Vec<f64> {
    let zeta: f64 = (1..=nnz).map(|i| (i as f64).powf(-z)).sum();
    (1..=nnz).map(|i| mass / (zeta * (i as f64).powf(z))).collect()
}

/// `(A, B)` with `A = C`, `B = I`, where `C` has `nnz` entries of total
/// weight 1 following Zipf(`z`), placed at uniformly random positions.
pub fn gen_zipf_product(n: usize, z: f64, nnz: usize, seed: u64) -> Result<(DenseMatrix, DenseMatrix)> {
    if !z.is_finite() || z <= 1.0 {
        return Err(Error::invalid("z", "skew must exceed 1"));
    }
    if nnz > n * n {
        return Err(Error::invalid("nnz", format!("{nnz} entries do not fit in {n}x{n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DenseMatrix::zeros(n, n);
    for (cell, w) in sample(&mut rng, n * n, nnz).into_iter().zip(zipf_weights(nnz, z, 1.0)) {
        c.set(cell / n, cell % n, w);
    }
    Ok((c, DenseMatrix::identity(n)))
}

/// Uniform nonnegative `n x n` factors; each cell is nonzero with
/// probability `density`, with value drawn from `(0, 1]`.
pub fn gen_uniform_nonneg(n: usize, density: f64, seed: u64) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid("density", "must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        DenseMatrix::from_fn(n, n, |_, _| {
            if rng.random_bool(density) {
                1.0 - rng.random::<f64>()
            } else {
                0.0
            }
        })
    };
    let a = draw().require_nonnegative()?;
    let b = draw().require_nonnegative()?;
    Ok((a, b))
}

/// Number type of planted weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Integers in `[-10, 10] \ {0}`.
    Integer,
    /// Multiples of `2^-20` in `[-10, 10] \ {0}`; sums of a few hundred of
    /// them are exact in `f64`, so products reproduce them bit for bit.
    Dyadic,
}

const DYADIC_SCALE: f64 = (1u64 << 20) as f64;

fn planted_weight(rng: &mut ChaCha8Rng, kind: WeightKind) -> f64 {
    let magnitude = match kind {
        WeightKind::Integer => rng.random_range(1..=10) as f64,
        WeightKind::Dyadic => rng.random_range(1..=10 * (1u64 << 20)) as f64 / DYADIC_SCALE,
    };
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// A product with known entries, factored so that `a * b == c`.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
    /// Planted entries in position order.
    pub planted: Vec<(Position, f64)>,
}

/// Factors `c` as `A B` with `B` unit upper bidiagonal with superdiagonal in
/// `{-1, 0, 1}`. `A = C B^-1` has entries that are signed sums of entries of
/// `C`, so the product mixes positive and negative terms.
fn mix(c: DenseMatrix, rng: &mut ChaCha8Rng) -> (DenseMatrix, DenseMatrix) {
    let n = c.cols();
    let mut b = DenseMatrix::identity(n);
    let mut s = vec![0.0; n];
    for (t, st) in s.iter_mut().enumerate().skip(1) {
        *st = rng.random_range(-1i32..=1) as f64;
        b.set(t - 1, t, *st);
    }
    // solve X B = C row by row: X[i][t] = C[i][t] - X[i][t-1] * s[t]
    let mut a = DenseMatrix::zeros(c.rows(), n);
    for i in 0..c.rows() {
        let mut prev = 0.0;
        for (t, &st) in s.iter().enumerate() {
            let x = c.get(i, t) - prev * st;
            a.set(i, t, x);
            prev = x;
        }
    }
    (a, b)
}

fn instance(c: DenseMatrix, planted: Vec<(Position, f64)>, rng: &mut ChaCha8Rng) -> PlantedInstance {
    let (a, b) = mix(c.clone(), rng);
    let mut planted = planted;
    planted.sort_by_key(|&(p, _)| p);
    PlantedInstance { a, b, c, planted }
}

/// `n x n` product with exactly `support` nonzero entries.
pub fn gen_sparse_product(n: usize, support: usize, kind: WeightKind, seed: u64) -> Result<PlantedInstance> {
    if support > n * n {
        return Err(Error::invalid("support", format!("{support} entries do not fit in {n}x{n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DenseMatrix::zeros(n, n);
    let mut planted = Vec::with_capacity(support);
    for cell in sample(&mut rng, n * n, support) {
        let w = planted_weight(&mut rng, kind);
        let pos = Position::new(cell / n, cell % n);
        c.set(pos.row, pos.col, w);
        planted.push((pos, w));
    }
    Ok(instance(c, planted, &mut rng))
}

/// `heavy` entries of weight `+-100` plus `noise` further entries whose
/// absolute values sum to less than 99. Only the heavy entries are listed
/// in `planted`.
pub fn gen_heavy_product(n: usize, heavy: usize, noise: usize, seed: u64) -> Result<PlantedInstance> {
    if heavy + noise > n * n {
        return Err(Error::invalid("noise", "too many entries for the matrix"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = sample(&mut rng, n * n, heavy + noise).into_vec();
    let mut c = DenseMatrix::zeros(n, n);
    let mut planted = Vec::with_capacity(heavy);
    for &cell in &cells[..heavy] {
        let w = if rng.random_bool(0.5) { 100.0 } else { -100.0 };
        let pos = Position::new(cell / n, cell % n);
        c.set(pos.row, pos.col, w);
        planted.push((pos, w));
    }
    // each noise magnitude is a multiple of 2^-20 below 99 / noise
    let cap = ((99.0 / noise.max(1) as f64) * DYADIC_SCALE).floor() as u64;
    for &cell in &cells[heavy..] {
        let w = rng.random_range(1..=cap.max(1)) as f64 / DYADIC_SCALE;
        let w = if rng.random_bool(0.5) { w } else { -w };
        c.set(cell / n, cell % n, w);
    }
    Ok(instance(c, planted, &mut rng))
}
