//! Residue histograms of an outer product.
//!
//! Entry `(i, j)` of the outer product `a * b` is numbered `i * n + j`. For a
//! prime `p`, the weight falling in each residue class mod `p` is the
//! coefficient vector of `P_a(x) * P_b(x) mod (x^p - 1)` where
//! `P_a = sum a_i x^(i*n mod p)` and `P_b = sum b_j x^(j mod p)`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// How polynomial products are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMode {
    /// Schoolbook product; exact summation order, `O(p^2)`.
    Naive,
    /// Complex FFT with power-of-two padding, `O(p log p)`.
    Fft,
    /// Naive below [`NAIVE_PRIME_LIMIT`], FFT from there on.
    #[default]
    Auto,
}

/// Primes below this use the naive product under [`ConvolutionMode::Auto`].
pub const NAIVE_PRIME_LIMIT: usize = 64;

impl ConvolutionMode {
    /// Whether prime `p` is convolved with FFT under this mode.
    pub fn uses_fft(self, p: usize) -> bool {
        match self {
            ConvolutionMode::Naive => false,
            ConvolutionMode::Fft => true,
            ConvolutionMode::Auto => p >= NAIVE_PRIME_LIMIT,
        }
    }
}

/// Adds coefficient `k` into slot `k mod p`.
pub fn fold_mod(coeffs: &[f64], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for (k, &c) in coeffs.iter().enumerate() {
        out[k % p] += c;
    }
    out
}

/// Which entries of the outer product a histogram counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitMask {
    All,
    /// Only entries whose number `i * n + j` has bit `k` set. With `n = 2^l`,
    /// bits below `l` come from `j` (masking `b`), the rest from `i` (masking `a`).
    Bit(usize),
}

/// `P_a` coefficients; `keep` filters indices.
pub(crate) fn row_poly(a: &[f64], n: usize, p: usize, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for (i, &x) in a.iter().enumerate() {
        if x != 0.0 && keep(i) {
            out[(i * n) % p] += x;
        }
    }
    out
}

/// `P_b` coefficients; `keep` filters indices.
pub(crate) fn col_poly(b: &[f64], p: usize, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for (j, &x) in b.iter().enumerate() {
        if x != 0.0 && keep(j) {
            out[j % p] += x;
        }
    }
    out
}

/// Cyclic product of two length-`p` coefficient vectors modulo `x^p - 1`.
pub(crate) fn cyclic_naive(pa: &[f64], pb: &[f64]) -> Vec<f64> {
    let p = pa.len();
    let mut out = vec![0.0; p];
    for (s, &x) in pa.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (t, &y) in pb.iter().enumerate() {
            let k = s + t;
            out[if k >= p { k - p } else { k }] += x * y;
        }
    }
    out
}

/// FFT convolution for one fixed prime; keeps the plans.
pub(crate) struct FftConvolver {
    p: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftConvolver {
    pub(crate) fn new(p: usize, planner: &mut FftPlanner<f64>) -> Self {
        // the linear product has degree 2p - 2
        let size = (2 * p - 1).next_power_of_two();
        FftConvolver {
            p,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub(crate) fn transform(&self, poly: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = poly.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(self.size, Complex::new(0.0, 0.0));
        self.forward.process(&mut buf);
        buf
    }

    /// Cyclic product from two forward transforms.
    pub(crate) fn multiply(&self, fa: &[Complex<f64>], fb: &[Complex<f64>]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = fa.iter().zip(fb).map(|(x, y)| x * y).collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let mut out = vec![0.0; self.p];
        for (k, c) in buf.iter().take(2 * self.p - 1).enumerate() {
            out[k % self.p] += c.re * scale;
        }
        out
    }

    pub(crate) fn cyclic(&self, pa: &[f64], pb: &[f64]) -> Vec<f64> {
        self.multiply(&self.transform(pa), &self.transform(pb))
    }
}

/// Weight of the outer product `a * b` in each residue class mod `p`,
/// restricted by `mask`. `a` and `b` must share their length `n`; bit masks
/// additionally require `n` to be a power of two.
pub fn residue_histogram(
    a: &[f64],
    b: &[f64],
    p: usize,
    mask: BitMask,
    mode: ConvolutionMode,
) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "vectors must share their length");
    assert!(p >= 2, "modulus must be at least 2");
    let n = a.len();
    let (pa, pb) = match mask {
        BitMask::All => (row_poly(a, n, p, |_| true), col_poly(b, p, |_| true)),
        BitMask::Bit(k) => {
            assert!(n.is_power_of_two(), "bit masks need a power-of-two length");
            let l = n.trailing_zeros() as usize;
            assert!(k < 2 * l, "bit {k} out of range for n = {n}");
            if k < l {
                (row_poly(a, n, p, |_| true), col_poly(b, p, |j| j >> k & 1 == 1))
            } else {
                (row_poly(a, n, p, |i| i >> (k - l) & 1 == 1), col_poly(b, p, |_| true))
            }
        }
    };
    if mode.uses_fft(p) {
        FftConvolver::new(p, &mut FftPlanner::new()).cyclic(&pa, &pb)
    } else {
        cyclic_naive(&pa, &pb)
    }
}
