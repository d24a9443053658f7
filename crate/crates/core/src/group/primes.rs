use crate::error::{Error, Result};

/// Consecutive primes `b < p_1 < ... < p_x` with `x = (b - 1) * ceil(log_b N) + 1`
/// and `N = n^2`.
///
/// Two distinct items below `N` collide modulo at most `ceil(log_b N)` of these
/// primes, so any set of `b` items has every member alone in some residue class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSchedule {
    budget: usize,
    n: usize,
    primes: Vec<usize>,
}

impl PrimeSchedule {
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Matrix dimension the schedule was built for.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Item universe size `N = n^2`.
    pub fn universe(&self) -> usize {
        self.n * self.n
    }

    pub fn primes(&self) -> &[usize] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Sum of all primes: the number of groups.
    pub fn group_count(&self) -> usize {
        self.primes.iter().sum()
    }
}

/// Smallest `t` with `base^t >= value`.
pub fn ceil_log(base: usize, value: usize) -> u32 {
    debug_assert!(base >= 2);
    let mut t = 0;
    let mut acc = 1u128;
    while acc < value as u128 {
        acc *= base as u128;
        t += 1;
    }
    t
}

/// Deterministic trial division; the schedule's primes are small.
pub fn is_prime(x: usize) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut d = 3;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn build_prime_schedule(n: usize, b: usize) -> Result<PrimeSchedule> {
    if b < 2 {
        return Err(Error::invalid("b", "sparsity budget must be at least 2"));
    }
    if n < 2 {
        return Err(Error::invalid("n", "dimension must be at least 2"));
    }
    let count = (b - 1) * ceil_log(b, n * n) as usize + 1;
    let mut primes = Vec::with_capacity(count);
    let mut cand = b + 1;
    while primes.len() < count {
        if is_prime(cand) {
            primes.push(cand);
        }
        cand += 1;
    }
    Ok(PrimeSchedule {
        budget: b,
        n,
        primes,
    })
}
