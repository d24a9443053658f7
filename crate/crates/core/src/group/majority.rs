//! Majority detection in turnstile streams from per-bit weight counters.

use std::collections::HashMap;

use super::primes::ceil_log;

/// Outcome of deciding one bit of a majority candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bit {
    Zero,
    One,
    /// The two subgroups cannot be told apart within the dead zone.
    Undecided,
}

fn sign(x: f64, dead_zone: f64) -> i8 {
    if x > dead_zone {
        1
    } else if x < -dead_zone {
        -1
    } else {
        0
    }
}

/// Picks the subgroup that must hold the majority item given the group
/// total and the weight of its bit-is-1 subgroup.
///
/// Opposite signs: the side whose sign matches the total. Otherwise: the side
/// with larger absolute weight.
pub(crate) fn decide_bit(total: f64, ones: f64, dead_zone: f64) -> Bit {
    let zeros = total - ones;
    let (s1, s0) = (sign(ones, dead_zone), sign(zeros, dead_zone));
    if s1 * s0 < 0 {
        return if s1 == sign(total, dead_zone) { Bit::One } else { Bit::Zero };
    }
    let gap = ones.abs() - zeros.abs();
    if gap > dead_zone {
        Bit::One
    } else if gap < -dead_zone {
        Bit::Zero
    } else {
        Bit::Undecided
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Decoded {
    /// The group total vanishes, so no item can be a majority.
    Empty,
    Undecided,
    Item(u64),
}

/// Reconstructs a candidate item from the group total and per-bit weights.
pub(crate) fn decode_candidate(total: f64, bit_weights: &[f64], dead_zone: f64) -> Decoded {
    if sign(total, dead_zone) == 0 {
        return Decoded::Empty;
    }
    let mut item = 0u64;
    for (k, &ones) in bit_weights.iter().enumerate() {
        match decide_bit(total, ones, dead_zone) {
            Bit::One => item |= 1 << k,
            Bit::Zero => {}
            Bit::Undecided => return Decoded::Undecided,
        }
    }
    Decoded::Item(item)
}

/// Finds the item whose absolute total weight exceeds the summed absolute
/// totals of all other items, if there is one.
///
/// The first pass keeps `ceil(log2 m)` bit counters plus the stream total and
/// yields one candidate. The second pass aggregates the frequency vector to
/// confirm the candidate and report its exact weight.
pub fn majority_stream(updates: &[(usize, f64)], m: usize) -> Option<(usize, f64)> {
    assert!(m >= 1, "domain must be nonempty");
    let bits = if m <= 1 { 0 } else { ceil_log(2, m) as usize };
    let mut counters = vec![0.0f64; bits];
    let mut total = 0.0f64;
    for &(item, w) in updates {
        assert!(item < m, "item {item} outside domain [0, {m})");
        total += w;
        for (k, c) in counters.iter_mut().enumerate() {
            if item >> k & 1 == 1 {
                *c += w;
            }
        }
    }
    let Decoded::Item(candidate) = decode_candidate(total, &counters, 0.0) else {
        return None;
    };
    let candidate = candidate as usize;
    if candidate >= m {
        return None;
    }

    let mut freq: HashMap<usize, f64> = HashMap::new();
    for &(item, w) in updates {
        *freq.entry(item).or_insert(0.0) += w;
    }
    let weight = freq.get(&candidate).copied().unwrap_or(0.0);
    let others: f64 = freq
        .iter()
        .filter(|(&i, _)| i != candidate)
        .map(|(_, f)| f.abs())
        .sum();
    (weight.abs() > others).then_some((candidate, weight))
}
