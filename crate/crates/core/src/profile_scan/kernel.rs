// SPDX-License-Identifier: MIT OR Apache-2.0

//! The per-row profile integral, evaluated for a block of splits at once.
//!
//! For observation `i` with distances sorted as `d_0 <= ... <= d_{n-1}`, let
//! `c1_g` count segment-one members among the first `g + 1` sorted entries and
//! `N_g = g + 1`. With `k` members in segment one,
//!
//! ```text
//! F1 - F2 = c1/k - (N - c1)/(n - k) = (n c1 - k N) / (k (n - k))
//! ```
//!
//! on `[d_g, d_{g+1})`, so the integral of `(F1 - F2)^2` is
//! `Q / (k (n - k))^2` with `Q = sum_g w_g e_g^2`, `w_g = d_{g+1} - d_g` and the
//! integer `e_g = n c1_g - k N_g`. Both CDFs equal one past `d_{n-1}`, so the
//! sum stops there and the diameter of the space never enters.
//!
//! `e_g` is an integer of magnitude at most `n^2` and is carried exactly in an
//! `f64`, so swapping the two segments (`k -> n - k`) flips its sign and leaves
//! `Q` bitwise unchanged.

/// Splits evaluated per pass over a row.
pub(crate) const LANES: usize = 8;

/// `Q` for one row and up to `LANES` splits.
///
/// `widths[g]` is the gap after sorted entry `g` (zero for the last entry),
/// `positions[g]` is the sequence position of the observation at sorted entry
/// `g`; an observation is in segment one at split `k` iff its position is
/// below `k`.
#[inline]
pub(crate) fn row_block(widths: &[f64], positions: &[f64], splits: &[f64; LANES], n: f64) -> [f64; LANES] {
    debug_assert_eq!(widths.len(), positions.len());
    let mut inside = [0.0; LANES];
    let mut outside = [0.0; LANES];
    for l in 0..LANES {
        inside[l] = n - splits[l];
        outside[l] = -splits[l];
    }
    let mut e = [0.0f64; LANES];
    let mut acc = [0.0f64; LANES];
    for (&w, &p) in widths.iter().zip(positions) {
        for l in 0..LANES {
            e[l] += if p < splits[l] { inside[l] } else { outside[l] };
            acc[l] += w * (e[l] * e[l]);
        }
    }
    acc
}

/// `Q` for one row and a single split, with membership given as flags in
/// sorted order.
pub(crate) fn row_single(widths: &[f64], in_first: impl Iterator<Item = bool>, k: usize, n: usize) -> f64 {
    let (inside, outside) = ((n - k) as f64, -(k as f64));
    let mut e = 0.0f64;
    let mut acc = 0.0f64;
    for (&w, flag) in widths.iter().zip(in_first) {
        e += if flag { inside } else { outside };
        acc += w * (e * e);
    }
    acc
}

/// Fixed-order sum of per-row values that pairs row `i` with row `n-1-i`, so
/// reversing the observation order does not change the result.
pub(crate) fn palindromic_sum(values: &[f64]) -> f64 {
    let n = values.len();
    let mut total = 0.0;
    for i in 0..n / 2 {
        total += values[i] + values[n - 1 - i];
    }
    if n % 2 == 1 {
        total += values[n / 2];
    }
    total
}
