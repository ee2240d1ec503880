//! Exact edge-traversal counts for the basic patterns and for every
//! sub-block the route tree needs to skip over.
//!
//! The first period of `Berry(x, y)` depends on `n = x + y` only and is a
//! degree-6 polynomial `F(n)`. It is evaluated in Newton form from seven
//! brute-force values, so no floating point or division is involved.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::grid::ball_size;
use crate::Count;

pub fn seed_cost(x: u64) -> Count {
    let x = Count::from(x);
    &x * &x * 8u32 + x * 10u32
}

/// Length of one phase `N (SE)^i (WS)^i (NW)^i (EN)^i`.
pub(crate) fn seed_phase_len(i: u64) -> u64 {
    8 * i + 1
}

/// Length of the first period of `Seed(x)`.
pub(crate) fn seed_first_len(x: u64) -> Count {
    let x = Count::from(x);
    &x * &x * 4u32 + x * 5u32
}

pub fn repeat_seed_cost(x: u64, n: &Count) -> Count {
    seed_cost(x) * n
}

pub(crate) fn ring_size(k: u64) -> u64 {
    if k == 0 {
        1
    } else {
        4 * k
    }
}

/// `8 * (1^2 + ... + j^2)`: the path cost of visiting every node of the
/// closed ball of radius `j` and coming back, one node at a time.
pub(crate) fn star_paths(j: u64) -> Count {
    let j = Count::from(j);
    (&j * (&j + 1u32) * (&j * 2u32 + 1u32)) / 6u32 * 8u32
}

pub(crate) fn berry_unit_cost(to_norm: u64, seed: u64) -> Count {
    Count::from(to_norm) * 2u32 + seed_cost(seed)
}

pub(crate) fn berry_ring_cost(i: u64, j: u64, k: u64) -> Count {
    (Count::from(k) * 2u32 + seed_cost(i - j)) * ring_size(k)
}

pub(crate) fn berry_sub_cost(i: u64, j: u64) -> Count {
    star_paths(j) + ball_size(j) * seed_cost(i - j)
}

pub(crate) fn berry_block_cost(i: u64) -> Count {
    assert!(i >= 1);
    berry_first_cost(i) - berry_first_cost(i - 1)
}

/// Direct triple sum; only used to seed the Newton table.
fn berry_first_direct(n: u64) -> u128 {
    let s = |m: u64| (8 * m * m + 10 * m) as u128;
    let mut total = 0u128;
    for i in 1..=n {
        for j in 0..=i {
            for k in 0..=j {
                total += ring_size(k) as u128 * (2 * k as u128 + s(i - j));
            }
        }
    }
    total
}

fn newton_table() -> &'static [BigInt; 7] {
    static TABLE: OnceLock<[BigInt; 7]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut row: Vec<BigInt> = (0..7).map(|n| BigInt::from(berry_first_direct(n))).collect();
        let mut diffs: [BigInt; 7] = Default::default();
        for slot in diffs.iter_mut() {
            *slot = row[0].clone();
            row = row.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        diffs
    })
}

/// `F(n)`: cost of the first period of any `Berry(x, y)` with `x + y = n`.
pub fn berry_first_cost(n: u64) -> Count {
    let mut acc = BigInt::zero();
    let mut binom = BigInt::from(1);
    for (k, delta) in newton_table().iter().enumerate() {
        if k > 0 {
            let k = k as u64;
            if n < k {
                break;
            }
            binom = binom * BigInt::from(n - k + 1) / BigInt::from(k);
        }
        acc += delta * &binom;
    }
    debug_assert!(!acc.is_negative());
    acc.to_biguint().expect("polynomial value is non-negative")
}

pub fn berry_cost(x: u64, y: u64) -> Count {
    berry_first_cost(x + y) * 2u32
}

pub(crate) fn cloud_unit_cost(to_norm: u64, x: u64, y: u64) -> Count {
    Count::from(to_norm) * 2u32 + seed_cost(x) + berry_cost(x, y)
}

pub(crate) fn cloud_first_cost(x: u64, y: u64, z: u64) -> Count {
    star_paths(z) + ball_size(z) * (seed_cost(x) + berry_cost(x, y))
}

/// Independent of the starting index `h`, which only permutes the units.
pub fn cloudberry_cost(x: u64, y: u64, z: u64) -> Count {
    cloud_first_cost(x, y, z) * 2u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_form_matches_direct_sum() {
        for n in 0..40 {
            assert_eq!(berry_first_cost(n), Count::from(berry_first_direct(n)), "n = {n}");
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(seed_cost(1), Count::from(18u32));
        assert_eq!(seed_cost(4), Count::from(168u32));
        assert_eq!(berry_first_cost(1), Count::from(26u32));
        assert_eq!(berry_cost(1, 1), Count::from(432u32));
        assert_eq!(cloudberry_cost(1, 1, 1), Count::from(4516u32));
        assert_eq!(berry_cost(0, 0), Count::zero());
    }

    #[test]
    fn blocks_decompose_the_first_period() {
        for i in 1..12u64 {
            let subs: Count = (0..=i).map(|j| berry_sub_cost(i, j)).sum();
            assert_eq!(subs, berry_block_cost(i));
            for j in 0..=i {
                let rings: Count = (0..=j).map(|k| berry_ring_cost(i, j, k)).sum();
                assert_eq!(rings, berry_sub_cost(i, j));
            }
        }
        for z in 0..6u64 {
            let units: Count = crate::grid::ring_clockwise(crate::grid::Node::ORIGIN, 0)
                .into_iter()
                .chain((1..=z).flat_map(|k| crate::grid::ring_clockwise(crate::grid::Node::ORIGIN, k)))
                .map(|v| cloud_unit_cost(v.norm(), 2, 1))
                .sum();
            assert_eq!(units, cloud_first_cost(2, 1, z));
        }
    }
}
