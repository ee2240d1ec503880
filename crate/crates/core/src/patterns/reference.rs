//! Materialized, loop-for-loop transcriptions of the pattern definitions.
//!
//! These are deliberately naive and independent of the route trees; they
//! serve as oracles for small parameters.

use std::collections::HashSet;

use crate::grid::{backtrack, canonical_path, ring_clockwise, Direction, MoveSequence, Node};
use crate::patterns::PatternDescriptor;
use Direction::*;

fn stair(out: &mut MoveSequence, a: Direction, b: Direction, reps: u64) {
    for _ in 0..reps {
        out.push(a);
        out.push(b);
    }
}

pub fn seed_first(x: u64) -> MoveSequence {
    let mut out = Vec::new();
    for i in 1..=x {
        out.push(N);
        stair(&mut out, S, E, i);
        stair(&mut out, W, S, i);
        stair(&mut out, N, W, i);
        stair(&mut out, E, N, i);
    }
    out
}

fn with_backtrack(first: MoveSequence) -> MoveSequence {
    let mut all = first.clone();
    all.extend(backtrack(&first));
    all
}

pub fn seed(x: u64) -> MoveSequence {
    with_backtrack(seed_first(x))
}

pub fn repeat_seed(x: u64, n: u64) -> MoveSequence {
    let one = seed(x);
    (0..n).flat_map(|_| one.iter().copied()).collect()
}

pub fn berry_first(x: u64, y: u64) -> MoveSequence {
    let u = Node::ORIGIN;
    let mut out = Vec::new();
    for i in 1..=x + y {
        for j in 0..=i {
            for k in 0..=j {
                for v in ring_clockwise(u, k) {
                    out.extend(canonical_path(u, v));
                    out.extend(seed(i - j));
                    out.extend(canonical_path(v, u));
                }
            }
        }
    }
    out
}

pub fn berry(x: u64, y: u64) -> MoveSequence {
    with_backtrack(berry_first(x, y))
}

/// Ball offsets in first-visit order along `seed(z)`.
pub fn first_visit_order(z: u64) -> Vec<Node> {
    let mut at = Node::ORIGIN;
    let mut seen = HashSet::from([at]);
    let mut order = vec![at];
    for d in seed(z) {
        at = at.step(d);
        if seen.insert(at) {
            order.push(at);
        }
    }
    order
}

pub fn cloudberry_first(x: u64, y: u64, z: u64, h: u64) -> MoveSequence {
    let u = Node::ORIGIN;
    let order = first_visit_order(z);
    let size = order.len() as u64;
    let mut out = Vec::new();
    for i in 0..size {
        let v = order[((h + i) % size) as usize];
        out.extend(canonical_path(u, v));
        out.extend(seed(x));
        out.extend(berry(x, y));
        out.extend(canonical_path(v, u));
    }
    out
}

pub fn cloudberry(x: u64, y: u64, z: u64, h: u64) -> MoveSequence {
    with_backtrack(cloudberry_first(x, y, z, h))
}

/// Full move list of a descriptor. Panics for repetition counts beyond `u64`.
pub fn moves(p: &PatternDescriptor) -> MoveSequence {
    match *p {
        PatternDescriptor::Seed(x) => seed(x),
        PatternDescriptor::RepeatSeed(x, ref n) => {
            repeat_seed(x, u64::try_from(n).expect("small repetition count"))
        }
        PatternDescriptor::Berry(x, y) => berry(x, y),
        PatternDescriptor::Cloudberry(x, y, z, h) => cloudberry(x, y, z, h),
    }
}

/// First period of a two-period pattern; `None` for `RepeatSeed`.
pub fn first_period(p: &PatternDescriptor) -> Option<MoveSequence> {
    match *p {
        PatternDescriptor::Seed(x) => Some(seed_first(x)),
        PatternDescriptor::RepeatSeed(..) => None,
        PatternDescriptor::Berry(x, y) => Some(berry_first(x, y)),
        PatternDescriptor::Cloudberry(x, y, z, h) => Some(cloudberry_first(x, y, z, h)),
    }
}
