//! Lattice geometry of the basic grid: nodes, cardinal directions, canonical
//! shortest paths, clockwise rings and exact agent positions.
//!
//! North is `+y` and east is `+x`. Positions inside an edge carry an exact
//! rational fraction, so co-location is a plain equality test.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::Count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub fn inverse(self) -> Direction {
        match self {
            Direction::N => Direction::S,
            Direction::E => Direction::W,
            Direction::S => Direction::N,
            Direction::W => Direction::E,
        }
    }

    /// Unit displacement `(dx, dy)`.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::N => (0, 1),
            Direction::E => (1, 0),
            Direction::S => (0, -1),
            Direction::W => (-1, 0),
        }
    }

    /// True for the two directions used as canonical edge orientation.
    pub fn is_canonical(self) -> bool {
        matches!(self, Direction::N | Direction::E)
    }

    pub fn from_delta(dx: i64, dy: i64) -> Option<Direction> {
        match (dx, dy) {
            (0, 1) => Some(Direction::N),
            (1, 0) => Some(Direction::E),
            (0, -1) => Some(Direction::S),
            (-1, 0) => Some(Direction::W),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Direction::N => 'N',
            Direction::E => 'E',
            Direction::S => 'S',
            Direction::W => 'W',
        };
        write!(f, "{c}")
    }
}

/// A lattice node. Arithmetic is checked: overflow panics instead of wrapping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub x: i64,
    pub y: i64,
}

impl Node {
    pub const ORIGIN: Node = Node { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Node {
        Node { x, y }
    }

    pub fn step(self, dir: Direction) -> Node {
        let (dx, dy) = dir.delta();
        self.offset(dx, dy)
    }

    pub fn offset(self, dx: i64, dy: i64) -> Node {
        Node {
            x: self.x.checked_add(dx).expect("grid coordinate overflow"),
            y: self.y.checked_add(dy).expect("grid coordinate overflow"),
        }
    }

    /// Manhattan norm of the node seen as a vector.
    pub fn norm(self) -> u64 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    pub fn distance(self, other: Node) -> u64 {
        (self - other).norm()
    }
}

impl Add for Node {
    type Output = Node;
    fn add(self, rhs: Node) -> Node {
        self.offset(rhs.x, rhs.y)
    }
}

impl Sub for Node {
    type Output = Node;
    fn sub(self, rhs: Node) -> Node {
        Node {
            x: self.x.checked_sub(rhs.x).expect("grid coordinate overflow"),
            y: self.y.checked_sub(rhs.y).expect("grid coordinate overflow"),
        }
    }
}

impl Neg for Node {
    type Output = Node;
    fn neg(self) -> Node {
        Node::ORIGIN - self
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Exact location of an agent: on a node or strictly inside an edge.
///
/// Always stored normalized: an in-edge position is expressed from the edge
/// endpoint whose outgoing direction is `N` or `E`, with the fraction in the
/// open interval `(0, 1)`. Derived equality is therefore exact co-location.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Position {
    AtNode(Node),
    OnEdge {
        origin: Node,
        dir: Direction,
        fraction: BigRational,
    },
}

impl Position {
    /// Builds the normalized position at `fraction` of the way from `origin`
    /// along `dir`. Fractions of exactly 0 or 1 collapse onto the endpoints.
    ///
    /// Panics when `fraction` is outside `[0, 1]`.
    pub fn on_edge(origin: Node, dir: Direction, fraction: BigRational) -> Position {
        assert!(
            !fraction.is_negative() && fraction <= BigRational::one(),
            "edge fraction out of range"
        );
        if fraction.is_zero() {
            return Position::AtNode(origin);
        }
        if fraction.is_one() {
            return Position::AtNode(origin.step(dir));
        }
        if dir.is_canonical() {
            Position::OnEdge {
                origin,
                dir,
                fraction,
            }
        } else {
            Position::OnEdge {
                origin: origin.step(dir),
                dir: dir.inverse(),
                fraction: BigRational::one() - fraction,
            }
        }
    }

    pub fn node(&self) -> Option<Node> {
        match self {
            Position::AtNode(n) => Some(*n),
            Position::OnEdge { .. } => None,
        }
    }

    /// Both endpoints of the supporting edge (a node is its own edge).
    pub fn endpoints(&self) -> (Node, Node) {
        match self {
            Position::AtNode(n) => (*n, *n),
            Position::OnEdge { origin, dir, .. } => (*origin, origin.step(*dir)),
        }
    }

    /// Translates the position by a lattice vector.
    pub fn translate(&self, by: Node) -> Position {
        match self {
            Position::AtNode(n) => Position::AtNode(*n + by),
            Position::OnEdge {
                origin,
                dir,
                fraction,
            } => Position::OnEdge {
                origin: *origin + by,
                dir: *dir,
                fraction: fraction.clone(),
            },
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::AtNode(n) => write!(f, "{n}"),
            Position::OnEdge {
                origin,
                dir,
                fraction,
            } => write!(f, "{origin}+{dir}*{fraction}"),
        }
    }
}

/// Rational helper used by strategies and tests.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Finite ordered list of cardinal moves.
pub type MoveSequence = Vec<Direction>;

pub fn l1_distance(a: Node, b: Node) -> Count {
    Count::from(a.distance(b))
}

/// Canonical shortest path `P(u, v)`: when several shortest paths exist, the
/// horizontal run lies on the northern row of the bounding rectangle.
pub fn canonical_path(u: Node, v: Node) -> MoveSequence {
    let d = v - u;
    let mut moves = Vec::with_capacity(d.norm() as usize);
    canonical_runs(d.x, d.y, |dir, len| {
        moves.extend(std::iter::repeat_n(dir, len as usize));
    });
    moves
}

/// Emits the (at most two) straight runs of the canonical path for the
/// displacement `(dx, dy)`, in traversal order.
pub(crate) fn canonical_runs(dx: i64, dy: i64, mut emit: impl FnMut(Direction, u64)) {
    let horizontal = if dx >= 0 { Direction::E } else { Direction::W };
    if dy > 0 {
        emit(Direction::N, dy.unsigned_abs());
        if dx != 0 {
            emit(horizontal, dx.unsigned_abs());
        }
    } else {
        if dx != 0 {
            emit(horizontal, dx.unsigned_abs());
        }
        if dy < 0 {
            emit(Direction::S, dy.unsigned_abs());
        }
    }
}

/// Reverse path: reversed order with every direction inverted.
pub fn backtrack(moves: &[Direction]) -> MoveSequence {
    moves.iter().rev().map(|d| d.inverse()).collect()
}

/// Net displacement of a move sequence.
pub fn displacement(moves: &[Direction]) -> Node {
    moves
        .iter()
        .fold(Node::ORIGIN, |acc, d| acc.step(*d))
}

/// Nodes at distance exactly `k` from `u`, clockwise starting from the north.
pub fn ring_clockwise(u: Node, k: u64) -> Vec<Node> {
    if k == 0 {
        return vec![u];
    }
    (0..4 * k).map(|idx| u + ring_offset(k, idx)).collect()
}

/// The `idx`-th node (0-based) of the clockwise ring of radius `k >= 1`
/// around the origin.
pub(crate) fn ring_offset(k: u64, idx: u64) -> Node {
    debug_assert!(k >= 1 && idx < 4 * k);
    let k = k as i64;
    let t = (idx % k as u64) as i64;
    match idx / k as u64 {
        0 => Node::new(t, k - t),
        1 => Node::new(k - t, -t),
        2 => Node::new(-t, -(k - t)),
        _ => Node::new(-(k - t), t),
    }
}

/// Number of nodes at distance at most `r`: `2r(r+1) + 1`.
pub fn ball_size(r: u64) -> Count {
    Count::from(r) * Count::from(r + 1) * 2u32 + 1u32
}

pub(crate) fn ball_size_u64(r: u64) -> u64 {
    2 * r * (r + 1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use Direction::*;

    fn all_shortest_paths(u: Node, v: Node) -> Vec<MoveSequence> {
        if u == v {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for d in Direction::ALL {
            let next = u.step(d);
            if next.distance(v) < u.distance(v) {
                for mut rest in all_shortest_paths(next, v) {
                    rest.insert(0, d);
                    out.push(rest);
                }
            }
        }
        out
    }

    /// Oracle: among all shortest paths pick the one containing every edge of
    /// the northern side of the bounding rectangle.
    fn northern_oracle(u: Node, v: Node) -> MoveSequence {
        let top = u.y.max(v.y);
        let (lo, hi) = (u.x.min(v.x), u.x.max(v.x));
        let candidates = all_shortest_paths(u, v);
        if candidates.len() == 1 {
            return candidates.into_iter().next().unwrap();
        }
        let matching: Vec<_> = candidates
            .into_iter()
            .filter(|p| {
                let mut at = u;
                let mut top_edges = HashSet::new();
                for d in p {
                    let next = at.step(*d);
                    if at.y == top && next.y == top {
                        top_edges.insert(at.x.min(next.x));
                    }
                    at = next;
                }
                (lo..hi).all(|x| top_edges.contains(&x))
            })
            .collect();
        assert_eq!(matching.len(), 1);
        matching.into_iter().next().unwrap()
    }

    #[test]
    fn l1_distance_examples() {
        assert_eq!(l1_distance(Node::new(0, 0), Node::new(0, 0)), Count::from(0u32));
        assert_eq!(l1_distance(Node::new(0, 0), Node::new(2, -1)), Count::from(3u32));
        assert_eq!(l1_distance(Node::new(1, 1), Node::new(-1, 1)), Count::from(2u32));
    }

    #[test]
    fn canonical_path_examples() {
        assert_eq!(canonical_path(Node::new(0, 0), Node::new(2, 0)), vec![E, E]);
        assert_eq!(canonical_path(Node::new(0, 0), Node::new(1, 1)), vec![N, E]);
        assert_eq!(canonical_path(Node::new(0, 0), Node::new(1, -1)), vec![E, S]);
        assert!(canonical_path(Node::new(3, 3), Node::new(3, 3)).is_empty());
    }

    #[test]
    fn canonical_path_matches_enumeration_oracle() {
        let u = Node::new(0, 0);
        for x in -3..=3 {
            for y in -3..=3 {
                let v = Node::new(x, y);
                assert_eq!(canonical_path(u, v), northern_oracle(u, v), "target {v}");
            }
        }
    }

    #[test]
    fn backtrack_examples() {
        assert!(backtrack(&[]).is_empty());
        assert_eq!(backtrack(&[N]), vec![S]);
        assert_eq!(backtrack(&[N, E, S]), vec![N, W, S]);
    }

    #[test]
    fn ring_examples() {
        assert_eq!(ring_clockwise(Node::ORIGIN, 0), vec![Node::ORIGIN]);
        assert_eq!(
            ring_clockwise(Node::ORIGIN, 1),
            vec![Node::new(0, 1), Node::new(1, 0), Node::new(0, -1), Node::new(-1, 0)]
        );
        assert_eq!(
            ring_clockwise(Node::ORIGIN, 2),
            vec![
                Node::new(0, 2),
                Node::new(1, 1),
                Node::new(2, 0),
                Node::new(1, -1),
                Node::new(0, -2),
                Node::new(-1, -1),
                Node::new(-2, 0),
                Node::new(-1, 1)
            ]
        );
    }

    #[test]
    fn ball_size_examples() {
        assert_eq!(ball_size(0), Count::from(1u32));
        assert_eq!(ball_size(1), Count::from(5u32));
        assert_eq!(ball_size(3), Count::from(25u32));
    }

    #[test]
    fn rings_partition_the_ball() {
        let u = Node::new(4, -7);
        for r in 0..8u64 {
            let mut all = HashSet::new();
            for k in 0..=r {
                let ring = ring_clockwise(u, k);
                assert_eq!(ring.len() as u64, if k == 0 { 1 } else { 4 * k });
                for n in &ring {
                    assert_eq!(n.distance(u), k);
                    assert!(all.insert(*n));
                }
            }
            assert_eq!(Count::from(all.len()), ball_size(r));
        }
    }

    #[test]
    fn edge_positions_normalize() {
        let a = Position::on_edge(Node::new(0, 0), E, ratio(1, 3));
        let b = Position::on_edge(Node::new(1, 0), W, ratio(2, 3));
        assert_eq!(a, b);
        assert_eq!(
            Position::on_edge(Node::new(0, 0), N, ratio(1, 1)),
            Position::AtNode(Node::new(0, 1))
        );
        assert_eq!(
            Position::on_edge(Node::new(0, 0), S, ratio(0, 1)),
            Position::AtNode(Node::new(0, 0))
        );
    }

    fn dir() -> impl Strategy<Value = Direction> {
        prop_oneof![Just(N), Just(E), Just(S), Just(W)]
    }

    proptest! {
        #[test]
        fn inverse_is_involution(d in dir()) {
            prop_assert_eq!(d.inverse().inverse(), d);
            let n = Node::new(3, -2);
            prop_assert_eq!(n.step(d).step(d.inverse()), n);
        }

        #[test]
        fn backtrack_is_involution_and_returns(moves in proptest::collection::vec(dir(), 0..40)) {
            prop_assert_eq!(backtrack(&backtrack(&moves)), moves.clone());
            let mut all = moves.clone();
            all.extend(backtrack(&moves));
            prop_assert_eq!(displacement(&all), Node::ORIGIN);
        }

        #[test]
        fn canonical_path_properties(ux in -20i64..20, uy in -20i64..20, vx in -20i64..20, vy in -20i64..20) {
            let (u, v) = (Node::new(ux, uy), Node::new(vx, vy));
            let p = canonical_path(u, v);
            prop_assert_eq!(p.len() as u64, u.distance(v));
            prop_assert_eq!(u + displacement(&p), v);
            prop_assert_eq!(p, backtrack(&canonical_path(v, u)));
        }

        #[test]
        fn both_edge_encodings_agree(x in -50i64..50, y in -50i64..50, d in dir(), num in 1i64..99) {
            let f = ratio(num, 100);
            let a = Position::on_edge(Node::new(x, y), d, f.clone());
            let b = Position::on_edge(Node::new(x, y).step(d), d.inverse(), BigRational::one() - f);
            prop_assert_eq!(a, b);
        }
    }
}
