//! Convex over-approximations of visited regions, used to prove that two
//! walks cannot share a node.
//!
//! A shape is the intersection of an axis-aligned box and a box in the
//! rotated coordinates `u = x + y`, `v = x - y` (the latter is exact for L1
//! balls), optionally minus an open L1 ball around a center.

use crate::grid::Node;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Shape {
    /// `[xmin, xmax, ymin, ymax]`
    xy: [i64; 4],
    /// `[umin, umax, vmin, vmax]`
    uv: [i64; 4],
    /// Nodes at distance `< r` from the center are excluded.
    hole: Option<(Node, u64)>,
}

fn overlap(a: [i64; 4], b: [i64; 4]) -> bool {
    a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3]
}

impl Shape {
    pub(crate) fn ball(c: Node, r: u64) -> Shape {
        let r = r as i64;
        let (u, v) = (c.x + c.y, c.x - c.y);
        Shape {
            xy: [c.x - r, c.x + r, c.y - r, c.y + r],
            uv: [u - r, u + r, v - r, v + r],
            hole: None,
        }
    }

    pub(crate) fn annulus(c: Node, rmin: u64, rmax: u64) -> Shape {
        let mut s = Shape::ball(c, rmax);
        if rmin > 0 {
            s.hole = Some((c, rmin));
        }
        s
    }

    pub(crate) fn rect(a: Node, b: Node) -> Shape {
        let xy = [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)];
        let us = [xy[0] + xy[2], xy[1] + xy[3]];
        let vs = [xy[0] - xy[3], xy[1] - xy[2]];
        Shape { xy, uv: [us[0], us[1], vs[0], vs[1]], hole: None }
    }

    pub(crate) fn hull(self, other: Shape) -> Shape {
        let m = |a: [i64; 4], b: [i64; 4]| [a[0].min(b[0]), a[1].max(b[1]), a[2].min(b[2]), a[3].max(b[3])];
        Shape { xy: m(self.xy, other.xy), uv: m(self.uv, other.uv), hole: None }
    }

    /// Largest L1 distance from `c` to a point of the shape's outer hull.
    fn max_distance(&self, c: Node) -> u64 {
        let (u, v) = (c.x + c.y, c.x - c.y);
        let du = (self.uv[0] - u).unsigned_abs().max((self.uv[1] - u).unsigned_abs());
        let dv = (self.uv[2] - v).unsigned_abs().max((self.uv[3] - v).unsigned_abs());
        du.max(dv)
    }

    fn inside_hole_of(&self, other: &Shape) -> bool {
        matches!(other.hole, Some((c, r)) if self.max_distance(c) < r)
    }

    /// True when no node can belong to both shapes.
    pub(crate) fn disjoint(&self, other: &Shape) -> bool {
        !overlap(self.xy, other.xy)
            || !overlap(self.uv, other.uv)
            || self.inside_hole_of(other)
            || other.inside_hole_of(self)
    }

    #[cfg(test)]
    pub(crate) fn contains(&self, n: Node) -> bool {
        let (u, v) = (n.x + n.y, n.x - n.y);
        let inside = |b: [i64; 4], p: i64, q: i64| b[0] <= p && p <= b[1] && b[2] <= q && q <= b[3];
        inside(self.xy, n.x, n.y)
            && inside(self.uv, u, v)
            && !matches!(self.hole, Some((c, r)) if n.distance(c) < r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_shape() -> impl Strategy<Value = Shape> {
        let node = (-6i64..6, -6i64..6).prop_map(|(x, y)| Node::new(x, y));
        prop_oneof![
            (node.clone(), 0u64..5).prop_map(|(c, r)| Shape::ball(c, r)),
            (node.clone(), 0u64..4, 0u64..4).prop_map(|(c, a, b)| Shape::annulus(c, a, a + b)),
            (node.clone(), node.clone()).prop_map(|(a, b)| Shape::rect(a, b)),
            (node.clone(), node.clone(), 0u64..4).prop_map(|(a, b, r)| Shape::rect(a, b).hull(Shape::ball(b, r))),
        ]
    }

    proptest! {
        #[test]
        fn disjoint_shapes_share_no_node(a in arb_shape(), b in arb_shape()) {
            if a.disjoint(&b) {
                for x in -12..=12 {
                    for y in -12..=12 {
                        let n = Node::new(x, y);
                        prop_assert!(!(a.contains(n) && b.contains(n)), "{n} in both");
                    }
                }
            }
        }
    }

    #[test]
    fn ball_is_exact() {
        let s = Shape::ball(Node::new(2, -1), 3);
        for x in -6..=9 {
            for y in -8..=6 {
                let n = Node::new(x, y);
                assert_eq!(s.contains(n), n.distance(Node::new(2, -1)) <= 3);
            }
        }
    }

    #[test]
    fn nested_annuli_are_disjoint() {
        let inner = Shape::ball(Node::new(1, 0), 2);
        let ring = Shape::annulus(Node::ORIGIN, 4, 5);
        assert!(inner.disjoint(&ring));
        assert!(!Shape::ball(Node::new(1, 0), 3).disjoint(&ring));
    }
}
