//! Lazy route trees.
//!
//! Every basic pattern is a tree of position-independent segments whose
//! leaves are straight runs and two-direction stairs. A cursor keeps one
//! frame per tree level, so memory stays logarithmic in the route length and
//! any subtree can be skipped in O(1) once its length, displacement and
//! visited region are known in closed form.
//!
//! Reversal is structural: a reversed frame yields its children backwards,
//! each reversed in turn. Leaves and paths absorb the flag into their
//! parameters, and closed walks that are their own reverse drop it.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::grid::{ball_size_u64, canonical_runs, ring_offset, Direction, Node, Position};
use crate::patterns::cost::{
    berry_block_cost, berry_cost, berry_first_cost, berry_ring_cost, berry_sub_cost,
    berry_unit_cost, cloud_first_cost, cloud_unit_cost, cloudberry_cost, repeat_seed_cost,
    ring_size, seed_cost, seed_first_len, seed_phase_len,
};
use crate::patterns::shape::Shape;
use crate::patterns::{first_visit_order, PatternDescriptor};
use crate::{Count, Tally};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) enum Seg {
    Run { dir: Direction, len: u64 },
    /// `(first second)^reps`
    Stair { first: Direction, second: Direction, reps: u64 },
    SeedPhase(u64),
    SeedFirst(u64),
    Seed(u64),
    Repeat { x: u64, n: Count },
    Path { dx: i64, dy: i64 },
    BerryFirst(u64),
    BerryBlock(u64),
    BerrySub { i: u64, j: u64 },
    BerryRing { i: u64, j: u64, k: u64 },
    BerryUnit { to: Node, seed: u64 },
    Berry { x: u64, y: u64 },
    CloudFirst { x: u64, y: u64, z: u64, h: u64 },
    CloudUnit { to: Node, x: u64, y: u64 },
    Cloudberry { x: u64, y: u64, z: u64, h: u64 },
}

/// Superset of the nodes a segment visits, relative to its forward start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Region {
    /// Nodes whose distance from `center` lies in `[rmin, rmax]`.
    Annulus { center: Node, rmin: u64, rmax: u64 },
    /// The canonical path from the start to `to`, plus the ball of radius `r`
    /// around `to`.
    Lolli { to: Node, r: u64 },
    /// Axis-aligned rectangle spanned by the start and `corner`.
    Rect { corner: Node },
}

fn scale(d: Direction, k: u64) -> Node {
    let (dx, dy) = d.delta();
    let k = i64::try_from(k).expect("run length overflow");
    Node::new(dx * k, dy * k)
}

fn ball(r: u64) -> Region {
    Region::Annulus { center: Node::ORIGIN, rmin: 0, rmax: r }
}

impl Seg {
    pub(crate) fn root(desc: &PatternDescriptor) -> Seg {
        match *desc {
            PatternDescriptor::Seed(x) => Seg::Seed(x),
            PatternDescriptor::RepeatSeed(x, ref n) => Seg::Repeat { x, n: n.clone() },
            PatternDescriptor::Berry(x, y) => Seg::Berry { x, y },
            PatternDescriptor::Cloudberry(x, y, z, h) => Seg::Cloudberry { x, y, z, h: h % ball_size_u64(z) },
        }
    }

    fn is_leaf(&self) -> bool {
        matches!(self, Seg::Run { .. } | Seg::Stair { .. })
    }

    fn leaf_len(&self) -> u64 {
        match *self {
            Seg::Run { len, .. } => len,
            Seg::Stair { reps, .. } => 2 * reps,
            _ => 0,
        }
    }

    #[inline]
    fn leaf_dir(&self, idx: u64) -> Direction {
        match *self {
            Seg::Run { dir, .. } => dir,
            Seg::Stair { first, second, .. } => {
                if idx.is_multiple_of(2) {
                    first
                } else {
                    second
                }
            }
            _ => unreachable!("not a leaf"),
        }
    }

    pub(crate) fn len(&self) -> Count {
        match self {
            Seg::Run { len, .. } => Count::from(*len),
            Seg::Stair { reps, .. } => Count::from(*reps) * 2u32,
            Seg::SeedPhase(i) => Count::from(seed_phase_len(*i)),
            Seg::SeedFirst(x) => seed_first_len(*x),
            Seg::Seed(x) => seed_cost(*x),
            Seg::Repeat { x, n } => repeat_seed_cost(*x, n),
            Seg::Path { dx, dy } => Count::from(dx.unsigned_abs() + dy.unsigned_abs()),
            Seg::BerryFirst(n) => berry_first_cost(*n),
            Seg::BerryBlock(i) => berry_block_cost(*i),
            Seg::BerrySub { i, j } => berry_sub_cost(*i, *j),
            Seg::BerryRing { i, j, k } => berry_ring_cost(*i, *j, *k),
            Seg::BerryUnit { to, seed } => berry_unit_cost(to.norm(), *seed),
            Seg::Berry { x, y } => berry_cost(*x, *y),
            Seg::CloudFirst { x, y, z, .. } => cloud_first_cost(*x, *y, *z),
            Seg::CloudUnit { to, x, y } => cloud_unit_cost(to.norm(), *x, *y),
            Seg::Cloudberry { x, y, z, .. } => cloudberry_cost(*x, *y, *z),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Seg::Run { len, .. } => *len == 0,
            Seg::Stair { reps, .. } => *reps == 0,
            Seg::SeedPhase(_) | Seg::BerryBlock(_) | Seg::BerrySub { .. } => false,
            Seg::SeedFirst(x) | Seg::Seed(x) | Seg::BerryFirst(x) => *x == 0,
            Seg::Repeat { x, n } => *x == 0 || n.is_zero(),
            Seg::Path { dx, dy } => *dx == 0 && *dy == 0,
            Seg::BerryRing { i, j, k } => *k == 0 && i == j,
            Seg::BerryUnit { to, seed } => *to == Node::ORIGIN && *seed == 0,
            Seg::Berry { x, y } => x + y == 0,
            Seg::CloudFirst { x, y, z, .. } | Seg::Cloudberry { x, y, z, .. } => x + y + z == 0,
            Seg::CloudUnit { to, x, y } => *to == Node::ORIGIN && x + y == 0,
        }
    }

    /// Net displacement when executed forward.
    fn disp(&self) -> Node {
        match *self {
            Seg::Run { dir, len } => scale(dir, len),
            Seg::Stair { first, second, reps } => scale(first, reps) + scale(second, reps),
            Seg::SeedPhase(_) => Node::new(0, 1),
            Seg::SeedFirst(x) => Node::new(0, x as i64),
            Seg::Path { dx, dy } => Node::new(dx, dy),
            _ => Node::ORIGIN,
        }
    }

    fn region(&self) -> Region {
        match *self {
            Seg::Run { .. } | Seg::Stair { .. } => Region::Rect { corner: self.disp() },
            Seg::SeedPhase(i) => Region::Annulus {
                center: Node::new(0, 1 - i as i64),
                rmin: i - 1,
                rmax: i,
            },
            Seg::SeedFirst(x) | Seg::Seed(x) | Seg::Repeat { x, .. } => ball(x),
            Seg::Path { dx, dy } => Region::Lolli { to: Node::new(dx, dy), r: 0 },
            Seg::BerryFirst(n) => ball(n),
            Seg::BerryBlock(i) | Seg::BerrySub { i, .. } => ball(i),
            Seg::BerryRing { i, j, k } => ball(k + i - j),
            Seg::BerryUnit { to, seed } => Region::Lolli { to, r: seed },
            Seg::Berry { x, y } => ball(x + y),
            Seg::CloudFirst { x, y, z, .. } | Seg::Cloudberry { x, y, z, .. } => ball(x + y + z),
            Seg::CloudUnit { to, x, y } => Region::Lolli { to, r: x + y },
        }
    }

    fn child_count(&self) -> u64 {
        match *self {
            Seg::SeedPhase(_) => 5,
            Seg::SeedFirst(x) => x,
            Seg::Seed(_) | Seg::Berry { .. } | Seg::Cloudberry { .. } | Seg::Path { .. } => 2,
            Seg::BerryFirst(n) => n,
            Seg::BerryBlock(i) => i + 1,
            Seg::BerrySub { j, .. } => j + 1,
            Seg::BerryRing { k, .. } => ring_size(k),
            Seg::BerryUnit { .. } => 3,
            Seg::CloudFirst { z, .. } => ball_size_u64(z),
            Seg::CloudUnit { .. } => 4,
            Seg::Run { .. } | Seg::Stair { .. } | Seg::Repeat { .. } => 0,
        }
    }

    /// `idx`-th child in forward order, with its own reversal flag.
    fn child(&self, idx: u64) -> (Seg, bool) {
        use Direction::*;
        let fwd = |s: Seg| (s, false);
        match *self {
            Seg::SeedPhase(i) => fwd(match idx {
                0 => Seg::Run { dir: N, len: 1 },
                1 => Seg::Stair { first: S, second: E, reps: i },
                2 => Seg::Stair { first: W, second: S, reps: i },
                3 => Seg::Stair { first: N, second: W, reps: i },
                _ => Seg::Stair { first: E, second: N, reps: i },
            }),
            Seg::SeedFirst(_) => fwd(Seg::SeedPhase(idx + 1)),
            Seg::Seed(x) => (Seg::SeedFirst(x), idx == 1),
            Seg::Path { dx, dy } => {
                let mut runs = [Seg::Run { dir: N, len: 0 }, Seg::Run { dir: N, len: 0 }];
                let mut at = 0;
                canonical_runs(dx, dy, |dir, len| {
                    runs[at] = Seg::Run { dir, len };
                    at += 1;
                });
                fwd(runs[idx as usize].clone())
            }
            Seg::BerryFirst(_) => fwd(Seg::BerryBlock(idx + 1)),
            Seg::BerryBlock(i) => fwd(Seg::BerrySub { i, j: idx }),
            Seg::BerrySub { i, j } => fwd(Seg::BerryRing { i, j, k: idx }),
            Seg::BerryRing { i, j, k } => {
                let to = if k == 0 { Node::ORIGIN } else { ring_offset(k, idx) };
                fwd(Seg::BerryUnit { to, seed: i - j })
            }
            Seg::BerryUnit { to, seed } => fwd(match idx {
                0 => Seg::Path { dx: to.x, dy: to.y },
                1 => Seg::Seed(seed),
                _ => Seg::Path { dx: -to.x, dy: -to.y },
            }),
            Seg::Berry { x, y } => (Seg::BerryFirst(x + y), idx == 1),
            Seg::CloudFirst { x, y, z, h } => {
                let order = first_visit_order(z);
                let to = order[((h + idx) % order.len() as u64) as usize];
                fwd(Seg::CloudUnit { to, x, y })
            }
            Seg::CloudUnit { to, x, y } => fwd(match idx {
                0 => Seg::Path { dx: to.x, dy: to.y },
                1 => Seg::Seed(x),
                2 => Seg::Berry { x, y },
                _ => Seg::Path { dx: -to.x, dy: -to.y },
            }),
            Seg::Cloudberry { x, y, z, h } => (Seg::CloudFirst { x, y, z, h }, idx == 1),
            Seg::Run { .. } | Seg::Stair { .. } | Seg::Repeat { .. } => unreachable!("no indexed children"),
        }
    }

    /// Folds a reversal flag into the segment where that is possible.
    fn normalize(self, rev: bool) -> (Seg, bool) {
        if !rev {
            return (self, false);
        }
        match self {
            Seg::Run { dir, len } => (Seg::Run { dir: dir.inverse(), len }, false),
            Seg::Stair { first, second, reps } => (
                Seg::Stair { first: second.inverse(), second: first.inverse(), reps },
                false,
            ),
            Seg::Path { dx, dy } => (Seg::Path { dx: -dx, dy: -dy }, false),
            s @ (Seg::Seed(_)
            | Seg::Repeat { .. }
            | Seg::Berry { .. }
            | Seg::BerryUnit { .. }
            | Seg::Cloudberry { .. }) => (s, false),
            s => (s, true),
        }
    }

    /// Closed patterns made of a first period and its backtrack.
    fn is_two_period(&self) -> bool {
        matches!(self, Seg::Seed(_) | Seg::Berry { .. } | Seg::Cloudberry { .. })
    }
}

fn on_canonical_path(u: Node, v: Node, n: Node) -> bool {
    let within = |a: i64, b: i64, c: i64| a.min(b) <= c && c <= a.max(b);
    if v.y > u.y {
        (n.x == u.x && within(u.y, v.y, n.y)) || (n.y == v.y && within(u.x, v.x, n.x))
    } else {
        (n.y == u.y && within(u.x, v.x, n.x)) || (n.x == v.x && within(u.y, v.y, n.y))
    }
}

impl Region {
    fn shape(&self, anchor: Node) -> Shape {
        match *self {
            Region::Annulus { center, rmin, rmax } => Shape::annulus(anchor + center, rmin, rmax),
            Region::Lolli { to, r } => Shape::rect(anchor, anchor + to).hull(Shape::ball(anchor + to, r)),
            Region::Rect { corner } => Shape::rect(anchor, anchor + corner),
        }
    }

    fn contains(&self, anchor: Node, n: Node) -> bool {
        match *self {
            Region::Annulus { center, rmin, rmax } => {
                let d = n.distance(anchor + center);
                rmin <= d && d <= rmax
            }
            Region::Lolli { to, r } => {
                let tip = anchor + to;
                n.distance(tip) <= r || on_canonical_path(anchor, tip, n)
            }
            Region::Rect { corner } => {
                let c = anchor + corner;
                anchor.x.min(c.x) <= n.x
                    && n.x <= anchor.x.max(c.x)
                    && anchor.y.min(c.y) <= n.y
                    && n.y <= anchor.y.max(c.y)
            }
        }
    }

    /// Whether a walk confined to the region can reach `target`. An edge
    /// interior is reachable only by traversing that edge, so both endpoints
    /// must lie in the region.
    fn may_hit(&self, anchor: Node, target: &Position) -> bool {
        match target {
            Position::AtNode(n) => self.contains(anchor, *n),
            Position::OnEdge { .. } => {
                let (a, b) = target.endpoints();
                self.contains(anchor, a) && self.contains(anchor, b)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Frame {
    seg: Seg,
    rev: bool,
    /// Absolute node where the forward execution of `seg` starts.
    anchor: Node,
    /// Next child (iteration order) or next move of a leaf.
    next: u64,
    reps_done: Count,
    /// Emitted-move count at entry and total length; composites only.
    start: Count,
    len: Count,
    /// Sweep in which the frame was entered; 0 outside sweeps.
    epoch: u64,
    /// Sweep in which a child was last finished without contact.
    clean_epoch: u64,
}

impl Frame {
    fn exit(&self) -> Node {
        if self.rev {
            self.anchor
        } else {
            self.anchor + self.seg.disp()
        }
    }
}

/// Knobs for [`PatternRoute::sweep`]; all on by default. Turning some off is
/// useful to exercise the others in isolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Skip subtrees whose visited region cannot contain the target.
    pub ball_skip: bool,
    /// After one untouched repetition of a `RepeatSeed`, skip the rest.
    pub repetition_skip: bool,
    /// After an untouched first period, skip its backtrack.
    pub period_skip: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { ball_skip: true, repetition_skip: true, period_skip: true }
    }
}

impl SweepOptions {
    pub fn none() -> Self {
        SweepOptions { ball_skip: false, repetition_skip: false, period_skip: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub moves_stepped: u64,
    pub subtrees_skipped: u64,
    pub periods_skipped: u64,
    pub repetitions_skipped: Count,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepStop {
    /// The mover reached the target. With `in_flight`, the target is inside
    /// the edge of that last consumed move.
    Hit { in_flight: Option<Direction> },
    Budget,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sweep {
    /// Moves taken from the route, including an in-flight one.
    pub consumed: Count,
    pub stop: SweepStop,
}

/// Pull-based cursor over the moves of one basic pattern executed from
/// `origin`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternRoute {
    descriptor: PatternDescriptor,
    origin: Node,
    pos: Node,
    stack: Vec<Frame>,
    emitted: Tally,
    total: Count,
    epoch: u64,
}

impl PatternRoute {
    pub fn new(descriptor: PatternDescriptor, origin: Node) -> PatternRoute {
        let root = Seg::root(&descriptor);
        let total = root.len();
        let mut route = PatternRoute {
            descriptor,
            origin,
            pos: origin,
            stack: Vec::with_capacity(12),
            emitted: Tally::new(),
            total,
            epoch: 0,
        };
        if !root.is_empty() {
            route.push(root, false, 0);
        }
        route
    }

    pub fn descriptor(&self) -> &PatternDescriptor {
        &self.descriptor
    }

    pub fn origin(&self) -> Node {
        self.origin
    }

    /// Node reached after every consumed move.
    pub fn position(&self) -> Node {
        self.pos
    }

    pub fn emitted(&self) -> Count {
        self.emitted.value()
    }

    pub fn total(&self) -> &Count {
        &self.total
    }

    pub fn remaining(&self) -> Count {
        &self.total - self.emitted.value()
    }

    /// True once every move has been emitted, even if the frames have not
    /// been unwound yet.
    pub fn is_finished(&self) -> bool {
        self.stack.is_empty() || self.emitted.value() == self.total
    }

    /// Length of one period: half the route for the two-period patterns,
    /// one `Seed(x)` for `RepeatSeed`.
    pub fn period_len(&self) -> Count {
        match self.descriptor {
            PatternDescriptor::RepeatSeed(x, _) => seed_cost(x),
            _ => &self.total / 2u32,
        }
    }

    fn push(&mut self, seg: Seg, rev: bool, epoch: u64) {
        let (seg, rev) = seg.normalize(rev);
        let anchor = if rev { self.pos - seg.disp() } else { self.pos };
        let (start, len) = if seg.is_leaf() {
            (Count::zero(), Count::zero())
        } else {
            (self.emitted.value(), seg.len())
        };
        self.stack.push(Frame {
            seg,
            rev,
            anchor,
            next: 0,
            reps_done: Count::zero(),
            start,
            len,
            epoch,
            clean_epoch: 0,
        });
    }

    /// Next non-empty child of the top frame, already normalized.
    fn next_child(&mut self) -> Option<(Seg, bool)> {
        let f = self.stack.last_mut()?;
        if let Seg::Repeat { x, n } = &f.seg {
            if f.reps_done < *n {
                f.reps_done += 1u32;
                return Some((Seg::Seed(*x), false));
            }
            return None;
        }
        let count = f.seg.child_count();
        while f.next < count {
            let t = f.next;
            f.next += 1;
            let idx = if f.rev { count - 1 - t } else { t };
            let (c, crev) = f.seg.child(idx);
            if !c.is_empty() {
                return Some(c.normalize(crev ^ f.rev));
            }
        }
        None
    }

    /// Brings a leaf with pending moves to the top of the stack.
    fn settle(&mut self) -> bool {
        loop {
            let Some(top) = self.stack.last() else { return false };
            if top.seg.is_leaf() {
                if top.next < top.seg.leaf_len() {
                    return true;
                }
                self.stack.pop();
                continue;
            }
            match self.next_child() {
                Some((c, crev)) => self.push(c, crev, 0),
                None => {
                    self.stack.pop();
                }
            }
        }
    }

    pub fn peek(&mut self) -> Option<Direction> {
        if !self.settle() {
            return None;
        }
        let top = self.stack.last().expect("settled");
        Some(top.seg.leaf_dir(top.next))
    }

    pub fn next_move(&mut self) -> Option<Direction> {
        if !self.settle() {
            return None;
        }
        let top = self.stack.last_mut().expect("settled");
        let d = top.seg.leaf_dir(top.next);
        top.next += 1;
        self.pos = self.pos.step(d);
        self.emitted.incr();
        Some(d)
    }

    /// Appends up to `max` moves to `out`, returning how many were added.
    pub fn fill(&mut self, out: &mut Vec<Direction>, max: usize) -> usize {
        let mut added = 0;
        while added < max && self.settle() {
            let top = self.stack.last_mut().expect("settled");
            let take = (top.seg.leaf_len() - top.next).min((max - added) as u64);
            for _ in 0..take {
                let d = top.seg.leaf_dir(top.next);
                top.next += 1;
                self.pos = self.pos.step(d);
                out.push(d);
            }
            self.emitted.add_u64(take);
            added += take as usize;
        }
        added
    }

    /// Advances by up to `budget` moves without looking for anything.
    pub fn advance(&mut self, budget: &Count) -> Count {
        let mut stats = SweepStats::default();
        self.sweep(None, budget, SweepOptions::default(), &mut stats).consumed
    }

    /// Every open frame, outermost first, as the region its remaining moves
    /// stay in and the number of those moves.
    pub(crate) fn spans(&self) -> Vec<(Shape, Count)> {
        let now = self.emitted.value();
        self.stack
            .iter()
            .map(|f| {
                let rem = if f.seg.is_leaf() {
                    Count::from(f.seg.leaf_len() - f.next)
                } else {
                    &f.start + &f.len - &now
                };
                (f.seg.region().shape(f.anchor), rem)
            })
            .collect()
    }

    /// Seed radius and moves left of the innermost open `RepeatSeed` frame.
    pub(crate) fn repeat_window(&self) -> Option<(u64, Count)> {
        let f = self.stack.iter().rev().find(|f| matches!(f.seg, Seg::Repeat { .. }))?;
        let Seg::Repeat { x, .. } = f.seg else { unreachable!() };
        Some((x, &f.start + &f.len - self.emitted.value()))
    }

    fn pop_frame(&mut self, sweeping: bool) {
        let f = self.stack.pop().expect("non-empty stack");
        if sweeping && f.epoch == self.epoch {
            if let Some(parent) = self.stack.last_mut() {
                parent.clean_epoch = self.epoch;
            }
        }
    }

    /// Moves along the route for at most `budget` moves while the rest of the
    /// world is frozen, stopping early when the swept point set touches
    /// `target`. Skipping is exact: the stop point and the count of consumed
    /// moves are the same as with move-by-move stepping.
    pub fn sweep(
        &mut self,
        target: Option<&Position>,
        budget: &Count,
        opts: SweepOptions,
        stats: &mut SweepStats,
    ) -> Sweep {
        self.epoch += 1;
        let before = self.emitted.value();
        let mut left = budget.to_u128().unwrap_or(u128::MAX);
        let region_skip = target.is_none() || opts.ball_skip;
        let misses = |region: Region, anchor: Node| match target {
            None => true,
            Some(t) => !region.may_hit(anchor, t),
        };
        let done = |route: &PatternRoute, stop: SweepStop| Sweep {
            consumed: route.emitted.value() - &before,
            stop,
        };

        if let Some(Position::AtNode(t)) = target {
            if *t == self.pos {
                return done(self, SweepStop::Hit { in_flight: None });
            }
        }

        // Drop the outermost unfinished frame that cannot touch the target.
        if region_skip {
            let now = self.emitted.value();
            for depth in 0..self.stack.len() {
                let f = &self.stack[depth];
                if !misses(f.seg.region(), f.anchor) {
                    continue;
                }
                let rem = if f.seg.is_leaf() {
                    Count::from(f.seg.leaf_len() - f.next)
                } else {
                    &f.start + &f.len - &now
                };
                match rem.to_u128() {
                    Some(r) if r <= left => {
                        self.pos = f.exit();
                        self.stack.truncate(depth);
                        self.emitted.add(&rem);
                        left -= r;
                        stats.subtrees_skipped += 1;
                        break;
                    }
                    _ => {}
                }
            }
        }

        loop {
            if left == 0 {
                let stop = if self.remaining().is_zero() { SweepStop::End } else { SweepStop::Budget };
                return done(self, stop);
            }
            let epoch = self.epoch;
            let Some(top) = self.stack.last_mut() else {
                return done(self, SweepStop::End);
            };

            if top.seg.is_leaf() {
                let rem = top.seg.leaf_len() - top.next;
                if rem == 0 {
                    self.pop_frame(target.is_some());
                    continue;
                }
                let k = (rem as u128).min(left) as u64;
                if region_skip && misses(Region::Rect { corner: top.seg.disp() }, top.anchor) {
                    let a = top.next;
                    let moved = match top.seg {
                        Seg::Run { dir, .. } => scale(dir, k),
                        Seg::Stair { first, second, .. } => {
                            let firsts = (a + k).div_ceil(2) - a.div_ceil(2);
                            scale(first, firsts) + scale(second, k - firsts)
                        }
                        _ => unreachable!(),
                    };
                    top.next += k;
                    self.pos = self.pos + moved;
                    self.emitted.add_u64(k);
                    left -= k as u128;
                    continue;
                }
                let t = target.expect("misses() is true without a target");
                for _ in 0..k {
                    let d = top.seg.leaf_dir(top.next);
                    top.next += 1;
                    let from = self.pos;
                    self.pos = from.step(d);
                    self.emitted.incr();
                    left -= 1;
                    stats.moves_stepped += 1;
                    match t {
                        Position::AtNode(n) if *n == self.pos => {
                            return done(self, SweepStop::Hit { in_flight: None });
                        }
                        Position::OnEdge { origin, dir, .. } => {
                            let (o, e) = if d.is_canonical() { (from, d) } else { (self.pos, d.inverse()) };
                            if o == *origin && e == *dir {
                                return done(self, SweepStop::Hit { in_flight: Some(d) });
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }

            let clean = target.is_some() && top.clean_epoch == epoch;
            if clean && opts.repetition_skip {
                if let Seg::Repeat { x, n } = &top.seg {
                    let per = seed_cost(*x).to_u128().unwrap_or(u128::MAX);
                    let rem = n - &top.reps_done;
                    let fit = Count::from(left / per.max(1));
                    let r = if rem < fit { rem } else { fit };
                    if !r.is_zero() {
                        top.reps_done += &r;
                        let moves = &r * seed_cost(*x);
                        left -= moves.to_u128().expect("bounded by the budget");
                        self.emitted.add(&moves);
                        stats.repetitions_skipped += r;
                        continue;
                    }
                }
            }
            if clean && opts.period_skip && top.seg.is_two_period() && top.next == 1 {
                let (second, _) = top.seg.child(1);
                if let Some(l) = second.len().to_u128().filter(|l| *l <= left) {
                    top.next = 2;
                    // The backtrack returns to where the first period started.
                    self.pos = top.anchor;
                    self.emitted.add(&Count::from(l));
                    left -= l;
                    stats.periods_skipped += 1;
                    continue;
                }
            }

            match self.next_child() {
                None => self.pop_frame(target.is_some()),
                Some((c, crev)) => {
                    let anchor = if crev { self.pos - c.disp() } else { self.pos };
                    if region_skip && misses(c.region(), anchor) {
                        let len = c.len();
                        if let Some(l) = len.to_u128().filter(|l| *l <= left) {
                            self.pos = if crev { anchor } else { anchor + c.disp() };
                            self.emitted.add(&len);
                            left -= l;
                            stats.subtrees_skipped += 1;
                            if target.is_some() {
                                self.stack.last_mut().expect("parent").clean_epoch = epoch;
                            }
                            continue;
                        }
                    }
                    self.push(c, crev, epoch);
                }
            }
        }
    }
}
