//! Exhaustive exploration of whole-edge interleavings of two finite routes.
//!
//! The joint state after any schedule prefix is the pair of move counts, so
//! reachability over the `(i, j)` grid covers every interleaving at once.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AgentId;
use crate::grid::Node;
use crate::patterns::{PatternDescriptor, PatternRoute};
use crate::Count;

/// Upper bound on `(la + 1) * (lb + 1)`, the number of joint states.
pub const MAX_STATES: u64 = 1 << 33;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("routes have {0} moves in total, above the limit of {1}")]
    TooManyMoves(Count, u64),
    #[error("{0} joint states exceed the explosion guard")]
    TooManyStates(u64),
    #[error("agents start at the same node")]
    SameStart,
}

/// How a maximal schedule ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Terminal {
    /// The agents met; the flags tell who had already finished its route.
    Met { a_done_before: bool, b_done_before: bool },
    /// Both routes ended without a meeting.
    Finished { first: AgentId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcomes {
    pub terminals: BTreeSet<Terminal>,
    pub states: u64,
}

fn walk(route: &[PatternDescriptor], start: Node) -> Vec<Node> {
    let mut out = vec![start];
    for p in route {
        let mut r = PatternRoute::new(p.clone(), start);
        let mut at = start;
        while let Some(d) = r.next_move() {
            at = at.step(d);
            out.push(at);
        }
    }
    out
}

fn length(route: &[PatternDescriptor]) -> Count {
    route.iter().map(PatternDescriptor::cost).sum()
}

/// Explores every sequential whole-edge interleaving of `route_a` run from
/// the origin and `route_b` run from `offset`, with `first` making the very
/// first move. An agent whose route is over stays where it is.
pub fn exhaustive_explore(
    route_a: &[PatternDescriptor],
    route_b: &[PatternDescriptor],
    offset: Node,
    first: AgentId,
    max_total_moves: u64,
) -> Result<Outcomes, ExploreError> {
    let total = length(route_a) + length(route_b);
    if total > Count::from(max_total_moves) {
        return Err(ExploreError::TooManyMoves(total, max_total_moves));
    }
    let la = length(route_a).to_usize().expect("bounded above");
    let lb = length(route_b).to_usize().expect("bounded above");
    let states = (la as u64 + 1) * (lb as u64 + 1);
    if states > MAX_STATES {
        return Err(ExploreError::TooManyStates(states));
    }
    let pa = walk(route_a, Node::ORIGIN);
    let pb = walk(route_b, offset);
    if pa[0] == pb[0] && offset != Node::ORIGIN {
        return Err(ExploreError::SameStart);
    }

    let mut terminals = BTreeSet::new();
    // `live[j]`: state (i, j) is reachable and the schedule may go on.
    let mut prev = vec![false; lb + 1];
    let mut cur = vec![false; lb + 1];
    #[allow(clippy::needless_range_loop)] // i also indexes the grid rows, not just pa
    for i in 0..=la {
        for j in 0..=lb {
            let start = i == 0 && j == 0;
            let from_a = i > 0 && prev[j] && !(i == 1 && j == 0 && first == AgentId::B);
            let from_b = j > 0 && cur[j - 1] && !(i == 0 && j == 1 && first == AgentId::A);
            cur[j] = false;
            if start {
                cur[j] = true;
                continue;
            }
            if !from_a && !from_b {
                continue;
            }
            if pa[i] == pb[j] {
                if from_a {
                    terminals.insert(Terminal::Met { a_done_before: false, b_done_before: j == lb });
                }
                if from_b {
                    terminals.insert(Terminal::Met { a_done_before: i == la, b_done_before: false });
                }
            } else if i == la && j == lb {
                if from_a {
                    terminals.insert(Terminal::Finished { first: AgentId::B });
                }
                if from_b {
                    terminals.insert(Terminal::Finished { first: AgentId::A });
                }
            } else {
                cur[j] = true;
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(Outcomes { terminals, states })
}

/// What a lemma instance asserts about every schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Claim {
    /// The agents meet before either finishes.
    MeetByMin,
    /// `pusher` pushes the other route: every schedule meets, or the other
    /// route ends first.
    Push { pusher: AgentId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaInstance {
    pub lemma: String,
    pub a: Vec<PatternDescriptor>,
    pub b: Vec<PatternDescriptor>,
    pub offset: Node,
    /// Route that starts first.
    pub first: AgentId,
    pub claim: Claim,
}

impl fmt::Display for LemmaInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |r: &[PatternDescriptor]| r.iter().map(ToString::to_string).collect::<Vec<_>>().join("+");
        write!(f, "{}: A=[{}] B=[{}] offset={} first={}", self.lemma, list(&self.a), list(&self.b), self.offset, self.first)
    }
}

impl Claim {
    pub fn holds(&self, o: &Outcomes) -> bool {
        match *self {
            Claim::MeetByMin => o
                .terminals
                .iter()
                .all(|t| *t == Terminal::Met { a_done_before: false, b_done_before: false }),
            Claim::Push { pusher } => !o.terminals.contains(&Terminal::Finished { first: pusher }),
        }
    }
}

impl LemmaInstance {
    pub fn check(&self, max_total_moves: u64) -> Result<(bool, Outcomes), ExploreError> {
        let o = exhaustive_explore(&self.a, &self.b, self.offset, self.first, max_total_moves)?;
        Ok((self.claim.holds(&o), o))
    }
}

fn seed(x: u64) -> PatternDescriptor {
    PatternDescriptor::Seed(x)
}

fn repeat(x: u64, n: impl Into<Count>) -> PatternDescriptor {
    PatternDescriptor::RepeatSeed(x, n.into())
}

fn berry(x: u64, y: u64) -> PatternDescriptor {
    PatternDescriptor::Berry(x, y)
}

fn cloudberry(x: u64, y: u64, z: u64, h: u64) -> PatternDescriptor {
    PatternDescriptor::Cloudberry(x, y, z, h)
}

/// Small instances of the push and meeting lemmas: pattern parameters up to
/// 2 and start distances up to 2, except where a lemma's hypothesis forces a
/// larger radius on the pushing `RepeatSeed`.
pub fn push_lemma_instances() -> Vec<LemmaInstance> {
    let mut out = Vec::new();
    let offsets = |d: i64| -> Vec<Node> {
        match d {
            1 => vec![Node::new(1, 0), Node::new(0, -1)],
            _ => vec![Node::new(2, 0), Node::new(1, 1), Node::new(-1, -1)],
        }
    };

    // Same-node seeds: the earlier, smaller one is caught.
    for x1 in 1..=2 {
        for x2 in x1..=2 {
            for (a, b, first) in [(seed(x1), seed(x2), AgentId::A), (seed(x2), seed(x1), AgentId::B)] {
                out.push(LemmaInstance {
                    lemma: "seed meeting".into(),
                    a: vec![a],
                    b: vec![b],
                    offset: Node::ORIGIN,
                    first,
                    claim: Claim::MeetByMin,
                });
            }
        }
    }

    // Same-node berries with non-decreasing reach.
    for (p, q) in [((0, 1), (1, 0)), ((1, 0), (1, 1)), ((0, 1), (0, 2)), ((1, 1), (1, 1)), ((1, 1), (2, 0))] {
        out.push(LemmaInstance {
            lemma: "berry meeting".into(),
            a: vec![berry(p.0, p.1)],
            b: vec![berry(q.0, q.1)],
            offset: Node::ORIGIN,
            first: AgentId::A,
            claim: Claim::MeetByMin,
        });
    }

    // RepeatSeed(x2, n) from u pushes Berry(x1, y) from v when
    // x2 >= x1 + y + delta and n >= C(Berry(x1, y)).
    for (x1, y, delta) in [(1u64, 0u64, 1i64), (0, 1, 1), (1, 1, 1), (0, 1, 2)] {
        let n = berry(x1, y).cost();
        for v in offsets(delta) {
            out.push(LemmaInstance {
                lemma: "repeatseed pushes berry".into(),
                a: vec![repeat(x1 + y + delta as u64, n.clone())],
                b: vec![berry(x1, y)],
                offset: v,
                first: AgentId::B,
                claim: Claim::Push { pusher: AgentId::A },
            });
        }
    }

    // RepeatSeed(x2, n) pushes Cloudberry(x1, y, z, h) when
    // x2 >= x1 + y + z + delta and n >= C(Cloudberry(x1, y, z, h)).
    for (x1, y, z, h) in [(1u64, 0u64, 1u64, 0u64), (0, 1, 1, 2), (1, 0, 1, 4)] {
        let c = cloudberry(x1, y, z, h);
        let n = c.cost();
        for v in offsets(1) {
            out.push(LemmaInstance {
                lemma: "repeatseed pushes cloudberry".into(),
                a: vec![repeat(x1 + y + z + 1, n.clone())],
                b: vec![c.clone()],
                offset: v,
                first: AgentId::B,
                claim: Claim::Push { pusher: AgentId::A },
            });
        }
    }

    // Berry(x2, y) pushes RepeatSeed(x1, n) when y >= delta and x1 <= x2.
    for (x1, n, x2, y, delta) in [(1u64, 3u32, 1u64, 1u64, 1i64), (1, 1, 2, 1, 1), (1, 2, 2, 1, 1), (1, 2, 1, 2, 2)] {
        for v in offsets(delta) {
            out.push(LemmaInstance {
                lemma: "berry pushes repeatseed".into(),
                a: vec![berry(x2, y)],
                b: vec![repeat(x1, n)],
                offset: v,
                first: AgentId::B,
                claim: Claim::Push { pusher: AgentId::A },
            });
        }
    }

    // Cloudberry(x, y, z, h) pushes a sequence of RepeatSeed and Berry when
    // z >= delta, x + y covers every Berry and x covers every RepeatSeed.
    for h in 0..5 {
        out.push(LemmaInstance {
            lemma: "cloudberry pushes sequence".into(),
            a: vec![cloudberry(1, 1, 1, h)],
            b: vec![repeat(1, 1u32), berry(1, 1)],
            offset: Node::new(0, 1),
            first: AgentId::B,
            claim: Claim::Push { pusher: AgentId::A },
        });
    }
    out
}
