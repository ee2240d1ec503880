//! Property suites runnable outside the test harness, one record per check.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{assumption_route, harvest_route};
use crate::decomposition::{bd, l1_count, l2_count, max_first_param, rho, Call};
use crate::grid::{backtrack, ring_clockwise, Direction, Node};
use crate::labels::transform;
use crate::patterns::{reference, PatternDescriptor, PatternRoute};
use crate::simulator::explore::push_lemma_instances;
use crate::Count;

/// Move budget handed to the explorer for each lemma instance.
pub const PUSH_MAX_MOVES: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Patterns,
    Decomposition,
    Push,
    Costs,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Patterns, Suite::Decomposition, Suite::Push, Suite::Costs];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Patterns => "patterns",
            Suite::Decomposition => "decomposition",
            Suite::Push => "push",
            Suite::Costs => "costs",
        })
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (patterns, decomposition, push, costs)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub property: String,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: Suite, property: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { suite, property: property.into(), passed, detail: detail.into() }
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Patterns => patterns(),
        Suite::Decomposition => decomposition(),
        Suite::Push => push(),
        Suite::Costs => costs(),
    }
}

fn moves(p: &PatternDescriptor) -> Vec<Direction> {
    let mut r = PatternRoute::new(p.clone(), Node::ORIGIN);
    let mut out = Vec::new();
    while r.fill(&mut out, 1 << 16) > 0 {}
    out
}

/// Every descriptor whose bounding radius is at most `max`, with few
/// repetitions and entry points.
pub fn small_descriptors(max: u64) -> Vec<PatternDescriptor> {
    let mut out = Vec::new();
    for x in 0..=max {
        out.push(PatternDescriptor::Seed(x));
        for n in 0..3u32 {
            out.push(PatternDescriptor::RepeatSeed(x, Count::from(n)));
        }
        for y in 0..=max - x {
            out.push(PatternDescriptor::Berry(x, y));
            for z in 0..=max - x - y {
                for h in 0..3.min(2 * z * (z + 1) + 1) {
                    out.push(PatternDescriptor::Cloudberry(x, y, z, h));
                }
            }
        }
    }
    out
}

fn ball(x: u64) -> HashSet<Node> {
    (0..=x).flat_map(|k| ring_clockwise(Node::ORIGIN, k)).collect()
}

fn patterns() -> Vec<Check> {
    let s = Suite::Patterns;
    let mut out = Vec::new();
    for x in 1..=6 {
        let mut at = Node::ORIGIN;
        let mut nodes = HashSet::from([at]);
        let mut edges = HashSet::new();
        for d in moves(&PatternDescriptor::Seed(x)) {
            let next = at.step(d);
            edges.insert((at.min(next), at.max(next)));
            nodes.insert(next);
            at = next;
        }
        let b = ball(x);
        let inner: HashSet<_> = b
            .iter()
            .flat_map(|n| [n.step(Direction::N), n.step(Direction::E)].map(|m| (*n, m)))
            .filter(|(_, m)| b.contains(m))
            .collect();
        let ok = nodes == b && edges == inner;
        out.push(check(s, format!("Seed({x}) visits exactly its ball"), ok, format!("{} nodes, {} edges", nodes.len(), edges.len())));
    }
    let mut ok = true;
    for x1 in 0..=6 {
        for x2 in x1..=6 {
            ok &= moves(&PatternDescriptor::Seed(x2)).starts_with(&reference::seed_first(x1));
        }
    }
    out.push(check(s, "Seed first periods are nested prefixes (x <= 6)", ok, ""));
    let mut ok = true;
    for n1 in 0..=4u64 {
        for n2 in n1..=4 {
            for x2 in 0..=n2 {
                ok &= moves(&PatternDescriptor::Berry(x2, n2 - x2)).starts_with(&reference::berry_first(n1, 0));
            }
        }
    }
    out.push(check(s, "Berry first periods are nested prefixes (x + y <= 4)", ok, ""));
    let mut bad = Vec::new();
    for p in small_descriptors(4) {
        if matches!(p, PatternDescriptor::RepeatSeed(..)) {
            continue;
        }
        let all = moves(&p);
        let half = all.len() / 2;
        if all[half..] != backtrack(&all[..half])[..] {
            bad.push(p.to_string());
        }
    }
    out.push(check(s, "second period backtracks the first (radius <= 4)", bad.is_empty(), bad.join(" ")));
    let mut bad = Vec::new();
    for p in small_descriptors(4) {
        if moves(&p) != reference::moves(&p) {
            bad.push(p.to_string());
        }
    }
    out.push(check(s, "routes equal the literal definitions (radius <= 4)", bad.is_empty(), bad.join(" ")));
    out
}

fn costs() -> Vec<Check> {
    let s = Suite::Costs;
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for p in small_descriptors(5) {
        if p.cost() != Count::from(reference::moves(&p).len()) {
            bad.push(p.to_string());
        }
    }
    out.push(check(s, "cost equals enumerated length (radius <= 5)", bad.is_empty(), bad.join(" ")));
    let ok = (0..=50u64).all(|x| {
        let n = moves(&PatternDescriptor::Seed(x)).len() as u64;
        n == 8 * x * x + 10 * x && PatternDescriptor::Seed(x).cost() == Count::from(n)
    });
    out.push(check(s, "C(Seed(x)) = 8x^2 + 10x (x <= 50)", ok, ""));
    let b = moves(&PatternDescriptor::Berry(1, 1)).len();
    out.push(check(s, "C(Berry(1,1)) = 432", b == 432, format!("enumerated {b}")));
    let lens: Vec<usize> = (0..5).map(|h| moves(&PatternDescriptor::Cloudberry(1, 1, 1, h)).len()).collect();
    out.push(check(
        s,
        "C(Cloudberry(1,1,1,h)) = 4516 for h <= 4",
        lens.iter().all(|&n| n == 4516),
        format!("{lens:?}"),
    ));
    out
}

fn descriptors_of(mut c: crate::agent::RouteCursor) -> Vec<PatternDescriptor> {
    let mut out = Vec::new();
    while !c.is_finished() {
        out.push(c.descriptor().clone());
        c.skip_descriptor();
    }
    out
}

fn decomposition() -> Vec<Check> {
    let s = Suite::Decomposition;
    let mut out = Vec::new();
    let l2_1 = l2_count(1).expect("power of two");
    out.push(check(s, "L2(1) = 2", l2_1 == Count::from(2u32), l2_1.to_string()));
    for d in [1u64, 2, 4, 8] {
        for label in [0u64, 1, 2, 5] {
            let t = transform(label);
            let a = bd(Call::Assumption(d), &t).expect("power of two").len();
            let h = bd(Call::Harvest(d), &t).expect("power of two").len();
            let (l1, l2) = (l1_count(d).expect("power of two"), l2_count(d).expect("power of two"));
            out.push(check(
                s,
                format!("|bd(Assumption({d}))| = L1 and |bd(Harvest({d}))| = L2, label {label}"),
                Count::from(a) == l1 && Count::from(h) == l2,
                format!("{a}/{l1}, {h}/{l2}"),
            ));
        }
        // L2(d) = 2 + sum of L1 over smaller phases; L1(d) = L2(d) + 2d(2d(d+1)+1).
        let mut l2 = Count::from(2u32);
        let mut j = 1;
        while j < d {
            l2 += l1_count(j).expect("power of two");
            j *= 2;
        }
        let l1 = &l2 + Count::from(2 * d * (2 * d * (d + 1) + 1));
        out.push(check(
            s,
            format!("recurrences for L1({d}), L2({d})"),
            l1 == l1_count(d).expect("power of two") && l2 == l2_count(d).expect("power of two"),
            format!("L1 = {l1}, L2 = {l2}"),
        ));
    }
    for d in [1u64, 2, 4] {
        let m = max_first_param(d).expect("power of two");
        let want = rho(2 * d).expect("power of two") - Count::from(3 * d);
        out.push(check(s, format!("max first parameter of Assumption({d}) = rho(2d) - 3d"), Count::from(m) == want, format!("{m} vs {want}")));
    }
    for d in [1u64, 2] {
        for label in [0u64, 1, 2, 5] {
            let t = transform(label);
            let ok = descriptors_of(assumption_route(label, d).expect("power of two"))[..]
                == bd(Call::Assumption(d), &t).expect("power of two")[..]
                && descriptors_of(harvest_route(label, d).expect("power of two"))[..]
                    == bd(Call::Harvest(d), &t).expect("power of two")[..];
            out.push(check(s, format!("agent route follows bd for d = {d}, label {label}"), ok, ""));
        }
    }
    out
}

fn push() -> Vec<Check> {
    push_lemma_instances()
        .into_iter()
        .map(|inst| match inst.check(PUSH_MAX_MOVES) {
            Ok((ok, o)) => check(Suite::Push, inst.to_string(), ok, format!("{} states, {:?}", o.states, o.terminals)),
            Err(e) => check(Suite::Push, inst.to_string(), false, e.to_string()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::Patterns, Suite::Costs, Suite::Decomposition] {
            for c in run_suite(suite) {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
