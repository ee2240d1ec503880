use std::collections::HashSet;

use num_traits::ToPrimitive;
use proptest::prelude::*;

use super::*;
use crate::grid::{backtrack, ratio, ring_clockwise, Direction, Position};
use Direction::*;

fn collect(mut r: PatternRoute) -> Vec<Direction> {
    let mut out = Vec::new();
    while let Some(d) = r.next_move() {
        out.push(d);
    }
    out
}

fn small_descriptors(max_radius: u64) -> Vec<PatternDescriptor> {
    let mut out = Vec::new();
    for x in 0..=max_radius {
        out.push(PatternDescriptor::Seed(x));
        for n in 0..3u32 {
            out.push(PatternDescriptor::RepeatSeed(x, Count::from(n)));
        }
        for y in 0..=max_radius - x {
            out.push(PatternDescriptor::Berry(x, y));
            for z in 0..=max_radius - x - y {
                for h in 0..ball_size_u64(z).min(3) {
                    out.push(PatternDescriptor::Cloudberry(x, y, z, h));
                }
            }
        }
    }
    out
}

fn count(n: u64) -> Count {
    Count::from(n)
}

#[test]
fn seed_examples() {
    assert!(collect(seed_route(0)).is_empty());
    let s1 = collect(seed_route(1));
    assert_eq!(&s1[..9], &[N, S, E, W, S, N, W, E, N]);
    assert_eq!(s1.len(), 18);
    assert_eq!(collect(seed_route(2)).len(), 52);
    for x in 0..=50u64 {
        assert_eq!(seed_route(x).total(), &count(8 * x * x + 10 * x));
    }
}

#[test]
fn repeat_seed_examples() {
    assert!(collect(repeat_seed_route(1, count(0))).is_empty());
    assert_eq!(collect(repeat_seed_route(1, count(3))).len(), 54);
    assert_eq!(repeat_seed_route(4, count(4516)).total(), &count(758_688));
    assert_eq!(collect(seed_route(4)).len(), 168);
}

#[test]
fn berry_and_cloudberry_examples() {
    assert!(collect(berry_route(0, 0)).is_empty());
    assert_eq!(collect(berry_route(1, 1)).len(), 432);
    assert_eq!(collect(berry_route(1, 0)).len(), 52);
    assert!(collect(cloudberry_route(0, 0, 0, 0)).is_empty());
    for h in 0..5 {
        assert_eq!(collect(cloudberry_route(1, 1, 1, h)).len(), 4516);
        assert_eq!(cost(&PatternDescriptor::Cloudberry(1, 1, 1, h)), count(4516));
    }
}

#[test]
fn first_visit_order_examples() {
    assert_eq!(*first_visit_order(0), vec![Node::ORIGIN]);
    assert_eq!(
        *first_visit_order(1),
        vec![Node::new(0, 0), Node::new(0, 1), Node::new(1, 0), Node::new(0, -1), Node::new(-1, 0)]
    );
    let two = first_visit_order(2);
    assert_eq!(two.len(), 13);
    assert_eq!(&two[..2], &[Node::new(0, 0), Node::new(0, 1)]);
    for z in 0..=6 {
        let rings: Vec<Node> = (0..=z).flat_map(|k| ring_clockwise(Node::ORIGIN, k)).collect();
        assert_eq!(*first_visit_order(z), rings);
        assert_eq!(*first_visit_order(z), reference::first_visit_order(z));
    }
}

#[test]
fn routes_match_reference_generators() {
    for p in small_descriptors(4) {
        assert_eq!(collect(p.route(Node::ORIGIN)), reference::moves(&p), "{p}");
    }
}

#[test]
fn cost_and_radius_match_enumeration() {
    for p in small_descriptors(5) {
        let moves = reference::moves(&p);
        assert_eq!(p.cost(), count(moves.len() as u64), "{p}");
        let mut at = Node::ORIGIN;
        let mut far = 0;
        for d in &moves {
            at = at.step(*d);
            far = far.max(at.norm());
        }
        assert_eq!(at, Node::ORIGIN, "{p} is closed");
        if !moves.is_empty() {
            assert_eq!(p.bounding_radius(), far, "{p}");
        }
    }
}

#[test]
fn bounding_radius_examples() {
    assert_eq!(bounding_radius(&PatternDescriptor::Seed(3)), 3);
    assert_eq!(bounding_radius(&PatternDescriptor::Berry(2, 1)), 3);
    assert_eq!(bounding_radius(&PatternDescriptor::Cloudberry(1, 1, 1, 0)), 3);
}

#[test]
fn seed_covers_its_ball() {
    for x in 1..=6u64 {
        let mut at = Node::ORIGIN;
        let mut nodes = HashSet::from([at]);
        let mut edges = HashSet::new();
        for d in collect(seed_route(x)) {
            let next = at.step(d);
            edges.insert((at.min(next), at.max(next)));
            nodes.insert(next);
            at = next;
        }
        let ball: HashSet<Node> = (0..=x).flat_map(|k| ring_clockwise(Node::ORIGIN, k)).collect();
        let ball_edges: HashSet<(Node, Node)> = ball
            .iter()
            .flat_map(|n| [n.step(N), n.step(E)].map(|m| (*n, m)))
            .filter(|(_, m)| ball.contains(m))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        assert_eq!(nodes, ball, "x = {x}");
        assert_eq!(edges, ball_edges, "x = {x}");
    }
}

#[test]
fn first_periods_are_prefixes() {
    for x1 in 0..=6 {
        for x2 in x1..=6 {
            let (a, b) = (reference::seed_first(x1), reference::seed_first(x2));
            let route = collect(seed_route(x2));
            assert_eq!(&route[..b.len()], &b[..]);
            assert_eq!(&b[..a.len()], &a[..]);
        }
    }
    for n1 in 0..=4u64 {
        for n2 in n1..=4 {
            for x2 in 0..=n2 {
                let a = reference::berry_first(n1, 0);
                let b = collect(berry_route(x2, n2 - x2));
                assert_eq!(&b[..a.len()], &a[..], "n1 = {n1}, n2 = {n2}");
            }
        }
    }
}

#[test]
fn second_period_is_backtrack_of_first() {
    for p in small_descriptors(4) {
        if matches!(p, PatternDescriptor::RepeatSeed(..)) {
            continue;
        }
        let all = collect(p.route(Node::ORIGIN));
        let half = all.len() / 2;
        assert_eq!(all[half..].to_vec(), backtrack(&all[..half]), "{p}");
        assert_eq!(reference::first_period(&p).unwrap(), all[..half].to_vec());
    }
}

#[test]
fn descriptor_text_round_trip() {
    for text in ["Seed(3)", "RepeatSeed(4,4516)", "Berry(1,1)", "Cloudberry(1,1,1,0)"] {
        let p: PatternDescriptor = text.parse().unwrap();
        assert_eq!(p.to_string(), text);
    }
    assert!("Berry(1)".parse::<PatternDescriptor>().is_err());
    assert!("Sed(1)".parse::<PatternDescriptor>().is_err());
    assert!("Seed(-1)".parse::<PatternDescriptor>().is_err());
}

#[test]
fn fill_matches_next_move() {
    let p = PatternDescriptor::Cloudberry(1, 2, 1, 2);
    let expected = collect(p.route(Node::ORIGIN));
    let mut r = p.route(Node::ORIGIN);
    let mut got = Vec::new();
    while r.fill(&mut got, 37) > 0 {}
    assert_eq!(got, expected);
    assert_eq!(r.emitted(), count(expected.len() as u64));
}

#[test]
fn checkpoint_restores_the_continuation() {
    let p = PatternDescriptor::Cloudberry(2, 1, 1, 3);
    let mut r = p.route(Node::new(5, -2));
    for _ in 0..777 {
        r.next_move();
    }
    let saved = serde_json::to_string(&r).unwrap();
    let restored: PatternRoute = serde_json::from_str(&saved).unwrap();
    assert_eq!(collect(restored), collect(r));
}

/// Oracle for sweeps: walk the materialized list until the target is
/// touched or the budget runs out.
fn naive_sweep(moves: &[Direction], skip: usize, origin: Node, target: &Position, budget: usize) -> (usize, SweepStop, Node) {
    let mut at = origin;
    for d in &moves[..skip] {
        at = at.step(*d);
    }
    if *target == Position::AtNode(at) {
        return (0, SweepStop::Hit { in_flight: None }, at);
    }
    let rest = &moves[skip..];
    for (i, d) in rest.iter().enumerate() {
        if i == budget {
            return (i, SweepStop::Budget, at);
        }
        let next = at.step(*d);
        let half = Position::on_edge(at, *d, ratio(1, 2));
        let edge_hit = matches!(target, Position::OnEdge { .. }) && target.endpoints() == half.endpoints();
        at = next;
        if *target == Position::AtNode(next) {
            return (i + 1, SweepStop::Hit { in_flight: None }, at);
        }
        if edge_hit {
            return (i + 1, SweepStop::Hit { in_flight: Some(*d) }, at);
        }
    }
    (rest.len(), SweepStop::End, at)
}

fn descriptor_strategy() -> impl Strategy<Value = PatternDescriptor> {
    prop_oneof![
        (0u64..5).prop_map(PatternDescriptor::Seed),
        (0u64..4, 0u64..4).prop_map(|(x, n)| PatternDescriptor::RepeatSeed(x, Count::from(n))),
        (0u64..3, 0u64..3).prop_map(|(x, y)| PatternDescriptor::Berry(x, y)),
        (0u64..2, 0u64..2, 0u64..3, 0u64..13).prop_map(|(x, y, z, h)| PatternDescriptor::Cloudberry(x, y, z, h)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn sweep_equals_move_by_move(
        p in descriptor_strategy(),
        skip_frac in 0.0f64..1.0,
        tx in -6i64..6, ty in -6i64..6,
        on_edge in any::<bool>(),
        edge_dir in 0usize..4,
        budget in 0usize..5000,
        all_on in any::<bool>(),
    ) {
        let origin = Node::new(3, -1);
        let moves = reference::moves(&p);
        let skip = (moves.len() as f64 * skip_frac) as usize;
        let t = Node::new(tx, ty) + origin;
        let target = if on_edge {
            Position::on_edge(t, Direction::ALL[edge_dir], ratio(1, 3))
        } else {
            Position::AtNode(t)
        };
        let mut r = p.route(origin);
        for _ in 0..skip { r.next_move(); }
        let opts = if all_on { SweepOptions::default() } else { SweepOptions::none() };
        let mut stats = SweepStats::default();
        let got = r.sweep(Some(&target), &Count::from(budget), opts, &mut stats);
        let (n, stop, at) = naive_sweep(&moves, skip, origin, &target, budget);
        prop_assert_eq!(got.consumed.to_usize().unwrap(), n);
        prop_assert_eq!(got.stop, stop);
        prop_assert_eq!(r.position(), at);
        // The continuation after a sweep is unaffected by skipping.
        let rest: Vec<Direction> = collect(r);
        prop_assert_eq!(&rest[..], &moves[skip + n..]);
    }

    #[test]
    fn untargeted_advance_is_exact(p in descriptor_strategy(), k in 0usize..6000) {
        let moves = reference::moves(&p);
        let mut r = p.route(Node::ORIGIN);
        let done = r.advance(&Count::from(k)).to_usize().unwrap();
        prop_assert_eq!(done, k.min(moves.len()));
        let rest = collect(r);
        prop_assert_eq!(&rest[..], &moves[done..]);
    }
}

#[test]
fn far_repeat_seed_is_skipped_whole() {
    let mut r = repeat_seed_route(4, count(4516));
    let target = Position::AtNode(Node::new(5, 4));
    let mut stats = SweepStats::default();
    let s = r.sweep(Some(&target), &count(10_000_000), SweepOptions::default(), &mut stats);
    assert_eq!(s, Sweep { consumed: count(758_688), stop: SweepStop::End });
    assert_eq!(stats.moves_stepped, 0);
}

#[test]
fn repetition_skip_after_one_clean_repetition() {
    let mut r = repeat_seed_route(4, count(4516));
    let target = Position::AtNode(Node::new(0, 6));
    let opts = SweepOptions { ball_skip: false, repetition_skip: true, period_skip: false };
    let mut stats = SweepStats::default();
    let s = r.sweep(Some(&target), &count(10_000_000), opts, &mut stats);
    assert_eq!(s.consumed, count(758_688));
    assert_eq!(stats.moves_stepped, 168);
    assert_eq!(stats.repetitions_skipped, count(4515));
}

#[test]
fn co_located_target_hits_immediately() {
    let mut r = seed_route(1);
    let mut stats = SweepStats::default();
    let s = r.sweep(Some(&Position::AtNode(Node::ORIGIN)), &count(100), SweepOptions::default(), &mut stats);
    assert_eq!(s, Sweep { consumed: count(0), stop: SweepStop::Hit { in_flight: None } });
}

#[test]
fn large_patterns_sweep_quickly() {
    // Far beyond enumeration: the target sits just outside the reach.
    let p = PatternDescriptor::Cloudberry(300, 8, 8, 5);
    let mut r = p.route(Node::ORIGIN);
    let mut stats = SweepStats::default();
    let s = r.sweep(Some(&Position::AtNode(Node::new(0, 317))), &p.cost(), SweepOptions::default(), &mut stats);
    assert_eq!(s.stop, SweepStop::End);
    assert_eq!(s.consumed, p.cost());
    // Inside the reach, the first Seed that covers it meets it.
    let mut r = p.route(Node::ORIGIN);
    let s = r.sweep(Some(&Position::AtNode(Node::new(2, 1))), &p.cost(), SweepOptions::default(), &mut stats);
    assert!(matches!(s.stop, SweepStop::Hit { .. }));
    assert!(s.consumed < count(1000));
}

#[test]
fn spans_cover_the_rest_of_their_frames() {
    for p in small_descriptors(3) {
        let origin = Node::new(2, -1);
        let moves = collect(p.route(origin));
        let mut route = p.route(origin);
        let mut path = vec![origin];
        for d in &moves {
            path.push(path.last().unwrap().step(*d));
        }
        for t in 0..moves.len() {
            for (shape, rem) in route.spans() {
                let rem = rem.to_usize().unwrap();
                for n in &path[t..=t + rem] {
                    assert!(shape.contains(*n), "{p} at move {t}: {n} escapes its span");
                }
            }
            route.next_move();
        }
    }
}

#[test]
fn repeat_window_tracks_the_frame() {
    let mut r = repeat_seed_route(2, count(3));
    assert_eq!(r.repeat_window(), Some((2, count(156))));
    r.advance(&count(30));
    assert_eq!(r.repeat_window(), Some((2, count(126))));
    assert_eq!(seed_route(2).repeat_window(), None);
}
