use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::strategy::{Adversary, Schedule, View};
use super::trace::TraceRecord;
use super::{AgentId, Amount, Decision, MeetingReport, RunOptions, Scenario, ScenarioError, StopReason};
use crate::agent::{rv_route, AgentProgram, Context, RouteCursor};
use crate::grid::{Direction, Node, Position};
use crate::patterns::cost::seed_cost;
use crate::patterns::{PatternDescriptor, SweepOptions, SweepStats, SweepStop};
use crate::{Count, Tally};

/// Decisions replayed per batch by the two-agent fast loop.
const BATCH: u64 = 1 << 14;
/// Shorter disjoint stretches are cheaper to replay than to prove.
const MIN_REGION_SKIP: u64 = 16;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgentState {
    cursor: RouteCursor,
    /// Edge in progress and the fraction of it already covered. Its move has
    /// already been taken from the cursor.
    partial: Option<(Direction, BigRational)>,
    /// Completing `Assumption(bound)` ends the run.
    bound: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgentStop {
    Hit { in_flight: Option<Direction> },
    Budget,
    /// The agent just completed `Assumption(bound)`.
    Bound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentSweep {
    pub consumed: Count,
    pub stop: AgentStop,
}

impl AgentState {
    pub fn new(program: AgentProgram, bound: Option<u64>) -> AgentState {
        AgentState::from_cursor(rv_route(program), bound)
    }

    pub fn from_cursor(cursor: RouteCursor, bound: Option<u64>) -> AgentState {
        let mut s = AgentState { cursor, partial: None, bound };
        s.normalize();
        s
    }

    pub fn cursor(&self) -> &RouteCursor {
        &self.cursor
    }

    pub fn context(&self) -> Context {
        self.cursor.context()
    }

    pub fn descriptor(&self) -> &PatternDescriptor {
        self.cursor.descriptor()
    }

    pub fn descriptors_done(&self) -> u64 {
        self.cursor.descriptors_done()
    }

    pub fn start(&self) -> Node {
        self.cursor.program().start
    }

    pub fn position(&self) -> Position {
        match &self.partial {
            None => Position::AtNode(self.cursor.position()),
            Some((d, q)) => Position::on_edge(self.cursor.position().step(d.inverse()), *d, q.clone()),
        }
    }

    fn node(&self) -> Option<Node> {
        self.partial.is_none().then(|| self.cursor.position())
    }

    /// Progress on the edge in progress, if inside one.
    pub fn edge_progress(&self) -> Option<&BigRational> {
        self.partial.as_ref().map(|(_, q)| q)
    }

    /// Completed edge traversals.
    pub fn traversals(&self) -> Count {
        let e = self.cursor.emitted();
        if self.partial.is_some() {
            e - 1u32
        } else {
            e
        }
    }

    /// Completed traversals plus progress inside the current edge.
    pub fn progress(&self) -> BigRational {
        let t = BigRational::from_integer(self.traversals().into());
        match &self.partial {
            Some((_, q)) => t + q,
            None => t,
        }
    }

    /// Whole edges needed to finish the current basic pattern, counting an
    /// edge in progress.
    pub fn edges_left_in_descriptor(&self) -> Count {
        let r = self.cursor.route().remaining();
        if self.partial.is_some() {
            r + 1u32
        } else {
            r
        }
    }

    fn bound_descriptor(&self) -> bool {
        let ctx = self.cursor.context();
        self.bound == Some(ctx.phase) && ctx.is_last_in_phase()
    }

    pub fn completed_bound(&self) -> bool {
        self.partial.is_none() && self.bound_descriptor() && self.cursor.route().is_finished()
    }

    /// Moves past finished basic patterns, including empty ones, unless one
    /// closes the bound phase.
    fn normalize(&mut self) {
        while self.partial.is_none() && self.cursor.route().is_finished() && !self.bound_descriptor() {
            self.cursor.finish_descriptor();
        }
    }

    /// Walks up to `budget` whole edges with the rest of the world frozen,
    /// stopping early when the swept point set touches `target`. The agent
    /// must be at a node.
    pub fn sweep(
        &mut self,
        target: Option<&Position>,
        budget: &Count,
        opts: SweepOptions,
        stats: &mut SweepStats,
    ) -> AgentSweep {
        assert!(self.partial.is_none(), "sweeps start at a node");
        let mut consumed = Count::zero();
        loop {
            if self.completed_bound() {
                return AgentSweep { consumed, stop: AgentStop::Bound };
            }
            let left = budget - &consumed;
            if left.is_zero() {
                self.normalize();
                return AgentSweep { consumed, stop: AgentStop::Budget };
            }
            let s = self.cursor.route_mut().sweep(target, &left, opts, stats);
            consumed += s.consumed;
            match s.stop {
                SweepStop::Hit { in_flight } => {
                    if in_flight.is_none() {
                        self.normalize();
                    }
                    return AgentSweep { consumed, stop: AgentStop::Hit { in_flight } };
                }
                SweepStop::Budget => {
                    self.normalize();
                    return AgentSweep { consumed, stop: AgentStop::Budget };
                }
                SweepStop::End => self.normalize(),
            }
        }
    }

    fn advance(&mut self, k: &Count) {
        let mut stats = SweepStats::default();
        let s = self.sweep(None, k, SweepOptions::default(), &mut stats);
        debug_assert!(&s.consumed == k, "advanced {} of {k}", s.consumed);
    }

    /// Appends up to `max` upcoming moves; true when they end the bound phase.
    fn fill(&mut self, out: &mut Vec<Direction>, max: usize) -> bool {
        loop {
            let want = max - out.len();
            self.cursor.route_mut().fill(out, want);
            if self.completed_bound() {
                return true;
            }
            if out.len() == max {
                return false;
            }
            self.normalize();
        }
    }

    fn peek(&mut self) -> Option<Direction> {
        self.cursor.route_mut().peek()
    }
}

/// Fraction along `d` from `from` at which `target` lies, if it is on that
/// edge between `lo` and `hi`.
fn segment_hit(from: Node, d: Direction, lo: &BigRational, hi: &BigRational, target: &Position) -> Option<BigRational> {
    let f = match target {
        Position::AtNode(n) if *n == from => BigRational::zero(),
        Position::AtNode(n) if *n == from.step(d) => BigRational::one(),
        Position::AtNode(_) => return None,
        Position::OnEdge { origin, dir, fraction } => {
            if *dir == d && *origin == from {
                fraction.clone()
            } else if *dir == d.inverse() && *origin == from.step(d) {
                BigRational::one() - fraction
            } else {
                return None;
            }
        }
    };
    (*lo <= f && f <= *hi).then_some(f)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub sweep: SweepStats,
    pub single_decisions: u64,
    pub fast_batches: u64,
    pub fast_decisions: u64,
    pub solo_runs: u64,
    pub lockstep_skips: u64,
    pub region_skips: u64,
    pub period_skips: u64,
}

struct FastRun {
    moved: [u64; 2],
    met: bool,
}

pub type TraceSink = Box<dyn FnMut(&TraceRecord)>;

pub struct Simulation {
    agents: [AgentState; 2],
    adversary: Box<dyn Adversary>,
    budget: Count,
    decisions: Tally,
    fast: bool,
    opts: SweepOptions,
    met: Option<Position>,
    stats: EngineStats,
    trace: Option<TraceSink>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, opts: RunOptions) -> Result<Simulation, ScenarioError> {
        scenario.validate()?;
        let a = AgentProgram::new(scenario.label_a, Node::ORIGIN);
        let b = AgentProgram::new(scenario.label_b, scenario.offset);
        Ok(Simulation::from_parts(
            [AgentState::new(a, scenario.stop_bound), AgentState::new(b, scenario.stop_bound)],
            scenario.strategy.build(),
            scenario.budget.clone(),
            opts,
        ))
    }

    /// Runs arbitrary agent states against an adversary. The agents must not
    /// start co-located.
    pub fn from_parts(agents: [AgentState; 2], adversary: Box<dyn Adversary>, budget: Count, opts: RunOptions) -> Simulation {
        Simulation {
            agents,
            adversary,
            budget,
            decisions: Tally::new(),
            fast: opts.fast_forward,
            opts: if opts.fast_forward { SweepOptions::default() } else { SweepOptions::none() },
            met: None,
            stats: EngineStats::default(),
            trace: None,
        }
    }

    /// Emits one record per decision. Multi-decision skipping is turned off
    /// while tracing so that no decision goes unrecorded.
    pub fn set_trace(&mut self, sink: TraceSink) {
        self.trace = Some(sink);
    }

    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id.index()]
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    fn used(&self) -> Count {
        self.agents[0].traversals() + self.agents[1].traversals()
    }

    fn budget_left(&self) -> Count {
        let used = self.used();
        if used >= self.budget {
            Count::zero()
        } else {
            &self.budget - used
        }
    }

    fn report(&self, stop_reason: StopReason) -> MeetingReport {
        MeetingReport {
            met: self.met.is_some(),
            location: self.met.clone(),
            traversals_a: self.agents[0].traversals(),
            traversals_b: self.agents[1].traversals(),
            context_a: self.agents[0].context(),
            context_b: self.agents[1].context(),
            stop_reason,
            decisions: self.decisions.value(),
        }
    }

    /// The final report once the run is over.
    pub fn outcome(&self) -> Option<MeetingReport> {
        if self.met.is_some() {
            Some(self.report(StopReason::Meeting))
        } else if self.agents.iter().any(AgentState::completed_bound) {
            Some(self.report(StopReason::StopBound))
        } else if self.budget_left().is_zero() {
            Some(self.report(StopReason::Budget))
        } else {
            None
        }
    }

    pub fn run(mut self) -> MeetingReport {
        loop {
            if let Some(r) = self.outcome() {
                return r;
            }
            if self.fast && self.trace.is_none() && self.bulk() {
                continue;
            }
            self.step();
        }
    }

    fn next_meets(&mut self, x: usize) -> bool {
        let target = self.agents[1 - x].position();
        let ag = &mut self.agents[x];
        match &ag.partial {
            Some((d, q)) => {
                let from = ag.cursor.position().step(d.inverse());
                segment_hit(from, *d, q, &BigRational::one(), &target).is_some()
            }
            None => {
                let from = ag.cursor.position();
                match ag.peek() {
                    Some(d) => segment_hit(from, d, &BigRational::zero(), &BigRational::one(), &target).is_some(),
                    None => false,
                }
            }
        }
    }

    /// Asks the adversary for one decision and carries it out.
    pub fn step(&mut self) {
        let lookahead = self.adversary.wants_lookahead().then(|| [self.next_meets(0), self.next_meets(1)]);
        let decision = {
            let view = View { agents: [&self.agents[0], &self.agents[1]], next_meets: lookahead };
            self.adversary.decide(&view)
        };
        let before = self.trace.is_some().then(|| self.agents[decision.agent.index()].position());
        let context = self.agents[decision.agent.index()].context();
        self.apply(&decision);
        self.decisions.incr();
        self.stats.single_decisions += 1;
        if let (Some(before), Some(_)) = (before, self.trace.as_ref()) {
            let x = decision.agent.index();
            let record = TraceRecord {
                step: self.stats.single_decisions - 1,
                agent: decision.agent,
                amount: match &decision.amount {
                    Amount::WholeEdges(k) => format!("edges:{k}"),
                    Amount::ToFraction(q) => format!("fraction:{q}"),
                },
                context: context.to_string(),
                before: before.to_string(),
                after: self.agents[x].position().to_string(),
                traversals_a: self.agents[0].traversals().to_string(),
                traversals_b: self.agents[1].traversals().to_string(),
            };
            (self.trace.as_mut().expect("checked"))(&record);
        }
    }

    fn arrive(&mut self, x: usize, d: Direction, f: BigRational, target: Position) {
        let ag = &mut self.agents[x];
        if f.is_one() {
            ag.partial = None;
            ag.normalize();
        } else {
            ag.partial = Some((d, f));
        }
        self.met = Some(target);
    }

    /// Carries out one decision without consulting the adversary.
    pub fn apply(&mut self, decision: &Decision) {
        let x = decision.agent.index();
        let target = self.agents[1 - x].position();
        let one = BigRational::one();
        match &decision.amount {
            Amount::WholeEdges(k) => {
                assert!(!k.is_zero(), "adversary granted zero edges");
                let left = self.budget_left();
                let mut k = if *k < left { k.clone() } else { left };
                if let Some((d, q0)) = self.agents[x].partial.take() {
                    let from = self.agents[x].cursor.position().step(d.inverse());
                    if let Some(f) = segment_hit(from, d, &q0, &one, &target) {
                        return self.arrive(x, d, f, target);
                    }
                    self.agents[x].normalize();
                    k -= 1u32;
                }
                if k.is_zero() {
                    return;
                }
                let s = self.agents[x].sweep(Some(&target), &k, self.opts, &mut self.stats.sweep);
                if let AgentStop::Hit { in_flight } = s.stop {
                    match in_flight {
                        None => self.met = Some(target),
                        Some(d) => {
                            let from = self.agents[x].cursor.position().step(d.inverse());
                            let f = segment_hit(from, d, &BigRational::zero(), &one, &target)
                                .expect("sweep reported a hit on this edge");
                            self.arrive(x, d, f, target);
                        }
                    }
                }
            }
            Amount::ToFraction(q) => {
                let ag = &mut self.agents[x];
                let (d, q0) = match ag.partial.take() {
                    Some(p) => p,
                    None => (ag.cursor.next_move().expect("routes are infinite"), BigRational::zero()),
                };
                assert!(q0 < *q && *q <= one, "fraction {q} does not advance past {q0}");
                let from = ag.cursor.position().step(d.inverse());
                if let Some(f) = segment_hit(from, d, &q0, q, &target) {
                    return self.arrive(x, d, f, target);
                }
                if q.is_one() {
                    ag.normalize();
                } else {
                    ag.partial = Some((d, q.clone()));
                }
            }
        }
    }

    // ---- multi-decision skipping ----

    /// Replays part of the adversary's schedule in bulk. Returns false when
    /// nothing could be done, in which case a single decision follows.
    fn bulk(&mut self) -> bool {
        if self.agents.iter().any(|a| a.partial.is_some()) {
            return false;
        }
        let sched = {
            let view = View { agents: [&self.agents[0], &self.agents[1]], next_meets: None };
            self.adversary.schedule(&view)
        };
        let Some(sched) = sched else { return false };
        if let Schedule::Balance { .. } = sched {
            let (ta, tb) = (self.agents[0].traversals(), self.agents[1].traversals());
            if ta != tb {
                let (x, gap) = if ta < tb { (0, tb - ta) } else { (1, ta - tb) };
                if gap > Count::one() && self.solo(x, gap - 1u32) {
                    return true;
                }
                return self.fast_loop(sched, BATCH).is_some();
            }
        }
        self.lockstep_skip(sched) || self.region_skip() || self.period_skip(sched) || self.fast_loop(sched, BATCH).is_some()
    }

    fn credit(&mut self, moves: &Count) {
        self.decisions.add(moves);
    }

    /// Lets agent `x` walk up to `n` edges alone, stopping before any edge
    /// that would end in a meeting.
    fn solo(&mut self, x: usize, n: Count) -> bool {
        let left = self.budget_left();
        let n = if n < left { n } else { left };
        let target = self.agents[1 - x].position();
        let snapshot = self.agents[x].clone();
        let s = self.agents[x].sweep(Some(&target), &n, self.opts, &mut self.stats.sweep);
        let safe = match s.stop {
            AgentStop::Hit { .. } => {
                self.agents[x] = snapshot;
                let safe = s.consumed - 1u32;
                if safe.is_zero() {
                    return false;
                }
                self.agents[x].advance(&safe);
                safe
            }
            _ => s.consumed,
        };
        self.stats.solo_runs += 1;
        self.credit(&safe);
        true
    }

    /// Caps a two-agent skip of `t` rounds by the budget and by the end of a
    /// bound phase, which must be reached one decision at a time.
    fn cap_rounds(&self, mut t: Count) -> Count {
        for ag in &self.agents {
            if ag.bound_descriptor() {
                let r = ag.cursor.route().remaining();
                if r.is_zero() {
                    return Count::zero();
                }
                let r = r - 1u32;
                if r < t {
                    t = r;
                }
            }
        }
        let half = self.budget_left() / 2u32;
        if half < t {
            half
        } else {
            t
        }
    }

    fn advance_both(&mut self, t: &Count) {
        self.agents[0].advance(t);
        self.agents[1].advance(t);
        self.credit(&(t * 2u32));
    }

    /// Identical basic patterns at the same progress trace translated copies
    /// of one walk. Under alternation they cannot meet when the starts are at
    /// least two apart; under greedy balancing they never do, since a dodge
    /// swaps the order of one round and the next round restores it.
    fn lockstep_skip(&mut self, sched: Schedule) -> bool {
        let (a, b) = (&self.agents[0], &self.agents[1]);
        if a.descriptor() != b.descriptor() || a.cursor.route().emitted() != b.cursor.route().emitted() {
            return false;
        }
        if matches!(sched, Schedule::Alternate { .. }) && a.start().distance(b.start()) < 2 {
            return false;
        }
        let t = self.cap_rounds(a.cursor.route().remaining());
        if t.is_zero() {
            return false;
        }
        self.advance_both(&t);
        self.stats.lockstep_skips += 1;
        true
    }

    /// When the remaining parts of two open frames lie in disjoint regions,
    /// both agents can run to the end of the shorter one without meeting.
    /// Both schedules then reduce to plain alternation, so the state they
    /// resume from is unchanged.
    fn region_skip(&mut self) -> bool {
        let sa = self.agents[0].cursor.route().spans();
        let sb = self.agents[1].cursor.route().spans();
        let mut best: Option<&Count> = None;
        for (ha, ra) in &sa {
            if best.is_some_and(|b| ra <= b) {
                continue;
            }
            for (hb, rb) in &sb {
                let m = if ra < rb { ra } else { rb };
                if best.is_some_and(|b| m <= b) {
                    continue;
                }
                if ha.disjoint(hb) {
                    best = Some(m);
                }
            }
        }
        let Some(best) = best else { return false };
        let t = self.cap_rounds(best.clone());
        if t < Count::from(MIN_REGION_SKIP) {
            return false;
        }
        self.advance_both(&t);
        self.stats.region_skips += 1;
        true
    }

    /// Two agents repeating seeds of the same radius return to the same
    /// joint state every period. One clean period proves all of them clean.
    fn period_skip(&mut self, sched: Schedule) -> bool {
        let (Some((xa, la)), Some((xb, lb))) =
            (self.agents[0].cursor.route().repeat_window(), self.agents[1].cursor.route().repeat_window())
        else {
            return false;
        };
        if xa != xb {
            return false;
        }
        let p = seed_cost(xa);
        let Some(p64) = p.to_u64().filter(|p| *p <= BATCH * 64) else { return false };
        let three = &p * 3u32;
        if la < three || lb < three || self.budget_left() < &p * 4u32 {
            return false;
        }
        let Some(run) = self.fast_loop(sched, 2 * p64) else { return false };
        if run.met || run.moved != [p64, p64] || self.agents.iter().any(AgentState::completed_bound) {
            return true;
        }
        let room = if la < lb { la } else { lb } - &p * 2u32;
        let k = room / &p;
        let t = self.cap_rounds(k * &p);
        let t = &t - &t % &p;
        if !t.is_zero() {
            self.advance_both(&t);
            self.stats.period_skips += 1;
        }
        true
    }

    /// Replays up to `max` single-edge decisions of the schedule on buffered
    /// moves. Returns `None` when no decision could be replayed.
    fn fast_loop(&mut self, sched: Schedule, max: u64) -> Option<FastRun> {
        let left = self.budget_left().to_u64().unwrap_or(u64::MAX);
        let n = max.min(left) as usize;
        if n == 0 {
            return None;
        }
        let mut bufs = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut bounded = [false; 2];
        for i in 0..2 {
            let mut probe = self.agents[i].clone();
            bounded[i] = probe.fill(&mut bufs[i], n);
        }
        let mut pos = [self.agents[0].node()?, self.agents[1].node()?];
        let mut at = [0usize; 2];
        let mut dec = 0usize;
        let mut met = false;
        let (mut next, tie, balance) = match sched {
            Schedule::Alternate { next } => (next, next, false),
            Schedule::Balance { tie } => (tie, tie, true),
        };
        let mut delta: i128 = 0;
        if balance {
            let (ta, tb) = (self.agents[0].traversals(), self.agents[1].traversals());
            let diff = num_bigint::BigInt::from(ta) - num_bigint::BigInt::from(tb);
            delta = diff.to_i128().unwrap_or(if diff.sign() == num_bigint::Sign::Minus { i128::MIN / 2 } else { i128::MAX / 2 });
        }
        while dec < n {
            let mut x = if balance {
                match delta.cmp(&0) {
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Greater => 1,
                    std::cmp::Ordering::Equal => tie.index(),
                }
            } else {
                next.index()
            };
            let y = 1 - x;
            if at[x] == bufs[x].len() {
                break;
            }
            let mut nx = pos[x].step(bufs[x][at[x]]);
            if balance && nx == pos[y] {
                if at[y] == bufs[y].len() {
                    break;
                }
                let ny = pos[y].step(bufs[y][at[y]]);
                if ny != pos[x] {
                    x = y;
                    nx = ny;
                }
            }
            let y = 1 - x;
            pos[x] = nx;
            at[x] += 1;
            dec += 1;
            delta += if x == 0 { 1 } else { -1 };
            next = if x == 0 { AgentId::B } else { AgentId::A };
            if nx == pos[y] {
                met = true;
                break;
            }
            if bounded[x] && at[x] == bufs[x].len() {
                break;
            }
        }
        if dec == 0 {
            return None;
        }
        for (agent, &n) in self.agents.iter_mut().zip(&at) {
            if n > 0 {
                agent.advance(&Count::from(n));
            }
        }
        if met {
            self.met = Some(Position::AtNode(pos[0]));
        }
        self.credit(&Count::from(dec));
        self.stats.fast_batches += 1;
        self.stats.fast_decisions += dec as u64;
        if !balance {
            self.adversary.resume(Schedule::Alternate { next });
        }
        Some(FastRun { moved: [at[0] as u64, at[1] as u64], met })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ratio;

    fn hit(from: Node, d: Direction, target: Position) -> Option<BigRational> {
        segment_hit(from, d, &BigRational::zero(), &BigRational::one(), &target)
    }

    #[test]
    fn sweeping_through_a_midpoint() {
        let b = Position::on_edge(Node::ORIGIN, Direction::E, ratio(1, 2));
        assert_eq!(hit(Node::ORIGIN, Direction::E, b.clone()), Some(ratio(1, 2)));
        // The same point reached from the other end.
        assert_eq!(hit(Node::new(1, 0), Direction::W, b), Some(ratio(1, 2)));
    }

    #[test]
    fn far_target_is_missed() {
        assert_eq!(hit(Node::ORIGIN, Direction::N, Position::AtNode(Node::new(5, 5))), None);
    }

    #[test]
    fn endpoints_count() {
        assert_eq!(hit(Node::ORIGIN, Direction::N, Position::AtNode(Node::new(0, 1))), Some(BigRational::one()));
        assert_eq!(hit(Node::ORIGIN, Direction::N, Position::AtNode(Node::ORIGIN)), Some(BigRational::zero()));
    }

    #[test]
    fn partial_range_is_respected() {
        let b = Position::on_edge(Node::ORIGIN, Direction::E, ratio(1, 4));
        assert_eq!(segment_hit(Node::ORIGIN, Direction::E, &ratio(1, 2), &BigRational::one(), &b), None);
        assert_eq!(segment_hit(Node::ORIGIN, Direction::E, &ratio(1, 8), &ratio(1, 4), &b), Some(ratio(1, 4)));
    }
}
