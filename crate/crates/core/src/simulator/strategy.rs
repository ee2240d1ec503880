use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::engine::AgentState;
use super::{AgentId, Amount, Decision};
use crate::grid::ratio;
use crate::Count;

/// What an adversary sees before deciding.
pub struct View<'a> {
    pub agents: [&'a AgentState; 2],
    /// Whether the next whole edge of each agent would end in a meeting.
    /// Only filled in for adversaries that ask for it.
    pub next_meets: Option<[bool; 2]>,
}

impl View<'_> {
    pub fn agent(&self, id: AgentId) -> &AgentState {
        self.agents[id.index()]
    }
}

/// A closed-form run of upcoming decisions, each granting one whole edge.
/// The engine may replay it in bulk while it can prove no meeting is close.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Strict alternation, `next` first.
    Alternate { next: AgentId },
    /// The agent with fewer traversals (ties to `tie`) moves, unless its
    /// edge would meet and the other's would not.
    Balance { tie: AgentId },
}

pub trait Adversary: Send {
    fn decide(&mut self, view: &View<'_>) -> Decision;

    /// Whether `View::next_meets` is needed.
    fn wants_lookahead(&self) -> bool {
        false
    }

    /// The schedule the next decisions follow, if they follow one.
    fn schedule(&self, _view: &View<'_>) -> Option<Schedule> {
        None
    }

    /// Called after the engine replayed part of the schedule; `next` is the
    /// state to continue from.
    fn resume(&mut self, _next: Schedule) {}
}

#[derive(Clone, Debug)]
pub struct RoundRobin {
    pub next: AgentId,
}

impl Adversary for RoundRobin {
    fn decide(&mut self, _view: &View<'_>) -> Decision {
        let agent = self.next;
        self.next = agent.other();
        Decision::edges(agent, 1u32)
    }

    fn schedule(&self, _view: &View<'_>) -> Option<Schedule> {
        Some(Schedule::Alternate { next: self.next })
    }

    fn resume(&mut self, next: Schedule) {
        if let Schedule::Alternate { next } = next {
            self.next = next;
        }
    }
}

/// Random agent, random chunk of `2^k` edges with `k ≤ max_log`, and now and
/// then a stop inside an edge.
#[derive(Clone, Debug)]
pub struct RandomChunks {
    rng: ChaCha8Rng,
    max_log: u32,
    flip: bool,
}

impl RandomChunks {
    pub fn new(seed: u64, max_log: u32, flip: bool) -> RandomChunks {
        RandomChunks { rng: ChaCha8Rng::seed_from_u64(seed), max_log, flip }
    }
}

impl Adversary for RandomChunks {
    fn decide(&mut self, view: &View<'_>) -> Decision {
        let agent = if self.rng.random::<bool>() ^ self.flip { AgentId::B } else { AgentId::A };
        if self.rng.random_ratio(1, 8) {
            let quarters = self.rng.random_range(1..=4i64);
            let q0 = view.agent(agent).edge_progress().cloned().unwrap_or_else(BigRational::zero);
            let q = &q0 + (BigRational::one() - &q0) * ratio(quarters, 4);
            return Decision { agent, amount: Amount::ToFraction(q) };
        }
        let k = self.rng.random_range(0..=self.max_log);
        Decision::edges(agent, Count::one() << k)
    }
}

/// Keeps `frozen` still until the other agent has completed `until` basic
/// patterns, then alternates single edges starting with `frozen`.
#[derive(Clone, Debug)]
pub struct Freeze {
    pub frozen: AgentId,
    pub until: u64,
    pub next: AgentId,
}

impl Freeze {
    fn released(&self, view: &View<'_>) -> bool {
        view.agent(self.frozen.other()).descriptors_done() >= self.until
    }
}

impl Adversary for Freeze {
    fn decide(&mut self, view: &View<'_>) -> Decision {
        if !self.released(view) {
            let runner = self.frozen.other();
            return Decision::edges(runner, view.agent(runner).edges_left_in_descriptor());
        }
        let agent = self.next;
        self.next = agent.other();
        Decision::edges(agent, 1u32)
    }

    fn schedule(&self, view: &View<'_>) -> Option<Schedule> {
        self.released(view).then_some(Schedule::Alternate { next: self.next })
    }

    fn resume(&mut self, next: Schedule) {
        if let Schedule::Alternate { next } = next {
            self.next = next;
        }
    }
}

/// Moves the agent with fewer traversals unless that edge would end in a
/// meeting and the other agent's would not.
#[derive(Clone, Debug)]
pub struct GreedyAvoid {
    pub tie: AgentId,
}

impl GreedyAvoid {
    pub(crate) fn preferred(tie: AgentId, a: &Count, b: &Count) -> AgentId {
        match a.cmp(b) {
            std::cmp::Ordering::Less => AgentId::A,
            std::cmp::Ordering::Greater => AgentId::B,
            std::cmp::Ordering::Equal => tie,
        }
    }
}

impl Adversary for GreedyAvoid {
    fn decide(&mut self, view: &View<'_>) -> Decision {
        let meets = view.next_meets.expect("lookahead requested");
        let first = Self::preferred(
            self.tie,
            &view.agent(AgentId::A).traversals(),
            &view.agent(AgentId::B).traversals(),
        );
        let agent = if meets[first.index()] && !meets[first.other().index()] { first.other() } else { first };
        Decision::edges(agent, 1u32)
    }

    fn wants_lookahead(&self) -> bool {
        true
    }

    fn schedule(&self, _view: &View<'_>) -> Option<Schedule> {
        Some(Schedule::Balance { tie: self.tie })
    }
}

/// Runs whole basic patterns, always for the agent that has completed fewer
/// of them (ties to `tie`).
#[derive(Clone, Debug)]
pub struct MirrorProgress {
    pub tie: AgentId,
}

impl Adversary for MirrorProgress {
    fn decide(&mut self, view: &View<'_>) -> Decision {
        let a = view.agent(AgentId::A).descriptors_done();
        let b = view.agent(AgentId::B).descriptors_done();
        let agent = match a.cmp(&b) {
            std::cmp::Ordering::Less => AgentId::A,
            std::cmp::Ordering::Greater => AgentId::B,
            std::cmp::Ordering::Equal => self.tie,
        };
        Decision::edges(agent, view.agent(agent).edges_left_in_descriptor())
    }
}

fn default_max_log() -> u32 {
    32
}

fn is_a(id: &AgentId) -> bool {
    *id == AgentId::A
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn agent_a() -> AgentId {
    AgentId::A
}

/// Serializable adversary choice. Each variant has a mirror image used when
/// the agents' roles are swapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    RoundRobin {
        #[serde(default = "agent_a", skip_serializing_if = "is_a")]
        first: AgentId,
    },
    Random {
        seed: u64,
        #[serde(default = "default_max_log")]
        max_log: u32,
        #[serde(default, skip_serializing_if = "is_false")]
        flip: bool,
    },
    Freeze {
        agent: AgentId,
        until: u64,
    },
    GreedyAvoid {
        #[serde(default = "agent_a", skip_serializing_if = "is_a")]
        tie: AgentId,
    },
    MirrorProgress {
        #[serde(default = "agent_a", skip_serializing_if = "is_a")]
        tie: AgentId,
    },
}

impl StrategySpec {
    pub fn round_robin() -> StrategySpec {
        StrategySpec::RoundRobin { first: AgentId::A }
    }

    pub fn random(seed: u64) -> StrategySpec {
        StrategySpec::Random { seed, max_log: default_max_log(), flip: false }
    }

    pub fn freeze(agent: AgentId, until: u64) -> StrategySpec {
        StrategySpec::Freeze { agent, until }
    }

    pub fn greedy_avoid() -> StrategySpec {
        StrategySpec::GreedyAvoid { tie: AgentId::A }
    }

    pub fn mirror_progress() -> StrategySpec {
        StrategySpec::MirrorProgress { tie: AgentId::A }
    }

    pub fn build(&self) -> Box<dyn Adversary> {
        match *self {
            StrategySpec::RoundRobin { first } => Box::new(RoundRobin { next: first }),
            StrategySpec::Random { seed, max_log, flip } => Box::new(RandomChunks::new(seed, max_log, flip)),
            StrategySpec::Freeze { agent, until } => Box::new(Freeze { frozen: agent, until, next: agent }),
            StrategySpec::GreedyAvoid { tie } => Box::new(GreedyAvoid { tie }),
            StrategySpec::MirrorProgress { tie } => Box::new(MirrorProgress { tie }),
        }
    }

    /// The same adversary with the agents' names exchanged.
    pub fn mirrored(&self) -> StrategySpec {
        match *self {
            StrategySpec::RoundRobin { first } => StrategySpec::RoundRobin { first: first.other() },
            StrategySpec::Random { seed, max_log, flip } => StrategySpec::Random { seed, max_log, flip: !flip },
            StrategySpec::Freeze { agent, until } => StrategySpec::Freeze { agent: agent.other(), until },
            StrategySpec::GreedyAvoid { tie } => StrategySpec::GreedyAvoid { tie: tie.other() },
            StrategySpec::MirrorProgress { tie } => StrategySpec::MirrorProgress { tie: tie.other() },
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |id: AgentId| if id == AgentId::A { "" } else { ":B" };
        match *self {
            StrategySpec::RoundRobin { first } => write!(f, "round_robin{}", mark(first)),
            StrategySpec::Random { seed, max_log, flip } => {
                write!(f, "random:{seed}")?;
                if max_log != default_max_log() {
                    write!(f, ":{max_log}")?;
                }
                if flip {
                    write!(f, ":flip")?;
                }
                Ok(())
            }
            StrategySpec::Freeze { agent, until } => write!(f, "freeze:{agent}:{until}"),
            StrategySpec::GreedyAvoid { tie } => write!(f, "greedy_avoid{}", mark(tie)),
            StrategySpec::MirrorProgress { tie } => write!(f, "mirror_progress{}", mark(tie)),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let agent = |p: &str| match p {
            "A" | "a" => Ok(AgentId::A),
            "B" | "b" => Ok(AgentId::B),
            _ => Err(format!("unknown agent `{p}`")),
        };
        let num = |p: &str| p.parse::<u64>().map_err(|e| format!("bad number `{p}`: {e}"));
        let opt_agent = |i: usize| parts.get(i).map_or(Ok(AgentId::A), |p| agent(p));
        match parts[0] {
            "round_robin" => Ok(StrategySpec::RoundRobin { first: opt_agent(1)? }),
            "greedy_avoid" => Ok(StrategySpec::GreedyAvoid { tie: opt_agent(1)? }),
            "mirror_progress" => Ok(StrategySpec::MirrorProgress { tie: opt_agent(1)? }),
            "random" => {
                let seed = num(parts.get(1).ok_or("random needs a seed, e.g. random:7")?)?;
                let mut spec = StrategySpec::random(seed);
                for p in &parts[2..] {
                    match (&mut spec, *p) {
                        (StrategySpec::Random { flip, .. }, "flip") => *flip = true,
                        (StrategySpec::Random { max_log, .. }, p) => {
                            *max_log = u32::try_from(num(p)?).map_err(|e| e.to_string())?
                        }
                        _ => unreachable!(),
                    }
                }
                Ok(spec)
            }
            "freeze" => {
                let who = agent(parts.get(1).ok_or("freeze needs an agent, e.g. freeze:B:3")?)?;
                let until = num(parts.get(2).ok_or("freeze needs a pattern count, e.g. freeze:B:3")?)?;
                Ok(StrategySpec::Freeze { agent: who, until })
            }
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}
