//! Asynchronous execution of two agents under an adversarial scheduler.
//!
//! The adversary moves one agent at a time. While an agent moves, the other
//! stands still, and a meeting is declared as soon as the mover's swept
//! point set contains the other agent's position. Every sequential schedule
//! is a legal continuous one, and crossings inside an edge are caught because
//! the second mover has to sweep through the first.

mod engine;
pub mod explore;
mod strategy;
mod trace;

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::Context;
use crate::decomposition::good_assumption;
use crate::grid::{Node, Position};
use crate::labels::first_diff_for_labels;
use crate::Count;

pub use engine::{AgentState, AgentStop, AgentSweep, EngineStats, Simulation};
pub use strategy::{
    Adversary, Freeze, GreedyAvoid, MirrorProgress, RandomChunks, RoundRobin, Schedule, StrategySpec,
    View,
};
pub use trace::TraceRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentId {
    A,
    B,
}

impl AgentId {
    pub fn other(self) -> AgentId {
        match self {
            AgentId::A => AgentId::B,
            AgentId::B => AgentId::A,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == AgentId::A { "A" } else { "B" })
    }
}

/// How far the chosen agent moves in one decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Amount {
    /// Finish the current edge if inside one, then keep going until `k`
    /// edges in total have been completed.
    WholeEdges(Count),
    /// Stop at this fraction of the current (or next) edge. Must be larger
    /// than the progress already made on that edge.
    ToFraction(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub agent: AgentId,
    pub amount: Amount,
}

impl Decision {
    pub fn edges(agent: AgentId, k: impl Into<Count>) -> Decision {
        Decision { agent, amount: Amount::WholeEdges(k.into()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("agents must have distinct labels (both are {0})")]
    SameLabels(u64),
    #[error("agents must start at distinct nodes")]
    SameStart,
    #[error("stop bound {0} is not a power of two")]
    BadBound(u64),
}

/// One experiment: agent A starts at the origin, agent B at `offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub label_a: u64,
    pub label_b: u64,
    pub offset: Node,
    pub strategy: StrategySpec,
    /// Cap on the total number of completed edge traversals.
    pub budget: Count,
    /// Halt once either agent completes `Assumption(stop_bound)`.
    pub stop_bound: Option<u64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.label_a == self.label_b {
            return Err(ScenarioError::SameLabels(self.label_a));
        }
        if self.offset == Node::ORIGIN {
            return Err(ScenarioError::SameStart);
        }
        if let Some(b) = self.stop_bound {
            if !b.is_power_of_two() {
                return Err(ScenarioError::BadBound(b));
            }
        }
        Ok(())
    }

    /// Initial distance `D`.
    pub fn distance(&self) -> u64 {
        self.offset.norm()
    }

    /// Index of the first differing bit of the transformed labels.
    pub fn first_diff(&self) -> Result<u64, ScenarioError> {
        first_diff_for_labels(self.label_a, self.label_b).map_err(|_| ScenarioError::SameLabels(self.label_a))
    }

    /// Smallest power of two at least `max(D, l')`.
    pub fn good_assumption(&self) -> Result<u64, ScenarioError> {
        Ok(good_assumption(self.distance(), self.first_diff()?))
    }

    /// The same experiment with the roles of the agents exchanged, seen from
    /// B's start. Reports of the two runs are mirror images.
    pub fn mirrored(&self) -> Scenario {
        Scenario {
            label_a: self.label_b,
            label_b: self.label_a,
            offset: -self.offset,
            strategy: self.strategy.mirrored(),
            budget: self.budget.clone(),
            stop_bound: self.stop_bound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    Meeting,
    StopBound,
    Budget,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Meeting => "meeting",
            StopReason::StopBound => "stop_bound",
            StopReason::Budget => "budget",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingReport {
    pub met: bool,
    pub location: Option<Position>,
    pub traversals_a: Count,
    pub traversals_b: Count,
    pub context_a: Context,
    pub context_b: Context,
    pub stop_reason: StopReason,
    /// Number of adversary decisions taken.
    pub decisions: Count,
}

impl MeetingReport {
    pub fn total_traversals(&self) -> Count {
        &self.traversals_a + &self.traversals_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Use subtree, repetition and multi-decision skipping. Reports are the
    /// same either way.
    pub fast_forward: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { fast_forward: true }
    }
}

pub fn run(scenario: &Scenario) -> Result<MeetingReport, ScenarioError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, opts: RunOptions) -> Result<MeetingReport, ScenarioError> {
    Ok(Simulation::new(scenario, opts)?.run())
}
