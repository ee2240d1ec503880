//! One agent's infinite program as a resumable cursor over basic patterns.
//!
//! The cursor is a small state machine over descriptor contexts rather than
//! a recursive generator: it can be checkpointed with serde, advanced by
//! whole descriptors, and every move can be traced back to the phase, part
//! and step that issued it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::decomposition::{
    bd, branch_descriptor, push_image, r_u64, rho_u64, steps_per_bit, sync_descriptor, Call,
    DecompositionError,
};
use crate::grid::{Direction, Node};
use crate::labels::{transform, TransformedLabel};
use crate::patterns::cost::cloudberry_cost;
use crate::patterns::{PatternDescriptor, PatternRoute};
use crate::{Count, Tally};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProgram {
    pub label: u64,
    pub transformed: TransformedLabel,
    pub start: Node,
}

impl AgentProgram {
    pub fn new(label: u64, start: Node) -> AgentProgram {
        AgentProgram { label, transformed: transform(label), start }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Berry,
    Cloudberry,
}

/// Which part of `Assumption(phase)` issued a descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    /// Element `index` of `PushPattern(i, phase)`.
    HarvestPush { i: u64, index: u64 },
    HarvestCloudberry,
    HarvestSync,
    Step { bit: u64, step: u64, branch: Branch },
    StepSync { bit: u64, step: u64 },
}

/// Provenance of the current descriptor. Phases are reported by `d` itself
/// (1, 2, 4, ...), not by their position in the doubling loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub phase: u64,
    pub part: Part,
    /// Position of the descriptor inside the phase's decomposition.
    pub index: u64,
}

impl Context {
    fn phase_start(d: u64) -> Context {
        let part = if d > 1 { Part::HarvestPush { i: 1, index: 0 } } else { Part::HarvestCloudberry };
        Context { phase: d, part, index: 0 }
    }

    /// The final synchronization `RepeatSeed` of the phase.
    pub fn is_last_in_phase(&self) -> bool {
        matches!(self.part, Part::StepSync { bit, step } if bit == self.phase && step + 1 == steps_per_bit(self.phase))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}:", self.phase)?;
        match self.part {
            Part::HarvestPush { i, index } => write!(f, "push({i})#{index}"),
            Part::HarvestCloudberry => write!(f, "harvest-cloudberry"),
            Part::HarvestSync => write!(f, "harvest-sync"),
            Part::Step { bit, step, branch } => {
                let b = if branch == Branch::Berry { "berry" } else { "cloudberry" };
                write!(f, "step({bit},{step},{b})")
            }
            Part::StepSync { bit, step } => write!(f, "sync({bit},{step})"),
        }
    }
}

/// How much of the program a cursor covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Forever,
    Assumption(u64),
    Harvest(u64),
    PushPattern(u64, u64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RouteCursor {
    program: AgentProgram,
    scope: Scope,
    ctx: Context,
    route: PatternRoute,
    /// Moves of every completed descriptor.
    done_moves: Tally,
    descriptors_done: u64,
    finished: bool,
    #[serde(skip)]
    push_source: Option<(u64, Arc<Vec<PatternDescriptor>>)>,
}

fn step_radius(d: u64, bit: u64, step: u64) -> u64 {
    r_u64(d) + 3 * d * ((bit - 1) * steps_per_bit(d) + step)
}

impl RouteCursor {
    pub fn new(program: AgentProgram, scope: Scope) -> Result<RouteCursor, DecompositionError> {
        let ctx = match scope {
            Scope::Forever => Context::phase_start(1),
            Scope::Assumption(d) | Scope::Harvest(d) => {
                bd(Call::Harvest(d), &program.transformed)?;
                Context::phase_start(d)
            }
            Scope::PushPattern(i, d) => {
                bd(Call::PushPattern(i, d), &program.transformed)?;
                Context { phase: d, part: Part::HarvestPush { i, index: 0 }, index: 0 }
            }
        };
        let mut cursor = RouteCursor {
            route: PatternDescriptor::Seed(0).route(program.start),
            program,
            scope,
            ctx,
            done_moves: Tally::new(),
            descriptors_done: 0,
            finished: false,
            push_source: None,
        };
        cursor.route = cursor.descriptor_for(ctx).route(cursor.program.start);
        Ok(cursor)
    }

    fn source(&mut self, i: u64) -> Arc<Vec<PatternDescriptor>> {
        match &self.push_source {
            Some((j, s)) if *j == i => s.clone(),
            _ => {
                let s = bd(Call::Assumption(i), &self.program.transformed).expect("valid phase");
                self.push_source = Some((i, s.clone()));
                s
            }
        }
    }

    fn descriptor_for(&mut self, ctx: Context) -> PatternDescriptor {
        let d = ctx.phase;
        match ctx.part {
            Part::HarvestPush { i, index } => push_image(&self.source(i)[index as usize], d),
            Part::HarvestCloudberry => PatternDescriptor::Cloudberry(rho_u64(d), d, d, 0),
            Part::HarvestSync => PatternDescriptor::RepeatSeed(r_u64(d), cloudberry_cost(rho_u64(d), d, d)),
            Part::Step { bit, step, branch } => {
                branch_descriptor(branch == Branch::Cloudberry, step_radius(d, bit, step), d, step)
            }
            Part::StepSync { bit, step } => sync_descriptor(step_radius(d, bit, step), d),
        }
    }

    fn step_ctx(&self, bit: u64, step: u64) -> Part {
        let branch = if self.program.transformed.bit_at(bit) { Branch::Cloudberry } else { Branch::Berry };
        Part::Step { bit, step, branch }
    }

    fn next_ctx(&mut self, ctx: Context) -> Option<Context> {
        let d = ctx.phase;
        let part = match ctx.part {
            Part::HarvestPush { i, index } => {
                if index + 1 < self.source(i).len() as u64 {
                    Part::HarvestPush { i, index: index + 1 }
                } else if matches!(self.scope, Scope::PushPattern(..)) {
                    return None;
                } else if 2 * i < d {
                    Part::HarvestPush { i: 2 * i, index: 0 }
                } else {
                    Part::HarvestCloudberry
                }
            }
            Part::HarvestCloudberry => Part::HarvestSync,
            Part::HarvestSync => {
                if matches!(self.scope, Scope::Harvest(_)) {
                    return None;
                }
                self.step_ctx(1, 0)
            }
            Part::Step { bit, step, .. } => Part::StepSync { bit, step },
            Part::StepSync { bit, step } => {
                if step + 1 < steps_per_bit(d) {
                    self.step_ctx(bit, step + 1)
                } else if bit < d {
                    self.step_ctx(bit + 1, 0)
                } else if matches!(self.scope, Scope::Forever) {
                    return Some(Context::phase_start(2 * d));
                } else {
                    return None;
                }
            }
        };
        Some(Context { phase: d, part, index: ctx.index + 1 })
    }

    pub fn program(&self) -> &AgentProgram {
        &self.program
    }

    pub fn context(&self) -> Context {
        self.ctx
    }

    pub fn descriptor(&self) -> &PatternDescriptor {
        self.route.descriptor()
    }

    pub fn route(&self) -> &PatternRoute {
        &self.route
    }

    pub fn route_mut(&mut self) -> &mut PatternRoute {
        &mut self.route
    }

    pub fn position(&self) -> Node {
        self.route.position()
    }

    /// Total moves emitted since the start of the cursor.
    pub fn emitted(&self) -> Count {
        self.done_moves.value() + self.route.emitted()
    }

    pub fn descriptors_done(&self) -> u64 {
        self.descriptors_done
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Moves to the next descriptor. The current route must be exhausted.
    pub fn finish_descriptor(&mut self) {
        assert!(self.route.is_finished(), "descriptor still has moves");
        assert!(!self.finished, "cursor already finished");
        debug_assert_eq!(self.route.position(), self.program.start, "patterns are closed walks");
        self.done_moves.add(self.route.total());
        self.descriptors_done += 1;
        match self.next_ctx(self.ctx) {
            Some(ctx) => {
                self.ctx = ctx;
                self.route = self.descriptor_for(ctx).route(self.program.start);
            }
            None => self.finished = true,
        }
    }

    pub fn next_move(&mut self) -> Option<Direction> {
        loop {
            if self.finished {
                return None;
            }
            if let Some(d) = self.route.next_move() {
                return Some(d);
            }
            self.finish_descriptor();
        }
    }

    /// Skips straight to the start of the next descriptor.
    pub fn skip_descriptor(&mut self) {
        let rest = self.route.remaining();
        self.route.advance(&rest);
        self.finish_descriptor();
    }
}

/// The infinite program: `Assumption(1)`, `Assumption(2)`, `Assumption(4)`, ...
pub fn rv_route(program: AgentProgram) -> RouteCursor {
    RouteCursor::new(program, Scope::Forever).expect("phase 1 is valid")
}

pub fn assumption_route(label: u64, d: u64) -> Result<RouteCursor, DecompositionError> {
    RouteCursor::new(AgentProgram::new(label, Node::ORIGIN), Scope::Assumption(d))
}

pub fn harvest_route(label: u64, d: u64) -> Result<RouteCursor, DecompositionError> {
    RouteCursor::new(AgentProgram::new(label, Node::ORIGIN), Scope::Harvest(d))
}

pub fn pushpattern_route(label: u64, i: u64, d: u64) -> Result<RouteCursor, DecompositionError> {
    RouteCursor::new(AgentProgram::new(label, Node::ORIGIN), Scope::PushPattern(i, d))
}
