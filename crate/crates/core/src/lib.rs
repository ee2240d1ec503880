//! Deterministic rendezvous of two labeled agents on the infinite oriented
//! grid, with an adversarial asynchronous simulator.
//!
//! Layout, bottom-up:
//!
//! * [`grid`]: nodes, directions, canonical paths, exact positions.
//! * [`labels`]: label transformation and the first differing bit.
//! * [`patterns`]: the four basic patterns as lazy routes, with exact costs.
//! * [`decomposition`]: the integer sequences and basic decompositions.
//! * [`agent`]: the whole infinite program of one agent as a cursor.
//! * [`simulator`]: adversaries, meeting detection and fast-forwarding.
//! * [`batch`], [`verify`]: experiment plumbing for the CLI.

pub mod agent;
pub mod batch;
pub mod decomposition;
pub mod grid;
pub mod labels;
pub mod patterns;
pub mod simulator;
pub mod tally;
pub mod verify;

/// Unbounded non-negative integer used for costs, repetition counts and
/// traversal counters.
pub type Count = num_bigint::BigUint;

pub use tally::Tally;
