//! The four basic patterns: descriptors, lazy routes, exact costs and reach.

pub mod cost;
pub mod reference;
mod route;
pub(crate) mod shape;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{ball_size_u64, Node};
use crate::Count;

pub use route::{PatternRoute, Sweep, SweepOptions, SweepStats, SweepStop};

/// A symbolic basic-pattern call.
///
/// Parameters other than the repetition count of `RepeatSeed` are `u64`:
/// they are radii and distances, and every route of that size is far beyond
/// what could ever be walked. Repetition counts are costs of other patterns
/// and quickly leave machine range.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternDescriptor {
    Seed(u64),
    RepeatSeed(u64, Count),
    Berry(u64, u64),
    Cloudberry(u64, u64, u64, u64),
}

impl PatternDescriptor {
    pub fn cost(&self) -> Count {
        match *self {
            PatternDescriptor::Seed(x) => cost::seed_cost(x),
            PatternDescriptor::RepeatSeed(x, ref n) => cost::repeat_seed_cost(x, n),
            PatternDescriptor::Berry(x, y) => cost::berry_cost(x, y),
            PatternDescriptor::Cloudberry(x, y, z, _) => cost::cloudberry_cost(x, y, z),
        }
    }

    /// Largest distance from the start node ever reached.
    pub fn bounding_radius(&self) -> u64 {
        match *self {
            PatternDescriptor::Seed(x) | PatternDescriptor::RepeatSeed(x, _) => x,
            PatternDescriptor::Berry(x, y) => x + y,
            PatternDescriptor::Cloudberry(x, y, z, _) => x + y + z,
        }
    }

    pub fn first_param(&self) -> u64 {
        match *self {
            PatternDescriptor::Seed(x)
            | PatternDescriptor::RepeatSeed(x, _)
            | PatternDescriptor::Berry(x, _)
            | PatternDescriptor::Cloudberry(x, _, _, _) => x,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PatternDescriptor::Seed(_) => "Seed",
            PatternDescriptor::RepeatSeed(..) => "RepeatSeed",
            PatternDescriptor::Berry(..) => "Berry",
            PatternDescriptor::Cloudberry(..) => "Cloudberry",
        }
    }

    /// Parameters in declaration order, printed in full decimal.
    pub fn params(&self) -> Vec<String> {
        match self {
            PatternDescriptor::Seed(x) => vec![x.to_string()],
            PatternDescriptor::RepeatSeed(x, n) => vec![x.to_string(), n.to_string()],
            PatternDescriptor::Berry(x, y) => vec![x.to_string(), y.to_string()],
            PatternDescriptor::Cloudberry(x, y, z, h) => {
                vec![x.to_string(), y.to_string(), z.to_string(), h.to_string()]
            }
        }
    }

    pub fn route(&self, origin: Node) -> PatternRoute {
        PatternRoute::new(self.clone(), origin)
    }
}

impl fmt::Display for PatternDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind(), self.params().join(","))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed pattern descriptor `{0}`; expected e.g. Seed(3), RepeatSeed(4,4516), Berry(1,1) or Cloudberry(1,1,1,0)")]
pub struct DescriptorParseError(pub String);

impl FromStr for PatternDescriptor {
    type Err = DescriptorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DescriptorParseError(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        let small = |i: usize| args[i].parse::<u64>().map_err(|_| bad());
        match (s[..open].trim(), args.len()) {
            ("Seed", 1) => Ok(PatternDescriptor::Seed(small(0)?)),
            ("RepeatSeed", 2) => Ok(PatternDescriptor::RepeatSeed(
                small(0)?,
                args[1].parse::<Count>().map_err(|_| bad())?,
            )),
            ("Berry", 2) => Ok(PatternDescriptor::Berry(small(0)?, small(1)?)),
            ("Cloudberry", 4) => Ok(PatternDescriptor::Cloudberry(small(0)?, small(1)?, small(2)?, small(3)?)),
            _ => Err(bad()),
        }
    }
}

pub fn seed_route(x: u64) -> PatternRoute {
    PatternDescriptor::Seed(x).route(Node::ORIGIN)
}

pub fn repeat_seed_route(x: u64, n: Count) -> PatternRoute {
    PatternDescriptor::RepeatSeed(x, n).route(Node::ORIGIN)
}

pub fn berry_route(x: u64, y: u64) -> PatternRoute {
    PatternDescriptor::Berry(x, y).route(Node::ORIGIN)
}

pub fn cloudberry_route(x: u64, y: u64, z: u64, h: u64) -> PatternRoute {
    PatternDescriptor::Cloudberry(x, y, z, h).route(Node::ORIGIN)
}

pub fn cost(p: &PatternDescriptor) -> Count {
    p.cost()
}

pub fn bounding_radius(p: &PatternDescriptor) -> u64 {
    p.bounding_radius()
}

/// Offsets of the ball of radius `z`, in the order `Seed(z)` first visits
/// them from the origin. Cached per `z`.
pub fn first_visit_order(z: u64) -> Arc<Vec<Node>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Node>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&z) {
        return hit.clone();
    }
    let size = ball_size_u64(z) as usize;
    let mut order = Vec::with_capacity(size);
    let mut seen = std::collections::HashSet::with_capacity(size);
    order.push(Node::ORIGIN);
    seen.insert(Node::ORIGIN);
    let mut route = seed_route(z);
    while order.len() < size {
        route.next_move().expect("Seed(z) covers its ball");
        let at = route.position();
        if seen.insert(at) {
            order.push(at);
        }
    }
    let order = Arc::new(order);
    cache.lock().expect("cache poisoned").insert(z, order.clone());
    order
}

#[cfg(test)]
mod tests;
