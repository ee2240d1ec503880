use serde::{Deserialize, Serialize};

use super::AgentId;

/// One adversary decision, as written to a JSON-lines trace. Large numbers
/// and positions are rendered as text so they survive any JSON reader.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub agent: AgentId,
    pub amount: String,
    pub context: String,
    pub before: String,
    pub after: String,
    pub traversals_a: String,
    pub traversals_b: String,
}
