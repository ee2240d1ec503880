//! Experiment files.
//!
//! ```toml
//! fast_forward = true      # optional, default true
//! trace = false            # optional, default false
//! out = "results"          # optional output directory
//! budget = "1000000000"    # optional default budget; integer or decimal string
//!
//! [[scenario]]
//! labels = [0, 1]
//! offset = [1, 0]
//! strategy = "random:7"    # round_robin[:B], random:SEED[:MAX_LOG][:flip],
//!                          # freeze:AGENT:N, greedy_avoid[:B], mirror_progress[:B]
//! stop_bound = "auto"      # optional: a power of two, or "auto" for d1
//! budget = 5000000         # optional per-scenario budget
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use gridrv::decomposition::cumulative_cost;
use gridrv::grid::Node;
use gridrv::labels::transform;
use gridrv::simulator::{Scenario, StrategySpec};
use gridrv::Count;
use serde::Deserialize;

/// Budget used when neither the scenario nor the file gives one and there
/// is no stop bound to derive it from.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(u64),
    Text(String),
}

impl Number {
    fn count(&self) -> Result<Count> {
        match self {
            Number::Int(n) => Ok(Count::from(*n)),
            Number::Text(s) => s.trim().parse().with_context(|| format!("`{s}` is not a non-negative integer")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Phase(u64),
    /// `"auto"`: the smallest power of two at least `max(D, l')`.
    Keyword(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub labels: [u64; 2],
    pub offset: [i64; 2],
    pub strategy: String,
    #[serde(default)]
    pub stop_bound: Option<Bound>,
    #[serde(default)]
    pub budget: Option<Number>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "yes")]
    pub fast_forward: bool,
    #[serde(default)]
    pub trace: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub budget: Option<Number>,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
}

fn yes() -> bool {
    true
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub budget: Option<Count>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Builds and validates every scenario before anything runs.
    pub fn scenarios(&self, o: &Overrides) -> Result<Vec<Scenario>> {
        self.scenarios
            .iter()
            .enumerate()
            .map(|(i, c)| c.resolve(self.budget.as_ref(), o).with_context(|| format!("scenario {i}")))
            .collect()
    }
}

impl ScenarioConfig {
    pub fn resolve(&self, default_budget: Option<&Number>, o: &Overrides) -> Result<Scenario> {
        let mut strategy: StrategySpec = self.strategy.parse().map_err(anyhow::Error::msg)?;
        if let (Some(seed), StrategySpec::Random { seed: s, .. }) = (o.seed, &mut strategy) {
            *s = seed;
        }
        let mut s = Scenario {
            label_a: self.labels[0],
            label_b: self.labels[1],
            offset: Node::new(self.offset[0], self.offset[1]),
            strategy,
            budget: Count::from(DEFAULT_BUDGET),
            stop_bound: None,
        };
        if s.label_a == s.label_b {
            bail!("labels must differ (both are {})", s.label_a);
        }
        s.stop_bound = match &self.stop_bound {
            None => None,
            Some(Bound::Phase(d)) => Some(*d),
            Some(Bound::Keyword(k)) if k == "auto" => Some(s.good_assumption()?),
            Some(Bound::Keyword(k)) => bail!("stop_bound must be a power of two or \"auto\", not `{k}`"),
        };
        s.validate()?;
        s.budget = match (&o.budget, &self.budget, default_budget) {
            (Some(b), _, _) => b.clone(),
            (None, Some(b), _) | (None, None, Some(b)) => b.count()?,
            (None, None, None) => match s.stop_bound {
                // Enough for both agents to finish the bound phase.
                Some(d) => {
                    cumulative_cost(d, &transform(s.label_a))? + cumulative_cost(d, &transform(s.label_b))? + 1u32
                }
                None => Count::from(DEFAULT_BUDGET),
            },
        };
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn full_file() {
        let c = parse(
            r#"
            budget = "123456789012345678901234567890"
            out = "res"
            [[scenario]]
            labels = [0, 1]
            offset = [1, 0]
            strategy = "round_robin"
            stop_bound = 1
            [[scenario]]
            labels = [2, 5]
            offset = [-1, 2]
            strategy = "random:4"
            stop_bound = "auto"
            budget = 99
            "#,
        );
        assert!(c.fast_forward && !c.trace);
        let s = c.scenarios(&Overrides::default()).unwrap();
        assert_eq!(s[0].stop_bound, Some(1));
        assert_eq!(s[0].budget.to_string(), "123456789012345678901234567890");
        assert_eq!(s[1].stop_bound, Some(8));
        assert_eq!(s[1].budget, Count::from(99u32));
        assert_eq!(s[1].strategy, StrategySpec::random(4));
    }

    #[test]
    fn overrides_win() {
        let c = parse("[[scenario]]\nlabels = [0, 1]\noffset = [0, 3]\nstrategy = \"random:1:flip\"\nbudget = 5\n");
        let o = Overrides { budget: Some(Count::from(7u32)), seed: Some(42) };
        let s = &c.scenarios(&o).unwrap()[0];
        assert_eq!(s.budget, Count::from(7u32));
        assert_eq!(s.strategy, StrategySpec::Random { seed: 42, max_log: 32, flip: true });
    }

    #[test]
    fn bounded_runs_get_a_budget_that_never_binds() {
        let c = parse("[[scenario]]\nlabels = [0, 1]\noffset = [1, 0]\nstrategy = \"greedy_avoid\"\nstop_bound = 1\n");
        let s = &c.scenarios(&Overrides::default()).unwrap()[0];
        let both = cumulative_cost(1, &transform(0)).unwrap() + cumulative_cost(1, &transform(1)).unwrap();
        assert!(s.budget > both);
    }

    #[test]
    fn invalid_scenarios_are_reported() {
        for bad in [
            "[[scenario]]\nlabels = [3, 3]\noffset = [1, 0]\nstrategy = \"round_robin\"\n",
            "[[scenario]]\nlabels = [0, 1]\noffset = [0, 0]\nstrategy = \"round_robin\"\n",
            "[[scenario]]\nlabels = [0, 1]\noffset = [1, 0]\nstrategy = \"random\"\n",
            "[[scenario]]\nlabels = [0, 1]\noffset = [1, 0]\nstrategy = \"round_robin\"\nstop_bound = 3\n",
            "[[scenario]]\nlabels = [0, 1]\noffset = [1, 0]\nstrategy = \"round_robin\"\nstop_bound = \"soon\"\n",
        ] {
            assert!(parse(bad).scenarios(&Overrides::default()).is_err(), "{bad}");
        }
        assert!(toml::from_str::<ExperimentConfig>("colour = 1").is_err());
    }

    #[test]
    fn empty_file_is_fine() {
        let c = parse("");
        assert!(c.scenarios(&Overrides::default()).unwrap().is_empty());
    }
}
