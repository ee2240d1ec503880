//! Runs many independent scenarios. With the `parallel` feature they are
//! spread over the rayon pool; results keep the input order either way.

use crate::simulator::{run_with, MeetingReport, RunOptions, Scenario, ScenarioError};

pub type Outcome = Result<MeetingReport, ScenarioError>;

pub fn run_sequential(scenarios: &[Scenario], opts: RunOptions) -> Vec<Outcome> {
    scenarios.iter().map(|s| run_with(s, opts)).collect()
}

#[cfg(feature = "parallel")]
pub fn run_parallel(scenarios: &[Scenario], opts: RunOptions) -> Vec<Outcome> {
    use rayon::prelude::*;
    scenarios.par_iter().map(|s| run_with(s, opts)).collect()
}

/// The default path: parallel when compiled in, sequential otherwise.
pub fn run_batch(scenarios: &[Scenario], opts: RunOptions) -> Vec<Outcome> {
    #[cfg(feature = "parallel")]
    {
        run_parallel(scenarios, opts)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(scenarios, opts)
    }
}
