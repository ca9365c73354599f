//! Experiment engine and command-line front end.
//!
//! Every `(policy, seed)` run is an independent task that owns its
//! environment and policy; results are merged in task order, so serial and
//! parallel execution produce identical output.

pub mod cli;
pub mod config;
pub mod coverage;
pub mod infogain;
pub mod output;
pub mod regret;

use rayon::prelude::*;

use crate::error::Result;

pub use config::{EnvironmentConfig, EstimationConfig, ExperimentConfig, ExperimentKind, Instance, PolicyConfig, Preset};
pub use coverage::{run_coverage_experiment, BoundFamily, CoverageOutput, CoverageRecord, CoverageSummary};
pub use infogain::{run_info_gain_sweep, InfoGainRow};
pub use regret::{run_regret_experiment, RunRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over `items`, preserving order. The first error (in item
    /// order) is returned.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        match self {
            Execution::Serial => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(&f).collect::<Vec<_>>().into_iter().collect(),
        }
    }
}
