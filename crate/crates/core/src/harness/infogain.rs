//! Information-gain sweeps: greedy maximum information gain against the
//! gain actually collected along a uniform-random trajectory.

use rand::Rng;

use super::config::{policy_seed, ExperimentConfig, ExperimentKind, Instance};
use super::Execution;
use crate::env::rng_from_seed;
use crate::error::{Error, Result};
use crate::gp::{greedy_info_gain_curve, ArmPosterior};

#[derive(Debug, Clone, PartialEq)]
pub struct InfoGainRow {
    pub seed: u64,
    pub t: u64,
    pub greedy_gamma: f64,
    pub observed_gain: f64,
    /// `observed_gain > greedy_gamma`; possible because the greedy value is
    /// only an approximation of the maximum.
    pub inverted: bool,
}

/// Slack below which an inversion is attributed to rounding.
const INVERSION_TOL: f64 = 1e-9;

pub fn run_info_gain_sweep(config: &ExperimentConfig, seeds: &[u64], exec: Execution) -> Result<Vec<InfoGainRow>> {
    if config.kind != ExperimentKind::Infogain {
        return Err(Error::Config(format!("expected kind `infogain`, got `{}`", config.kind.as_str())));
    }
    let instance = Instance::from_config(&config.environment)?;
    let nu2 = config.estimation.nu2;
    let greedy = greedy_info_gain_curve(&instance.kernel, &instance.set, config.horizon as usize, nu2)?;
    let every = config.record_every;
    let horizon = config.horizon;
    let runs = exec.map(seeds, |&seed| {
        let mut rng = rng_from_seed(policy_seed(seed));
        let mut post = ArmPosterior::new(&instance.kernel, &instance.set, nu2)?;
        let m = instance.set.len();
        let mut rows = vec![InfoGainRow {
            seed,
            t: 0,
            greedy_gamma: 0.0,
            observed_gain: 0.0,
            inverted: false,
        }];
        for t in 1..=horizon {
            // Observed values do not enter the information gain.
            post.update(rng.random_range(0..m), 0.0)?;
            if t % every == 0 || t == horizon {
                let g = greedy[t as usize - 1];
                let o = post.info_gain_observed();
                rows.push(InfoGainRow {
                    seed,
                    t,
                    greedy_gamma: g,
                    observed_gain: o,
                    inverted: o > g + INVERSION_TOL,
                });
            }
        }
        Ok(rows)
    })?;
    Ok(runs.into_iter().flatten().collect())
}
