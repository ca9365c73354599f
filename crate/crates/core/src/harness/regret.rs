//! Regret experiments.

use super::config::{ExperimentConfig, ExperimentKind, Instance, PolicyConfig};
use super::Execution;
use crate::env::BanditEnvironment;
use crate::error::{Error, Result};
use crate::policy::PolicyDriver;

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub policy: &'static str,
    pub seed: u64,
    pub t: u64,
    pub arm: usize,
    pub reward: u8,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
}

/// One `(policy, seed)` run of `horizon` rounds, emitting every
/// `record_every`-th round and the last one.
pub fn run_single(
    instance: &Instance,
    policy: &PolicyConfig,
    seed: u64,
    horizon: u64,
    delta: f64,
    record_every: u64,
) -> Result<Vec<RunRecord>> {
    let mut env = BanditEnvironment::new(instance.f.clone(), instance.set.clone(), seed)?;
    let mut driver = PolicyDriver::new(policy.build(instance, env.best_arm(), seed)?);
    driver.reset(&instance.set, horizon, delta)?;
    let name = driver.name();
    let mut records = Vec::with_capacity((horizon / record_every.max(1)) as usize + 1);
    let mut cumulative = 0.0;
    for t in 1..=horizon {
        let arm = driver.select()?;
        let reward = env.pull(arm)?;
        driver.observe(arm, reward)?;
        let instant = env.gap(arm)?;
        cumulative += instant;
        if t % record_every == 0 || t == horizon {
            records.push(RunRecord {
                policy: name,
                seed,
                t,
                arm,
                reward,
                instant_regret: instant,
                cumulative_regret: cumulative,
            });
        }
    }
    Ok(records)
}

/// Runs every `(policy, seed)` pair; output is ordered by policy (config
/// order), then seed (config order), then `t`, in both execution modes.
pub fn run_regret_experiment(config: &ExperimentConfig, seeds: &[u64], exec: Execution) -> Result<Vec<RunRecord>> {
    if config.kind != ExperimentKind::Regret {
        return Err(Error::Config(format!("expected kind `regret`, got `{}`", config.kind.as_str())));
    }
    let instance = Instance::from_config(&config.environment)?;
    let tasks: Vec<(&PolicyConfig, u64)> = config
        .policies
        .iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let runs = exec.map(&tasks, |&(p, s)| {
        run_single(&instance, p, s, config.horizon, config.delta, config.record_every)
    })?;
    Ok(runs.into_iter().flatten().collect())
}
