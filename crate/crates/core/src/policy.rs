//! Sequential decision rules over a finite decision set.
//!
//! A policy sees the decision set, the horizon, the confidence level and its
//! own reward history; it never sees the target function or the environment
//! stream. [`PolicyDriver`] wraps any [`Policy`] and enforces the
//! `reset -> (select -> observe)*` protocol.

use rand::Rng;

use crate::bernoulli::{ArmBetaField, ArmStats, BetaPrior};
use crate::bounds::{check_delta, kl_threshold, kl_upper_index, KlThresholdParams, SubgaussianParams};
use crate::env::{rng_from_seed, DecisionSet, SimRng};
use crate::error::{Error, Result};
use crate::gp::ArmPosterior;
use crate::kernel::KernelSpec;

/// Index of the largest value; the lowest index wins ties. NaNs are skipped.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    /// Clears all state for a fresh run.
    fn reset(&mut self, set: &DecisionSet, horizon: u64, delta: f64) -> Result<()>;

    /// Chooses the arm for round `t` (1-based).
    fn select(&mut self, t: u64) -> usize;

    fn observe(&mut self, arm: usize, y: u8) -> Result<()>;
}

/// Enforces the policy protocol and validates every returned arm.
pub struct PolicyDriver {
    policy: Box<dyn Policy>,
    arms: Option<usize>,
    pending: Option<usize>,
    round: u64,
}

impl PolicyDriver {
    pub fn new(policy: Box<dyn Policy>) -> Self {
        Self {
            policy,
            arms: None,
            pending: None,
            round: 0,
        }
    }

    pub fn name(&self) -> &'static str {
        self.policy.name()
    }

    pub fn reset(&mut self, set: &DecisionSet, horizon: u64, delta: f64) -> Result<()> {
        self.policy.reset(set, horizon, delta)?;
        self.arms = Some(set.len());
        self.pending = None;
        self.round = 0;
        Ok(())
    }

    pub fn select(&mut self) -> Result<usize> {
        let arms = self
            .arms
            .ok_or_else(|| Error::Contract("select called before reset".into()))?;
        if let Some(p) = self.pending {
            return Err(Error::Contract(format!(
                "select called twice without observe (arm {p} pending)"
            )));
        }
        let t = self.round + 1;
        let arm = self.policy.select(t);
        if arm >= arms {
            return Err(Error::Contract(format!(
                "{} returned arm {arm} of {arms} at round {t}",
                self.policy.name()
            )));
        }
        self.pending = Some(arm);
        self.round = t;
        Ok(arm)
    }

    pub fn observe(&mut self, arm: usize, y: u8) -> Result<()> {
        if y > 1 {
            return Err(Error::Contract(format!("reward must be 0 or 1, got {y}")));
        }
        match self.pending.take() {
            Some(p) if p == arm => {}
            Some(p) => {
                self.pending = Some(p);
                return Err(Error::Contract(format!("observe for arm {arm} but arm {p} was selected")));
            }
            None => return Err(Error::Contract("observe called without a pending select".into())),
        }
        self.policy.observe(arm, y)
    }

    pub fn round(&self) -> u64 {
        self.round
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgpUcbConfig {
    pub b: f64,
    pub lambda: f64,
    pub nu2: f64,
    /// Overrides the `delta` passed to `reset` when set.
    pub delta: Option<f64>,
}

/// GP-UCB with the self-normalized width and the plug-in information gain
/// of the pulled arms.
pub struct IgpUcb {
    kernel: KernelSpec,
    config: IgpUcbConfig,
    params: Option<SubgaussianParams>,
    posterior: Option<ArmPosterior>,
}

impl IgpUcb {
    pub fn new(kernel: KernelSpec, config: IgpUcbConfig) -> Result<Self> {
        SubgaussianParams::new(config.b, config.lambda, config.delta.unwrap_or(0.5))?;
        if !(config.nu2.is_finite() && config.nu2 > 0.0) {
            return Err(Error::InvalidParameter(format!("nu2 must be > 0, got {}", config.nu2)));
        }
        Ok(Self {
            kernel,
            config,
            params: None,
            posterior: None,
        })
    }

    pub fn posterior(&self) -> Option<&ArmPosterior> {
        self.posterior.as_ref()
    }

    /// `mu(x) + width(gamma) sigma(x)` for every arm.
    pub fn indices(&self) -> Vec<f64> {
        let (Some(post), Some(params)) = (&self.posterior, &self.params) else {
            return Vec::new();
        };
        let w = params.width(post.info_gain_observed());
        post.means()
            .iter()
            .zip(post.vars())
            .map(|(m, v)| m + w * v.sqrt())
            .collect()
    }
}

impl Policy for IgpUcb {
    fn name(&self) -> &'static str {
        "igp_ucb"
    }

    fn reset(&mut self, set: &DecisionSet, _horizon: u64, delta: f64) -> Result<()> {
        let delta = self.config.delta.unwrap_or(delta);
        self.params = Some(SubgaussianParams::new(self.config.b, self.config.lambda, delta)?);
        self.posterior = Some(ArmPosterior::new(&self.kernel, set, self.config.nu2)?);
        Ok(())
    }

    fn select(&mut self, _t: u64) -> usize {
        argmax_lowest(&self.indices()).unwrap_or(0)
    }

    fn observe(&mut self, arm: usize, y: u8) -> Result<()> {
        let post = self
            .posterior
            .as_mut()
            .ok_or_else(|| Error::Contract("observe before reset".into()))?;
        post.update(arm, f64::from(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlUcbConfig {
    pub c1: f64,
    pub c2: f64,
    pub delta: Option<f64>,
}

impl Default for KlUcbConfig {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 3.0,
            delta: None,
        }
    }
}

impl KlUcbConfig {
    fn resolve(&self, delta: f64) -> Result<KlThresholdParams> {
        KlThresholdParams::new(self.c1, self.c2, self.delta.unwrap_or(delta))
    }
}

/// KL-UCB on per-arm counts; plays every arm once before using indices.
pub struct KlUcb {
    config: KlUcbConfig,
    params: Option<KlThresholdParams>,
    stats: ArmStats,
}

impl KlUcb {
    pub fn new(config: KlUcbConfig) -> Result<Self> {
        config.resolve(0.5)?;
        Ok(Self {
            config,
            params: None,
            stats: ArmStats::new(0),
        })
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    /// Upper KL index of every explored arm at round `t` (1.0 if unexplored).
    pub fn indices(&self, t: u64) -> Vec<f64> {
        let Some(params) = &self.params else {
            return Vec::new();
        };
        let thr = kl_threshold(t, params);
        (0..self.stats.arms())
            .map(|a| match self.stats.empirical_mean(a) {
                None => 1.0,
                Some(m) => kl_upper_index(m, self.stats.pulls(a) as f64, thr),
            })
            .collect()
    }
}

impl Policy for KlUcb {
    fn name(&self) -> &'static str {
        "kl_ucb"
    }

    fn reset(&mut self, set: &DecisionSet, _horizon: u64, delta: f64) -> Result<()> {
        self.params = Some(self.config.resolve(delta)?);
        self.stats = ArmStats::new(set.len());
        Ok(())
    }

    fn select(&mut self, t: u64) -> usize {
        if let Some(a) = self.stats.first_unexplored() {
            return a;
        }
        argmax_lowest(&self.indices(t)).unwrap_or(0)
    }

    fn observe(&mut self, arm: usize, y: u8) -> Result<()> {
        self.stats.update(arm, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelBetaUcbConfig {
    pub prior: BetaPrior,
    pub kl: KlUcbConfig,
}

/// Experimental index: the upper KL index evaluated at the kernel-weighted
/// Beta mean with the kernel pseudocount in place of `N`.
///
/// There is no forced initialization; an arm with zero pseudocount gets
/// index 1.
pub struct KernelBetaUcb {
    kernel: KernelSpec,
    config: KernelBetaUcbConfig,
    params: Option<KlThresholdParams>,
    field: Option<ArmBetaField>,
}

impl KernelBetaUcb {
    pub fn new(kernel: KernelSpec, config: KernelBetaUcbConfig) -> Result<Self> {
        config.kl.resolve(0.5)?;
        BetaPrior::new(config.prior.alpha0, config.prior.beta0)?;
        Ok(Self {
            kernel,
            config,
            params: None,
            field: None,
        })
    }

    pub fn field(&self) -> Option<&ArmBetaField> {
        self.field.as_ref()
    }

    pub fn indices(&self, t: u64) -> Vec<f64> {
        let (Some(field), Some(params)) = (&self.field, &self.params) else {
            return Vec::new();
        };
        let thr = kl_threshold(t, params);
        (0..field.arms())
            .map(|a| {
                let p = field.params(a);
                kl_upper_index(p.mean(), p.pseudocount, thr)
            })
            .collect()
    }
}

impl Policy for KernelBetaUcb {
    fn name(&self) -> &'static str {
        "kernel_beta_ucb"
    }

    fn reset(&mut self, set: &DecisionSet, _horizon: u64, delta: f64) -> Result<()> {
        self.params = Some(self.config.kl.resolve(delta)?);
        self.field = Some(ArmBetaField::new(&self.kernel, set, self.config.prior));
        Ok(())
    }

    fn select(&mut self, t: u64) -> usize {
        argmax_lowest(&self.indices(t)).unwrap_or(0)
    }

    fn observe(&mut self, arm: usize, y: u8) -> Result<()> {
        self.field
            .as_mut()
            .ok_or_else(|| Error::Contract("observe before reset".into()))?
            .observe(arm, y)
    }
}

/// Uniformly random arm from the policy's own xoshiro stream.
pub struct UniformRandom {
    seed: u64,
    rng: SimRng,
    arms: usize,
}

impl UniformRandom {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: rng_from_seed(seed),
            arms: 0,
        }
    }
}

impl Policy for UniformRandom {
    fn name(&self) -> &'static str {
        "uniform_random"
    }

    fn reset(&mut self, set: &DecisionSet, _horizon: u64, delta: f64) -> Result<()> {
        check_delta(delta)?;
        self.rng = rng_from_seed(self.seed);
        self.arms = set.len();
        Ok(())
    }

    fn select(&mut self, _t: u64) -> usize {
        if self.arms <= 1 {
            return 0;
        }
        self.rng.random_range(0..self.arms)
    }

    fn observe(&mut self, _arm: usize, _y: u8) -> Result<()> {
        Ok(())
    }
}

/// Always plays one arm. With the optimal arm this is the zero-regret
/// reference used to check regret bookkeeping.
pub struct FixedArm {
    arm: usize,
    label: &'static str,
}

impl FixedArm {
    pub fn new(arm: usize) -> Self {
        Self { arm, label: "fixed" }
    }

    pub fn oracle(best_arm: usize) -> Self {
        Self {
            arm: best_arm,
            label: "oracle",
        }
    }
}

impl Policy for FixedArm {
    fn name(&self) -> &'static str {
        self.label
    }

    fn reset(&mut self, set: &DecisionSet, _horizon: u64, _delta: f64) -> Result<()> {
        if self.arm >= set.len() {
            return Err(Error::ArmOutOfRange {
                index: self.arm,
                arms: set.len(),
            });
        }
        Ok(())
    }

    fn select(&mut self, _t: u64) -> usize {
        self.arm
    }

    fn observe(&mut self, _arm: usize, _y: u8) -> Result<()> {
        Ok(())
    }
}
