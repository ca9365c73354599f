//! Experiment configuration: JSON schema, presets and validation.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use crate::bernoulli::BetaPrior;
use crate::bounds::{check_delta, KlThresholdParams, SubgaussianParams};
use crate::env::{make_bounded_function, DecisionSet, RkhsFunction};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Point};
use crate::policy::{
    FixedArm, IgpUcb, IgpUcbConfig, KernelBetaUcb, KernelBetaUcbConfig, KlUcb, KlUcbConfig, Policy,
    UniformRandom,
};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_COVERAGE_HORIZON_CAP: u64 = 5000;

/// XOR mask separating a policy's random stream from the environment's.
const POLICY_STREAM: u64 = 0x5851_F42D_4C95_7F2D;

pub fn policy_seed(seed: u64) -> u64 {
    seed ^ POLICY_STREAM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Regret,
    Coverage,
    Infogain,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Regret => "regret",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Infogain => "infogain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Preset {
    /// Ten Delta-kernel arms with means 0.1, ..., 0.9 and 0.85.
    #[serde(rename = "delta10")]
    Delta10,
    /// 25-point grid on [0, 1] under a squared-exponential kernel.
    #[serde(rename = "sqexp25")]
    Sqexp25,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub preset: Option<Preset>,
    pub kernel: Option<KernelSpec>,
    pub points: Option<Vec<Point>>,
    /// Defaults to `points`.
    pub centers: Option<Vec<Point>>,
    pub weights: Option<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
}

impl EnvironmentConfig {
    pub fn preset(p: Preset) -> Self {
        Self {
            preset: Some(p),
            ..Default::default()
        }
    }
}

/// Resolved instance: kernel, decision set and certified target function.
#[derive(Debug, Clone)]
pub struct Instance {
    pub kernel: KernelSpec,
    pub set: DecisionSet,
    pub f: RkhsFunction,
}

impl Instance {
    pub fn from_preset(p: Preset) -> Result<Self> {
        match p {
            Preset::Delta10 => {
                let set = DecisionSet::new((0..10).map(|i| Point::scalar(i as f64)).collect::<Result<_>>()?)?;
                let weights = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.85];
                let f = make_bounded_function(KernelSpec::Delta, set.points().to_vec(), weights, 2.0, &set)?;
                Ok(Self {
                    kernel: KernelSpec::Delta,
                    set,
                    f,
                })
            }
            Preset::Sqexp25 => {
                let kernel = KernelSpec::squared_exponential(0.1)?;
                let set = DecisionSet::grid_1d(0.0, 1.0, 25)?;
                let centers = vec![Point::scalar(0.3)?, Point::scalar(0.75)?];
                let f = make_bounded_function(kernel, centers, vec![0.5, 0.9], 1.1, &set)?;
                Ok(Self { kernel, set, f })
            }
        }
    }

    pub fn from_config(c: &EnvironmentConfig) -> Result<Self> {
        if let Some(p) = c.preset {
            if c.kernel.is_some() || c.points.is_some() || c.centers.is_some() || c.weights.is_some() || c.b.is_some() {
                return Err(Error::Config(
                    "environment: `preset` cannot be combined with explicit fields".into(),
                ));
            }
            return Self::from_preset(p);
        }
        let missing = |name: &str| Error::Config(format!("environment: missing `{name}` (or use `preset`)"));
        let kernel = c.kernel.ok_or_else(|| missing("kernel"))?;
        let points = c.points.clone().ok_or_else(|| missing("points"))?;
        let weights = c.weights.clone().ok_or_else(|| missing("weights"))?;
        let b = c.b.ok_or_else(|| missing("B"))?;
        let set = DecisionSet::new(points).map_err(|e| Error::Config(format!("environment.points: {e}")))?;
        let centers = c.centers.clone().unwrap_or_else(|| set.points().to_vec());
        let f = make_bounded_function(kernel, centers, weights, b, &set)
            .map_err(|e| Error::Config(format!("environment: {e}")))?;
        Ok(Self { kernel, set, f })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    IgpUcb {
        /// Defaults to the environment's certified bound.
        #[serde(rename = "B")]
        b: Option<f64>,
        lambda: Option<f64>,
        nu2: Option<f64>,
        delta: Option<f64>,
    },
    KlUcb {
        c1: Option<f64>,
        c2: Option<f64>,
        delta: Option<f64>,
    },
    KernelBetaUcb {
        alpha0: Option<f64>,
        beta0: Option<f64>,
        /// Use the `alpha0 = beta0 -> 0+` prior; excludes `alpha0`/`beta0`.
        #[serde(default)]
        vanishing_prior: bool,
        c1: Option<f64>,
        c2: Option<f64>,
        delta: Option<f64>,
    },
    UniformRandom {},
    /// Always plays the optimal arm (debug reference).
    Oracle {},
    Fixed {
        arm: usize,
    },
}

impl PolicyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyConfig::IgpUcb { .. } => "igp_ucb",
            PolicyConfig::KlUcb { .. } => "kl_ucb",
            PolicyConfig::KernelBetaUcb { .. } => "kernel_beta_ucb",
            PolicyConfig::UniformRandom {} => "uniform_random",
            PolicyConfig::Oracle {} => "oracle",
            PolicyConfig::Fixed { .. } => "fixed",
        }
    }

    /// Builds a fresh policy. `seed` is the run seed; randomized policies
    /// derive their own stream from it.
    pub fn build(&self, instance: &Instance, best_arm: usize, seed: u64) -> Result<Box<dyn Policy>> {
        let est = EstimationConfig::default();
        Ok(match *self {
            PolicyConfig::IgpUcb { b, lambda, nu2, delta } => Box::new(IgpUcb::new(
                instance.kernel,
                IgpUcbConfig {
                    b: b.unwrap_or(instance.f.norm_bound()),
                    lambda: lambda.unwrap_or(est.lambda),
                    nu2: nu2.unwrap_or(est.nu2),
                    delta,
                },
            )?),
            PolicyConfig::KlUcb { c1, c2, delta } => Box::new(KlUcb::new(KlUcbConfig {
                c1: c1.unwrap_or(est.c1),
                c2: c2.unwrap_or(est.c2),
                delta,
            })?),
            PolicyConfig::KernelBetaUcb {
                alpha0,
                beta0,
                vanishing_prior,
                c1,
                c2,
                delta,
            } => {
                let prior = if vanishing_prior {
                    if alpha0.is_some() || beta0.is_some() {
                        return Err(Error::Config(
                            "kernel_beta_ucb: `vanishing_prior` excludes `alpha0`/`beta0`".into(),
                        ));
                    }
                    BetaPrior::vanishing()
                } else {
                    BetaPrior::new(alpha0.unwrap_or(est.alpha0), beta0.unwrap_or(est.beta0))?
                };
                Box::new(KernelBetaUcb::new(
                    instance.kernel,
                    KernelBetaUcbConfig {
                        prior,
                        kl: KlUcbConfig {
                            c1: c1.unwrap_or(est.c1),
                            c2: c2.unwrap_or(est.c2),
                            delta,
                        },
                    },
                )?)
            }
            PolicyConfig::UniformRandom {} => Box::new(UniformRandom::new(policy_seed(seed))),
            PolicyConfig::Oracle {} => Box::new(FixedArm::oracle(best_arm)),
            PolicyConfig::Fixed { arm } => Box::new(FixedArm::new(arm)),
        })
    }
}

/// Estimator and bound parameters used by the coverage and info-gain
/// experiments (and as policy defaults).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationConfig {
    pub nu2: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            nu2: 0.25,
            lambda: 0.5,
            c1: 1.0,
            c2: 3.0,
            alpha0: 1.0,
            beta0: 1.0,
        }
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_record_every() -> u64 {
    1
}

fn default_cap() -> u64 {
    DEFAULT_COVERAGE_HORIZON_CAP
}

/// Top-level experiment document (`version: 1`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: ExperimentKind,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub policies: Vec<PolicyConfig>,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub estimation: EstimationConfig,
    /// Emit every k-th round (the last round is always emitted).
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default = "default_cap")]
    pub max_coverage_horizon: u64,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Minimal config around an environment, for programmatic use.
    pub fn new(kind: ExperimentKind, environment: EnvironmentConfig, horizon: u64, seeds: Vec<u64>) -> Self {
        Self {
            version: CONFIG_VERSION,
            kind,
            environment,
            policies: Vec::new(),
            horizon,
            seeds,
            delta: default_delta(),
            estimation: EstimationConfig::default(),
            record_every: 1,
            max_coverage_horizon: DEFAULT_COVERAGE_HORIZON_CAP,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return err(format!("unsupported version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.horizon == 0 {
            return err("horizon must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return err("seeds must be nonempty".into());
        }
        let distinct: BTreeSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return err("seeds must be distinct".into());
        }
        check_delta(self.delta).map_err(|e| Error::Config(e.to_string()))?;
        if self.record_every == 0 {
            return err("record_every must be >= 1".into());
        }
        let e = &self.estimation;
        if !(e.nu2.is_finite() && e.nu2 > 0.0) {
            return err(format!("estimation.nu2 must be > 0, got {}", e.nu2));
        }
        SubgaussianParams::new(1.0, e.lambda, self.delta).map_err(|x| Error::Config(format!("estimation: {x}")))?;
        KlThresholdParams::new(e.c1, e.c2, self.delta).map_err(|x| Error::Config(format!("estimation: {x}")))?;
        BetaPrior::new(e.alpha0, e.beta0).map_err(|x| Error::Config(format!("estimation: {x}")))?;

        let mut names = BTreeSet::new();
        for p in &self.policies {
            if !names.insert(p.name()) {
                return err(format!("policy `{}` listed twice", p.name()));
            }
        }
        match self.kind {
            ExperimentKind::Regret if self.policies.is_empty() => {
                err("regret experiments need at least one policy".into())
            }
            ExperimentKind::Coverage if self.policies.len() > 1 => {
                err("coverage experiments take at most one data-collection policy".into())
            }
            ExperimentKind::Coverage if self.horizon > self.max_coverage_horizon => err(format!(
                "coverage horizon {} exceeds max_coverage_horizon {}",
                self.horizon, self.max_coverage_horizon
            )),
            _ => Ok(()),
        }
    }

    /// Seeds shifted by `offset` (wrapping).
    pub fn shifted_seeds(&self, offset: i64) -> Vec<u64> {
        self.seeds.iter().map(|s| s.wrapping_add_signed(offset)).collect()
    }
}
