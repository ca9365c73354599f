//! Coverage experiments: after every round, every bound family is evaluated
//! at every arm against the true mean.

use super::config::{ExperimentConfig, ExperimentKind, Instance, PolicyConfig};
use super::Execution;
use crate::bernoulli::{ArmBetaField, ArmStats, BetaPrior};
use crate::bounds::{
    kl_interval, kl_interval_from, kl_threshold, subgaussian_interval_from, ConfidenceInterval, KlThresholdParams,
    SubgaussianParams,
};
use crate::env::BanditEnvironment;
use crate::error::{Error, Result};
use crate::gp::{greedy_info_gain_curve, ArmPosterior};
use crate::policy::PolicyDriver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundFamily {
    /// GP mean +- subgaussian width, with the observed information gain.
    Subgaussian,
    /// The same interval intersected with `[0, 1]`.
    SubgaussianClipped,
    /// Per-arm KL interval on exact counts.
    Kl,
    /// KL interval around the kernel-weighted Beta mean.
    KernelBetaKl,
    /// Subgaussian interval with the greedy maximum information gain
    /// (summary only).
    SubgaussianGreedyGamma,
    /// KL interval at level `delta / m` (summary only).
    KlUnion,
}

impl BoundFamily {
    /// Families emitted as per-round records.
    pub const RECORDED: [BoundFamily; 4] = [
        BoundFamily::Subgaussian,
        BoundFamily::SubgaussianClipped,
        BoundFamily::Kl,
        BoundFamily::KernelBetaKl,
    ];

    pub const ALL: [BoundFamily; 6] = [
        BoundFamily::Subgaussian,
        BoundFamily::SubgaussianClipped,
        BoundFamily::Kl,
        BoundFamily::KernelBetaKl,
        BoundFamily::SubgaussianGreedyGamma,
        BoundFamily::KlUnion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundFamily::Subgaussian => "subgaussian",
            BoundFamily::SubgaussianClipped => "subgaussian_clipped",
            BoundFamily::Kl => "kl",
            BoundFamily::KernelBetaKl => "kernel_beta_kl",
            BoundFamily::SubgaussianGreedyGamma => "subgaussian_greedy_gamma",
            BoundFamily::KlUnion => "kl_union",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRecord {
    pub family: BoundFamily,
    pub seed: u64,
    pub t: u64,
    pub arm: usize,
    pub lower: f64,
    pub upper: f64,
    pub contains_f: bool,
    pub width: f64,
    /// Pulls of `arm` so far (not written to CSV).
    pub pulls: u64,
}

/// Violation indicators of one family in one run, for one arm or for the
/// whole decision set (`arm == None`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    pub family: BoundFamily,
    pub seed: u64,
    pub arm: Option<usize>,
    pub rounds: u64,
    /// Rounds with at least one violation.
    pub violation_rounds: u64,
    /// `f` left `[lower, upper]` at some round.
    pub any_violation: bool,
    /// `f > upper` at some round.
    pub any_upper_violation: bool,
}

#[derive(Debug, Clone, Default)]
pub struct CoverageOutput {
    pub records: Vec<CoverageRecord>,
    pub summaries: Vec<CoverageSummary>,
}

impl CoverageOutput {
    /// Fraction of runs whose summary row for `(family, arm)` flags a
    /// violation (two-sided, or upper-only).
    pub fn violation_fraction(&self, family: BoundFamily, arm: Option<usize>, upper_only: bool) -> f64 {
        let rows: Vec<_> = self
            .summaries
            .iter()
            .filter(|s| s.family == family && s.arm == arm)
            .collect();
        if rows.is_empty() {
            return 0.0;
        }
        let hits = rows
            .iter()
            .filter(|s| if upper_only { s.any_upper_violation } else { s.any_violation })
            .count();
        hits as f64 / rows.len() as f64
    }
}

#[derive(Debug, Clone, Default)]
struct Tracker {
    violation_rounds: u64,
    any: bool,
    any_upper: bool,
}

impl Tracker {
    fn note(&mut self, violated: bool, upper: bool) {
        if violated {
            self.violation_rounds += 1;
            self.any = true;
        }
        self.any_upper |= upper;
    }
}

struct RunContext<'a> {
    instance: &'a Instance,
    collector: &'a PolicyConfig,
    horizon: u64,
    delta: f64,
    record_every: u64,
    nu2: f64,
    sub: SubgaussianParams,
    kl: KlThresholdParams,
    kl_union: KlThresholdParams,
    prior: BetaPrior,
    greedy: &'a [f64],
}

fn run_single(ctx: &RunContext<'_>, seed: u64) -> Result<CoverageOutput> {
    let inst = ctx.instance;
    let m = inst.set.len();
    let mut env = BanditEnvironment::new(inst.f.clone(), inst.set.clone(), seed)?;
    let mut driver = PolicyDriver::new(ctx.collector.build(inst, env.best_arm(), seed)?);
    driver.reset(&inst.set, ctx.horizon, ctx.delta)?;
    let mut post = ArmPosterior::new(&inst.kernel, &inst.set, ctx.nu2)?;
    let mut stats = ArmStats::new(m);
    let mut field = ArmBetaField::new(&inst.kernel, &inst.set, ctx.prior);

    let nf = BoundFamily::ALL.len();
    let mut per_arm = vec![Tracker::default(); nf * m];
    let mut whole = vec![Tracker::default(); nf];
    let mut out = CoverageOutput::default();

    for t in 1..=ctx.horizon {
        let arm = driver.select()?;
        let y = env.pull(arm)?;
        driver.observe(arm, y)?;
        post.update(arm, f64::from(y))?;
        stats.update(arm, y)?;
        field.observe(arm, y)?;

        let gamma = post.info_gain_observed();
        let gamma_greedy = ctx.greedy[t as usize - 1];
        let thr = kl_threshold(t, &ctx.kl);
        let record = t % ctx.record_every == 0 || t == ctx.horizon;
        let mut round_hit = [(false, false); 6];

        for a in 0..m {
            let f = env.means()[a];
            let (mu, var) = (post.mean(a), post.var(a));
            let sub = subgaussian_interval_from(mu, var, gamma, &ctx.sub);
            let beta = field.params(a);
            let intervals: [ConfidenceInterval; 6] = [
                sub,
                sub.clipped(),
                kl_interval(&stats, a, t, &ctx.kl),
                kl_interval_from(beta.mean(), beta.pseudocount, thr),
                subgaussian_interval_from(mu, var, gamma_greedy, &ctx.sub),
                kl_interval(&stats, a, t, &ctx.kl_union),
            ];
            for (k, ci) in intervals.iter().enumerate() {
                let contains = ci.contains(f);
                let above = f > ci.upper;
                per_arm[k * m + a].note(!contains, above);
                round_hit[k].0 |= !contains;
                round_hit[k].1 |= above;
                if record && k < BoundFamily::RECORDED.len() {
                    out.records.push(CoverageRecord {
                        family: BoundFamily::ALL[k],
                        seed,
                        t,
                        arm: a,
                        lower: ci.lower,
                        upper: ci.upper,
                        contains_f: contains,
                        width: ci.width(),
                        pulls: stats.pulls(a),
                    });
                }
            }
        }
        for (k, &(hit, upper)) in round_hit.iter().enumerate() {
            whole[k].note(hit, upper);
        }
    }

    // Records were pushed arm-major within a round; order them by family.
    out.records.sort_by_key(|r| (r.family, r.t, r.arm));
    for (k, family) in BoundFamily::ALL.iter().enumerate() {
        let row = |arm: Option<usize>, tr: &Tracker| CoverageSummary {
            family: *family,
            seed,
            arm,
            rounds: ctx.horizon,
            violation_rounds: tr.violation_rounds,
            any_violation: tr.any,
            any_upper_violation: tr.any_upper,
        };
        out.summaries.push(row(None, &whole[k]));
        for a in 0..m {
            out.summaries.push(row(Some(a), &per_arm[k * m + a]));
        }
    }
    Ok(out)
}

/// Runs the coverage experiment for every seed. Records and summaries are
/// ordered by seed (config order), then family, then `t`, then arm.
pub fn run_coverage_experiment(config: &ExperimentConfig, seeds: &[u64], exec: Execution) -> Result<CoverageOutput> {
    if config.kind != ExperimentKind::Coverage {
        return Err(Error::Config(format!("expected kind `coverage`, got `{}`", config.kind.as_str())));
    }
    let instance = Instance::from_config(&config.environment)?;
    let est = &config.estimation;
    let m = instance.set.len();
    let greedy = greedy_info_gain_curve(&instance.kernel, &instance.set, config.horizon as usize, est.nu2)?;
    let collector = config.policies.first().cloned().unwrap_or(PolicyConfig::UniformRandom {});
    let ctx = RunContext {
        instance: &instance,
        collector: &collector,
        horizon: config.horizon,
        delta: config.delta,
        record_every: config.record_every,
        nu2: est.nu2,
        sub: SubgaussianParams::new(instance.f.norm_bound(), est.lambda, config.delta)?,
        kl: KlThresholdParams::new(est.c1, est.c2, config.delta)?,
        kl_union: KlThresholdParams::new(est.c1, est.c2, config.delta / m as f64)?,
        prior: BetaPrior::new(est.alpha0, est.beta0)?,
        greedy: &greedy,
    };
    let runs = exec.map(seeds, |&s| run_single(&ctx, s))?;
    let mut out = CoverageOutput::default();
    for r in runs {
        out.records.extend(r.records);
        out.summaries.extend(r.summaries);
    }
    Ok(out)
}
