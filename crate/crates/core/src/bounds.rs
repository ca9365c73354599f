//! Confidence bounds for Bernoulli means.
//!
//! Two families: the subgaussian self-normalized envelope
//! `mu +- (B + lambda sqrt(2 (gamma + 1 + ln(1/delta)))) sigma` built on a GP
//! posterior, and KL indices `max { q >= mu : N d(mu, q) <= c1 ln(t/delta)
//! + c2 ln ln(t/delta) }` built on Bernoulli counts.

use crate::bernoulli::ArmStats;
use crate::error::{Error, Result};
use crate::gp::GpState;
use crate::kernel::Point;

/// Absolute bisection tolerance for KL indices.
pub const KL_INDEX_TOL: f64 = 1e-9;
/// Iteration cap for KL index bisection.
pub const KL_INDEX_MAX_ITER: usize = 128;

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower <= upper {
            Ok(Self { lower, upper })
        } else {
            Err(Error::Numeric(format!("interval bounds out of order: [{lower}, {upper}]")))
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Intersection with `[0, 1]`. An interval lying entirely outside
    /// collapses onto the nearest endpoint.
    pub fn clipped(&self) -> Self {
        let lower = self.lower.clamp(0.0, 1.0);
        let upper = self.upper.clamp(0.0, 1.0);
        Self { lower, upper }
    }
}

/// Constants of the KL threshold `c1 ln(t/delta) + c2 ln ln(t/delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlThresholdParams {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
}

impl KlThresholdParams {
    pub fn new(c1: f64, c2: f64, delta: f64) -> Result<Self> {
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::InvalidParameter(format!("c1 must be > 0, got {c1}")));
        }
        if !(c2.is_finite() && c2 >= 0.0) {
            return Err(Error::InvalidParameter(format!("c2 must be >= 0, got {c2}")));
        }
        check_delta(delta)?;
        Ok(Self { c1, c2, delta })
    }

    /// `c1 = 1, c2 = 3`.
    pub fn theoretical(delta: f64) -> Result<Self> {
        Self::new(1.0, 3.0, delta)
    }

    /// `c1 = 1, c2 = 0`.
    pub fn practical(delta: f64) -> Result<Self> {
        Self::new(1.0, 0.0, delta)
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")))
    }
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Bernoulli KL divergence `d(a, b)` with `0 ln 0 = 0`.
pub fn bernoulli_kl(a: f64, b: f64) -> Result<f64> {
    check_prob(a)?;
    check_prob(b)?;
    Ok(kl(a, b))
}

// x ln(x / y), with 0 ln(0 / y) = 0 and x ln(x / 0) = +inf for x > 0.
fn xlog_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

fn kl(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (xlog_ratio(a, b) + xlog_ratio(1.0 - a, 1.0 - b)).max(0.0)
}

/// `c1 ln(t/delta) + c2 max(0, ln ln(t/delta))`.
pub fn kl_threshold(t: u64, params: &KlThresholdParams) -> f64 {
    let l = (t.max(1) as f64 / params.delta).ln();
    let loglog = if l > 1.0 { l.ln() } else { 0.0 };
    (params.c1 * l + params.c2 * loglog).max(0.0)
}

/// Largest `q >= mean` with `count * d(mean, q) <= threshold`.
pub fn kl_upper_index(mean: f64, count: f64, threshold: f64) -> f64 {
    if count <= 0.0 {
        return 1.0;
    }
    if mean >= 1.0 {
        return 1.0;
    }
    if threshold <= 0.0 {
        return mean;
    }
    let budget = threshold / count;
    let (mut lo, mut hi) = (mean, 1.0);
    for _ in 0..KL_INDEX_MAX_ITER {
        if hi - lo <= KL_INDEX_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if kl(mean, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest `q <= mean` with `count * d(mean, q) <= threshold`.
pub fn kl_lower_index(mean: f64, count: f64, threshold: f64) -> f64 {
    if count <= 0.0 {
        return 0.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    if threshold <= 0.0 {
        return mean;
    }
    let budget = threshold / count;
    let (mut lo, mut hi) = (0.0, mean);
    for _ in 0..KL_INDEX_MAX_ITER {
        if hi - lo <= KL_INDEX_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if kl(mean, mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Two-sided KL interval for an arbitrary (mean, count) pair.
pub fn kl_interval_from(mean: f64, count: f64, threshold: f64) -> ConfidenceInterval {
    ConfidenceInterval {
        lower: kl_lower_index(mean, count, threshold),
        upper: kl_upper_index(mean, count, threshold),
    }
}

/// KL interval of `arm` at round `t`; `(0, 1)` for an unexplored arm.
pub fn kl_interval(stats: &ArmStats, arm: usize, t: u64, params: &KlThresholdParams) -> ConfidenceInterval {
    match stats.empirical_mean(arm) {
        None => ConfidenceInterval { lower: 0.0, upper: 1.0 },
        Some(mean) => kl_interval_from(mean, stats.pulls(arm) as f64, kl_threshold(t, params)),
    }
}

/// Parameters of the subgaussian envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgaussianParams {
    /// RKHS norm bound `B`.
    pub b: f64,
    /// Subgaussian constant; `1/2` for Bernoulli noise.
    pub lambda: f64,
    pub delta: f64,
}

impl SubgaussianParams {
    pub fn new(b: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("B must be > 0, got {b}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        check_delta(delta)?;
        Ok(Self { b, lambda, delta })
    }

    pub fn width(&self, gamma: f64) -> f64 {
        subgaussian_width(self.b, self.lambda, gamma, self.delta)
    }
}

/// `B + lambda sqrt(2 (gamma + 1 + ln(1/delta)))`.
pub fn subgaussian_width(b: f64, lambda: f64, gamma: f64, delta: f64) -> f64 {
    b + lambda * (2.0 * (gamma + 1.0 + (1.0 / delta).ln())).sqrt()
}

/// `mean +- width(gamma) sqrt(var)`, unclipped.
pub fn subgaussian_interval_from(mean: f64, var: f64, gamma: f64, params: &SubgaussianParams) -> ConfidenceInterval {
    let half = params.width(gamma) * var.max(0.0).sqrt();
    ConfidenceInterval {
        lower: mean - half,
        upper: mean + half,
    }
}

/// Subgaussian envelope at `x` from a GP state, using the plug-in
/// information gain of the observed points. Not clipped to `[0, 1]`; see
/// [`ConfidenceInterval::clipped`].
pub fn subgaussian_interval(state: &GpState, x: &Point, params: &SubgaussianParams) -> Result<ConfidenceInterval> {
    let (mean, var) = state.mean_var(x)?;
    Ok(subgaussian_interval_from(mean, var, state.info_gain_observed(), params))
}
