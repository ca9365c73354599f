//! Bernoulli-native estimators.
//!
//! [`ArmStats`] holds exact per-arm counts for a finite decision set.
//! [`BetaField`] and [`ArmBetaField`] implement the kernel-weighted Beta
//! update, where every sample `(x_s, y_s)` adds `y_s k(x, x_s)` to `alpha(x)`
//! and `(1 - y_s) k(x, x_s)` to `beta(x)`.

use crate::env::DecisionSet;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Point};

/// Pull and success counts per arm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmStats {
    pulls: Vec<u64>,
    successes: Vec<u64>,
}

impl ArmStats {
    pub fn new(arms: usize) -> Self {
        Self {
            pulls: vec![0; arms],
            successes: vec![0; arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn update(&mut self, arm: usize, y: u8) -> Result<()> {
        if arm >= self.pulls.len() {
            return Err(Error::ArmOutOfRange {
                index: arm,
                arms: self.pulls.len(),
            });
        }
        self.pulls[arm] += 1;
        if y == 1 {
            self.successes[arm] += 1;
        }
        Ok(())
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn successes(&self, arm: usize) -> u64 {
        self.successes[arm]
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    /// `S / N`, or `None` for an arm that was never pulled.
    pub fn empirical_mean(&self, arm: usize) -> Option<f64> {
        match self.pulls[arm] {
            0 => None,
            n => Some(self.successes[arm] as f64 / n as f64),
        }
    }

    /// Lowest-index arm with no pulls.
    pub fn first_unexplored(&self) -> Option<usize> {
        self.pulls.iter().position(|&n| n == 0)
    }
}

/// Prior pseudo-counts `(alpha_0, beta_0)`, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrior {
    pub alpha0: f64,
    pub beta0: f64,
}

impl BetaPrior {
    /// Pseudo-count used by [`BetaPrior::vanishing`].
    pub const VANISHING: f64 = 1e-12;

    pub fn new(alpha0: f64, beta0: f64) -> Result<Self> {
        for (name, v) in [("alpha0", alpha0), ("beta0", beta0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { alpha0, beta0 })
    }

    /// `alpha_0 = beta_0 = 1e-12`: the prior is numerically inert once an arm
    /// has data, but still keeps the mean of an all-success arm below 1.
    pub fn vanishing() -> Self {
        Self {
            alpha0: Self::VANISHING,
            beta0: Self::VANISHING,
        }
    }
}

impl Default for BetaPrior {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            beta0: 1.0,
        }
    }
}

/// Beta parameters at one query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    /// `sum_s k(x, x_s)`, i.e. `alpha + beta - alpha_0 - beta_0` without the
    /// cancellation error.
    pub pseudocount: f64,
}

impl BetaParams {
    fn from_sums(prior: BetaPrior, succ: f64, fail: f64) -> Self {
        Self {
            alpha: prior.alpha0 + succ,
            beta: prior.beta0 + fail,
            pseudocount: succ + fail,
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// Kernel-weighted Beta field over an arbitrary sample history.
#[derive(Debug, Clone)]
pub struct BetaField {
    kernel: KernelSpec,
    prior: BetaPrior,
    history: Vec<(Point, u8)>,
}

impl BetaField {
    pub fn new(kernel: KernelSpec, prior: BetaPrior) -> Self {
        Self {
            kernel,
            prior,
            history: Vec::new(),
        }
    }

    pub fn prior(&self) -> BetaPrior {
        self.prior
    }

    pub fn history(&self) -> &[(Point, u8)] {
        &self.history
    }

    pub fn observe(&mut self, x: Point, y: u8) -> Result<()> {
        if y > 1 {
            return Err(Error::InvalidParameter(format!("reward must be 0 or 1, got {y}")));
        }
        if let Some((p, _)) = self.history.first() {
            if p.dim() != x.dim() {
                return Err(Error::DimensionMismatch {
                    expected: p.dim(),
                    found: x.dim(),
                });
            }
        }
        self.history.push((x, y));
        Ok(())
    }

    /// Recomputes `(alpha(x), beta(x))` over the full history.
    pub fn params(&self, x: &Point) -> Result<BetaParams> {
        let mut succ = 0.0;
        let mut fail = 0.0;
        for (xs, y) in &self.history {
            let w = self.kernel.eval(x, xs)?;
            if *y == 1 {
                succ += w;
            } else {
                fail += w;
            }
        }
        Ok(BetaParams::from_sums(self.prior, succ, fail))
    }

    pub fn mean(&self, x: &Point) -> Result<f64> {
        Ok(self.params(x)?.mean())
    }

    pub fn pseudocount(&self, x: &Point) -> Result<f64> {
        Ok(self.params(x)?.pseudocount)
    }
}

pub fn beta_params(field: &BetaField, x: &Point) -> Result<(f64, f64)> {
    let p = field.params(x)?;
    Ok((p.alpha, p.beta))
}

pub fn beta_mean(field: &BetaField, x: &Point) -> Result<f64> {
    field.mean(x)
}

pub fn beta_pseudocount(field: &BetaField, x: &Point) -> Result<f64> {
    field.pseudocount(x)
}

/// Kernel-weighted Beta field on a finite decision set, with running
/// per-arm sums updated in `O(m)` per sample.
#[derive(Debug, Clone)]
pub struct ArmBetaField {
    prior: BetaPrior,
    arms: usize,
    gram: Vec<f64>,
    succ: Vec<f64>,
    fail: Vec<f64>,
    history: Vec<(usize, u8)>,
}

impl ArmBetaField {
    pub fn new(kernel: &KernelSpec, set: &DecisionSet, prior: BetaPrior) -> Self {
        let m = set.len();
        let pts = set.points();
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                gram[i * m + j] = kernel.eval_unchecked(&pts[i], &pts[j]);
            }
        }
        Self {
            prior,
            arms: m,
            gram,
            succ: vec![0.0; m],
            fail: vec![0.0; m],
            history: Vec::new(),
        }
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn prior(&self) -> BetaPrior {
        self.prior
    }

    pub fn history(&self) -> &[(usize, u8)] {
        &self.history
    }

    pub fn observe(&mut self, arm: usize, y: u8) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::ArmOutOfRange {
                index: arm,
                arms: self.arms,
            });
        }
        let m = self.arms;
        let target = if y == 1 { &mut self.succ } else { &mut self.fail };
        for (q, acc) in target.iter_mut().enumerate() {
            *acc += self.gram[q * m + arm];
        }
        self.history.push((arm, y));
        Ok(())
    }

    pub fn params(&self, arm: usize) -> BetaParams {
        BetaParams::from_sums(self.prior, self.succ[arm], self.fail[arm])
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.params(arm).mean()
    }

    pub fn pseudocount(&self, arm: usize) -> f64 {
        self.params(arm).pseudocount
    }

    /// Recomputes the parameters of `arm` from the retained history.
    pub fn replay(&self, arm: usize) -> BetaParams {
        let m = self.arms;
        let (mut s, mut f) = (0.0, 0.0);
        for &(a, y) in &self.history {
            let w = self.gram[arm * m + a];
            if y == 1 {
                s += w;
            } else {
                f += w;
            }
        }
        BetaParams::from_sums(self.prior, s, f)
    }
}
