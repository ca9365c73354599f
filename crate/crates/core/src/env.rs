//! RKHS target functions and the Bernoulli bandit environment.
//!
//! Target functions are finite kernel expansions `f = sum_i w_i k(c_i, .)`.
//! Construction only ever rescales the weights by a positive factor, so the
//! result stays in the RKHS with a certified norm; a function that leaves
//! `[0, 1]` on the decision set is rejected, never clipped.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, KernelSpec, Point};

/// Generator used for every random stream in the crate: xoshiro256++
/// seeded through SplitMix64 (`seed_from_u64`).
pub type SimRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Finite decision set of pairwise distinct points of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    points: Vec<Point>,
}

impl DecisionSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "decision set needs at least 2 points, got {}",
                points.len()
            )));
        }
        let d = points[0].dim();
        for p in &points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i].same_as(&points[j]) {
                    return Err(Error::InvalidParameter(format!(
                        "decision set points {j} and {i} coincide: {:?}",
                        points[i].coords()
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    /// Evenly spaced 1-D grid of `m` points on `[lo, hi]`.
    pub fn grid_1d(lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
        }
        let step = (hi - lo) / (m - 1) as f64;
        let pts = (0..m)
            .map(|i| Point::scalar(lo + step * i as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, arm: usize) -> Result<&Point> {
        self.points.get(arm).ok_or(Error::ArmOutOfRange {
            index: arm,
            arms: self.points.len(),
        })
    }

    pub fn index_of(&self, x: &Point) -> Option<usize> {
        self.points.iter().position(|p| p.same_as(x))
    }
}

/// Finite kernel expansion with a certified RKHS norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsFunction {
    kernel: KernelSpec,
    centers: Vec<Point>,
    weights: Vec<f64>,
    norm_bound: f64,
}

impl RkhsFunction {
    /// Builds the expansion without checking the norm against `norm_bound`.
    /// Use [`make_bounded_function`] for a certified instance.
    pub fn from_parts(
        kernel: KernelSpec,
        centers: Vec<Point>,
        weights: Vec<f64>,
        norm_bound: f64,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidParameter("function needs at least one center".into()));
        }
        if centers.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight {w}")));
        }
        let d = centers[0].dim();
        if let Some(c) = centers.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.dim(),
            });
        }
        if !(norm_bound.is_finite() && norm_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm bound must be finite and > 0, got {norm_bound}"
            )));
        }
        Ok(Self {
            kernel,
            centers,
            weights,
            norm_bound,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The bound `B` this function was certified against.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `f(x) = sum_i w_i k(c_i, x)`.
    pub fn eval(&self, x: &Point) -> Result<f64> {
        let d = self.centers[0].dim();
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.dim(),
            });
        }
        Ok(self
            .centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.eval_unchecked(c, x))
            .sum())
    }

    /// `sqrt(w^T K_c w)`.
    pub fn rkhs_norm(&self) -> Result<f64> {
        let k = gram_matrix(&self.kernel, &self.centers)?;
        let n = self.weights.len();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += self.weights[i] * k[(i, j)] * self.weights[j];
            }
        }
        if q < -1e-10 {
            return Err(Error::Numeric(format!(
                "negative RKHS quadratic form {q}: Gram matrix of centers is not PSD"
            )));
        }
        Ok(q.max(0.0).sqrt())
    }
}

pub fn f_eval(f: &RkhsFunction, x: &Point) -> Result<f64> {
    f.eval(x)
}

pub fn rkhs_norm(f: &RkhsFunction) -> Result<f64> {
    f.rkhs_norm()
}

/// Scales `raw_weights` by the largest `s` in `(0, 1]` keeping the RKHS norm
/// at most `b`, then checks `0 <= f(x) <= 1` on every point of `set`.
pub fn make_bounded_function(
    kernel: KernelSpec,
    centers: Vec<Point>,
    raw_weights: Vec<f64>,
    b: f64,
    set: &DecisionSet,
) -> Result<RkhsFunction> {
    let raw = RkhsFunction::from_parts(kernel, centers, raw_weights, b)?;
    if raw.centers[0].dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: raw.centers[0].dim(),
        });
    }
    let norm = raw.rkhs_norm()?;
    let scale = if norm > b { b / norm } else { 1.0 };
    let weights = raw.weights.iter().map(|w| w * scale).collect();
    let f = RkhsFunction {
        weights,
        ..raw
    };

    let mut bad = Vec::new();
    for x in set.points() {
        let v = f.eval(x)?;
        if !(0.0..=1.0).contains(&v) {
            bad.push((x.coords().to_vec(), v));
        }
    }
    if !bad.is_empty() {
        return Err(Error::RangeViolation(bad));
    }
    Ok(f)
}

/// Bernoulli bandit over a finite decision set.
///
/// Arm means `f(x)` are cached at construction together with the optimum.
#[derive(Debug, Clone)]
pub struct BanditEnvironment {
    f: RkhsFunction,
    set: DecisionSet,
    means: Vec<f64>,
    best_arm: usize,
    best_value: f64,
    rng_seed: u64,
    rng: SimRng,
}

impl BanditEnvironment {
    pub fn new(f: RkhsFunction, set: DecisionSet, rng_seed: u64) -> Result<Self> {
        let means = set
            .points()
            .iter()
            .map(|x| f.eval(x))
            .collect::<Result<Vec<_>>>()?;
        if let Some((i, v)) = means.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::RangeViolation(vec![(set.points()[i].coords().to_vec(), *v)]));
        }
        let (best_arm, best_value) = crate::policy::argmax_lowest(&means)
            .map(|i| (i, means[i]))
            .expect("decision set is nonempty");
        Ok(Self {
            f,
            set,
            means,
            best_arm,
            best_value,
            rng_seed,
            rng: rng_from_seed(rng_seed),
        })
    }

    pub fn function(&self) -> &RkhsFunction {
        &self.f
    }

    pub fn decision_set(&self) -> &DecisionSet {
        &self.set
    }

    pub fn arms(&self) -> usize {
        self.set.len()
    }

    /// Cached `f(x)` for every arm.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: usize) -> Result<f64> {
        self.means.get(arm).copied().ok_or(Error::ArmOutOfRange {
            index: arm,
            arms: self.means.len(),
        })
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// Draws `y ~ Ber(f(x))` for arm index `arm` from the environment stream.
    pub fn pull(&mut self, arm: usize) -> Result<u8> {
        let p = self.mean(arm)?;
        Ok(bernoulli_draw(p, &mut self.rng))
    }

    /// Draws `y ~ Ber(f(x))` for the point `x`, using the supplied generator.
    pub fn sample_reward(&self, x: &Point, rng: &mut impl Rng) -> Result<u8> {
        let arm = self
            .set
            .index_of(x)
            .ok_or_else(|| Error::NotInDecisionSet(x.coords().to_vec()))?;
        Ok(bernoulli_draw(self.means[arm], rng))
    }

    /// `f(x*) - f(x_arm)`.
    pub fn gap(&self, arm: usize) -> Result<f64> {
        Ok(self.best_value - self.mean(arm)?)
    }

    /// `T f(x*) - sum_t f(x_t)` over the given arm indices, accumulated as a
    /// sum of gaps so that playing only `x*` gives exactly zero.
    pub fn cumulative_regret(&self, actions: &[usize]) -> Result<f64> {
        let mut r = 0.0;
        for &a in actions {
            r += self.gap(a)?;
        }
        Ok(r)
    }
}

/// One uniform draw `u` in `[0, 1)`; returns `1` iff `u < p`.
fn bernoulli_draw(p: f64, rng: &mut impl Rng) -> u8 {
    let u: f64 = rng.random();
    u8::from(u < p)
}

/// Per-arm reward sequences: the `n`-th pull of arm `a` always yields the
/// same reward for a given seed, whatever the order in which arms are pulled.
#[derive(Debug, Clone)]
pub struct RewardTape {
    means: Vec<f64>,
    streams: Vec<SimRng>,
}

impl RewardTape {
    pub fn new(means: &[f64], seed: u64) -> Self {
        let streams = (0..means.len() as u64)
            .map(|a| rng_from_seed(seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17)))
            .collect();
        Self {
            means: means.to_vec(),
            streams,
        }
    }

    pub fn for_environment(env: &BanditEnvironment) -> Self {
        Self::new(env.means(), env.seed())
    }

    pub fn pull(&mut self, arm: usize) -> Result<u8> {
        let p = *self.means.get(arm).ok_or(Error::ArmOutOfRange {
            index: arm,
            arms: self.means.len(),
        })?;
        Ok(bernoulli_draw(p, &mut self.streams[arm]))
    }
}
