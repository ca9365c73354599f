//! Gaussian-process posterior under a Gaussian likelihood with variance `nu^2`.
//!
//! [`GpState`] keeps the raw observation list and grows the Cholesky factor
//! of `K_t + nu^2 I` one row at a time. [`ArmPosterior`] is the same
//! posterior restricted to a finite decision set: repeated pulls of one arm
//! collapse to a single observation of the arm's sample mean with noise
//! `nu^2 / N`, so the per-round cost depends on the number of arms rather
//! than on `t`.

use crate::env::DecisionSet;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Point};

const VAR_CLAMP: f64 = 1e-10;

fn clamp_variance(v: f64) -> Result<f64> {
    if v < -VAR_CLAMP {
        Err(Error::Numeric(format!("posterior variance {v} is negative")))
    } else {
        Ok(v.max(0.0))
    }
}

fn check_noise(noise_variance: f64) -> Result<()> {
    if noise_variance.is_finite() && noise_variance > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "noise variance must be finite and > 0, got {noise_variance}"
        )))
    }
}

/// Incremental GP posterior over an arbitrary observation sequence.
#[derive(Debug, Clone)]
pub struct GpState {
    kernel: KernelSpec,
    noise_variance: f64,
    points: Vec<Point>,
    y: Vec<f64>,
    // Packed lower-triangular factor: row i starts at i*(i+1)/2.
    chol: Vec<f64>,
    // L^{-1} y, extended together with the factor.
    whitened_y: Vec<f64>,
}

impl GpState {
    pub fn new(kernel: KernelSpec, noise_variance: f64) -> Result<Self> {
        check_noise(noise_variance)?;
        Ok(Self {
            kernel,
            noise_variance,
            points: Vec::new(),
            y: Vec::new(),
            chol: Vec::new(),
            whitened_y: Vec::new(),
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        match self.points.first() {
            Some(p) if p.dim() != x.dim() => Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: x.dim(),
            }),
            _ => Ok(()),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.chol[start..start + i + 1]
    }

    /// Solves `L v = k_t(x)`.
    fn whiten(&self, x: &Point) -> Vec<f64> {
        let t = self.points.len();
        let mut v = Vec::with_capacity(t);
        for i in 0..t {
            let row = self.row(i);
            let mut s = self.kernel.eval_unchecked(&self.points[i], x);
            for (l, vj) in row[..i].iter().zip(&v) {
                s -= l * vj;
            }
            v.push(s / row[i]);
        }
        v
    }

    /// Appends `(x, y)` and borders the Cholesky factor with one new row.
    pub fn update(&mut self, x: Point, y: u8) -> Result<()> {
        if y > 1 {
            return Err(Error::InvalidParameter(format!("reward must be 0 or 1, got {y}")));
        }
        self.check_dim(&x)?;
        let c = self.whiten(&x);
        let cc: f64 = c.iter().map(|v| v * v).sum();
        let pivot = self.kernel.eval_unchecked(&x, &x) + self.noise_variance - cc;
        if pivot.is_nan() || pivot <= 0.0 {
            return Err(Error::Numeric(format!(
                "non-positive Cholesky pivot {pivot} at t = {}",
                self.points.len() + 1
            )));
        }
        let diag = pivot.sqrt();
        let yf = f64::from(y);
        let zy: f64 = c.iter().zip(&self.whitened_y).map(|(a, b)| a * b).sum();
        self.whitened_y.push((yf - zy) / diag);
        self.chol.extend_from_slice(&c);
        self.chol.push(diag);
        self.points.push(x);
        self.y.push(yf);
        Ok(())
    }

    /// Posterior mean and variance at `x`.
    pub fn mean_var(&self, x: &Point) -> Result<(f64, f64)> {
        self.check_dim(x)?;
        let prior = self.kernel.eval_unchecked(x, x);
        if self.points.is_empty() {
            return Ok((0.0, prior));
        }
        let v = self.whiten(x);
        let mean = v.iter().zip(&self.whitened_y).map(|(a, b)| a * b).sum();
        let var = prior - v.iter().map(|a| a * a).sum::<f64>();
        Ok((mean, clamp_variance(var)?))
    }

    /// `k_t(x)^T (K_t + nu^2 I)^{-1} y_t`.
    pub fn mean(&self, x: &Point) -> Result<f64> {
        Ok(self.mean_var(x)?.0)
    }

    /// `k(x, x) - k_t(x)^T (K_t + nu^2 I)^{-1} k_t(x)`.
    pub fn var(&self, x: &Point) -> Result<f64> {
        Ok(self.mean_var(x)?.1)
    }

    /// `1/2 log det(I + nu^{-2} K_t)` from the factor diagonal.
    pub fn info_gain_observed(&self) -> f64 {
        let t = self.points.len();
        let log_diag: f64 = (0..t).map(|i| self.row(i)[i].ln()).sum();
        log_diag - 0.5 * t as f64 * self.noise_variance.ln()
    }

    /// The factor as a dense lower-triangular matrix.
    pub fn cholesky_factor(&self) -> nalgebra::DMatrix<f64> {
        let t = self.points.len();
        let mut m = nalgebra::DMatrix::zeros(t, t);
        for i in 0..t {
            for (j, v) in self.row(i).iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

pub fn gp_update(state: &mut GpState, x: Point, y: u8) -> Result<()> {
    state.update(x, y)
}

pub fn gp_mean(state: &GpState, x: &Point) -> Result<f64> {
    state.mean(x)
}

pub fn gp_var(state: &GpState, x: &Point) -> Result<f64> {
    state.var(x)
}

pub fn info_gain_observed(state: &GpState) -> f64 {
    state.info_gain_observed()
}

/// In-place Cholesky of a row-major `n x n` SPD matrix; the strict upper
/// triangle is left untouched.
fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(Error::Numeric(format!("non-positive Cholesky pivot {d} at row {j}")));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

fn forward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// GP posterior over the arms of a finite decision set.
///
/// Only per-arm pull counts and reward sums are stored. After every update
/// the posterior mean and variance of all arms and the information gain
/// `1/2 log det(I + nu^{-2} K_t)` of the full pull sequence are refreshed.
#[derive(Debug, Clone)]
pub struct ArmPosterior {
    gram: Vec<f64>,
    arms: usize,
    noise_variance: f64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    t: u64,
    means: Vec<f64>,
    vars: Vec<f64>,
    info_gain: f64,
}

impl ArmPosterior {
    pub fn new(kernel: &KernelSpec, set: &DecisionSet, noise_variance: f64) -> Result<Self> {
        check_noise(noise_variance)?;
        let m = set.len();
        let pts = set.points();
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = kernel.eval_unchecked(&pts[i], &pts[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        let vars = (0..m).map(|i| gram[i * m + i]).collect();
        Ok(Self {
            gram,
            arms: m,
            noise_variance,
            counts: vec![0; m],
            sums: vec![0.0; m],
            t: 0,
            means: vec![0.0; m],
            vars,
            info_gain: 0.0,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn var(&self, arm: usize) -> f64 {
        self.vars[arm]
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn vars(&self) -> &[f64] {
        &self.vars
    }

    pub fn info_gain_observed(&self) -> f64 {
        self.info_gain
    }

    pub fn update(&mut self, arm: usize, y: f64) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::ArmOutOfRange {
                index: arm,
                arms: self.arms,
            });
        }
        self.counts[arm] += 1;
        self.sums[arm] += y;
        self.t += 1;
        self.refresh()
    }

    fn refresh(&mut self) -> Result<()> {
        let m = self.arms;
        let obs: Vec<usize> = (0..m).filter(|&a| self.counts[a] > 0).collect();
        let n = obs.len();

        // A = K_obs + diag(nu^2 / N_a)
        let mut a = vec![0.0; n * n];
        for (i, &ai) in obs.iter().enumerate() {
            for (j, &aj) in obs.iter().enumerate().take(i + 1) {
                a[i * n + j] = self.gram[ai * m + aj];
            }
            a[i * n + i] += self.noise_variance / self.counts[ai] as f64;
        }
        cholesky_in_place(&mut a, n)?;

        let mut z: Vec<f64> = obs
            .iter()
            .map(|&o| self.sums[o] / self.counts[o] as f64)
            .collect();
        forward_solve(&a, n, &mut z);

        let mut v = vec![0.0; n];
        for q in 0..m {
            for (vi, &o) in v.iter_mut().zip(&obs) {
                *vi = self.gram[o * m + q];
            }
            forward_solve(&a, n, &mut v);
            self.means[q] = v.iter().zip(&z).map(|(x, y)| x * y).sum();
            let var = self.gram[q * m + q] - v.iter().map(|x| x * x).sum::<f64>();
            self.vars[q] = clamp_variance(var)?;
        }

        let log_det_a: f64 = (0..n).map(|i| 2.0 * a[i * n + i].ln()).sum();
        let log_counts: f64 = obs.iter().map(|&o| (self.counts[o] as f64).ln()).sum();
        self.info_gain = 0.5 * (log_counts - n as f64 * self.noise_variance.ln() + log_det_a);
        Ok(())
    }
}

/// Greedy information-gain curve: entry `t - 1` is the greedy value for a
/// multiset of `t` points, for `t = 1..=t_max`.
///
/// Each step adds the point of largest current posterior variance (lowest
/// index on ties), whose marginal gain is `1/2 log(1 + sigma^2 / nu^2)`.
pub fn greedy_info_gain_curve(
    kernel: &KernelSpec,
    set: &DecisionSet,
    t_max: usize,
    noise_variance: f64,
) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("empty decision set".into()));
    }
    let mut post = ArmPosterior::new(kernel, set, noise_variance)?;
    let mut total = 0.0;
    let mut curve = Vec::with_capacity(t_max);
    for _ in 0..t_max {
        let best = crate::policy::argmax_lowest(post.vars()).expect("nonempty");
        total += 0.5 * (post.var(best) / noise_variance).ln_1p();
        curve.push(total);
        post.update(best, 0.0)?;
    }
    Ok(curve)
}

/// Greedy approximation of the maximum information gain for `t` points.
pub fn max_info_gain_greedy(
    kernel: &KernelSpec,
    set: &DecisionSet,
    t: usize,
    noise_variance: f64,
) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    Ok(*greedy_info_gain_curve(kernel, set, t, noise_variance)?
        .last()
        .expect("t >= 1"))
}
