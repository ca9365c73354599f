//! Positive-definite kernels on `R^d`, Gram matrices and PSD validation.
//!
//! Every family here is stationary and normalised so that `k(x, x) = 1`,
//! which keeps all kernel values in `[0, 1]`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the decision set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point must have dimension >= 1".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate {c}")));
        }
        Ok(Self(coords))
    }

    /// One-dimensional point.
    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Bitwise coordinate equality (`-0.0` and `0.0` differ).
    pub fn same_as(&self, other: &Point) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

/// Half-integer Matérn smoothness values with closed-form kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternNu {
    Half,
    ThreeHalves,
    FiveHalves,
}

impl MaternNu {
    pub fn value(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::ThreeHalves => 1.5,
            MaternNu::FiveHalves => 2.5,
        }
    }

    pub fn from_value(nu: f64) -> Result<Self> {
        if nu == 0.5 {
            Ok(MaternNu::Half)
        } else if nu == 1.5 {
            Ok(MaternNu::ThreeHalves)
        } else if nu == 2.5 {
            Ok(MaternNu::FiveHalves)
        } else {
            Err(Error::InvalidParameter(format!(
                "matern smoothness must be 0.5, 1.5 or 2.5, got {nu}"
            )))
        }
    }
}

/// Kernel family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRepr", into = "KernelRepr")]
pub enum KernelSpec {
    SquaredExponential { lengthscale: f64 },
    Matern { nu: MaternNu, lengthscale: f64 },
    /// Indicator kernel `1{x = x'}`; reduces a kernelized bandit to an
    /// unstructured one.
    Delta,
}

impl KernelSpec {
    pub fn squared_exponential(lengthscale: f64) -> Result<Self> {
        check_lengthscale(lengthscale)?;
        Ok(KernelSpec::SquaredExponential { lengthscale })
    }

    pub fn matern(nu: f64, lengthscale: f64) -> Result<Self> {
        check_lengthscale(lengthscale)?;
        Ok(KernelSpec::Matern {
            nu: MaternNu::from_value(nu)?,
            lengthscale,
        })
    }

    /// Evaluates `k(x, x')`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Same as [`KernelSpec::eval`] for callers that already validated
    /// dimensions.
    pub(crate) fn eval_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match *self {
            KernelSpec::Delta => {
                if x.same_as(y) {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::SquaredExponential { lengthscale } => {
                let r2 = sq_dist(x, y);
                (-r2 / (2.0 * lengthscale * lengthscale)).exp()
            }
            KernelSpec::Matern { nu, lengthscale } => {
                let r = sq_dist(x, y).sqrt() / lengthscale;
                match nu {
                    MaternNu::Half => (-r).exp(),
                    MaternNu::ThreeHalves => {
                        let s = 3f64.sqrt() * r;
                        (1.0 + s) * (-s).exp()
                    }
                    MaternNu::FiveHalves => {
                        let s = 5f64.sqrt() * r;
                        (1.0 + s + 5.0 * r * r / 3.0) * (-s).exp()
                    }
                }
            }
        }
    }
}

fn check_lengthscale(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lengthscale must be finite and > 0, got {l}"
        )))
    }
}

fn sq_dist(x: &Point, y: &Point) -> f64 {
    x.coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Free function form of [`KernelSpec::eval`].
pub fn kernel_eval(spec: &KernelSpec, x: &Point, y: &Point) -> Result<f64> {
    spec.eval(x, y)
}

/// `K[i][j] = k(points[i], points[j])`, filled symmetrically.
pub fn gram_matrix(spec: &KernelSpec, points: &[Point]) -> Result<DMatrix<f64>> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidParameter("gram matrix of an empty point list".into()))?;
    for p in points {
        if p.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: p.dim(),
            });
        }
    }
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval_unchecked(&points[i], &points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// True iff the smallest eigenvalue of the symmetric matrix `m` is `>= -tol`.
pub fn psd_check(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(true);
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min >= -tol)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum KernelRepr {
    Sqexp { lengthscale: f64 },
    Matern { nu: f64, lengthscale: f64 },
    Delta {},
}

impl TryFrom<KernelRepr> for KernelSpec {
    type Error = Error;
    fn try_from(r: KernelRepr) -> Result<Self> {
        match r {
            KernelRepr::Sqexp { lengthscale } => KernelSpec::squared_exponential(lengthscale),
            KernelRepr::Matern { nu, lengthscale } => KernelSpec::matern(nu, lengthscale),
            KernelRepr::Delta {} => Ok(KernelSpec::Delta),
        }
    }
}

impl From<KernelSpec> for KernelRepr {
    fn from(k: KernelSpec) -> Self {
        match k {
            KernelSpec::SquaredExponential { lengthscale } => KernelRepr::Sqexp { lengthscale },
            KernelSpec::Matern { nu, lengthscale } => KernelRepr::Matern {
                nu: nu.value(),
                lengthscale,
            },
            KernelSpec::Delta => KernelRepr::Delta {},
        }
    }
}
