//! Closed-form continuous covariance kernels on an interval.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A symmetric positive-definite kernel `K(x, y)` plus what is known about it.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    eval: Arc<KernelFn>,
    sup_norm: Option<f64>,
    continuous: bool,
    support: Option<(f64, f64)>,
}

/// `‖K‖_∞` over `D × D`, either known in closed form or estimated on grid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    pub estimated: bool,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("sup_norm", &self.sup_norm)
            .field("continuous", &self.continuous)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl KernelSpec {
    /// Brownian motion covariance `min(x, y)` on `[0, 1]`; `‖K‖_∞ = 1` at `(1, 1)`.
    pub fn brownian() -> KernelSpec {
        KernelSpec {
            name: "brownian".into(),
            eval: Arc::new(f64::min),
            sup_norm: Some(1.0),
            continuous: true,
            support: Some((0.0, 1.0)),
        }
    }

    /// Ornstein-Uhlenbeck covariance `exp(−|x − y| / ell)`.
    pub fn exponential(ell: f64) -> Result<KernelSpec> {
        check_length_scale(ell)?;
        Ok(KernelSpec {
            name: "exponential".into(),
            eval: Arc::new(move |x, y| (-(x - y).abs() / ell).exp()),
            sup_norm: Some(1.0),
            continuous: true,
            support: None,
        })
    }

    /// Gaussian covariance `exp(−(x − y)² / (2 ell²))`.
    pub fn squared_exponential(ell: f64) -> Result<KernelSpec> {
        check_length_scale(ell)?;
        let denom = 2.0 * ell * ell;
        Ok(KernelSpec {
            name: "squared-exponential".into(),
            eval: Arc::new(move |x, y| (-(x - y) * (x - y) / denom).exp()),
            sup_norm: Some(1.0),
            continuous: true,
            support: None,
        })
    }

    /// Rank-one kernel `K ≡ value`.
    pub fn constant(value: f64) -> Result<KernelSpec> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constant kernel needs a positive value, got {value}"
            )));
        }
        Ok(KernelSpec {
            name: "constant".into(),
            eval: Arc::new(move |_, _| value),
            sup_norm: Some(value),
            continuous: true,
            support: None,
        })
    }

    /// User-supplied kernel. Its sup-norm is unknown and gets estimated on demand.
    pub fn custom<F>(name: impl Into<String>, eval: F) -> KernelSpec
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        KernelSpec {
            name: name.into(),
            eval: Arc::new(eval),
            sup_norm: None,
            continuous: true,
            support: None,
        }
    }

    /// Look a catalog kernel up by its CLI name.
    pub fn from_name(name: &str, ell: Option<f64>, value: Option<f64>) -> Result<KernelSpec> {
        let need_ell =
            || ell.ok_or_else(|| Error::InvalidArgument(format!("kernel `{name}` needs a length-scale")));
        match name {
            "brownian" | "min" => Ok(KernelSpec::brownian()),
            "exponential" | "exp" => KernelSpec::exponential(need_ell()?),
            "squared-exponential" | "se" | "gaussian" => KernelSpec::squared_exponential(need_ell()?),
            "constant" | "one" => KernelSpec::constant(value.unwrap_or(1.0)),
            other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
        }
    }

    /// Declare a closed-form sup-norm for a custom kernel.
    pub fn with_sup_norm(mut self, sup_norm: f64) -> KernelSpec {
        self.sup_norm = Some(sup_norm);
        self
    }

    /// Restrict the interval on which the kernel is a valid covariance.
    pub fn with_support(mut self, a: f64, b: f64) -> KernelSpec {
        self.support = Some((a, b));
        self
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sup_norm(&self) -> Option<f64> {
        self.sup_norm
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// Interval outside which the closed form is not a covariance, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Whether `[a, b]` lies inside the kernel's support.
    pub fn accepts_domain(&self, a: f64, b: f64) -> bool {
        self.support.map_or(true, |(lo, hi)| lo <= a && b <= hi)
    }

    /// Closed-form sup-norm when available, otherwise `max |K|` over node pairs of `grid`.
    pub fn sup_norm_on(&self, grid: &Grid) -> SupNorm {
        if let Some(value) = self.sup_norm {
            return SupNorm {
                value,
                estimated: false,
            };
        }
        let nodes = grid.nodes();
        let mut value = 0.0f64;
        for (i, &x) in nodes.iter().enumerate() {
            for &y in &nodes[i..] {
                value = value.max(self.eval(x, y).abs());
            }
        }
        SupNorm {
            value,
            estimated: true,
        }
    }

    /// `K(x, x) − 2K(x, y) + K(y, y)`, the variance of the increment `Z(x) − Z(y)`.
    pub fn second_difference(&self, x: f64, y: f64) -> f64 {
        self.eval(x, x) - 2.0 * self.eval(x, y) + self.eval(y, y)
    }
}

fn check_length_scale(ell: f64) -> Result<()> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "length-scale must be positive and finite, got {ell}"
        )));
    }
    Ok(())
}

/// `M_ij = K(x_i, x_j)` over the grid nodes.
pub fn gram_matrix(k: &KernelSpec, grid: &Grid) -> DMatrix<f64> {
    gram_matrix_at(k, grid.nodes())
}

/// Gram matrix over an arbitrary point list. Each unordered pair is evaluated once.
pub fn gram_matrix_at(k: &KernelSpec, points: &[f64]) -> DMatrix<f64> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = k.eval(points[i], points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// See [`KernelSpec::second_difference`].
pub fn second_difference(k: &KernelSpec, x: f64, y: f64) -> f64 {
    k.second_difference(x, y)
}
