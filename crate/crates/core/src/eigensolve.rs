//! Symmetric eigensolver and Nyström discretization of the covariance operator
//! `f ↦ ∫ K(·, y) f(y) dy`.
//!
//! With trapezoid weights `W`, the operator becomes `G·W` where `G` is the Gram
//! matrix. We diagonalize the similar symmetric matrix `W^½ G W^½` instead and
//! map its eigenvectors `u` back to sampled eigenfunctions `f = W^{-½} u`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{gram_matrix, KernelSpec};
use crate::spectrum::{EigenPair, Source, Spectrum};

/// Off-diagonal tolerance used by [`nystrom_decompose`], relative to `‖A‖_F`.
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;
/// Sweep budget used by [`nystrom_decompose`].
pub const DEFAULT_MAX_SWEEPS: usize = 60;
/// Default relative drop tolerance: eigenvalues `≤ 1e-12·λ_max` are discarded.
pub const DEFAULT_RELATIVE_DROP: f64 = 1e-12;

/// Eigenvalues sorted non-increasing with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub sweeps_used: usize,
    pub offdiag_norm: f64,
}

/// Cyclic Jacobi diagonalization of a symmetric matrix.
///
/// Sweeps rotate every off-diagonal pair in row order until the off-diagonal
/// Frobenius norm drops to `tol·‖A‖_F`. Entries already below
/// `tol·‖A‖_F / (2n)` are skipped; together they cannot hold the norm above
/// the target.
pub fn jacobi_eigen(a: &DMatrix<f64>, tol: f64, max_sweeps: usize) -> Result<EigenResult> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let scale = a.amax().max(1.0);
    for j in 0..n {
        for i in 0..j {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
            sweeps_used: 0,
            offdiag_norm: 0.0,
        });
    }

    // column-major with a padded leading dimension: the row mirror in `rotate`
    // strides by `ld`, and a power-of-two stride thrashes the cache
    let ld = n + 8;
    let mut m = vec![0.0; ld * n];
    for j in 0..n {
        for i in 0..n {
            m[j * ld + i] = if i < j {
                0.5 * (a[(i, j)] + a[(j, i)])
            } else {
                a[(i, j)]
            };
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            m[j * ld + i] = m[i * ld + j];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let norm = a.norm();
    let target = tol * norm;
    let skip = target / (2.0 * n as f64);
    let mut sweeps = 0;
    let mut off = offdiag_norm(&m, n, ld);

    while off > target {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                offdiag_norm: off,
            });
        }
        for p in 0..n - 1 {
            // column p is authoritative while p pivots; row p is mirrored once afterwards
            for q in p + 1..n {
                let apq = m[p * ld + q];
                if apq.abs() <= skip {
                    continue;
                }
                let app = m[p * ld + p];
                let aqq = m[q * ld + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, n, ld, p, q, c, s);
                m[p * ld + p] = app - t * apq;
                m[q * ld + q] = aqq + t * apq;
                m[q * ld + p] = 0.0;
                m[p * ld + q] = 0.0;
                rotate_columns(&mut v, n, p, q, c, s);
            }
            for r in 0..n {
                m[r * ld + p] = m[p * ld + r];
            }
        }
        sweeps += 1;
        off = offdiag_norm(&m, n, ld);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * ld + j].total_cmp(&m[i * ld + i]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * ld + i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[order[c] * n + r]);
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
        sweeps_used: sweeps,
        offdiag_norm: off,
    })
}

fn offdiag_norm(m: &[f64], n: usize, ld: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += m[j * ld + i] * m[j * ld + i];
            }
        }
    }
    sum.sqrt()
}

/// Apply the plane rotation to columns `p`, `q` of the symmetric matrix and mirror column `q`
/// into row `q`. The four entries of the 2×2 block come out wrong and are overwritten by the caller.
fn rotate(m: &mut [f64], n: usize, ld: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = m.split_at_mut(q * ld);
    let col_p = &mut lo[p * ld..p * ld + n];
    let col_q = &mut hi[..n];
    for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
    for r in 0..n {
        m[r * ld + q] = m[q * ld + r];
    }
}

fn rotate_columns(v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = v.split_at_mut(q * n);
    let col_p = &mut lo[p * n..p * n + n];
    let col_q = &mut hi[..n];
    for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// How small an eigenvalue must be before it is discarded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DropTol {
    Absolute(f64),
    /// Multiple of the largest eigenvalue.
    Relative(f64),
}

impl Default for DropTol {
    fn default() -> Self {
        DropTol::Relative(DEFAULT_RELATIVE_DROP)
    }
}

/// Nyström approximation of the leading eigenpairs of the covariance operator of `k` on `grid`.
///
/// Keeps at most `n_terms` pairs with `λ` above the drop tolerance. Each sampled
/// eigenfunction has unit discrete `L²` norm and its first component exceeding
/// `1e-8` in magnitude is positive.
pub fn nystrom_decompose(k: &KernelSpec, grid: &Grid, n_terms: usize, drop_tol: DropTol) -> Result<Spectrum> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let tol_value = match drop_tol {
        DropTol::Absolute(t) | DropTol::Relative(t) => t,
    };
    if !(tol_value > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "drop tolerance must be positive, got {tol_value}"
        )));
    }
    if !k.accepts_domain(grid.a(), grid.b()) {
        return Err(Error::Domain(format!(
            "kernel `{}` is not a covariance on [{}, {}]",
            k.name(),
            grid.a(),
            grid.b()
        )));
    }

    let n = grid.len();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let mut b = gram_matrix(k, grid);
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] *= sqrt_w[i] * sqrt_w[j];
        }
    }
    let eig = jacobi_eigen(&b, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS)?;

    let lambda_max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let threshold = match drop_tol {
        DropTol::Absolute(t) => t,
        DropTol::Relative(r) => r * lambda_max.max(0.0),
    };

    let mut pairs = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if pairs.len() == n_terms || !(lambda > threshold) {
            break;
        }
        let mut values: Vec<f64> = (0..n).map(|r| eig.eigenvectors[(r, idx)] / sqrt_w[r]).collect();
        let norm = grid
            .integrate(&values.iter().map(|f| f * f).collect::<Vec<_>>())
            .sqrt();
        let flip = values.iter().find(|f| f.abs() > 1e-8).map_or(false, |f| *f < 0.0);
        let factor = if flip { -1.0 / norm } else { 1.0 / norm };
        values.iter_mut().for_each(|f| *f *= factor);
        pairs.push(EigenPair { lambda, values });
    }
    if pairs.is_empty() {
        return Err(Error::EmptySpectrum(threshold));
    }
    Spectrum::new(grid.clone(), pairs, Source::Nystrom)
}

/// `max_i |λ_n f_n(x_i) − Σ_k w_k K(x_i, x_k) f_n(x_k)|` for the pair at `index` (0-based).
pub fn eigen_residual(s: &Spectrum, k: &KernelSpec, index: usize) -> Result<f64> {
    let pair = s
        .pairs()
        .get(index)
        .ok_or_else(|| Error::InvalidArgument(format!("pair {index} out of range for {} pairs", s.len())))?;
    let grid = s.grid();
    let nodes = grid.nodes();
    let wf: Vec<f64> = grid
        .weights()
        .iter()
        .zip(&pair.values)
        .map(|(w, f)| w * f)
        .collect();
    let mut worst = 0.0f64;
    for (i, &x) in nodes.iter().enumerate() {
        let integral: f64 = nodes.iter().zip(&wf).map(|(&y, c)| k.eval(x, y) * c).sum();
        worst = worst.max((pair.lambda * pair.values[i] - integral).abs());
    }
    Ok(worst)
}
