//! Gaussian sample paths of the truncated expansion `Z = Σ_{j≤N} √λ_j ξ_j f_j`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::standard_normal;
use crate::spectrum::Spectrum;

/// `paths[(p, i)] = Z_p(x_i)`.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    pub n_terms: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub nodes: Vec<f64>,
    pub paths: DMatrix<f64>,
}

/// Sample covariance of an ensemble with entrywise standard errors.
#[derive(Clone, Debug)]
pub struct CovarianceEstimate {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    /// `√((Ĉ_ii Ĉ_jj + Ĉ_ij²) / M)`.
    pub stderr: DMatrix<f64>,
    pub n_paths: usize,
}

/// Draw `n_paths` paths using the first `n_terms` pairs.
///
/// `ξ_{p,j}` comes from stream position `(path p, term j)`, so the result is
/// independent of how paths are split across threads.
pub fn sample_paths(s: &Spectrum, n_terms: usize, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    if n_terms == 0 || n_terms > s.len() {
        return Err(Error::InvalidArgument(format!(
            "n_terms = {n_terms} outside 1..={}",
            s.len()
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let pairs = &s.pairs()[..n_terms];
    let roots: Vec<f64> = pairs.iter().map(|p| p.lambda.sqrt()).collect();
    let n_nodes = s.grid().len();

    let rows: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut z = vec![0.0; n_nodes];
            for (j, (pair, root)) in pairs.iter().zip(&roots).enumerate() {
                let coef = root * standard_normal(seed, p, j as u64);
                for (zi, f) in z.iter_mut().zip(&pair.values) {
                    *zi += coef * f;
                }
            }
            z
        })
        .collect();

    let paths = DMatrix::from_fn(n_paths, n_nodes, |p, i| rows[p][i]);
    Ok(PathEnsemble {
        n_terms,
        n_paths,
        seed,
        nodes: s.grid().nodes().to_vec(),
        paths,
    })
}

/// Unbiased sample covariance across paths.
pub fn empirical_covariance(e: &PathEnsemble) -> Result<CovarianceEstimate> {
    let m = e.paths.nrows();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "covariance needs at least 2 paths, got {m}"
        )));
    }
    let mean: Vec<f64> = (0..e.paths.ncols()).map(|i| e.paths.column(i).mean()).collect();
    let mut centered = e.paths.clone();
    for (i, mu) in mean.iter().enumerate() {
        centered.column_mut(i).add_scalar_mut(-mu);
    }
    let cov = (centered.transpose() * &centered) / (m - 1) as f64;
    let stderr = DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / m as f64).sqrt()
    });
    Ok(CovarianceEstimate {
        mean,
        cov,
        stderr,
        n_paths: m,
    })
}

/// `|Ĉ_ij − K_ij| / stderr_ij` over the upper triangle `i ≤ j`.
///
/// An entry with zero standard error scores 0 when it matches exactly and `∞` otherwise.
pub fn z_scores(est: &CovarianceEstimate, reference: &DMatrix<f64>) -> Vec<f64> {
    let n = est.cov.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for i in 0..=j {
            let diff = (est.cov[(i, j)] - reference[(i, j)]).abs();
            let se = est.stderr[(i, j)];
            out.push(if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            });
        }
    }
    out
}

impl PathEnsemble {
    /// CSV with one row per node: the coordinate, then one column per path.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for p in 0..self.n_paths {
            out.push_str(&format!(",path_{p}"));
        }
        out.push('\n');
        for (i, x) in self.nodes.iter().enumerate() {
            out.push_str(&crate::io::fmt_f64(*x));
            for p in 0..self.n_paths {
                out.push(',');
                out.push_str(&crate::io::fmt_f64(self.paths[(p, i)]));
            }
            out.push('\n');
        }
        out
    }
}
