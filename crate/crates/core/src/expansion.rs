//! Partial sums of `Σ λ_j f_j ⊗ f_j`, their diagonals `v_n = Σ_{j≤n} λ_j f_j²`,
//! and the two Cauchy gaps that control convergence of the series.
//!
//! Every sum runs over ascending `j` and accumulates `(λ_j f_j(x)) · f_j(y)`
//! left to right, so the diagonal of [`PartialKernel`] equals the matching
//! [`VnSequence`] row bit for bit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// `K_n(x_i, x_k)` over every node pair.
#[derive(Clone, Debug)]
pub struct PartialKernel {
    pub n_terms: usize,
    pub nodes: Vec<f64>,
    pub values: DMatrix<f64>,
}

/// Rows `v_1, …, v_N` sampled at the grid nodes; `rows[n − 1]` is `v_n`.
#[derive(Clone, Debug)]
pub struct VnSequence {
    pub nodes: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl VnSequence {
    /// `v_n` for `1 ≤ n ≤ N`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n - 1]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One row of a gap report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub n: usize,
    pub m: usize,
    pub sup_gap: f64,
    pub vn_gap: f64,
    pub l1_quadrature: f64,
    pub l1_exact: f64,
}

fn check_count(s: &Spectrum, n: usize, allow_zero: bool) -> Result<()> {
    if (n == 0 && !allow_zero) || n > s.len() {
        return Err(Error::InvalidArgument(format!(
            "term count {n} outside {}..={}",
            if allow_zero { 0 } else { 1 },
            s.len()
        )));
    }
    Ok(())
}

/// Sum of `λ_j f_j(x_i) f_j(x_k)` over `j` in `range` (0-based), as a full node-pair matrix.
fn kernel_block(s: &Spectrum, range: std::ops::Range<usize>) -> DMatrix<f64> {
    let n = s.grid().len();
    let mut out = DMatrix::zeros(n, n);
    for pair in &s.pairs()[range] {
        let scaled: Vec<f64> = pair.values.iter().map(|f| pair.lambda * f).collect();
        for k in 0..n {
            let fk = pair.values[k];
            let col = &mut out.column_mut(k);
            for i in 0..n {
                col[i] += scaled[i] * fk;
            }
        }
    }
    out
}

/// Diagonal of [`kernel_block`].
fn diagonal_block(s: &Spectrum, range: std::ops::Range<usize>) -> Vec<f64> {
    let mut out = vec![0.0; s.grid().len()];
    for pair in &s.pairs()[range] {
        for (acc, f) in out.iter_mut().zip(&pair.values) {
            *acc += (pair.lambda * f) * f;
        }
    }
    out
}

/// `K_n = Σ_{j ≤ n} λ_j f_j ⊗ f_j` on the spectrum's grid.
pub fn partial_kernel(s: &Spectrum, n: usize) -> Result<PartialKernel> {
    check_count(s, n, false)?;
    Ok(PartialKernel {
        n_terms: n,
        nodes: s.grid().nodes().to_vec(),
        values: kernel_block(s, 0..n),
    })
}

/// `v_1, …, v_N` at the grid nodes.
pub fn vn_sequence(s: &Spectrum, big_n: usize) -> Result<VnSequence> {
    check_count(s, big_n, false)?;
    let mut rows = Vec::with_capacity(big_n);
    let mut acc = vec![0.0; s.grid().len()];
    for pair in &s.pairs()[..big_n] {
        for (a, f) in acc.iter_mut().zip(&pair.values) {
            *a += (pair.lambda * f) * f;
        }
        rows.push(acc.clone());
    }
    Ok(VnSequence {
        nodes: s.grid().nodes().to_vec(),
        rows,
    })
}

fn ordered(n: usize, m: usize) -> (usize, usize) {
    (n.min(m), n.max(m))
}

/// `(∫|v_n − v_m| by quadrature, Σ λ_j over n∧m < j ≤ n∨m)`.
///
/// For an orthonormal family the two agree up to quadrature error.
pub fn l1_gap(s: &Spectrum, n: usize, m: usize) -> Result<(f64, f64)> {
    check_count(s, n, true)?;
    check_count(s, m, true)?;
    let (lo, hi) = ordered(n, m);
    let gap = diagonal_block(s, lo..hi);
    let exact = s.pairs()[lo..hi].iter().fold(0.0, |acc, p| acc + p.lambda);
    Ok((s.grid().integrate(&gap), exact))
}

/// `(sup_{x,y} |K_n − K_m|, ‖v_n − v_m‖_∞)` over grid nodes; Cauchy-Schwarz gives first ≤ second.
pub fn sup_gap(s: &Spectrum, n: usize, m: usize) -> Result<(f64, f64)> {
    check_count(s, n, true)?;
    check_count(s, m, true)?;
    let (lo, hi) = ordered(n, m);
    if lo == hi {
        return Ok((0.0, 0.0));
    }
    let block = kernel_block(s, lo..hi);
    let diag = diagonal_block(s, lo..hi);
    let sup = block.amax();
    let vn = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok((sup, vn))
}

/// Both gaps for one `(n, m)`.
pub fn gap_record(s: &Spectrum, n: usize, m: usize) -> Result<GapRecord> {
    let (sup_gap, vn_gap) = sup_gap(s, n, m)?;
    let (l1_quadrature, l1_exact) = l1_gap(s, n, m)?;
    Ok(GapRecord {
        n,
        m,
        sup_gap,
        vn_gap,
        l1_quadrature,
        l1_exact,
    })
}

/// Deterministic schedule of `count` index pairs spread over `1..=len`, with `n = m` every fourth entry.
pub fn gap_schedule(len: usize, count: usize) -> Vec<(usize, usize)> {
    if len == 0 || count == 0 {
        return Vec::new();
    }
    (0..count)
        .map(|i| {
            let n = if count == 1 {
                len
            } else {
                1 + i * (len - 1) / (count - 1)
            };
            let m = n - (i % 4) * n / 4;
            (n, m.max(1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{analytic_brownian_spectrum, constant_spectrum};
    use crate::grid::Grid;
    use crate::spectrum::{EigenPair, Source};

    fn unit() -> Spectrum {
        constant_spectrum(&Grid::uniform(0.0, 1.0, 11).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn rank_one_constant() {
        let k = partial_kernel(&unit(), 1).unwrap();
        assert!(k.values.iter().all(|v| *v == 1.0));
        let v = vn_sequence(&unit(), 1).unwrap();
        assert!(v.row(1).iter().all(|v| *v == 1.0));
        assert!(partial_kernel(&unit(), 0).is_err());
        assert!(partial_kernel(&unit(), 2).is_err());
    }

    #[test]
    fn two_term_gaps() {
        // g(x) = √2 cos(πx) is orthonormal to 1 on [0, 1]
        let g = Grid::uniform(0.0, 1.0, 1025).unwrap();
        let cos: Vec<f64> = g
            .nodes()
            .iter()
            .map(|x| std::f64::consts::SQRT_2 * (std::f64::consts::PI * x).cos())
            .collect();
        let s = Spectrum::new(
            g.clone(),
            vec![
                EigenPair {
                    lambda: 1.0,
                    values: vec![1.0; g.len()],
                },
                EigenPair {
                    lambda: 0.5,
                    values: cos,
                },
            ],
            Source::Analytic,
        )
        .unwrap();
        let (quad, exact) = l1_gap(&s, 2, 1).unwrap();
        assert_eq!(exact, 0.5);
        assert!((quad - 0.5).abs() < 1e-12);
        assert_eq!(l1_gap(&s, 1, 1).unwrap(), (0.0, 0.0));
        assert_eq!(sup_gap(&s, 2, 2).unwrap(), (0.0, 0.0));
        // single-term gap: Cauchy-Schwarz is an equality on the diagonal
        let (sup, vn) = sup_gap(&s, 1, 2).unwrap();
        assert_eq!(sup, vn);
        assert!((sup - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brownian_diagonal_tends_to_identity() {
        let g = Grid::uniform(0.0, 1.0, 129).unwrap();
        let s = analytic_brownian_spectrum(400, &g).unwrap();
        let v = vn_sequence(&s, 400).unwrap();
        let tail = s.tail_bound().unwrap();
        for (x, vx) in g.nodes().iter().zip(v.row(400)) {
            assert!((vx - x).abs() <= tail + 1e-14);
        }
    }

    #[test]
    fn brownian_l1_identity() {
        let g = Grid::uniform(0.0, 1.0, 513).unwrap();
        let s = analytic_brownian_spectrum(10, &g).unwrap();
        let (quad, exact) = l1_gap(&s, 10, 5).unwrap();
        let oracle: f64 = (6..=10)
            .map(|k| 1.0 / ((k as f64 - 0.5) * std::f64::consts::PI).powi(2))
            .sum();
        assert!((exact - oracle).abs() < 1e-16);
        assert!((quad - exact).abs() < 1e-6);
    }

    #[test]
    fn brownian_uniform_cauchy() {
        let g = Grid::uniform(0.0, 1.0, 257).unwrap();
        let s = analytic_brownian_spectrum(20, &g).unwrap();
        let (sup, vn) = sup_gap(&s, 20, 10).unwrap();
        assert!(sup <= vn + 1e-12);
        assert!(sup > 0.0);
    }

    #[test]
    fn schedule_shape() {
        let sched = gap_schedule(50, 20);
        assert_eq!(sched.len(), 20);
        assert_eq!(sched[0], (1, 1));
        assert_eq!(sched[19].0, 50);
        assert!(sched.iter().all(|&(n, m)| 1 <= m && m <= n && n <= 50));
        assert!(sched.iter().filter(|(n, m)| n == m).count() >= 5);
        assert_eq!(gap_schedule(1, 20), vec![(1, 1); 20]);
    }
}
