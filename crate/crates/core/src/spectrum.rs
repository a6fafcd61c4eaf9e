//! Ordered eigenpairs `(λ_n, f_n)` sampled on a grid, plus the canonical JSON interchange format.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexamples;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io;

/// Where a spectrum came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Nystrom,
    Analytic,
    Counterexample,
}

/// One coefficient and its eigenfunction sampled at the grid nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub values: Vec<f64>,
}

/// Closed-form orthonormal family with exact pointwise evaluation.
pub trait AnalyticFamily: Send + Sync + fmt::Debug {
    /// Number of terms.
    fn len(&self) -> usize;
    /// Coefficient of term `index` (0-based).
    fn lambda(&self, index: usize) -> f64;
    fn eval(&self, index: usize, x: f64) -> f64;
    /// `sup_x f_index(x)²`.
    fn sup_squared(&self, index: usize) -> f64;
    /// `Σ_{j > len} λ_j sup f_j²` for the infinite family, if finite.
    fn tail_bound(&self) -> Option<f64>;
    /// Points where the family has kinks or narrow structure; grids should contain them.
    fn features(&self) -> Vec<f64> {
        Vec::new()
    }
    fn descriptor(&self) -> FamilyDescriptor;
}

/// Serializable name of an analytic family, enough to rebuild its evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyDescriptor {
    BrownianSine { terms: usize },
    FailingTents { terms: usize },
    PassingTents { terms: usize },
    Constant,
}

/// Eigenpairs on a grid, sorted by non-increasing `λ > 0`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    pairs: Vec<EigenPair>,
    source: Source,
    tail_bound: Option<f64>,
    features: Vec<f64>,
    family: Option<Arc<dyn AnalyticFamily>>,
}

impl Spectrum {
    pub fn new(grid: Grid, pairs: Vec<EigenPair>, source: Source) -> Result<Spectrum> {
        validate_pairs(&grid, &pairs).map_err(Error::InvalidArgument)?;
        Ok(Spectrum {
            grid,
            pairs,
            source,
            tail_bound: None,
            features: Vec::new(),
            family: None,
        })
    }

    /// Sample an analytic family on `base` refined with the family's feature points.
    pub fn from_family(family: Arc<dyn AnalyticFamily>, base: &Grid, source: Source) -> Result<Spectrum> {
        let features = family.features();
        let grid = base.refine_with(&features)?;
        let pairs = (0..family.len())
            .map(|j| EigenPair {
                lambda: family.lambda(j),
                values: grid.nodes().iter().map(|&x| family.eval(j, x)).collect(),
            })
            .collect();
        let mut s = Spectrum::new(grid, pairs, source)?;
        s.tail_bound = family.tail_bound();
        s.features = features;
        s.family = Some(family);
        Ok(s)
    }

    pub fn with_tail_bound(mut self, tail: Option<f64>) -> Spectrum {
        self.tail_bound = tail;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.lambda)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn family(&self) -> Option<&Arc<dyn AnalyticFamily>> {
        self.family.as_ref()
    }

    pub fn is_analytic(&self) -> bool {
        self.family.is_some()
    }

    /// Tail bound beyond the last stored pair.
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    /// `Σ_{j > n} λ_j sup f_j²`, counting stored pairs past `n` when their sup-norms are known.
    pub fn tail_after(&self, n: usize) -> Option<f64> {
        let stored = self.tail_bound?;
        if n >= self.len() {
            return Some(stored);
        }
        let family = self.family.as_ref()?;
        let extra: f64 = (n..self.len())
            .map(|j| self.pairs[j].lambda * family.sup_squared(j))
            .sum();
        Some(stored + extra)
    }

    /// The first `n` pairs.
    pub fn truncated(&self, n: usize) -> Result<Spectrum> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {n} of {} pairs",
                self.len()
            )));
        }
        let mut s = self.clone();
        s.tail_bound = self.tail_after(n);
        s.pairs.truncate(n);
        Ok(s)
    }

    /// Multiply every coefficient (and the tail bound) by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Spectrum> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        let mut s = self.clone();
        s.pairs.iter_mut().for_each(|p| p.lambda *= c);
        s.tail_bound = s.tail_bound.map(|t| t * c);
        Ok(s)
    }

    /// `f_index` at arbitrary points: exact for analytic families, piecewise linear otherwise.
    pub fn evaluate(&self, index: usize, xs: &[f64]) -> Vec<f64> {
        match &self.family {
            Some(family) => xs.iter().map(|&x| family.eval(index, x)).collect(),
            None => {
                let nodes = self.grid.nodes();
                let values = &self.pairs[index].values;
                xs.iter().map(|&x| interpolate(nodes, values, x)).collect()
            }
        }
    }

    /// The same expansion sampled on another grid over the same interval.
    pub fn resample(&self, grid: &Grid) -> Result<Spectrum> {
        if !self.grid.same_domain(grid) {
            return Err(Error::Domain(format!(
                "cannot resample from [{}, {}] onto [{}, {}]",
                self.grid.a(),
                self.grid.b(),
                grid.a(),
                grid.b()
            )));
        }
        let pairs = (0..self.len())
            .map(|j| EigenPair {
                lambda: self.pairs[j].lambda,
                values: self.evaluate(j, grid.nodes()),
            })
            .collect();
        Ok(Spectrum {
            grid: grid.clone(),
            pairs,
            ..self.clone()
        })
    }

    /// `max_{i,j} |Σ_k w_k f_i(x_k) f_j(x_k) − δ_ij|` on the stored grid.
    pub fn orthonormality_defect(&self) -> f64 {
        let w = self.grid.weights();
        let mut worst = 0.0f64;
        for (i, p) in self.pairs.iter().enumerate() {
            for (j, q) in self.pairs.iter().enumerate().skip(i) {
                let ip: f64 = w
                    .iter()
                    .zip(&p.values)
                    .zip(&q.values)
                    .map(|((w, a), b)| w * a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        io::to_json_string(&SpectrumFile {
            domain: Domain {
                a: self.grid.a(),
                b: self.grid.b(),
            },
            grid: GridFile {
                nodes: self.grid.nodes().to_vec(),
                weights: self.grid.weights().to_vec(),
            },
            source: self.source,
            pairs: self.pairs.clone(),
            tail_bound: self.tail_bound,
            features: self.features.clone(),
            family: self.family.as_ref().map(|f| f.descriptor()),
        })
    }

    /// Parse and validate a spectrum file. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Spectrum> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        let fmt = Error::Format;
        let grid = Grid::from_parts(file.domain.a, file.domain.b, file.grid.nodes, file.grid.weights)
            .map_err(|e| fmt(format!("grid: {e}")))?;
        validate_pairs(&grid, &file.pairs).map_err(fmt)?;
        if let Some(t) = file.tail_bound {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(fmt(format!("tail_bound: must be a non-negative number, got {t}")));
            }
        }
        if let Some(i) = file
            .features
            .iter()
            .position(|x| !(*x >= grid.a() && *x <= grid.b()))
        {
            return Err(fmt(format!("features[{i}]: outside the domain")));
        }
        let family = match file.family {
            None => None,
            Some(desc) => {
                let family = counterexamples::family_from_descriptor(desc, grid.a(), grid.b())
                    .map_err(|e| fmt(format!("family: {e}")))?;
                check_family_samples(family.as_ref(), &grid, &file.pairs).map_err(fmt)?;
                Some(family)
            }
        };
        Ok(Spectrum {
            grid,
            pairs: file.pairs,
            source: file.source,
            tail_bound: file.tail_bound,
            features: file.features,
            family,
        })
    }
}

fn validate_pairs(grid: &Grid, pairs: &[EigenPair]) -> std::result::Result<(), String> {
    if pairs.is_empty() {
        return Err("pairs: a spectrum needs at least one pair".into());
    }
    for (i, p) in pairs.iter().enumerate() {
        if !(p.lambda > 0.0 && p.lambda.is_finite()) {
            return Err(format!(
                "pairs[{i}].lambda: must be positive and finite, got {}",
                p.lambda
            ));
        }
        if i > 0 && p.lambda > pairs[i - 1].lambda {
            return Err(format!("pairs[{i}].lambda: coefficients must be non-increasing"));
        }
        if p.values.len() != grid.len() {
            return Err(format!(
                "pairs[{i}].values: expected {} samples, got {}",
                grid.len(),
                p.values.len()
            ));
        }
        if p.values.iter().any(|v| !v.is_finite()) {
            return Err(format!("pairs[{i}].values: non-finite sample"));
        }
    }
    Ok(())
}

fn check_family_samples(
    family: &dyn AnalyticFamily,
    grid: &Grid,
    pairs: &[EigenPair],
) -> std::result::Result<(), String> {
    if family.len() != pairs.len() {
        return Err(format!(
            "family: describes {} terms but the file has {} pairs",
            family.len(),
            pairs.len()
        ));
    }
    for (j, p) in pairs.iter().enumerate() {
        let scale = family.sup_squared(j).sqrt();
        for (k, (&x, &v)) in grid.nodes().iter().zip(&p.values).enumerate() {
            if (family.eval(j, x) - v).abs() > 1e-9 * scale {
                return Err(format!(
                    "pairs[{j}].values[{k}]: disagrees with the declared family"
                ));
            }
        }
    }
    Ok(())
}

/// Piecewise-linear interpolation of `(nodes, values)` at `x`, clamped to the end values.
pub(crate) fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let i = nodes.partition_point(|&t| t <= x);
    if i == 0 {
        return values[0];
    }
    if i == nodes.len() {
        return values[nodes.len() - 1];
    }
    let (x0, x1) = (nodes[i - 1], nodes[i]);
    if x == x0 {
        return values[i - 1];
    }
    let t = (x - x0) / (x1 - x0);
    values[i - 1] + t * (values[i] - values[i - 1])
}

#[derive(Serialize, Deserialize)]
struct Domain {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    domain: Domain,
    grid: GridFile,
    source: Source,
    pairs: Vec<EigenPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<FamilyDescriptor>,
}
