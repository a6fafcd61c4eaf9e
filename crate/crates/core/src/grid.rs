//! Discretization of a compact interval `[a, b]` with composite trapezoid weights.
//!
//! Every integral in the crate is approximated by `Σ w_i f(x_i)` over a [`Grid`].
//! Endpoints are always nodes, and all weights are strictly positive.

use crate::error::{Error, Result};

/// Relative distance below which two nodes are treated as the same point.
pub const MERGE_TOLERANCE: f64 = 1e-14;

/// Quadrature nodes and trapezoid weights on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// `n` equispaced nodes with weights `h·(½, 1, …, 1, ½)`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Grid> {
        check_interval(a, b)?;
        if n < 2 {
            return Err(Error::Domain(format!("a grid needs at least 2 nodes, got {n}")));
        }
        let h = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
        nodes[n - 1] = b;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Grid { a, b, nodes, weights })
    }

    /// Trapezoid grid over an arbitrary strictly increasing node list spanning `[a, b]`.
    pub fn from_nodes(a: f64, b: f64, nodes: Vec<f64>) -> Result<Grid> {
        check_interval(a, b)?;
        check_nodes(a, b, &nodes)?;
        let weights = trapezoid_weights(&nodes);
        Ok(Grid { a, b, nodes, weights })
    }

    /// Reassemble a grid from stored parts, validating every invariant.
    pub fn from_parts(a: f64, b: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Grid> {
        check_interval(a, b)?;
        check_nodes(a, b, &nodes)?;
        if weights.len() != nodes.len() {
            return Err(Error::Domain(format!(
                "{} weights for {} nodes",
                weights.len(),
                nodes.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!(
                "weight {i} is not a positive finite number"
            )));
        }
        Ok(Grid { a, b, nodes, weights })
    }

    /// Merge `extra` points into the node set and recompute trapezoid weights.
    ///
    /// Points within `1e-14·(b − a)` of an existing node are dropped; existing
    /// nodes always win over new ones, so endpoints stay exactly `a` and `b`.
    pub fn refine_with(&self, extra: &[f64]) -> Result<Grid> {
        if let Some(x) = extra.iter().find(|x| !(**x >= self.a && **x <= self.b)) {
            return Err(Error::Domain(format!(
                "refinement point {x} lies outside [{}, {}]",
                self.a, self.b
            )));
        }
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let tol = MERGE_TOLERANCE * (self.b - self.a);
        let mut tagged: Vec<(f64, bool)> = self.nodes.iter().map(|&x| (x, true)).collect();
        tagged.extend(extra.iter().map(|&x| (x, false)));
        tagged.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.cmp(&p.1)));

        let mut merged: Vec<(f64, bool)> = Vec::with_capacity(tagged.len());
        for (x, original) in tagged {
            match merged.last_mut() {
                Some(last) if x - last.0 <= tol => {
                    if original && !last.1 {
                        *last = (x, true);
                    }
                }
                _ => merged.push((x, original)),
            }
        }
        let nodes: Vec<f64> = merged.into_iter().map(|(x, _)| x).collect();
        Grid::from_nodes(self.a, self.b, nodes)
    }

    /// One refinement step: the midpoint of every cell becomes a node.
    pub fn bisect(&self) -> Grid {
        let mids: Vec<f64> = self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        self.refine_with(&mids).expect("midpoints lie inside the domain")
    }

    /// `Σ_i w_i v_i`.
    ///
    /// # Panics
    ///
    /// If `values` does not have one entry per node.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(
            values.len(),
            self.nodes.len(),
            "integrand sampled on {} points, grid has {}",
            values.len(),
            self.nodes.len()
        );
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same interval as `other`, bitwise.
    pub fn same_domain(&self, other: &Grid) -> bool {
        self.a == other.a && self.b == other.b
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("need finite a < b, got [{a}, {b}]")));
    }
    Ok(())
}

fn check_nodes(a: f64, b: f64, nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::Domain(format!(
            "a grid needs at least 2 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes[0] != a || nodes[nodes.len() - 1] != b {
        return Err(Error::Domain(format!(
            "nodes must start at a = {a} and end at b = {b}, got {} .. {}",
            nodes[0],
            nodes[nodes.len() - 1]
        )));
    }
    if let Some(i) = nodes.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(format!(
            "nodes not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// `w_i = (x_{i+1} − x_{i−1}) / 2`, one-sided halves at the ends.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
            let right = if i + 1 < n { nodes[i + 1] - nodes[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}
