//! Closed-form orthonormal families with summable positive coefficients.
//!
//! The tent families place a triangular bump `t_n` of width `h_n = 4^{−n−1}`
//! at `[2^{−n}, 2^{−n} + h_n]` for `n = 2, 3, …`. The supports are pairwise
//! disjoint because `4^{−n−1} < 2^{−n} − 2^{−n−1}` for `n ≥ 2`, so the family is
//! exactly orthonormal once each tent has peak `√(3/h_n)`.
//!
//! * failing regime: `λ_n = h_n`, so every bump contributes exactly `3` to
//!   `v_n` at its apex while the apexes accumulate at `0`, where `v_n(0) = 0`.
//! * passing regime: `λ_n = 8^{−n}`, so bump `n` contributes `12·2^{−n}`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectrum::{AnalyticFamily, FamilyDescriptor, Source, Spectrum};

/// Index of the first tent.
pub const FIRST_TENT: i32 = 2;
/// Uniform node count of the grid families are sampled on unless told otherwise.
pub const DEFAULT_BASE_NODES: usize = 257;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Failing,
    Passing,
}

/// `N` consecutive tents starting at index [`FIRST_TENT`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TentFamily {
    regime: Regime,
    terms: usize,
}

impl TentFamily {
    pub fn new(regime: Regime, terms: usize) -> Result<TentFamily> {
        if terms == 0 {
            return Err(Error::InvalidArgument(
                "a tent family needs at least one term".into(),
            ));
        }
        // support half-widths must stay above the grid merge tolerance
        if terms > 20 {
            return Err(Error::InvalidArgument(format!(
                "tent supports narrower than the node merge tolerance (terms = {terms} > 20)"
            )));
        }
        Ok(TentFamily { regime, terms })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Tent index of term `j` (0-based).
    pub fn index_of(j: usize) -> i32 {
        FIRST_TENT + j as i32
    }

    /// Left support endpoint `2^{−n}`.
    pub fn center(n: i32) -> f64 {
        2f64.powi(-n)
    }

    /// Support width `4^{−n−1}`.
    pub fn width(n: i32) -> f64 {
        4f64.powi(-n - 1)
    }

    /// Support midpoint, where the tent peaks.
    pub fn apex(n: i32) -> f64 {
        TentFamily::center(n) + 0.5 * TentFamily::width(n)
    }

    /// Peak height `√(3 / h_n)`, which gives the tent unit `L²` norm.
    pub fn peak(n: i32) -> f64 {
        (3.0 / TentFamily::width(n)).sqrt()
    }

    pub fn coefficient(regime: Regime, n: i32) -> f64 {
        match regime {
            Regime::Failing => TentFamily::width(n),
            Regime::Passing => 8f64.powi(-n),
        }
    }

    /// Unit-norm tent `t_n(x)`.
    pub fn tent(n: i32, x: f64) -> f64 {
        let c = TentFamily::center(n);
        let h = TentFamily::width(n);
        if !(x >= c && x <= c + h) {
            return 0.0;
        }
        let half = 0.5 * h;
        TentFamily::peak(n) * (1.0 - (x - (c + half)).abs() / half)
    }

    /// Index of the (unique) tent whose support contains `x`, over the infinite family.
    pub fn support_index(x: f64) -> Option<i32> {
        if !(x > 0.0 && x <= 1.0) {
            return None;
        }
        let guess = (-x.log2()).ceil() as i32;
        (guess - 1..=guess + 1).filter(|&n| n >= FIRST_TENT).find(|&n| {
            let c = TentFamily::center(n);
            x >= c && x <= c + TentFamily::width(n)
        })
    }

    /// `Σ_{n ≥ 2} λ_n t_n(x) t_n(y)` for the infinite family, evaluated exactly.
    ///
    /// At most one term is nonzero since the supports are disjoint.
    pub fn limit_kernel(regime: Regime, x: f64, y: f64) -> f64 {
        match (TentFamily::support_index(x), TentFamily::support_index(y)) {
            (Some(n), Some(m)) if n == m => {
                TentFamily::coefficient(regime, n) * TentFamily::tent(n, x) * TentFamily::tent(n, y)
            }
            _ => 0.0,
        }
    }
}

impl AnalyticFamily for TentFamily {
    fn len(&self) -> usize {
        self.terms
    }

    fn lambda(&self, index: usize) -> f64 {
        TentFamily::coefficient(self.regime, TentFamily::index_of(index))
    }

    fn eval(&self, index: usize, x: f64) -> f64 {
        TentFamily::tent(TentFamily::index_of(index), x)
    }

    fn sup_squared(&self, index: usize) -> f64 {
        3.0 / TentFamily::width(TentFamily::index_of(index))
    }

    /// Failing: every omitted term contributes 3, so no finite bound exists.
    /// Passing: `Σ_{j > N} 12·2^{−j} = 12·2^{−N}`.
    fn tail_bound(&self) -> Option<f64> {
        match self.regime {
            Regime::Failing => None,
            Regime::Passing => Some(12.0 * 2f64.powi(-(self.terms as i32))),
        }
    }

    fn features(&self) -> Vec<f64> {
        (0..self.terms)
            .flat_map(|j| {
                let n = TentFamily::index_of(j);
                let c = TentFamily::center(n);
                [c, TentFamily::apex(n), c + TentFamily::width(n)]
            })
            .collect()
    }

    fn descriptor(&self) -> FamilyDescriptor {
        match self.regime {
            Regime::Failing => FamilyDescriptor::FailingTents { terms: self.terms },
            Regime::Passing => FamilyDescriptor::PassingTents { terms: self.terms },
        }
    }
}

/// Eigenpairs of the Brownian covariance `min(x, y)` on `[0, 1]`:
/// `f_k(x) = √2 sin((k − ½)πx)`, `λ_k = ((k − ½)π)^{−2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BrownianSine {
    terms: usize,
}

impl BrownianSine {
    pub fn new(terms: usize) -> Result<BrownianSine> {
        if terms == 0 {
            return Err(Error::InvalidArgument("need at least one term".into()));
        }
        Ok(BrownianSine { terms })
    }

    fn frequency(index: usize) -> f64 {
        (index as f64 + 0.5) * PI
    }
}

impl AnalyticFamily for BrownianSine {
    fn len(&self) -> usize {
        self.terms
    }

    fn lambda(&self, index: usize) -> f64 {
        let w = BrownianSine::frequency(index);
        1.0 / (w * w)
    }

    fn eval(&self, index: usize, x: f64) -> f64 {
        std::f64::consts::SQRT_2 * (BrownianSine::frequency(index) * x).sin()
    }

    fn sup_squared(&self, _index: usize) -> f64 {
        2.0
    }

    /// `2 Σ_{k > N} ((k − ½)π)^{−2} = 2 ψ′(N + ½) / π²`.
    fn tail_bound(&self) -> Option<f64> {
        Some(2.0 * trigamma(self.terms as f64 + 0.5) / (PI * PI))
    }

    fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor::BrownianSine { terms: self.terms }
    }
}

/// The single normalized constant `1/√(b − a)` with coefficient `λ`; its kernel is `λ/(b − a)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantFamily {
    value: f64,
    lambda: f64,
}

impl ConstantFamily {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<ConstantFamily> {
        if !(a < b) || !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "constant family needs a < b and λ > 0, got [{a}, {b}], λ = {lambda}"
            )));
        }
        Ok(ConstantFamily {
            value: 1.0 / (b - a).sqrt(),
            lambda,
        })
    }
}

impl AnalyticFamily for ConstantFamily {
    fn len(&self) -> usize {
        1
    }

    fn lambda(&self, _index: usize) -> f64 {
        self.lambda
    }

    fn eval(&self, _index: usize, _x: f64) -> f64 {
        self.value
    }

    fn sup_squared(&self, _index: usize) -> f64 {
        self.value * self.value
    }

    fn tail_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn descriptor(&self) -> FamilyDescriptor {
        FamilyDescriptor::Constant
    }
}

/// `ψ′(z) = Σ_{k ≥ 0} (z + k)^{−2}` for `z > 0`.
pub fn trigamma(mut z: f64) -> f64 {
    let mut acc = 0.0;
    while z < 20.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // asymptotic series in 1/z; the next term is O(z^{-11}) < 1e-14 relative here
    let series = inv
        * (1.0
            + inv
                * (0.5
                    + inv * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0))))));
    acc + series
}

fn unit_base() -> Grid {
    Grid::uniform(0.0, 1.0, DEFAULT_BASE_NODES).expect("valid default grid")
}

fn require_unit_interval(grid: &Grid, what: &str) -> Result<()> {
    if grid.a() != 0.0 || grid.b() != 1.0 {
        return Err(Error::Domain(format!(
            "{what} lives on [0, 1], got [{}, {}]",
            grid.a(),
            grid.b()
        )));
    }
    Ok(())
}

/// Tents with `λ_n = h_n`, sampled on the default base grid refined with every support endpoint and apex.
pub fn failing_family(terms: usize) -> Result<Spectrum> {
    failing_family_on(terms, &unit_base())
}

pub fn failing_family_on(terms: usize, base: &Grid) -> Result<Spectrum> {
    require_unit_interval(base, "the tent family")?;
    let family = TentFamily::new(Regime::Failing, terms)?;
    Spectrum::from_family(Arc::new(family), base, Source::Counterexample)
}

/// Tents with `λ_n = 8^{−n}`; tail bound `12·2^{−N}`.
pub fn passing_family(terms: usize) -> Result<Spectrum> {
    passing_family_on(terms, &unit_base())
}

pub fn passing_family_on(terms: usize, base: &Grid) -> Result<Spectrum> {
    require_unit_interval(base, "the tent family")?;
    let family = TentFamily::new(Regime::Passing, terms)?;
    Spectrum::from_family(Arc::new(family), base, Source::Counterexample)
}

/// Closed-form Brownian eigenpairs on `grid` (which must span `[0, 1]`).
pub fn analytic_brownian_spectrum(terms: usize, grid: &Grid) -> Result<Spectrum> {
    require_unit_interval(grid, "the Brownian sine family")?;
    Spectrum::from_family(Arc::new(BrownianSine::new(terms)?), grid, Source::Analytic)
}

/// One constant eigenfunction with coefficient `lambda`.
pub fn constant_spectrum(grid: &Grid, lambda: f64) -> Result<Spectrum> {
    let family = ConstantFamily::new(grid.a(), grid.b(), lambda)?;
    Spectrum::from_family(Arc::new(family), grid, Source::Analytic)
}

/// Rebuild the evaluators named in a spectrum file.
pub fn family_from_descriptor(desc: FamilyDescriptor, a: f64, b: f64) -> Result<Arc<dyn AnalyticFamily>> {
    let unit = a == 0.0 && b == 1.0;
    if !unit && !matches!(desc, FamilyDescriptor::Constant) {
        return Err(Error::Domain(format!("{desc:?} lives on [0, 1], got [{a}, {b}]")));
    }
    Ok(match desc {
        FamilyDescriptor::BrownianSine { terms } => Arc::new(BrownianSine::new(terms)?),
        FamilyDescriptor::FailingTents { terms } => Arc::new(TentFamily::new(Regime::Failing, terms)?),
        FamilyDescriptor::PassingTents { terms } => Arc::new(TentFamily::new(Regime::Passing, terms)?),
        FamilyDescriptor::Constant => Arc::new(ConstantFamily::new(a, b, 1.0)?),
    })
}
