//! Karhunen-Loève expansions of covariance kernels on a compact interval, and
//! the converse question: when does `Σ λ_j f_j ⊗ f_j`, built from an
//! orthonormal family of continuous functions and summable `λ_j > 0`, converge
//! to a continuous kernel?
//!
//! The answer is a criterion on the diagonal partial sums
//! `v_n = Σ_{j≤n} λ_j f_j²`: the limit is continuous (and the convergence
//! uniform) exactly when the sequence `(v_n)` is equicontinuous.
//!
//! * [`grid`]: trapezoid quadrature on `[a, b]`.
//! * [`kernels`]: closed-form covariance kernels and Gram matrices.
//! * [`eigensolve`]: cyclic Jacobi and the Nyström eigen-decomposition.
//! * [`spectrum`]: eigenpairs on a grid and their JSON interchange format.
//! * [`expansion`]: partial kernels, `v_n`, and the `L¹` / uniform Cauchy gaps.
//! * [`diagnostics`]: moduli of continuity, the equicontinuity verdict, the
//!   increment bound `|v_n(x) − v_n(y)| ≤ 2√‖K‖_∞ √(K(x,x) − 2K(x,y) + K(y,y))`.
//! * [`counterexamples`]: tent families that fail or pass the criterion, and
//!   the closed-form Brownian spectrum.
//! * [`sampling`]: Gaussian sample paths from a truncated expansion.
//!
//! ```
//! use klkit::counterexamples::{failing_family, passing_family};
//! use klkit::diagnostics::{equicontinuity_report, ReportConfig, Verdict};
//!
//! let bad = failing_family(12)?;
//! let report = equicontinuity_report(&bad, &ReportConfig::depth(8))?;
//! assert_eq!(report.verdict, Verdict::Fail);
//!
//! let good = passing_family(12)?;
//! let report = equicontinuity_report(&good, &ReportConfig::depth(36))?;
//! assert_eq!(report.verdict, Verdict::Pass);
//! # Ok::<(), klkit::Error>(())
//! ```

pub mod counterexamples;
pub mod diagnostics;
pub mod eigensolve;
mod error;
pub mod expansion;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod rng;
pub mod sampling;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::Grid;
pub use kernels::KernelSpec;
pub use spectrum::{EigenPair, Source, Spectrum};
