//! Numerical engine for expected shortfall (CVaR) and distortion risk
//! measures.
//!
//! Three estimation regimes are covered:
//!
//! 1. **Nonparametric**: the top-block order-statistic estimator from a loss
//!    sample ([`empirical`]), tied to quantile-loss minimization.
//! 2. **Additive measurement error**: a second-order expansion family over a
//!    smooth base law, its validity checks, the worst-case CVaR upper bound
//!    over the `(delta, kappa)` box, and the capacity envelope
//!    ([`measurement_error`]).
//! 3. **Heavy-tail contamination**: a Pareto tail spliced onto the base law
//!    at a quantile, optionally mixed at weight epsilon, with closed-form
//!    CVaR next to independent integral routes ([`heavy_tail`]).
//!
//! Everything is generic over the scalar type through [`scalar::Real`];
//! the aliases below pin `f64`, the precision at which the documented
//! tolerances hold.

// Domain guards are written as negated comparisons on purpose: NaN fails
// `!(x > lo && x < hi)` and is rejected, where the de Morgan form would let
// it through. Reference constants keep their full published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod choquet;
pub mod cli;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod heavy_tail;
pub mod measurement_error;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

/// Standard/parametric normal law at `f64` precision.
pub type Normal64 = distributions::NormalLaw<f64>;
/// Chi-square law at `f64` precision.
pub type ChiSquare64 = distributions::ChiSquareLaw<f64>;
/// Uniform law at `f64` precision.
pub type Uniform64 = distributions::UniformLaw<f64>;
/// CVaR distortion at `f64` precision.
pub type CvarDistortion64 = choquet::CvarDistortion<f64>;
/// Quadrature configuration at `f64` precision.
pub type QuadratureConfig64 = quadrature::QuadratureConfig<f64>;
/// Risk report at `f64` precision.
pub type RiskReport64 = report::RiskReport<f64>;
/// Loss sample at `f64` precision.
pub type EmpiricalSample64 = empirical::EmpiricalSample<f64>;
/// Expansion family over a normal base at `f64` precision.
pub type NormalExpansionFamily64 = measurement_error::ExpansionFamily<f64, Normal64>;
/// Pareto-spliced chi-square at `f64` precision.
pub type SplicedChiSquare64 = heavy_tail::SplicedPareto<f64, ChiSquare64>;
/// Contaminated chi-square mixture at `f64` precision.
pub type ChiSquareMixture64 = heavy_tail::HuberMixture<f64, ChiSquare64>;
