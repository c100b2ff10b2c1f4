//! Balanced multicolor urn models with multiple drawings.
//!
//! An urn holds balls of `r >= 2` colors. Each step draws a sample of `m`
//! balls — an unordered multiset or an ordered sequence, with or without
//! replacement — and adds or removes balls according to the replacement
//! row indexed by the drawn sample. Models whose rows all sum to one
//! positive balance keep the total deterministic; those whose conditional
//! one-step mean is a matrix multiple of the current composition are
//! *linear* and admit exact moment formulas driven by an `r x r` reduced
//! matrix.
//!
//! The crate provides:
//!
//! * [`model`] — definition, balance/tenability validation, linearity
//!   classification, synthesis from a reduced matrix, and the embedding of
//!   unordered models into ordered schemes, plus the JSON model format;
//! * [`sampling`] — exact sampling laws (multivariate hypergeometric,
//!   multinomial, and their ordered counterparts) and reproducible draws;
//! * [`exact`] — full distribution evolution (the brute-force oracle),
//!   the mean product formula, covariance recurrences with
//!   oracle-resolved constants, conformance reporting and eigen
//!   diagnostics;
//! * [`monte_carlo`] — deterministic, worker-count-independent ensemble
//!   simulation.
//!
//! Probability and moment computations are generic over a [`scalar::Scalar`];
//! the [`Rational`] instantiation is exact and is what every oracle check
//! uses, while `f64` trades exactness for speed.
//!
//! ```
//! use urnlab::{Rational, UrnModel};
//! use urnlab::exact::moments::mean_product_formula;
//!
//! let model = UrnModel::from_json_str(r#"{
//!     "colors": 2, "sample_size": 2, "scheme": "R",
//!     "initial": [1, 1],
//!     "reduced": [[2, 0], [0, 2]]
//! }"#).unwrap();
//! let mu = mean_product_formula::<Rational>(&model, 1).unwrap();
//! assert_eq!(mu[0], Rational::from_integer(2.into()));
//! ```

pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod model;
pub mod monte_carlo;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{Composition, ReducedMatrix, ReplacementMatrix, Scheme, UrnModel};

/// Exact rational scalar: arbitrary-precision, always in lowest terms with
/// a positive denominator.
pub type Rational = num::BigRational;

/// Exact law of the composition at a step.
pub type ExactDistribution = exact::Distribution<Rational>;

/// Exact mean and covariance at a step.
pub type MomentState = exact::moments::MomentState<Rational>;
