//! Exact homological algebra over exterior algebras for vector bundles on
//! projective space.
//!
//! The crate is organized bottom-up:
//!
//! * [`exactla`]: exact scalars (arbitrary-precision rationals, prime fields)
//!   and dense linear algebra over them;
//! * [`exterior`]: the exterior algebras Λ•V and Λ•V* (wedge, contraction,
//!   duality, divided powers and the sl₂ operators);
//! * [`lammod`]: graded right Λ-modules (free modules as twist lists,
//!   morphisms as Λ-entry matrices, degree-wise evaluation, Hom spaces);
//! * [`lamcomplex`]: bounded complexes of free Λ-modules (minimality,
//!   strands, filtrations, σ-truncation, Hom-complex homology);
//! * [`bgg`]: the functors L and R between Λ-modules and complexes of
//!   line-bundle sums, section-level complexes and cohomology tables;
//! * [`minimize`]: cancellation of constants, minimal models and the
//!   rank/decomposition report;
//! * [`tate`]: minimal free resolutions over Λ, Tate windows, chain
//!   isomorphism testing, Beilinson monad terms;
//! * [`gallery`]: named bundle constructions and exhaustive fiberwise
//!   monad checks over finite fields.

pub mod bgg;
pub mod exactla;
pub mod exterior;
pub mod gallery;
pub mod lamcomplex;
pub mod lammod;
pub mod minimize;
pub mod tate;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("complex is not minimal: {0}")]
    NotMinimal(String),
    #[error("complex is not an HT-complex: {0}")]
    NotHt(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
