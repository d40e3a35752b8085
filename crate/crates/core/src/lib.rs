//! Semiparametric two-component mixture estimation.
//!
//! The model is `λ P₁(·|θ) + (1−λ) P₀` with `P₁` parametric and `P₀` known
//! only through linear moment constraints `∫ g dP₀ = m(α)`. Parameters are
//! estimated by minimizing a Cressie-Read divergence between the plug-in
//! signed measure `(Pₙ − λP₁)/(1−λ)` and the constraint set, using the dual
//! representation of the divergence.

pub mod asymptotics;
pub mod cli;
pub mod constraints;
pub mod data;
pub mod divergence;
pub mod error;
pub mod estimator;
pub mod families;
pub mod montecarlo;
pub mod quadrature;
pub mod smallmat;
pub mod special;

pub use constraints::ConstraintSet;
pub use data::Sample;
pub use divergence::DivergenceSpec;
pub use error::{Error, Result};
pub use estimator::{estimate, EstimateOptions, EstimationResult, Model, PhiPoint};
pub use families::{FamilyKind, ParametricFamily};
