//! Maximum-likelihood quantum-state tomography with certified stopping
//! rules.
//!
//! The crate centers on one computable quantity: after any iteration of a
//! likelihood maximizer, the top eigenvalue of the gradient operator R(ρ)
//! minus the event count bounds how much log-likelihood any state could
//! still gain. That bound drives stopping rules for point estimates, state
//! confidence regions and expectation-value confidence intervals, a
//! Lagrange-multiplier search for interval endpoints, and a homodyne
//! simulator that exercises the whole pipeline.
//!
//! All numerics are generic over the floating-point scalar through
//! [`Real`]; the `*64` aliases below fix the default double-precision
//! instantiation.

// Negated comparisons like `!(x > 0)` are deliberate: parameter guards must
// reject NaN, which the non-negated form would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod confidence;
pub mod constrained;
pub mod eig;
pub mod error;
pub mod homodyne;
pub mod io;
pub mod likelihood;
pub mod matrix;
pub mod optimizer;
pub mod quantum;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix64 = matrix::ComplexMatrix<f64>;
pub type HermitianOperator64 = quantum::HermitianOperator<f64>;
pub type DensityMatrix64 = quantum::DensityMatrix<f64>;
pub type StateVector64 = quantum::StateVector<f64>;
pub type PovmElement64 = likelihood::PovmElement<f64>;
pub type Dataset64 = likelihood::Dataset<f64>;
pub type IterationRecord64 = optimizer::IterationRecord<f64>;
pub type StopSpec64 = optimizer::StopSpec<f64>;
pub type FitResult64 = optimizer::FitResult<f64>;
pub type StoppingContext64 = confidence::StoppingContext<f64>;
pub type RegionReport64 = confidence::RegionReport<f64>;
pub type ConstrainedFit64 = constrained::ConstrainedFit<f64>;
pub type ConfidenceInterval64 = constrained::ConfidenceInterval<f64>;
pub type Scenario64 = homodyne::Scenario<f64>;
pub type HomodyneRecord64 = homodyne::HomodyneRecord<f64>;
