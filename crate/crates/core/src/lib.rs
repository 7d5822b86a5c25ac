//! Pseudo one-forms on the Wasserstein space of finitely supported measures.
//!
//! On the stratum of measures with pairwise distinct atoms the tangent space
//! at `μ = Σ a_i δ_{x_i}` is `L²(μ) ≅ (R^D)^n`, so every object of the
//! calculus (divergence, gradients, forms, their exterior derivative, the
//! symplectic form) reduces to finite sums over atoms. Optimal transport is
//! solved exactly by a transportation simplex.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod error;
pub mod fields;
pub mod forms;
pub mod green;
pub mod io;
pub mod measure;
pub mod numeric;
pub mod polynomial;
pub mod symplectic;
pub mod transport;

pub use calculus::MeasureCurve;
pub use error::{Error, Result};
pub use fields::{AnalyticField, ScalarField};
pub use forms::{LinearForm, PseudoOneForm};
pub use measure::{DiscreteMeasure, Functional, TangentField};
pub use transport::TransportPlan;
