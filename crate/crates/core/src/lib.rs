//! Certified approximate polynomial arithmetic over dyadic numbers.
//!
//! The central routine is [`multipoint_eval`], a subproduct/remainder tree
//! evaluator whose outputs are within `2^-L` of the exact values. Built on it
//! are [`interpolate`], [`taylor_shift`] and [`refine_batch`].

pub mod bound;
pub mod div;
pub mod dyadic;
pub mod error;
pub mod interp;
pub mod mpeval;
pub mod mul;
pub mod oracle;
pub mod poly;
pub mod refine;
pub mod taylor;
pub mod tree;
pub mod workload;

pub use bound::UBound;
pub use dyadic::{round_scalar, Dyadic, DyadicComplex};
pub use error::{Error, Result};
pub use interp::{interpolate, InterpProblem};
pub use mpeval::multipoint_eval;
pub use mul::{approx_mul, exact_int_poly_mul, MulParams};
pub use poly::{one_norm_bound, trunc_poly, ApproxPoly, GaussianIntPoly};
pub use refine::{refine_batch, IsolatingInterval, RefineJob};
pub use taylor::{taylor_shift, ShiftProblem};
