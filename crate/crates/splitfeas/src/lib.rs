//! # splitfeas
//!
//! Operator calculus for the split feasibility problem: find `x ∈ C` with
//! `Ax ∈ Q`, for closed convex sets `C`, `Q` and a bounded linear map `A`.
//!
//! The crate provides
//!
//! - dense [`linops::LinearMap`]s with adjoints and memoized power-iteration
//!   norm estimates;
//! - exact metric projections onto a catalog of convex sets and the
//!   subgradient projection for max-affine functions ([`projections`]);
//! - a [`operators::FixedPointOperator`] handle with relaxation, generalized
//!   relaxation, and composition combinators that propagate
//!   strong-quasi-nonexpansiveness constants;
//! - the Landweber operator family ([`landweber`]): the proximity function
//!   and its gradient, plain / projected / relaxed constructions, and the
//!   norm-free extrapolation whose step size
//!   `σ(x) = ‖TAx − Ax‖²/‖A*(TAx − Ax)‖²` never consults `‖A‖`;
//! - the composed iteration `x^{k+1} = U_k V_k x^k` with relaxation
//!   schedules, stopping rules and CSV trace capture ([`solver`]);
//! - empirical certifiers for the operator properties the constructions are
//!   supposed to have — NE, FNE, SQNE, cutter, asymptotic regularity, and an
//!   approximate-shrinking probe ([`diagnostics`]);
//! - a JSON instance format with built-in examples and a batch driver
//!   ([`instance`], [`driver`]) behind the `splitfeas` binary.
//!
//! ## Example
//!
//! Solve a small inequality system `Ax ≤ b` by iterating the extrapolated
//! Landweber operator:
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use splitfeas::{ConvexSet, LinearMap, SolverConfig};
//!
//! let a = LinearMap::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 1.0])).unwrap();
//! let q = ConvexSet::orthant_leq(DVector::from_vec(vec![1.0, 1.0])).unwrap();
//! let t = q.operator();
//! let u = splitfeas::FixedPointOperator::identity(2);
//!
//! let run = splitfeas::solver::solve(
//!     &a, &t, &u,
//!     &DVector::from_vec(vec![5.0, 5.0]),
//!     &SolverConfig { residual_tol: 1e-9, ..SolverConfig::default() },
//! ).unwrap();
//!
//! assert!(run.converged());
//! let x = run.final_iterate();
//! let violation = (a.apply(x).unwrap() - DVector::from_vec(vec![1.0, 1.0])).map(|t| t.max(0.0));
//! assert!(violation.norm() <= 1e-8);
//! ```
//!
//! Runnable examples covering each capability live in `examples/`; see the
//! README for the CLI surface.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod instance;
pub mod landweber;
pub mod linops;
pub mod operators;
pub mod projections;
mod rng;
pub mod solver;

pub use diagnostics::{Property, PropertyReport, SampleCloud};
pub use error::{Error, Result};
pub use instance::{load_instance, save_instance, ProblemInstance, Target};
pub use landweber::{
    extrapolated_landweber, plain_landweber, proximity_gradient, proximity_value, sigma_step,
    tau_step, LandweberSpec, LandweberVariant,
};
pub use linops::LinearMap;
pub use operators::{FixedPointOperator, StepSizeFunction};
pub use projections::{ConvexFunction, ConvexSet};
pub use solver::{solve, Schedule, SolverConfig, SolverRun, SolverStatus};

pub use nalgebra::{DMatrix, DVector};
