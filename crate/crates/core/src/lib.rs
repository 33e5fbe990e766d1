//! Proximal alternating penalty algorithms for constrained convex problems of the form
//!
//! ```text
//! minimize  f(x) + g(y) [+ h(y)]   subject to   A x + B y - c ∈ K
//! ```
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! - [`linop`]: linear maps with adjoints and spectral-norm estimates,
//! - [`prox`] and [`set`]: closed-form proximal operators and projections,
//! - [`penalty`]: the quadratic penalty, its gradients, and certificate bounds,
//! - [`papa`]: the non-strongly convex and semi-strongly convex solvers, restarting,
//!   the three-term/conic/composite specializations and per-iteration diagnostics,
//! - [`baselines`]: Chambolle-Pock, Vu-Condat and accelerated proximal gradient,
//! - [`problems`]: seeded benchmark generators and reference oracles,
//! - [`certify`]: convergence-bound evaluation and empirical rate fitting.
#![no_std]
// `!(a > 0.0)` is how NaN parameters are rejected here; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod certify;
pub mod dense;
pub mod error;
pub mod linop;
pub mod papa;
pub mod penalty;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod set;
pub mod vector;

pub use error::{Error, Result};
pub use linop::LinearMap;
pub use problem::{CompositeProblem, ProblemInstance, Reference, SmoothTerm};
pub use prox::{ProxFunction, ProxKind};
pub use set::ConvexSet;
