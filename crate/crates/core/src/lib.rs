//! Continuous-time quantum walks on one-dimensional lattices.
//!
//! A walk started at site `x0` evolves under
//! `i dψ(x,t)/dt = -ψ(x-1,t) + q ψ(x,t) - ψ(x+1,t)`. Its amplitudes are
//! closed-form Bessel expressions on the infinite line and with a single
//! wall, and image series of Bessel functions between two walls (Dirichlet)
//! or on a ring (periodic). This crate evaluates those expressions, picks the
//! truncation order of the image series from an explicit error bound, and
//! ships two independent reference solvers (an eigen-expansion and an RK4
//! integrator) to check them against.
//!
//! Modules:
//!
//! - [`bessel`]: integer-order Bessel functions `J_n(x)` by Miller's backward
//!   recurrence, plus a quadrature reference.
//! - [`walk`]: boundary specs, image points and amplitude evaluators.
//! - [`bounds`]: truncation order `k(t, ε, N)` and the tail bounds behind it.
//! - [`oracle`]: spectral and ODE reference solutions.
//! - [`cli`]: the `qwalk` command-line front end.
//!
//! ```
//! use qwalk::walk::{amplitude_dirichlet, BoundarySpec, WalkSpec};
//! use qwalk::bounds::truncation_k;
//!
//! let spec = WalkSpec::new(BoundarySpec::Dirichlet { left: 0, right: 30 }, 0.0, 13).unwrap();
//! let plan = truncation_k(60.0, 1e-5, 30).unwrap();
//! assert_eq!(plan.k, 12);
//! let psi = amplitude_dirichlet(&spec, 13, 60.0, plan.k).unwrap();
//! assert!(psi.norm() <= 1.0);
//! ```

pub mod bessel;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
