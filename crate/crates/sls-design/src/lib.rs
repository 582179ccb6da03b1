//! Optimal approximate design measures under second-order least squares
//! estimation.
//!
//! Under asymmetric observation errors, second-order least squares beats
//! ordinary least squares, and the relevant information matrix for a design
//! measure p becomes `H(p) = G(p) - t g(p) g(p)^T`, where G and g are the
//! second and first moments of p over the design space and t in [0, 1)
//! encodes how asymmetric the errors are (t = 0 recovers the ordinary
//! theory). This crate computes, verifies and reduces D- and A-optimal
//! measures over finite design spaces of binary (spring balance) and 0/±1
//! (chemical balance) points:
//!
//! * [`space`] enumerates the design spaces and carries measures on them,
//!   with a compact class form for measures constant on weight classes.
//! * [`information`] assembles G, g and H, evaluates the criteria, and runs
//!   the pointwise optimality conditions and directional derivatives.
//! * [`analytic`] holds the closed-form optimal families, their optimality
//!   ranges, and closed-form oracles for their inverses and psi values.
//! * [`solver`] is the multiplicative weight algorithm with the delta
//!   certificate stopping rule, plus efficiency comparisons.
//! * [`combinatorial`] builds Hadamard matrices and balanced incomplete
//!   block designs whose incidence columns replicate an optimal measure's
//!   information matrix on a fraction of the support.
//! * [`reporting`] regenerates the reference tables (T1-T5) as artifacts.
//!
//! ```
//! use sls_design::analytic::{analytic_measure_on, MeasureFamily};
//! use sls_design::information::{check_optimal, Criterion};
//! use sls_design::solver::{efficiency, solve, SolverConfig};
//! use sls_design::space::DesignSpace;
//!
//! let space = DesignSpace::binary(4)?;
//! let pair = analytic_measure_on(&space, MeasureFamily::EvenPair, None)?;
//! // Within t <= t1(4) = 5/6 the closed-form family certifies directly...
//! assert!(check_optimal(&pair, 0.5, Criterion::D, 1e-8).0);
//! // ...beyond it, solve numerically and compare.
//! let solved = solve(&space, 0.9, Criterion::D, &SolverConfig::default())?;
//! assert!(solved.converged);
//! let eff = efficiency(&pair, &solved.measure, 0.9, Criterion::D)?;
//! assert!((eff - 0.9807).abs() < 1e-3);
//! # Ok::<(), sls_design::Error>(())
//! ```

pub mod analytic;
pub mod combinatorial;
pub mod error;
pub mod information;
pub mod matrix;
pub mod reporting;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use information::{Criterion, InformationSummary, OptimalityReport};
pub use space::{DesignMeasure, DesignPoint, DesignSpace, SpaceKind};
