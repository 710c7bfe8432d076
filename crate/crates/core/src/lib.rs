//! Numerical laboratory for second-order Sobolev regularity of the parabolic
//! p-Laplace equation `u_t = div(|Du|^{p-2} Du)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`jet`]: pointwise algebra on second-order jets `(Du, D²u)`, including the
//!   nonlinear field `V_s` and the pointwise inequalities as signed margins.
//! * [`grid`]: structured space-time grids, finite-difference jets, masked
//!   quadrature over parabolic cylinders and cutoff functions.
//! * [`solver`]: explicit and lagged-diffusivity implicit time stepping for the
//!   ε-regularized equation.
//! * [`exact`]: closed-form reference solutions, including the sharpness counterexample.
//! * [`verify`]: Caccioppoli-type integral estimates, the sharpness sweep and
//!   pointwise suites on fields.
//! * [`sampling`]: seeded random jets for the property suites.
//! * [`run`]: the configuration-driven experiment runner behind the `plap` binary.

pub mod error;
pub mod exact;
pub mod grid;
pub mod jet;
pub mod run;
pub mod sampling;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{counterexample, dvs_norm_exact, Affine, Counterexample, ExactSolution, Heat};
pub use grid::{Cylinder, JetField, ScalarField, SpaceTimeGrid};
pub use jet::{Jet, Params};
pub use solver::{Scheme, Solution, SolverConfig};
pub use verify::{EstimateReport, SharpnessTable};
