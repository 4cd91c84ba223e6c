//! Second-order Riemannian gradient flow with vanishing damping `α/t`.
//!
//! The crate provides
//!
//! * geometry for the open hemisphere, the SPD cone with the affine-invariant
//!   metric, and flat space ([`manifold`]);
//! * geodesically convex test objectives ([`objectives`]);
//! * the curvature comparison functions and the damping threshold `δ`
//!   ([`curvature`]);
//! * a semi-implicit phase-space integrator ([`integrator`]);
//! * Lyapunov-energy and rate diagnostics ([`diagnostics`]);
//! * seeded benchmark instances, oracles and α-sweeps ([`bench`]).

pub mod bench;
pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod manifold;
pub mod objectives;
pub mod problem;
pub mod tol;

pub use curvature::CurvatureProfile;
pub use error::{Error, Result};
pub use integrator::{solve, step, SolverConfig, Trajectory, TrajectorySample};
pub use manifold::{Flat, Hemisphere, Manifold, Point, Spd, Tangent};
pub use objectives::Objective;
pub use problem::{BenchmarkOracle, ProblemInstance};
