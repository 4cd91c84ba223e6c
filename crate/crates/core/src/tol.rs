//! Numerical tolerances shared across modules.
//!
//! Values sit roughly two orders of magnitude above accumulated f64 rounding
//! in the O(n³) matrix kernels that produce them.

/// Type invariants: unit norm, symmetry, tangency.
pub const INVARIANT: f64 = 1e-10;

/// exp/log roundtrips.
pub const ROUNDTRIP: f64 = 1e-8;

/// `<x, y> <= -1 + ANTIPODAL` is treated as an antipodal pair on the sphere.
pub const ANTIPODAL: f64 = 1e-9;

/// Below this objective gap finite precision dominates and `t^2 (f - f*)`
/// is no longer meaningful.
pub const STAGNATION: f64 = 1e-12;

/// Relative slack for the discrete energy decay checks: `1e-8 * (1 + W_0)`.
pub const ENERGY_SLACK: f64 = 1e-8;
