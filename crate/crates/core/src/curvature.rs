//! Curvature-dependent comparison functions and the damping threshold `δ`.
//!
//! `σ(p) = √K_max·p·cot(√K_max·p)` (or 1 when `K_max ≤ 0`) and
//! `ξ(p) = √−K_min·p·coth(√−K_min·p)` (or 1 when `K_min ≥ 0`) bound the
//! eigenvalues of the Hessian of `½ d(·, z)²` at distance `p` from `z`.
//! With `ζ = ξ(D)` on a working set of diameter `D`, the flow behaves like
//! the Euclidean one with the threshold 3 replaced by `δ = 2ζ + 1`.

use std::f64::consts::PI;

use rand::RngCore;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::manifold::{Manifold, Point};

/// Below this value of `√|K|·p` the series expansions are used.
const SERIES_THRESHOLD: f64 = 1e-4;

/// `s·cot(s)` with a series branch near zero.
fn s_cot_s(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        let s2 = s * s;
        1.0 - s2 / 3.0 - s2 * s2 / 45.0
    } else {
        s / s.tan()
    }
}

/// `s·coth(s)` with a series branch near zero.
fn s_coth_s(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        let s2 = s * s;
        1.0 + s2 / 3.0 - s2 * s2 / 45.0
    } else {
        s / s.tanh()
    }
}

/// Lower comparison function. Errors when `√K_max·p ≥ π`.
pub fn sigma(p: f64, k_max: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return input(format!("sigma needs p >= 0, got {p}"));
    }
    if k_max <= 0.0 {
        return Ok(1.0);
    }
    let s = k_max.sqrt() * p;
    if s >= PI {
        return domain(format!(
            "sqrt(K_max)*p = {s} reaches the conjugate radius pi"
        ));
    }
    Ok(s_cot_s(s))
}

/// Upper comparison function.
pub fn xi(p: f64, k_min: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return input(format!("xi needs p >= 0, got {p}"));
    }
    if k_min >= 0.0 {
        return Ok(1.0);
    }
    Ok(s_coth_s((-k_min).sqrt() * p))
}

/// Curvature bounds, working diameter and the derived constants `ζ`, `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub k_min: f64,
    pub k_max: f64,
    pub diameter: f64,
    pub zeta: f64,
    pub delta: f64,
}

impl CurvatureProfile {
    /// Builds the profile, enforcing `D < π/√K_max` when `K_max > 0`.
    pub fn new(k_min: f64, k_max: f64, diameter: f64) -> Result<Self> {
        if !(k_min.is_finite() && k_max.is_finite()) || k_min > k_max {
            return input(format!(
                "curvature bounds must satisfy K_min <= K_max, got [{k_min}, {k_max}]"
            ));
        }
        if !(diameter.is_finite() && diameter > 0.0) {
            return input(format!("diameter must be positive and finite, got {diameter}"));
        }
        if k_max > 0.0 && diameter >= PI / k_max.sqrt() {
            return input(format!(
                "diameter {diameter} violates D < pi/sqrt(K_max) = {}",
                PI / k_max.sqrt()
            ));
        }
        let zeta = xi(diameter, k_min)?;
        Ok(Self {
            k_min,
            k_max,
            diameter,
            zeta,
            delta: 2.0 * zeta + 1.0,
        })
    }

    /// Guaranteed decay exponent of `f(X(t)) − f*`.
    pub fn rate_exponent(&self, alpha: f64) -> f64 {
        rate_exponent(alpha, self.delta)
    }
}

/// `p(α) = min(2, 2α/δ)`.
pub fn rate_exponent(alpha: f64, delta: f64) -> f64 {
    (2.0 * alpha / delta).min(2.0)
}

/// One sampled instance of the Hessian sandwich.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichSample {
    pub distance: f64,
    pub speed_sq: f64,
    /// `<∇_v Log_x z, −v>` by central differences.
    pub middle: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub samples: Vec<SandwichSample>,
    pub violations: usize,
    /// `min (middle − lower) / ‖v‖²`; negative means the lower bound failed.
    pub worst_lower_margin: f64,
    /// `min (upper − middle) / ‖v‖²`; negative means the upper bound failed.
    pub worst_upper_margin: f64,
    pub tolerance: f64,
}

impl HessianReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Central-difference step for the covariant derivative.
pub const HESSIAN_FD_STEP: f64 = 1e-5;

/// Relative tolerance for the sandwich, scaled by `‖v‖²`.
pub const HESSIAN_TOL: f64 = 1e-4;

/// Covariant derivative of `Y(x) = Log_x z` along `v`, paired with `−v`.
///
/// Values of `Y` at `exp(x, ±h v)` are transported back to `x` before the
/// difference is taken.
pub fn log_field_hessian(
    m: &dyn Manifold,
    x: &Point,
    v: &crate::manifold::Tangent,
    z: &Point,
    h: f64,
) -> Result<f64> {
    let speed = m.norm(x, v)?;
    if h * speed < 1e-12 {
        return Err(Error::Numerical(format!(
            "differencing step {h:e} underflows for a vector of norm {speed:e}"
        )));
    }
    let plus = m.exp(x, &v.scaled(h))?;
    let minus = m.exp(x, &v.scaled(-h))?;
    let y_plus = m.transport(&plus, x, &m.log(&plus, z)?)?;
    let y_minus = m.transport(&minus, x, &m.log(&minus, z)?)?;
    let deriv = y_plus.combine(1.0 / (2.0 * h), &y_minus, -1.0 / (2.0 * h))?;
    Ok(-m.inner(x, &deriv, v)?)
}

/// Samples `(x, v)` with `x` at distance up to `profile.diameter` from `z`
/// (kept below the conjugate radius) and checks
/// `σ(d)‖v‖² ≤ <∇_v Log_x z, −v> ≤ ξ(d)‖v‖²` within `1e-4·‖v‖²`.
pub fn hessian_bound_check(
    m: &dyn Manifold,
    z: &Point,
    samples: usize,
    profile: &CurvatureProfile,
    rng: &mut dyn RngCore,
) -> Result<HessianReport> {
    let mut max_r = profile.diameter;
    if profile.k_max > 0.0 {
        // stay clear of the cut locus where log/σ blow up
        max_r = max_r.min(0.95 * PI / profile.k_max.sqrt());
    }
    let radius = Uniform::new_inclusive(0.05 * max_r, max_r).map_err(|e| Error::Input(e.to_string()))?;
    let speed = Uniform::new_inclusive(0.2, 2.0).map_err(|e| Error::Input(e.to_string()))?;

    let mut out = Vec::with_capacity(samples);
    let mut violations = 0;
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi = f64::INFINITY;
    for _ in 0..samples {
        let r = radius.sample(rng);
        let dir = m.random_tangent(z, r, rng)?;
        let x = m.exp(z, &dir)?;
        let d = m.distance(&x, z)?;
        let v = m.random_tangent(&x, speed.sample(rng), rng)?;
        let vv = m.inner(&x, &v, &v)?;
        let middle = log_field_hessian(m, &x, &v, z, HESSIAN_FD_STEP)?;
        let lower = sigma(d, profile.k_max)? * vv;
        let upper = xi(d, profile.k_min)? * vv;
        let lo_margin = (middle - lower) / vv;
        let hi_margin = (upper - middle) / vv;
        worst_lo = worst_lo.min(lo_margin);
        worst_hi = worst_hi.min(hi_margin);
        if lo_margin < -HESSIAN_TOL || hi_margin < -HESSIAN_TOL {
            violations += 1;
        }
        out.push(SandwichSample {
            distance: d,
            speed_sq: vv,
            middle,
            lower,
            upper,
        });
    }
    Ok(HessianReport {
        samples: out,
        violations,
        worst_lower_margin: worst_lo,
        worst_upper_margin: worst_hi,
        tolerance: HESSIAN_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sigma_special_values() {
        assert_eq!(sigma(123.0, -1.0).unwrap(), 1.0);
        assert_eq!(sigma(0.0, 1.0).unwrap(), 1.0);
        assert!(sigma(FRAC_PI_2, 1.0).unwrap().abs() < 1e-15);
        assert!(matches!(sigma(PI, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn xi_special_values() {
        assert_eq!(xi(7.0, 0.5).unwrap(), 1.0);
        assert_eq!(xi(0.0, -1.0).unwrap(), 1.0);
        // p coth p at p = sqrt(0.1)*4.46
        let s = 0.1f64.sqrt() * 4.46;
        let want = s * s.cosh() / s.sinh();
        assert!((xi(4.46, -0.1).unwrap() - want).abs() < 1e-15);
        assert!((xi(4.46, -0.1).unwrap() - 1.59).abs() < 0.01);
    }

    #[test]
    fn series_matches_direct_near_threshold() {
        for &s in &[1e-6f64, 1e-5, 5e-5, 9.9e-5] {
            let direct_cot = s / s.tan();
            let direct_coth = s / s.tanh();
            assert!((s_cot_s(s) - direct_cot).abs() < 1e-12);
            assert!((s_coth_s(s) - direct_coth).abs() < 1e-12);
        }
    }

    #[test]
    fn profiles() {
        let h = CurvatureProfile::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!((h.zeta, h.delta), (1.0, 3.0));
        let f = CurvatureProfile::new(0.0, 0.0, 1e6).unwrap();
        assert_eq!(f.delta, 3.0);
        let s = CurvatureProfile::new(-0.1, 0.0, 4.46).unwrap();
        assert!(s.zeta > 1.0 && s.delta > 3.0);
        assert_eq!(s.delta, 2.0 * s.zeta + 1.0);
        assert!((s.delta - 4.1).abs() < 0.1, "delta = {}", s.delta);
        assert!(CurvatureProfile::new(1.0, 1.0, PI).is_err());
        assert!(CurvatureProfile::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rate_exponent_branches() {
        assert_eq!(rate_exponent(3.0, 3.0), 2.0);
        assert_eq!(rate_exponent(1.5, 3.0), 1.0);
        assert_eq!(rate_exponent(8.0, 3.0), 2.0);
    }
}
