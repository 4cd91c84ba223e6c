//! Lyapunov energies and rate estimates computed from recorded trajectories.
//!
//! * `W(t) = ½‖Ẋ‖² + f(X) − f*` is non-increasing for every `α > 0`.
//! * For `0 < α ≤ δ` and `p = α/δ`, the energy
//!   `A + B + C = t^{2p}(f − f*) + ½‖−λ Log_X z + t^p Ẋ‖² + (η/2) d(X, z)²`
//!   with `λ = 2p t^{p−1}`, `η = 2p(α − 4p + 1) t^{2p−2}` is non-increasing.
//! * `f(X(t)) − f* = O(t^{−min(2, 2α/δ)})`, and `t²(f − f*) → 0` when `α > δ`.
//!
//! Every energy is evaluated on the recorded samples with the time-centred
//! velocity `½(V_k + Ṽ_{k+1})`, which lives in the tangent space at `X_k` and
//! matches `Ẋ(t_k)` to second order in `Δt`.

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureProfile;
use crate::error::{input, Result};
use crate::integrator::Trajectory;
use crate::manifold::{Manifold, Point};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub t: f64,
    /// `f(X) − f*`, clamped at zero.
    pub gap: f64,
    /// `‖V‖` with the centred velocity.
    pub speed: f64,
    /// `½‖V‖² + f − f*`.
    pub w: f64,
    /// `t²(f − f*)`.
    pub scaled_gap: f64,
    /// `½ d(X, z)²`.
    pub h: f64,
    /// Set from the first sample with `f − f* < 1e-12` onwards.
    pub stagnated: bool,
}

/// Per-sample `W`, scaled gap and `h` relative to the reference `(z, f*)`.
///
/// Errors when `f*` lies above the smallest recorded value by more than
/// `1e-12`: the benchmark is then not a lower bound and every gap is wrong.
pub fn energy_trace(
    m: &dyn Manifold,
    traj: &Trajectory,
    z: &Point,
    fstar: f64,
) -> Result<Vec<EnergyTrace>> {
    let fmin = traj
        .samples
        .iter()
        .map(|s| s.f_val)
        .fold(f64::INFINITY, f64::min);
    if fstar > fmin + tol::STAGNATION {
        return input(format!(
            "benchmark f* = {fstar:e} exceeds the trajectory minimum {fmin:e}"
        ));
    }
    let mut stagnated = false;
    traj.samples
        .iter()
        .map(|s| {
            let gap = (s.f_val - fstar).max(0.0);
            stagnated |= gap < tol::STAGNATION;
            let speed_sq = m.inner(&s.x, &s.v_mid, &s.v_mid)?;
            let d = m.distance(&s.x, z)?;
            Ok(EnergyTrace {
                t: s.t,
                gap,
                speed: speed_sq.sqrt(),
                w: 0.5 * speed_sq + gap,
                scaled_gap: s.t * s.t * gap,
                h: 0.5 * d * d,
                stagnated,
            })
        })
        .collect()
}

/// Time of the first sample whose gap fell below `1e-12`.
pub fn stagnation_time(trace: &[EnergyTrace]) -> Option<f64> {
    trace.iter().find(|e| e.stagnated).map(|e| e.t)
}

/// `(t, t²(f − f*))` up to, and excluding, the first stagnated sample.
pub fn scaled_gap_series(trace: &[EnergyTrace]) -> Vec<(f64, f64)> {
    trace
        .iter()
        .take_while(|e| !e.stagnated)
        .map(|e| (e.t, e.scaled_gap))
        .collect()
}

/// `λ(t) = 2p t^{p−1}`.
pub fn lambda_coeff(p: f64, t: f64) -> f64 {
    2.0 * p * t.powf(p - 1.0)
}

/// `η(t) = 2p(α − 4p + 1) t^{2p−2}`.
pub fn eta_coeff(p: f64, alpha: f64, t: f64) -> f64 {
    2.0 * p * (alpha - 4.0 * p + 1.0) * t.powf(2.0 * p - 2.0)
}

/// Exponent used in the sub-critical energy: `α/δ`.
///
/// The general choice `min(1, α/δ, (α+1)/4)` reduces to `α/δ` whenever
/// `δ ≥ 3` and `α ≤ δ`; [`subcritical_exponent_min_form`] keeps the long form
/// for cross-checking.
pub fn subcritical_exponent(alpha: f64, delta: f64) -> f64 {
    alpha / delta
}

pub fn subcritical_exponent_min_form(alpha: f64, delta: f64) -> f64 {
    1f64.min(alpha / delta).min((alpha + 1.0) / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalEnergy {
    pub t: f64,
    pub p: f64,
    pub lambda_t: f64,
    pub eta_t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub w: f64,
}

/// Sub-critical Lyapunov energy along the trajectory; requires `0 < α ≤ δ`.
pub fn subcritical_energy(
    m: &dyn Manifold,
    traj: &Trajectory,
    z: &Point,
    fstar: f64,
    alpha: f64,
    profile: &CurvatureProfile,
) -> Result<Vec<SubcriticalEnergy>> {
    if !(alpha > 0.0) || alpha > profile.delta {
        return input(format!(
            "sub-critical energy needs 0 < alpha <= delta = {}, got {alpha}",
            profile.delta
        ));
    }
    let p = subcritical_exponent(alpha, profile.delta);
    traj.samples
        .iter()
        .map(|s| {
            let t = s.t;
            let lambda_t = lambda_coeff(p, t);
            let eta_t = eta_coeff(p, alpha, t);
            let log_z = m.log(&s.x, z)?;
            let mixed = log_z.combine(-lambda_t, &s.v_mid, t.powf(p))?;
            let a = t.powf(2.0 * p) * (s.f_val - fstar).max(0.0);
            let b = 0.5 * m.inner(&s.x, &mixed, &mixed)?;
            let c = 0.5 * eta_t * m.inner(&s.x, &log_z, &log_z)?;
            Ok(SubcriticalEnergy {
                t,
                p,
                lambda_t,
                eta_t,
                a,
                b,
                c,
                w: a + b + c,
            })
        })
        .collect()
}

/// Largest single-step increase of a series against the slack `1e-8·(1 + W_0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub max_increase: f64,
    pub slack: f64,
    /// Time at which the largest increase ends.
    pub worst_t: Option<f64>,
    pub passed: bool,
}

pub fn monotonicity(series: &[(f64, f64)]) -> MonotonicityReport {
    let w0 = series.first().map_or(0.0, |s| s.1);
    let slack = tol::ENERGY_SLACK * (1.0 + w0.abs());
    let mut max_increase = f64::NEG_INFINITY;
    let mut worst_t = None;
    for w in series.windows(2) {
        let inc = w[1].1 - w[0].1;
        if inc > max_increase {
            max_increase = inc;
            worst_t = Some(w[1].0);
        }
    }
    if worst_t.is_none() {
        max_increase = 0.0;
    }
    MonotonicityReport {
        max_increase,
        slack,
        worst_t,
        passed: max_increase <= slack,
    }
}

pub fn energy_monotonicity(trace: &[EnergyTrace]) -> MonotonicityReport {
    let series: Vec<_> = trace.iter().map(|e| (e.t, e.w)).collect();
    monotonicity(&series)
}

pub fn subcritical_monotonicity(trace: &[SubcriticalEnergy]) -> MonotonicityReport {
    let series: Vec<_> = trace.iter().map(|e| (e.t, e.w)).collect();
    monotonicity(&series)
}

/// Least-squares power-law fit `y ≈ c·t^{−exponent}` in log-log coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub fitted_exponent: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub samples: usize,
}

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits `log y = a − e·log t` over the points with `y > 0`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return input(format!(
            "rate fit needs at least {MIN_FIT_SAMPLES} usable samples, found {}",
            pts.len()
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return input("rate fit window spans a single time");
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    let t_lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        fitted_exponent: -slope,
        window: (t_lo, t_hi),
        r_squared,
        samples: pts.len(),
    })
}

/// Last decade `[t_end/10, t_end]` of a series, where `t_end` is its last time.
pub fn last_decade(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let t_end = points.last()?.0;
    Some((t_end / 10.0, t_end))
}

fn in_window(points: &[(f64, f64)], window: (f64, f64)) -> Vec<(f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect()
}

/// Decay exponent of `f − f*` over `window`, excluding stagnated samples.
/// Without a window the last decade before stagnation is used.
pub fn fit_rate(trace: &[EnergyTrace], window: Option<(f64, f64)>) -> Result<RateFit> {
    let live: Vec<(f64, f64)> = trace
        .iter()
        .take_while(|e| !e.stagnated)
        .map(|e| (e.t, e.gap))
        .collect();
    let window = match window.or_else(|| last_decade(&live)) {
        Some(w) if w.0 < w.1 => w,
        _ => return input("rate fit window is empty"),
    };
    fit_power_law(&in_window(&live, window))
}

/// Squared geodesic distance to `zref` per sample.
pub fn distance_trace(
    m: &dyn Manifold,
    traj: &Trajectory,
    zref: &Point,
) -> Result<Vec<(f64, f64)>> {
    traj.samples
        .iter()
        .map(|s| m.distance(&s.x, zref).map(|d| (s.t, d * d)))
        .collect()
}

/// Decay exponent of `d(X, z)²`, over the last decade of samples with
/// `d² ≥ floor`.
pub fn fit_distance_rate(trace: &[(f64, f64)], floor: f64) -> Result<RateFit> {
    let live: Vec<(f64, f64)> = trace.iter().copied().take_while(|p| p.1 >= floor).collect();
    let window = match last_decade(&live) {
        Some(w) if w.0 < w.1 => w,
        _ => return input("distance fit window is empty"),
    };
    fit_power_law(&in_window(&live, window))
}

/// Behaviour of `t²(f − f*)` over the last decade before stagnation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecadeDecay {
    pub window: (f64, f64),
    pub final_value: f64,
    pub max_value: f64,
}

impl DecadeDecay {
    /// Final value below half of the decade maximum.
    pub fn is_decreasing(&self) -> bool {
        self.final_value < 0.5 * self.max_value
    }
}

pub fn scaled_gap_decay(trace: &[EnergyTrace]) -> Option<DecadeDecay> {
    let series = scaled_gap_series(trace);
    let window = last_decade(&series)?;
    let tail = in_window(&series, window);
    let final_value = tail.last()?.1;
    let max_value = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Some(DecadeDecay {
        window,
        final_value,
        max_value,
    })
}
