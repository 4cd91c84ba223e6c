//! Semi-implicit integration of `∇_Ẋ Ẋ + (α/t) Ẋ + grad f(X) = 0` in phase
//! space `(X, V)`:
//!
//! ```text
//! Ṽ_{k+1} = (1 − αΔt/t_k) V_k − Δt · grad f(X_k)
//! X_{k+1} = Exp_{X_k}(Δt · Ṽ_{k+1})
//! V_{k+1} = Γ_{X_k}^{X_{k+1}} Ṽ_{k+1}
//! ```
//!
//! The clock starts at `t_0 = time_origin > 0` with `V_0 = 0`, and step `k`
//! uses `t_k = time_origin + k·Δt`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::manifold::{Manifold, Point, Tangent};
use crate::objectives::Objective;
use crate::problem::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub dt: f64,
    pub horizon: f64,
    pub time_origin: f64,
    pub record_every: usize,
}

impl SolverConfig {
    /// Clock starting at `t_0 = dt`, every step recorded.
    pub fn new(alpha: f64, dt: f64, horizon: f64) -> Self {
        Self {
            alpha,
            dt,
            horizon,
            time_origin: dt,
            record_every: 1,
        }
    }

    pub fn with_time_origin(mut self, t0: f64) -> Self {
        self.time_origin = t0;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.dt, self.horizon, self.time_origin]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return input("solver configuration contains non-finite values");
        }
        if self.alpha <= 0.0 {
            return input(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.dt <= 0.0 {
            return input(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt > self.horizon {
            return input(format!("dt = {} exceeds horizon {}", self.dt, self.horizon));
        }
        if self.time_origin < self.dt {
            return input(format!(
                "time origin {} must be at least dt = {}",
                self.time_origin, self.dt
            ));
        }
        if self.horizon < self.time_origin {
            return input(format!(
                "horizon {} precedes time origin {}",
                self.horizon, self.time_origin
            ));
        }
        if self.record_every == 0 {
            return input("record_every must be at least 1");
        }
        Ok(())
    }

    /// Number of steps from the time origin to the horizon.
    pub fn steps(&self) -> usize {
        ((self.horizon - self.time_origin) / self.dt + 1e-9).floor() as usize
    }

    /// Time attached to step index `k`.
    pub fn time_at(&self, k: usize) -> f64 {
        self.time_origin + k as f64 * self.dt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub step: usize,
    pub t: f64,
    pub x: Point,
    pub v: Tangent,
    /// Time-centred velocity `½(V_k + Ṽ_{k+1})` in the tangent space at `x`.
    /// `V_k` lags `X_k` by half a step; the average is second-order accurate
    /// and is what the energy diagnostics use.
    pub v_mid: Tangent,
    pub f_val: f64,
    pub grad_norm: f64,
    pub containment_ok: bool,
}

/// Why a run stopped before its horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub step: usize,
    pub t: f64,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub instance_id: String,
    pub config: SolverConfig,
    pub samples: Vec<TrajectorySample>,
    pub failure: Option<StepFailure>,
    /// Whether the damping factor `|1 − αΔt/t_k|` exceeded 1 at a step with
    /// nonzero velocity.
    pub damping_overshoot: bool,
}

impl Trajectory {
    pub fn containment_violations(&self) -> usize {
        self.samples.iter().filter(|s| !s.containment_ok).count()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

fn outgoing_velocity(v: &Tangent, grad: &Tangent, t: f64, dt: f64, alpha: f64) -> Result<Tangent> {
    v.combine(1.0 - alpha * dt / t, grad, -dt)
}

fn advance(m: &dyn Manifold, x: &Point, v_tilde: &Tangent, dt: f64) -> Result<(Point, Tangent)> {
    let x_next = m.exp(x, &v_tilde.scaled(dt))?;
    let v_next = m.transport(x, &x_next, v_tilde)?;
    Ok((x_next, v_next))
}

/// One semi-implicit step from `(x_k, v_k)` at time `t_k`.
pub fn step(
    obj: &Objective,
    x: &Point,
    v: &Tangent,
    t: f64,
    dt: f64,
    alpha: f64,
) -> Result<(Point, Tangent)> {
    if !(t > 0.0) {
        return input(format!("step time must be positive, got {t}"));
    }
    let g = obj.gradient(x)?;
    let v_tilde = outgoing_velocity(v, &g, t, dt, alpha)?;
    advance(obj.manifold(), x, &v_tilde, dt)
}

/// Integrates from `instance.x0` at rest up to the horizon.
///
/// Configuration errors are returned; a failing step ends the run early and
/// is recorded in [`Trajectory::failure`] alongside the samples gathered so far.
pub fn solve(instance: &ProblemInstance, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let obj = &instance.objective;
    let m = obj.manifold();
    let n_steps = config.steps();

    let contained = |x: &Point| -> bool {
        m.contains(x)
            && instance
                .region
                .as_ref()
                .is_none_or(|ball| ball.contains(m, x))
    };

    let mut traj = Trajectory {
        instance_id: instance.id.clone(),
        config: *config,
        samples: Vec::with_capacity(n_steps / config.record_every + 2),
        failure: None,
        damping_overshoot: false,
    };

    let mut x = instance.x0.clone();
    let mut v = Tangent::zero(&x);
    for k in 0..=n_steps {
        let t = config.time_at(k);
        let outcome = (|| -> Result<Option<(Point, Tangent)>> {
            let g = obj.gradient(&x)?;
            let v_tilde = outgoing_velocity(&v, &g, t, config.dt, config.alpha)?;
            if k % config.record_every == 0 || k == n_steps {
                traj.samples.push(TrajectorySample {
                    step: k,
                    t,
                    x: x.clone(),
                    v: v.clone(),
                    v_mid: v.combine(0.5, &v_tilde, 0.5)?,
                    f_val: obj.value(&x)?,
                    grad_norm: m.norm(&x, &g)?,
                    containment_ok: contained(&x),
                });
            }
            if k == n_steps {
                return Ok(None);
            }
            let damping = 1.0 - config.alpha * config.dt / t;
            if damping.abs() > 1.0 && !v.is_zero() && !traj.damping_overshoot {
                log::warn!(
                    "instance {}: damping factor {damping:.3} at t = {t} exceeds 1 in magnitude",
                    instance.id
                );
                traj.damping_overshoot = true;
            }
            advance(m, &x, &v_tilde, config.dt).map(Some)
        })();
        match outcome {
            Ok(Some((xn, vn))) => {
                x = xn;
                v = vn;
            }
            Ok(None) => break,
            Err(e) => {
                let err = Error::Step {
                    step: k,
                    t,
                    source: Box::new(e),
                };
                log::error!("instance {}: {err}", instance.id);
                traj.failure = Some(StepFailure {
                    step: k,
                    t,
                    message: err.to_string(),
                });
                break;
            }
        }
    }
    Ok(traj)
}
