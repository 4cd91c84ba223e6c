#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use riemflow::bench::{generate, InstanceSpec, ProblemKind};
use riemflow::{Objective, Point, ProblemInstance};

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)` from `(t0, y0)`,
/// returning the state at each of the increasing times in `at`.
pub fn dopri45(
    f: impl Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    at: &[f64],
    rtol: f64,
    atol: f64,
) -> Vec<Vec<f64>> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h: f64 = 1e-4;
    let mut out = Vec::with_capacity(at.len());
    for &target in at {
        while t < target {
            let step = h.min(target - t);
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
            for s in 0..7 {
                let ys: Vec<f64> = (0..n)
                    .map(|i| y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>())
                    .collect();
                k.push(f(t + C[s] * step, &ys));
            }
            let y5: Vec<f64> = (0..n)
                .map(|i| y[i] + step * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>())
                .collect();
            let err = (0..n)
                .map(|i| {
                    let e = step * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
                    let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                    (e / sc).powi(2)
                })
                .sum::<f64>()
                / n as f64;
            let err = err.sqrt();
            if err <= 1.0 {
                t += step;
                y = y5;
            }
            let factor: f64 = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
        }
        out.push(y.clone());
    }
    out
}

/// `J₁(t) = (1/π) ∫₀^π cos(τ − t sin τ) dτ` by composite Simpson.
pub fn bessel_j1(t: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let g = |tau: f64| (tau - t * tau.sin()).cos();
    let mut s = g(0.0) + g(PI);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    s * h / 3.0 / PI
}

/// `f = ½‖x‖²` on `Rⁿ` started at `x0`, with zero reference.
pub fn unit_quadratic(x0: &[f64]) -> ProblemInstance {
    let n = x0.len();
    let obj = Objective::flat_quadratic(DMatrix::identity(n, n)).unwrap();
    let inst = ProblemInstance::new("unit-quadratic", obj, Point::from_vec(x0.to_vec())).unwrap();
    let oracle = riemflow::BenchmarkOracle {
        fstar: 0.0,
        zref: Point::new(DMatrix::zeros(n, 1)),
        method: "closed-form".into(),
        grad_norm: 0.0,
        iterations: 0,
    };
    inst.with_oracle(oracle).unwrap()
}

pub fn desk(problem: ProblemKind, seed: u64) -> ProblemInstance {
    generate(&InstanceSpec::desk(problem, seed)).unwrap()
}

/// Small instance of each problem, for property tests.
pub fn small(problem: ProblemKind, seed: u64) -> ProblemInstance {
    let mut spec = InstanceSpec::desk(problem, seed);
    match problem {
        ProblemKind::Eigenvalue => {
            spec.m = 12;
            spec.n = 6;
            spec.beta = 10.0;
        }
        ProblemKind::Karcher => {
            spec.m = 3;
            spec.n = 4;
        }
        ProblemKind::Flat => spec.n = 6,
    }
    generate(&spec).unwrap()
}
