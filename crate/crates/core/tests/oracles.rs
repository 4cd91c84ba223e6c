mod common;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemflow::bench::generate::random_spd;
use riemflow::bench::{eigenvalue_oracle, karcher_oracle, log_euclidean_mean, ProblemKind, KARCHER_TOL};
use riemflow::{solve, Objective, ProblemInstance, SolverConfig};

fn sym_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let e = a.clone().symmetric_eigen();
    &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f)) * e.eigenvectors.transpose()
}

/// `A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
fn geometric_midpoint(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let s = sym_fn(a, f64::sqrt);
    let si = sym_fn(a, |l| 1.0 / l.sqrt());
    let inner = &si * b * &si;
    let inner = (&inner + inner.transpose()) * 0.5;
    &s * sym_fn(&inner, f64::sqrt) * &s
}

fn power_iteration(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let mut v = DVector::from_fn(a.nrows(), |i, _| 1.0 + i as f64 * 1e-3);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = a * &v;
        let next = w.norm();
        let w = w / next;
        let done = (next - lambda).abs() <= 1e-15 * next && (&w - &v).norm() < 1e-13;
        v = w;
        lambda = next;
        if done {
            break;
        }
    }
    (v.dot(&(a * &v)), v)
}

#[test]
fn eigenvalue_oracle_agrees_with_power_iteration() {
    for seed in [1, 2, 3] {
        let inst = common::desk(ProblemKind::Eigenvalue, seed);
        let a = inst.objective.matrices()[0].clone();
        let oracle = inst.oracle().unwrap();
        let (lambda, v) = power_iteration(&a);
        assert!((oracle.fstar + lambda / 2.0).abs() < 1e-12 * lambda, "seed {seed}");
        let z = oracle.zref.coords().column(0).into_owned();
        assert!(1.0 - z.dot(&v).abs() < 1e-10);
        assert!(oracle.grad_norm < 1e-10);
        assert!(inst.objective.gradient_norm(&oracle.zref).unwrap() < 1e-10);
    }
}

#[test]
fn scalar_eigenvalue_problem() {
    let o = eigenvalue_oracle(&DMatrix::from_element(1, 1, 4.0)).unwrap();
    assert_eq!(o.fstar, -2.0);
    assert_eq!(o.zref.coords()[(0, 0)], 1.0);
}

#[test]
fn trajectory_never_beats_eigenvalue_oracle() {
    let inst = common::desk(ProblemKind::Eigenvalue, 5);
    let fstar = inst.oracle().unwrap().fstar;
    let traj = solve(&inst, &SolverConfig::new(6.0, 0.1, 200.0).with_time_origin(0.6)).unwrap();
    let best = traj.samples.iter().map(|s| s.f_val).fold(f64::INFINITY, f64::min);
    assert!(best >= fstar - 1e-12, "trajectory reached {best}, oracle {fstar}");
    assert!(best - fstar < 1e-10);
}

#[test]
fn two_matrix_karcher_mean_is_geometric_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 5, 10] {
        let a = random_spd(n, (0.0, 100.0), &mut rng);
        let b = random_spd(n, (0.0, 100.0), &mut rng);
        let mid = geometric_midpoint(&a, &b);
        let obj = Objective::karcher(vec![a.clone(), b.clone()]).unwrap();
        let x0 = log_euclidean_mean(&[a, b]).unwrap();
        let inst = ProblemInstance::new("pair", obj, x0).unwrap();
        let oracle = karcher_oracle(&inst, KARCHER_TOL).unwrap();
        let err = (oracle.zref.coords() - &mid).norm() / mid.norm();
        assert!(err < 1e-8, "n = {n}: relative error {err:e}");
        assert!(oracle.grad_norm <= KARCHER_TOL);
    }
}

#[test]
fn desk_karcher_oracle_is_self_certifying() {
    for seed in [42, 7] {
        let inst = common::desk(ProblemKind::Karcher, seed);
        let o = inst.oracle().unwrap();
        assert!(o.grad_norm <= 1e-10);
        assert!(inst.objective.gradient_norm(&o.zref).unwrap() <= 1e-10);
        assert!(o.fstar <= inst.objective.value(&inst.x0).unwrap());
    }
}

#[test]
fn oracle_reports_nonconvergence() {
    // a tolerance below rounding can never be met
    let inst = common::small(ProblemKind::Karcher, 2);
    let err = karcher_oracle(&inst, 0.0).unwrap_err();
    assert!(matches!(err, riemflow::Error::Oracle(_)), "{err}");
}

#[test]
fn karcher_oracle_converges_on_spread_data() {
    // the undamped fixed point oscillates on this instance
    let inst = common::small(ProblemKind::Karcher, 1386263709675510203);
    let o = karcher_oracle(&inst, KARCHER_TOL).unwrap();
    assert!(o.grad_norm <= KARCHER_TOL);
    assert!(o.fstar <= inst.objective.value(&inst.x0).unwrap());
}
