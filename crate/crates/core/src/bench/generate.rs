//! Seeded instance generators for the three benchmark problems.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::oracle::{eigenvalue_oracle, karcher_oracle, KARCHER_TOL};
use super::spec::{InstanceSpec, ProblemKind};
use crate::error::{input, Result};
use crate::linalg::{expm_sym, logm_spd, symmetrize};
use crate::manifold::{Hemisphere, Manifold, Point};
use crate::objectives::Objective;
use crate::problem::{BenchmarkOracle, ProblemInstance};

pub fn instance_id(spec: &InstanceSpec) -> String {
    format!("{}-m{}-n{}-seed{}", spec.problem, spec.m, spec.n, spec.seed)
}

fn rng_for(spec: &InstanceSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `U diag(λ) Uᵀ` with `λ` uniform in the open interval `range`.
pub fn random_spd(n: usize, range: (f64, f64), rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let u = random_orthogonal(n, rng);
    let (lo, hi) = range;
    let lams: Vec<f64> = (0..n)
        .map(|_| loop {
            let l = rng.random_range(lo..hi);
            if l > lo {
                break l;
            }
        })
        .collect();
    let mut scaled = u.clone();
    for (j, l) in lams.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*l);
    }
    symmetrize(&(scaled * u.transpose()))
}

/// Eigenvalue problem: `A = GᵀG/β` and a start drawn uniformly on the
/// hemisphere centred at the oracle's top eigenvector.
pub fn gen_eigenvalue_instance(spec: &InstanceSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    if spec.problem != ProblemKind::Eigenvalue {
        return input("spec is not an eigenvalue problem");
    }
    let mut rng = rng_for(spec);
    let g = gaussian(spec.m, spec.n, &mut rng);
    let a = symmetrize(&(g.transpose() * &g)) / spec.beta;
    let oracle = eigenvalue_oracle(&a)?;
    let space = Hemisphere::with_pole(&oracle.zref)?;
    let x0 = space.random_point(&mut rng);
    let obj = Objective::rayleigh(a, space)?;
    ProblemInstance::new(instance_id(spec), obj, x0)?.with_oracle(oracle)
}

/// Karcher mean problem started from the log-Euclidean mean
/// `P₀ = Expm((1/m) Σ Logm(A_j))`; the oracle is the fixed-point iteration.
pub fn gen_karcher_instance(spec: &InstanceSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    if spec.problem != ProblemKind::Karcher {
        return input("spec is not a karcher problem");
    }
    let mut rng = rng_for(spec);
    let mats: Vec<_> = (0..spec.m)
        .map(|_| random_spd(spec.n, spec.eig_range, &mut rng))
        .collect();
    let x0 = log_euclidean_mean(&mats)?;
    let obj = Objective::karcher(mats)?;
    let inst = ProblemInstance::new(instance_id(spec), obj, x0)?;
    let oracle = karcher_oracle(&inst, KARCHER_TOL)?;
    inst.with_oracle(oracle)
}

/// `Expm((1/m) Σ_j Logm(A_j))`.
pub fn log_euclidean_mean(mats: &[DMatrix<f64>]) -> Result<Point> {
    let Some(first) = mats.first() else {
        return input("mean of an empty set");
    };
    let n = first.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for a in mats {
        acc += logm_spd(a)?;
    }
    Ok(Point::new(expm_sym(&(acc / mats.len() as f64))?))
}

/// Flat quadratic `½ xᵀQx` with a Gaussian start; minimum `0` at the origin.
pub fn gen_flat_instance(spec: &InstanceSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    if spec.problem != ProblemKind::Flat {
        return input("spec is not a flat problem");
    }
    let mut rng = rng_for(spec);
    let q = random_spd(spec.n, spec.eig_range, &mut rng);
    let x0 = Point::new(gaussian(spec.n, 1, &mut rng));
    let obj = Objective::flat_quadratic(q)?;
    let oracle = BenchmarkOracle {
        fstar: 0.0,
        zref: Point::new(DMatrix::zeros(spec.n, 1)),
        method: "closed-form".into(),
        grad_norm: 0.0,
        iterations: 0,
    };
    ProblemInstance::new(instance_id(spec), obj, x0)?.with_oracle(oracle)
}

/// Instance around user-supplied matrices, started the same way generated
/// instances are: uniformly on the hemisphere (eigenvalue), at the
/// log-Euclidean mean (karcher), or at a Gaussian point (flat).
pub fn instance_from_matrices(
    problem: ProblemKind,
    mats: Vec<DMatrix<f64>>,
    seed: u64,
    id: impl Into<String>,
) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (obj, oracle) = super::io::objective_from_matrices(problem, mats)?;
    let x0 = match problem {
        ProblemKind::Eigenvalue => obj.manifold().random_point(&mut rng),
        ProblemKind::Karcher => {
            let owned: Vec<_> = obj.matrices().into_iter().cloned().collect();
            log_euclidean_mean(&owned)?
        }
        ProblemKind::Flat => Point::new(gaussian(obj.matrices()[0].nrows(), 1, &mut rng)),
    };
    let inst = ProblemInstance::new(id, obj, x0)?;
    let oracle = match oracle {
        Some(o) => o,
        None => super::io::default_oracle(&inst)?,
    };
    inst.with_oracle(oracle)
}

pub fn generate(spec: &InstanceSpec) -> Result<ProblemInstance> {
    match spec.problem {
        ProblemKind::Eigenvalue => gen_eigenvalue_instance(spec),
        ProblemKind::Karcher => gen_karcher_instance(spec),
        ProblemKind::Flat => gen_flat_instance(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymEig;

    #[test]
    fn orthogonal_factor_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_orthogonal(6, &mut rng);
        assert!((u.transpose() * &u - DMatrix::identity(6, 6)).norm() < 1e-13);
    }

    #[test]
    fn random_spd_spectrum_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_spd(8, (0.0, 100.0), &mut rng);
        let eig = SymEig::new(&a).unwrap();
        assert!(eig.min() > 0.0 && eig.max() < 100.0);
    }

    #[test]
    fn scalar_eigenvalue_instance() {
        let mut spec = InstanceSpec::desk(ProblemKind::Eigenvalue, 5);
        spec.n = 1;
        spec.m = 3;
        let inst = gen_eigenvalue_instance(&spec).unwrap();
        let a = inst.objective.matrices()[0][(0, 0)];
        assert!(a >= 0.0);
        assert!((inst.oracle().unwrap().fstar + a / 2.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_start_is_inside_hemisphere() {
        let inst = generate(&InstanceSpec::desk(ProblemKind::Eigenvalue, 8)).unwrap();
        assert!(inst.objective.manifold().contains(&inst.x0));
        assert!(inst.objective.manifold().contains(&inst.oracle().unwrap().zref));
    }

    #[test]
    fn generation_is_deterministic() {
        for p in [ProblemKind::Eigenvalue, ProblemKind::Karcher, ProblemKind::Flat] {
            let spec = InstanceSpec::desk(p, 17);
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            assert_eq!(a.objective.matrices(), b.objective.matrices());
            assert_eq!(a.x0, b.x0);
            let mut other = spec.clone();
            other.seed = 18;
            let c = generate(&other).unwrap();
            assert_ne!(a.objective.matrices(), c.objective.matrices());
        }
    }

    #[test]
    fn matrices_reproduce_generated_oracles() {
        for p in [ProblemKind::Eigenvalue, ProblemKind::Karcher, ProblemKind::Flat] {
            let mut spec = InstanceSpec::desk(p, 9);
            spec.n = 5;
            let inst = generate(&spec).unwrap();
            let mats = inst.objective.matrices().into_iter().cloned().collect();
            let back = instance_from_matrices(p, mats, 9, "copy").unwrap();
            let (a, b) = (inst.oracle().unwrap(), back.oracle().unwrap());
            assert!((a.fstar - b.fstar).abs() <= 1e-12 * (1.0 + a.fstar.abs()));
            assert!(back.objective.manifold().contains(&back.x0));
        }
    }

    #[test]
    fn single_matrix_karcher_starts_at_minimum() {
        let mut spec = InstanceSpec::desk(ProblemKind::Karcher, 3);
        spec.m = 1;
        let inst = gen_karcher_instance(&spec).unwrap();
        let a1 = inst.objective.matrices()[0].clone();
        assert!((inst.x0.coords() - &a1).norm() < 1e-10 * a1.norm());
        let oracle = inst.oracle().unwrap();
        assert_eq!(oracle.iterations, 0);
        assert!(oracle.fstar.abs() < 1e-20);
    }
}
