//! Geodesically convex objectives and their Riemannian gradients.
//!
//! * Rayleigh: `f(x) = -½ xᵀAx` on the hemisphere; minimizers are the top
//!   eigenvectors of `A`.
//! * Karcher: `f(P) = Σ_j d(P, A_j)²` on the SPD cone with the
//!   affine-invariant distance.
//! * Flat quadratic: `f(x) = ½ xᵀQx` on `Rⁿ`, with minimizer `0`.

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linalg::{asymmetry, inv_spd, logm_spd, sqrt_pair_spd, symmetrize, SymEig};
use crate::manifold::{random_point_near, Flat, Hemisphere, Manifold, Point, Spd, Tangent};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Rayleigh,
    Karcher,
    FlatQuadratic,
}

#[derive(Clone, Debug)]
pub struct Rayleigh {
    a: DMatrix<f64>,
    space: Hemisphere,
}

#[derive(Clone, Debug)]
pub struct Karcher {
    mats: Vec<DMatrix<f64>>,
    inverses: Vec<DMatrix<f64>>,
    space: Spd,
}

#[derive(Clone, Debug)]
pub struct FlatQuadratic {
    q: DMatrix<f64>,
    space: Flat,
}

/// One of the supported objectives, bound to its manifold.
#[derive(Clone, Debug)]
pub enum Objective {
    Rayleigh(Rayleigh),
    Karcher(Karcher),
    FlatQuadratic(FlatQuadratic),
}

impl Objective {
    /// `-½ xᵀAx` on the hemisphere about `pole`.
    pub fn rayleigh(a: DMatrix<f64>, space: Hemisphere) -> Result<Self> {
        if a.shape() != (space.dim(), space.dim()) {
            return input(format!(
                "Rayleigh matrix must be {n}x{n}, got {:?}",
                a.shape(),
                n = space.dim()
            ));
        }
        if asymmetry(&a) > tol::INVARIANT {
            return input("Rayleigh matrix is not symmetric");
        }
        Ok(Self::Rayleigh(Rayleigh { a: symmetrize(&a), space }))
    }

    /// `Σ_j d(P, A_j)²` for SPD matrices `A_1 … A_m`, `m ≥ 1`.
    pub fn karcher(mats: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return input("Karcher objective needs at least one matrix");
        };
        let space = Spd::new(first.nrows());
        let mut inverses = Vec::with_capacity(mats.len());
        for (j, a) in mats.iter().enumerate() {
            space
                .check_point(&Point::new(a.clone()))
                .map_err(|e| crate::Error::Input(format!("matrix {j}: {e}")))?;
            inverses.push(inv_spd(a)?);
        }
        let mats = mats.iter().map(symmetrize).collect();
        Ok(Self::Karcher(Karcher { mats, inverses, space }))
    }

    /// `½ xᵀQx` for a symmetric positive-definite `Q`.
    pub fn flat_quadratic(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return input("quadratic form must be a nonempty square matrix");
        }
        if asymmetry(&q) > tol::INVARIANT {
            return input("quadratic form is not symmetric");
        }
        if SymEig::new(&q)?.min() <= 0.0 {
            return input("quadratic form is not positive definite");
        }
        let space = Flat::new(q.nrows());
        Ok(Self::FlatQuadratic(FlatQuadratic { q: symmetrize(&q), space }))
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Self::Rayleigh(_) => ObjectiveKind::Rayleigh,
            Self::Karcher(_) => ObjectiveKind::Karcher,
            Self::FlatQuadratic(_) => ObjectiveKind::FlatQuadratic,
        }
    }

    /// The hemisphere of a Rayleigh objective.
    pub fn hemisphere(&self) -> Option<&Hemisphere> {
        match self {
            Self::Rayleigh(r) => Some(&r.space),
            _ => None,
        }
    }

    pub fn manifold(&self) -> &dyn Manifold {
        match self {
            Self::Rayleigh(r) => &r.space,
            Self::Karcher(k) => &k.space,
            Self::FlatQuadratic(f) => &f.space,
        }
    }

    /// Problem data: `[A]`, `[A_1, …, A_m]` or `[Q]`.
    pub fn matrices(&self) -> Vec<&DMatrix<f64>> {
        match self {
            Self::Rayleigh(r) => vec![&r.a],
            Self::Karcher(k) => k.mats.iter().collect(),
            Self::FlatQuadratic(f) => vec![&f.q],
        }
    }

    fn check_shape(&self, x: &Point) -> Result<()> {
        let want = self.manifold().shape();
        if x.shape() != want {
            return input(format!(
                "point of shape {:?} is not on the {} manifold of shape {want:?}",
                x.shape(),
                self.manifold().name()
            ));
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check_shape(x)?;
        match self {
            Self::Rayleigh(r) => {
                let ax = &r.a * x.coords();
                Ok(-0.5 * x.coords().dot(&ax))
            }
            Self::Karcher(k) => {
                let (_, si) = sqrt_pair_spd(x.coords())?;
                k.mats
                    .iter()
                    .map(|a| Spd::distance_with(&si, a).map(|d| d * d))
                    .sum()
            }
            Self::FlatQuadratic(f) => {
                let qx = &f.q * x.coords();
                Ok(0.5 * x.coords().dot(&qx))
            }
        }
    }

    /// Riemannian gradient at `x`.
    ///
    /// Karcher: `2 Σ_j P^{1/2} Logm(P^{1/2} A_j⁻¹ P^{1/2}) P^{1/2}`, i.e.
    /// `-2 Σ_j Log_P A_j`.
    pub fn gradient(&self, x: &Point) -> Result<Tangent> {
        self.check_shape(x)?;
        match self {
            Self::Rayleigh(r) => {
                let ax = &r.a * x.coords();
                r.space.project(x, -ax)
            }
            Self::Karcher(k) => {
                let (s, _) = sqrt_pair_spd(x.coords())?;
                let n = k.space.n();
                let mut acc = DMatrix::zeros(n, n);
                for ainv in &k.inverses {
                    let inner = symmetrize(&(&s * ainv * &s));
                    acc += logm_spd(&inner)?;
                }
                let g = symmetrize(&(&s * acc * &s)) * 2.0;
                Tangent::new(x.clone(), g)
            }
            Self::FlatQuadratic(f) => Tangent::new(x.clone(), &f.q * x.coords()),
        }
    }

    pub fn gradient_norm(&self, x: &Point) -> Result<f64> {
        let g = self.gradient(x)?;
        self.manifold().norm(x, &g)
    }
}

/// Outcome of sampling the first-order geodesic convexity inequality
/// `f(y) ≥ f(x) + <grad f(x), Log_x y>_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub violations: usize,
    /// Most negative `f(y) − f(x) − <grad f(x), Log_x y>` seen (positive when
    /// every pair satisfied the inequality strictly).
    pub worst_margin: f64,
}

/// Samples `samples` pairs in the geodesic ball `(center, radius)` and counts
/// violations beyond `1e-8·(1 + |f(x)|)`. Violations are data, never errors,
/// except for pairs where the geometry itself is undefined.
pub fn geodesic_convexity_check(
    obj: &Objective,
    samples: usize,
    center: &Point,
    radius: f64,
    rng: &mut dyn RngCore,
) -> Result<ConvexityReport> {
    let m = obj.manifold();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x = random_point_near(m, center, radius, rng)?;
        let y = random_point_near(m, center, radius, rng)?;
        let fx = obj.value(&x)?;
        let fy = obj.value(&y)?;
        let g = obj.gradient(&x)?;
        let l = m.log(&x, &y)?;
        let margin = fy - fx - m.inner(&x, &g, &l)?;
        worst = worst.min(margin);
        if margin < -1e-8 * (1.0 + fx.abs()) {
            violations += 1;
        }
    }
    Ok(ConvexityReport {
        samples,
        violations,
        worst_margin: if samples == 0 { 0.0 } else { worst },
    })
}

/// Empirical smoothness and strong-minimum constants around a minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    /// `sup ‖grad f(x) − Γ_y^x grad f(y)‖ / d(x, y)` over sampled pairs.
    pub lipschitz: f64,
    /// `inf 2(f(x) − f(x̃)) / d(x, x̃)²`, floored at zero.
    pub mu: f64,
}

/// Samples points at distance up to `radius` from `xstar` and estimates the
/// strong-minimum modulus `mu` (and an empirical gradient Lipschitz constant).
/// `lipschitz` is reported as at least `mu`.
pub fn estimate_strong_minimum(
    obj: &Objective,
    xstar: &Point,
    samples: usize,
    radius: f64,
    rng: &mut dyn RngCore,
) -> Result<SmoothnessEstimate> {
    let m = obj.manifold();
    let fstar = obj.value(xstar)?;
    let gstar = obj.gradient(xstar)?;
    let mut mu = f64::INFINITY;
    let mut lip: f64 = 0.0;
    for _ in 0..samples {
        let x = random_point_near(m, xstar, radius, rng)?;
        let d = m.distance(&x, xstar)?;
        if d <= 0.0 {
            continue;
        }
        let fx = obj.value(&x)?;
        mu = mu.min(2.0 * (fx - fstar) / (d * d));

        let gx = obj.gradient(&x)?;
        let moved = m.transport(xstar, &x, &gstar)?;
        let diff = gx.combine(1.0, &moved, -1.0)?;
        lip = lip.max(m.norm(&x, &diff)? / d);
    }
    let mu = if mu.is_finite() { mu.max(0.0) } else { 0.0 };
    Ok(SmoothnessEstimate {
        lipschitz: lip.max(mu),
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn rayleigh_identity_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Hemisphere::new(5);
        let obj = Objective::rayleigh(DMatrix::identity(5, 5), s.clone()).unwrap();
        for _ in 0..20 {
            let x = s.random_point(&mut rng);
            assert!((obj.value(&x).unwrap() + 0.5).abs() < 1e-14);
            assert!(obj.gradient_norm(&x).unwrap() < 1e-14);
        }
    }

    #[test]
    fn rayleigh_gradient_vanishes_at_eigenvector() {
        let s = Hemisphere::new(3);
        let obj = Objective::rayleigh(diag(&[3.0, 2.0, 1.0]), s).unwrap();
        let x = Point::from_vec(vec![0.0, 1.0, 0.0]);
        assert_eq!(obj.gradient_norm(&x).unwrap(), 0.0);
        assert_eq!(obj.value(&x).unwrap(), -1.0);
    }

    #[test]
    fn karcher_single_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let obj = Objective::karcher(vec![a.clone()]).unwrap();
        let p = Point::new(a);
        assert!(obj.value(&p).unwrap().abs() < 1e-24);
        assert!(obj.gradient_norm(&p).unwrap() < 1e-13);
    }

    #[test]
    fn flat_quadratic_at_origin() {
        let obj = Objective::flat_quadratic(DMatrix::identity(3, 3)).unwrap();
        let z = Point::from_vec(vec![0.0; 3]);
        assert_eq!(obj.value(&z).unwrap(), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(Objective::karcher(vec![]).is_err());
        assert!(Objective::karcher(vec![diag(&[1.0, -1.0])]).is_err());
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = 1.0;
        assert!(Objective::rayleigh(a, Hemisphere::new(2)).is_err());
        assert!(Objective::flat_quadratic(diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn value_rejects_manifold_mismatch() {
        let obj = Objective::flat_quadratic(DMatrix::identity(3, 3)).unwrap();
        assert!(obj.value(&Point::new(DMatrix::identity(3, 3))).is_err());
    }

    #[test]
    fn strong_minimum_of_unit_quadratic_and_single_karcher() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let obj = Objective::flat_quadratic(DMatrix::identity(4, 4)).unwrap();
        let z = Point::from_vec(vec![0.0; 4]);
        let est = estimate_strong_minimum(&obj, &z, 50, 2.0, &mut rng).unwrap();
        assert!((est.mu - 1.0).abs() < 1e-12);
        assert!((est.lipschitz - 1.0).abs() < 1e-12);

        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let obj = Objective::karcher(vec![a.clone()]).unwrap();
        let est = estimate_strong_minimum(&obj, &Point::new(a), 50, 1.0, &mut rng).unwrap();
        assert!((est.mu - 2.0).abs() < 1e-9, "mu = {}", est.mu);
        assert!(est.lipschitz >= est.mu);
    }

    #[test]
    fn flat_quadratic_has_no_convexity_violations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let obj = Objective::flat_quadratic(q).unwrap();
        let c = Point::from_vec(vec![1.0, -2.0]);
        let rep = geodesic_convexity_check(&obj, 200, &c, 5.0, &mut rng).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.worst_margin >= 0.0);
    }
}
