use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{require_base, Manifold, Point, Tangent};
use crate::error::{input, Result};
use crate::linalg::{asymmetry, expm_sym, inv_spd, logm_spd, sqrt_pair_spd, sqrtm_spd, symmetrize, SymEig};
use crate::tol;

/// Symmetric positive-definite `n×n` matrices with the affine-invariant
/// metric `<U, V>_P = tr(P⁻¹ U P⁻¹ V)`.
///
/// Sectional curvature lies in `[-1/2, 0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spd {
    n: usize,
}

impl Spd {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "SPD manifold needs n >= 1");
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != (self.n, self.n) {
            return input(format!(
                "expected a {n}x{n} matrix, got shape {:?}",
                m.shape(),
                n = self.n
            ));
        }
        Ok(())
    }

    /// `P^{-1/2} Q P^{-1/2}` given `P^{-1/2}`.
    fn whiten(inv_sqrt: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(inv_sqrt * q * inv_sqrt))
    }

    /// Affine-invariant distance via the spectrum of the whitened matrix.
    pub fn distance_with(inv_sqrt_p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<f64> {
        let eig = SymEig::new(&Self::whiten(inv_sqrt_p, q))?;
        if eig.min() <= 0.0 {
            return Err(crate::error::Error::Numerical(
                "whitened matrix is not positive definite".into(),
            ));
        }
        Ok(eig.values.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }
}

impl Manifold for Spd {
    fn name(&self) -> &'static str {
        "spd"
    }

    fn shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    fn curvature_bounds(&self) -> (f64, f64) {
        (-0.5, 0.0)
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.check_shape(x.coords())?;
        let a = asymmetry(x.coords());
        if a > tol::INVARIANT {
            return input(format!("SPD point is not symmetric (relative asymmetry {a:e})"));
        }
        let lo = SymEig::new(x.coords())?.min();
        if lo <= 0.0 {
            return input(format!("SPD point has non-positive eigenvalue {lo:e}"));
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        self.check_shape(v.components())?;
        let a = asymmetry(v.components());
        if a > tol::INVARIANT {
            return input(format!("SPD tangent is not symmetric (relative asymmetry {a:e})"));
        }
        Ok(())
    }

    fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        require_base(x, v)?;
        self.check_tangent(v)?;
        if v.is_zero() {
            return Ok(x.clone());
        }
        let (s, si) = sqrt_pair_spd(x.coords())?;
        let inner = expm_sym(&Self::whiten(&si, v.components()))?;
        Ok(Point::new(symmetrize(&(&s * inner * &s))))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        self.check_shape(y.coords())?;
        if x == y {
            return Ok(Tangent::zero(x));
        }
        let (s, si) = sqrt_pair_spd(x.coords())?;
        let inner = logm_spd(&Self::whiten(&si, y.coords()))?;
        Tangent::new(x.clone(), symmetrize(&(&s * inner * &s)))
    }

    fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Result<Tangent> {
        require_base(x, v)?;
        self.check_shape(y.coords())?;
        if x == y {
            return Tangent::new(y.clone(), v.components().clone());
        }
        // E = (Q P⁻¹)^{1/2} = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{-1/2},
        // and (P⁻¹ Q)^{1/2} = Eᵀ.
        let (s, si) = sqrt_pair_spd(x.coords())?;
        let mid = sqrtm_spd(&Self::whiten(&si, y.coords()))?;
        let e = &s * mid * &si;
        let comps = symmetrize(&(&e * v.components() * e.transpose()));
        Tangent::new(y.clone(), comps)
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_shape(y.coords())?;
        if x == y {
            return Ok(0.0);
        }
        let (_, si) = sqrt_pair_spd(x.coords())?;
        Self::distance_with(&si, y.coords())
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        require_base(x, u)?;
        require_base(x, v)?;
        let pinv = inv_spd(x.coords())?;
        let a = &pinv * u.components();
        let b = &pinv * v.components();
        // tr(A B) without forming the product
        Ok(a.transpose().component_mul(&b).sum())
    }

    fn project(&self, x: &Point, ambient: DMatrix<f64>) -> Result<Tangent> {
        self.check_shape(&ambient)?;
        Tangent::new(x.clone(), symmetrize(&ambient))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        let g = DMatrix::from_fn(self.n, self.n, |_, _| StandardNormal.sample(rng));
        let w: DMatrix<f64> = symmetrize(&g) * 0.5;
        // exp of a symmetric matrix cannot fail for finite input
        Point::new(expm_sym(&w).expect("matrix exponential of a finite symmetric matrix"))
    }
}
