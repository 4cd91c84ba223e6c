use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{require_base, Manifold, Point, Tangent};
use crate::error::{input, Result};

/// Euclidean space `Rⁿ`. Every operation is the textbook formula, so runs on
/// this instance must reproduce the Euclidean accelerated flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flat {
    dim: usize,
}

impl Flat {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "flat space needs dimension >= 1");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != (self.dim, 1) {
            return input(format!(
                "expected a {}-vector, got shape {:?}",
                self.dim,
                m.shape()
            ));
        }
        Ok(())
    }
}

impl Manifold for Flat {
    fn name(&self) -> &'static str {
        "flat"
    }

    fn shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }

    fn curvature_bounds(&self) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.check_shape(x.coords())?;
        if x.coords().iter().any(|v| !v.is_finite()) {
            return input("non-finite coordinate");
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        self.check_shape(v.components())
    }

    fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        require_base(x, v)?;
        self.check_tangent(v)?;
        Ok(Point::new(x.coords() + v.components()))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        self.check_shape(y.coords())?;
        Tangent::new(x.clone(), y.coords() - x.coords())
    }

    fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Result<Tangent> {
        require_base(x, v)?;
        self.check_shape(y.coords())?;
        Tangent::new(y.clone(), v.components().clone())
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_shape(y.coords())?;
        Ok((y.coords() - x.coords()).norm())
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        require_base(x, u)?;
        require_base(x, v)?;
        Ok(u.components().dot(v.components()))
    }

    fn project(&self, x: &Point, ambient: DMatrix<f64>) -> Result<Tangent> {
        self.check_shape(&ambient)?;
        Tangent::new(x.clone(), ambient)
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        Point::new(DMatrix::from_fn(self.dim, 1, |_, _| StandardNormal.sample(rng)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn operations_are_euclidean_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Flat::new(4);
        for _ in 0..50 {
            let x = f.random_point(&mut rng);
            let y = f.random_point(&mut rng);
            let v = f.random_tangent(&x, 1.3, &mut rng).unwrap();
            let w = f.random_tangent(&x, 0.7, &mut rng).unwrap();
            assert_eq!(f.exp(&x, &v).unwrap().coords(), &(x.coords() + v.components()));
            assert_eq!(f.log(&x, &y).unwrap().components(), &(y.coords() - x.coords()));
            assert_eq!(f.transport(&x, &y, &v).unwrap().components(), v.components());
            assert_eq!(f.distance(&x, &y).unwrap(), (y.coords() - x.coords()).norm());
            assert_eq!(f.inner(&x, &v, &w).unwrap(), v.components().dot(w.components()));
        }
    }
}
