use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{require_base, Manifold, Point, Tangent};
use crate::error::{domain, input, Error, Result};
use crate::tol;

/// Unit sphere `S^{n-1} ⊂ Rⁿ` with the round metric, restricted to the open
/// hemisphere `{x : <x, pole> > 0}`.
///
/// The geometry (exp, log, transport) is that of the whole sphere; the
/// hemisphere is the region reported by [`Manifold::contains`].
#[derive(Clone, Debug, PartialEq)]
pub struct Hemisphere {
    dim: usize,
    pole: DMatrix<f64>,
}

impl Hemisphere {
    /// Hemisphere about the first coordinate axis.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "hemisphere needs ambient dimension >= 1");
        let mut pole = DMatrix::zeros(dim, 1);
        pole[(0, 0)] = 1.0;
        Self { dim, pole }
    }

    pub fn with_pole(pole: &Point) -> Result<Self> {
        let (r, c) = pole.shape();
        if c != 1 || r == 0 {
            return input(format!("pole must be a nonempty column vector, got {r}x{c}"));
        }
        let n = pole.coords().norm();
        if !(n.is_finite() && n > 0.0) {
            return input("pole must be a finite nonzero vector");
        }
        Ok(Self {
            dim: r,
            pole: pole.coords() / n,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pole(&self) -> Point {
        Point::new(self.pole.clone())
    }

    fn cos_angle(&self, x: &Point, y: &Point) -> Result<f64> {
        let c = x.coords().dot(y.coords());
        if c <= -1.0 + tol::ANTIPODAL {
            return domain(format!(
                "points are antipodal (<x,y> = {c:.12}); the logarithm is undefined"
            ));
        }
        Ok(c.min(1.0))
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != (self.dim, 1) {
            return input(format!(
                "expected a {}-vector on the hemisphere, got shape {:?}",
                self.dim,
                m.shape()
            ));
        }
        Ok(())
    }
}

impl Manifold for Hemisphere {
    fn name(&self) -> &'static str {
        "hemisphere"
    }

    fn shape(&self) -> (usize, usize) {
        (self.dim, 1)
    }

    fn curvature_bounds(&self) -> (f64, f64) {
        (1.0, 1.0)
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        self.check_shape(x.coords())?;
        let n = x.coords().norm();
        if (n - 1.0).abs() > tol::INVARIANT {
            return input(format!("hemisphere point has norm {n}, expected 1"));
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        self.check_shape(v.components())?;
        let x = v.base().coords();
        let ip = x.dot(v.components());
        let scale = v.components().norm().max(1.0);
        if ip.abs() > tol::INVARIANT * scale {
            return input(format!("vector is not tangent: <x, v> = {ip:e}"));
        }
        Ok(())
    }

    fn exp(&self, x: &Point, v: &Tangent) -> Result<Point> {
        require_base(x, v)?;
        self.check_tangent(v)?;
        let theta = v.components().norm();
        if theta == 0.0 {
            return Ok(x.clone());
        }
        // sin(θ)/θ without cancellation for tiny θ
        let sinc = if theta < 1e-4 {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        let y = x.coords() * theta.cos() + v.components() * sinc;
        let n = y.norm();
        Ok(Point::new(y / n))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<Tangent> {
        self.check_shape(y.coords())?;
        let c = self.cos_angle(x, y)?;
        let u = y.coords() - x.coords() * c;
        let s = u.norm();
        if s == 0.0 {
            return Ok(Tangent::zero(x));
        }
        let theta = s.atan2(c);
        let comps = u * (theta / s);
        // strip the rounding component along x
        let drift = x.coords().dot(&comps);
        Tangent::new(x.clone(), comps - x.coords() * drift)
    }

    fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Result<Tangent> {
        require_base(x, v)?;
        let c = self.cos_angle(x, y)?;
        let along = y.coords().dot(v.components()) / (1.0 + c);
        let comps = v.components() - (x.coords() + y.coords()) * along;
        Tangent::new(y.clone(), comps)
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_shape(y.coords())?;
        let c = self.cos_angle(x, y)?;
        let s = (y.coords() - x.coords() * c).norm();
        Ok(s.atan2(c))
    }

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
        require_base(x, u)?;
        require_base(x, v)?;
        Ok(u.components().dot(v.components()))
    }

    fn project(&self, x: &Point, ambient: DMatrix<f64>) -> Result<Tangent> {
        self.check_shape(&ambient)?;
        let ip = x.coords().dot(&ambient);
        Tangent::new(x.clone(), ambient - x.coords() * ip)
    }

    fn contains(&self, x: &Point) -> bool {
        x.coords().dot(&self.pole) > 0.0
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> Point {
        loop {
            let g = DMatrix::from_fn(self.dim, 1, |_, _| StandardNormal.sample(rng));
            let n: f64 = g.norm();
            if n < 1e-12 {
                continue;
            }
            let side = g.dot(&self.pole);
            if side == 0.0 {
                continue;
            }
            return Point::new(g * (side.signum() / n));
        }
    }
}

impl Hemisphere {
    /// Point from raw coordinates, normalized; errors on the zero vector.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if coords.len() != self.dim {
            return input(format!("expected {} coordinates", self.dim));
        }
        let m = DMatrix::from_vec(self.dim, 1, coords);
        let n = m.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Input("cannot normalize a zero vector".into()));
        }
        Ok(Point::new(m / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn e(n: usize, i: usize) -> Point {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Point::from_vec(v)
    }

    #[test]
    fn exp_along_axis_pair() {
        let s = Hemisphere::new(3);
        let x = e(3, 0);
        let v = Tangent::new(x.clone(), e(3, 1).into_coords() * FRAC_PI_4).unwrap();
        let y = s.exp(&x, &v).unwrap();
        let h = FRAC_PI_4.cos();
        let want = DMatrix::from_vec(3, 1, vec![h, FRAC_PI_4.sin(), 0.0]);
        assert!((y.coords() - want).norm() < 1e-15);
    }

    #[test]
    fn quarter_circle_distance() {
        let s = Hemisphere::new(3);
        let d = s.distance(&e(3, 0), &e(3, 1)).unwrap();
        assert!((d - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(s.distance(&e(3, 0), &e(3, 0)).unwrap(), 0.0);
    }

    #[test]
    fn antipodal_pair_is_a_domain_error() {
        let s = Hemisphere::new(2);
        let x = e(2, 0);
        let y = Point::from_vec(vec![-1.0, 0.0]);
        assert!(matches!(s.log(&x, &y), Err(Error::Domain(_))));
        assert!(matches!(s.distance(&x, &y), Err(Error::Domain(_))));
        let v = Tangent::zero(&x);
        assert!(matches!(s.transport(&x, &y, &v), Err(Error::Domain(_))));
    }

    #[test]
    fn non_tangent_input_is_rejected() {
        let s = Hemisphere::new(2);
        let x = e(2, 0);
        let v = Tangent::new(x.clone(), DMatrix::from_vec(2, 1, vec![0.1, 1.0])).unwrap();
        assert!(matches!(s.exp(&x, &v), Err(Error::Input(_))));
    }

    #[test]
    fn random_points_lie_in_open_hemisphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pole = Point::from_vec(vec![1.0, 2.0, -1.0, 0.5]);
        let s = Hemisphere::with_pole(&pole).unwrap();
        for _ in 0..200 {
            let x = s.random_point(&mut rng);
            s.check_point(&x).unwrap();
            assert!(s.contains(&x));
        }
    }

    #[test]
    fn tiny_exp_matches_first_order() {
        let s = Hemisphere::new(3);
        let x = e(3, 2);
        let v = Tangent::new(x.clone(), e(3, 0).into_coords() * 1e-9).unwrap();
        let y = s.exp(&x, &v).unwrap();
        assert!((y.coords()[(0, 0)] - 1e-9).abs() < 1e-20);
        assert!((s.distance(&x, &y).unwrap() - 1e-9).abs() < 1e-20);
    }
}
