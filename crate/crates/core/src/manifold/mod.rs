//! Manifold interface and the three concrete instances.
//!
//! Points and tangent vectors share one dense storage type, [`DMatrix<f64>`]:
//! column vectors for the hemisphere and flat space, square matrices for
//! the SPD cone. A [`Tangent`] carries the point it is attached to so that
//! every operation can reject vectors living in the wrong fiber.

mod flat;
mod hemisphere;
mod spd;

pub use flat::Flat;
pub use hemisphere::Hemisphere;
pub use spd::Spd;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// A point on a manifold, stored in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: DMatrix<f64>,
}

impl Point {
    pub fn new(coords: DMatrix<f64>) -> Self {
        Self { coords }
    }

    /// Column-vector point.
    pub fn from_vec(data: Vec<f64>) -> Self {
        let n = data.len();
        Self::new(DMatrix::from_vec(n, 1, data))
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DMatrix<f64> {
        self.coords
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coords.shape()
    }
}

/// A tangent vector tagged with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent {
    base: Point,
    comps: DMatrix<f64>,
}

impl Tangent {
    pub fn new(base: Point, comps: DMatrix<f64>) -> Result<Self> {
        if base.shape() != comps.shape() {
            return input(format!(
                "tangent shape {:?} does not match base shape {:?}",
                comps.shape(),
                base.shape()
            ));
        }
        Ok(Self { base, comps })
    }

    pub fn zero(base: &Point) -> Self {
        let (r, c) = base.shape();
        Self {
            base: base.clone(),
            comps: DMatrix::zeros(r, c),
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.comps
    }

    pub fn into_components(self) -> DMatrix<f64> {
        self.comps
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            comps: &self.comps * s,
        }
    }

    /// `a·self + b·other`; both vectors must share a base point.
    pub fn combine(&self, a: f64, other: &Tangent, b: f64) -> Result<Self> {
        same_base(self, other)?;
        Ok(Self {
            base: self.base.clone(),
            comps: &self.comps * a + &other.comps * b,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&v| v == 0.0)
    }
}

fn same_base(u: &Tangent, v: &Tangent) -> Result<()> {
    if u.base != v.base {
        return input("tangent vectors attached to different base points");
    }
    Ok(())
}

pub(crate) fn require_base(x: &Point, v: &Tangent) -> Result<()> {
    if v.base() != x {
        return input("tangent vector is not attached to the given point");
    }
    Ok(())
}

/// Riemannian manifold operations used by the flow, objectives and diagnostics.
///
/// Implementations hold no mutable state; all methods are pure.
pub trait Manifold: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    /// Shape of ambient coordinates.
    fn shape(&self) -> (usize, usize);

    /// Lower and upper sectional curvature bounds `(K_min, K_max)`.
    fn curvature_bounds(&self) -> (f64, f64);

    fn check_point(&self, x: &Point) -> Result<()>;

    /// Base-point tag plus tangency of the components.
    fn check_tangent(&self, v: &Tangent) -> Result<()>;

    fn exp(&self, x: &Point, v: &Tangent) -> Result<Point>;

    fn log(&self, x: &Point, y: &Point) -> Result<Tangent>;

    /// Parallel transport of `v` along the minimizing geodesic from `x` to `y`.
    fn transport(&self, x: &Point, y: &Point, v: &Tangent) -> Result<Tangent>;

    fn distance(&self, x: &Point, y: &Point) -> Result<f64>;

    fn inner(&self, x: &Point, u: &Tangent, v: &Tangent) -> Result<f64>;

    fn norm(&self, x: &Point, v: &Tangent) -> Result<f64> {
        Ok(self.inner(x, v, v)?.max(0.0).sqrt())
    }

    /// Orthogonal projection of an ambient direction onto the tangent space at `x`.
    fn project(&self, x: &Point, ambient: DMatrix<f64>) -> Result<Tangent>;

    /// Membership in the region where the theory applies (the open
    /// hemisphere for the sphere). Reported by the integrator, never enforced.
    fn contains(&self, _x: &Point) -> bool {
        true
    }

    /// A random point drawn from a fixed reference distribution.
    fn random_point(&self, rng: &mut dyn RngCore) -> Point;

    /// A random tangent vector at `x` with standard-normal ambient entries,
    /// projected, and rescaled to the given Riemannian norm.
    fn random_tangent(&self, x: &Point, norm: f64, rng: &mut dyn RngCore) -> Result<Tangent> {
        let (r, c) = self.shape();
        let g = DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng));
        let t = self.project(x, g)?;
        let n = self.norm(x, &t)?;
        if n == 0.0 {
            return Err(Error::Numerical("degenerate random tangent".into()));
        }
        Ok(t.scaled(norm / n))
    }
}

/// Random point at geodesic distance `U(0, radius]` from `center`.
pub fn random_point_near(
    m: &dyn Manifold,
    center: &Point,
    radius: f64,
    rng: &mut dyn RngCore,
) -> Result<Point> {
    let r: f64 = Uniform::new_inclusive(0.0, radius)
        .map_err(|e| Error::Input(e.to_string()))?
        .sample(rng);
    let v = m.random_tangent(center, r.max(f64::MIN_POSITIVE), rng)?;
    m.exp(center, &v)
}

/// A closed geodesic ball used as a containment region.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicBall {
    pub center: Point,
    pub radius: f64,
}

impl GeodesicBall {
    pub fn contains(&self, m: &dyn Manifold, x: &Point) -> bool {
        m.distance(&self.center, x)
            .map(|d| d <= self.radius)
            .unwrap_or(false)
    }
}

/// JSON wire form of a point or tangent vector:
/// `{"manifold": name, "shape": [rows, cols], "data": row-major}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayRecord {
    pub manifold: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ArrayRecord {
    pub fn from_matrix(manifold: &str, m: &DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        let data = (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect();
        Self {
            manifold: manifold.to_string(),
            shape: vec![r, c],
            data,
        }
    }

    pub fn from_point(m: &dyn Manifold, x: &Point) -> Self {
        Self::from_matrix(m.name(), x.coords())
    }

    pub fn from_tangent(m: &dyn Manifold, v: &Tangent) -> Self {
        Self::from_matrix(m.name(), v.components())
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let (r, c) = match self.shape.as_slice() {
            [n] => (*n, 1),
            [r, c] => (*r, *c),
            s => return input(format!("unsupported array rank {}", s.len())),
        };
        if r * c != self.data.len() {
            return input(format!(
                "shape {:?} needs {} values, found {}",
                self.shape,
                r * c,
                self.data.len()
            ));
        }
        Ok(DMatrix::from_row_slice(r, c, &self.data))
    }

    fn expect_manifold(&self, m: &dyn Manifold) -> Result<()> {
        if self.manifold != m.name() {
            return input(format!(
                "record belongs to manifold '{}', expected '{}'",
                self.manifold,
                m.name()
            ));
        }
        Ok(())
    }

    pub fn to_point(&self, m: &dyn Manifold) -> Result<Point> {
        self.expect_manifold(m)?;
        let x = Point::new(self.to_matrix()?);
        m.check_point(&x)?;
        Ok(x)
    }

    pub fn to_tangent(&self, m: &dyn Manifold, base: &Point) -> Result<Tangent> {
        self.expect_manifold(m)?;
        let v = Tangent::new(base.clone(), self.to_matrix()?)?;
        m.check_tangent(&v)?;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn record_roundtrip_is_row_major() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let rec = ArrayRecord::from_matrix("flat", &m);
        assert_eq!(rec.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let json = serde_json::to_string(&rec).unwrap();
        let back: ArrayRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn record_rejects_wrong_manifold_and_shape() {
        let spd = Spd::new(2);
        let rec = ArrayRecord::from_matrix("hemisphere", &DMatrix::identity(2, 2));
        assert!(rec.to_point(&spd).is_err());
        let bad = ArrayRecord {
            manifold: "spd".into(),
            shape: vec![2, 2],
            data: vec![1.0; 3],
        };
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn tangent_roundtrip_through_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Hemisphere::new(4);
        let x = s.random_point(&mut rng);
        let v = s.random_tangent(&x, 0.3, &mut rng).unwrap();
        let rec = ArrayRecord::from_tangent(&s, &v);
        let back = rec.to_tangent(&s, &x).unwrap();
        assert_eq!(back, v);
        let p = ArrayRecord::from_point(&s, &x).to_point(&s).unwrap();
        assert_eq!(p, x);
    }

    #[test]
    fn combine_requires_shared_base() {
        let x = Point::from_vec(vec![1.0, 0.0]);
        let y = Point::from_vec(vec![0.0, 1.0]);
        let u = Tangent::zero(&x);
        let v = Tangent::zero(&y);
        assert!(u.combine(1.0, &v, 1.0).is_err());
        assert!(Tangent::new(x, DMatrix::zeros(3, 1)).is_err());
    }
}
