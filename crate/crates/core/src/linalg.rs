//! Symmetric matrix functions through the spectral decomposition.
//!
//! Every matrix handed to these routines is symmetric by construction
//! (SPD points, tangent vectors, congruences of those), so `f(A) = V f(Λ) Vᵀ`
//! is both the cheapest and the best-conditioned route.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const EIG_EPS: f64 = f64::EPSILON;
const EIG_MAX_ITER: usize = 10_000;

/// Spectral decomposition `A = V diag(λ) Vᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input(format!(
                "eigendecomposition of a non-square {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite entry in symmetric matrix".into()));
        }
        let eig = SymmetricEigen::try_new(symmetrize(a), EIG_EPS, EIG_MAX_ITER)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// `V diag(f(λ)) Vᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    fn require_positive(&self, what: &str) -> Result<()> {
        let lo = self.min();
        if lo > 0.0 && lo.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical(format!(
                "{what}: smallest eigenvalue {lo:e} is not positive"
            )))
        }
    }
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Relative asymmetry `‖A − Aᵀ‖_F / ‖A‖_F` (zero for the zero matrix).
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        0.0
    } else {
        (a - a.transpose()).norm() / n
    }
}

pub fn expm_sym(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(SymEig::new(a)?.map(f64::exp))
}

pub fn logm_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymEig::new(a)?;
    eig.require_positive("matrix logarithm")?;
    Ok(eig.map(f64::ln))
}

pub fn sqrtm_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymEig::new(a)?;
    eig.require_positive("matrix square root")?;
    Ok(eig.map(f64::sqrt))
}

/// `(A^{1/2}, A^{-1/2})` from one decomposition.
pub fn sqrt_pair_spd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymEig::new(a)?;
    eig.require_positive("matrix square root")?;
    Ok((eig.map(f64::sqrt), eig.map(|l| 1.0 / l.sqrt())))
}

pub fn inv_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymEig::new(a)?;
    eig.require_positive("matrix inverse")?;
    Ok(eig.map(|l| 1.0 / l))
}

/// Eigenvalues of a symmetric matrix (ascending order not guaranteed).
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(SymEig::new(a)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0])
    }

    #[test]
    fn exp_of_identity_is_e() {
        let e = expm_sym(&DMatrix::identity(4, 4)).unwrap();
        assert!((e - DMatrix::identity(4, 4) * std::f64::consts::E).norm() < 1e-14);
    }

    #[test]
    fn log_inverts_exp() {
        let a = spd3();
        let back = expm_sym(&logm_spd(&a).unwrap()).unwrap();
        assert!((back - &a).norm() < 1e-12);
    }

    #[test]
    fn sqrt_pair_is_consistent() {
        let a = spd3();
        let (s, si) = sqrt_pair_spd(&a).unwrap();
        assert!((&s * &s - &a).norm() < 1e-12);
        assert!((&s * &si - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((sqrtm_spd(&a).unwrap() - s).norm() < 1e-14);
    }

    #[test]
    fn log_rejects_indefinite() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(logm_spd(&a), Err(Error::Numerical(_))));
    }

    #[test]
    fn nan_is_reported() {
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(SymEig::new(&a), Err(Error::Numerical(_))));
    }

    #[test]
    fn asymmetry_measure() {
        let mut a = DMatrix::identity(2, 2);
        assert_eq!(asymmetry(&a), 0.0);
        a[(0, 1)] = 1.0;
        assert!(asymmetry(&a) > 0.5);
    }
}
