use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Maximum eigenvalue via the Rayleigh quotient on the hemisphere.
    Eigenvalue,
    /// Karcher mean of SPD matrices.
    Karcher,
    /// Convex quadratic on flat space.
    Flat,
}

impl std::str::FromStr for ProblemKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigenvalue" | "rayleigh" => Ok(Self::Eigenvalue),
            "karcher" => Ok(Self::Karcher),
            "flat" => Ok(Self::Flat),
            other => input(format!("unknown problem '{other}'")),
        }
    }
}

impl ProblemKind {
    /// Damping values swept in the reference experiments.
    pub fn reference_alphas(self) -> &'static [f64] {
        match self {
            Self::Karcher => &[2.0, 2.5, 3.0, 3.9, 4.1, 4.5, 5.0, 6.0, 7.0],
            Self::Eigenvalue | Self::Flat => &[1.5, 2.0, 2.5, 2.9, 3.0, 3.1, 4.0, 6.0, 8.0],
        }
    }
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Eigenvalue => "eigenvalue",
            Self::Karcher => "karcher",
            Self::Flat => "flat",
        })
    }
}

/// Recipe for a random benchmark instance.
///
/// * eigenvalue: `A = GᵀG/β`, `G ∈ R^{m×n}` standard normal.
/// * karcher: `m` matrices `U_j Q_j U_jᵀ` of size `n`, spectra uniform in
///   `eig_range`.
/// * flat: `Q = U diag U ᵀ` of size `n` with spectrum uniform in `eig_range`
///   (`m` is ignored).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub problem: ProblemKind,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub eig_range: (f64, f64),
    pub seed: u64,
}

impl InstanceSpec {
    /// Desk-scale defaults for each problem.
    pub fn desk(problem: ProblemKind, seed: u64) -> Self {
        match problem {
            ProblemKind::Eigenvalue => Self {
                problem,
                m: 200,
                n: 50,
                beta: 100.0,
                eig_range: (0.0, 100.0),
                seed,
            },
            ProblemKind::Karcher => Self {
                problem,
                m: 5,
                n: 10,
                beta: 1.0,
                eig_range: (0.0, 100.0),
                seed,
            },
            ProblemKind::Flat => Self {
                problem,
                m: 1,
                n: 10,
                beta: 1.0,
                eig_range: (0.1, 1.0),
                seed,
            },
        }
    }

    /// Full-size benchmark dimensions (slow; desk sizes are the default).
    pub fn reference_scale(problem: ProblemKind, seed: u64) -> Self {
        let mut s = Self::desk(problem, seed);
        match problem {
            ProblemKind::Eigenvalue => {
                s.m = 1000;
                s.n = 2500;
                s.beta = 1000.0;
            }
            ProblemKind::Karcher => {
                s.m = 10;
                s.n = 100;
            }
            ProblemKind::Flat => {}
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return input("instance dimensions must be positive");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return input(format!("beta must be positive, got {}", self.beta));
        }
        let (lo, hi) = self.eig_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return input(format!("eigenvalue range ({lo}, {hi}) must lie in (0, inf)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for p in [ProblemKind::Eigenvalue, ProblemKind::Karcher, ProblemKind::Flat] {
            InstanceSpec::desk(p, 1).validate().unwrap();
            InstanceSpec::reference_scale(p, 1).validate().unwrap();
        }
        let big = InstanceSpec::reference_scale(ProblemKind::Eigenvalue, 1);
        assert_eq!((big.m, big.n, big.beta), (1000, 2500, 1000.0));
    }

    #[test]
    fn bad_specs() {
        let mut s = InstanceSpec::desk(ProblemKind::Karcher, 1);
        s.eig_range = (5.0, 1.0);
        assert!(s.validate().is_err());
        s.eig_range = (-1.0, 1.0);
        assert!(s.validate().is_err());
        let mut s = InstanceSpec::desk(ProblemKind::Eigenvalue, 1);
        s.beta = 0.0;
        assert!(s.validate().is_err());
        assert!("nope".parse::<ProblemKind>().is_err());
        assert_eq!("karcher".parse::<ProblemKind>().unwrap(), ProblemKind::Karcher);
    }
}
