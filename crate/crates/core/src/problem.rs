use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::manifold::{GeodesicBall, Point};
use crate::objectives::Objective;

/// Reference minimum used to measure gaps, taken from an oracle that is
/// independent of the flow.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkOracle {
    pub fstar: f64,
    pub zref: Point,
    /// How the reference was obtained, e.g. `"dense-eigensolver"`.
    pub method: String,
    /// Riemannian gradient norm at `zref`.
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Summary of an oracle for manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub fstar: f64,
    pub method: String,
    pub grad_norm: f64,
    pub iterations: usize,
}

impl From<&BenchmarkOracle> for OracleSummary {
    fn from(o: &BenchmarkOracle) -> Self {
        Self {
            fstar: o.fstar,
            method: o.method.clone(),
            grad_norm: o.grad_norm,
            iterations: o.iterations,
        }
    }
}

/// Objective, starting point and (optionally) its benchmark minimum.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub id: String,
    pub objective: Objective,
    pub x0: Point,
    pub oracle: Option<BenchmarkOracle>,
    /// Optional region whose exit the integrator reports.
    pub region: Option<GeodesicBall>,
}

impl ProblemInstance {
    pub fn new(id: impl Into<String>, objective: Objective, x0: Point) -> Result<Self> {
        objective.manifold().check_point(&x0)?;
        Ok(Self {
            id: id.into(),
            objective,
            x0,
            oracle: None,
            region: None,
        })
    }

    pub fn with_oracle(mut self, oracle: BenchmarkOracle) -> Result<Self> {
        if oracle.zref.shape() != self.x0.shape() {
            return input("oracle minimizer does not live on the instance manifold");
        }
        self.oracle = Some(oracle);
        Ok(self)
    }

    pub fn with_region(mut self, region: GeodesicBall) -> Self {
        self.region = Some(region);
        self
    }

    pub fn oracle(&self) -> Result<&BenchmarkOracle> {
        self.oracle
            .as_ref()
            .ok_or_else(|| crate::Error::Input(format!("instance '{}' has no oracle", self.id)))
    }
}
