//! Zeros of complex fields: isolated points in the plane, curves in space,
//! and their evolution over a parameter.

mod newton;
mod scan;
mod sweep;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_jet_2d, classify_jet_3d, ClassificationReport, ClassifyError, Jet2, Jet3, ToleranceSet};
use crate::fieldlang::{EvalError, FieldDef, FieldError, Params};
use crate::taylor::{SeriesError, TruncatedSeries, DEFAULT_ORDER};

pub use newton::refine_zero;
pub use scan::{scan_zeros_2d, ZeroScan};
pub use sweep::{sweep_parameter, SweepEvent, SweepResult};
pub(crate) use trace::splitmix64;
pub use trace::{trace_dislocation_3d, CurveStatus, CurveTrace, DislocationCurve};

/// Relative zero threshold: `|ψ| < TAU_ZERO_REL · (1 + scale)`.
pub const TAU_ZERO_REL: f64 = 1e-10;
/// Merge distance for duplicate zeros, as a fraction of the cell diagonal.
pub const TAU_MERGE_REL: f64 = 1e-6;
pub const MAX_NEWTON_ITERS: usize = 25;
/// Rank threshold `σ_min/σ_max` of the real differential.
pub const TAU_RANK: f64 = 1e-7;
pub const DEFAULT_RESOLUTION: usize = 101;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DislocationError {
    #[error("invalid region: {0}")]
    BadRegion(String),
    #[error("field has dimension {field}, region has dimension {region}")]
    DimMismatch { field: usize, region: usize },
    #[error("singular Jacobian at {location:?} (sigma ratio {ratio:e}); the point may be a degenerate zero")]
    SingularJacobian { location: Vec<f64>, ratio: f64 },
    #[error("Newton iteration did not converge after {iters} steps (|psi| = {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("parameter '{0}' is not declared by the field")]
    UnknownParameter(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Axis-aligned box sampled on a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Region, DislocationError> {
        let r = Region { lower, upper, resolution };
        r.validate()?;
        Ok(r)
    }

    /// `[lo, hi]^dim` with `n` samples per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Region, DislocationError> {
        Region::new(vec![lo; dim], vec![hi; dim], vec![n; dim])
    }

    pub fn validate(&self) -> Result<(), DislocationError> {
        let d = self.lower.len();
        if !(2..=3).contains(&d) || self.upper.len() != d || self.resolution.len() != d {
            return Err(DislocationError::BadRegion("need 2 or 3 axes with matching bounds and resolutions".into()));
        }
        for a in 0..d {
            if !(self.lower[a].is_finite() && self.upper[a].is_finite() && self.lower[a] < self.upper[a]) {
                return Err(DislocationError::BadRegion(format!("axis {a}: need finite lower < upper")));
            }
            if self.resolution[a] < 2 {
                return Err(DislocationError::BadRegion(format!("axis {a}: resolution must be at least 2")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.resolution[axis] - 1) as f64
    }

    /// Coordinate of grid node `i` on `axis`.
    pub fn node(&self, axis: usize, i: usize) -> f64 {
        let n = (self.resolution[axis] - 1) as f64;
        self.lower[axis] + (self.upper[axis] - self.lower[axis]) * (i as f64) / n
    }

    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a).powi(2)).sum::<f64>().sqrt()
    }

    /// True if `p` lies in the box grown by `cells` grid steps on every side.
    pub fn contains_within(&self, p: &[f64], cells: f64) -> bool {
        p.len() == self.dim()
            && (0..self.dim()).all(|a| {
                let pad = cells * self.step(a);
                p[a] >= self.lower[a] - pad && p[a] <= self.upper[a] + pad
            })
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the node with row-major index `flat` (last axis fastest).
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut rest = flat;
        let mut p = vec![0.0; self.dim()];
        for a in (0..self.dim()).rev() {
            p[a] = self.node(a, rest % self.resolution[a]);
            rest /= self.resolution[a];
        }
        p
    }

    /// Same box with resolution `n` on every axis.
    pub fn with_resolution(&self, n: usize) -> Region {
        Region { resolution: vec![n; self.dim()], ..self.clone() }
    }
}

/// A Newton-refined zero of the field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DislocationPoint {
    pub location: Vec<f64>,
    /// `|ψ|` at the location.
    pub residual: f64,
    pub newton_iters: usize,
    /// Set when the real differential is (numerically) rank deficient and the
    /// point was located by the augmented system instead of plain Newton.
    pub degenerate: bool,
    #[serde(skip)]
    pub jet: TruncatedSeries<f64>,
}

impl DislocationPoint {
    /// The point `location` taken as is, with its jet; no refinement.
    pub fn at(def: &FieldDef, location: &[f64], params: &Params) -> Result<DislocationPoint, DislocationError> {
        let def = def.frozen(params)?;
        if location.len() != def.dim {
            return Err(DislocationError::DimMismatch { field: def.dim, region: location.len() });
        }
        let jet = def.compile(params)?.jet(location, DEFAULT_ORDER)?;
        Ok(DislocationPoint { location: location.to_vec(), residual: jet.constant_term().norm(), newton_iters: 0, degenerate: false, jet })
    }

    pub fn classify(&self, tol: &ToleranceSet) -> Result<ClassificationReport, ClassifyError> {
        match self.location.len() {
            2 => {
                let j = Jet2::from_series(&self.jet)?.at([self.location[0], self.location[1]]);
                classify_jet_2d(&j, tol)
            }
            _ => {
                let j = Jet3::from_series(&self.jet)?.at([self.location[0], self.location[1], self.location[2]]);
                classify_jet_3d(&j, tol)
            }
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_checks() {
        assert!(Region::cube(2, -1.0, 1.0, 101).is_ok());
        assert!(Region::cube(2, 1.0, -1.0, 101).is_err());
        assert!(Region::cube(2, -1.0, 1.0, 1).is_err());
        assert!(Region::cube(4, -1.0, 1.0, 5).is_err());
        let r = Region::cube(2, -1.0, 1.0, 101).unwrap();
        assert_eq!(r.node(0, 50), 0.0);
        assert_eq!(r.node(0, 100), 1.0);
        assert!((r.cell_diagonal() - 0.02 * 2f64.sqrt()).abs() < 1e-15);
        assert!(r.contains_within(&[1.01, 0.0], 1.0));
        assert!(!r.contains_within(&[1.03, 0.0], 1.0));
    }
}
