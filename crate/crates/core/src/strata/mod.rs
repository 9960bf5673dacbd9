//! The space of cubic Helmholtz jets in the plane, its singular strata and
//! the comparison of stratum membership with the classifier.

mod montecarlo;

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify_jet_2d, ClassificationReport, ClassifyError, Jet2, SingularityClass, ToleranceSet};
use crate::dislocation::{DislocationError, DislocationPoint};
use crate::fieldlang::EvalError;
use crate::helmholtz::HelmholtzError;
use crate::scalar::Real;

pub use montecarlo::{monte_carlo_genericity, MonteCarloConfig, MonteCarloRow, MonteCarloSummary, MonteCarloTable};

/// Relative tolerance of the stratum equations.
pub const TAU_STRATUM: f64 = 1e-8;
/// Factor by which the tolerance is widened and narrowed to detect jets
/// sitting on a stratum boundary.
const BAND: f64 = 1e3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrataError {
    #[error("not a Helmholtz jet: |{relation}| = {violation:e} exceeds {tol:e}")]
    NotHelmholtzJet { relation: &'static str, violation: f64, tol: f64 },
    #[error("strata are defined for planar jets only, got dimension {0}")]
    Dimension(usize),
    #[error("bad Monte-Carlo configuration: {0}")]
    BadConfig(String),
    #[error("CSV output: {0}")]
    Csv(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dislocation(#[from] DislocationError),
    #[error(transparent)]
    Helmholtz(#[from] HelmholtzError),
}

/// Cubic jet of a solution of `Δψ + k²ψ = 0` in its free coordinates; the
/// remaining second and third derivatives follow from the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelmholtzJet3<T> {
    pub basepoint: [T; 2],
    pub k_wave: T,
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub e: Complex<T>,
    pub f: Complex<T>,
    pub h: Complex<T>,
    pub k: Complex<T>,
}

impl<T: Real> HelmholtzJet3<T> {
    fn k2(&self) -> T {
        self.k_wave * self.k_wave
    }

    pub fn g(&self) -> Complex<T> {
        -self.e - self.a * self.k2()
    }

    pub fn l(&self) -> Complex<T> {
        -self.h - self.b * self.k2()
    }

    pub fn m(&self) -> Complex<T> {
        -self.k - self.c * self.k2()
    }

    /// `(a₁, a₂, b₁, b₂, c₁, c₂, e₁, e₂, f₁, f₂, h₁, h₂, k₁, k₂, x₀, y₀)`.
    pub fn coordinates(&self) -> [T; 16] {
        let mut out = [T::zero(); 16];
        for (i, z) in [self.a, self.b, self.c, self.e, self.f, self.h, self.k].iter().enumerate() {
            out[2 * i] = z.re;
            out[2 * i + 1] = z.im;
        }
        out[14] = self.basepoint[0];
        out[15] = self.basepoint[1];
        out
    }

    pub fn from_coordinates(c: &[T; 16], k_wave: T) -> Self {
        let z = |i: usize| Complex::new(c[2 * i], c[2 * i + 1]);
        HelmholtzJet3 { basepoint: [c[14], c[15]], k_wave, a: z(0), b: z(1), c: z(2), e: z(3), f: z(4), h: z(5), k: z(6) }
    }

    pub fn to_jet2(&self) -> Jet2<T> {
        Jet2::from_coordinates(self.a, self.b, self.c, self.e, self.f, self.g(), self.h, self.k, self.l(), self.m()).at(self.basepoint)
    }

    pub fn scaled(&self, s: T) -> Self {
        HelmholtzJet3 { a: self.a * s, b: self.b * s, c: self.c * s, e: self.e * s, f: self.f * s, h: self.h * s, k: self.k * s, ..*self }
    }

    /// Largest modulus among the free coordinates.
    pub fn norm(&self) -> T {
        [self.a, self.b, self.c, self.e, self.f, self.h, self.k].iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

/// Reads the free coordinates off a cubic jet after checking the three
/// relations `e + g + k²a = 0`, `h + l + k²b = 0`, `k + m + k²c = 0`
/// against `tol · (1 + |jet|)`.
pub fn project_to_helmholtz_jet<T: Real>(j: &Jet2<T>, k_wave: T, tol: f64) -> Result<HelmholtzJet3<T>, StrataError> {
    let k2 = k_wave * k_wave;
    let norm = [j.a, j.b, j.c, j.e, j.f, j.g, j.h, j.k, j.l, j.m].iter().fold(0.0f64, |m, z| m.max(z.norm().to_f64_lossy()));
    let bound = tol * (1.0 + norm);
    for (relation, v) in [("e+g+a", j.e + j.g + j.a * k2), ("h+l+b", j.h + j.l + j.b * k2), ("k+m+c", j.k + j.m + j.c * k2)] {
        let violation = v.norm().to_f64_lossy();
        if !(violation <= bound) {
            return Err(StrataError::NotHelmholtzJet { relation, violation, tol: bound });
        }
    }
    Ok(HelmholtzJet3 { basepoint: j.basepoint, k_wave, a: j.a, b: j.b, c: j.c, e: j.e, f: j.f, h: j.h, k: j.k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StratumId {
    W1,
    W3,
    W4,
    W5,
    Unresolved,
}

impl StratumId {
    pub fn codimension(self) -> Option<u32> {
        match self {
            StratumId::W1 => Some(6),
            StratumId::W3 => Some(4),
            StratumId::W4 => Some(3),
            StratumId::W5 => Some(2),
            StratumId::Unresolved => None,
        }
    }
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Absolute values of the defining expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumResiduals {
    /// `|a|`
    pub a: f64,
    /// `|b|` and `|c|`, the extra equations of the deepest stratum.
    pub b: f64,
    pub c: f64,
    /// `b₁c₂ − b₂c₁`
    pub bc: f64,
    pub d1: f64,
    pub d2: f64,
    /// `D₁c₁ − D₂b₁` and `D₁c₂ − D₂b₂`
    pub bordered1: f64,
    pub bordered2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub stratum: StratumId,
    pub codimension: Option<u32>,
    pub residuals: StratumResiduals,
    pub norm: f64,
    pub tol: f64,
    /// The assignment changes when the tolerance is scaled by 1e3 either way.
    pub near_boundary: bool,
}

fn cross<T: Real>(p: Complex<T>, q: Complex<T>) -> T {
    p.re * q.im - p.im * q.re
}

fn residuals<T: Real>(hj: &HelmholtzJet3<T>) -> StratumResiduals {
    let (a, b, c, e, f) = (hj.a, hj.b, hj.c, hj.e, hj.f);
    let a_plus_e = e + a * hj.k2();
    let d1 = cross(e, c) + cross(b, f);
    let d2 = cross(f, c) - (b.re * a_plus_e.im - b.im * a_plus_e.re);
    let v = |x: T| x.to_f64_lossy().abs();
    StratumResiduals {
        a: a.norm().to_f64_lossy(),
        b: b.norm().to_f64_lossy(),
        c: c.norm().to_f64_lossy(),
        bc: v(cross(b, c)),
        d1: v(d1),
        d2: v(d2),
        bordered1: v(d1 * c.re - d2 * b.re),
        bordered2: v(d1 * c.im - d2 * b.im),
    }
}

fn assign(r: &StratumResiduals, norm: f64, tol: f64) -> StratumId {
    let t = |deg: i32| tol * (1.0 + norm).powi(deg);
    if r.a > t(1) {
        return StratumId::Unresolved;
    }
    if r.b <= t(1) && r.c <= t(1) {
        return StratumId::W1;
    }
    if r.bc > t(2) {
        return StratumId::W5;
    }
    if r.bordered1 <= t(3) && r.bordered2 <= t(3) {
        StratumId::W3
    } else {
        StratumId::W4
    }
}

/// Deepest stratum whose equations hold within `tol · (1 + N)^deg`, `N` the
/// jet norm and `deg` the polynomial degree of the equation. Finer strata are
/// tested first, so each stratum excludes those below it. Jets with `a ≠ 0`
/// are not singular and come back `Unresolved`.
pub fn stratum_membership<T: Real>(hj: &HelmholtzJet3<T>, tol: f64) -> StratumReport {
    let r = residuals(hj);
    let norm = hj.norm().to_f64_lossy();
    let stratum = assign(&r, norm, tol);
    let near_boundary = assign(&r, norm, tol * BAND) != stratum || assign(&r, norm, tol / BAND) != stratum;
    StratumReport { stratum, codimension: stratum.codimension(), residuals: r, norm, tol, near_boundary }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Consistency {
    Consistent,
    Unresolved,
    Inconsistent,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub location: Vec<f64>,
    pub class: SingularityClass,
    pub stratum: StratumId,
    pub status: Consistency,
    pub classification: ClassificationReport,
    pub strata: StratumReport,
}

fn expected(class: &SingularityClass) -> Option<StratumId> {
    match class {
        SingularityClass::Regular => Some(StratumId::W5),
        SingularityClass::Hyperbolic | SingularityClass::Elliptic | SingularityClass::DegenerateFold { .. } => Some(StratumId::W4),
        SingularityClass::Cusp => Some(StratumId::W3),
        SingularityClass::Degenerate(_) => None,
        _ => None,
    }
}

/// Compares the stratum of a zero's Helmholtz jet with its class:
/// W5 with Regular, W4 with the fold classes, W3 with Cusp and W1 with
/// Degenerate. Pairs that cannot be decided at the working tolerances
/// (degenerate class on a generic stratum, unresolved stratum, or a jet on a
/// stratum boundary) are `Unresolved`.
pub fn stratum_vs_classifier_crosscheck(zero: &DislocationPoint, k_wave: f64, tol: &ToleranceSet) -> Result<ConsistencyReport, StrataError> {
    if zero.location.len() != 2 {
        return Err(StrataError::Dimension(zero.location.len()));
    }
    let j = Jet2::from_series(&zero.jet)?.at([zero.location[0], zero.location[1]]);
    let classification = classify_jet_2d(&j, tol)?;
    let hj = project_to_helmholtz_jet(&j, k_wave, TAU_STRATUM)?;
    let strata = stratum_membership(&hj, TAU_STRATUM);
    let class = classification.class.clone();
    let status = match (expected(&class), strata.stratum) {
        (_, StratumId::Unresolved) => {
            if class.is_degenerate() {
                Consistency::Consistent
            } else {
                Consistency::Unresolved
            }
        }
        (None, StratumId::W1) => Consistency::Consistent,
        (None, _) => Consistency::Unresolved,
        (Some(s), got) if s == got => Consistency::Consistent,
        _ if strata.near_boundary => Consistency::Unresolved,
        _ => Consistency::Inconsistent,
    };
    Ok(ConsistencyReport { location: zero.location.clone(), stratum: strata.stratum, class, status, classification, strata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Jet;
    use crate::dislocation::{scan_zeros_2d, Region};
    use crate::fieldlang::{catalog_get, eval_field_jet, FieldDef, Params};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn jet(def: &FieldDef) -> Jet2<f64> {
        match crate::classify::jet_from_series(&eval_field_jet(def, &[0.0, 0.0], &Params::new(), 4).unwrap()).unwrap() {
            Jet::Two(j) => j,
            Jet::Three(_) => unreachable!(),
        }
    }

    fn hjet(name: &str) -> HelmholtzJet3<f64> {
        project_to_helmholtz_jet(&jet(&catalog_get(name).unwrap()), 1.0, 1e-12).unwrap()
    }

    #[test]
    fn projection() {
        let h = hjet("H2.helmholtz-hyperbolic");
        let got = [h.a, h.b, h.c, h.e, h.f, h.h, h.k];
        let want = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-15);
        }
        let e = project_to_helmholtz_jet(&jet(&catalog_get("H2.elliptic").unwrap()), 1.0, 1e-8).unwrap_err();
        match e {
            StrataError::NotHelmholtzJet { relation, violation, .. } => {
                assert_eq!(relation, "e+g+a");
                assert!((violation - 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let z = Jet2::from_coordinates(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let hz = project_to_helmholtz_jet(&z, 1.0, 1e-12).unwrap();
        assert_eq!(hz.coordinates(), [0.0; 16]);
    }

    #[test]
    fn derived_relations_are_exact() {
        let coords: [f64; 16] = std::array::from_fn(|i| (i as f64 * 0.37).sin());
        let h = HelmholtzJet3::from_coordinates(&coords, 1.0);
        assert_eq!(h.coordinates(), coords);
        assert!((h.e + h.g() + h.a).norm() < 1e-15);
        assert!((h.h + h.l() + h.b).norm() < 1e-15);
        assert!((h.k + h.m() + h.c).norm() < 1e-15);
        let back = project_to_helmholtz_jet(&h.to_jet2(), 1.0, 1e-14).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn catalog_strata() {
        let mut coords = [0.0; 16];
        coords[2] = 1.0;
        coords[5] = 1.0;
        let h = HelmholtzJet3::from_coordinates(&coords, 1.0);
        assert_eq!(stratum_membership(&h, TAU_STRATUM).stratum, StratumId::W5);
        assert_eq!(stratum_membership(&hjet("H2.helmholtz-hyperbolic"), TAU_STRATUM).stratum, StratumId::W4);
        assert_eq!(stratum_membership(&hjet("H2.helmholtz-hyperbolic-alt"), TAU_STRATUM).stratum, StratumId::W4);
        let cusp = stratum_membership(&hjet("H2.helmholtz-cusp"), TAU_STRATUM);
        assert_eq!(cusp.stratum, StratumId::W3);
        assert!(cusp.residuals.bordered1 < 1e-12 && cusp.residuals.bordered2 < 1e-12);
        let zero = HelmholtzJet3::from_coordinates(&[0.0; 16], 1.0);
        assert_eq!(stratum_membership(&zero, TAU_STRATUM).stratum, StratumId::W1);
        assert_eq!(StratumId::W3.codimension(), Some(4));
    }

    #[test]
    fn scale_invariance() {
        for name in ["H2.helmholtz-hyperbolic", "H2.helmholtz-cusp"] {
            let h = hjet(name);
            let s = stratum_membership(&h, TAU_STRATUM).stratum;
            for f in [0.5, 2.0] {
                assert_eq!(stratum_membership(&h.scaled(f), TAU_STRATUM).stratum, s);
            }
        }
    }

    #[test]
    fn crosscheck_catalog() {
        let region = Region::cube(2, -3.0, 3.0, 101).unwrap();
        let mut seen = Vec::new();
        for name in ["H2.helmholtz-hyperbolic", "H2.helmholtz-cusp", "H2.helmholtz-hyperbolic-alt"] {
            let def = catalog_get(name).unwrap();
            let scan = scan_zeros_2d(&def, &region, &Params::new()).unwrap();
            assert!(!scan.points.is_empty());
            for z in &scan.points {
                let r = stratum_vs_classifier_crosscheck(z, 1.0, &ToleranceSet::default()).unwrap();
                assert_eq!(r.status, Consistency::Consistent, "{name} at {:?}: {} vs {}", z.location, r.class, r.stratum);
                seen.push((r.class.label(), r.stratum));
            }
        }
        assert!(seen.contains(&("Hyperbolic".to_string(), StratumId::W4)));
        assert!(seen.contains(&("Cusp".to_string(), StratumId::W3)));
    }
}
