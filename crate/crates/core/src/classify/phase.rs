//! Critical points of the phase `θ = arg ψ` away from the dislocation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{jet_norm, ClassifyError, ToleranceSet};
use crate::fieldlang::{eval_field_jet, FieldDef, Params};
use crate::linalg::jacobi_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseCriticalKind {
    Extremum,
    Saddle,
    DegenerateCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCritical {
    pub kind: PhaseCriticalKind,
    pub point: Vec<f64>,
    pub modulus: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub determinant: f64,
    pub tolerances: ToleranceSet,
}

fn unit(dim: usize, a: usize, b: Option<usize>) -> Vec<u8> {
    let mut e = vec![0u8; dim];
    e[a] += 1;
    if let Some(b) = b {
        e[b] += 1;
    }
    e
}

/// Classifies a critical point of the phase of a 2D or 3D field. A
/// time-dependent field is evaluated at the time given by the override `t`.
pub fn classify_phase_critical(def: &FieldDef, point: &[f64], overrides: &Params) -> Result<PhaseCritical, ClassifyError> {
    classify_phase_critical_with(def, point, overrides, &ToleranceSet::default())
}

pub fn classify_phase_critical_with(
    def: &FieldDef,
    point: &[f64],
    overrides: &Params,
    tol: &ToleranceSet,
) -> Result<PhaseCritical, ClassifyError> {
    let frozen = def.frozen(overrides)?;
    let s = eval_field_jet(&frozen, point, overrides, 3)?;
    let n = def.dim;
    let psi0 = s.constant_term();
    let norm = jet_norm(&s);
    if psi0.norm() <= tol.tau_zero * (1.0 + norm) {
        return Err(ClassifyError::OnDislocation { modulus: psi0.norm() });
    }
    let d1: Vec<Complex<f64>> = (0..n).map(|a| s.derivative_at_base(&unit(n, a, None)) / psi0).collect();
    let gradient: Vec<f64> = d1.iter().map(|z| z.im).collect();
    let gnorm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gnorm >= tol.tau_grad {
        return Err(ClassifyError::NotCritical { grad: gnorm, tol: tol.tau_grad });
    }
    let mut hessian = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let d2 = s.derivative_at_base(&unit(n, a, Some(b))) / psi0;
            hessian[a][b] = (d2 - d1[a] * d1[b]).im;
        }
    }
    let eigenvalues: Vec<f64> = if n == 2 {
        jacobi_eigen([[hessian[0][0], hessian[0][1]], [hessian[1][0], hessian[1][1]]]).0.to_vec()
    } else {
        let mut m = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] = hessian[a][b];
            }
        }
        jacobi_eigen(m).0.to_vec()
    };
    let determinant: f64 = eigenvalues.iter().product();
    let kind = if determinant.abs() <= tol.tau_hess {
        PhaseCriticalKind::DegenerateCritical
    } else if eigenvalues.iter().all(|&l| l > 0.0) || eigenvalues.iter().all(|&l| l < 0.0) {
        PhaseCriticalKind::Extremum
    } else {
        PhaseCriticalKind::Saddle
    };
    Ok(PhaseCritical {
        kind,
        point: point.to_vec(),
        modulus: psi0.norm(),
        gradient,
        hessian,
        eigenvalues,
        determinant,
        tolerances: *tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(text: &str, p: &[f64]) -> Result<PhaseCriticalKind, ClassifyError> {
        let def = FieldDef::parse("p", 2, false, text, &[], "").unwrap();
        classify_phase_critical(&def, p, &Params::new()).map(|r| r.kind)
    }

    #[test]
    fn kinds() {
        assert_eq!(kind("exp(i*(x^2 + y^2))", &[0.0, 0.0]).unwrap(), PhaseCriticalKind::Extremum);
        assert_eq!(kind("exp(i*(x^2 - y^2))", &[0.0, 0.0]).unwrap(), PhaseCriticalKind::Saddle);
        assert_eq!(kind("exp(i*(x^3 + y^2))", &[0.0, 0.0]).unwrap(), PhaseCriticalKind::DegenerateCritical);
        assert_eq!(kind("2*exp(-i*(x^2 + y^2))", &[0.0, 0.0]).unwrap(), PhaseCriticalKind::Extremum);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(kind("exp(i*x)", &[0.0, 0.0]), Err(ClassifyError::NotCritical { .. })));
        assert!(matches!(kind("x + i*y", &[0.0, 0.0]), Err(ClassifyError::OnDislocation { .. })));
    }

    #[test]
    fn spatial() {
        let def = FieldDef::parse("p", 3, false, "exp(i*(x^2 + y^2 - z^2))", &[], "").unwrap();
        let r = classify_phase_critical(&def, &[0.0, 0.0, 0.0], &Params::new()).unwrap();
        assert_eq!(r.kind, PhaseCriticalKind::Saddle);
    }
}
