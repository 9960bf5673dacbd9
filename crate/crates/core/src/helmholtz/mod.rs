//! Helmholtz and wave equation: residual checks, constructions of exact
//! solutions and the definiteness test on Hessian pencils.

mod cauchy;
mod pencil;
mod planewave;

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::dislocation::{DislocationError, Region};
use crate::fieldlang::{EvalError, FieldDef, FieldError, FieldExpr, Func, Params, Program, Var};
use crate::taylor::SeriesError;

pub use cauchy::{helmholtz_series_from_cauchy, CauchyData, MAX_CAUCHY_ORDER};
pub use pencil::{hessian_pencil_definite, PencilReport};
pub use planewave::{random_helmholtz_field, random_plane_wave_sum, PlaneWave, PlaneWaveSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HelmholtzError {
    #[error("field '{0}' is not time-dependent")]
    NotTimeDependent(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("not on the dislocation: |psi| = {modulus:e} exceeds {tol:e}")]
    NotOnDislocation { modulus: f64, tol: f64 },
    #[error("plane-wave table: {0}")]
    Table(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Region(#[from] DislocationError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Sup-norm of an equation residual over a grid, with where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sup_abs: f64,
    /// Grid point (with time appended for waves) of the largest residual.
    pub argmax: Vec<f64>,
    pub grid: Region,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub samples: usize,
}

fn second(s: &crate::taylor::TruncatedSeries<f64>, var: usize) -> Complex<f64> {
    let mut e = [0u8; 4];
    e[var] = 2;
    s.derivative_at_base(&e[..s.nvars()])
}

/// Largest value with ties broken by the first index, so the result does
/// not depend on scheduling.
fn sup_with_arg(values: Vec<(f64, usize)>) -> (f64, usize) {
    values.into_iter().fold((0.0, 0), |best, (v, i)| if v > best.0 || (v == best.0 && i < best.1) { (v, i) } else { best })
}

fn residual_over(prog: &Program, region: &Region, extra: Option<f64>, f: impl Fn(&crate::taylor::TruncatedSeries<f64>) -> Complex<f64> + Sync) -> Result<Vec<(f64, usize)>, HelmholtzError> {
    (0..region.len())
        .into_par_iter()
        .map(|idx| {
            let mut p = region.point(idx);
            p.extend(extra);
            let s = prog.jet(&p, 2)?;
            Ok((f(&s).norm(), idx))
        })
        .collect()
}

/// `sup |Δψ + k²ψ|` over the grid; second derivatives come from order-2 jets.
/// A time-dependent field is checked at the time given by the override `t`.
pub fn helmholtz_residual(def: &FieldDef, region: &Region, k: f64, params: &Params) -> Result<ResidualReport, HelmholtzError> {
    region.validate()?;
    let def = def.frozen(params)?;
    if def.dim != region.dim() {
        return Err(HelmholtzError::DimMismatch(def.dim, region.dim()));
    }
    let prog = def.compile(params)?;
    let n = def.dim;
    let vals = residual_over(&prog, region, None, |s| {
        let lap: Complex<f64> = (0..n).map(|a| second(s, a)).sum();
        lap + s.constant_term() * (k * k)
    })?;
    let (sup_abs, idx) = sup_with_arg(vals);
    Ok(ResidualReport { sup_abs, argmax: region.point(idx), grid: region.clone(), k: Some(k), c: None, times: None, samples: region.len() })
}

/// `sup |Ψ_tt − c²ΔΨ|` over the grid and the given times, with `t` seeded as
/// a series variable.
pub fn wave_residual(def: &FieldDef, region: &Region, times: &[f64], c: f64, params: &Params) -> Result<ResidualReport, HelmholtzError> {
    region.validate()?;
    if !def.time_dependent {
        return Err(HelmholtzError::NotTimeDependent(def.name.clone()));
    }
    if def.dim != region.dim() {
        return Err(HelmholtzError::DimMismatch(def.dim, region.dim()));
    }
    let prog = def.compile(params)?;
    let n = def.dim;
    let mut best = (0.0, 0usize, 0usize);
    for (ti, &t) in times.iter().enumerate() {
        let vals = residual_over(&prog, region, Some(t), |s| {
            let lap: Complex<f64> = (0..n).map(|a| second(s, a)).sum();
            second(s, n) - lap * (c * c)
        })?;
        let (v, idx) = sup_with_arg(vals);
        if v > best.0 {
            best = (v, idx, ti);
        }
    }
    let mut argmax = region.point(best.1);
    argmax.push(times.get(best.2).copied().unwrap_or(0.0));
    Ok(ResidualReport {
        sup_abs: best.0,
        argmax,
        grid: region.clone(),
        k: None,
        c: Some(c),
        times: Some(times.to_vec()),
        samples: region.len() * times.len(),
    })
}

fn merged_params(a: &FieldDef, b: &FieldDef) -> Result<BTreeMap<String, f64>, HelmholtzError> {
    let mut out = a.params.clone();
    for (k, v) in &b.params {
        match out.get(k) {
            Some(w) if w != v => return Err(HelmholtzError::BadParameter(format!("'{k}' has defaults {w} and {v}"))),
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Ok(out)
}

/// `Ψ = ψ·cos t + φ·sin t`. When both inputs solve the Helmholtz equation
/// with wavenumber `k`, `Ψ` solves the wave equation with speed `1/k`.
pub fn monochromatic_wave(psi: &FieldDef, phi: &FieldDef) -> Result<FieldDef, HelmholtzError> {
    if psi.dim != phi.dim {
        return Err(HelmholtzError::DimMismatch(psi.dim, phi.dim));
    }
    if psi.time_dependent || phi.time_dependent {
        return Err(HelmholtzError::BadParameter("inputs must not depend on time".into()));
    }
    let t = FieldExpr::var(Var::T);
    let expr = FieldExpr::add(
        FieldExpr::mul(psi.expr.clone(), FieldExpr::call(Func::Cos, t.clone())),
        FieldExpr::mul(phi.expr.clone(), FieldExpr::call(Func::Sin, t)),
    );
    let name = format!("{}+{}-wave", psi.name, phi.name);
    let mut def = FieldDef::new(&name, psi.dim, true, expr, merged_params(psi, phi)?, "monochromatic wave")?;
    if let (Some(k1), Some(k2)) = (psi.helmholtz_k, phi.helmholtz_k) {
        if k1 == k2 {
            def = def.with_helmholtz(k1).with_wave(1.0 / k1);
        }
    }
    Ok(def)
}

/// `Ψ̃(x, t) = Ψ(k·x, c·k·t)`: turns a unit wavenumber, unit speed wave into
/// one with wavenumber `k` and speed `c`. Fields without time are only
/// rescaled in space.
pub fn rescale_wave(def: &FieldDef, k: f64, c: f64) -> Result<FieldDef, HelmholtzError> {
    if !(k > 0.0 && k.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return Err(HelmholtzError::BadParameter(format!("need k > 0 and c > 0, got k={k}, c={c}")));
    }
    let scaled = |v: Var, f: f64| Some(FieldExpr::mul(FieldExpr::real(f), FieldExpr::var(v)));
    let subs = [scaled(Var::X, k), scaled(Var::Y, k), scaled(Var::Z, k), scaled(Var::T, c * k)];
    let expr = def.expr.substitute_vars(&subs);
    let mut out = FieldDef::new(&format!("{}~k={k},c={c}", def.name), def.dim, def.time_dependent, expr, def.params.clone(), &def.provenance)?;
    if def.helmholtz_k.is_some() {
        out.helmholtz_k = Some(k);
    }
    if def.time_dependent && def.wave_c.is_some() {
        out.wave_c = Some(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{catalog_get, eval_field};

    fn square(n: usize) -> Region {
        Region::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn catalog_helmholtz_fields() {
        for name in ["H2.helmholtz-hyperbolic", "H2.helmholtz-cusp", "H2.helmholtz-hyperbolic-alt"] {
            let r = helmholtz_residual(&catalog_get(name).unwrap(), &square(41), 1.0, &Params::new()).unwrap();
            assert!(r.sup_abs < 1e-12, "{name}: {}", r.sup_abs);
        }
    }

    #[test]
    fn normal_form_is_not_helmholtz() {
        let r = helmholtz_residual(&catalog_get("H2.hyperbolic").unwrap(), &square(41), 1.0, &Params::new()).unwrap();
        assert!(r.sup_abs >= 0.5);
        assert_eq!(r.argmax.len(), 2);
    }

    #[test]
    fn waves() {
        for name in ["H2.helmholtz-hyperbolic-wave", "H2.helmholtz-cusp-wave"] {
            let r = wave_residual(&catalog_get(name).unwrap(), &square(21), &[0.0, 0.7, 2.0], 1.0, &Params::new()).unwrap();
            assert!(r.sup_abs < 1e-12, "{name}");
        }
        let lin = FieldDef::parse("w", 2, true, "t*(x + i*y)", &[], "").unwrap();
        assert_eq!(wave_residual(&lin, &square(11), &[0.0, 1.0], 1.0, &Params::new()).unwrap().sup_abs, 0.0);
        let e = wave_residual(&catalog_get("H2.regular").unwrap(), &square(11), &[0.0], 1.0, &Params::new());
        assert!(matches!(e, Err(HelmholtzError::NotTimeDependent(_))));
    }

    #[test]
    fn monochromatic_matches_catalog() {
        let psi = catalog_get("H2.helmholtz-hyperbolic").unwrap();
        let phi = FieldDef::parse("phi", 2, false, "cos(y)", &[], "").unwrap().with_helmholtz(1.0);
        let w = monochromatic_wave(&psi, &phi).unwrap();
        let cat = catalog_get("H2.helmholtz-hyperbolic-wave").unwrap();
        for p in [[0.1, 0.2, 0.3], [-0.7, 0.4, 2.0]] {
            let a = eval_field(&w, &p, &Params::new()).unwrap();
            let b = eval_field(&cat, &p, &Params::new()).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
        assert!(wave_residual(&w, &square(11), &[0.3], 1.0, &Params::new()).unwrap().sup_abs < 1e-12);
        let cusp = catalog_get("H2.helmholtz-cusp").unwrap();
        let icos = FieldDef::parse("icos", 2, false, "i*cos(y)", &[], "").unwrap();
        let w = monochromatic_wave(&cusp, &icos).unwrap();
        let cat = catalog_get("H2.helmholtz-cusp-wave").unwrap();
        let p = [0.3, -0.2, 1.1];
        assert!((eval_field(&w, &p, &Params::new()).unwrap() - eval_field(&cat, &p, &Params::new()).unwrap()).norm() < 1e-15);
        let zero = FieldDef::parse("z", 2, false, "0", &[], "").unwrap();
        let w = monochromatic_wave(&zero, &zero).unwrap();
        assert_eq!(eval_field(&w, &p, &Params::new()).unwrap(), Complex::new(0.0, 0.0));
        let three = catalog_get("H3.regular").unwrap();
        assert!(matches!(monochromatic_wave(&zero, &three), Err(HelmholtzError::DimMismatch(2, 3))));
    }

    #[test]
    fn rescaling() {
        let w = catalog_get("H2.helmholtz-hyperbolic-wave").unwrap();
        let same = rescale_wave(&w, 1.0, 1.0).unwrap();
        let p = [0.2, 0.5, 0.9];
        assert!((eval_field(&same, &p, &Params::new()).unwrap() - eval_field(&w, &p, &Params::new()).unwrap()).norm() < 1e-15);
        let r = rescale_wave(&w, 2.0, 3.0).unwrap();
        assert!(wave_residual(&r, &square(21), &[0.0, 0.4], 3.0, &Params::new()).unwrap().sup_abs < 1e-10);
        let t = crate::fieldlang::params(&[("t", 0.4)]);
        assert!(helmholtz_residual(&r, &square(21), 2.0, &t).unwrap().sup_abs < 1e-10);
        let pw = FieldDef::parse("pw", 2, false, "exp(i*x)", &[], "").unwrap();
        let r2 = rescale_wave(&pw, 2.0, 1.0).unwrap();
        assert!((eval_field(&r2, &[0.3, 0.0], &Params::new()).unwrap() - Complex::new(0.0, 0.6).exp()).norm() < 1e-15);
        assert!(helmholtz_residual(&r2, &square(11), 2.0, &Params::new()).unwrap().sup_abs < 1e-13);
        assert!(rescale_wave(&w, 0.0, 1.0).is_err());
        assert!(rescale_wave(&w, 1.0, -1.0).is_err());
    }
}
