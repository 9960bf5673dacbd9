use serde::{Deserialize, Serialize};

use super::{parse_field, FieldDef, FieldError, FieldExpr, Func, Params, Program, Var};

/// Radial transformation of the value plane,
/// `U + iW = ρ(u, w)·((a·u + b·w) + i(c·u + d·w))`.
///
/// `rho` is an expression in the parameters `u` and `w` (no variables).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTransform {
    pub linear: [[f64; 2]; 2],
    pub rho: FieldExpr,
}

pub const MIN_DET: f64 = 1e-9;
pub const MIN_RHO0: f64 = 1e-6;

impl RadialTransform {
    pub fn identity() -> RadialTransform {
        RadialTransform { linear: [[1.0, 0.0], [0.0, 1.0]], rho: FieldExpr::Real(1.0) }
    }

    pub fn new(linear: [[f64; 2]; 2], rho: &str) -> Result<RadialTransform, FieldError> {
        let t = RadialTransform { linear, rho: parse_field(rho)? };
        t.validate()?;
        Ok(t)
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        a * d - b * c
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let det = self.det();
        if !(det.abs() > MIN_DET) {
            return Err(FieldError::NearSingularMatrix { det });
        }
        if let Some(v) = self.rho.variables().into_iter().next() {
            return Err(FieldError::BadRadialTransform(format!("rho may not use variable '{}'", v.name())));
        }
        if let Some(p) = self.rho.parameters().into_iter().find(|p| p != "u" && p != "w") {
            return Err(FieldError::BadRadialTransform(format!("rho may only use u and w, found '{p}'")));
        }
        let r0 = self.rho_at(0.0, 0.0)?;
        if !(r0 >= MIN_RHO0) {
            return Err(FieldError::BadRadialTransform(format!("rho(0,0) = {r0} is below {MIN_RHO0}")));
        }
        Ok(())
    }

    /// Real part of ρ at `(u, w)`.
    pub fn rho_at(&self, u: f64, w: f64) -> Result<f64, FieldError> {
        let params: Params = [("u".to_string(), u), ("w".to_string(), w)].into_iter().collect();
        let prog = Program::compile(&self.rho, [None; 4], &params)?;
        Ok(prog.eval::<f64>(&[])?.re)
    }
}

fn lincomb(coeffs: &[f64], terms: &[FieldExpr]) -> FieldExpr {
    FieldExpr::sum(coeffs.iter().zip(terms).filter(|(c, _)| **c != 0.0).map(|(c, t)| {
        if *c == 1.0 {
            t.clone()
        } else {
            FieldExpr::mul(FieldExpr::real(*c), t.clone())
        }
    }))
}

fn det(s: &[Vec<f64>]) -> f64 {
    match s.len() {
        2 => s[0][0] * s[1][1] - s[0][1] * s[1][0],
        3 => {
            s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1]) - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
                + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0])
        }
        _ => 0.0,
    }
}

/// Builds `τ∘ψ∘σ`, where `σ(p) = S·p` acts on the spatial coordinates.
pub fn compose_radial(def: &FieldDef, t: &RadialTransform, s: &[Vec<f64>]) -> Result<FieldDef, FieldError> {
    if s.len() != def.dim {
        return Err(FieldError::DimMismatch(s.len(), def.dim));
    }
    if let Some(row) = s.iter().find(|r| r.len() != def.dim) {
        return Err(FieldError::DimMismatch(row.len(), def.dim));
    }
    let d = det(s);
    if !(d.abs() > MIN_DET) {
        return Err(FieldError::NearSingularMatrix { det: d });
    }
    t.validate()?;

    let spatial = [Var::X, Var::Y, Var::Z];
    let coords: Vec<FieldExpr> = spatial[..def.dim].iter().map(|v| FieldExpr::var(*v)).collect();
    let mut subs: [Option<FieldExpr>; 4] = Default::default();
    for (i, row) in s.iter().enumerate() {
        subs[i] = Some(lincomb(row, &coords));
    }
    let psi = def.expr.substitute_vars(&subs);
    let u = FieldExpr::call(Func::Re, psi.clone());
    let w = FieldExpr::call(Func::Im, psi);
    let uw = [u.clone(), w.clone()];
    let [[a, b], [c, dd]] = t.linear;
    let value = FieldExpr::add(
        lincomb(&[a, b], &uw),
        FieldExpr::mul(FieldExpr::ImagUnit, lincomb(&[c, dd], &uw)),
    );
    let expr = if t.rho == FieldExpr::Real(1.0) {
        value
    } else {
        let rho = t.rho.substitute_param("u", &u).substitute_param("w", &w);
        FieldExpr::mul(rho, value)
    };
    let mut out = FieldDef::new(
        &format!("{}~radial", def.name),
        def.dim,
        def.time_dependent,
        expr,
        def.params.clone(),
        &def.provenance,
    )?;
    out.helmholtz_k = None;
    out.wave_c = None;
    Ok(out)
}
