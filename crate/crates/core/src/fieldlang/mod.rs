//! Field expressions: parsing, evaluation, the named catalog and field files.

mod ast;
mod catalog;
mod eval;
mod parser;
mod radial;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{BinOp, FieldExpr, Func, Var};
pub use catalog::{catalog, catalog_get, fold_m};
pub use eval::{eval_expr, Algebra, EvalError, Params, Program, ScalarAlgebra, SeriesAlgebra};
pub use parser::{parse_field, SyntaxError};
pub use radial::{compose_radial, RadialTransform};

use crate::scalar::Real;
use crate::taylor::TruncatedSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("variable '{var}' is not admissible for a {dim}D{} field", if *.time { " time-dependent" } else { "" })]
    InadmissibleVariable { var: &'static str, dim: usize, time: bool },
    #[error("parameter '{0}' is used but not declared")]
    UndeclaredParameter(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("matrix is singular or nearly so (|det| = {det:e})")]
    NearSingularMatrix { det: f64 },
    #[error("invalid radial transform: {0}")]
    BadRadialTransform(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("malformed field file: {0}")]
    BadFile(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A named complex scalar field ψ(x, y[, z][, t]) with parameter defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDef {
    pub name: String,
    pub dim: usize,
    pub time_dependent: bool,
    pub expr: FieldExpr,
    pub params: BTreeMap<String, f64>,
    pub provenance: String,
    /// Wavenumber if the field solves the Helmholtz equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helmholtz_k: Option<f64>,
    /// Wave speed if the field is a solution of the wave equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_c: Option<f64>,
}

impl FieldDef {
    /// Validates and builds a definition.
    ///
    /// A field that is not time-dependent but declares a parameter `t` reads
    /// every `t` in its expression as that parameter.
    pub fn new(
        name: &str,
        dim: usize,
        time_dependent: bool,
        expr: FieldExpr,
        params: BTreeMap<String, f64>,
        provenance: &str,
    ) -> Result<FieldDef, FieldError> {
        if dim != 2 && dim != 3 {
            return Err(FieldError::BadDimension(dim));
        }
        if time_dependent && params.contains_key("t") {
            return Err(FieldError::BadParameter("time-dependent fields cannot declare a parameter 't'".into()));
        }
        for (k, v) in &params {
            if Var::from_name(k).is_some() && k != "t" {
                return Err(FieldError::BadParameter(format!("'{k}' is a variable name")));
            }
            if !v.is_finite() {
                return Err(FieldError::BadParameter(format!("'{k}' is not finite")));
            }
        }
        let expr = if !time_dependent && params.contains_key("t") {
            expr.substitute_var(Var::T, &FieldExpr::param("t"))
        } else {
            expr
        };
        for v in expr.variables() {
            let ok = match v {
                Var::X | Var::Y => true,
                Var::Z => dim == 3,
                Var::T => time_dependent,
            };
            if !ok {
                return Err(FieldError::InadmissibleVariable { var: v.name(), dim, time: time_dependent });
            }
        }
        if let Some(p) = expr.parameters().into_iter().find(|p| !params.contains_key(p)) {
            return Err(FieldError::UndeclaredParameter(p));
        }
        Ok(FieldDef {
            name: name.to_string(),
            dim,
            time_dependent,
            expr,
            params,
            provenance: provenance.to_string(),
            helmholtz_k: None,
            wave_c: None,
        })
    }

    /// Parses `text` and builds a definition.
    pub fn parse(name: &str, dim: usize, time_dependent: bool, text: &str, params: &[(&str, f64)], provenance: &str) -> Result<FieldDef, FieldError> {
        let expr = parse_field(text)?;
        let params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        FieldDef::new(name, dim, time_dependent, expr, params, provenance)
    }

    pub fn with_helmholtz(mut self, k: f64) -> FieldDef {
        self.helmholtz_k = Some(k);
        self
    }

    pub fn with_wave(mut self, c: f64) -> FieldDef {
        self.wave_c = Some(c);
        self
    }

    /// Number of coordinates a point needs: `dim`, plus one for time.
    pub fn arity(&self) -> usize {
        self.dim + usize::from(self.time_dependent)
    }

    /// Declared defaults merged with `overrides`; unknown names are rejected.
    pub fn resolve_params(&self, overrides: &Params) -> Result<Params, EvalError> {
        let mut out = self.params.clone();
        for (k, v) in overrides {
            match out.get_mut(k) {
                Some(slot) => *slot = *v,
                None => return Err(EvalError::UnknownParameter(k.clone())),
            }
        }
        Ok(out)
    }

    /// Spatial slice: for a time-dependent field, time is frozen at the
    /// override `t` (default 0) and becomes a parameter. Other fields are
    /// returned unchanged.
    pub fn frozen(&self, overrides: &Params) -> Result<FieldDef, FieldError> {
        if !self.time_dependent {
            return Ok(self.clone());
        }
        let mut params = self.params.clone();
        params.insert("t".into(), overrides.get("t").copied().unwrap_or(0.0));
        let mut def = FieldDef::new(&self.name, self.dim, false, self.expr.clone(), params, &self.provenance)?;
        def.helmholtz_k = self.helmholtz_k;
        Ok(def)
    }

    fn slots(&self) -> [Option<usize>; 4] {
        let mut s = [Some(0), Some(1), None, None];
        if self.dim == 3 {
            s[2] = Some(2);
        }
        if self.time_dependent {
            s[3] = Some(self.dim);
        }
        s
    }

    /// Compiles the expression with parameters resolved.
    pub fn compile(&self, overrides: &Params) -> Result<Program, EvalError> {
        let params = self.resolve_params(overrides)?;
        Program::compile(&self.expr, self.slots(), &params)
    }

    /// Serializes to the one-line file form `name; dim; time_flag; params; expression`.
    pub fn to_file_string(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{}; {}; {}; {}; {}\n",
            self.name,
            self.dim,
            u8::from(self.time_dependent),
            params.join(","),
            self.expr
        )
    }

    /// Parses the file form. Blank lines and `#` comment lines are skipped;
    /// exactly one definition must remain.
    pub fn from_file_str(text: &str) -> Result<FieldDef, FieldError> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let line = match lines.as_slice() {
            [one] => *one,
            [] => return Err(FieldError::BadFile("no definition".into())),
            _ => return Err(FieldError::BadFile("more than one definition".into())),
        };
        let parts: Vec<&str> = line.splitn(5, ';').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(FieldError::BadFile(format!("expected 5 ';'-separated fields, got {}", parts.len())));
        }
        let name = parts[0];
        if name.is_empty() {
            return Err(FieldError::BadFile("empty name".into()));
        }
        let dim: usize = parts[1]
            .parse()
            .map_err(|_| FieldError::BadFile(format!("bad dimension '{}'", parts[1])))?;
        let time = match parts[2] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(FieldError::BadFile(format!("bad time flag '{other}'"))),
        };
        let mut params = BTreeMap::new();
        for item in parts[3].split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| FieldError::BadFile(format!("bad parameter '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| FieldError::BadFile(format!("bad parameter value '{item}'")))?;
            params.insert(k.trim().to_string(), v);
        }
        let expr = parse_field(parts[4])?;
        FieldDef::new(name, dim, time, expr, params, "file")
    }

    pub fn read_file(path: &Path) -> Result<FieldDef, FieldError> {
        let text = std::fs::read_to_string(path).map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))?;
        FieldDef::from_file_str(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), FieldError> {
        std::fs::write(path, self.to_file_string()).map_err(|e| FieldError::Io(format!("{}: {e}", path.display())))
    }
}

impl fmt::Display for FieldDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

/// Value of the field at `point` (`dim` coordinates, then `t` if time-dependent).
pub fn eval_field<T: Real>(def: &FieldDef, point: &[T], overrides: &Params) -> Result<Complex<T>, EvalError> {
    def.compile(overrides)?.eval(point)
}

/// Taylor expansion of the field about `point`, truncated at `order`.
pub fn eval_field_jet<T: Real>(def: &FieldDef, point: &[T], overrides: &Params, order: usize) -> Result<TruncatedSeries<T>, EvalError> {
    def.compile(overrides)?.jet(point, order)
}

/// Parameter overrides from `(name, value)` pairs.
pub fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn eval_polynomial_field() {
        let def = FieldDef::parse("p", 2, false, "x^2 - y^2 + i*y", &[], "").unwrap();
        assert_eq!(eval_field(&def, &[1.0, 2.0], &Params::new()).unwrap(), c(-3.0, 2.0));
    }

    #[test]
    fn helmholtz_hyperbolic_vanishes_at_origin() {
        let def = catalog_get("H2.helmholtz-hyperbolic").unwrap();
        assert_eq!(eval_field(&def, &[0.0, 0.0], &Params::new()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn cusp_normal_zero_with_parameter() {
        let def = catalog_get("H2.cusp-normal").unwrap();
        let v = eval_field(&def, &[0.5, -0.25], &params(&[("a", 0.25)])).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn arity_checked() {
        let def = catalog_get("H2.regular").unwrap();
        assert!(matches!(
            eval_field(&def, &[0.0, 0.0, 0.0], &Params::new()),
            Err(EvalError::Arity { expected: 2, got: 3 })
        ));
        let wave = catalog_get("H2.helmholtz-hyperbolic-wave").unwrap();
        assert_eq!(wave.arity(), 3);
        assert!(eval_field(&wave, &[0.0, 0.0, 0.3], &Params::new()).is_ok());
    }

    #[test]
    fn division_by_zero() {
        let def = FieldDef::parse("d", 2, false, "1/x + i*y", &[], "").unwrap();
        assert_eq!(eval_field(&def, &[0.0, 1.0], &Params::new()), Err(EvalError::DivisionByZero));
        assert_eq!(eval_field_jet(&def, &[0.0, 1.0], &Params::new(), 2), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn unknown_override_rejected() {
        let def = catalog_get("H2.Ht").unwrap();
        assert!(matches!(
            eval_field(&def, &[0.0, 0.0], &params(&[("q", 1.0)])),
            Err(EvalError::UnknownParameter(_))
        ));
    }

    #[test]
    fn jet_of_regular() {
        let def = catalog_get("H2.regular").unwrap();
        let s = eval_field_jet(&def, &[0.0, 0.0], &Params::new(), 1).unwrap();
        assert_eq!(s.coeff(&[1, 0]), c(1.0, 0.0));
        assert_eq!(s.coeff(&[0, 1]), c(0.0, 1.0));
        assert_eq!(s.constant_term(), c(0.0, 0.0));
    }

    #[test]
    fn jet_of_helmholtz_hyperbolic() {
        let def = catalog_get("H2.helmholtz-hyperbolic").unwrap();
        let s = eval_field_jet(&def, &[0.0, 0.0], &Params::new(), 3).unwrap();
        let want = [
            ([0u8, 0u8], c(0.0, 0.0)),
            ([2, 0], c(0.5, 0.0)),
            ([0, 2], c(-0.5, 0.0)),
            ([0, 1], c(0.0, 1.0)),
            ([0, 3], c(0.0, -1.0 / 6.0)),
            ([1, 1], c(0.0, 0.0)),
        ];
        for (e, v) in want {
            let got = s.coeff(&e);
            assert_abs_diff_eq!(got.re, v.re, epsilon = 1e-15);
            assert_abs_diff_eq!(got.im, v.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn jet_of_cusp_is_itself() {
        let def = FieldDef::parse("c", 2, false, "x^3 + x*y + i*y", &[], "").unwrap();
        let s = eval_field_jet(&def, &[0.0, 0.0], &Params::new(), 3).unwrap();
        let nonzero: Vec<_> = s.terms().filter(|(_, v)| v.norm() > 0.0).map(|(e, v)| (e[0], e[1], *v)).collect();
        assert_eq!(nonzero.len(), 3);
        assert_eq!(s.coeff(&[0, 1]), c(0.0, 1.0));
        assert_eq!(s.coeff(&[1, 1]), c(1.0, 0.0));
        assert_eq!(s.coeff(&[3, 0]), c(1.0, 0.0));
    }

    #[test]
    fn jet_constant_matches_value() {
        for def in catalog() {
            let p: Vec<f64> = [0.31, -0.27, 0.19, 0.4][..def.arity()].to_vec();
            let v = eval_field(&def, &p, &Params::new()).unwrap();
            let s = eval_field_jet(&def, &p, &Params::new(), 4).unwrap();
            assert!((s.constant_term() - v).norm() <= 1e-14 * (1.0 + v.norm()), "{}", def.name);
        }
    }

    #[test]
    fn f32_evaluation() {
        let def = catalog_get("H2.helmholtz-cusp").unwrap();
        let v64 = eval_field(&def, &[0.3f64, 0.2], &Params::new()).unwrap();
        let v32 = eval_field(&def, &[0.3f32, 0.2], &Params::new()).unwrap();
        assert!((v64.re - v32.re as f64).abs() < 1e-6);
        assert!((v64.im - v32.im as f64).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            FieldDef::parse("z", 2, false, "x + i*z", &[], ""),
            Err(FieldError::InadmissibleVariable { var: "z", .. })
        ));
        assert!(matches!(
            FieldDef::parse("t", 2, false, "x + t + i*y", &[], ""),
            Err(FieldError::InadmissibleVariable { var: "t", .. })
        ));
        assert!(matches!(
            FieldDef::parse("p", 2, false, "x + a + i*y", &[], ""),
            Err(FieldError::UndeclaredParameter(p)) if p == "a"
        ));
        assert!(matches!(FieldDef::parse("d", 4, false, "x", &[], ""), Err(FieldError::BadDimension(4))));
        let ht = FieldDef::parse("h", 2, false, "x + t + i*y", &[("t", 0.5)], "").unwrap();
        assert_eq!(ht.arity(), 2);
        assert_eq!(eval_field(&ht, &[0.0, 0.0], &Params::new()).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn frozen_time() {
        let wave = catalog_get("H2.helmholtz-hyperbolic-wave").unwrap();
        let t = 0.7;
        let frozen = wave.frozen(&params(&[("t", t)])).unwrap();
        assert!(!frozen.time_dependent);
        let a = eval_field(&wave, &[0.2, 0.1, t], &Params::new()).unwrap();
        let b = eval_field(&frozen, &[0.2, 0.1], &Params::new()).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn file_round_trip() {
        for def in catalog() {
            let text = def.to_file_string();
            let back = FieldDef::from_file_str(&text).unwrap();
            assert_eq!(back.expr, def.expr, "{}", def.name);
            assert_eq!(back.params, def.params);
            assert_eq!(back.dim, def.dim);
            assert_eq!(back.time_dependent, def.time_dependent);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.field");
        let def = catalog_get("H2.cusp-family").unwrap();
        def.write_file(&path).unwrap();
        assert_eq!(FieldDef::read_file(&path).unwrap().expr, def.expr);
    }

    #[test]
    fn file_errors() {
        assert!(matches!(FieldDef::from_file_str(""), Err(FieldError::BadFile(_))));
        assert!(matches!(FieldDef::from_file_str("a; 2; 0; x"), Err(FieldError::BadFile(_))));
        assert!(matches!(FieldDef::from_file_str("a; 2; maybe; ; x"), Err(FieldError::BadFile(_))));
        assert!(matches!(FieldDef::from_file_str("a; 2; 0; ; x +"), Err(FieldError::Syntax(_))));
        let def = FieldDef::from_file_str("# comment\nmine; 2; 0; a=0.5, b=-1; x + a + i*(y + b)\n").unwrap();
        assert_eq!(def.params["b"], -1.0);
    }
}
