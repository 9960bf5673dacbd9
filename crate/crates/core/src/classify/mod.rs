//! Classification of phase singularities from jets at dislocation zeros.

pub(crate) mod curve;
mod jet;
mod phase;
mod planar;
mod spatial;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fieldlang::{eval_field_jet, EvalError, FieldDef, FieldError, Params};
use crate::taylor::{SeriesError, DEFAULT_ORDER};

pub use crate::fieldlang::RadialTransform;
pub use jet::{jet_from_series, jet_norm, Jet, Jet2, Jet3};
pub use phase::{classify_phase_critical, classify_phase_critical_with, PhaseCritical, PhaseCriticalKind};
pub use planar::{classify_jet_2d, contact_order};
pub use spatial::classify_jet_3d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("jet order {order} is too low (need at least {needed})")]
    InsufficientOrder { order: usize, needed: usize },
    #[error("jets need 2 or 3 variables, got {0}")]
    UnsupportedVars(usize),
    #[error("not on the dislocation: |psi| = {modulus:e} exceeds {tol:e}")]
    NotOnDislocation { modulus: f64, tol: f64 },
    #[error("not a fold point: {0}")]
    NotFold(String),
    #[error("all discriminant orders up to {0} vanish")]
    AllOrdersVanish(usize),
    #[error("phase gradient {grad:e} exceeds {tol:e}: not a critical point")]
    NotCritical { grad: f64, tol: f64 },
    #[error("|psi| = {modulus:e} is on the dislocation")]
    OnDislocation { modulus: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Thresholds used by the decision procedures; all reported with each result.
///
/// `tau_fold` and `tau_curv` are relative to powers of the jet norm, so the
/// outcome does not change when the field is multiplied by a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    pub tau_zero: f64,
    pub tau_rank: f64,
    pub tau_fold: f64,
    pub tau_curv: f64,
    pub tau_grad: f64,
    pub tau_hess: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet { tau_zero: 1e-10, tau_rank: 1e-7, tau_fold: 1e-7, tau_curv: 1e-7, tau_grad: 1e-8, tau_hess: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularityClass {
    Regular,
    Hyperbolic,
    Elliptic,
    DegenerateFold { m: u32, sign: Sign },
    Cusp,
    DefiniteHyperbolic,
    DefiniteElliptic,
    Indefinite,
    SpatialCusp,
    Degenerate(String),
}

impl SingularityClass {
    /// Short label without the degenerate reason, e.g. `DegenerateFold(3,-)`.
    pub fn label(&self) -> String {
        match self {
            SingularityClass::DegenerateFold { m, sign } => format!("DegenerateFold({m},{sign})"),
            SingularityClass::Degenerate(_) => "Degenerate".to_string(),
            other => format!("{other:?}"),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, SingularityClass::Degenerate(_))
    }
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityClass::Degenerate(r) => write!(f, "Degenerate({r})"),
            other => f.write_str(&other.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactOrder {
    pub m: u32,
    pub sign: Sign,
}

/// Data of `λ = det Dψ` along the kernel field at the basepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaData {
    pub vlambda: f64,
    pub v2lambda: Option<f64>,
    pub dlambda: Vec<f64>,
}

/// Result of a classification with every diagnostic of the branch taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class: SingularityClass,
    pub label: String,
    pub dim: usize,
    pub basepoint: Vec<f64>,
    /// `|ψ|` at the basepoint.
    pub modulus: f64,
    pub jet_norm: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Unit kernel vector(s) of the real differential.
    pub kernel: Option<Vec<Vec<f64>>>,
    pub vlambda: Option<f64>,
    pub v2lambda: Option<f64>,
    pub dlambda: Option<Vec<f64>>,
    /// `d²ψ(v, v)` as a plane vector.
    pub fold_opening: Option<[f64; 2]>,
    pub q_normal: Option<f64>,
    /// Eigenvalues of the normal second-order form on the kernel (3D).
    pub q_eigenvalues: Option<Vec<f64>>,
    pub tangent: Option<[f64; 2]>,
    pub normal: Option<[f64; 2]>,
    pub curvature_normal: Option<f64>,
    pub curvature_product: Option<f64>,
    pub contact_order: Option<ContactOrder>,
    /// Vanishing orders of the discriminant parametrization on the cusp branch.
    pub cusp_orders: Option<[u32; 2]>,
    /// Classification of the restriction to the reduced surface (3D cusp test).
    pub reduced: Option<Box<ClassificationReport>>,
    pub tolerances: ToleranceSet,
}

impl ClassificationReport {
    pub(crate) fn empty(dim: usize, basepoint: Vec<f64>, tol: ToleranceSet) -> Self {
        ClassificationReport {
            class: SingularityClass::Degenerate("unclassified".into()),
            label: String::new(),
            dim,
            basepoint,
            modulus: 0.0,
            jet_norm: 0.0,
            singular_values: Vec::new(),
            rank: 0,
            kernel: None,
            vlambda: None,
            v2lambda: None,
            dlambda: None,
            fold_opening: None,
            q_normal: None,
            q_eigenvalues: None,
            tangent: None,
            normal: None,
            curvature_normal: None,
            curvature_product: None,
            contact_order: None,
            cusp_orders: None,
            reduced: None,
            tolerances: tol,
        }
    }

    pub(crate) fn with_class(mut self, class: SingularityClass) -> Self {
        self.label = class.label();
        self.class = class;
        self
    }
}

/// Classifies the zero of `def` at `point` from its jet there.
pub fn classify_at(def: &FieldDef, point: &[f64], params: &Params, tol: &ToleranceSet) -> Result<ClassificationReport, ClassifyError> {
    let def = def.frozen(params)?;
    if point.len() != def.dim {
        return Err(ClassifyError::UnsupportedVars(point.len()));
    }
    let s = eval_field_jet(&def, point, params, DEFAULT_ORDER)?;
    match jet_from_series(&s)? {
        Jet::Two(j) => classify_jet_2d(&j.at([point[0], point[1]]), tol),
        Jet::Three(j) => classify_jet_3d(&j.at([point[0], point[1], point[2]]), tol),
    }
}
