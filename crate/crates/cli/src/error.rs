use thiserror::Error;
use vortex_atlas::classify::ClassifyError;
use vortex_atlas::dislocation::DislocationError;
use vortex_atlas::fieldlang::{EvalError, FieldError};
use vortex_atlas::helmholtz::HelmholtzError;
use vortex_atlas::phasefield::PhaseError;
use vortex_atlas::strata::StrataError;
use vortex_atlas::taylor::SeriesError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Precondition(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

type Ctor = fn(String) -> CliError;

fn series_kind(_: &SeriesError) -> Ctor {
    CliError::Numeric
}

fn eval_kind(e: &EvalError) -> Ctor {
    match e {
        EvalError::UnknownParameter(_) | EvalError::UnboundParameter(_) | EvalError::UnboundVariable(_) | EvalError::Arity { .. } => CliError::Usage,
        EvalError::OrderTooHigh(_) => CliError::Usage,
        EvalError::Series(s) => series_kind(s),
        EvalError::DivisionByZero | EvalError::NonFinite => CliError::Numeric,
    }
}

fn field_kind(e: &FieldError) -> Ctor {
    match e {
        FieldError::Eval(e) => eval_kind(e),
        FieldError::DimMismatch(..) => CliError::Precondition,
        _ => CliError::Usage,
    }
}

fn classify_kind(e: &ClassifyError) -> Ctor {
    match e {
        ClassifyError::NotOnDislocation { .. }
        | ClassifyError::OnDislocation { .. }
        | ClassifyError::NotCritical { .. }
        | ClassifyError::NotFold(_)
        | ClassifyError::UnsupportedVars(_) => CliError::Precondition,
        ClassifyError::InsufficientOrder { .. } | ClassifyError::AllOrdersVanish(_) => CliError::Numeric,
        ClassifyError::Field(e) => field_kind(e),
        ClassifyError::Eval(e) => eval_kind(e),
        ClassifyError::Series(e) => series_kind(e),
    }
}

fn dislocation_kind(e: &DislocationError) -> Ctor {
    match e {
        DislocationError::BadRegion(_) | DislocationError::UnknownParameter(_) => CliError::Usage,
        DislocationError::DimMismatch { .. } => CliError::Precondition,
        DislocationError::SingularJacobian { .. } | DislocationError::NoConvergence { .. } => CliError::Numeric,
        DislocationError::Field(e) => field_kind(e),
        DislocationError::Eval(e) => eval_kind(e),
        DislocationError::Series(e) => series_kind(e),
        DislocationError::Classify(e) => classify_kind(e),
    }
}

fn helmholtz_kind(e: &HelmholtzError) -> Ctor {
    match e {
        HelmholtzError::NotTimeDependent(_) | HelmholtzError::DimMismatch(..) | HelmholtzError::NotOnDislocation { .. } => CliError::Precondition,
        HelmholtzError::BadParameter(_) | HelmholtzError::Table(_) => CliError::Usage,
        HelmholtzError::Field(e) => field_kind(e),
        HelmholtzError::Eval(e) => eval_kind(e),
        HelmholtzError::Series(e) => series_kind(e),
        HelmholtzError::Region(e) => dislocation_kind(e),
        HelmholtzError::Classify(e) => classify_kind(e),
    }
}

fn strata_kind(e: &StrataError) -> Ctor {
    match e {
        StrataError::NotHelmholtzJet { .. } | StrataError::Dimension(_) => CliError::Precondition,
        StrataError::BadConfig(_) => CliError::Usage,
        StrataError::Csv(_) => CliError::Numeric,
        StrataError::Classify(e) => classify_kind(e),
        StrataError::Eval(e) => eval_kind(e),
        StrataError::Dislocation(e) => dislocation_kind(e),
        StrataError::Helmholtz(e) => helmholtz_kind(e),
    }
}

fn phase_kind(e: &PhaseError) -> Ctor {
    match e {
        PhaseError::NoLevels | PhaseError::TooManyPanels(_) => CliError::Usage,
        PhaseError::DimMismatch { .. } | PhaseError::Io { .. } => CliError::Precondition,
        PhaseError::Format(_) => CliError::Numeric,
        PhaseError::Field(e) => field_kind(e),
        PhaseError::Eval(e) => eval_kind(e),
        PhaseError::Dislocation(e) => dislocation_kind(e),
    }
}

macro_rules! from_lib {
    ($($t:ty => $kind:ident),* $(,)?) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                $kind(&e)(e.to_string())
            }
        }
    )*};
}

from_lib! {
    EvalError => eval_kind,
    FieldError => field_kind,
    ClassifyError => classify_kind,
    DislocationError => dislocation_kind,
    HelmholtzError => helmholtz_kind,
    StrataError => strata_kind,
    PhaseError => phase_kind,
}
