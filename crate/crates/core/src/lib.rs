pub mod scalar;
pub mod taylor;
pub mod fieldlang;
pub mod classify;
pub mod dislocation;
pub mod helmholtz;
pub mod strata;
pub mod phasefield;
pub(crate) mod linalg;

pub use scalar::Real;

pub type Series64 = taylor::TruncatedSeries<f64>;
pub type Series32 = taylor::TruncatedSeries<f32>;
pub type Jet2d = classify::Jet2<f64>;
pub type Jet3d = classify::Jet3<f64>;
pub type HelmholtzJet = strata::HelmholtzJet3<f64>;
pub type Cauchy = helmholtz::CauchyData<f64>;
