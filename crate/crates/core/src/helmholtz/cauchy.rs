//! Local Helmholtz solutions from data on a horizontal line.

use num_complex::Complex;
use serde::Serialize;

use super::HelmholtzError;
use crate::scalar::Real;
use crate::taylor::TruncatedSeries;

pub const MAX_CAUCHY_ORDER: usize = 10;

/// `psi0[i] = ∂ₓⁱψ(x0)` and `psi1[i] = ∂ₓⁱ∂_yψ(x0)` along the line through
/// `x0`. Missing entries count as zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyData<T> {
    pub x0: [T; 2],
    pub psi0: Vec<Complex<T>>,
    pub psi1: Vec<Complex<T>>,
    pub k: T,
}

/// Taylor series about `x0` of the Helmholtz solution with the given data,
/// obtained from `∂_y² = −∂ₓ² − k²` applied to the two rows.
pub fn helmholtz_series_from_cauchy<T: Real>(data: &CauchyData<T>, order: usize) -> Result<TruncatedSeries<T>, HelmholtzError> {
    if order > MAX_CAUCHY_ORDER {
        return Err(HelmholtzError::BadParameter(format!("order {order} exceeds {MAX_CAUCHY_ORDER}")));
    }
    let n = order + 1;
    let zero = Complex::new(T::zero(), T::zero());
    // d[i][j] = ∂ₓⁱ ∂_yʲ ψ(x0)
    let mut d = vec![vec![zero; n]; n];
    for i in 0..n {
        d[i][0] = data.psi0.get(i).copied().unwrap_or(zero);
        if n > 1 && i + 1 < n {
            d[i][1] = data.psi1.get(i).copied().unwrap_or(zero);
        }
    }
    let k2 = data.k * data.k;
    for j in 2..n {
        for i in 0..n - j {
            d[i][j] = -d[i + 2][j - 2] - d[i][j - 2] * k2;
        }
    }
    let mut fact = vec![T::one(); n];
    for i in 1..n {
        fact[i] = fact[i - 1] * T::lit(i as f64);
    }
    let terms = (0..n).flat_map(|i| (0..n - i).map(move |j| (i, j))).map(|(i, j)| (vec![i as u8, j as u8], d[i][j] / (fact[i] * fact[j])));
    Ok(TruncatedSeries::from_terms(2, order, terms.collect::<Vec<_>>())?)
}
