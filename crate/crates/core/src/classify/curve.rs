//! Series solutions of implicit equations through the basepoint.

use num_complex::Complex;
use num_traits::Zero;

use super::ClassifyError;
use crate::linalg;
use crate::scalar::Real;
use crate::taylor::TruncatedSeries;

pub(crate) type Series<T> = TruncatedSeries<T>;

pub(crate) fn real<T: Real>(v: T) -> Complex<T> {
    Complex::new(v, T::zero())
}

/// `Σ v_a ∂_a s`.
pub(crate) fn directional<T: Real>(s: &Series<T>, v: &[T]) -> Result<Series<T>, ClassifyError> {
    let mut acc = Series::zeros(s.nvars(), s.order().saturating_sub(1))?;
    for (a, &va) in v.iter().enumerate() {
        if va != T::zero() {
            acc = acc.add(&s.derivative(a)?.scale(real(va))?)?;
        }
    }
    Ok(acc)
}

/// Oriented area `Re(p)·Im(q) − Im(p)·Re(q)` as a real-valued series.
pub(crate) fn cross_series<T: Real>(p: &Series<T>, q: &Series<T>) -> Result<Series<T>, ClassifyError> {
    Ok(p.map(|c| c.conj()).mul(q)?.imag_part())
}

/// Gradient of a real-valued series at the basepoint.
pub(crate) fn gradient_at_base<T: Real>(s: &Series<T>) -> Vec<T> {
    (0..s.nvars())
        .map(|a| {
            let mut e = vec![0u8; s.nvars()];
            e[a] = 1;
            if s.order() >= 1 {
                s.coeff(&e).re
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Solves `E_i(P·s + W·φ(s)) = E_i(0)` for the series `φ`, where the columns of
/// `W` (`unknown`) are the solved directions and the columns of `P`
/// (`params`) the free ones. Returns the displacement series, one per
/// ambient coordinate, in the parameters `s`.
pub(crate) fn solve_implicit<T: Real>(
    eqs: &[Series<T>],
    unknown: &[Vec<T>],
    params: &[Vec<T>],
    order: usize,
) -> Result<Vec<Series<T>>, ClassifyError> {
    let m = eqs.len();
    assert!(m == unknown.len() && (1..=2).contains(&m), "one or two equations");
    let n = eqs[0].nvars();
    let p = params.len();
    let mut j0 = [[T::zero(); 2]; 2];
    for (i, e) in eqs.iter().enumerate() {
        let g = gradient_at_base(e);
        for (j, w) in unknown.iter().enumerate() {
            j0[i][j] = w.iter().zip(&g).fold(T::zero(), |acc, (x, y)| acc + *x * *y);
        }
    }
    let inv = if m == 1 {
        if j0[0][0] == T::zero() {
            return Err(ClassifyError::NotFold("implicit equation has zero derivative".into()));
        }
        [[T::one() / j0[0][0], T::zero()], [T::zero(); 2]]
    } else {
        let c0 = linalg::solve([[j0[0][0], j0[0][1]], [j0[1][0], j0[1][1]]], [T::one(), T::zero()]);
        let c1 = linalg::solve([[j0[0][0], j0[0][1]], [j0[1][0], j0[1][1]]], [T::zero(), T::one()]);
        match (c0, c1) {
            (Some(c0), Some(c1)) => [[c0[0], c1[0]], [c0[1], c1[1]]],
            _ => return Err(ClassifyError::NotFold("singular implicit system".into())),
        }
    };
    let seeds: Vec<Series<T>> = (0..p)
        .map(|k| Series::seed_variable(k, T::zero(), p, order))
        .collect::<Result<_, _>>()?;
    let mut base = Vec::with_capacity(n);
    for a in 0..n {
        let mut acc = Series::zeros(p, order)?;
        for (k, dir) in params.iter().enumerate() {
            if dir[a] != T::zero() {
                acc = acc.add(&seeds[k].scale(real(dir[a]))?)?;
            }
        }
        base.push(acc);
    }
    let mut phi: Vec<Series<T>> = vec![Series::zeros(p, order)?; m];
    let displacement = |phi: &[Series<T>]| -> Result<Vec<Series<T>>, ClassifyError> {
        let mut out = base.clone();
        for (a, o) in out.iter_mut().enumerate() {
            for (j, w) in unknown.iter().enumerate() {
                if w[a] != T::zero() {
                    *o = o.add(&phi[j].scale(real(w[a]))?)?;
                }
            }
        }
        Ok(out)
    };
    for _ in 0..=order {
        let disp = displacement(&phi)?;
        let mut vals = Vec::with_capacity(m);
        for e in eqs {
            let mut v = e.compose(&disp)?;
            if v.order() < order {
                return Err(ClassifyError::InsufficientOrder { order: v.order(), needed: order });
            }
            v.set_coeff(&vec![0u8; p], Complex::zero())?;
            vals.push(v);
        }
        for j in 0..m {
            let mut upd = Series::zeros(p, order)?;
            for (i, v) in vals.iter().enumerate() {
                if inv[j][i] != T::zero() {
                    upd = upd.add(&v.scale(real(inv[j][i]))?)?;
                }
            }
            phi[j] = phi[j].sub(&upd)?;
        }
    }
    displacement(&phi)
}

/// Coefficients `g_1..g_order` of a one-variable series (constant dropped).
pub(crate) fn univariate_coeffs<T: Real>(s: &Series<T>) -> Vec<Complex<T>> {
    (1..=s.order()).map(|j| s.coeff(&[j as u8])).collect()
}
