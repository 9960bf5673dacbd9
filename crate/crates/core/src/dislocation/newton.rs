//! Newton refinement of zeros, with an augmented system for degenerate ones.

use num_complex::Complex;

use super::{DislocationError, DislocationPoint, MAX_NEWTON_ITERS, TAU_RANK, TAU_ZERO_REL};
use crate::classify::curve::{cross_series, gradient_at_base};
use crate::classify::jet_norm;
use crate::fieldlang::{FieldDef, Params, Program};
use crate::linalg::{solve, sym2_eig};
use crate::taylor::DEFAULT_ORDER;

/// Below this `σ_min/σ_max` a converged zero is re-solved with the augmented system.
const POLISH_RATIO: f64 = 1e-3;

pub(crate) struct FirstOrder {
    pub value: Complex<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

pub(crate) fn first_order(prog: &Program, x: &[f64]) -> Result<FirstOrder, DislocationError> {
    let s = prog.jet(x, 1)?;
    let n = x.len();
    let grad: Vec<Complex<f64>> = (0..n)
        .map(|a| {
            let mut e = vec![0u8; n];
            e[a] = 1;
            s.derivative_at_base(&e)
        })
        .collect();
    Ok(FirstOrder {
        value: s.constant_term(),
        re: grad.iter().map(|g| g.re).collect(),
        im: grad.iter().map(|g| g.im).collect(),
    })
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `σ_min/σ_max` of the real differential and the Gram matrix `J Jᵀ`.
fn sigma_ratio(fo: &FirstOrder) -> (f64, [[f64; 2]; 2]) {
    let g = [[dotv(&fo.re, &fo.re), dotv(&fo.re, &fo.im)], [dotv(&fo.re, &fo.im), dotv(&fo.im, &fo.im)]];
    let (vals, _) = sym2_eig(g[0][0], g[0][1], g[1][1]);
    let ratio = if vals[1] > 0.0 { (vals[0].max(0.0) / vals[1]).sqrt() } else { 0.0 };
    (ratio, g)
}

pub(crate) struct Refined {
    pub location: Vec<f64>,
    pub residual: f64,
    pub iters: usize,
    pub degenerate: bool,
}

/// Plain Newton on `(Re ψ, Im ψ)`; in 3D the minimum-norm step, which moves
/// orthogonally to the local zero curve.
pub(crate) fn newton(prog: &Program, guess: &[f64], tau_zero: f64) -> Result<Refined, DislocationError> {
    let mut x = guess.to_vec();
    for iters in 0..=MAX_NEWTON_ITERS {
        let fo = first_order(prog, &x)?;
        let (ratio, g) = sigma_ratio(&fo);
        if ratio <= TAU_RANK {
            return Err(DislocationError::SingularJacobian { location: x, ratio });
        }
        let residual = fo.value.norm();
        if residual < tau_zero {
            let (location, residual, extra) = settle(prog, x, fo, g)?;
            return Ok(Refined { location, residual, iters: iters + extra, degenerate: ratio < POLISH_RATIO });
        }
        if iters == MAX_NEWTON_ITERS {
            return Err(DislocationError::NoConvergence { iters, residual });
        }
        x = newton_step(&x, &fo, g).ok_or(DislocationError::SingularJacobian { location: x.clone(), ratio })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DislocationError::NoConvergence { iters: iters + 1, residual: f64::INFINITY });
        }
    }
    unreachable!()
}

fn newton_step(x: &[f64], fo: &FirstOrder, g: [[f64; 2]; 2]) -> Option<Vec<f64>> {
    let y = solve(g, [fo.value.re, fo.value.im])?;
    Some((0..x.len()).map(|a| x[a] - fo.re[a] * y[0] - fo.im[a] * y[1]).collect())
}

/// A few more steps after the threshold is met, kept while `|ψ|` decreases,
/// so that reported zeros sit at rounding level rather than just below it.
fn settle(prog: &Program, mut x: Vec<f64>, mut fo: FirstOrder, mut g: [[f64; 2]; 2]) -> Result<(Vec<f64>, f64, usize), DislocationError> {
    let mut residual = fo.value.norm();
    let mut extra = 0;
    while extra < 3 && residual > 0.0 {
        let Some(next) = newton_step(&x, &fo, g) else { break };
        let nfo = first_order(prog, &next)?;
        if !(nfo.value.norm() < residual) {
            break;
        }
        x = next;
        residual = nfo.value.norm();
        g = sigma_ratio(&nfo).1;
        fo = nfo;
        extra += 1;
    }
    Ok((x, residual, extra))
}

fn solve_normal(rows: &[(f64, Vec<f64>)], n: usize) -> Option<Vec<f64>> {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (f, g) in rows {
        for i in 0..n {
            b[i] += g[i] * f;
            for j in 0..n {
                a[i][j] += g[i] * g[j];
            }
        }
    }
    let damp = 1e-14 * (0..n).map(|i| a[i][i]).sum::<f64>();
    for (i, row) in a.iter_mut().enumerate().take(n) {
        row[i] += damp;
    }
    let d = match n {
        2 => solve([[a[0][0], a[0][1]], [a[1][0], a[1][1]]], [b[0], b[1]])?.to_vec(),
        _ => solve(a, b)?.to_vec(),
    };
    Some(d.into_iter().map(|v| -v).collect())
}

/// Gauss–Newton on `(Re ψ, Im ψ, λ)` and, if that fails, `(Re ψ, Im ψ, λ, μ)`
/// where `λ` is the Jacobian determinant and `μ` its derivative along the
/// kernel field. These systems are regular at fold and cusp zeros, where plain
/// Newton only converges linearly.
pub(crate) fn polish_degenerate(prog: &Program, start: &[f64], tau_zero: f64) -> Option<Refined> {
    if start.len() != 2 {
        return None;
    }
    for use_mu in [false, true] {
        let mut x = start.to_vec();
        for _ in 0..MAX_NEWTON_ITERS {
            let rows = augmented(prog, &x, use_mu).ok()?;
            let Some(step) = solve_normal(&rows, 2) else { break };
            x[0] += step[0];
            x[1] += step[1];
            if !(x[0].is_finite() && x[1].is_finite()) {
                break;
            }
            if step[0].hypot(step[1]) < 1e-15 * (1.0 + x[0].abs() + x[1].abs()) {
                break;
            }
        }
        let Ok(rows) = augmented(prog, &x, use_mu) else { continue };
        let residual = rows[0].0.hypot(rows[1].0);
        if residual < tau_zero && rows.iter().skip(2).all(|(f, _)| f.abs() < 1e-8) && well_posed(&rows) {
            return Some(Refined { location: x, residual, iters: 0, degenerate: true });
        }
    }
    None
}

/// The augmented system pins the zero down only if its Jacobian has full rank.
fn well_posed(rows: &[(f64, Vec<f64>)]) -> bool {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (_, g) in rows {
        a += g[0] * g[0];
        b += g[0] * g[1];
        c += g[1] * g[1];
    }
    let (vals, _) = sym2_eig(a, b, c);
    vals[1] > 0.0 && vals[0].max(0.0) / vals[1] > 1e-12
}

fn augmented(prog: &Program, x: &[f64], use_mu: bool) -> Result<Vec<(f64, Vec<f64>)>, DislocationError> {
    let s = prog.jet(x, 3)?;
    let n = jet_norm(&s).max(f64::MIN_POSITIVE);
    let v = s.constant_term();
    let re = s.real_part();
    let im = s.imag_part();
    let mut rows = vec![(v.re, gradient_at_base(&re)), (v.im, gradient_at_base(&im))];
    let lam = cross_series(&s.derivative(0)?, &s.derivative(1)?)?;
    let scale = |g: Vec<f64>, k: f64| g.into_iter().map(|v| v / k).collect::<Vec<_>>();
    rows.push((lam.constant_term().re / (n * n), scale(gradient_at_base(&lam), n * n)));
    if use_mu {
        let big = if dotv(&rows[0].1, &rows[0].1) >= dotv(&rows[1].1, &rows[1].1) { &re } else { &im };
        let (bx, by) = (big.derivative(0)?, big.derivative(1)?);
        let (lx, ly) = (lam.derivative(0)?, lam.derivative(1)?);
        let mu = by.truncate(1)?.mul(&lx)?.sub(&bx.truncate(1)?.mul(&ly)?)?;
        let k = n * n * n;
        rows.push((mu.constant_term().re / k, scale(gradient_at_base(&mu), k)));
    }
    Ok(rows)
}

/// Damped least squares on `|ψ|²`, the last resort for degenerate zeros in
/// any dimension.
pub(crate) fn minimize_modulus(prog: &Program, start: &[f64], tau_zero: f64) -> Result<Option<Refined>, DislocationError> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut mu = 1e-3;
    let mut fo = first_order(prog, &x)?;
    for _ in 0..4 * MAX_NEWTON_ITERS {
        if fo.value.norm() < tau_zero {
            return Ok(Some(Refined { location: x, residual: fo.value.norm(), iters: 0, degenerate: true }));
        }
        let rows = [(fo.value.re, fo.re.clone()), (fo.value.im, fo.im.clone())];
        let scale = dotv(&fo.re, &fo.re) + dotv(&fo.im, &fo.im);
        let mut damped: Vec<(f64, Vec<f64>)> = rows.to_vec();
        for i in 0..n {
            let mut g = vec![0.0; n];
            g[i] = (mu * scale.max(1e-300)).sqrt();
            damped.push((0.0, g));
        }
        let Some(step) = solve_normal(&damped, n) else { return Ok(None) };
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        let tfo = first_order(prog, &trial)?;
        if tfo.value.norm() < fo.value.norm() {
            x = trial;
            fo = tfo;
            mu = (mu * 0.3).max(1e-12);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                break;
            }
        }
    }
    Ok(None)
}

/// Full pipeline used by the scanners: Newton, then the augmented system for
/// near-singular or singular differentials, then plain minimization.
pub(crate) fn locate(prog: &Program, seed: &[f64], tau_zero: f64) -> Result<Refined, DislocationError> {
    match newton(prog, seed, tau_zero) {
        Ok(r) if r.degenerate => Ok(polish_degenerate(prog, &r.location, tau_zero).map(|p| Refined { iters: r.iters, ..p }).unwrap_or(r)),
        Ok(r) => Ok(r),
        Err(DislocationError::SingularJacobian { location, ratio }) => {
            if let Some(p) = polish_degenerate(prog, &location, tau_zero) {
                return Ok(p);
            }
            if let Some(p) = minimize_modulus(prog, &location, tau_zero)? {
                return Ok(p);
            }
            Err(DislocationError::SingularJacobian { location, ratio })
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn to_point(prog: &Program, r: Refined) -> Result<DislocationPoint, DislocationError> {
    let jet = prog.jet(&r.location, DEFAULT_ORDER)?;
    Ok(DislocationPoint { residual: jet.constant_term().norm(), location: r.location, newton_iters: r.iters, degenerate: r.degenerate, jet })
}

/// Newton refinement of a single guess to a zero with `|ψ| < 1e-10·(1 + |ψ(guess)|)`.
///
/// A rank-deficient differential at any iterate is reported as
/// `SingularJacobian`; such points are best classified from their jet.
pub fn refine_zero(def: &FieldDef, guess: &[f64], params: &Params) -> Result<DislocationPoint, DislocationError> {
    let def = def.frozen(params)?;
    if guess.len() != def.dim {
        return Err(DislocationError::DimMismatch { field: def.dim, region: guess.len() });
    }
    let prog = def.compile(params)?;
    let tau_zero = TAU_ZERO_REL * (1.0 + prog.eval(guess)?.norm());
    let r = newton(&prog, guess, tau_zero)?;
    let r = if r.degenerate { polish_degenerate(&prog, &r.location, tau_zero).map(|p| Refined { iters: r.iters, ..p }).unwrap_or(r) } else { r };
    to_point(&prog, r)
}
