//! Definiteness of the real pencil spanned by `Re Hess ψ` and `Im Hess ψ`.

use serde::Serialize;

use super::HelmholtzError;
use crate::classify::{jet_norm, Jet};
use crate::linalg::{jacobi_eigen, sym2_eig};

const ANGLES: usize = 3600;
const TOL: f64 = 1e-8;
const ON_ZERO_REL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilReport {
    pub definite: bool,
    /// `(λ, μ)` with `λ·Re H + μ·Im H` definite.
    pub witness: Option<[f64; 2]>,
    /// Best value of `min eig(λ·Re H + μ·Im H)` over unit `(λ, μ)`, relative
    /// to the size of the pencil.
    pub margin: f64,
}

fn hessians(jet: &Jet<f64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
    match jet {
        Jet::Two(j) => {
            let h = [[j.e, j.f], [j.f, j.g]];
            let re = h.iter().map(|r| r.iter().map(|v| v.re).collect()).collect();
            let im = h.iter().map(|r| r.iter().map(|v| v.im).collect()).collect();
            (re, im, j.a.norm())
        }
        Jet::Three(j) => {
            let mut re = vec![vec![0.0; 3]; 3];
            let mut im = vec![vec![0.0; 3]; 3];
            for p in 0..3 {
                for q in 0..3 {
                    let mut alpha = [0u8; 3];
                    alpha[p] += 1;
                    alpha[q] += 1;
                    let d = j.derivative(alpha);
                    re[p][q] = d.re;
                    im[p][q] = d.im;
                }
            }
            (re, im, j.derivative([0, 0, 0]).norm())
        }
    }
}

fn min_eig(a: &[Vec<f64>], b: &[Vec<f64>], th: f64) -> f64 {
    let (c, s) = (th.cos(), th.sin());
    let p = |i: usize, j: usize| c * a[i][j] + s * b[i][j];
    if a.len() == 2 {
        sym2_eig(p(0, 0), p(0, 1), p(1, 1)).0[0]
    } else {
        let m = [[p(0, 0), p(0, 1), p(0, 2)], [p(1, 0), p(1, 1), p(1, 2)], [p(2, 0), p(2, 1), p(2, 2)]];
        jacobi_eigen(m).0[0]
    }
}

/// Golden-section maximisation of `f` on `[lo, hi]`.
fn refine(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    0.5 * (lo + hi)
}

/// Decides whether some real combination `λ·Re Hess ψ + μ·Im Hess ψ` is
/// definite. Negative definiteness of one combination is positive
/// definiteness of its negative, so the sweep covers the full circle and only
/// tests the smallest eigenvalue.
///
/// For 2×2 pencils `det(cos θ·A + sin θ·B)` is a quadratic form in
/// `(cos θ, sin θ)`; its largest eigenvalue gives an exact answer which the
/// sweep can only confirm.
pub fn hessian_pencil_definite(jet: &Jet<f64>) -> Result<PencilReport, HelmholtzError> {
    let (a, b, modulus) = hessians(jet);
    let norm = match jet {
        Jet::Two(j) => jet_norm(&j.series),
        Jet::Three(j) => jet_norm(&j.series),
    };
    let tol = ON_ZERO_REL * (1.0 + norm);
    if modulus > tol {
        return Err(HelmholtzError::NotOnDislocation { modulus, tol });
    }
    let frob2: f64 = a.iter().chain(&b).flatten().map(|v| v * v).sum();
    let scale = frob2.sqrt();
    if scale == 0.0 {
        return Ok(PencilReport { definite: false, witness: None, margin: 0.0 });
    }
    let step = std::f64::consts::TAU / ANGLES as f64;
    let (best_i, _) = (0..ANGLES).map(|i| (i, min_eig(&a, &b, i as f64 * step))).fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let centre = best_i as f64 * step;
    let mut theta = refine(|t| min_eig(&a, &b, t), centre - step, centre + step);

    if a.len() == 2 {
        let h = a[0][0] * b[1][1] + a[1][1] * b[0][0] - 2.0 * a[0][1] * b[0][1];
        let det_a = a[0][0] * a[1][1] - a[0][1] * a[0][1];
        let det_b = b[0][0] * b[1][1] - b[0][1] * b[0][1];
        let (vals, vecs) = sym2_eig(det_a, 0.5 * h, det_b);
        let definite = vals[1] > TOL * frob2;
        if definite {
            theta = vecs[1][1].atan2(vecs[1][0]);
            if min_eig(&a, &b, theta) < 0.0 {
                theta += std::f64::consts::PI;
            }
        }
        let margin = min_eig(&a, &b, theta) / scale;
        return Ok(PencilReport { definite, witness: definite.then(|| [theta.cos(), theta.sin()]), margin });
    }
    let margin = min_eig(&a, &b, theta) / scale;
    let definite = margin > TOL;
    Ok(PencilReport { definite, witness: definite.then(|| [theta.cos(), theta.sin()]), margin })
}
