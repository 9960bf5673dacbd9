//! Decision procedure for jets of maps from space to the plane.

use num_complex::Complex;

use super::curve::{cross_series, directional, solve_implicit, Series};
use super::planar::FoldCurve;
use super::{classify_jet_2d, jet_norm, ClassificationReport, ClassifyError, Jet2, Jet3, SingularityClass, ToleranceSet};
use crate::linalg::{complete_basis, sym2_eig};
use crate::scalar::{dot2, Real};

fn f<T: Real>(v: T) -> f64 {
    v.to_f64_lossy()
}

fn c2<T: Real>(z: Complex<T>) -> [f64; 2] {
    [f(z.re), f(z.im)]
}

fn vec3<T: Real>(v: &[T; 3]) -> Vec<f64> {
    v.iter().map(|x| f(*x)).collect()
}

fn unit(a: usize) -> [u8; 3] {
    let mut e = [0u8; 3];
    e[a] = 1;
    e
}

fn combo<T: Real>(a: T, u: &[T; 3], b: T, v: &[T; 3]) -> [T; 3] {
    [a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]]
}

/// Classifies the singularity of a spatial jet at a dislocation zero.
pub fn classify_jet_3d<T: Real>(j: &Jet3<T>, tol: &ToleranceSet) -> Result<ClassificationReport, ClassifyError> {
    let s = &j.series;
    let norm = jet_norm(s);
    let modulus = s.constant_term().norm();
    let zero_tol = tol.tau_zero * (1.0 + f(norm));
    if !(f(modulus) < zero_tol) {
        return Err(ClassifyError::NotOnDislocation { modulus: f(modulus), tol: zero_tol });
    }
    let mut rep = ClassificationReport::empty(3, j.basepoint.iter().map(|v| f(*v)).collect(), *tol);
    rep.modulus = f(modulus);
    rep.jet_norm = f(norm);

    let grad: Vec<Complex<T>> = (0..3).map(|a| s.derivative_at_base(&unit(a))).collect();
    let u = [grad[0].re, grad[1].re, grad[2].re];
    let w = [grad[0].im, grad[1].im, grad[2].im];
    let d = |p: &[T; 3], q: &[T; 3]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let (vals, vecs) = sym2_eig(d(&u, &u), d(&u, &w), d(&w, &w));
    let smax = vals[1].max(T::zero()).sqrt();
    let smin = vals[0].max(T::zero()).sqrt();
    rep.singular_values = vec![f(smax), f(smin)];
    if norm == T::zero() || smax <= T::lit(tol.tau_rank) * norm {
        rep.rank = 0;
        return Ok(rep.with_class(SingularityClass::Degenerate("corank 2".into())));
    }
    if smin / smax > T::lit(tol.tau_rank) {
        rep.rank = 2;
        return Ok(rep.with_class(SingularityClass::Regular));
    }
    rep.rank = 1;
    let iota = Complex::new(vecs[1][0], vecs[1][1]);
    let r = combo(iota.re / smax, &u, iota.im / smax, &w);
    let (k1, k2) = complete_basis(&r);
    rep.kernel = Some(vec![vec3(&k1), vec3(&k2)]);

    let hess = |p: &[T; 3], q: &[T; 3]| -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for a in 0..3 {
            for b in 0..3 {
                let mut e = [0u8; 3];
                e[a] += 1;
                e[b] += 1;
                acc = acc + s.derivative_at_base(&e) * (p[a] * q[b]);
            }
        }
        acc
    };
    let nu = Complex::new(T::zero(), T::one()) * iota;
    let q11 = dot2(hess(&k1, &k1), nu);
    let q12 = dot2(hess(&k1, &k2), nu);
    let q22 = dot2(hess(&k2, &k2), nu);
    let (mu, ev) = sym2_eig(q11, q12, q22);
    rep.q_eigenvalues = Some(vec![f(mu[0]), f(mu[1])]);
    let thr = T::lit(tol.tau_fold) * norm;
    // index of the eigenvalue of smaller modulus
    let (small, big) = if mu[0].abs() <= mu[1].abs() { (0, 1) } else { (1, 0) };
    let e_small = combo(ev[small][0], &k1, ev[small][1], &k2);
    let e_big = combo(ev[big][0], &k1, ev[big][1], &k2);

    if mu[small].abs() > thr {
        if mu[0].signum() != mu[1].signum() {
            return Ok(rep.with_class(SingularityClass::Indefinite));
        }
        let ord = s.order() - 1;
        let psi_r = directional(s, &r)?;
        let m1 = cross_series(&psi_r, &directional(s, &k1)?)?;
        let m2 = cross_series(&psi_r, &directional(s, &k2)?)?;
        let disp = solve_implicit(&[m1, m2], &[k1.to_vec(), k2.to_vec()], &[r.to_vec()], ord)?;
        let q = hess(&e_small, &e_small);
        let curve = FoldCurve::new(s, &disp, q)?;
        let product = curve.kappa_n * curve.q_n;
        rep.fold_opening = Some(c2(q));
        rep.tangent = Some(c2(curve.tangent));
        rep.normal = Some(c2(curve.normal));
        rep.curvature_normal = Some(f(curve.kappa_n));
        rep.q_normal = Some(f(curve.q_n));
        rep.curvature_product = Some(f(product));
        let class = if product.abs() <= T::lit(tol.tau_curv) * norm * norm {
            SingularityClass::Degenerate("flat contact".into())
        } else if product > T::zero() {
            SingularityClass::DefiniteElliptic
        } else {
            SingularityClass::DefiniteHyperbolic
        };
        return Ok(rep.with_class(class));
    }
    if mu[big].abs() <= thr {
        return Ok(rep.with_class(SingularityClass::Degenerate("beyond fold/cusp".into())));
    }

    // One null direction: restrict to the surface where the non-null minor
    // vanishes, which contains the whole critical set, and test for a cusp.
    if s.order() < 4 {
        return Err(ClassifyError::InsufficientOrder { order: s.order(), needed: 4 });
    }
    let psi_r = directional(s, &r)?;
    let m_big = cross_series(&psi_r, &directional(s, &e_big)?)?;
    let disp = solve_implicit(&[m_big], &[e_big.to_vec()], &[e_small.to_vec(), r.to_vec()], s.order() - 1)?;
    let reduced: Series<T> = s.compose(&disp)?;
    let sub = classify_jet_2d(&Jet2::from_series(&reduced)?, tol)?;
    rep.fold_opening = Some(c2(hess(&e_small, &e_small)));
    rep.kernel = Some(vec![vec3(&e_small), vec3(&e_big)]);
    let class = match sub.class {
        SingularityClass::Cusp => SingularityClass::SpatialCusp,
        ref other => SingularityClass::Degenerate(format!("reduced {}", other.label())),
    };
    rep.vlambda = sub.vlambda;
    rep.v2lambda = sub.v2lambda;
    rep.cusp_orders = sub.cusp_orders;
    rep.reduced = Some(Box::new(sub));
    Ok(rep.with_class(class))
}
