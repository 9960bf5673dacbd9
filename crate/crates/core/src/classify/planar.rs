//! Decision procedure for plane-to-plane jets.

use num_complex::Complex;

use super::curve::{cross_series, gradient_at_base, real, solve_implicit, univariate_coeffs, Series};
use super::{jet_norm, ClassificationReport, ClassifyError, ContactOrder, Jet2, Sign, SingularityClass, ToleranceSet};
use crate::linalg::sym2_eig;
use crate::scalar::{dot2, Real};

fn f<T: Real>(v: T) -> f64 {
    v.to_f64_lossy()
}

fn c2<T: Real>(z: Complex<T>) -> [f64; 2] {
    [f(z.re), f(z.im)]
}

/// Discriminant curve `γ(s) = ψ(critical(s)) − ψ(0)` through a fold point.
pub(crate) struct FoldCurve<T: Real> {
    /// `g[j-1]` is the coefficient of `s^j`.
    pub g: Vec<Complex<T>>,
    pub tangent: Complex<T>,
    pub normal: Complex<T>,
    pub kappa_n: T,
    pub q_n: T,
}

impl<T: Real> FoldCurve<T> {
    /// Builds the curve from the critical-set parametrization `disp` and the
    /// fold opening `q`.
    pub(crate) fn new(psi: &Series<T>, disp: &[Series<T>], q: Complex<T>) -> Result<FoldCurve<T>, ClassifyError> {
        let gamma = psi.compose(disp)?;
        let g = univariate_coeffs(&gamma);
        if g.len() < 2 || g[0].norm() == T::zero() {
            return Err(ClassifyError::NotFold("discriminant curve has no tangent".into()));
        }
        let tangent = g[0] / g[0].norm();
        let normal = Complex::new(T::zero(), -T::one()) * tangent;
        let kappa_n = dot2(g[1] * T::lit(2.0), normal);
        let q_n = dot2(q, normal);
        Ok(FoldCurve { g, tangent, normal, kappa_n, q_n })
    }

    /// First order `m ≥ 2` whose normal coefficient exceeds `thr`, with the
    /// curve oriented so that `Q` points along the normal and the tangent is
    /// the normal turned counter-clockwise.
    pub(crate) fn contact(&self, thr: T, mmax: usize) -> Option<ContactOrder> {
        let nc = if self.q_n >= T::zero() { self.normal } else { -self.normal };
        let tc = Complex::new(T::zero(), T::one()) * nc;
        let flip = dot2(self.g[0], tc) < T::zero();
        for (idx, gj) in self.g.iter().enumerate().skip(1).take(mmax.saturating_sub(1)) {
            let order = idx + 1;
            let gj = if flip && order % 2 == 1 { -*gj } else { *gj };
            let nu = dot2(gj, nc);
            if nu.abs() > thr {
                return Some(ContactOrder { m: order as u32, sign: Sign::of(f(nu)) });
            }
        }
        None
    }

    fn threshold(&self, tol: &ToleranceSet, norm: T) -> T {
        let gmax = self.g.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        T::lit(tol.tau_fold) * norm.max(gmax)
    }
}

struct Rank1<T: Real> {
    lambda: Series<T>,
    dlambda: [T; 2],
    vlambda: T,
    q: Complex<T>,
}

fn rank1_data<T: Real>(s: &Series<T>, v: [T; 2]) -> Result<Rank1<T>, ClassifyError> {
    let lambda = cross_series(&s.derivative(0)?, &s.derivative(1)?)?;
    let g = gradient_at_base(&lambda);
    let dlambda = [g[0], g[1]];
    let vlambda = v[0] * g[0] + v[1] * g[1];
    let two = T::lit(2.0);
    let e = s.derivative_at_base(&[2, 0]);
    let fxy = s.derivative_at_base(&[1, 1]);
    let gyy = s.derivative_at_base(&[0, 2]);
    let q = e * (v[0] * v[0]) + fxy * (two * v[0] * v[1]) + gyy * (v[1] * v[1]);
    Ok(Rank1 { lambda, dlambda, vlambda, q })
}

/// Parametrizes `{λ = 0}` by solving along `∇λ` with the orthogonal
/// direction as parameter.
fn critical_curve<T: Real>(lambda: &Series<T>, dlambda: [T; 2], order: usize) -> Result<Vec<Series<T>>, ClassifyError> {
    let n = (dlambda[0] * dlambda[0] + dlambda[1] * dlambda[1]).sqrt();
    let w = vec![dlambda[0] / n, dlambda[1] / n];
    let p = vec![-w[1], w[0]];
    solve_implicit(std::slice::from_ref(lambda), &[w], &[p], order)
}

fn unit_kernel<T: Real>(s: &Series<T>) -> ([T; 2], [T; 2]) {
    let b = s.derivative_at_base(&[1, 0]);
    let c = s.derivative_at_base(&[0, 1]);
    let (vals, vecs) = sym2_eig(b.norm_sqr(), dot2(b, c), c.norm_sqr());
    let mut v = vecs[0];
    if v[0].abs() >= v[1].abs() {
        if v[0] < T::zero() {
            v = [-v[0], -v[1]];
        }
    } else if v[1] < T::zero() {
        v = [-v[0], -v[1]];
    }
    let smin = vals[0].max(T::zero()).sqrt();
    let smax = vals[1].max(T::zero()).sqrt();
    ([smax, smin], v)
}

/// Classifies the singularity of a planar jet at a dislocation zero.
pub fn classify_jet_2d<T: Real>(j: &Jet2<T>, tol: &ToleranceSet) -> Result<ClassificationReport, ClassifyError> {
    let s = &j.series;
    let norm = jet_norm(s);
    let modulus = j.a.norm();
    let zero_tol = tol.tau_zero * (1.0 + f(norm));
    if !(f(modulus) < zero_tol) {
        return Err(ClassifyError::NotOnDislocation { modulus: f(modulus), tol: zero_tol });
    }
    let mut rep = ClassificationReport::empty(2, j.basepoint.iter().map(|v| f(*v)).collect(), *tol);
    rep.modulus = f(modulus);
    rep.jet_norm = f(norm);

    let (sv, v) = unit_kernel(s);
    rep.singular_values = vec![f(sv[0]), f(sv[1])];
    if norm == T::zero() || sv[0] <= T::lit(tol.tau_rank) * norm {
        rep.rank = 0;
        return Ok(rep.with_class(SingularityClass::Degenerate("corank 2".into())));
    }
    if sv[1] / sv[0] > T::lit(tol.tau_rank) {
        rep.rank = 2;
        return Ok(rep.with_class(SingularityClass::Regular));
    }
    rep.rank = 1;
    let r1 = rank1_data(s, v)?;
    let n2 = norm * norm;
    rep.kernel = Some(vec![vec![f(v[0]), f(v[1])]]);
    rep.vlambda = Some(f(r1.vlambda));
    rep.dlambda = Some(vec![f(r1.dlambda[0]), f(r1.dlambda[1])]);
    rep.fold_opening = Some(c2(r1.q));

    if r1.vlambda.abs() > T::lit(tol.tau_fold) * n2 {
        let disp = critical_curve(&r1.lambda, r1.dlambda, s.order() - 1)?;
        let curve = FoldCurve::new(s, &disp, r1.q)?;
        let product = curve.kappa_n * curve.q_n;
        rep.tangent = Some(c2(curve.tangent));
        rep.normal = Some(c2(curve.normal));
        rep.curvature_normal = Some(f(curve.kappa_n));
        rep.q_normal = Some(f(curve.q_n));
        rep.curvature_product = Some(f(product));
        if product.abs() > T::lit(tol.tau_curv) * n2 {
            let class = if product > T::zero() { SingularityClass::Elliptic } else { SingularityClass::Hyperbolic };
            return Ok(rep.with_class(class));
        }
        let contact = curve.contact(curve.threshold(tol, norm), curve.g.len());
        rep.contact_order = contact;
        let class = match contact {
            Some(ContactOrder { m, sign }) if m >= 3 => SingularityClass::DegenerateFold { m, sign },
            Some(_) => SingularityClass::Degenerate("fold curvature near tolerance".into()),
            None => SingularityClass::Degenerate("flat discriminant contact".into()),
        };
        return Ok(rep.with_class(class));
    }

    let (v2, dl) = cusp_data(s, &r1)?;
    rep.v2lambda = Some(f(v2));
    let thr = T::lit(tol.tau_fold) * n2;
    if dl > thr && v2.abs() > thr {
        rep.cusp_orders = cusp_orders(s, &r1, tol);
        return Ok(rep.with_class(SingularityClass::Cusp));
    }
    Ok(rep.with_class(SingularityClass::Degenerate("beyond fold/cusp".into())))
}

/// Second derivative of `λ` along the kernel field of `Dψ` and `|dλ|`.
fn cusp_data<T: Real>(s: &Series<T>, r1: &Rank1<T>) -> Result<(T, T), ClassifyError> {
    let px = s.derivative(0)?;
    let py = s.derivative(1)?;
    let (re_x, re_y) = (px.real_part(), py.real_part());
    let (im_x, im_y) = (px.imag_part(), py.imag_part());
    let b = s.derivative_at_base(&[1, 0]);
    let c = s.derivative_at_base(&[0, 1]);
    let re_norm = (b.re * b.re + c.re * c.re).sqrt();
    let im_norm = (b.im * b.im + c.im * c.im).sqrt();
    let (rx, ry, rn) = if re_norm >= im_norm { (re_x, re_y, re_norm) } else { (im_x, im_y, im_norm) };
    let ord = r1.lambda.order().saturating_sub(1);
    let inv = real(T::one() / rn);
    let vx = ry.truncate(ord)?.scale(inv)?;
    let vy = rx.truncate(ord)?.scale(-inv)?;
    let mu = vx.mul(&r1.lambda.derivative(0)?)?.add(&vy.mul(&r1.lambda.derivative(1)?)?)?;
    let gm = gradient_at_base(&mu);
    let v0 = [vx.constant_term().re, vy.constant_term().re];
    let v2 = v0[0] * gm[0] + v0[1] * gm[1];
    let dl = (r1.dlambda[0] * r1.dlambda[0] + r1.dlambda[1] * r1.dlambda[1]).sqrt();
    Ok((v2, dl))
}

fn cusp_orders<T: Real>(s: &Series<T>, r1: &Rank1<T>, tol: &ToleranceSet) -> Option<[u32; 2]> {
    let disp = critical_curve(&r1.lambda, r1.dlambda, s.order() - 1).ok()?;
    let g = univariate_coeffs(&s.compose(&disp).ok()?);
    let gmax = g.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    let thr = T::lit(tol.tau_fold) * gmax;
    let n1 = g.iter().position(|v| v.norm() > thr)?;
    let d = g[n1] / g[n1].norm();
    let perp = Complex::new(T::zero(), T::one()) * d;
    let n2 = g.iter().enumerate().skip(n1 + 1).find(|(_, v)| dot2(**v, perp).abs() > thr)?.0;
    Some([n1 as u32 + 1, n2 as u32 + 1])
}

/// Contact order of the discriminant curve with its tangent at a fold point
/// with kernel `v`, searching orders `2..=mmax`.
pub fn contact_order<T: Real>(j: &Jet2<T>, v: [T; 2], mmax: usize) -> Result<ContactOrder, ClassifyError> {
    let s = &j.series;
    if mmax + 1 > s.order() {
        return Err(ClassifyError::InsufficientOrder { order: s.order(), needed: mmax + 1 });
    }
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n == T::zero() {
        return Err(ClassifyError::NotFold("zero kernel vector".into()));
    }
    let r1 = rank1_data(s, [v[0] / n, v[1] / n])?;
    let norm = jet_norm(s);
    if !(r1.vlambda.abs() > T::lit(ToleranceSet::default().tau_fold) * norm * norm) {
        return Err(ClassifyError::NotFold("v(λ) vanishes".into()));
    }
    let disp = critical_curve(&r1.lambda, r1.dlambda, s.order() - 1)?;
    let curve = FoldCurve::new(s, &disp, r1.q)?;
    curve
        .contact(curve.threshold(&ToleranceSet::default(), norm), mmax)
        .ok_or(ClassifyError::AllOrdersVanish(mmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{catalog_get, eval_field_jet, params, FieldDef, Params};

    fn jet(text: &str) -> Jet2<f64> {
        let def = FieldDef::parse("j", 2, false, text, &[], "").unwrap();
        Jet2::from_series(&eval_field_jet(&def, &[0.0, 0.0], &Params::new(), 6).unwrap()).unwrap()
    }

    fn class(text: &str) -> SingularityClass {
        classify_jet_2d(&jet(text), &ToleranceSet::default()).unwrap().class
    }

    #[test]
    fn hyperbolic_diagnostics() {
        let r = classify_jet_2d(&jet("x^2 - y^2 + i*y"), &ToleranceSet::default()).unwrap();
        assert_eq!(r.class, SingularityClass::Hyperbolic);
        assert_eq!(r.kernel, Some(vec![vec![1.0, 0.0]]));
        assert_eq!(r.vlambda, Some(2.0));
        assert!((r.curvature_normal.unwrap() + 2.0).abs() < 1e-12);
        assert!((r.q_normal.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.curvature_product.unwrap() + 4.0).abs() < 1e-12);
    }

    #[test]
    fn elliptic_product() {
        let r = classify_jet_2d(&jet("x^2 + y^2 + i*y"), &ToleranceSet::default()).unwrap();
        assert_eq!(r.class, SingularityClass::Elliptic);
        assert!((r.curvature_product.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cusp_diagnostics() {
        let r = classify_jet_2d(&jet("x^3 + x*y + i*y"), &ToleranceSet::default()).unwrap();
        assert_eq!(r.class, SingularityClass::Cusp);
        assert_eq!(r.vlambda, Some(0.0));
        assert!((r.v2lambda.unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(r.dlambda, Some(vec![0.0, 1.0]));
        assert_eq!(r.cusp_orders, Some([2, 3]));
    }

    #[test]
    fn regular_and_corank_two() {
        assert_eq!(class("x + i*y"), SingularityClass::Regular);
        assert_eq!(class("x^2 + i*y^2"), SingularityClass::Degenerate("corank 2".into()));
    }

    #[test]
    fn helmholtz_hyperbolic() {
        let def = catalog_get("H2.helmholtz-hyperbolic").unwrap();
        let s = eval_field_jet(&def, &[0.0, 0.0], &Params::new(), 6).unwrap();
        let r = classify_jet_2d(&Jet2::from_series(&s).unwrap(), &ToleranceSet::default()).unwrap();
        assert_eq!(r.class, SingularityClass::Hyperbolic);
    }

    #[test]
    fn degenerate_folds() {
        use SingularityClass::DegenerateFold;
        assert_eq!(class("x^2 - y^3 + i*y"), DegenerateFold { m: 3, sign: Sign::Minus });
        assert_eq!(class("x^2 + y^3 + i*y"), DegenerateFold { m: 3, sign: Sign::Plus });
        assert_eq!(class("x^2 + y^4 + i*y"), DegenerateFold { m: 4, sign: Sign::Plus });
        assert_eq!(class("x^2 - y^4 + i*y"), DegenerateFold { m: 4, sign: Sign::Minus });
        assert_eq!(class("x^2 - y^5 + i*y"), DegenerateFold { m: 5, sign: Sign::Minus });
        assert_eq!(class("x^2 + i*y"), SingularityClass::Degenerate("flat discriminant contact".into()));
    }

    #[test]
    fn contact_orders() {
        let v = [1.0, 0.0];
        assert_eq!(contact_order(&jet("x^2 - y^2 + i*y"), v, 5).unwrap(), ContactOrder { m: 2, sign: Sign::Minus });
        assert_eq!(contact_order(&jet("x^2 + y^4 + i*y"), v, 5).unwrap(), ContactOrder { m: 4, sign: Sign::Plus });
        assert_eq!(contact_order(&jet("x^2 + i*y"), v, 5).unwrap_err(), ClassifyError::AllOrdersVanish(5));
        assert!(matches!(contact_order(&jet("x^2 + i*y"), v, 6), Err(ClassifyError::InsufficientOrder { .. })));
    }

    #[test]
    fn off_zero_rejected() {
        let def = catalog_get("H2.regular").unwrap();
        let s = eval_field_jet(&def, &[0.5, 0.5], &Params::new(), 3).unwrap();
        assert!(matches!(
            classify_jet_2d(&Jet2::from_series(&s).unwrap(), &ToleranceSet::default()),
            Err(ClassifyError::NotOnDislocation { .. })
        ));
    }

    #[test]
    fn scale_robust() {
        for text in ["x^2 - y^2 + i*y", "x^2 + y^2 + i*y", "x^3 + x*y + i*y", "x^2 + y^4 + i*y", "x + i*y"] {
            let base = class(text);
            for c in [1e-3, 1e3] {
                assert_eq!(class(&format!("{c}*({text})")), base, "{text} scaled by {c}");
            }
        }
    }

    #[test]
    fn cusp_family_points() {
        let def = catalog_get("H2.cusp-family").unwrap();
        let p = params(&[("a", 0.25)]);
        for x in [0.5, -0.5] {
            let s = eval_field_jet(&def, &[x, -0.25], &p, 6).unwrap();
            let r = classify_jet_2d(&Jet2::from_series(&s).unwrap(), &ToleranceSet::default()).unwrap();
            assert_eq!(r.class, SingularityClass::Regular);
        }
    }

    #[test]
    fn f32_jets() {
        let def = FieldDef::parse("j", 2, false, "x^2 - y^2 + i*y", &[], "").unwrap();
        let s = eval_field_jet(&def, &[0.0f32, 0.0], &Params::new(), 5).unwrap();
        let r = classify_jet_2d(&Jet2::from_series(&s).unwrap(), &ToleranceSet::default()).unwrap();
        assert_eq!(r.class, SingularityClass::Hyperbolic);
    }
}
