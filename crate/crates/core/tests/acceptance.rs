//! One test per acceptance criterion; each writes a PASS/FAIL line with its
//! measured figures straight to stderr so the line survives output capture.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_atlas::classify::{classify_at, classify_jet_2d, Jet2, Sign, SingularityClass, ToleranceSet};
use vortex_atlas::dislocation::{scan_zeros_2d, sweep_parameter, trace_dislocation_3d, Region};
use vortex_atlas::fieldlang::{catalog, catalog_get, compose_radial, eval_field, eval_field_jet, params, FieldDef, Params, RadialTransform};
use vortex_atlas::helmholtz::{helmholtz_residual, helmholtz_series_from_cauchy, random_helmholtz_field, wave_residual, CauchyData};
use vortex_atlas::phasefield::trace_equiphase;
use vortex_atlas::strata::{monte_carlo_genericity, stratum_vs_classifier_crosscheck, Consistency, MonteCarloConfig};

const SEED: u64 = 20240607;

fn report(n: u32, what: &str, outcome: Result<String, String>) {
    let line = match &outcome {
        Ok(d) => format!("criterion {n} PASS  {what}: {d}"),
        Err(d) => format!("criterion {n} FAIL  {what}: {d}"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(d) = outcome {
        panic!("criterion {n} ({what}) failed: {d}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn class_at(def: &FieldDef, p: &[f64], over: &Params) -> Result<SingularityClass, String> {
    classify_at(def, p, over, &ToleranceSet::default()).map(|r| r.class).map_err(|e| format!("{}: {e}", def.name))
}

#[test]
fn criterion_1_label_soundness() {
    let run = || -> Result<String, String> {
        use SingularityClass::*;
        let fold = |m, s: f64| DegenerateFold { m, sign: Sign::of(s) };
        let mut cases: Vec<(&str, Params, SingularityClass)> = vec![
            ("H2.regular", Params::new(), Regular),
            ("H2.hyperbolic", Params::new(), Hyperbolic),
            ("H2.elliptic", Params::new(), Elliptic),
            ("H2.cusp-normal", Params::new(), Cusp),
            ("H3.regular", Params::new(), Regular),
            ("H3.DH", Params::new(), DefiniteHyperbolic),
            ("H3.DE", Params::new(), DefiniteElliptic),
            ("H3.I", Params::new(), Indefinite),
            ("H3.cusp", Params::new(), SpatialCusp),
        ];
        for (m, name) in [(3, "H2.fold3"), (4, "H2.fold4"), (5, "H2.fold5")] {
            for s in [1.0, -1.0] {
                cases.push((name, params(&[("s", s)]), fold(m, s)));
            }
        }
        for (name, over, want) in &cases {
            let def = catalog_get(name).map_err(|e| e.to_string())?;
            let got = class_at(&def, &vec![0.0; def.dim], over)?;
            check(got.label() == want.label(), || format!("{name} {over:?}: got {got}, want {want}"))?;
        }
        Ok(format!("{} normal forms labelled exactly", cases.len()))
    };
    report(1, "catalog label soundness", run());
}

#[test]
fn criterion_2_helmholtz_realizations() {
    let run = || -> Result<String, String> {
        let mut worst_h = 0.0f64;
        let mut worst_w = 0.0f64;
        let mut nh = 0;
        let mut nw = 0;
        for def in catalog().into_iter().filter(|d| d.helmholtz_k.is_some()) {
            let region = Region::cube(def.dim, -1.0, 1.0, 101).map_err(|e| e.to_string())?;
            let r = helmholtz_residual(&def, &region, def.helmholtz_k.unwrap(), &Params::new()).map_err(|e| e.to_string())?;
            check(r.sup_abs < 1e-10, || format!("{}: Helmholtz residual {:e}", def.name, r.sup_abs))?;
            worst_h = worst_h.max(r.sup_abs);
            nh += 1;
            if let Some(c) = def.wave_c {
                let times = [0.0, 0.5, 1.0];
                let grid = if def.dim == 2 { region.clone() } else { region.with_resolution(41) };
                let w = wave_residual(&def, &grid, &times, c, &Params::new()).map_err(|e| e.to_string())?;
                check(w.sup_abs < 1e-10, || format!("{}: wave residual {:e}", def.name, w.sup_abs))?;
                worst_w = worst_w.max(w.sup_abs);
                nw += 1;
            }
        }
        check(nh >= 6 && nw >= 3, || format!("only {nh} Helmholtz and {nw} wave fields"))?;
        use SingularityClass::*;
        let origin = [
            ("H2.helmholtz-hyperbolic", Hyperbolic),
            ("H2.helmholtz-cusp", Cusp),
            ("H2.helmholtz-hyperbolic-alt", Hyperbolic),
            ("H3.helmholtz-DHt", DefiniteHyperbolic),
            ("H3.helmholtz-It", Indefinite),
            ("H3.helmholtz-cusp", SpatialCusp),
        ];
        for (name, want) in origin {
            let def = catalog_get(name).map_err(|e| e.to_string())?;
            let over = if def.time_dependent { params(&[("t", 0.0)]) } else { Params::new() };
            let got = class_at(&def, &vec![0.0; def.dim], &over)?;
            check(got == want, || format!("{name} at the origin: got {got}, want {want}"))?;
        }
        Ok(format!("{nh} Helmholtz fields sup {worst_h:.1e}, {nw} waves sup {worst_w:.1e}, 6 origin classes match"))
    };
    report(2, "Helmholtz realizations", run());
}

#[test]
fn criterion_3_elliptic_obstruction() {
    let run = || -> Result<String, String> {
        let mut parts = Vec::new();
        for (dim, n) in [(2, 1000), (3, 200)] {
            let cfg = MonteCarloConfig::standard(dim, SEED, n).map_err(|e| e.to_string())?;
            let t = monte_carlo_genericity(&cfg).map_err(|e| e.to_string())?;
            let s = &t.summary;
            check(s.elliptic == 0, || format!("{dim}D: {} elliptic zeros", s.elliptic))?;
            check(s.pencil_definite == 0, || format!("{dim}D: {} definite pencils", s.pencil_definite))?;
            check(s.skipped == 0, || format!("{dim}D: {} zeros could not be tested", s.skipped))?;
            if dim == 2 {
                check(t == monte_carlo_genericity(&cfg).map_err(|e| e.to_string())?, || "planar run not deterministic".into())?;
            }
            parts.push(format!("{dim}D {n} fields, {} zeros, 0 elliptic, 0 definite", s.zeros));
            if dim == 2 {
                let frac = s.consistent_fraction();
                let inconsistent = s.consistency.get("Inconsistent").copied().unwrap_or(0);
                check(frac >= 0.99 && inconsistent == 0, || format!("crosscheck {frac} consistent, {inconsistent} inconsistent"))?;
                parts.push(format!("crosscheck {:.2}% consistent", 100.0 * frac));
            }
        }
        Ok(parts.join("; "))
    };
    report(3, "elliptic obstruction", run());
}

fn sorted_locations(pts: &[vortex_atlas::dislocation::DislocationPoint]) -> Vec<Vec<f64>> {
    let mut v: Vec<Vec<f64>> = pts.iter().map(|p| p.location.clone()).collect();
    v.sort_by(|a, b| a[0].total_cmp(&b[0]));
    v
}

fn close(got: &[Vec<f64>], want: &[[f64; 2]], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g[0] - w[0]).abs() < tol && (g[1] - w[1]).abs() < tol)
}

#[test]
fn criterion_4_bifurcation_counts() {
    let run = || -> Result<String, String> {
        let values = [-0.25, 0.0, 0.25];
        let region = Region::cube(2, -1.0, 1.0, 101).map_err(|e| e.to_string())?;
        let ht = sweep_parameter(&catalog_get("H2.Ht").unwrap(), &region, &Params::new(), "t", &values).map_err(|e| e.to_string())?;
        check(ht.counts == [2, 1, 0], || format!("H_t counts {:?}", ht.counts))?;
        let z = sorted_locations(&ht.points[0]);
        check(close(&z, &[[-0.5, 0.0], [0.5, 0.0]], 1e-8), || format!("H_t zeros {z:?}"))?;

        let cusp = sweep_parameter(&catalog_get("H2.cusp-family").unwrap(), &region, &params(&[("b", 0.0)]), "a", &values).map_err(|e| e.to_string())?;
        check(cusp.counts == [1, 1, 3], || format!("cusp family counts {:?}", cusp.counts))?;
        let z = sorted_locations(&cusp.points[2]);
        check(close(&z, &[[-0.5, -0.25], [0.0, -0.25], [0.5, -0.25]], 1e-8), || format!("cusp family zeros {z:?}"))?;

        let dh = catalog_get("H3.DHt").unwrap();
        let tr = trace_dislocation_3d(&dh, &Region::cube(3, -1.0, 1.0, 41).unwrap(), &params(&[("t", -0.25)])).map_err(|e| e.to_string())?;
        check(tr.curves.len() == 1 && tr.curves[0].closed, || format!("DH_t: {} curves", tr.curves.len()))?;
        let dev = tr.curves[0].points.iter().map(|p| ((p[0].hypot(p[1]) - 0.5).abs()).max(p[2].abs())).fold(0.0, f64::max);
        check(dev < 1e-6, || format!("DH_t circle deviation {dev:e}"))?;
        Ok(format!("H_t 2/1/0, cusp 1/1/3, DH_t circle {} vertices within {dev:.1e}", tr.curves[0].points.len()))
    };
    report(4, "bifurcation counts", run());
}

fn c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

#[test]
fn criterion_5_jet_relations_and_strata() {
    let run = || -> Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut worst = 0.0f64;
        let relations = |d: &dyn Fn(u8, u8) -> Complex64, k2: f64| {
            [d(2, 0) + d(0, 2) + d(0, 0) * k2, d(3, 0) + d(1, 2) + d(1, 0) * k2, d(2, 1) + d(0, 3) + d(0, 1) * k2].map(|z| z.norm())
        };
        for _ in 0..200 {
            let data = CauchyData { x0: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], psi0: (0..8).map(|_| c(&mut rng)).collect(), psi1: (0..8).map(|_| c(&mut rng)).collect(), k: 1.0 };
            let s = helmholtz_series_from_cauchy(&data, 6).map_err(|e| e.to_string())?;
            worst = relations(&|i, j| s.derivative_at_base(&[i, j]), 1.0).into_iter().fold(worst, f64::max);
        }
        for i in 0..200u64 {
            let def = random_helmholtz_field(SEED + i, 8, 2, 1.0).map_err(|e| e.to_string())?;
            let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let s = eval_field_jet(&def, &p, &Params::new(), 3).map_err(|e| e.to_string())?;
            worst = relations(&|i, j| s.derivative_at_base(&[i, j]), 1.0).into_iter().fold(worst, f64::max);
        }
        check(worst < 1e-13, || format!("largest relation residual {worst:e}"))?;

        let mut zeros = 0;
        for def in catalog().into_iter().filter(|d| d.dim == 2 && d.helmholtz_k.is_some()) {
            let scan = scan_zeros_2d(&def, &Region::cube(2, -1.0, 1.0, 101).unwrap(), &Params::new()).map_err(|e| e.to_string())?;
            for z in &scan.points {
                let r = stratum_vs_classifier_crosscheck(z, def.helmholtz_k.unwrap(), &ToleranceSet::default()).map_err(|e| e.to_string())?;
                check(r.status == Consistency::Consistent, || format!("{} at {:?}: {} vs {}", def.name, z.location, r.class, r.stratum))?;
                zeros += 1;
            }
        }
        check(zeros > 0, || "no catalog zeros".into())?;

        let cfg = MonteCarloConfig::standard(2, SEED ^ 1, 300).map_err(|e| e.to_string())?;
        let s = monte_carlo_genericity(&cfg).map_err(|e| e.to_string())?.summary;
        let inconsistent = s.consistency.get("Inconsistent").copied().unwrap_or(0);
        check(s.consistent_fraction() >= 0.99 && inconsistent == 0, || format!("Monte-Carlo crosscheck {:?}", s.consistency))?;
        Ok(format!(
            "relations max {worst:.1e} over 400 jets; {zeros} catalog zeros 100% consistent; {} Monte-Carlo zeros {:.2}% consistent",
            s.zeros,
            100.0 * s.consistent_fraction()
        ))
    };
    report(5, "jet relations and strata", run());
}

fn random_matrix(rng: &mut ChaCha8Rng, positive: bool) -> [[f64; 2]; 2] {
    loop {
        let m: [[f64; 2]; 2] = [[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() > 0.25 && (!positive || det > 0.0) {
            return m;
        }
    }
}

#[test]
fn criterion_6_radial_invariance() {
    let run = || -> Result<String, String> {
        let forms: Vec<FieldDef> = catalog().into_iter().filter(|d| d.dim == 2 && d.helmholtz_k.is_none() && !d.name.ends_with('t') && d.name != "H2.cusp-family").collect();
        let base: Vec<SingularityClass> = forms.iter().map(|d| class_at(d, &[0.0, 0.0], &Params::new())).collect::<Result<_, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut n = 0;
        for _ in 0..50 {
            let lin = random_matrix(&mut rng, true);
            let rho = format!("1 + {:.3}*u^2 + {:.3}*w + {:.3}*u*w", rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let tau = RadialTransform::new(lin, &rho).map_err(|e| e.to_string())?;
            let sigma: Vec<Vec<f64>> = random_matrix(&mut rng, false).iter().map(|r| r.to_vec()).collect();
            for (def, want) in forms.iter().zip(&base) {
                let moved = compose_radial(def, &tau, &sigma).map_err(|e| e.to_string())?;
                let got = class_at(&moved, &[0.0, 0.0], &Params::new())?;
                check(&got == want, || format!("{} under tau {lin:?}, rho {rho}, sigma {sigma:?}: {got} != {want}", def.name))?;
                n += 1;
            }
        }
        Ok(format!("{n} transformed fields ({} forms x 50 pairs) keep their class", forms.len()))
    };
    report(6, "radial invariance", run());
}

struct Cubic([Complex64; 9]);

impl Cubic {
    /// b, c, e, f, g, h, k, l, m in derivative form.
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        let [b, c, e, f, g, h, k, l, m] = self.0;
        b * x + c * y + e * (x * x / 2.0) + f * (x * y) + g * (y * y / 2.0) + h * (x * x * x / 6.0) + k * (x * x * y / 2.0) + l * (x * y * y / 2.0) + m * (y * y * y / 6.0)
    }
}

/// `true` when the image of a small disk lies on one side of the tangent line
/// of the discriminant (convex image, elliptic fold).
fn image_on_one_side(psi: &Cubic) -> bool {
    let dh = 1e-6;
    let dx = (psi.eval(dh, 0.0) - psi.eval(-dh, 0.0)) / (2.0 * dh);
    let dy = (psi.eval(0.0, dh) - psi.eval(0.0, -dh)) / (2.0 * dh);
    let d = if dx.norm() > dy.norm() { dx } else { dy };
    let n = Complex64::i() * d / d.norm();
    let r = 1e-2;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..=40 {
        for j in 0..256 {
            let (s, co) = (std::f64::consts::TAU * j as f64 / 256.0).sin_cos();
            let rho = r * i as f64 / 40.0;
            let v = psi.eval(rho * co, rho * s);
            let side = v.re * n.re + v.im * n.im;
            lo = lo.min(side);
            hi = hi.max(side);
        }
    }
    lo * hi >= 0.0
}

#[test]
fn criterion_7_oracle_equivalence() {
    let run = || -> Result<String, String> {
        let tol = ToleranceSet::default();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let (mut tested, mut drawn) = (0, 0);
        while tested < 100 {
            drawn += 1;
            let b = c(&mut rng);
            let cc = b * rng.gen_range(-2.0..2.0);
            let rest: Vec<Complex64> = (0..7).map(|_| c(&mut rng)).collect();
            let coeffs = [b, cc, rest[0], rest[1], rest[2], rest[3], rest[4], rest[5], rest[6]];
            let zero = Complex64::new(0.0, 0.0);
            let jet = Jet2::from_coordinates(zero, b, cc, rest[0], rest[1], rest[2], rest[3], rest[4], rest[5], rest[6]);
            let r = classify_jet_2d(&jet, &tol).map_err(|e| e.to_string())?;
            let kq = r.curvature_product.unwrap_or(0.0);
            if !matches!(r.class, SingularityClass::Hyperbolic | SingularityClass::Elliptic) || kq.abs() <= 10.0 * tol.tau_curv {
                continue;
            }
            let oracle = image_on_one_side(&Cubic(coeffs));
            check(oracle == (r.class == SingularityClass::Elliptic), || format!("jet {coeffs:?}: classifier {} (kappa*Q = {kq:e}), oracle one-sided = {oracle}", r.class))?;
            tested += 1;
        }
        Ok(format!("100 of {drawn} random fold jets agree with the sampling oracle"))
    };
    report(7, "oracle equivalence", run());
}

fn fd_derivative(def: &FieldDef, p: &[f64], alpha: &[u8], h: f64) -> Complex64 {
    // tensor product of central stencils of orders 0..3
    let stencil = |o: u8| -> Vec<(f64, f64)> {
        match o {
            0 => vec![(0.0, 1.0)],
            1 => vec![(-1.0, -0.5), (1.0, 0.5)],
            2 => vec![(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
            _ => vec![(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        }
    };
    let mut acc = vec![(p.to_vec(), 1.0)];
    for (axis, &o) in alpha.iter().enumerate() {
        let mut next = Vec::new();
        for (q, w) in &acc {
            for (off, sw) in stencil(o) {
                let mut q = q.clone();
                q[axis] += off * h;
                next.push((q, w * sw / h.powi(o as i32)));
            }
        }
        acc = next;
    }
    acc.iter().map(|(q, w)| eval_field(def, q, &Params::new()).unwrap() * *w).sum()
}

#[test]
fn criterion_8_series_and_rays() {
    let run = || -> Result<String, String> {
        let mut worst = 0.0f64;
        let mut checked = 0;
        let base = [0.3, -0.2, 0.1, 0.15];
        for def in catalog() {
            let n = def.arity();
            let p = &base[..n];
            let s = eval_field_jet(&def, p, &Params::new(), 3).map_err(|e| e.to_string())?;
            let mut alpha = vec![0u8; n];
            loop {
                let deg: u8 = alpha.iter().sum();
                if (1..=3).contains(&deg) {
                    let h = 1e-2;
                    let fd = (fd_derivative(&def, p, &alpha, h / 2.0) * 4.0 - fd_derivative(&def, p, &alpha, h)) / 3.0;
                    let err = (s.derivative_at_base(&alpha) - fd).norm();
                    check(err < 1e-6, || format!("{} d^{alpha:?} at {p:?}: |jet - fd| = {err:e}", def.name))?;
                    worst = worst.max(err);
                    checked += 1;
                }
                // next multi-index with entries 0..=3
                let mut i = 0;
                while i < n && alpha[i] == 3 {
                    alpha[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                alpha[i] += 1;
            }
        }

        let reg = catalog_get("H2.regular").unwrap();
        let levels: Vec<f64> = (0..12).map(|j| std::f64::consts::TAU * j as f64 / 12.0).collect();
        let set = trace_equiphase(&reg, &Region::cube(2, -0.5, 0.5, 101).unwrap(), &levels, &Params::new()).map_err(|e| e.to_string())?;
        let mut dev = 0.0f64;
        let mut vertices = 0;
        for lc in &set.contours {
            check(!lc.polylines.is_empty(), || format!("no ray at level {}", lc.level))?;
            let (s, co) = lc.level.sin_cos();
            for p in lc.polylines.iter().flatten().filter(|p| p[0].hypot(p[1]) <= 0.5) {
                check(p[0] * co + p[1] * s > 0.0, || format!("vertex {p:?} on the wrong half-line for level {}", lc.level))?;
                dev = dev.max((p[0] * s - p[1] * co).abs());
                vertices += 1;
            }
        }
        check(dev < 1e-3, || format!("ray deviation {dev:e}"))?;
        Ok(format!("{checked} jet coefficients within {worst:.1e} of finite differences; {vertices} ray vertices within {dev:.1e}"))
    };
    report(8, "series correctness and rays", run());
}
