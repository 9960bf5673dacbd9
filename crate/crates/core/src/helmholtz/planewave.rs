//! Finite superpositions of plane waves: exact global Helmholtz solutions.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::HelmholtzError;
use crate::fieldlang::{FieldDef, FieldExpr, Func, Var};

/// `amplitude · exp(i k ⟨d, x⟩)` with `d = (cos θ, sin θ)` in the plane or
/// `d = (sin θ cos φ, sin θ sin φ, cos θ)` in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub amplitude: Complex<f64>,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl PlaneWave {
    pub fn direction(&self) -> Vec<f64> {
        match self.phi {
            None => vec![self.theta.cos(), self.theta.sin()],
            Some(p) => vec![self.theta.sin() * p.cos(), self.theta.sin() * p.sin(), self.theta.cos()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveSum {
    pub k: f64,
    pub dim: usize,
    pub terms: Vec<PlaneWave>,
}

impl PlaneWaveSum {
    pub fn new(k: f64, dim: usize, terms: Vec<PlaneWave>) -> Result<Self, HelmholtzError> {
        if dim != 2 && dim != 3 {
            return Err(HelmholtzError::BadParameter(format!("dimension {dim}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(HelmholtzError::BadParameter(format!("wavenumber {k}")));
        }
        if let Some(t) = terms.iter().find(|t| t.phi.is_some() != (dim == 3)) {
            return Err(HelmholtzError::BadParameter(format!("term {t:?} does not match dimension {dim}")));
        }
        Ok(PlaneWaveSum { k, dim, terms })
    }

    pub fn eval(&self, x: &[f64]) -> Complex<f64> {
        self.terms
            .iter()
            .map(|t| {
                let phase: f64 = t.direction().iter().zip(x).map(|(d, v)| d * v).sum();
                t.amplitude * Complex::new(0.0, self.k * phase).exp()
            })
            .sum()
    }

    pub fn to_field(&self, name: &str) -> Result<FieldDef, HelmholtzError> {
        let vars = [Var::X, Var::Y, Var::Z];
        let terms = self.terms.iter().map(|t| {
            let phase = FieldExpr::sum(t.direction().iter().zip(vars).map(|(d, v)| FieldExpr::mul(FieldExpr::real(self.k * d), FieldExpr::var(v))));
            let arg = FieldExpr::mul(FieldExpr::complex(0.0, 1.0), phase);
            FieldExpr::mul(FieldExpr::complex(t.amplitude.re, t.amplitude.im), FieldExpr::call(Func::Exp, arg))
        });
        let def = FieldDef::new(name, self.dim, false, FieldExpr::sum(terms), Default::default(), "random plane-wave sum")?;
        Ok(def.with_helmholtz(self.k))
    }

    /// Rows `re,im,theta[,phi]` with a header.
    pub fn to_csv(&self) -> Result<String, HelmholtzError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let table = |e: csv::Error| HelmholtzError::Table(e.to_string());
        if self.dim == 2 {
            w.write_record(["re", "im", "theta"]).map_err(table)?;
        } else {
            w.write_record(["re", "im", "theta", "phi"]).map_err(table)?;
        }
        for t in &self.terms {
            let mut row = vec![t.amplitude.re.to_string(), t.amplitude.im.to_string(), t.theta.to_string()];
            row.extend(t.phi.map(|p| p.to_string()));
            w.write_record(&row).map_err(table)?;
        }
        let bytes = w.into_inner().map_err(|e| HelmholtzError::Table(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HelmholtzError::Table(e.to_string()))
    }

    /// Inverse of [`PlaneWaveSum::to_csv`]; the dimension follows from the
    /// number of columns.
    pub fn from_csv(text: &str, k: f64) -> Result<Self, HelmholtzError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| HelmholtzError::Table(e.to_string()))?.clone();
        let dim = match headers.len() {
            3 => 2,
            4 => 3,
            n => return Err(HelmholtzError::Table(format!("expected 3 or 4 columns, got {n}"))),
        };
        let mut terms = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| HelmholtzError::Table(e.to_string()))?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| HelmholtzError::Table(format!("row {}: '{s}': {e}", line + 1))))
                .collect::<Result<_, _>>()?;
            if v.len() != headers.len() {
                return Err(HelmholtzError::Table(format!("row {} has {} columns", line + 1, v.len())));
            }
            terms.push(PlaneWave { amplitude: Complex::new(v[0], v[1]), theta: v[2], phi: v.get(3).copied() });
        }
        PlaneWaveSum::new(k, dim, terms)
    }
}

/// `n_terms` waves with amplitudes `(N(0,1) + i N(0,1))/√2` and directions
/// uniform on the circle or the sphere, drawn from ChaCha8 seeded with `seed`.
pub fn random_plane_wave_sum(seed: u64, n_terms: usize, dim: usize, k: f64) -> Result<PlaneWaveSum, HelmholtzError> {
    if n_terms == 0 {
        return Err(HelmholtzError::BadParameter("need at least one plane wave".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..n_terms)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let amplitude = Complex::new(re, im) / std::f64::consts::SQRT_2;
            if dim == 2 {
                PlaneWave { amplitude, theta: rng.gen_range(0.0..std::f64::consts::TAU), phi: None }
            } else {
                let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
                PlaneWave { amplitude, theta: cos_theta.acos(), phi: Some(rng.gen_range(0.0..std::f64::consts::TAU)) }
            }
        })
        .collect();
    PlaneWaveSum::new(k, dim, terms)
}

pub fn random_helmholtz_field(seed: u64, n_terms: usize, dim: usize, k: f64) -> Result<FieldDef, HelmholtzError> {
    random_plane_wave_sum(seed, n_terms, dim, k)?.to_field(&format!("random{dim}d-seed{seed}-n{n_terms}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dislocation::Region;
    use crate::fieldlang::{eval_field, Params};
    use crate::helmholtz::helmholtz_residual;

    #[test]
    fn single_wave() {
        let s = PlaneWaveSum::new(1.0, 2, vec![PlaneWave { amplitude: Complex::new(1.0, 0.0), theta: 0.0, phi: None }]).unwrap();
        let f = s.to_field("pw").unwrap();
        let v = eval_field(&f, &[0.7, -0.3], &Params::new()).unwrap();
        assert!((v - Complex::new(0.0, 0.7).exp()).norm() < 1e-15);
        let r = helmholtz_residual(&f, &Region::cube(2, -1.0, 1.0, 21).unwrap(), 1.0, &Params::new()).unwrap();
        assert!(r.sup_abs < 1e-15);
    }

    #[test]
    fn seeded_sums_are_exact_and_reproducible() {
        let f = random_helmholtz_field(42, 8, 2, 1.0).unwrap();
        assert_eq!(f, random_helmholtz_field(42, 8, 2, 1.0).unwrap());
        assert_ne!(f.expr, random_helmholtz_field(43, 8, 2, 1.0).unwrap().expr);
        let r = helmholtz_residual(&f, &Region::cube(2, -3.0, 3.0, 101).unwrap(), 1.0, &Params::new()).unwrap();
        assert!(r.sup_abs < 1e-11, "{}", r.sup_abs);
        let g = random_helmholtz_field(7, 8, 3, 2.0).unwrap();
        let r = helmholtz_residual(&g, &Region::cube(3, -1.0, 1.0, 11).unwrap(), 2.0, &Params::new()).unwrap();
        assert!(r.sup_abs < 1e-11);
    }

    #[test]
    fn field_matches_direct_sum() {
        let s = random_plane_wave_sum(3, 5, 3, 1.5).unwrap();
        let f = s.to_field("s").unwrap();
        for p in [[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]] {
            assert!((s.eval(&p) - eval_field(&f, &p, &Params::new()).unwrap()).norm() < 1e-13);
        }
        for t in &s.terms {
            let d = t.direction();
            assert!((d.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_round_trip() {
        for dim in [2, 3] {
            let s = random_plane_wave_sum(11, 4, dim, 1.0).unwrap();
            let back = PlaneWaveSum::from_csv(&s.to_csv().unwrap(), 1.0).unwrap();
            assert_eq!(s, back);
        }
        assert!(PlaneWaveSum::from_csv("re,im\n1,2\n", 1.0).is_err());
        assert!(PlaneWaveSum::from_csv("re,im,theta\n1,x,0\n", 1.0).is_err());
        assert!(random_plane_wave_sum(1, 0, 2, 1.0).is_err());
    }
}
