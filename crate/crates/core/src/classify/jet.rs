use num_complex::Complex;
use num_traits::Zero;

use super::ClassifyError;
use crate::scalar::Real;
use crate::taylor::TruncatedSeries;

/// Planar jet in derivative coordinates:
/// `a + bX + cY + (e/2)X² + fXY + (g/2)Y² + (h/6)X³ + (k/2)X²Y + (l/2)XY² + (m/6)Y³`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T: Real> {
    pub basepoint: [T; 2],
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub e: Complex<T>,
    pub f: Complex<T>,
    pub g: Complex<T>,
    pub h: Complex<T>,
    pub k: Complex<T>,
    pub l: Complex<T>,
    pub m: Complex<T>,
    /// The full source series, including terms above degree 3.
    pub series: TruncatedSeries<T>,
}

/// Spatial jet: derivative values `∂^α ψ` for `|α| ≤ 3` in graded-lex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3<T: Real> {
    pub basepoint: [T; 3],
    pub derivatives: Vec<([u8; 3], Complex<T>)>,
    pub series: TruncatedSeries<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Jet<T: Real> {
    Two(Jet2<T>),
    Three(Jet3<T>),
}

fn check<T: Real>(s: &TruncatedSeries<T>, nvars: usize) -> Result<(), ClassifyError> {
    if s.nvars() != nvars {
        return Err(ClassifyError::UnsupportedVars(s.nvars()));
    }
    if s.order() < 3 {
        return Err(ClassifyError::InsufficientOrder { order: s.order(), needed: 3 });
    }
    Ok(())
}

impl<T: Real> Jet2<T> {
    pub fn from_series(s: &TruncatedSeries<T>) -> Result<Jet2<T>, ClassifyError> {
        check(s, 2)?;
        let d = |i: u8, j: u8| s.derivative_at_base(&[i, j]);
        Ok(Jet2 {
            basepoint: [T::zero(); 2],
            a: d(0, 0),
            b: d(1, 0),
            c: d(0, 1),
            e: d(2, 0),
            f: d(1, 1),
            g: d(0, 2),
            h: d(3, 0),
            k: d(2, 1),
            l: d(1, 2),
            m: d(0, 3),
            series: s.clone(),
        })
    }

    /// Builds the cubic jet directly from coordinates.
    #[allow(clippy::too_many_arguments)]
    pub fn from_coordinates(
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        e: Complex<T>,
        f: Complex<T>,
        g: Complex<T>,
        h: Complex<T>,
        k: Complex<T>,
        l: Complex<T>,
        m: Complex<T>,
    ) -> Jet2<T> {
        let half = T::lit(0.5);
        let sixth = T::lit(1.0 / 6.0);
        let terms = vec![
            (vec![0, 0], a),
            (vec![1, 0], b),
            (vec![0, 1], c),
            (vec![2, 0], e * half),
            (vec![1, 1], f),
            (vec![0, 2], g * half),
            (vec![3, 0], h * sixth),
            (vec![2, 1], k * half),
            (vec![1, 2], l * half),
            (vec![0, 3], m * sixth),
        ];
        let series = TruncatedSeries::from_terms(2, 3, terms).expect("cubic planar series");
        Jet2 { basepoint: [T::zero(); 2], a, b, c, e, f, g, h, k, l, m, series }
    }

    pub fn at(mut self, basepoint: [T; 2]) -> Self {
        self.basepoint = basepoint;
        self
    }
}

impl<T: Real> Jet3<T> {
    pub fn from_series(s: &TruncatedSeries<T>) -> Result<Jet3<T>, ClassifyError> {
        check(s, 3)?;
        let derivatives = s
            .layout()
            .exponents()
            .iter()
            .filter(|e| e.iter().map(|&x| x as usize).sum::<usize>() <= 3)
            .map(|e| {
                let a = [e[0], e[1], e[2]];
                (a, s.derivative_at_base(&a))
            })
            .collect();
        Ok(Jet3 { basepoint: [T::zero(); 3], derivatives, series: s.clone() })
    }

    pub fn derivative(&self, alpha: [u8; 3]) -> Complex<T> {
        self.derivatives
            .iter()
            .find(|(a, _)| *a == alpha)
            .map(|(_, v)| *v)
            .unwrap_or_else(Complex::zero)
    }

    pub fn at(mut self, basepoint: [T; 3]) -> Self {
        self.basepoint = basepoint;
        self
    }
}

/// Extracts the derivative coordinates from a 2- or 3-variable series.
pub fn jet_from_series<T: Real>(s: &TruncatedSeries<T>) -> Result<Jet<T>, ClassifyError> {
    match s.nvars() {
        2 => Ok(Jet::Two(Jet2::from_series(s)?)),
        3 => Ok(Jet::Three(Jet3::from_series(s)?)),
        n => Err(ClassifyError::UnsupportedVars(n)),
    }
}

/// `max |∂^α ψ|` over `1 ≤ |α| ≤ 3`: the scale all relative tolerances use.
pub fn jet_norm<T: Real>(s: &TruncatedSeries<T>) -> T {
    let mut n = T::zero();
    for e in s.layout().exponents() {
        let deg: usize = e.iter().map(|&x| x as usize).sum();
        if (1..=3).contains(&deg) {
            n = n.max(s.derivative_at_base(&e[..s.nvars()]).norm());
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn planar_coordinates() {
        let s = TruncatedSeries::from_terms(2, 3, vec![(vec![2, 0], c(0.5, 0.0)), (vec![0, 2], c(-0.5, 0.0)), (vec![0, 1], c(0.0, 1.0))]).unwrap();
        let j = Jet2::from_series(&s).unwrap();
        assert_eq!(j.a, c(0.0, 0.0));
        assert_eq!(j.b, c(0.0, 0.0));
        assert_eq!(j.c, c(0.0, 1.0));
        assert_eq!(j.e, c(1.0, 0.0));
        assert_eq!(j.f, c(0.0, 0.0));
        assert_eq!(j.g, c(-1.0, 0.0));
        let r = TruncatedSeries::from_terms(2, 3, vec![(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(0.0, 1.0))]).unwrap();
        let j = Jet2::from_series(&r).unwrap();
        assert_eq!((j.b, j.c), (c(1.0, 0.0), c(0.0, 1.0)));
        assert!([j.a, j.e, j.f, j.g, j.h, j.k, j.l, j.m].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn order_too_low() {
        let s = TruncatedSeries::<f64>::zeros(2, 2).unwrap();
        assert_eq!(jet_from_series(&s).unwrap_err(), ClassifyError::InsufficientOrder { order: 2, needed: 3 });
        let s = TruncatedSeries::<f64>::zeros(4, 3).unwrap();
        assert_eq!(jet_from_series(&s).unwrap_err(), ClassifyError::UnsupportedVars(4));
    }

    #[test]
    fn coordinates_round_trip() {
        let v = |k: f64| c(k, -0.5 * k);
        let j = Jet2::from_coordinates(v(0.0), v(1.0), v(2.0), v(3.0), v(4.0), v(5.0), v(6.0), v(7.0), v(8.0), v(9.0));
        let back = Jet2::from_series(&j.series).unwrap();
        for (x, y) in [(j.e, back.e), (j.h, back.h), (j.k, back.k), (j.l, back.l), (j.m, back.m)] {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn spatial_derivatives() {
        let s = TruncatedSeries::from_terms(3, 3, vec![(vec![0, 0, 2], c(-1.0, 0.0)), (vec![0, 0, 1], c(0.0, 1.0))]).unwrap();
        let j = Jet3::from_series(&s).unwrap();
        assert_eq!(j.derivative([0, 0, 2]), c(-2.0, 0.0));
        assert_eq!(j.derivatives.len(), 20);
        assert_eq!(jet_norm(&s), 2.0);
    }
}
