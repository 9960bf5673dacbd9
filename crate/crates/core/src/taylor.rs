//! Truncated multivariate Taylor series with complex coefficients.
//!
//! Coefficients are stored densely in graded-lex order: all monomials of
//! degree 0, then degree 1, and so on; within one degree the exponent tuples
//! are sorted lexicographically descending (so `X` precedes `Y`, and `X^2`,
//! `XY`, `Y^2` follow in that order). Every admissible index up to the
//! truncation order has a slot, zero or not.
//!
//! Coefficients follow the Taylor convention: the coefficient of `X^i Y^j`
//! is `∂x^i ∂y^j ψ / (i! j!)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{cfinite, Real};

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 10;
/// Largest supported number of variables.
pub const MAX_VARS: usize = 4;
/// Default truncation order for field jets.
pub const DEFAULT_ORDER: usize = 6;
/// Guard on the modulus of the constant term for reciprocals.
pub const TAU_DIV: f64 = 1e-12;

/// Exponent tuple; unused trailing slots are zero.
pub type MultiIndex = [u8; MAX_VARS];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("shape mismatch: ({0} vars, order {1}) vs ({2} vars, order {3})")]
    Shape(usize, usize, usize, usize),
    #[error("unsupported series shape: {nvars} variables, order {order}")]
    UnsupportedShape { nvars: usize, order: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("reciprocal of a series whose constant term has modulus {modulus:e}")]
    DivisionNearZero { modulus: f64 },
    #[error("non-finite coefficient produced by {op}")]
    NonFinite { op: &'static str },
    #[error("substituted series must have zero constant term")]
    NonNilpotentSubstitution,
}

/// Monomial table and multiplication schedule for one `(nvars, order)` pair.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<MultiIndex>,
    degrees: Vec<usize>,
    index: HashMap<MultiIndex, usize>,
    // products grouped by left index: mul_ranges[i] indexes into mul_terms
    mul_ranges: Vec<(u32, u32)>,
    mul_terms: Vec<(u32, u32)>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..=order {
            let mut cur = [0u8; MAX_VARS];
            push_degree(nvars, 0, d, &mut cur, &mut exps);
            while degrees.len() < exps.len() {
                degrees.push(d);
            }
        }
        let index: HashMap<MultiIndex, usize> =
            exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut mul_ranges = Vec::with_capacity(exps.len());
        let mut mul_terms = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            let start = mul_terms.len() as u32;
            for (j, ej) in exps.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    // degrees are sorted, nothing further fits
                    break;
                }
                let mut sum = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    sum[v] = ei[v] + ej[v];
                }
                mul_terms.push((j as u32, index[&sum] as u32));
            }
            mul_ranges.push((start, mul_terms.len() as u32));
        }
        Layout {
            nvars,
            order,
            exps,
            degrees,
            index,
            mul_ranges,
            mul_terms,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[MultiIndex] {
        &self.exps
    }

    pub fn degree_of(&self, slot: usize) -> usize {
        self.degrees[slot]
    }

    pub fn slot(&self, exps: &[u8]) -> Option<usize> {
        let mut key = [0u8; MAX_VARS];
        for (k, e) in key.iter_mut().zip(exps) {
            *k = *e;
        }
        if exps.len() > self.nvars && exps[self.nvars..].iter().any(|&e| e != 0) {
            return None;
        }
        self.index.get(&key).copied()
    }
}

fn push_degree(nvars: usize, var: usize, remaining: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
    if var + 1 == nvars {
        cur[var] = remaining as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e as u8;
        push_degree(nvars, var + 1, remaining - e, cur, out);
    }
    cur[var] = 0;
}

fn layout(nvars: usize, order: usize) -> Result<Arc<Layout>, SeriesError> {
    if nvars == 0 || nvars > MAX_VARS || order > MAX_ORDER {
        return Err(SeriesError::UnsupportedShape { nvars, order });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("layout cache poisoned");
    Ok(guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
        .clone())
}

/// Elementary functions that can be composed with a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Neg,
    Recip,
}

/// Multivariate Taylor polynomial truncated at a fixed total degree.
#[derive(Clone)]
pub struct TruncatedSeries<T> {
    layout: Arc<Layout>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> PartialEq for TruncatedSeries<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl<T: Real> fmt::Debug for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries(nvars={}, order={}; ", self.nvars(), self.order())?;
        let mut first = true;
        for (slot, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            let e = &self.layout.exps[slot];
            for (v, p) in e.iter().take(self.nvars()).enumerate() {
                if *p > 0 {
                    write!(f, "·{}^{}", VAR_NAMES[v], p)?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

const VAR_NAMES: [&str; MAX_VARS] = ["X", "Y", "Z", "T"];

impl<T: Real> TruncatedSeries<T> {
    pub fn zeros(nvars: usize, order: usize) -> Result<Self, SeriesError> {
        let layout = layout(nvars, order)?;
        let coeffs = vec![Complex::zero(); layout.len()];
        Ok(Self { layout, coeffs })
    }

    pub fn constant(value: Complex<T>, nvars: usize, order: usize) -> Result<Self, SeriesError> {
        let mut s = Self::zeros(nvars, order)?;
        s.coeffs[0] = value;
        Ok(s)
    }

    /// Series `x0 + X_index`: the seeded coordinate function.
    pub fn seed_variable(index: usize, basepoint: T, nvars: usize, order: usize) -> Result<Self, SeriesError> {
        if index >= nvars {
            return Err(SeriesError::VariableOutOfRange { index, nvars });
        }
        let mut s = Self::constant(Complex::new(basepoint, T::zero()), nvars, order)?;
        if order >= 1 {
            let mut e = [0u8; MAX_VARS];
            e[index] = 1;
            let slot = s.layout.slot(&e).expect("linear slot");
            s.coeffs[slot] = Complex::one();
        }
        Ok(s)
    }

    /// Builds a series from `(exponents, coefficient)` pairs; terms above the
    /// truncation order are dropped.
    pub fn from_terms<I>(nvars: usize, order: usize, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Vec<u8>, Complex<T>)>,
    {
        let mut s = Self::zeros(nvars, order)?;
        for (e, c) in terms {
            if e.len() > nvars {
                return Err(SeriesError::VariableOutOfRange { index: e.len() - 1, nvars });
            }
            if e.iter().map(|&x| x as usize).sum::<usize>() > order {
                continue;
            }
            let slot = s.layout.slot(&e).expect("admissible monomial");
            s.coeffs[slot] = s.coeffs[slot] + c;
        }
        Ok(s)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficient of the monomial with the given exponents (zero beyond the order).
    pub fn coeff(&self, exps: &[u8]) -> Complex<T> {
        self.layout
            .slot(exps)
            .map(|s| self.coeffs[s])
            .unwrap_or_else(Complex::zero)
    }

    /// Partial derivative `∂^α ψ` at the basepoint, i.e. `α! ×` coefficient.
    pub fn derivative_at_base(&self, exps: &[u8]) -> Complex<T> {
        let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
        self.coeff(exps) * T::lit(fact)
    }

    pub fn set_coeff(&mut self, exps: &[u8], value: Complex<T>) -> Result<(), SeriesError> {
        let slot = self
            .layout
            .slot(exps)
            .ok_or(SeriesError::VariableOutOfRange { index: exps.len(), nvars: self.nvars() })?;
        self.coeffs[slot] = value;
        Ok(())
    }

    pub fn constant_term(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Iterates `(exponents, coefficient)` over all slots in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex<T>)> {
        self.layout.exps.iter().zip(self.coeffs.iter())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout)
            || (self.nvars() == other.nvars() && self.order() == other.order())
    }

    fn check_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(SeriesError::Shape(self.nvars(), self.order(), other.nvars(), other.order()))
        }
    }

    fn finite(self, op: &'static str) -> Result<Self, SeriesError> {
        if self.coeffs.iter().all(|c| cfinite(*c)) {
            Ok(self)
        } else {
            Err(SeriesError::NonFinite { op })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest coefficient modulus.
    pub fn norm_max(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self { layout: self.layout.clone(), coeffs }.finite("add")
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self { layout: self.layout.clone(), coeffs }.finite("sub")
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let mut out = vec![Complex::<T>::zero(); self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (lo, hi) = self.layout.mul_ranges[i];
            for &(j, k) in &self.layout.mul_terms[lo as usize..hi as usize] {
                let b = other.coeffs[j as usize];
                if !b.is_zero() {
                    out[k as usize] = out[k as usize] + a * b;
                }
            }
        }
        Self { layout: self.layout.clone(), coeffs: out }.finite("mul")
    }

    pub fn neg(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, factor: Complex<T>) -> Result<Self, SeriesError> {
        Self {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
        .finite("scale")
    }

    pub fn add_constant(&self, c: Complex<T>) -> Result<Self, SeriesError> {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0] + c;
        out.finite("add_constant")
    }

    pub fn recip(&self) -> Result<Self, SeriesError> {
        self.elementary(Elementary::Recip)
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        self.mul(&other.recip()?)
    }

    pub fn powi(&self, n: u32) -> Result<Self, SeriesError> {
        let mut result = Self::constant(Complex::one(), self.nvars(), self.order())?;
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Composition `f(s)` expanded about the constant term of `s`.
    pub fn elementary(&self, f: Elementary) -> Result<Self, SeriesError> {
        if f == Elementary::Neg {
            return Ok(self.neg());
        }
        let c0 = self.coeffs[0];
        let order = self.order();
        // Taylor coefficients f^(n)(c0)/n!
        let mut taylor = Vec::with_capacity(order + 1);
        match f {
            Elementary::Exp => {
                let e = c0.exp();
                for n in 0..=order {
                    taylor.push(e / T::lit(factorial(n)));
                }
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, c) = (c0.sin(), c0.cos());
                // derivative cycle of sin: sin, cos, -sin, -cos
                let cycle = [s, c, -s, -c];
                let shift = if f == Elementary::Sin { 0 } else { 1 };
                for n in 0..=order {
                    taylor.push(cycle[(n + shift) % 4] / T::lit(factorial(n)));
                }
            }
            Elementary::Recip => {
                let modulus = c0.norm();
                if modulus.to_f64_lossy() <= TAU_DIV {
                    return Err(SeriesError::DivisionNearZero { modulus: modulus.to_f64_lossy() });
                }
                let inv = c0.inv();
                let mut p = inv;
                for n in 0..=order {
                    taylor.push(if n % 2 == 0 { p } else { -p });
                    p = p * inv;
                }
            }
            Elementary::Neg => unreachable!(),
        }
        let mut h = self.clone();
        h.coeffs[0] = Complex::zero();
        // Horner in the nilpotent increment h
        let mut acc = Self::constant(taylor[order], self.nvars(), order)?;
        for n in (0..order).rev() {
            acc = acc.mul(&h)?.add_constant(taylor[n])?;
        }
        acc.finite("elementary")
    }

    /// `∂/∂X_var` of the series; the result has order `order - 1` (exact
    /// coefficients only), or is the zero series of order 0.
    pub fn derivative(&self, var: usize) -> Result<Self, SeriesError> {
        if var >= self.nvars() {
            return Err(SeriesError::VariableOutOfRange { index: var, nvars: self.nvars() });
        }
        let new_order = self.order().saturating_sub(1);
        let mut out = Self::zeros(self.nvars(), new_order)?;
        if self.order() == 0 {
            return Ok(out);
        }
        for (slot, e) in self.layout.exps.iter().enumerate() {
            if e[var] == 0 {
                continue;
            }
            let mut lowered = *e;
            lowered[var] -= 1;
            if let Some(target) = out.layout.slot(&lowered) {
                out.coeffs[target] = self.coeffs[slot] * T::lit(e[var] as f64);
            }
        }
        Ok(out)
    }

    /// Drops all terms above `order` (which must not exceed the current order).
    pub fn truncate(&self, order: usize) -> Result<Self, SeriesError> {
        if order > self.order() {
            return Err(SeriesError::Shape(self.nvars(), self.order(), self.nvars(), order));
        }
        let mut out = Self::zeros(self.nvars(), order)?;
        let n = out.coeffs.len();
        out.coeffs.copy_from_slice(&self.coeffs[..n]);
        Ok(out)
    }

    /// Series of the real parts (imaginary parts zeroed).
    pub fn real_part(&self) -> Self {
        self.map(|c| Complex::new(c.re, T::zero()))
    }

    /// Series of the imaginary parts, stored as real coefficients.
    pub fn imag_part(&self) -> Self {
        self.map(|c| Complex::new(c.im, T::zero()))
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| f(*c)).collect(),
        }
    }

    /// Substitutes series with zero constant term for each variable.
    ///
    /// All substitutes must share one shape; the result has that shape, with
    /// order capped by the order of `self`.
    pub fn compose(&self, subs: &[Self]) -> Result<Self, SeriesError> {
        if subs.len() != self.nvars() {
            return Err(SeriesError::VariableOutOfRange { index: subs.len(), nvars: self.nvars() });
        }
        let first = &subs[0];
        for s in subs {
            first.check_shape(s)?;
            if !s.coeffs[0].is_zero() {
                return Err(SeriesError::NonNilpotentSubstitution);
            }
        }
        let order = first.order().min(self.order());
        let subs: Vec<Self> = subs.iter().map(|s| s.truncate(order)).collect::<Result<_, _>>()?;
        let one = Self::constant(Complex::one(), first.nvars(), order)?;
        // powers[v][p] = subs[v]^p
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(subs.len());
        for s in &subs {
            let mut row = vec![one.clone()];
            for p in 1..=order {
                let next = row[p - 1].mul(s)?;
                row.push(next);
            }
            powers.push(row);
        }
        let mut acc = Self::zeros(first.nvars(), order)?;
        for (slot, e) in self.layout.exps.iter().enumerate() {
            let c = self.coeffs[slot];
            if c.is_zero() || self.layout.degrees[slot] > order {
                continue;
            }
            let mut term: Option<Self> = None;
            for (v, row) in powers.iter().enumerate() {
                let p = e[v] as usize;
                if p == 0 {
                    continue;
                }
                term = Some(match term {
                    None => row[p].clone(),
                    Some(t) => t.mul(&row[p])?,
                });
            }
            let term = term.unwrap_or_else(|| one.clone());
            for (a, b) in acc.coeffs.iter_mut().zip(&term.coeffs) {
                *a = *a + b * c;
            }
        }
        acc.finite("compose")
    }

    /// Evaluates the polynomial at a displacement from the basepoint.
    pub fn eval_displacement(&self, delta: &[T]) -> Complex<T> {
        let mut acc = Complex::zero();
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            let mut m = T::one();
            for (v, d) in delta.iter().enumerate().take(self.nvars()) {
                m = m * d.powi(e[v] as i32);
            }
            acc = acc + c * m;
        }
        acc
    }

    /// Converts the coefficient type, e.g. `f64` to `f32`.
    pub fn cast<U: Real>(&self) -> TruncatedSeries<U> {
        TruncatedSeries {
            layout: self.layout.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(U::lit(c.re.to_f64_lossy()), U::lit(c.im.to_f64_lossy())))
                .collect(),
        }
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type S = TruncatedSeries<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn x(order: usize) -> S {
        S::seed_variable(0, 0.0, 2, order).unwrap()
    }

    fn y(order: usize) -> S {
        S::seed_variable(1, 0.0, 2, order).unwrap()
    }

    fn assert_series_eq(a: &S, b: &S, tol: f64) {
        assert!(a.same_shape(b));
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((p - q).norm() <= tol, "{a:?} != {b:?}");
        }
    }

    #[test]
    fn graded_lex_layout() {
        let s = S::zeros(2, 2).unwrap();
        let exps: Vec<_> = s.layout().exponents().iter().map(|e| (e[0], e[1])).collect();
        assert_eq!(exps, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(S::zeros(4, 10).unwrap().coeffs().len(), 1001);
        assert_eq!(S::zeros(3, 3).unwrap().coeffs().len(), 20);
    }

    #[test]
    fn unsupported_shapes() {
        assert!(S::zeros(5, 3).is_err());
        assert!(S::zeros(2, 11).is_err());
        assert!(S::seed_variable(2, 0.0, 2, 3).is_err());
    }

    #[test]
    fn add_examples() {
        let one = S::constant(c(1.0, 0.0), 2, 2).unwrap();
        let lhs = one.add(&x(2)).unwrap().add(&one.add(&y(2)).unwrap()).unwrap();
        let expect = S::from_terms(2, 2, [(vec![0, 0], c(2.0, 0.0)), (vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0))]).unwrap();
        assert_eq!(lhs, expect);
        let zero = S::zeros(2, 2).unwrap();
        assert_eq!(lhs.add(&zero).unwrap(), lhs);
    }

    #[test]
    fn cos_difference_expansion() {
        // jet(cos y) + jet(-cos x) at 0, order 2 -> X^2/2 - Y^2/2
        let s = y(2)
            .elementary(Elementary::Cos)
            .unwrap()
            .add(&x(2).elementary(Elementary::Cos).unwrap().neg())
            .unwrap();
        let expect = S::from_terms(2, 2, [(vec![2, 0], c(0.5, 0.0)), (vec![0, 2], c(-0.5, 0.0))]).unwrap();
        assert_series_eq(&s, &expect, 1e-15);
    }

    #[test]
    fn mul_examples() {
        let one = S::constant(c(1.0, 0.0), 2, 2).unwrap();
        let p = one.add(&x(2)).unwrap().mul(&one.add(&y(2)).unwrap()).unwrap();
        let expect = S::from_terms(
            2,
            2,
            [(vec![0, 0], c(1.0, 0.0)), (vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0)), (vec![1, 1], c(1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(p, expect);
        assert!(x(1).mul(&y(1)).unwrap().is_zero());
        let z = x(2).add(&y(2).scale(c(0.0, 1.0)).unwrap()).unwrap();
        let sq = z.mul(&z).unwrap();
        let expect = S::from_terms(2, 2, [(vec![2, 0], c(1.0, 0.0)), (vec![1, 1], c(0.0, 2.0)), (vec![0, 2], c(-1.0, 0.0))]).unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(matches!(x(2).add(&x(3)), Err(SeriesError::Shape(..))));
        let three = S::seed_variable(0, 0.0, 3, 2).unwrap();
        assert!(matches!(x(2).mul(&three), Err(SeriesError::Shape(..))));
    }

    #[test]
    fn elementary_examples() {
        let s = x(3).elementary(Elementary::Sin).unwrap();
        let expect = S::from_terms(2, 3, [(vec![1, 0], c(1.0, 0.0)), (vec![3, 0], c(-1.0 / 6.0, 0.0))]).unwrap();
        assert_series_eq(&s, &expect, 1e-15);
        let s = y(3).elementary(Elementary::Cos).unwrap();
        let expect = S::from_terms(2, 3, [(vec![0, 0], c(1.0, 0.0)), (vec![0, 2], c(-0.5, 0.0))]).unwrap();
        assert_series_eq(&s, &expect, 1e-15);
        let s = x(2).scale(c(0.0, 1.0)).unwrap().elementary(Elementary::Exp).unwrap();
        let expect = S::from_terms(2, 2, [(vec![0, 0], c(1.0, 0.0)), (vec![1, 0], c(0.0, 1.0)), (vec![2, 0], c(-0.5, 0.0))]).unwrap();
        assert_series_eq(&s, &expect, 1e-15);
    }

    #[test]
    fn recip_guard() {
        let err = x(3).recip().unwrap_err();
        assert!(matches!(err, SeriesError::DivisionNearZero { .. }));
        // 1/(1 - X) = 1 + X + X^2 + X^3
        let one = S::constant(c(1.0, 0.0), 2, 3).unwrap();
        let g = one.sub(&x(3)).unwrap().recip().unwrap();
        for k in 0..=3u8 {
            assert_abs_diff_eq!(g.coeff(&[k, 0]).re, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn non_finite_aborts() {
        let big = S::constant(c(800.0, 0.0), 2, 2).unwrap();
        assert!(matches!(big.elementary(Elementary::Exp), Err(SeriesError::NonFinite { .. })));
    }

    #[test]
    fn seeds() {
        let s = S::seed_variable(0, 0.5, 2, 3).unwrap();
        assert_eq!(s.constant_term(), c(0.5, 0.0));
        assert_eq!(s.coeff(&[1, 0]), c(1.0, 0.0));
        let s = S::seed_variable(1, 0.0, 2, 2).unwrap();
        assert_eq!(s, y(2));
        let xs = S::seed_variable(0, 0.3, 2, 2).unwrap();
        let ys = S::seed_variable(1, -0.2, 2, 2).unwrap();
        let z = xs.add(&ys.scale(c(0.0, 1.0)).unwrap()).unwrap();
        assert_eq!(z.constant_term(), c(0.3, -0.2));
    }

    #[test]
    fn derivative_and_truncate() {
        let p = S::from_terms(2, 3, [(vec![3, 0], c(1.0, 0.0)), (vec![1, 1], c(2.0, 0.0))]).unwrap();
        let dx = p.derivative(0).unwrap();
        assert_eq!(dx.order(), 2);
        assert_eq!(dx.coeff(&[2, 0]), c(3.0, 0.0));
        assert_eq!(dx.coeff(&[0, 1]), c(2.0, 0.0));
        assert_eq!(p.truncate(2).unwrap().coeff(&[1, 1]), c(2.0, 0.0));
        assert!(p.truncate(4).is_err());
    }

    #[test]
    fn compose_into_curve() {
        // P(X, Y) = X^2 + XY, substitute X = s, Y = 2s
        let p = S::from_terms(2, 3, [(vec![2, 0], c(1.0, 0.0)), (vec![1, 1], c(1.0, 0.0))]).unwrap();
        let s = TruncatedSeries::<f64>::seed_variable(0, 0.0, 1, 3).unwrap();
        let out = p.compose(&[s.clone(), s.scale(c(2.0, 0.0)).unwrap()]).unwrap();
        assert_eq!(out.coeff(&[2]), c(3.0, 0.0));
        let shifted = s.add_constant(c(1.0, 0.0)).unwrap();
        assert!(matches!(p.compose(&[shifted, s]), Err(SeriesError::NonNilpotentSubstitution)));
    }

    #[test]
    fn works_in_single_precision() {
        let x32 = TruncatedSeries::<f32>::seed_variable(0, 0.0, 2, 3).unwrap();
        let s = x32.elementary(Elementary::Sin).unwrap();
        assert!((s.coeff(&[3, 0]).re + 1.0 / 6.0).abs() < 1e-6);
        let cast: TruncatedSeries<f64> = s.cast();
        assert!((cast.coeff(&[1, 0]).re - 1.0).abs() < 1e-7);
    }

    fn arb_series(nvars: usize, order: usize) -> impl Strategy<Value = S> {
        let n = S::zeros(nvars, order).unwrap().coeffs().len();
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
            let mut s = S::zeros(nvars, order).unwrap();
            for (slot, (re, im)) in v.into_iter().enumerate() {
                s.coeffs[slot] = c(re, im);
            }
            s
        })
    }

    proptest! {
        #[test]
        fn ring_axioms_modulo_truncation(a in arb_series(2, 4), b in arb_series(2, 4), d in arb_series(2, 4)) {
            let ab = a.mul(&b).unwrap();
            prop_assert!(ab.sub(&b.mul(&a).unwrap()).unwrap().norm_max() < 1e-12);
            let assoc = ab.mul(&d).unwrap().sub(&a.mul(&b.mul(&d).unwrap()).unwrap()).unwrap();
            prop_assert!(assoc.norm_max() < 1e-12);
            let dist = a.mul(&b.add(&d).unwrap()).unwrap().sub(&ab.add(&a.mul(&d).unwrap()).unwrap()).unwrap();
            prop_assert!(dist.norm_max() < 1e-12);
            let add_assoc = a.add(&b).unwrap().add(&d).unwrap().sub(&a.add(&b.add(&d).unwrap()).unwrap()).unwrap();
            prop_assert!(add_assoc.norm_max() < 1e-14);
        }

        #[test]
        fn chain_rule_for_sin(s in arb_series(3, 5)) {
            // d/dX sin(s) == cos(s) * ds/dX up to order - 1
            let lhs = s.elementary(Elementary::Sin).unwrap().derivative(0).unwrap();
            let rhs = s.elementary(Elementary::Cos).unwrap().truncate(4).unwrap()
                .mul(&s.derivative(0).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().norm_max() < 1e-10);
        }
    }
}
