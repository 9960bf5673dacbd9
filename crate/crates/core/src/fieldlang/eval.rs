//! Evaluation of field expressions over complex scalars and over truncated
//! Taylor series (jets).

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use super::ast::{BinOp, FieldExpr, Func, Var};
use crate::scalar::{cfinite, Real};
use crate::taylor::{Elementary, SeriesError, TruncatedSeries, MAX_ORDER};

/// Named real parameter values.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite value")]
    NonFinite,
    #[error("point has {got} coordinates, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("parameter '{0}' has no value")]
    UnboundParameter(String),
    #[error("unknown parameter override '{0}'")]
    UnknownParameter(String),
    #[error("variable '{0}' is not bound")]
    UnboundVariable(&'static str),
    #[error("series order {0} exceeds the maximum {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Value domain an expression can be evaluated in.
pub trait Algebra<T: Real> {
    type Value: Clone;

    fn constant(&self, c: Complex<T>) -> Result<Self::Value, EvalError>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, EvalError>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value, EvalError>;
    fn powi(&self, a: &Self::Value, n: u32) -> Result<Self::Value, EvalError>;
    fn apply(&self, f: Func, a: &Self::Value) -> Result<Self::Value, EvalError>;
}

/// Plain complex arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarAlgebra;

fn checked<T: Real>(z: Complex<T>) -> Result<Complex<T>, EvalError> {
    if cfinite(z) {
        Ok(z)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl<T: Real> Algebra<T> for ScalarAlgebra {
    type Value = Complex<T>;

    fn constant(&self, c: Complex<T>) -> Result<Complex<T>, EvalError> {
        Ok(c)
    }
    fn add(&self, a: &Complex<T>, b: &Complex<T>) -> Result<Complex<T>, EvalError> {
        checked(a + b)
    }
    fn sub(&self, a: &Complex<T>, b: &Complex<T>) -> Result<Complex<T>, EvalError> {
        checked(a - b)
    }
    fn mul(&self, a: &Complex<T>, b: &Complex<T>) -> Result<Complex<T>, EvalError> {
        checked(a * b)
    }
    fn div(&self, a: &Complex<T>, b: &Complex<T>) -> Result<Complex<T>, EvalError> {
        if b.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        checked(a / b)
    }
    fn neg(&self, a: &Complex<T>) -> Result<Complex<T>, EvalError> {
        Ok(-a)
    }
    fn powi(&self, a: &Complex<T>, n: u32) -> Result<Complex<T>, EvalError> {
        let mut acc = Complex::one();
        for _ in 0..n {
            acc = acc * a;
        }
        checked(acc)
    }
    fn apply(&self, f: Func, a: &Complex<T>) -> Result<Complex<T>, EvalError> {
        checked(match f {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Re => Complex::new(a.re, T::zero()),
            Func::Im => Complex::new(a.im, T::zero()),
        })
    }
}

/// Truncated Taylor series arithmetic of a fixed shape.
#[derive(Debug, Clone, Copy)]
pub struct SeriesAlgebra {
    pub nvars: usize,
    pub order: usize,
}

impl<T: Real> Algebra<T> for SeriesAlgebra {
    type Value = TruncatedSeries<T>;

    fn constant(&self, c: Complex<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(TruncatedSeries::constant(c, self.nvars, self.order)?)
    }
    fn add(&self, a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(a.add(b)?)
    }
    fn sub(&self, a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(a.sub(b)?)
    }
    fn mul(&self, a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(a.mul(b)?)
    }
    fn div(&self, a: &TruncatedSeries<T>, b: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        if b.constant_term().is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        a.div(b).map_err(|e| match e {
            SeriesError::DivisionNearZero { .. } => EvalError::DivisionByZero,
            other => EvalError::Series(other),
        })
    }
    fn neg(&self, a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(a.neg())
    }
    fn powi(&self, a: &TruncatedSeries<T>, n: u32) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(a.powi(n)?)
    }
    fn apply(&self, f: Func, a: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, EvalError> {
        Ok(match f {
            Func::Sin => a.elementary(Elementary::Sin)?,
            Func::Cos => a.elementary(Elementary::Cos)?,
            Func::Exp => a.elementary(Elementary::Exp)?,
            Func::Re => a.real_part(),
            Func::Im => a.imag_part(),
        })
    }
}

/// Evaluates `expr` with variables bound to `vars[var.index()]`.
pub fn eval_expr<T: Real, A: Algebra<T>>(
    expr: &FieldExpr,
    alg: &A,
    vars: &[Option<A::Value>; 4],
    params: &Params,
) -> Result<A::Value, EvalError> {
    let rec = |e: &FieldExpr| eval_expr(e, alg, vars, params);
    match expr {
        FieldExpr::Real(v) => alg.constant(Complex::new(T::lit(*v), T::zero())),
        FieldExpr::ImagUnit => alg.constant(Complex::new(T::zero(), T::one())),
        FieldExpr::Param(p) => {
            let v = params.get(p).ok_or_else(|| EvalError::UnboundParameter(p.clone()))?;
            alg.constant(Complex::new(T::lit(*v), T::zero()))
        }
        FieldExpr::Var(v) => vars[v.index()]
            .clone()
            .ok_or(EvalError::UnboundVariable(v.name())),
        FieldExpr::Neg(a) => alg.neg(&rec(a)?),
        FieldExpr::Binary(op, a, b) => {
            let (a, b) = (rec(a)?, rec(b)?);
            match op {
                BinOp::Add => alg.add(&a, &b),
                BinOp::Sub => alg.sub(&a, &b),
                BinOp::Mul => alg.mul(&a, &b),
                BinOp::Div => alg.div(&a, &b),
            }
        }
        FieldExpr::Pow(a, n) => alg.powi(&rec(a)?, *n),
        FieldExpr::Call(f, a) => alg.apply(*f, &rec(a)?),
    }
}

#[allow(dead_code)]
pub(crate) fn var_order(dim: usize, time: bool) -> Vec<Var> {
    let mut v = vec![Var::X, Var::Y];
    if dim == 3 {
        v.push(Var::Z);
    }
    if time {
        v.push(Var::T);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(Complex<f64>),
    Var(usize),
    Neg,
    Bin(BinOp),
    Pow(u32),
    Call(Func),
}

/// Expression flattened to postfix form with parameters folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    arity: usize,
    depth: usize,
}

impl Program {
    /// Compiles `expr`; variables map to positions through `slots`
    /// (`slots[var.index()]`), parameters are read from `params`.
    pub fn compile(expr: &FieldExpr, slots: [Option<usize>; 4], params: &Params) -> Result<Program, EvalError> {
        let mut ops = Vec::new();
        emit(expr, &slots, params, &mut ops)?;
        let arity = slots.iter().flatten().map(|s| s + 1).max().unwrap_or(0);
        let (mut depth, mut cur) = (0usize, 0usize);
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => cur += 1,
                Op::Bin(_) => cur -= 1,
                _ => {}
            }
            depth = depth.max(cur);
        }
        Ok(Program { ops, arity, depth })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn run<T: Real, A: Algebra<T>>(&self, alg: &A, vars: &[A::Value]) -> Result<A::Value, EvalError> {
        if vars.len() != self.arity {
            return Err(EvalError::Arity { expected: self.arity, got: vars.len() });
        }
        let mut stack: Vec<A::Value> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => alg.constant(Complex::new(T::lit(c.re), T::lit(c.im)))?,
                Op::Var(i) => vars[*i].clone(),
                Op::Neg => alg.neg(&stack.pop().expect("operand"))?,
                Op::Pow(n) => alg.powi(&stack.pop().expect("operand"), *n)?,
                Op::Call(f) => alg.apply(*f, &stack.pop().expect("operand"))?,
                Op::Bin(op) => {
                    let b = stack.pop().expect("operand");
                    let a = stack.pop().expect("operand");
                    match op {
                        BinOp::Add => alg.add(&a, &b)?,
                        BinOp::Sub => alg.sub(&a, &b)?,
                        BinOp::Mul => alg.mul(&a, &b)?,
                        BinOp::Div => alg.div(&a, &b)?,
                    }
                }
            };
            stack.push(v);
        }
        Ok(stack.pop().expect("program leaves one value"))
    }

    pub fn eval<T: Real>(&self, point: &[T]) -> Result<Complex<T>, EvalError> {
        let vars: Vec<Complex<T>> = point.iter().map(|&p| Complex::new(p, T::zero())).collect();
        self.run(&ScalarAlgebra, &vars)
    }

    /// Taylor expansion about `point` truncated at `order`.
    pub fn jet<T: Real>(&self, point: &[T], order: usize) -> Result<TruncatedSeries<T>, EvalError> {
        if order > MAX_ORDER {
            return Err(EvalError::OrderTooHigh(order));
        }
        if point.len() != self.arity {
            return Err(EvalError::Arity { expected: self.arity, got: point.len() });
        }
        let n = point.len();
        let vars = point
            .iter()
            .enumerate()
            .map(|(i, &p)| TruncatedSeries::seed_variable(i, p, n, order))
            .collect::<Result<Vec<_>, _>>()?;
        self.run(&SeriesAlgebra { nvars: n, order }, &vars)
    }
}

fn emit(expr: &FieldExpr, slots: &[Option<usize>; 4], params: &Params, ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match expr {
        FieldExpr::Real(v) => ops.push(Op::Const(Complex::new(*v, 0.0))),
        FieldExpr::ImagUnit => ops.push(Op::Const(Complex::new(0.0, 1.0))),
        FieldExpr::Param(p) => {
            let v = params.get(p).ok_or_else(|| EvalError::UnboundParameter(p.clone()))?;
            ops.push(Op::Const(Complex::new(*v, 0.0)));
        }
        FieldExpr::Var(v) => {
            let slot = slots[v.index()].ok_or(EvalError::UnboundVariable(v.name()))?;
            ops.push(Op::Var(slot));
        }
        FieldExpr::Neg(a) => {
            emit(a, slots, params, ops)?;
            ops.push(Op::Neg);
        }
        FieldExpr::Pow(a, n) => {
            emit(a, slots, params, ops)?;
            ops.push(Op::Pow(*n));
        }
        FieldExpr::Call(f, a) => {
            emit(a, slots, params, ops)?;
            ops.push(Op::Call(*f));
        }
        FieldExpr::Binary(op, a, b) => {
            emit(a, slots, params, ops)?;
            emit(b, slots, params, ops)?;
            ops.push(Op::Bin(*op));
        }
    }
    Ok(())
}
