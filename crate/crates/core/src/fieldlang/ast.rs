use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    Z,
    T,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
            Var::T => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Functions callable from field expressions.
///
/// `re` and `im` take the real and imaginary part of their argument; they
/// exist so that transformed fields (see [`super::radial`]) stay expressible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Re,
    Im,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Re => "re",
            Func::Im => "im",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "re" => Some(Func::Re),
            "im" => Some(Func::Im),
            _ => None,
        }
    }
}

/// Expression tree of a complex scalar field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldExpr {
    /// Non-negative real literal (negation is a separate node).
    Real(f64),
    ImagUnit,
    Param(String),
    Var(Var),
    Neg(Box<FieldExpr>),
    Binary(BinOp, Box<FieldExpr>, Box<FieldExpr>),
    Pow(Box<FieldExpr>, u32),
    Call(Func, Box<FieldExpr>),
}

impl FieldExpr {
    /// Literal node; negative values become `Neg(Real(|v|))` so that the
    /// printed form parses back to the same tree.
    pub fn real(v: f64) -> FieldExpr {
        if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
            FieldExpr::Neg(Box::new(FieldExpr::Real(-v)))
        } else {
            FieldExpr::Real(v)
        }
    }

    pub fn var(v: Var) -> FieldExpr {
        FieldExpr::Var(v)
    }

    pub fn param(name: &str) -> FieldExpr {
        FieldExpr::Param(name.to_string())
    }

    pub fn add(a: FieldExpr, b: FieldExpr) -> FieldExpr {
        FieldExpr::Binary(BinOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: FieldExpr, b: FieldExpr) -> FieldExpr {
        FieldExpr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: FieldExpr, b: FieldExpr) -> FieldExpr {
        FieldExpr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: FieldExpr, b: FieldExpr) -> FieldExpr {
        FieldExpr::Binary(BinOp::Div, Box::new(a), Box::new(b))
    }

    pub fn neg(a: FieldExpr) -> FieldExpr {
        FieldExpr::Neg(Box::new(a))
    }

    pub fn pow(a: FieldExpr, n: u32) -> FieldExpr {
        FieldExpr::Pow(Box::new(a), n)
    }

    pub fn call(f: Func, a: FieldExpr) -> FieldExpr {
        FieldExpr::Call(f, Box::new(a))
    }

    /// `re + i*im` as an expression, omitting zero parts.
    pub fn complex(re: f64, im: f64) -> FieldExpr {
        match (re == 0.0, im == 0.0) {
            (true, true) => FieldExpr::Real(0.0),
            (false, true) => FieldExpr::real(re),
            (true, false) => FieldExpr::mul(FieldExpr::real(im), FieldExpr::ImagUnit),
            (false, false) => FieldExpr::add(
                FieldExpr::real(re),
                FieldExpr::mul(FieldExpr::real(im), FieldExpr::ImagUnit),
            ),
        }
    }

    /// Sums a list of terms left to right; the empty sum is `0`.
    pub fn sum(terms: impl IntoIterator<Item = FieldExpr>) -> FieldExpr {
        terms
            .into_iter()
            .reduce(FieldExpr::add)
            .unwrap_or(FieldExpr::Real(0.0))
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let FieldExpr::Var(v) = e {
                out.insert(*v);
            }
        });
        out
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let FieldExpr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&FieldExpr)) {
        f(self);
        match self {
            FieldExpr::Neg(a) | FieldExpr::Pow(a, _) | FieldExpr::Call(_, a) => a.visit(f),
            FieldExpr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Rebuilds the tree bottom-up, letting `f` replace any leaf.
    pub fn map_leaves(&self, f: &impl Fn(&FieldExpr) -> Option<FieldExpr>) -> FieldExpr {
        match self {
            FieldExpr::Neg(a) => FieldExpr::Neg(Box::new(a.map_leaves(f))),
            FieldExpr::Pow(a, n) => FieldExpr::Pow(Box::new(a.map_leaves(f)), *n),
            FieldExpr::Call(g, a) => FieldExpr::Call(*g, Box::new(a.map_leaves(f))),
            FieldExpr::Binary(op, a, b) => {
                FieldExpr::Binary(*op, Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f)))
            }
            leaf => f(leaf).unwrap_or_else(|| leaf.clone()),
        }
    }

    /// Replaces every occurrence of a variable.
    pub fn substitute_var(&self, var: Var, with: &FieldExpr) -> FieldExpr {
        self.map_leaves(&|e| match e {
            FieldExpr::Var(v) if *v == var => Some(with.clone()),
            _ => None,
        })
    }

    /// Replaces all variables at once (`subs[v.index()]`, `None` keeps it).
    pub fn substitute_vars(&self, subs: &[Option<FieldExpr>; 4]) -> FieldExpr {
        self.map_leaves(&|e| match e {
            FieldExpr::Var(v) => subs[v.index()].clone(),
            _ => None,
        })
    }

    pub fn substitute_param(&self, name: &str, with: &FieldExpr) -> FieldExpr {
        self.map_leaves(&|e| match e {
            FieldExpr::Param(p) if p == name => Some(with.clone()),
            _ => None,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            FieldExpr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            FieldExpr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            FieldExpr::Neg(_) => 3,
            FieldExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            FieldExpr::Real(v) => write!(f, "{v}")?,
            FieldExpr::ImagUnit => write!(f, "i")?,
            FieldExpr::Param(p) => write!(f, "{p}")?,
            FieldExpr::Var(v) => write!(f, "{}", v.name())?,
            FieldExpr::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, 3)?;
            }
            FieldExpr::Binary(op, a, b) => {
                a.write_prec(f, prec)?;
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "{sym}")?;
                b.write_prec(f, prec + 1)?;
            }
            FieldExpr::Pow(a, n) => {
                a.write_prec(f, 4)?;
                write!(f, "^{n}")?;
            }
            FieldExpr::Call(g, a) => {
                write!(f, "{}(", g.name())?;
                a.write_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Canonical printer: minimal parentheses, spaced `+`/`-`, tight `*`, `/`, `^`.
impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
