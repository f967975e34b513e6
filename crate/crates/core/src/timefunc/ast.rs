use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::dual::Dual;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 4] = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    /// Binding level: 0 for additive, 1 for multiplicative.
    fn level(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 0,
            BinOp::Mul | BinOp::Div => 1,
        }
    }
}

/// Expression tree for a scalar function of the time coordinate `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Time,
    Param(String),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Integer power with a non-negative constant exponent.
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
    #[error("domain error: {op} of {value}")]
    DomainError { op: &'static str, value: f64 },
}

impl Expr {
    /// Names of all parameters referenced by the expression.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Time => {}
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }

    /// Value and exact first derivative at `t`.
    pub fn eval_dual(&self, t: f64, params: &BTreeMap<String, f64>) -> Result<Dual, EvalError> {
        let out = match self {
            Expr::Num(v) => Dual::constant(*v),
            Expr::Time => Dual::variable(t),
            Expr::Param(p) => Dual::constant(
                *params
                    .get(p)
                    .ok_or_else(|| EvalError::UnboundParameter(p.clone()))?,
            ),
            Expr::Neg(e) => -e.eval_dual(t, params)?,
            Expr::Call(f, e) => {
                let x = e.eval_dual(t, params)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => {
                        if x.value < 0.0 || (x.value == 0.0 && x.deriv != 0.0) {
                            return Err(EvalError::DomainError {
                                op: "sqrt",
                                value: x.value,
                            });
                        }
                        x.sqrt()
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_dual(t, params)?;
                let b = r.eval_dual(t, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value == 0.0 {
                            return Err(EvalError::DomainError {
                                op: "division",
                                value: b.value,
                            });
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(b, k) => b.eval_dual(t, params)?.powi(*k),
        };
        if !out.is_finite() {
            return Err(EvalError::DomainError {
                op: "non-finite result",
                value: out.value,
            });
        }
        Ok(out)
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.level(),
            Expr::Pow(..) => 2,
            _ => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Time => write!(f, "t"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_at(f, 3)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.write_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Binary(op, l, r) => {
                l.write_at(f, op.level())?;
                write!(f, " {} ", op.symbol())?;
                r.write_at(f, op.level() + 1)
            }
            Expr::Pow(b, k) => {
                b.write_at(f, 3)?;
                write!(f, "^{k}")
            }
        }
    }
}

/// Pretty-printing emits the minimal parenthesisation that parses back to the
/// same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
