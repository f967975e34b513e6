//! User-supplied scalar functions of the time coordinate u⁰.
//!
//! Sources are parsed once into an [`Expr`] and evaluated with forward-mode
//! dual numbers, so every value comes with its exact first derivative.

mod ast;
mod dual;
mod parser;

use std::collections::BTreeMap;

use thiserror::Error;

pub use ast::{BinOp, EvalError, Expr, Func};
pub use dual::Dual;
pub use parser::{parse, SyntaxError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeFuncError {
    #[error("in `{source_text}`: {error}")]
    Syntax {
        source_text: String,
        error: SyntaxError,
    },
    #[error("in `{source_text}`: parameter `{name}` is not bound")]
    UnboundParameter { source_text: String, name: String },
}

/// A parsed expression with all of its parameters bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFunc {
    source: String,
    expr: Expr,
    params: BTreeMap<String, f64>,
}

impl TimeFunc {
    /// Parses `source` and checks that every parameter it mentions is bound.
    /// Only the parameters actually referenced are retained.
    pub fn new(source: &str, params: &BTreeMap<String, f64>) -> Result<Self, TimeFuncError> {
        let expr = parse(source).map_err(|error| TimeFuncError::Syntax {
            source_text: source.to_string(),
            error,
        })?;
        let mut bound = BTreeMap::new();
        for name in expr.parameters() {
            let v = params.get(&name).ok_or_else(|| TimeFuncError::UnboundParameter {
                source_text: source.to_string(),
                name: name.clone(),
            })?;
            bound.insert(name, *v);
        }
        Ok(Self {
            source: source.to_string(),
            expr,
            params: bound,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            source: format!("{value:?}"),
            expr: Expr::Num(value),
            params: BTreeMap::new(),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, t: f64) -> Result<Dual, EvalError> {
        self.expr.eval_dual(t, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse("sin(t)").unwrap(), Expr::Call(Func::Sin, b(Expr::Time)));
        assert_eq!(
            parse("c*cos(t)").unwrap(),
            Expr::Binary(
                BinOp::Mul,
                b(Expr::Param("c".into())),
                b(Expr::Call(Func::Cos, b(Expr::Time)))
            )
        );
        assert_eq!(
            parse("t^2+3").unwrap(),
            Expr::Binary(BinOp::Add, b(Expr::Pow(b(Expr::Time), 2)), b(Expr::Num(3.0)))
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse("  t ^ 2 +\n3 ").unwrap(), parse("t^2+3").unwrap());
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        assert_eq!(parse("-t^2").unwrap(), Expr::Pow(b(Expr::Neg(b(Expr::Time))), 2));
        assert_eq!(
            parse("-(t^2)").unwrap(),
            Expr::Neg(b(Expr::Pow(b(Expr::Time), 2)))
        );
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expr::Num(0.5));
        assert_eq!(parse("2.").unwrap(), Expr::Num(2.0));
        assert_eq!(parse("3E+2").unwrap(), Expr::Num(300.0));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("sin t").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("t +").unwrap_err();
        assert_eq!(e.offset, 3);
        assert!(e.expected.iter().any(|s| s.contains("number")));
        let e = parse("t^1.5").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("(t").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("t $").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse("1e").unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(parse("1e999").is_err());
        assert!(parse("").is_err());
        assert!(parse("t t").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = "(".repeat(10_000) + "t" + &")".repeat(10_000);
        assert!(parse(&deep).is_err());
        let negs = "-".repeat(10_000) + "t";
        assert!(parse(&negs).is_err());
    }

    #[test]
    fn eval_examples() {
        let p = no_params();
        assert_eq!(parse("sin(t)").unwrap().eval_dual(0.0, &p).unwrap(), Dual::new(0.0, 1.0));
        assert_eq!(parse("t^2+3").unwrap().eval_dual(2.0, &p).unwrap(), Dual::new(7.0, 4.0));
        let mut p = no_params();
        p.insert("c".into(), 2.0);
        let d = parse("c*cos(t)").unwrap().eval_dual(0.0, &p).unwrap();
        assert_eq!(d.value, 2.0);
        assert_eq!(d.deriv, 0.0);
    }

    #[test]
    fn eval_errors() {
        let p = no_params();
        assert_eq!(
            parse("k*t").unwrap().eval_dual(1.0, &p),
            Err(EvalError::UnboundParameter("k".into()))
        );
        assert!(matches!(
            parse("sqrt(t)").unwrap().eval_dual(-1.0, &p),
            Err(EvalError::DomainError { op: "sqrt", .. })
        ));
        assert!(matches!(
            parse("1/t").unwrap().eval_dual(0.0, &p),
            Err(EvalError::DomainError { .. })
        ));
    }

    #[test]
    fn time_func_binds_parameters() {
        let mut p = no_params();
        p.insert("w".into(), 3.0);
        p.insert("unused".into(), 1.0);
        let f = TimeFunc::new("sin(w*t)", &p).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), Dual::new(0.0, 3.0));
        assert!(matches!(
            TimeFunc::new("sin(k*t)", &p),
            Err(TimeFuncError::UnboundParameter { .. })
        ));
        assert!(matches!(TimeFunc::new("sin(", &p), Err(TimeFuncError::Syntax { .. })));
    }

    #[test]
    fn pretty_print_keeps_structure() {
        for src in ["t - (t - 1)", "t / (t * 2)", "(t^2)^3", "-(t + 1)", "--t", "exp(-t) * c"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }

    /// Random well-conditioned expressions: divisors and square-root arguments
    /// are kept away from zero, exponentials are bounded.
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..2.0).prop_map(Expr::Num),
            Just(Expr::Time),
            Just(Expr::Param("c".into())),
        ];
        leaf.prop_recursive(6, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(b(e))),
                inner.clone().prop_map(|e| Expr::Call(Func::Sin, b(e))),
                inner.clone().prop_map(|e| Expr::Call(Func::Cos, b(e))),
                inner
                    .clone()
                    .prop_map(|e| Expr::Call(Func::Exp, b(Expr::Call(Func::Sin, b(e))))),
                inner.clone().prop_map(|e| Expr::Call(
                    Func::Sqrt,
                    b(Expr::Binary(
                        BinOp::Add,
                        b(Expr::Num(1.0)),
                        b(Expr::Pow(b(e), 2))
                    ))
                )),
                (inner.clone(), 0u32..4).prop_map(|(e, k)| Expr::Pow(b(e), k)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Binary(BinOp::Add, b(l), b(r))),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Binary(BinOp::Sub, b(l), b(r))),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Expr::Binary(BinOp::Mul, b(l), b(r))),
                (inner.clone(), inner).prop_map(|(l, r)| Expr::Binary(
                    BinOp::Div,
                    b(l),
                    b(Expr::Binary(BinOp::Add, b(Expr::Num(2.0)), b(Expr::Pow(b(r), 2))))
                )),
            ]
        })
    }

    proptest! {
        #[test]
        fn derivative_matches_central_difference(e in arb_expr(), t in -1.0f64..1.0) {
            let mut p = no_params();
            p.insert("c".into(), 0.7);
            let d = e.eval_dual(t, &p).unwrap();
            prop_assume!(d.value.abs() < 1e3 && d.deriv.abs() < 1e4);
            let h = 1e-4;
            let f = |x: f64| e.eval_dual(x, &p).unwrap().value;
            let fd = (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
            let scale = 1.0f64.max(d.deriv.abs()).max(d.value.abs());
            prop_assert!((d.deriv - fd).abs() <= 1e-6 * scale, "{e}: dual {} fd {}", d.deriv, fd);
        }

        #[test]
        fn parse_print_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let once = parse(&printed).unwrap();
            prop_assert_eq!(parse(&once.to_string()).unwrap(), once.clone());
            prop_assert_eq!(once, e);
        }

        #[test]
        fn parser_never_panics(s in "[-+*/^()tc0-9. a-z]{0,40}") {
            let _ = parse(&s);
        }
    }
}
