//! Textual map definitions and their evaluation with third-order jets.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?            // right-associative
//! atom    := number | 'x' | 'alpha' | 'beta' | 'pi'
//!          | ('sin' | 'cos') '(' expr ')' | '(' expr ')'
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```

mod jet;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

pub use jet::Jet3;
pub use parse::parse_map_expr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    Beta,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Param::Alpha),
            "beta" => Ok(Param::Beta),
            other => Err(Error::InvalidArgument(format!(
                "parameter must be `alpha` or `beta`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Pi,
    Var,
    Param(Param),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn depends_on_x(&self) -> bool {
        match self {
            Node::Var => true,
            Node::Const(_) | Node::Pi | Node::Param(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on_x(),
            Node::Binary(_, a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }

    fn collect_params(&self, out: &mut BTreeSet<Param>) {
        match self {
            Node::Param(p) => {
                out.insert(*p);
            }
            Node::Const(_) | Node::Pi | Node::Var => {}
            Node::Neg(a) | Node::Call(_, a) => a.collect_params(out),
            Node::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    fn substitute_x(&self, inner: &Node) -> Node {
        match self {
            Node::Var => inner.clone(),
            Node::Const(_) | Node::Pi | Node::Param(_) => self.clone(),
            Node::Neg(a) => Node::Neg(Box::new(a.substitute_x(inner))),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.substitute_x(inner))),
            Node::Binary(op, a, b) => Node::Binary(
                *op,
                Box::new(a.substitute_x(inner)),
                Box::new(b.substitute_x(inner)),
            ),
        }
    }

    fn value<T: Scalar>(&self, env: &Env<T>) -> Result<T> {
        Ok(match self {
            Node::Const(c) => T::lit(*c),
            Node::Pi => T::PI(),
            Node::Var => env.x,
            Node::Param(Param::Alpha) => env.alpha,
            Node::Param(Param::Beta) => env.beta,
            Node::Neg(a) => -a.value(env)?,
            Node::Call(Func::Sin, a) => a.value(env)?.sin(),
            Node::Call(Func::Cos, a) => a.value(env)?.cos(),
            Node::Binary(op, a, b) => {
                let l = a.value(env)?;
                let r = b.value(env)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == T::zero() {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        l / r
                    }
                    BinOp::Pow => pow_value(l, r, b)?,
                }
            }
        })
    }

    fn jet<T: Scalar>(&self, env: &Env<T>) -> Result<Jet3<T>> {
        Ok(match self {
            Node::Const(c) => Jet3::constant(T::lit(*c)),
            Node::Pi => Jet3::constant(T::PI()),
            Node::Var => Jet3::variable(env.x),
            Node::Param(Param::Alpha) => Jet3::constant(env.alpha),
            Node::Param(Param::Beta) => Jet3::constant(env.beta),
            Node::Neg(a) => -a.jet(env)?,
            Node::Call(Func::Sin, a) => a.jet(env)?.sin(),
            Node::Call(Func::Cos, a) => a.jet(env)?.cos(),
            Node::Binary(op, a, b) => {
                let l = a.jet(env)?;
                let r = b.jet(env)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l * r.recip()?,
                    BinOp::Pow => l.pow(&r)?,
                }
            }
        })
    }
}

fn pow_value<T: Scalar>(base: T, exponent: T, exponent_node: &Node) -> Result<T> {
    if base > T::zero() {
        return Ok(base.powf(exponent));
    }
    if exponent_node.depends_on_x() {
        return Err(Error::Domain(format!(
            "non-positive base {base} with x-dependent exponent"
        )));
    }
    if base == T::zero() {
        if exponent < T::zero() {
            return Err(Error::Domain("0 raised to a negative power".into()));
        }
        return Ok(base.powf(exponent));
    }
    if exponent.fract() != T::zero() {
        return Err(Error::Domain(format!(
            "negative base {base} with fractional exponent {exponent}"
        )));
    }
    Ok(base.powf(exponent))
}

struct Env<T> {
    x: T,
    alpha: T,
    beta: T,
}

/// A parsed map definition in the variable `x` with optional parameters
/// `alpha` and `beta`.
#[derive(Debug, Clone)]
pub struct MapExpr {
    root: Node,
    source_text: String,
}

impl MapExpr {
    pub(crate) fn from_parts(root: Node, source_text: String) -> Self {
        Self { root, source_text }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Parameters referenced anywhere in the expression.
    pub fn params(&self) -> BTreeSet<Param> {
        let mut out = BTreeSet::new();
        self.root.collect_params(&mut out);
        out
    }

    /// `self(inner(x))`.
    pub fn compose(&self, inner: &MapExpr) -> MapExpr {
        let root = self.root.substitute_x(&inner.root);
        let source_text = root_to_string(&root);
        MapExpr { root, source_text }
    }

    /// Value only.
    pub fn eval<T: Scalar>(&self, x: T, alpha: T, beta: T) -> Result<T> {
        let v = self.root.value(&Env { x, alpha, beta })?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: format!("in `{}` at x = {x}", self.source_text),
            });
        }
        Ok(v)
    }

    /// Value and first three derivatives with respect to `x`.
    pub fn eval_jet<T: Scalar>(&self, x: T, alpha: T, beta: T) -> Result<Jet3<T>> {
        let j = self.root.jet(&Env { x, alpha, beta })?;
        if !j.is_finite() {
            return Err(Error::NonFinite {
                what: format!("jet of `{}` at x = {x}", self.source_text),
            });
        }
        Ok(j)
    }
}

/// Structural equality; the source spelling is ignored.
impl PartialEq for MapExpr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Serialize for MapExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source_text)
    }
}

/// Canonical, fully parenthesised rendering that parses back to the same tree.
impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn root_to_string(root: &Node) -> String {
    struct W<'a>(&'a Node);
    impl fmt::Display for W<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(self.0, f)
        }
    }
    W(root).to_string()
}

fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) => write!(f, "{c}"),
        Node::Pi => f.write_str("pi"),
        Node::Var => f.write_str("x"),
        Node::Param(p) => f.write_str(p.name()),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            f.write_str(match func {
                Func::Sin => "sin(",
                Func::Cos => "cos(",
            })?;
            write_node(a, f)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(a, f)?;
            write!(f, " {} ", op.symbol())?;
            write_node(b, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn identity_jet() {
        let e = parse_map_expr("x").unwrap();
        assert!(e.params().is_empty());
        assert_eq!(e.eval_jet(3.0, 0.0, 0.0).unwrap(), Jet3::new(3.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn square_jet() {
        let e = parse_map_expr("x^2").unwrap();
        assert_eq!(e.eval_jet(3.0, 0.0, 0.0).unwrap(), Jet3::new(9.0, 6.0, 2.0, 0.0));
    }

    #[test]
    fn sine_map_jet_at_half() {
        // F = 0.4 sin(pi x) + x + 1: F(1/2) = 1.9, F' = 1, F'' = -0.4 pi^2, F''' = 0.
        let e = parse_map_expr("0.4*sin(pi*x)+x+1").unwrap();
        let j = e.eval_jet(0.5, 0.0, 0.0).unwrap();
        let pi = std::f64::consts::PI;
        assert!(close(j.v0, 1.9, 1e-15));
        assert!(close(j.v1, 1.0, 1e-15));
        assert!(close(j.v2, -0.4 * pi * pi, 1e-14));
        assert!((j.v2 + 3.947_841_76).abs() < 1e-8);
        assert!(j.v3.abs() < 1e-14);

        // Independent check by central differences with h = 1e-4.
        let h = 1e-4;
        let f = |x: f64| e.eval(x, 0.0, 0.0).unwrap();
        let fd2 = (f(0.5 + h) - 2.0 * f(0.5) + f(0.5 - h)) / (h * h);
        assert!((fd2 - j.v2).abs() < 1e-5);
    }

    #[test]
    fn exponent_family_with_both_params() {
        let e = parse_map_expr("((sin(pi*x)+1.1)/2)^(alpha+x+beta)").unwrap();
        assert_eq!(e.params().into_iter().collect::<Vec<_>>(), vec![Param::Alpha, Param::Beta]);
        let j = e.eval_jet(0.3, 0.2, 0.1).unwrap();
        let base = ((std::f64::consts::PI * 0.3).sin() + 1.1) / 2.0;
        assert!(close(j.v0, base.powf(0.6), 1e-14));
    }

    #[test]
    fn evaluation_errors() {
        let e = parse_map_expr("1/(x-1)").unwrap();
        assert!(matches!(e.eval(1.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(e.eval_jet(1.0, 0.0, 0.0), Err(Error::Domain(_))));
        let e = parse_map_expr("x^(0-1)").unwrap();
        assert!(matches!(e.eval(0.0, 0.0, 0.0), Err(Error::Domain(_))));
        let e = parse_map_expr("x^x").unwrap();
        assert!(matches!(e.eval(-1.0, 0.0, 0.0), Err(Error::Domain(_))));
        // Overflow surfaces as a non-finite error.
        let e = parse_map_expr("10^(x*1000)").unwrap();
        assert!(matches!(e.eval(1.0, 0.0, 0.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn compose_substitutes_variable() {
        let f = parse_map_expr("x^2+1").unwrap();
        let g = parse_map_expr("2*x").unwrap();
        let fg = f.compose(&g);
        assert_eq!(fg.eval(3.0, 0.0, 0.0).unwrap(), 37.0);
        assert_eq!(parse_map_expr(fg.source_text()).unwrap(), fg);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "0.4*sin(pi*x)+x+beta",
            "-x^2",
            "(-x)^2",
            "2^-x^3",
            "a",
        ]
        .iter()
        .filter_map(|s| parse_map_expr(s).ok())
        {
            let again = parse_map_expr(&src.to_string()).unwrap();
            assert_eq!(again, src, "{src}");
        }
    }

    #[test]
    fn f32_evaluation() {
        let e = parse_map_expr("0.4*sin(pi*x)+x+beta").unwrap();
        let v: f32 = e.eval(0.5_f32, 0.0, 1.0).unwrap();
        assert!((v - 1.9).abs() < 1e-6);
    }
}
