//! Scalar expressions over named real variables.
//!
//! Every closed-form function a model is built from (reduced dynamics,
//! mass matrix entries, potentials, constraints, parametrizations) is an
//! [`Expr`]. Expressions are immutable trees with shared subtrees, so
//! cloning is cheap and evaluation is safe from many threads at once.
//!
//! Grammar (standard precedence, `^` binds tightest and is
//! right-associative, unary minus binds looser than `^`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | sqrt | abs | sgn | atan
//! ```
//!
//! Numbers are decimal literals with optional exponent (`1`, `0.5`, `.5`,
//! `2.5e-3`). The names `pi` and `e` are builtin constants unless shadowed
//! by a declared variable.

mod diff;
mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised while parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{kind} in `{subexpr}`")]
    Domain { kind: DomainKind, subexpr: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    PowNegativeBase,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "logarithm of a non-positive number",
            DomainKind::SqrtNegative => "square root of a negative number",
            DomainKind::PowNegativeBase => "fractional power of a negative number",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sgn,
    Atan,
}

impl Func {
    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
            Func::Atan => "atan",
        }
    }

    fn apply(self, x: f64) -> Result<f64, DomainKind> {
        Ok(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => {
                if x <= 0.0 {
                    return Err(DomainKind::LogNonPositive);
                }
                x.ln()
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(DomainKind::SqrtNegative);
                }
                x.sqrt()
            }
            Func::Abs => x.abs(),
            Func::Sgn => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Func::Atan => x.atan(),
        })
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

    fn apply(self, a: f64, b: f64) -> Result<f64, DomainKind> {
        Ok(match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b == 0.0 {
                    return Err(DomainKind::DivisionByZero);
                }
                a / b
            }
            BinOp::Pow => {
                if a < 0.0 && b.fract() != 0.0 {
                    return Err(DomainKind::PowNegativeBase);
                }
                if b == 2.0 {
                    a * a
                } else {
                    a.powf(b)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Neg(Arc<Node>),
    Bin(BinOp, Arc<Node>, Arc<Node>),
    Call(Func, Arc<Node>),
}

impl Node {
    fn eval<'a>(&'a self, vals: &[f64]) -> Result<f64, (DomainKind, &'a Node)> {
        match self {
            Node::Const(c) => Ok(*c),
            Node::Var(i) => Ok(vals[*i]),
            Node::Neg(a) => Ok(-a.eval(vals)?),
            Node::Bin(op, a, b) => {
                let x = a.eval(vals)?;
                let y = b.eval(vals)?;
                op.apply(x, y).map_err(|k| (k, self))
            }
            Node::Call(f, a) => {
                let x = a.eval(vals)?;
                f.apply(x).map_err(|k| (k, self))
            }
        }
    }

    fn count(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.count(),
            Node::Bin(_, a, b) => 1 + a.count() + b.count(),
        }
    }

    fn uses_var(&self, i: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(j) => *j == i,
            Node::Neg(a) | Node::Call(_, a) => a.uses_var(i),
            Node::Bin(_, a, b) => a.uses_var(i) || b.uses_var(i),
        }
    }

    fn write(&self, vars: &[String], out: &mut String) {
        match self {
            Node::Const(c) => write_const(*c, out),
            Node::Var(i) => out.push_str(&vars[*i]),
            Node::Neg(a) => {
                out.push_str("(-");
                a.write(vars, out);
                out.push(')');
            }
            Node::Bin(op, a, b) => {
                out.push('(');
                a.write(vars, out);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                b.write(vars, out);
                out.push(')');
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(vars, out);
                out.push(')');
            }
        }
    }
}

fn write_const(c: f64, out: &mut String) {
    use std::fmt::Write;
    let neg = c.is_sign_negative();
    let mag = c.abs();
    if neg {
        out.push_str("(-");
    }
    if mag != 0.0 && !(1e-5..1e16).contains(&mag) {
        let _ = write!(out, "{mag:e}");
    } else {
        let _ = write!(out, "{mag}");
    }
    if neg {
        out.push(')');
    }
}

/// A parsed scalar expression together with its declared variable list.
#[derive(Clone)]
pub struct Expr {
    root: Arc<Node>,
    vars: Arc<[String]>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self} | vars={:?})", &*self.vars)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl Expr {
    /// Parses `source` with the given declared variables.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Expr, ExprError> {
        Self::parse_with_constants(source, vars, &BTreeMap::new())
    }

    /// Like [`Expr::parse`], with extra named constants substituted as literals.
    pub fn parse_with_constants(
        source: &str,
        vars: &[&str],
        constants: &BTreeMap<String, f64>,
    ) -> Result<Expr, ExprError> {
        let names: Arc<[String]> = vars.iter().map(|s| s.to_string()).collect();
        let root = parse::Parser::new(source, &names, constants).parse()?;
        Ok(Expr { root: Arc::new(root), vars: names })
    }

    pub fn constant(value: f64, vars: &[&str]) -> Expr {
        Expr {
            root: Arc::new(Node::Const(value)),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The variable `name`, which must be one of `vars`.
    pub fn variable(name: &str, vars: &[&str]) -> Option<Expr> {
        let i = vars.iter().position(|v| *v == name)?;
        Some(Expr {
            root: Arc::new(Node::Var(i)),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    /// `Some(c)` when the expression is a literal constant.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.root {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        self.var_index(name).is_some_and(|i| self.root.uses_var(i))
    }

    /// Evaluates with positional values, one per declared variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        if values.len() < self.vars.len() {
            return Err(ExprError::UnboundVariable(self.vars[values.len()].clone()));
        }
        self.root.eval(values).map_err(|(kind, node)| {
            let mut subexpr = String::new();
            node.write(&self.vars, &mut subexpr);
            ExprError::Domain { kind, subexpr }
        })
    }

    /// Evaluates with named bindings.
    pub fn evaluate(&self, bindings: &HashMap<String, f64>) -> Result<f64, ExprError> {
        let mut vals = Vec::with_capacity(self.vars.len());
        for v in self.vars.iter() {
            match bindings.get(v) {
                Some(x) => vals.push(*x),
                None if self.depends_on(v) => return Err(ExprError::UnboundVariable(v.clone())),
                None => vals.push(0.0),
            }
        }
        self.eval(&vals)
    }

    /// Symbolic derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Result<Expr, ExprError> {
        let i = self
            .var_index(var)
            .ok_or_else(|| ExprError::UnboundVariable(var.to_string()))?;
        Ok(self.derivative(i))
    }

    /// Symbolic derivative with respect to the `i`-th declared variable.
    pub fn derivative(&self, i: usize) -> Expr {
        Expr { root: diff::derivative(&self.root, i), vars: self.vars.clone() }
    }

    /// Rebuilds the tree with constant folding and the identities
    /// `0 + a`, `1·a`, `a/1`, `a^1`, `−(−a)`.
    pub fn simplify(&self) -> Expr {
        let ids: Vec<Arc<Node>> = (0..self.vars.len()).map(|i| Arc::new(Node::Var(i))).collect();
        Expr { root: diff::substitute(&self.root, &ids), vars: self.vars.clone() }
    }

    /// Substitutes every variable by the matching entry of `replacements`.
    /// The result lives in the variable list of the replacements, which
    /// must all share one list.
    pub fn compose(&self, replacements: &[Expr]) -> Expr {
        assert_eq!(replacements.len(), self.vars.len(), "one replacement per variable");
        let vars = match replacements.first() {
            Some(r) => r.vars.clone(),
            None => self.vars.clone(),
        };
        for r in replacements {
            assert_eq!(&*r.vars, &*vars, "replacements must share a variable list");
        }
        let roots: Vec<Arc<Node>> = replacements.iter().map(|r| r.root.clone()).collect();
        Expr { root: diff::substitute(&self.root, &roots), vars }
    }

    /// Canonical fully parenthesized form. Re-parsing it yields an
    /// expression that evaluates bit-identically.
    pub fn to_canonical(&self) -> String {
        let mut s = String::new();
        self.root.write(&self.vars, &mut s);
        s
    }

    fn combine(&self, other: &Expr, f: impl Fn(Arc<Node>, Arc<Node>) -> Arc<Node>) -> Expr {
        assert_eq!(&*self.vars, &*other.vars, "operands must share a variable list");
        Expr { root: f(self.root.clone(), other.root.clone()), vars: self.vars.clone() }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        self.combine(other, diff::add)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.combine(other, diff::sub)
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        self.combine(other, diff::mul)
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.combine(other, diff::div)
    }

    pub fn neg(&self) -> Expr {
        Expr { root: diff::neg(self.root.clone()), vars: self.vars.clone() }
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr {
            root: diff::mul(Arc::new(Node::Const(c)), self.root.clone()),
            vars: self.vars.clone(),
        }
    }

    /// Sum of a sequence of expressions sharing `vars`; zero when empty.
    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Expr>, vars: &[&str]) -> Expr {
        let mut acc = Expr::constant(0.0, vars);
        for t in terms {
            acc = acc.add(t);
        }
        acc
    }
}
