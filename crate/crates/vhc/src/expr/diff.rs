//! Rewrite-rule differentiation and folding constructors.

use std::sync::Arc;

use super::{BinOp, Func, Node};

fn konst(c: f64) -> Arc<Node> {
    Arc::new(Node::Const(c))
}

fn as_const(n: &Node) -> Option<f64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn is_const(n: &Node, v: f64) -> bool {
    as_const(n) == Some(v)
}

pub(super) fn add(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Bin(BinOp::Add, a, b)),
    }
}

pub(super) fn sub(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x - y),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => Arc::new(Node::Bin(BinOp::Sub, a, b)),
    }
}

pub(super) fn mul(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => konst(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Arc::new(Node::Bin(BinOp::Mul, a, b)),
    }
}

pub(super) fn div(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if y != 0.0 => konst(x / y),
        (Some(x), _) if x == 0.0 && as_const(&b).is_none() => konst(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Node::Bin(BinOp::Div, a, b)),
    }
}

pub(super) fn pow(a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if x.powf(y).is_finite() && !(x < 0.0 && y.fract() != 0.0) => {
            konst(x.powf(y))
        }
        (_, Some(y)) if y == 0.0 => konst(1.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Node::Bin(BinOp::Pow, a, b)),
    }
}

pub(super) fn neg(a: Arc<Node>) -> Arc<Node> {
    match &*a {
        Node::Const(c) => konst(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

fn call(f: Func, a: Arc<Node>) -> Arc<Node> {
    if let Some(x) = as_const(&a) {
        if let Ok(v) = f.apply(x) {
            if v.is_finite() {
                return konst(v);
            }
        }
    }
    Arc::new(Node::Call(f, a))
}

pub(super) fn derivative(n: &Arc<Node>, var: usize) -> Arc<Node> {
    match &**n {
        Node::Const(_) => konst(0.0),
        Node::Var(i) => konst(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(derivative(a, var)),
        Node::Bin(op, a, b) => {
            let da = derivative(a, var);
            let db = derivative(b, var);
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a.clone(), db)),
                BinOp::Div => {
                    if is_const(&db, 0.0) {
                        div(da, b.clone())
                    } else {
                        let num = sub(mul(da, b.clone()), mul(a.clone(), db));
                        div(num, pow(b.clone(), konst(2.0)))
                    }
                }
                BinOp::Pow => {
                    if let Some(c) = as_const(b) {
                        mul(mul(konst(c), pow(a.clone(), konst(c - 1.0))), da)
                    } else if is_const(&db, 0.0) {
                        // exponent free of the variable: b·a^(b−1)·a'
                        mul(mul(b.clone(), pow(a.clone(), sub(b.clone(), konst(1.0)))), da)
                    } else if is_const(&da, 0.0) {
                        // a^b * ln(a) * b'
                        mul(mul(n.clone(), call(Func::Ln, a.clone())), db)
                    } else {
                        let t1 = mul(db, call(Func::Ln, a.clone()));
                        let t2 = div(mul(b.clone(), da), a.clone());
                        mul(n.clone(), add(t1, t2))
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let da = derivative(a, var);
            if is_const(&da, 0.0) {
                return konst(0.0);
            }
            let outer = match f {
                Func::Sin => call(Func::Cos, a.clone()),
                Func::Cos => neg(call(Func::Sin, a.clone())),
                Func::Tan => div(konst(1.0), pow(call(Func::Cos, a.clone()), konst(2.0))),
                Func::Exp => n.clone(),
                Func::Ln => div(konst(1.0), a.clone()),
                Func::Sqrt => div(konst(0.5), n.clone()),
                Func::Abs => call(Func::Sgn, a.clone()),
                Func::Sgn => return konst(0.0),
                Func::Atan => div(konst(1.0), add(konst(1.0), pow(a.clone(), konst(2.0)))),
            };
            mul(outer, da)
        }
    }
}

pub(super) fn substitute(n: &Arc<Node>, repl: &[Arc<Node>]) -> Arc<Node> {
    match &**n {
        Node::Const(_) => n.clone(),
        Node::Var(i) => repl[*i].clone(),
        Node::Neg(a) => neg(substitute(a, repl)),
        Node::Bin(op, a, b) => {
            let a = substitute(a, repl);
            let b = substitute(b, repl);
            match op {
                BinOp::Add => add(a, b),
                BinOp::Sub => sub(a, b),
                BinOp::Mul => mul(a, b),
                BinOp::Div => div(a, b),
                BinOp::Pow => pow(a, b),
            }
        }
        Node::Call(f, a) => call(*f, substitute(a, repl)),
    }
}
