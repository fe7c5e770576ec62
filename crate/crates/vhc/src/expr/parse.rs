use std::collections::BTreeMap;
use std::sync::Arc;

use super::{BinOp, ExprError, Func, Node};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(u8),
    LParen,
    RParen,
    End,
}

pub(super) struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
    vars: &'a [String],
    constants: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str, vars: &'a [String], constants: &'a BTreeMap<String, f64>) -> Self {
        Parser { src, pos: 0, tok: Tok::End, tok_start: 0, vars, constants }
    }

    pub(super) fn parse(mut self) -> Result<Node, ExprError> {
        self.advance()?;
        let node = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.syntax("expected operator or end of input"));
        }
        Ok(node)
    }

    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.tok_start, message: message.to_string() }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        self.tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => self.number()?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(self.syntax(&format!("unexpected character '{ch}'")));
            }
        };
        Ok(())
    }

    fn number(&mut self) -> Result<Tok, ExprError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if p < bytes.len() && bytes[p].is_ascii_digit() {
                while p < bytes.len() && bytes[p].is_ascii_digit() {
                    p += 1;
                }
                self.pos = p;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| self.syntax(&format!("malformed number '{text}'")))
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ (b'+' | b'-')) = self.tok {
            self.advance()?;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ (b'*' | b'/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.tok {
            Tok::Op(b'-') => {
                self.advance()?;
                Ok(Node::Neg(Arc::new(self.unary()?)))
            }
            Tok::Op(b'+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.tok == Tok::Op(b'^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Arc::new(base), Arc::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Node::Const(v))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.syntax("expected ')'"));
                }
                self.advance()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.tok_start;
                self.advance()?;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if let Some(c) = self.constants.get(&name) {
                    return Ok(Node::Const(*c));
                }
                if let Some(f) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.syntax(&format!("expected '(' after function name '{name}'")));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return Err(self.syntax("expected ')'"));
                    }
                    self.advance()?;
                    return Ok(Node::Call(f, Arc::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(std::f64::consts::PI)),
                    "e" => Ok(Node::Const(std::f64::consts::E)),
                    _ => Err(ExprError::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::End => Err(self.syntax("expected expression, found end of input")),
            Tok::RParen => Err(self.syntax("expected expression, found ')'")),
            Tok::Op(c) => Err(self.syntax(&format!("expected expression, found '{}'", c as char))),
        }
    }
}
