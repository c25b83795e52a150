//! A minimal arithmetic expression language for sweep thresholds.
//!
//! Measurement thresholds in sweep configurations may depend on the relator
//! length, e.g. `11*log(l)/(l*log(2*m-1))`.  The grammar is deliberately
//! tiny: floating literals, the variables `l` and `m`, `+ - * / ^`,
//! parentheses, and the functions `log` (natural), `log2`, `exp`, `sqrt`,
//! `ceil`, `floor`, and two-argument `min`/`max`.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("expression syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("function {0:?} expects {1} argument(s)")]
    Arity(String, usize),
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var(Var),
    Unary(fn(f64) -> f64, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    L,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// A parsed expression in the variables `l` and `m`.  Serializes as its
/// source text; equality is source-text equality.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    root: Node,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.src == other.src
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            bytes: src.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(ExprError::Syntax {
                pos: p.pos,
                msg: "trailing input".into(),
            });
        }
        Ok(Expr {
            src: src.to_string(),
            root,
        })
    }

    pub fn src(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, l: f64, m: f64) -> f64 {
        eval(&self.root, l, m)
    }
}

fn eval(node: &Node, l: f64, m: f64) -> f64 {
    match node {
        Node::Num(x) => *x,
        Node::Var(Var::L) => l,
        Node::Var(Var::M) => m,
        Node::Unary(f, a) => f(eval(a, l, m)),
        Node::Binary(op, a, b) => {
            let (a, b) = (eval(a, l, m), eval(b, l, m));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(b),
                BinOp::Min => a.min(b),
                BinOp::Max => a.max(b),
            }
        }
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ExprError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos: self.pos,
                msg: format!("expected {:?}", b as char),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut node = self.term()?;
        loop {
            if self.eat(b'+') {
                node = Node::Binary(BinOp::Add, node.into(), self.term()?.into());
            } else if self.eat(b'-') {
                node = Node::Binary(BinOp::Sub, node.into(), self.term()?.into());
            } else {
                return Ok(node);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut node = self.unary()?;
        loop {
            if self.eat(b'*') {
                node = Node::Binary(BinOp::Mul, node.into(), self.unary()?.into());
            } else if self.eat(b'/') {
                node = Node::Binary(BinOp::Div, node.into(), self.unary()?.into());
            } else {
                return Ok(node);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Node::Binary(
                BinOp::Sub,
                Node::Num(0.0).into(),
                inner.into(),
            ));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right associative
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, base.into(), exponent.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.eat(b'(');
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                while self
                    .peek()
                    .is_some_and(|b| b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E')
                {
                    self.pos += 1;
                    // allow exponent signs like 1e-3
                    if matches!(self.bytes.get(self.pos - 1), Some(b'e') | Some(b'E'))
                        && matches!(self.peek(), Some(b'+') | Some(b'-'))
                    {
                        self.pos += 1;
                    }
                }
                let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    pos: start,
                    msg: format!("bad number {text:?}"),
                })?;
                self.skip_ws();
                Ok(Node::Num(value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                while self
                    .peek()
                    .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
                {
                    self.pos += 1;
                }
                let name =
                    std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii").to_string();
                self.skip_ws();
                if self.eat(b'(') {
                    let first = self.expr()?;
                    let two_arg = self.eat(b',');
                    let second = if two_arg { Some(self.expr()?) } else { None };
                    self.expect(b')')?;
                    return function(&name, first, second);
                }
                match name.as_str() {
                    "l" => Ok(Node::Var(Var::L)),
                    "m" => Ok(Node::Var(Var::M)),
                    other => Err(ExprError::UnknownIdent(other.to_string())),
                }
            }
            _ => Err(ExprError::Syntax {
                pos: self.pos,
                msg: "expected a number, variable, function, or '('".into(),
            }),
        }
    }
}

fn function(name: &str, first: Node, second: Option<Node>) -> Result<Node, ExprError> {
    let unary: Option<fn(f64) -> f64> = match name {
        "log" => Some(f64::ln),
        "log2" => Some(f64::log2),
        "exp" => Some(f64::exp),
        "sqrt" => Some(f64::sqrt),
        "ceil" => Some(f64::ceil),
        "floor" => Some(f64::floor),
        _ => None,
    };
    if let Some(f) = unary {
        if second.is_some() {
            return Err(ExprError::Arity(name.to_string(), 1));
        }
        return Ok(Node::Unary(f, first.into()));
    }
    let binary = match name {
        "min" => BinOp::Min,
        "max" => BinOp::Max,
        _ => return Err(ExprError::UnknownIdent(name.to_string())),
    };
    let second = second.ok_or_else(|| ExprError::Arity(name.to_string(), 2))?;
    Ok(Node::Binary(binary, first.into(), second.into()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Expr, ExprError> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Expr, D::Error> {
        let s = String::deserialize(deserializer)?;
        Expr::parse(&s).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, l: f64, m: f64) -> f64 {
        Expr::parse(src).unwrap().eval(l, m)
    }

    #[test]
    fn arithmetic() {
        assert_eq!(ev("1 + 2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("(1+2)*3", 0.0, 0.0), 9.0);
        assert_eq!(ev("2^10", 0.0, 0.0), 1024.0);
        assert_eq!(ev("-l + 1", 4.0, 0.0), -3.0);
        assert_eq!(ev("min(3, m)", 0.0, 5.0), 3.0);
        assert_eq!(ev("1e-3", 0.0, 0.0), 1e-3);
    }

    #[test]
    fn small_cancellation_threshold() {
        // 11 log(l) / (l log(2m-1)) at l = 1600, m = 2
        let v = ev("11*log(l)/(l*log(2*m-1))", 1600.0, 2.0);
        let expected = 11.0 * 1600f64.ln() / (1600.0 * 3f64.ln());
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn ceil_of_log() {
        assert_eq!(ev("ceil(0.5*log(l))", (1e3_f64).exp2(), 0.0), f64::ceil(0.5 * (1e3_f64).exp2().ln()));
        assert_eq!(ev("ceil(4)", 0.0, 0.0), 4.0);
        assert_eq!(ev("floor(4.7)", 0.0, 0.0), 4.0);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("foo").is_err());
        assert!(Expr::parse("log(1, 2)").is_err());
        assert!(Expr::parse("min(1)").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let e = Expr::parse("11*log(l)/(l*log(2*m-1))").unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: Expr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }
}
