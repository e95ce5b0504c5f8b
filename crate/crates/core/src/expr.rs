//! Scalar expressions for user-supplied graph potentials.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "pi" | var | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" ;
//! var     = "x1" | "x2" | "x3" | "x4" | "x" | "y" | "z" ;
//! ```
//!
//! `x`, `y`, `z` alias `x1`, `x2`, `x3`. Exponentiation is right-associative
//! and binds tighter than unary minus on its left (`-x^2 = -(x^2)`).

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl TryFrom<String> for Expr {
    type Error = Error;
    fn try_from(s: String) -> Result<Expr> {
        Expr::parse(&s)
    }
}

impl From<Expr> for String {
    fn from(e: Expr) -> String {
        e.source
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of variables the expression needs (highest index + 1).
    pub fn arity(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Num(_) => 0,
                Node::Var(i) => i + 1,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                    walk(a).max(walk(b))
                }
            }
        }
        walk(&self.root)
    }

    fn check_arity(&self, got: usize) -> Result<()> {
        if self.arity() > got {
            return Err(Error::DimensionMismatch(format!(
                "expression `{}` uses {} variables, {} supplied",
                self.source,
                self.arity(),
                got
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x.len())?;
        let v = eval_f64(&self.root, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("`{}` at {x:?}", self.source)))
        }
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Result<Jet> {
        self.check_arity(x.len())?;
        let first = x
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no variables supplied".into()))?;
        eval_jet(&self.root, x, first.dim(), first.order())
    }
}

fn eval_f64(n: &Node, x: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(i) => x[*i],
        Node::Neg(a) => -eval_f64(a, x),
        Node::Add(a, b) => eval_f64(a, x) + eval_f64(b, x),
        Node::Sub(a, b) => eval_f64(a, x) - eval_f64(b, x),
        Node::Mul(a, b) => eval_f64(a, x) * eval_f64(b, x),
        Node::Div(a, b) => eval_f64(a, x) / eval_f64(b, x),
        Node::Pow(a, b) => match integer_exponent(b) {
            Some(k) => eval_f64(a, x).powi(k),
            None => eval_f64(a, x).powf(eval_f64(b, x)),
        },
        Node::Call(f, a) => {
            let v = eval_f64(a, x);
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
            }
        }
    }
}

fn eval_jet(n: &Node, x: &[Jet], dim: usize, order: usize) -> Result<Jet> {
    Ok(match n {
        Node::Num(v) => Jet::constant(*v, dim, order)?,
        Node::Var(i) => x[*i].clone(),
        Node::Neg(a) => -eval_jet(a, x, dim, order)?,
        Node::Add(a, b) => eval_jet(a, x, dim, order)? + eval_jet(b, x, dim, order)?,
        Node::Sub(a, b) => eval_jet(a, x, dim, order)? - eval_jet(b, x, dim, order)?,
        Node::Mul(a, b) => eval_jet(a, x, dim, order)? * eval_jet(b, x, dim, order)?,
        Node::Div(a, b) => eval_jet(a, x, dim, order)?.checked_div(&eval_jet(b, x, dim, order)?)?,
        Node::Pow(a, b) => {
            let base = eval_jet(a, x, dim, order)?;
            match integer_exponent(b) {
                Some(k) => base.powi(k)?,
                None => (eval_jet(b, x, dim, order)? * base.ln()?).exp(),
            }
        }
        Node::Call(f, a) => {
            let v = eval_jet(a, x, dim, order)?;
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
            }
        }
    })
}

fn integer_exponent(n: &Node) -> Option<i32> {
    let v = match n {
        Node::Num(v) => *v,
        Node::Neg(a) => match a.as_ref() {
            Node::Num(v) => -*v,
            _ => return None,
        },
        _ => return None,
    };
    (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.word(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Parse {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn word(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let func = match word {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "x" | "x1" => return Ok(Node::Var(0)),
            "y" | "x2" => return Ok(Node::Var(1)),
            "z" | "x3" => return Ok(Node::Var(2)),
            "x4" => return Ok(Node::Var(3)),
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unknown identifier `{word}`"),
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.error("expected `(` after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.error("expected `)`"));
        }
        Ok(Node::Call(func, Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(eval("-2 ^ 2", &[]), -4.0);
        assert_eq!(eval("8 / 4 / 2", &[]), 1.0);
        assert_eq!(eval("10 - 3 - 2", &[]), 5.0);
        assert_eq!(eval("2 ^ -1", &[]), 0.5);
        assert_eq!(eval("1.5e2 + .5", &[]), 150.5);
    }

    #[test]
    fn variables_and_functions() {
        let v = eval("0.1*sin(x1)*sin(x2) + cos(y)^2 - exp(z)", &[0.3, 1.2, -0.4]);
        let want = 0.1 * 0.3f64.sin() * 1.2f64.sin() + 1.2f64.cos().powi(2) - (-0.4f64).exp();
        assert!((v - want).abs() < 1e-15);
        assert_eq!(eval("x4", &[0.0, 0.0, 0.0, 7.0]), 7.0);
        assert!((eval("sin(pi/2)", &[]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_offsets() {
        assert!(matches!(Expr::parse("1 +"), Err(Error::Parse { offset: 3, .. })));
        assert!(matches!(Expr::parse("foo(1)"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(Expr::parse("(1"), Err(Error::Parse { .. })));
        assert!(matches!(Expr::parse("sin 1"), Err(Error::Parse { .. })));
        assert!(matches!(Expr::parse("1 2"), Err(Error::Parse { .. })));
        let e = Expr::parse("x3").unwrap();
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn jet_evaluation_agrees_with_scalar() {
        let e = Expr::parse("sin(x)*cos(2*y) + x^3/6 + (1 + y^2)^0.5").unwrap();
        let p = [0.4, -0.7];
        let jets = Jet::variables(&p, 4).unwrap();
        let j = e.eval_jet(&jets).unwrap();
        assert!((j.value() - e.eval(&p).unwrap()).abs() < 1e-14);
        // ∂x³ of sin(x)cos(2y) + x³/6 is -cos(x)cos(2y) + 1
        let want = -(0.4f64.cos()) * (-1.4f64).cos() + 1.0;
        assert!((j.partial(&[3, 0]).unwrap() - want).abs() < 1e-13);
    }
}
