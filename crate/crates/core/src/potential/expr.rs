//! A small arithmetic expression language in one variable `x`.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 'pi' | 'e' | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp ln sqrt tanh sech sinh cosh abs step pow`.
//! `step(a)` is the Heaviside function with `step(0) = 1`.

use crate::error::{Error, Result};
use crate::numerics::taylor::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Sech,
    Sinh,
    Cosh,
    Abs,
    Step,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "tanh" => (Func::Tanh, 1),
            "sech" => (Func::Sech, 1),
            "sinh" => (Func::Sinh, 1),
            "cosh" => (Func::Cosh, 1),
            "abs" => (Func::Abs, 1),
            "step" | "heaviside" => (Func::Step, 1),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression, evaluable as a plain value or as a Taylor jet.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser { s: source.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_f64(&self.root, x)
    }

    pub fn eval_jet(&self, x: f64, order: usize) -> Jet {
        eval_jet(&self.root, &Jet::variable(x, order))
    }
}

fn eval_f64(n: &Node, x: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Neg(a) => -eval_f64(a, x),
        Node::Add(a, b) => eval_f64(a, x) + eval_f64(b, x),
        Node::Sub(a, b) => eval_f64(a, x) - eval_f64(b, x),
        Node::Mul(a, b) => eval_f64(a, x) * eval_f64(b, x),
        Node::Div(a, b) => eval_f64(a, x) / eval_f64(b, x),
        Node::Pow(a, b) => pow_f64(eval_f64(a, x), eval_f64(b, x)),
        Node::Call(f, args) => {
            let a = eval_f64(&args[0], x);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Tanh => a.tanh(),
                Func::Sech => {
                    let t = a.abs();
                    2.0 * (-t).exp() / (1.0 + (-2.0 * t).exp())
                }
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Abs => a.abs(),
                Func::Step => {
                    if a >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Pow => pow_f64(a, eval_f64(&args[1], x)),
            }
        }
    }
}

fn pow_f64(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() < 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

fn eval_jet(n: &Node, x: &Jet) -> Jet {
    let order = x.order();
    match n {
        Node::Num(v) => Jet::constant(*v, order),
        Node::X => x.clone(),
        Node::Neg(a) => eval_jet(a, x).neg(),
        Node::Add(a, b) => eval_jet(a, x).add(&eval_jet(b, x)),
        Node::Sub(a, b) => eval_jet(a, x).sub(&eval_jet(b, x)),
        Node::Mul(a, b) => eval_jet(a, x).mul(&eval_jet(b, x)),
        Node::Div(a, b) => eval_jet(a, x).div(&eval_jet(b, x)),
        Node::Pow(a, b) => eval_jet(a, x).powf(&eval_jet(b, x)),
        Node::Call(f, args) => {
            let a = eval_jet(&args[0], x);
            match f {
                Func::Sin => a.sin_cos().0,
                Func::Cos => a.sin_cos().1,
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Tanh => a.tanh(),
                Func::Sech => a.sech(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Abs => a.abs(),
                Func::Step => Jet::constant(if a.value() >= 0.0 { 1.0 } else { 0.0 }, order),
                Func::Pow => a.powf(&eval_jet(&args[1], x)),
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("expression column {}: {}", self.pos + 1, msg))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
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
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or_default();
                match name {
                    "x" => Ok(Node::X),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => {
                        let (func, arity) =
                            Func::from_name(name).ok_or_else(|| self.error(&format!("unknown identifier '{name}'")))?;
                        if !self.eat(b'(') {
                            return Err(self.error("expected '(' after function name"));
                        }
                        let mut args = vec![self.expr()?];
                        while self.eat(b',') {
                            args.push(self.expr()?);
                        }
                        if !self.eat(b')') {
                            return Err(self.error("expected ')'"));
                        }
                        if args.len() != arity {
                            return Err(self.error(&format!("'{name}' takes {arity} argument(s)")));
                        }
                        Ok(Node::Call(func, args))
                    }
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.s;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < s.len() && s[self.pos].is_ascii_digit() {
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Node::Num).map_err(|_| self.error(&format!("bad number '{text}'")))
    }
}
