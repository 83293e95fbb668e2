//! A small arithmetic language for source terms, evaluated at cell centres.
//!
//! Grammar (usual precedence, `^` right-associative, comparisons yield 1 or 0):
//!
//! ```text
//! expr  := sum [("<" | "<=" | ">" | ">=") sum]
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary (("*" | "/") unary)*
//! unary := ("-" | "+") unary | power
//! power := atom ["^" unary]
//! atom  := number | "x" | "y" | "r" | "pi" | "e" | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `r` is `sqrt(x² + y²)`. So `1 + 10*((x-0.5)^2 + y^2 < 0.1^2)` is a disk
//! bump of height 10.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    X,
    Y,
    R,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sqrt,
    Abs,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Atan,
    Atan2,
    Min,
    Max,
    Pow,
    Floor,
    Ceil,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize, Option<usize>)> {
        use Func::*;
        // (function, minimum arity, maximum arity)
        Some(match name {
            "sqrt" => (Sqrt, 1, Some(1)),
            "abs" => (Abs, 1, Some(1)),
            "exp" => (Exp, 1, Some(1)),
            "ln" | "log" => (Ln, 1, Some(1)),
            "sin" => (Sin, 1, Some(1)),
            "cos" => (Cos, 1, Some(1)),
            "tan" => (Tan, 1, Some(1)),
            "atan" => (Atan, 1, Some(1)),
            "atan2" => (Atan2, 2, Some(2)),
            "min" => (Min, 2, None),
            "max" => (Max, 2, None),
            "pow" => (Pow, 2, Some(2)),
            "floor" => (Floor, 1, Some(1)),
            "ceil" => (Ceil, 1, Some(1)),
            _ => return None,
        })
    }
}

/// A parsed expression in `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Expr { root, source: src.to_string() })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        eval(&self.root, x, y)
    }
}

fn eval(n: &Node, x: f64, y: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Y => y,
        Node::R => x.hypot(y),
        Node::Neg(a) => -eval(a, x, y),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, y), eval(b, x, y));
            let flag = |c: bool| if c { 1.0 } else { 0.0 };
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => a.powf(b),
                Op::Lt => flag(a < b),
                Op::Le => flag(a <= b),
                Op::Gt => flag(a > b),
                Op::Ge => flag(a >= b),
            }
        }
        Node::Call(f, args) => {
            let v: Vec<f64> = args.iter().map(|a| eval(a, x, y)).collect();
            match f {
                Func::Sqrt => v[0].sqrt(),
                Func::Abs => v[0].abs(),
                Func::Exp => v[0].exp(),
                Func::Ln => v[0].ln(),
                Func::Sin => v[0].sin(),
                Func::Cos => v[0].cos(),
                Func::Tan => v[0].tan(),
                Func::Atan => v[0].atan(),
                Func::Atan2 => v[0].atan2(v[1]),
                Func::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
                Func::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Func::Pow => v[0].powf(v[1]),
                Func::Floor => v[0].floor(),
                Func::Ceil => v[0].ceil(),
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expr { offset: self.pos, message: msg.to_string() }
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
        let lhs = self.sum()?;
        let op = match self.peek() {
            Some(b'<') => Op::Lt,
            Some(b'>') => Op::Gt,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let op = if self.s.get(self.pos) == Some(&b'=') {
            self.pos += 1;
            if op == Op::Lt {
                Op::Le
            } else {
                Op::Ge
            }
        } else {
            op
        };
        let rhs = self.sum()?;
        Ok(Node::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Node> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.prod()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn prod(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
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
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match name {
                    "x" => return Ok(Node::X),
                    "y" => return Ok(Node::Y),
                    "r" => return Ok(Node::R),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    _ => {}
                }
                let Some((func, min_args, max_args)) = Func::lookup(name) else {
                    self.pos = start;
                    return Err(self.err(&format!("unknown identifier '{name}'")));
                };
                if !self.eat(b'(') {
                    return Err(self.err(&format!("expected '(' after '{name}'")));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return Err(self.err("expected ')' or ','"));
                }
                if args.len() < min_args || max_args.is_some_and(|m| args.len() > m) {
                    return Err(self.err(&format!("'{name}' called with {} arguments", args.len())));
                }
                Ok(Node::Call(func, args))
            }
            Some(c) => Err(self.err(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.s;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut k = i + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                i = k;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap();
        let v: f64 = text.parse().map_err(|_| self.err(&format!("malformed number '{text}'")))?;
        self.pos = i;
        Ok(Node::Num(v))
    }
}
