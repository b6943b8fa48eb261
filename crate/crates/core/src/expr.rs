//! Scalar coefficient fields over patch coordinates `x1..xn`.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | atom ("^" const_atom)?
//! atom   := NUMBER | "x" INDEX | FUNC "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`. Exponents
//! must be constant. Functions: `sin cos exp log sqrt tanh`.
//!
//! Parsed trees are stored in post-order, so evaluation is a single forward
//! sweep over the node list.

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::dual::{seed_axes, Dual, Dual2, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable x{index} at offset {offset} is out of range for {arity} coordinates")]
    VariableOutOfRange { index: usize, arity: usize, offset: usize },
    #[error("exponent at offset {offset} is not a constant expression")]
    NonConstantExponent { offset: usize },
    #[error("domain error in {op} at offset {offset}")]
    Domain { op: &'static str, offset: usize },
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }
}

/// One node of the post-order tape. Child references index earlier nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Num(f64),
    /// zero-based coordinate index
    Var(usize),
    Neg(usize),
    Bin(BinOp, usize, usize),
    Pow(usize, f64),
    Call(Func, usize),
}

/// A parsed scalar field. Immutable after parsing.
#[derive(Debug, Clone)]
pub struct ScalarExpr {
    nodes: Vec<Node>,
    // byte offset of each node in the source text
    spans: Vec<usize>,
    arity: usize,
    constant: bool,
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.nodes == other.nodes
    }
}

/// Value, gradient and Hessian of a field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

impl ScalarExpr {
    pub fn parse(src: &str, arity: usize) -> Result<Self, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, arity, nodes: Vec::new(), spans: Vec::new() };
        p.skip_ws();
        if p.pos >= p.src.len() {
            return Err(ExprError::Syntax { offset: p.pos, message: "empty expression".into() });
        }
        p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
        }
        let constant = !p.nodes.iter().any(|n| matches!(n, Node::Var(_)));
        Ok(ScalarExpr { nodes: p.nodes, spans: p.spans, arity, constant })
    }

    /// A constant field.
    pub fn constant(value: f64, arity: usize) -> Self {
        ScalarExpr { nodes: vec![Node::Num(value)], spans: vec![0], arity, constant: true }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// True when no coordinate appears in the expression.
    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.eval_generic(x)
    }

    /// Evaluate over any scalar type (plain reals or nested duals).
    pub fn eval_generic<T: Scalar>(&self, x: &[T]) -> Result<T, ExprError> {
        if x.len() != self.arity {
            return Err(ExprError::Arity { expected: self.arity, got: x.len() });
        }
        let mut vals: SmallVec<[T; 24]> = SmallVec::with_capacity(self.nodes.len());
        for (k, node) in self.nodes.iter().enumerate() {
            let domain = |op| ExprError::Domain { op, offset: self.spans[k] };
            let v = match *node {
                Node::Num(c) => T::cst(c),
                Node::Var(i) => x[i],
                Node::Neg(a) => -vals[a],
                Node::Bin(op, a, b) => {
                    let (l, r) = (vals[a], vals[b]);
                    match op {
                        BinOp::Add => l + r,
                        BinOp::Sub => l - r,
                        BinOp::Mul => l * r,
                        BinOp::Div => {
                            if r.re() == 0.0 {
                                return Err(domain("division"));
                            }
                            l / r
                        }
                    }
                }
                Node::Pow(a, p) => {
                    let base = vals[a];
                    if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
                        if p < 0.0 && base.re() == 0.0 {
                            return Err(domain("power"));
                        }
                        base.powi(p as i32)
                    } else {
                        if base.re() < 0.0 || (base.re() == 0.0 && p < 1.0) {
                            return Err(domain("power"));
                        }
                        base.powf(p)
                    }
                }
                Node::Call(f, a) => {
                    let arg = vals[a];
                    match f {
                        Func::Sin => arg.sin(),
                        Func::Cos => arg.cos(),
                        Func::Exp => arg.exp(),
                        Func::Tanh => arg.tanh(),
                        Func::Log => {
                            if arg.re() <= 0.0 {
                                return Err(domain("log"));
                            }
                            arg.ln()
                        }
                        Func::Sqrt => {
                            if arg.re() < 0.0 || (T::DEPTH > 0 && arg.re() == 0.0) {
                                return Err(domain("sqrt"));
                            }
                            arg.sqrt()
                        }
                    }
                }
            };
            if !v.re().is_finite() {
                return Err(domain("evaluation (non-finite value)"));
            }
            vals.push(v);
        }
        Ok(*vals.last().expect("parsed expressions are nonempty"))
    }

    /// Value and gradient by one dual evaluation per coordinate.
    pub fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ExprError> {
        if self.constant {
            return Ok((self.eval(x)?, vec![0.0; self.arity]));
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; self.arity];
        for (i, g) in grad.iter_mut().enumerate() {
            let v: Vec<Dual<f64>> = seed_axes(x, &[i]);
            let r = self.eval_generic(&v)?;
            value = r.re;
            *g = r.du;
        }
        Ok((value, grad))
    }

    /// Exact value, gradient and Hessian. Each unordered index pair gets one
    /// second-order dual evaluation, so the Hessian is symmetric bit for bit.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Jet2, ExprError> {
        let n = self.arity;
        if x.len() != n {
            return Err(ExprError::Arity { expected: n, got: x.len() });
        }
        let mut jet = Jet2 { value: 0.0, grad: vec![0.0; n], hess: vec![vec![0.0; n]; n] };
        if self.constant {
            jet.value = self.eval(x)?;
            return Ok(jet);
        }
        for i in 0..n {
            for j in i..n {
                let v: Vec<Dual2> = seed_axes(x, &[i, j]);
                let r = self.eval_generic(&v)?;
                if i == j {
                    jet.value = r.component(0);
                    jet.grad[i] = r.component(0b01);
                }
                let h = r.component(0b11);
                jet.hess[i][j] = h;
                jet.hess[j][i] = h;
            }
        }
        Ok(jet)
    }

    fn fmt_node(&self, k: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[k] {
            Node::Num(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => {
                write!(f, "(-")?;
                self.fmt_node(a, f)?;
                write!(f, ")")
            }
            Node::Bin(op, a, b) => {
                write!(f, "(")?;
                self.fmt_node(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.fmt_node(b, f)?;
                write!(f, ")")
            }
            Node::Pow(a, p) => {
                write!(f, "(")?;
                self.fmt_node(a, f)?;
                if p < 0.0 {
                    write!(f, "^(-{}))", -p)
                } else {
                    write!(f, "^{p})")
                }
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.fmt_node(a, f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_node(self.nodes.len() - 1, f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
    nodes: Vec<Node>,
    spans: Vec<usize>,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.into() }
    }

    fn push(&mut self, node: Node, span: usize) -> usize {
        self.nodes.push(node);
        self.spans.push(span);
        self.nodes.len() - 1
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

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<usize, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = self.push(Node::Bin(op, lhs, rhs), at);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<usize, ExprError> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.factor()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = self.push(Node::Bin(op, lhs, rhs), at);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<usize, ExprError> {
        if self.peek() == Some(b'-') {
            let at = self.pos;
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(self.push(Node::Neg(inner), at));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            let at = self.pos;
            self.pos += 1;
            let p = self.const_atom()?;
            return Ok(self.push(Node::Pow(base, p), at));
        }
        Ok(base)
    }

    // Parses an atom (optionally negated) on the tape, folds it to a number
    // and removes it again.
    fn const_atom(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start_node = self.nodes.len();
        let at = self.pos;
        let negate = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.atom()?;
        let sub = &self.nodes[start_node..];
        if sub.iter().any(|n| matches!(n, Node::Var(_))) {
            return Err(ExprError::NonConstantExponent { offset: at });
        }
        let shifted: Vec<Node> = sub.iter().map(|n| shift(*n, start_node)).collect();
        let spans = self.spans[start_node..].to_vec();
        let folded = ScalarExpr { nodes: shifted, spans, arity: 0, constant: true }.eval(&[])?;
        self.nodes.truncate(start_node);
        self.spans.truncate(start_node);
        Ok(if negate { -folded } else { folded })
    }

    fn atom(&mut self) -> Result<usize, ExprError> {
        let Some(c) = self.peek() else {
            return Err(self.syntax("unexpected end of input"));
        };
        let at = self.pos;
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            let v = self.number()?;
            return Ok(self.push(Node::Num(v), at));
        }
        if c.is_ascii_alphabetic() {
            let ident = self.ident();
            if let Some(index) = ident.strip_prefix('x').and_then(|d| {
                (!d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())).then(|| d.parse::<usize>().ok())
            }) {
                let index = index.unwrap_or(usize::MAX);
                if index == 0 || index > self.arity {
                    return Err(ExprError::VariableOutOfRange { index, arity: self.arity, offset: at });
                }
                return Ok(self.push(Node::Var(index - 1), at));
            }
            let Some(func) = Func::from_name(&ident) else {
                return Err(ExprError::UnknownIdentifier { name: ident, offset: at });
            };
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(self.push(Node::Call(func, arg), at));
        }
        Err(self.syntax(format!("unexpected `{}`", c as char)))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|_| ExprError::Syntax { offset: start, message: "malformed number".into() })
    }
}

fn shift(n: Node, by: usize) -> Node {
    match n {
        Node::Neg(a) => Node::Neg(a - by),
        Node::Bin(op, a, b) => Node::Bin(op, a - by, b - by),
        Node::Pow(a, p) => Node::Pow(a - by, p),
        Node::Call(f, a) => Node::Call(f, a - by),
        other => other,
    }
}
