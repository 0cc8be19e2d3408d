//! Factorable functions as shared-subexpression DAGs.
//!
//! Text such as `exp(sin(x1) + sin(x2)*cos(x2))` parses into an [`Expr`] whose
//! nodes are stored in topological order. Several outputs may be given,
//! separated by `;`, to describe a vector-valued map.

mod eval;
mod parse;

use std::collections::HashMap;
use std::f64::consts::{E, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::univariate::AtomKind;

pub use eval::Value;

/// Unary operations available in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Atom(AtomKind),
    Sqrt,
    Cot,
    PowInt(u32),
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Atom(a) => a.name(),
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Cot => "cot",
            UnaryOp::PowInt(_) => "pow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// A numeric constant: its nearest double and an interval enclosing the exact value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub enclosure: Interval,
}

impl Constant {
    /// An exactly representable constant.
    pub fn exact(value: f64) -> Self {
        Constant {
            value,
            enclosure: Interval::point(value),
        }
    }

    pub fn pi() -> Self {
        Constant {
            value: PI,
            enclosure: Interval::from_bounds(PI, PI.next_up()),
        }
    }

    pub fn e() -> Self {
        Constant {
            value: E,
            enclosure: Interval::from_bounds(E, E.next_up()),
        }
    }

    fn neg(self) -> Self {
        Constant {
            value: -self.value,
            enclosure: self.enclosure.neg(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Zero-based variable index.
    Var(usize),
    Const(Constant),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Var(usize),
    Const(u64, u64, u64),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
}

impl From<&Node> for Key {
    fn from(node: &Node) -> Self {
        match *node {
            Node::Var(i) => Key::Var(i),
            Node::Const(c) => Key::Const(
                c.value.to_bits(),
                c.enclosure.lo().to_bits(),
                c.enclosure.hi().to_bits(),
            ),
            Node::Unary(op, a) => Key::Unary(op, a),
            Node::Binary(op, a, b) => Key::Binary(op, a, b),
        }
    }
}

/// Incremental DAG construction with optional structural deduplication.
#[derive(Debug, Clone)]
pub struct Builder {
    nodes: Vec<Node>,
    index: Option<HashMap<Key, usize>>,
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            nodes: Vec::new(),
            index: Some(HashMap::new()),
        }
    }

    /// A builder that keeps every occurrence as its own node.
    pub fn without_sharing() -> Self {
        Builder {
            nodes: Vec::new(),
            index: None,
        }
    }

    pub fn push(&mut self, node: Node) -> usize {
        if let Some(index) = &mut self.index {
            let key = Key::from(&node);
            if let Some(&id) = index.get(&key) {
                return id;
            }
            index.insert(key, self.nodes.len());
        }
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn var(&mut self, i: usize) -> usize {
        self.push(Node::Var(i))
    }

    pub fn constant(&mut self, c: Constant) -> usize {
        self.push(Node::Const(c))
    }

    pub fn unary(&mut self, op: UnaryOp, a: usize) -> usize {
        self.push(Node::Unary(op, a))
    }

    pub fn binary(&mut self, op: BinaryOp, a: usize, b: usize) -> usize {
        self.push(Node::Binary(op, a, b))
    }

    pub fn finish(self, arity: usize, outputs: Vec<usize>) -> Result<Expr> {
        for node in &self.nodes {
            if let Node::Var(i) = *node {
                if i >= arity {
                    return Err(Error::Arity {
                        index: i + 1,
                        arity,
                    });
                }
            }
        }
        if outputs.is_empty() || outputs.iter().any(|&o| o >= self.nodes.len()) {
            return Err(Error::ShapeMismatch(
                "expression has no valid outputs".into(),
            ));
        }
        Ok(Expr {
            nodes: self.nodes,
            outputs,
            arity,
        })
    }
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

/// A vector-valued factorable function of `arity` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    nodes: Vec<Node>,
    outputs: Vec<usize>,
    arity: usize,
}

impl Expr {
    /// Parses `text` with variables `x1..x{arity}`, sharing repeated subexpressions.
    pub fn parse(text: &str, arity: usize) -> Result<Expr> {
        parse::parse(text, arity, Builder::new())
    }

    /// Parses `text` as a tree: repeated subexpressions are kept apart.
    pub fn parse_unshared(text: &str, arity: usize) -> Result<Expr> {
        parse::parse(text, arity, Builder::without_sharing())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Same shape and constant values; enclosures of constants are not compared.
    pub fn structurally_eq(&self, other: &Expr) -> bool {
        self.outputs.len() == other.outputs.len()
            && self
                .outputs
                .iter()
                .zip(&other.outputs)
                .all(|(&a, &b)| self.subtree_eq(a, other, b))
    }

    fn subtree_eq(&self, a: usize, other: &Expr, b: usize) -> bool {
        match (self.nodes[a], other.nodes[b]) {
            (Node::Var(i), Node::Var(k)) => i == k,
            (Node::Const(c), Node::Const(d)) => c.value.to_bits() == d.value.to_bits(),
            (Node::Unary(p, x), Node::Unary(q, y)) => p == q && self.subtree_eq(x, other, y),
            (Node::Binary(p, x1, x2), Node::Binary(q, y1, y2)) => {
                p == q && self.subtree_eq(x1, other, y1) && self.subtree_eq(x2, other, y2)
            }
            _ => false,
        }
    }

    /// `e ∘ e ∘ … ∘ e` (`k` copies), substituting outputs into variables.
    pub fn self_compose(&self, k: usize) -> Result<Expr> {
        if self.outputs.len() != self.arity {
            return Err(Error::ShapeMismatch(format!(
                "self-composition needs a square map, got {} outputs for {} inputs",
                self.outputs.len(),
                self.arity
            )));
        }
        if k == 0 {
            return Err(Error::ShapeMismatch(
                "composition depth must be positive".into(),
            ));
        }
        let mut b = Builder::new();
        let mut inputs: Vec<usize> = (0..self.arity).map(|i| b.var(i)).collect();
        for _ in 0..k {
            let mut map = Vec::with_capacity(self.nodes.len());
            for node in &self.nodes {
                let id = match *node {
                    Node::Var(i) => inputs[i],
                    Node::Const(c) => b.constant(c),
                    Node::Unary(op, a) => b.unary(op, map[a]),
                    Node::Binary(op, x, y) => b.binary(op, map[x], map[y]),
                };
                map.push(id);
            }
            inputs = self.outputs.iter().map(|&o| map[o]).collect();
        }
        b.finish(self.arity, inputs)
    }

    fn fmt_node(&self, id: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[id] {
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Const(c) => {
                let negative = c.value < 0.0 || (c.value == 0.0 && c.value.is_sign_negative());
                let m = if negative { c.neg() } else { c };
                let body = if m == Constant::pi() {
                    "pi".to_string()
                } else if m == Constant::e() {
                    "e".to_string()
                } else {
                    format!("{:?}", m.value)
                };
                if negative {
                    write!(f, "(-{body})")
                } else {
                    write!(f, "{body}")
                }
            }
            Node::Unary(UnaryOp::Atom(AtomKind::Neg), a) => {
                write!(f, "(-")?;
                self.fmt_node(a, f)?;
                write!(f, ")")
            }
            Node::Unary(UnaryOp::PowInt(k), a) => {
                write!(f, "(")?;
                self.fmt_node(a, f)?;
                write!(f, ")^{k}")
            }
            Node::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                self.fmt_node(a, f)?;
                write!(f, ")")
            }
            Node::Binary(op, a, b) => {
                write!(f, "(")?;
                self.fmt_node(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.fmt_node(b, f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &o) in self.outputs.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            self.fmt_node(o, f)?;
        }
        Ok(())
    }
}
