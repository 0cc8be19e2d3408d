use std::sync::Arc;

use super::{BinaryOp, Expr, Node, UnaryOp};
use crate::bivariate::{add_models, affine_interval, div_models, mul_models, sub_models};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::{Domain, SuperpositionModel};
use crate::univariate::{compose, derived_unary, half_pi, AtomKind, DerivedUnary};

/// Intermediate result of model evaluation: constant subexpressions stay intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Const(Interval),
    Model(SuperpositionModel),
}

impl Value {
    pub fn into_model(self, d: &Arc<Domain>) -> SuperpositionModel {
        match self {
            Value::Const(c) => SuperpositionModel::constant_interval(d, c),
            Value::Model(m) => m,
        }
    }
}

fn at(node: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        e @ Error::AtNode { .. } => e,
        e => Error::AtNode {
            node,
            source: Box::new(e),
        },
    }
}

fn point_unary(op: UnaryOp, x: f64) -> Result<f64> {
    let v = match op {
        UnaryOp::Atom(AtomKind::Log) if x <= 0.0 => {
            return Err(Error::domain(
                "log",
                format!("argument {x} is not positive"),
            ))
        }
        UnaryOp::Atom(AtomKind::Inv) if x == 0.0 => {
            return Err(Error::domain("inv", "division by zero"))
        }
        UnaryOp::Sqrt if x < 0.0 => {
            return Err(Error::domain("sqrt", format!("argument {x} is negative")))
        }
        UnaryOp::Atom(a) => a.apply_point(x),
        UnaryOp::Sqrt => x.sqrt(),
        UnaryOp::Cot => 1.0 / x.tan(),
        UnaryOp::PowInt(k) => x.powi(k as i32),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(
            match op {
                UnaryOp::Atom(a) => a.name(),
                _ => op.name(),
            },
            format!("non-finite value at {x}"),
        ))
    }
}

fn point_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64> {
    let v = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div if b == 0.0 => return Err(Error::domain("div", "division by zero")),
        BinaryOp::Div => a / b,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            op: "point evaluation",
        })
    }
}

pub(crate) fn interval_unary(op: UnaryOp, x: &Interval) -> Result<Interval> {
    match op {
        UnaryOp::Atom(a) => a.apply(x),
        UnaryOp::Sqrt => x.sqrt(),
        UnaryOp::Cot => half_pi().sub(x)?.tan(),
        UnaryOp::PowInt(k) => x.powi(k),
    }
}

pub(crate) fn interval_binary(op: BinaryOp, a: &Interval, b: &Interval) -> Result<Interval> {
    match op {
        BinaryOp::Add => a.add(b),
        BinaryOp::Sub => a.sub(b),
        BinaryOp::Mul => a.mul(b),
        BinaryOp::Div => a.div(b).map_err(|e| match e {
            Error::ZeroInDomain { .. } => {
                Error::domain("div", format!("divisor {b} contains zero"))
            }
            e => e,
        }),
    }
}

fn model_unary(op: UnaryOp, m: &SuperpositionModel) -> Result<SuperpositionModel> {
    match op {
        UnaryOp::Atom(AtomKind::Inv) => derived_unary(DerivedUnary::RecipAnySign, m),
        UnaryOp::Atom(a) => compose(a, m),
        UnaryOp::Sqrt => derived_unary(DerivedUnary::Sqrt, m),
        UnaryOp::Cot => derived_unary(DerivedUnary::Cot, m),
        UnaryOp::PowInt(k) => derived_unary(DerivedUnary::PowInt(k), m),
    }
}

fn value_binary(op: BinaryOp, a: &Value, b: &Value) -> Result<Value> {
    let one = Interval::ONE;
    let zero = Interval::ZERO;
    Ok(match (a, b) {
        (Value::Const(x), Value::Const(y)) => Value::Const(interval_binary(op, x, y)?),
        (Value::Model(m), Value::Const(c)) => Value::Model(match op {
            BinaryOp::Add => affine_interval(m, one, *c)?,
            BinaryOp::Sub => affine_interval(m, one, c.neg())?,
            BinaryOp::Mul => affine_interval(m, *c, zero)?,
            BinaryOp::Div => {
                let r = c
                    .inv()
                    .map_err(|_| Error::domain("div", format!("divisor {c} contains zero")))?;
                affine_interval(m, r, zero)?
            }
        }),
        (Value::Const(c), Value::Model(m)) => Value::Model(match op {
            BinaryOp::Add => affine_interval(m, one, *c)?,
            BinaryOp::Sub => affine_interval(m, Interval::ONE.neg(), *c)?,
            BinaryOp::Mul => affine_interval(m, *c, zero)?,
            BinaryOp::Div => {
                affine_interval(&derived_unary(DerivedUnary::RecipAnySign, m)?, *c, zero)?
            }
        }),
        (Value::Model(x), Value::Model(y)) => Value::Model(match op {
            BinaryOp::Add => add_models(x, y)?,
            BinaryOp::Sub => sub_models(x, y)?,
            BinaryOp::Mul => mul_models(x, y)?,
            BinaryOp::Div => div_models(x, y)?,
        }),
    })
}

impl Expr {
    fn check_arity(&self, got: usize) -> Result<()> {
        if got == self.arity {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "expression has {} variables, input has {got}",
                self.arity
            )))
        }
    }

    /// Which nodes feed some output.
    fn live(&self) -> Vec<bool> {
        let mut live = vec![false; self.nodes.len()];
        for &o in &self.outputs {
            live[o] = true;
        }
        for id in (0..self.nodes.len()).rev() {
            if !live[id] {
                continue;
            }
            match self.nodes[id] {
                Node::Unary(_, a) => live[a] = true,
                Node::Binary(_, a, b) => {
                    live[a] = true;
                    live[b] = true;
                }
                _ => {}
            }
        }
        live
    }

    /// Evaluates every live node once, in topological order.
    fn fold<T: Clone>(
        &self,
        mut leaf: impl FnMut(&Node) -> Result<T>,
        mut unary: impl FnMut(UnaryOp, &T) -> Result<T>,
        mut binary: impl FnMut(BinaryOp, &T, &T) -> Result<T>,
    ) -> Result<Vec<T>> {
        let live = self.live();
        let mut memo: Vec<Option<T>> = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if !live[id] {
                continue;
            }
            let get = |k: usize| memo[k].as_ref().expect("children precede parents");
            let v = match *node {
                Node::Var(_) | Node::Const(_) => leaf(node),
                Node::Unary(op, a) => unary(op, get(a)),
                Node::Binary(op, a, b) => binary(op, get(a), get(b)),
            }
            .map_err(at(id))?;
            memo[id] = Some(v);
        }
        Ok(self
            .outputs
            .iter()
            .map(|&o| memo[o].clone().expect("outputs are live"))
            .collect())
    }

    /// Floating-point evaluation at `x`.
    pub fn eval_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x.len())?;
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain {
                axis: i,
                value: x[i],
            });
        }
        self.fold(
            |node| {
                Ok(match *node {
                    Node::Var(i) => x[i],
                    Node::Const(c) => c.value,
                    _ => unreachable!(),
                })
            },
            |op, &a| point_unary(op, a),
            |op, &a, &b| point_binary(op, a, b),
        )
    }

    /// Natural interval extension over `bx`.
    pub fn eval_interval(&self, bx: &[Interval]) -> Result<Vec<Interval>> {
        self.check_arity(bx.len())?;
        self.fold(
            |node| {
                Ok(match *node {
                    Node::Var(i) => bx[i],
                    Node::Const(c) => c.enclosure,
                    _ => unreachable!(),
                })
            },
            interval_unary,
            interval_binary,
        )
    }

    /// Superposition models of every output over `d`.
    pub fn eval_ism(&self, d: &Arc<Domain>) -> Result<Vec<SuperpositionModel>> {
        self.check_arity(d.dim())?;
        let values = self.fold(
            |node| {
                Ok(match *node {
                    Node::Var(i) => Value::Model(SuperpositionModel::variable(d, i)?),
                    Node::Const(c) => Value::Const(c.enclosure),
                    _ => unreachable!(),
                })
            },
            |op, a| {
                Ok(match a {
                    Value::Const(c) => Value::Const(interval_unary(op, c)?),
                    Value::Model(m) => Value::Model(model_unary(op, m)?),
                })
            },
            value_binary,
        )?;
        Ok(values.into_iter().map(|v| v.into_model(d)).collect())
    }
}
