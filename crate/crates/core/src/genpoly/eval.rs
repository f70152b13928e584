use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Constant, GpExpr, Node};
use crate::error::{Error, Result};
use crate::exactreal::{BallError, DyadicBall, PrecisionLadder};

/// A certified decision failed at the current precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Straddle {
    /// Printed form of the subexpression whose floor (or post-processing
    /// step) could not be resolved.
    pub node: String,
}

impl Straddle {
    pub fn new(node: impl Into<String>) -> Self {
        Straddle { node: node.into() }
    }
}

impl fmt::Display for Straddle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unresolved at {}", self.node)
    }
}

enum Value {
    Exact(BigRational),
    Ball(DyadicBall),
}

impl Value {
    fn ball(self, prec: u32) -> DyadicBall {
        match self {
            Value::Exact(q) => DyadicBall::from_rational(&q, prec),
            Value::Ball(b) => b,
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(usize),
    Var,
    Add,
    Mul,
    Floor(usize),
}

/// Postfix program plus per-precision constant tables, built lazily so that
/// the doubling ladder refines the constants as well.
///
/// An evaluator is immutable apart from the constant cache and can be shared
/// across threads.
#[derive(Debug)]
pub struct Evaluator {
    ops: Vec<Op>,
    constants: Vec<Constant>,
    floor_labels: Vec<String>,
    rungs: Vec<u32>,
    tables: Vec<OnceLock<Vec<DyadicBall>>>,
}

impl Evaluator {
    pub fn new(expr: &GpExpr, start_precision: u32) -> Self {
        Self::with_ladder(expr, PrecisionLadder::new(start_precision))
    }

    pub fn with_ladder(expr: &GpExpr, ladder: PrecisionLadder) -> Self {
        let mut ev = Evaluator {
            ops: Vec::new(),
            constants: Vec::new(),
            floor_labels: Vec::new(),
            rungs: ladder.rungs(),
            tables: Vec::new(),
        };
        ev.compile(expr.root());
        ev.tables = ev.rungs.iter().map(|_| OnceLock::new()).collect();
        ev
    }

    fn compile(&mut self, node: &Node) {
        match node {
            Node::Const(c) => {
                let idx = match self.constants.iter().position(|k| k == c) {
                    Some(i) => i,
                    None => {
                        self.constants.push(c.clone());
                        self.constants.len() - 1
                    }
                };
                self.ops.push(Op::Const(idx));
            }
            Node::Var => self.ops.push(Op::Var),
            Node::Add(l, r) => {
                self.compile(l);
                self.compile(r);
                self.ops.push(Op::Add);
            }
            Node::Mul(l, r) => {
                self.compile(l);
                self.compile(r);
                self.ops.push(Op::Mul);
            }
            Node::Floor(c) => {
                self.compile(c);
                self.floor_labels.push(node.to_string());
                self.ops.push(Op::Floor(self.floor_labels.len() - 1));
            }
        }
    }

    pub fn rungs(&self) -> &[u32] {
        &self.rungs
    }

    fn table(&self, level: usize) -> &[DyadicBall] {
        self.tables[level].get_or_init(|| {
            let prec = self.rungs[level];
            self.constants.iter().map(|c| c.ball(prec)).collect()
        })
    }

    /// One attempt at the precision of ladder rung `level`.
    ///
    /// Subexpressions built only from rational constants and `x` are carried
    /// as exact rationals, so that e.g. `3 * (1/3)` floors to exactly 1.
    pub fn eval_at(&self, n: u64, level: usize) -> std::result::Result<DyadicBall, Straddle> {
        let prec = self.rungs[level];
        let table = self.table(level);
        let mut stack: Vec<Value> = Vec::with_capacity(8);
        for op in &self.ops {
            match op {
                Op::Const(i) => stack.push(match &self.constants[*i] {
                    Constant::Rational(q) => Value::Exact(q.clone()),
                    _ => Value::Ball(table[*i].clone()),
                }),
                Op::Var => stack.push(Value::Exact(BigRational::from_integer(BigInt::from(n)))),
                Op::Add => {
                    let r = stack.pop().expect("stack");
                    let l = stack.pop().expect("stack");
                    stack.push(match (l, r) {
                        (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
                        (l, r) => Value::Ball(l.ball(prec).add(&r.ball(prec))),
                    });
                }
                Op::Mul => {
                    let r = stack.pop().expect("stack");
                    let l = stack.pop().expect("stack");
                    stack.push(match (l, r) {
                        (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
                        (l, r) => Value::Ball(l.ball(prec).mul(&r.ball(prec)).round_to(prec)),
                    });
                }
                Op::Floor(label) => match stack.pop().expect("stack") {
                    Value::Exact(q) => stack.push(Value::Exact(BigRational::from_integer(q.floor().to_integer()))),
                    Value::Ball(v) => match v.floor_certified() {
                        Ok(k) => stack.push(Value::Exact(BigRational::from_integer(k))),
                        Err(_) => return Err(Straddle::new(self.floor_labels[*label].clone())),
                    },
                },
            }
        }
        Ok(stack.pop().expect("non-empty program").ball(prec))
    }

    /// Certified value at `x = n`.
    pub fn eval(&self, n: u64) -> Result<DyadicBall> {
        self.eval_map(n, |b| Ok(b.clone()))
    }

    /// Evaluate and post-process; both steps are retried together up the
    /// ladder until `post` succeeds.
    pub fn eval_map<T>(
        &self,
        n: u64,
        post: impl Fn(&DyadicBall) -> std::result::Result<T, Straddle>,
    ) -> Result<T> {
        let mut last = Straddle::new("");
        for level in 0..self.rungs.len() {
            match self.eval_at(n, level).and_then(|b| post(&b)) {
                Ok(v) => return Ok(v),
                Err(s) => last = s,
            }
        }
        Err(Error::PrecisionExhausted {
            n,
            node: last.node,
            bits: *self.rungs.last().expect("ladder"),
        })
    }

    /// `{f(n)}` as a certified ball in `[0, 1)`.
    pub fn frac(&self, n: u64) -> Result<DyadicBall> {
        self.eval_map(n, |b| {
            b.frac_certified()
                .map_err(|_| Straddle::new("fractional part"))
        })
    }

    /// `{f(n)}` as the nearest `f64`, clamped below 1.
    pub fn frac_f64(&self, n: u64) -> Result<f64> {
        self.eval_map(n, frac_to_unit_f64)
    }

    /// `{h f(n)}` as an `f64` in `[0, 1)`.
    pub fn phase_f64(&self, n: u64, h: u64) -> Result<f64> {
        let h = BigInt::from(h);
        self.eval_map(n, |b| frac_to_unit_f64(&b.mul_int(&h)))
    }
}

/// Fractional part of a ball as an `f64` in `[0, 1)`.
pub(crate) fn frac_to_unit_f64(b: &DyadicBall) -> std::result::Result<f64, Straddle> {
    let f = b.frac_certified().map_err(|e| match e {
        BallError::StraddlesInteger => Straddle::new("fractional part"),
        BallError::InsufficientPrecision => Straddle::new("f64 conversion"),
    })?;
    let v = f
        .to_f64()
        .map_err(|_| Straddle::new("f64 conversion"))?;
    // rounding to nearest may land on 1.0 for fractional parts within
    // half an ulp of 1
    Ok(if v >= 1.0 { 1.0 - f64::EPSILON / 2.0 } else { v })
}
