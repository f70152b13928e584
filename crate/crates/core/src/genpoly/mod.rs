//! Generalized polynomials: real polynomials closed under `+`, `*` and
//! `floor`.
//!
//! Expressions are parsed from a small text grammar (see [`parse`]), keep
//! their constants symbolic, and are evaluated with certified floors by
//! [`Evaluator`].

mod eval;
mod parser;
mod symbolic;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::exactreal::DyadicBall;

pub use eval::{Evaluator, Straddle};
pub(crate) use eval::frac_to_unit_f64;
pub use parser::parse;
pub use symbolic::SymConst;

/// A real constant, kept symbolic so that it can be produced at any
/// precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Rational(BigRational),
    Sqrt(u64),
    Pi,
}

impl Constant {
    pub fn ball(&self, prec: u32) -> DyadicBall {
        match self {
            Constant::Rational(q) => DyadicBall::from_rational(q, prec),
            Constant::Sqrt(k) => DyadicBall::sqrt_int(&(*k).into(), prec),
            Constant::Pi => DyadicBall::pi(prec),
        }
    }

    pub fn int(v: i64) -> Constant {
        Constant::Rational(BigRational::from_integer(BigInt::from(v)))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Rational(q) => {
                let body = if q.denom().is_one() {
                    q.numer().abs().to_string()
                } else {
                    format!("{}/{}", q.numer().abs(), q.denom())
                };
                if q.is_negative() {
                    write!(f, "(-{body})")
                } else {
                    f.write_str(&body)
                }
            }
            Constant::Sqrt(k) => write!(f, "sqrt({k})"),
            Constant::Pi => f.write_str("pi"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Const(Constant),
    Var,
    Add(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Floor(Box<Node>),
}

impl Node {
    #[allow(clippy::should_implement_trait)]
    pub fn add(l: Node, r: Node) -> Node {
        Node::Add(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: Node, r: Node) -> Node {
        Node::Mul(Box::new(l), Box::new(r))
    }

    pub fn floor(c: Node) -> Node {
        Node::Floor(Box::new(c))
    }

    /// Smallest `n` with the expression in `GP_n`.
    pub fn floor_depth(&self) -> u32 {
        match self {
            Node::Const(_) | Node::Var => 0,
            Node::Add(l, r) | Node::Mul(l, r) => l.floor_depth().max(r.floor_depth()),
            Node::Floor(c) => c.floor_depth() + 1,
        }
    }

    /// Degree of the polynomial obtained by deleting every floor.
    pub fn growth_degree(&self) -> u32 {
        match self {
            Node::Const(_) => 0,
            Node::Var => 1,
            Node::Add(l, r) => l.growth_degree().max(r.growth_degree()),
            Node::Mul(l, r) => l.growth_degree() + r.growth_degree(),
            Node::Floor(c) => c.growth_degree(),
        }
    }

    pub fn has_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(l, r) | Node::Mul(l, r) => l.has_var() || r.has_var(),
            Node::Floor(c) => c.has_var(),
        }
    }

    fn has_floor(&self) -> bool {
        self.floor_depth() > 0
    }

    fn mul_factors<'a>(&'a self, out: &mut Vec<&'a Node>) {
        match self {
            Node::Mul(l, r) => {
                l.mul_factors(out);
                r.mul_factors(out);
            }
            other => out.push(other),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => c.fmt(f),
            Node::Var => f.write_str("x"),
            Node::Add(l, r) => write!(f, "({l}+{r})"),
            Node::Mul(l, r) => write!(f, "({l}*{r})"),
            Node::Floor(c) => write!(f, "floor({c})"),
        }
    }
}

/// A parsed generalized polynomial together with its cached metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpExpr {
    root: Node,
    floor_depth: u32,
    growth_degree: u32,
}

impl GpExpr {
    pub fn new(root: Node) -> Self {
        GpExpr {
            floor_depth: root.floor_depth(),
            growth_degree: root.growth_degree(),
            root,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn floor_depth(&self) -> u32 {
        self.floor_depth
    }

    pub fn growth_degree(&self) -> u32 {
        self.growth_degree
    }

    pub fn is_constant(&self) -> bool {
        !self.root.has_var()
    }

    /// Certified value at `x = n`, starting at `precision_bits` and doubling
    /// on unresolved floors.
    pub fn eval(&self, n: u64, precision_bits: u32) -> Result<DyadicBall> {
        Evaluator::new(self, precision_bits).eval(n)
    }

    /// Match `beta * floor(alpha1 * floor(alpha2 * p(x)))` with `p` monic of
    /// degree at least two. Missing constant factors count as `1`.
    pub fn recognize_theorem_shape(&self) -> Result<TheoremInstance> {
        let (beta, inner) = split_const_floor(&self.root)?;
        let (alpha1, inner) = split_const_floor(inner)?;
        let (alpha2, factors) = split_constant_factors(inner)?;
        if factors.iter().any(|f| f.has_floor()) {
            return Err(Error::NotTheoremShape(
                "wrong nesting: more than two floors".into(),
            ));
        }
        let mut coeffs = vec![SymConst::one()];
        for f in factors {
            let q = SymConst::expand_polynomial(f).expect("floor-free factor");
            coeffs = SymConst::poly_mul(&coeffs, &q);
        }
        let d = coeffs.len().saturating_sub(1);
        if d < 2 {
            return Err(Error::NotTheoremShape(format!("degree {d} < 2")));
        }
        if !coeffs[d].is_one() {
            return Err(Error::NotTheoremShape(format!(
                "non-monic: leading coefficient {}",
                coeffs[d]
            )));
        }
        Ok(TheoremInstance {
            p: coeffs,
            alpha1,
            alpha2,
            beta,
            d: d as u32,
        })
    }
}

impl fmt::Display for GpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for GpExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Split a product into the product of its constant factors and the
/// remaining (variable-dependent) factors.
fn split_constant_factors(node: &Node) -> Result<(SymConst, Vec<&Node>)> {
    let mut factors = Vec::new();
    node.mul_factors(&mut factors);
    let mut constant = SymConst::one();
    let mut rest = Vec::new();
    for f in factors {
        if f.has_var() {
            rest.push(f);
        } else {
            let c = SymConst::from_node(f).ok_or_else(|| {
                Error::NotTheoremShape("floor of a constant is not allowed".into())
            })?;
            constant = constant.mul(&c);
        }
    }
    Ok((constant, rest))
}

/// `constant * floor(arg)`; returns the constant and `arg`.
fn split_const_floor(node: &Node) -> Result<(SymConst, &Node)> {
    let (constant, rest) = split_constant_factors(node)?;
    match rest.as_slice() {
        [Node::Floor(inner)] => Ok((constant, inner.as_ref())),
        _ => Err(Error::NotTheoremShape(
            "wrong nesting: expected constant * floor(...)".into(),
        )),
    }
}

/// `f(x) = beta * floor(alpha1 * floor(alpha2 * p(x)))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremInstance {
    /// Coefficients of `p`, constant term first.
    pub p: Vec<SymConst>,
    pub alpha1: SymConst,
    pub alpha2: SymConst,
    pub beta: SymConst,
    pub d: u32,
}

impl TheoremInstance {
    /// The triple whose finite type the bound assumes:
    /// `(alpha2, alpha1 alpha2, alpha1 alpha2 beta)`.
    pub fn type_triple(&self) -> [SymConst; 3] {
        let a12 = self.alpha1.mul(&self.alpha2);
        let a12b = a12.mul(&self.beta);
        [self.alpha2.clone(), a12, a12b]
    }

    pub fn p_display(&self) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.p.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            terms.push(match (c.is_one(), mono.is_empty()) {
                (true, false) => mono,
                (_, true) => format!("{c}"),
                (false, false) => format!("{c}*{mono}"),
            });
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}
