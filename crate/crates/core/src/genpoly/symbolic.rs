use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Constant, Node};
use crate::exactreal::DyadicBall;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Atom {
    Sqrt(u64),
    Pi,
}

/// A rational linear combination of products of `sqrt(k)` and `pi`.
///
/// Monomials are normalized (`sqrt(k)^2 = k`, perfect squares reduced), so
/// two values built from the same constants compare equal whenever the
/// products agree syntactically after that normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymConst {
    terms: BTreeMap<Vec<Atom>, BigRational>,
}

impl SymConst {
    pub fn zero() -> Self {
        SymConst {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(Vec::new(), q);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Vec::new()).is_some_and(|c| c.is_one())
    }

    /// The value as an exact rational, when no irrational atom survives.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, atoms: Vec<Atom>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(atoms).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn from_constant(c: &Constant) -> Self {
        match c {
            Constant::Rational(q) => Self::rational(q.clone()),
            Constant::Sqrt(k) => {
                let r = k.sqrt();
                if r * r == *k {
                    Self::rational(BigRational::from_integer(BigInt::from(r)))
                } else {
                    let mut s = Self::zero();
                    s.add_term(vec![Atom::Sqrt(*k)], BigRational::one());
                    s
                }
            }
            Constant::Pi => {
                let mut s = Self::zero();
                s.add_term(vec![Atom::Pi], BigRational::one());
                s
            }
        }
    }

    /// `None` when the subtree contains `x` or a floor.
    pub fn from_node(node: &Node) -> Option<Self> {
        match node {
            Node::Const(c) => Some(Self::from_constant(c)),
            Node::Var | Node::Floor(_) => None,
            Node::Add(l, r) => Some(Self::from_node(l)?.add(&Self::from_node(r)?)),
            Node::Mul(l, r) => Some(Self::from_node(l)?.mul(&Self::from_node(r)?)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let (atoms, factor) = merge_monomials(m1, m2);
                out.add_term(atoms, c1 * c2 * factor);
            }
        }
        out
    }

    /// Coefficients (constant term first) of a floor-free expression in `x`.
    pub fn expand_polynomial(node: &Node) -> Option<Vec<SymConst>> {
        let mut p = match node {
            Node::Const(c) => vec![Self::from_constant(c)],
            Node::Var => vec![Self::zero(), Self::one()],
            Node::Floor(_) => return None,
            Node::Add(l, r) => {
                let (a, b) = (Self::expand_polynomial(l)?, Self::expand_polynomial(r)?);
                let n = a.len().max(b.len());
                (0..n)
                    .map(|i| {
                        let z = Self::zero();
                        a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z))
                    })
                    .collect()
            }
            Node::Mul(l, r) => {
                Self::poly_mul(&Self::expand_polynomial(l)?, &Self::expand_polynomial(r)?)
            }
        };
        trim(&mut p);
        Some(p)
    }

    pub fn poly_mul(a: &[SymConst], b: &[SymConst]) -> Vec<SymConst> {
        let mut out = vec![Self::zero(); (a.len() + b.len()).saturating_sub(1)];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
        trim(&mut out);
        out
    }

    /// `(a, b, d)` with value `a + b sqrt(d)`, when the constant has exactly
    /// that shape.
    pub fn surd_parts(&self) -> Option<(BigRational, BigRational, u64)> {
        let mut a = BigRational::zero();
        let mut sqrt_term = None;
        for (atoms, c) in &self.terms {
            match atoms.as_slice() {
                [] => a = c.clone(),
                [Atom::Sqrt(d)] if sqrt_term.is_none() => sqrt_term = Some((c.clone(), *d)),
                _ => return None,
            }
        }
        let (b, d) = sqrt_term?;
        Some((a, b, d))
    }

    /// Rebuild as an expression tree.
    pub fn to_node(&self) -> Node {
        let mut acc: Option<Node> = None;
        for (atoms, c) in &self.terms {
            let mut term = Node::Const(Constant::Rational(c.clone()));
            for a in atoms {
                let leaf = match a {
                    Atom::Sqrt(k) => Constant::Sqrt(*k),
                    Atom::Pi => Constant::Pi,
                };
                term = Node::mul(term, Node::Const(leaf));
            }
            acc = Some(match acc {
                None => term,
                Some(prev) => Node::add(prev, term),
            });
        }
        acc.unwrap_or(Node::Const(Constant::int(0)))
    }

    pub fn ball(&self, prec: u32) -> DyadicBall {
        let mut sum = DyadicBall::zero();
        for (atoms, c) in &self.terms {
            let mut term = DyadicBall::from_rational(c, prec);
            for a in atoms {
                let v = match a {
                    Atom::Sqrt(k) => Constant::Sqrt(*k).ball(prec),
                    Atom::Pi => Constant::Pi.ball(prec),
                };
                term = term.mul(&v).round_to(prec);
            }
            sum = sum.add(&term);
        }
        sum
    }
}

fn trim(p: &mut Vec<SymConst>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn merge_monomials(a: &[Atom], b: &[Atom]) -> (Vec<Atom>, BigRational) {
    let mut all: Vec<Atom> = a.iter().chain(b).cloned().collect();
    all.sort();
    let mut out = Vec::with_capacity(all.len());
    let mut factor = BigRational::one();
    let mut i = 0;
    while i < all.len() {
        if let (Atom::Sqrt(k), Some(Atom::Sqrt(k2))) = (&all[i], all.get(i + 1)) {
            if k == k2 {
                factor *= BigRational::from_integer(BigInt::from(*k));
                i += 2;
                continue;
            }
        }
        out.push(all[i].clone());
        i += 1;
    }
    (out, factor)
}

impl fmt::Display for SymConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (atoms, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mut parts = Vec::new();
            if !c.is_one() || atoms.is_empty() {
                parts.push(Constant::Rational(c.clone()).to_string());
            }
            for a in atoms {
                parts.push(match a {
                    Atom::Sqrt(k) => format!("sqrt({k})"),
                    Atom::Pi => "pi".to_string(),
                });
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpoly::parse;

    fn sym(text: &str) -> SymConst {
        SymConst::from_node(parse(text).unwrap().root()).unwrap()
    }

    #[test]
    fn normalization() {
        assert!(sym("sqrt(2)*sqrt(2)*1/2").is_one());
        assert_eq!(sym("sqrt(9)").as_rational(), Some(BigRational::from_integer(3.into())));
        assert!(sym("sqrt(3) - sqrt(3)").is_zero());
        assert_eq!(sym("(1+sqrt(5))*1/2").to_string(), "1/2 + 1/2*sqrt(5)");
        assert_eq!(sym("pi*sqrt(2)*3").to_string(), "3*sqrt(2)*pi");
    }

    #[test]
    fn ball_and_node_agree() {
        let s = sym("(1+sqrt(5))*1/2 - pi*sqrt(7)");
        let a = s.ball(200);
        let b = parse(&s.to_node().to_string()).unwrap().eval(1, 200).unwrap();
        assert!(a.lower() <= b.upper() && b.lower() <= a.upper());
        let v = a.center_f64();
        let expect = (1.0 + 5f64.sqrt()) / 2.0 - std::f64::consts::PI * 7f64.sqrt();
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn polynomial_expansion() {
        let p = SymConst::expand_polynomial(parse("(x+1)^3 - x^3").unwrap().root()).unwrap();
        let got: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        assert_eq!(got, ["1", "3", "3"]);
        assert!(SymConst::expand_polynomial(parse("floor(x)").unwrap().root()).is_none());
    }
}
