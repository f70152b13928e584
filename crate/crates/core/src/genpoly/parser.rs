//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | base ('^' uint)?
//! base   := number ('/' number)? | 'x' | 'pi' | 'sqrt' '(' uint ')'
//!         | 'floor' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Decimal literals are exact rationals (`0.1` is `1/10`), `a - b` becomes
//! `a + (-1)*b`, and `v^k` is unrolled into `k - 1` multiplications.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Constant, GpExpr, Node};
use crate::error::{Error, Result};

const MAX_POWER: u32 = 64;

const BASE_START: &[&str] = &["number", "x", "pi", "sqrt", "floor", "(", "-"];

pub fn parse(text: &str) -> Result<GpExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["+", "-", "*", "^", "end of input"]));
    }
    Ok(GpExpr::new(root))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &[&'static str]) -> Error {
        Error::Syntax {
            offset: self.pos,
            expected: expected.to_vec(),
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

    fn expect(&mut self, byte: u8, name: &'static str) -> Result<()> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Node::add(acc, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Node::add(acc, negate(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = Node::mul(acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Node> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(negate(inner));
        }
        let base = self.base()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let k = self.uint()?;
        if k > MAX_POWER as u64 {
            self.pos = start;
            return Err(self.error(&["exponent <= 64"]));
        }
        if k == 0 {
            return Ok(Node::Const(Constant::int(1)));
        }
        let mut acc = base.clone();
        for _ in 1..k {
            acc = Node::mul(acc, base.clone());
        }
        Ok(acc)
    }

    fn base(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error(BASE_START)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', ")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.number()?;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    let den = self.number()?;
                    if den.is_zero() {
                        self.pos = at;
                        return Err(self.error(&["nonzero denominator"]));
                    }
                    Ok(Node::Const(Constant::Rational(num / den)))
                } else {
                    Ok(Node::Const(Constant::Rational(num)))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    b"x" => Ok(Node::Var),
                    b"pi" => Ok(Node::Const(Constant::Pi)),
                    b"sqrt" => {
                        self.expect(b'(', "(")?;
                        self.skip_ws();
                        let k = self.uint()?;
                        self.expect(b')', ")")?;
                        Ok(Node::Const(Constant::Sqrt(k)))
                    }
                    b"floor" => {
                        self.expect(b'(', "(")?;
                        let e = self.expr()?;
                        self.expect(b')', ")")?;
                        Ok(Node::floor(e))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(BASE_START))
                    }
                }
            }
            Some(_) => Err(self.error(BASE_START)),
        }
    }

    fn digits(&mut self) -> &[u8] {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn uint(&mut self) -> Result<u64> {
        let at = self.pos;
        let d = self.digits();
        if d.is_empty() {
            return Err(self.error(&["unsigned integer"]));
        }
        let s = std::str::from_utf8(d).expect("ascii digits");
        s.parse().map_err(|_| {
            let mut e = self.error(&["unsigned integer < 2^64"]);
            if let Error::Syntax { offset, .. } = &mut e {
                *offset = at;
            }
            e
        })
    }

    fn number(&mut self) -> Result<BigRational> {
        self.skip_ws();
        let int_part = self.digits().to_vec();
        if int_part.is_empty() {
            return Err(self.error(&["number"]));
        }
        let mut digits = int_part;
        let mut frac_len = 0u32;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits().to_vec();
            if frac.is_empty() {
                return Err(self.error(&["digit"]));
            }
            frac_len = frac.len() as u32;
            digits.extend(frac);
        }
        let s = std::str::from_utf8(&digits).expect("ascii digits");
        let numer: BigInt = s.parse().expect("digit string");
        let denom = num_traits::pow(BigInt::from(10), frac_len as usize);
        Ok(BigRational::new(numer, denom))
    }
}

/// `-v`, folding into rational literals so that printed negative constants
/// reparse to the same tree.
fn negate(v: Node) -> Node {
    match v {
        Node::Const(Constant::Rational(q)) => Node::Const(Constant::Rational(-q)),
        other => Node::mul(Node::Const(Constant::Rational(-BigRational::one())), other),
    }
}
