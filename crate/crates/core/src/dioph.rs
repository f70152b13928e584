//! Continued fractions, distance to the nearest integer, an empirical
//! finite-type probe and the discrepancy bounds for `(l theta)` sequences.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactreal::{DyadicBall, PrecisionLadder, DEFAULT_PRECISION};
use crate::genpoly::{parse, SymConst};
use crate::measures::discrepancy;

/// `||x||`.
pub fn nearest_int_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A real constant from the expression grammar (no `x`, no floor), kept
/// symbolically so that rationals and quadratic surds can be handled
/// exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealConst {
    sym: SymConst,
}

impl RealConst {
    pub fn new(sym: SymConst) -> Self {
        RealConst { sym }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let e = parse(text)?;
        SymConst::from_node(e.root())
            .map(RealConst::new)
            .ok_or_else(|| Error::Domain(format!("{text} is not a constant without floor")))
    }

    pub fn rational(q: BigRational) -> Self {
        RealConst::new(SymConst::rational(q))
    }

    pub fn sym(&self) -> &SymConst {
        &self.sym
    }

    pub fn ball(&self, prec: u32) -> DyadicBall {
        self.sym.ball(prec)
    }

    /// `(p, q, d, r)` with value `(p + q sqrt(d))/r`, `r > 0`, when the
    /// constant is rational (`q = 0`) or a real quadratic surd.
    pub fn as_surd(&self) -> Option<(BigInt, BigInt, BigInt, BigInt)> {
        if let Some(q) = self.sym.as_rational() {
            return Some((q.numer().clone(), BigInt::zero(), BigInt::zero(), q.denom().clone()));
        }
        let (a, b, d) = self.sym.surd_parts()?;
        // (a1/a2) + (b1/b2) sqrt(d)
        let (a1, a2) = (a.numer().clone(), a.denom().clone());
        let (b1, b2) = (b.numer().clone(), b.denom().clone());
        Some((&a1 * &b2, &a2 * &b1, BigInt::from(d), a2 * b2))
    }
}

impl fmt::Display for RealConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.sym.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfExpansion {
    pub a0: BigInt,
    pub partial_quotients: Vec<BigInt>,
    /// `true` when computed by the exact rational or surd algorithm.
    pub exact_input: bool,
}

impl CfExpansion {
    /// All quotients `a0, a1, ...`.
    pub fn quotients(&self) -> Vec<BigInt> {
        std::iter::once(self.a0.clone())
            .chain(self.partial_quotients.iter().cloned())
            .collect()
    }

    /// Convergents `p_k / q_k`.
    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (self.a0.clone(), BigInt::one());
        let mut out = vec![(p1.clone(), q1.clone())];
        for a in &self.partial_quotients {
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            out.push((p1.clone(), q1.clone()));
        }
        out
    }
}

impl fmt::Display for CfExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.a0)?;
        for (i, a) in self.partial_quotients.iter().enumerate() {
            write!(f, "{}{a}", if i == 0 { "; " } else { ", " })?;
        }
        f.write_str("]")
    }
}

fn from_quotients(qs: Vec<BigInt>, exact: bool) -> CfExpansion {
    let mut it = qs.into_iter();
    CfExpansion {
        a0: it.next().expect("at least one quotient"),
        partial_quotients: it.collect(),
        exact_input: exact,
    }
}

/// First `count` quotients (`a0` included), fewer if a rational expansion
/// terminates first.
pub fn continued_fraction(x: &RealConst, count: usize) -> Result<CfExpansion> {
    if count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    match x.as_surd() {
        Some((p, q, d, r)) => {
            if q.is_zero() {
                return Ok(cf_rational(&BigRational::new(p, r), count));
            }
            let root = d.sqrt();
            if &root * &root == d {
                return Ok(cf_rational(&BigRational::new(p + q * root, r), count));
            }
            Ok(cf_surd(&p, &q, &d, &r, count))
        }
        None => cf_ball(x, count),
    }
}

pub fn cf_rational(x: &BigRational, count: usize) -> CfExpansion {
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    let mut qs = Vec::new();
    while qs.len() < count && !den.is_zero() {
        let (a, rem) = num.div_mod_floor(&den);
        qs.push(a);
        (num, den) = (den, rem);
    }
    from_quotients(qs, true)
}

/// `(p + q sqrt(d))/r` with `d` not a square, via complete quotients
/// `(P + sqrt(D))/Q` with `Q | D - P^2`.
fn cf_surd(p: &BigInt, q: &BigInt, d: &BigInt, r: &BigInt, count: usize) -> CfExpansion {
    // x = (p r + q r sqrt(d)) / r^2 = (P + s sqrt(D)) / Q, then fold the sign
    // s of q r into P and Q.
    let qr = q * r;
    let big_d = &qr * &qr * d;
    let (mut pp, mut qq) = (p * r, r * r);
    if qr.is_negative() {
        pp = -pp;
        qq = -qq;
    }
    debug_assert!(((&big_d - &pp * &pp) % &qq).is_zero());
    let sqrt_d = big_d.sqrt();
    let mut qs = Vec::with_capacity(count);
    while qs.len() < count {
        // floor((P + sqrt(D)) / Q) with sqrt(D) irrational
        let num = &pp + &sqrt_d;
        let a = if qq.is_positive() {
            num.div_floor(&qq)
        } else {
            -num.div_floor(&-&qq) - 1
        };
        pp = &a * &qq - &pp;
        qq = (&big_d - &pp * &pp) / &qq;
        qs.push(a);
    }
    from_quotients(qs, true)
}

/// Quotients valid for every point of a certified interval, refined up the
/// precision ladder until `count` are known.
fn cf_ball(x: &RealConst, count: usize) -> Result<CfExpansion> {
    let mut last = 0;
    for prec in PrecisionLadder::new(DEFAULT_PRECISION).rungs() {
        let b = x.ball(prec);
        let qs = cf_interval(b.lower(), b.upper(), count);
        if qs.len() >= count {
            return Ok(from_quotients(qs, false));
        }
        last = prec;
    }
    Err(Error::PrecisionExhausted {
        n: 0,
        node: format!("continued fraction of {x}"),
        bits: last,
    })
}

/// Common quotients of all reals in `[lo, hi]`.
fn cf_interval(mut lo: BigRational, mut hi: BigRational, count: usize) -> Vec<BigInt> {
    let mut qs = Vec::new();
    while qs.len() < count {
        let a = lo.floor();
        if hi.floor() != a {
            break;
        }
        qs.push(a.to_integer());
        let (l, h) = (&lo - &a, &hi - &a);
        if l.is_zero() {
            break;
        }
        (lo, hi) = (h.recip(), l.recip());
    }
    qs
}

/// `|x - p_k/q_k| < 1/(q_k q_{k+1})` for every consecutive pair, checked on
/// a certified ball.
pub fn convergent_inequality_holds(x: &DyadicBall, cf: &CfExpansion) -> bool {
    let conv = cf.convergents();
    conv.windows(2).all(|w| {
        let (p, q) = &w[0];
        let q_next = &w[1].1;
        let approx = BigRational::new(p.clone(), q.clone());
        let err = (x.lower() - &approx).abs().max((x.upper() - &approx).abs());
        err < BigRational::new(BigInt::one(), q * q_next)
    })
}

/// `||sum n_j gamma_j||` for many integer vectors, with the precision raised
/// only when a value cannot be certified.
struct LinearForms {
    gammas: Vec<RealConst>,
    rungs: Vec<u32>,
    tables: Vec<std::sync::OnceLock<Vec<DyadicBall>>>,
}

impl LinearForms {
    fn new(gammas: &[RealConst]) -> Self {
        let rungs = PrecisionLadder::new(DEFAULT_PRECISION).rungs();
        let tables = rungs.iter().map(|_| std::sync::OnceLock::new()).collect();
        LinearForms {
            gammas: gammas.to_vec(),
            rungs,
            tables,
        }
    }

    /// `None` when the form cannot be separated from an integer at the top
    /// precision.
    fn dist(&self, n: &[i64]) -> Option<f64> {
        (0..self.rungs.len()).find_map(|level| self.dist_at(n, level))
    }

    fn dist_at(&self, n: &[i64], level: usize) -> Option<f64> {
        let prec = self.rungs[level];
        let table = self.tables[level].get_or_init(|| self.gammas.iter().map(|g| g.ball(prec)).collect());
        let mut sum = DyadicBall::zero();
        for (k, g) in n.iter().zip(table) {
            if *k != 0 {
                sum = sum.add(&g.mul_int(&BigInt::from(*k)));
            }
        }
        let f = sum.frac_certified().ok()?;
        let one_minus = DyadicBall::from_int(1).sub(&f);
        let d = if f.center_f64() <= 0.5 { f } else { one_minus };
        // demand a few dozen significant bits
        let (m, r) = (d.mantissa().magnitude().clone(), d.radius().clone());
        if m.is_zero() || r << 40usize >= m {
            return None;
        }
        Some(d.center_f64())
    }
}

/// Empirical type of `(gamma_1, ..., gamma_s)` over the box `|n_j| <= Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteTypeEstimate {
    #[serde(rename = "tHat")]
    pub t_hat: f64,
    pub q: u64,
    pub witness: Vec<i64>,
    #[serde(rename = "cHat")]
    pub c_hat: f64,
}

pub const TYPE_PROBE_LIMIT: u64 = 20_000_000;

/// Smallest `t` such that `prod max(1, |n_j|)^t ||sum n_j gamma_j|| >= c`
/// holds over the searched box, where `c` is the minimum of
/// `||sum n_j gamma_j||` over the vectors with entries in `{-1, 0, 1}`
/// (product 1).
///
/// For vectors with product at least 2 this is
/// `max log(c / ||L_n||) / log(prod)`; vectors with product 1 only fix
/// `c`, which is reported as `c_hat`. The search uses `L_{-n} = -L_n`.
pub fn type_probe(gammas: &[RealConst], q: u64) -> Result<FiniteTypeEstimate> {
    let s = gammas.len();
    if s == 0 || q == 0 {
        return Err(Error::Domain("need s >= 1 and Q >= 1".into()));
    }
    let side = 2 * q as u128 + 1;
    let size = side.checked_pow(s as u32).unwrap_or(u128::MAX);
    if size > TYPE_PROBE_LIMIT as u128 {
        return Err(Error::TooLarge {
            size: size.min(usize::MAX as u128) as usize,
            limit: TYPE_PROBE_LIMIT as usize,
        });
    }
    let forms = LinearForms::new(gammas);
    let vectors = half_box(s, q as i64);
    let eval = |n: &Vec<i64>| forms.dist(n).ok_or_else(|| n.clone());
    #[cfg(feature = "parallel")]
    let dists: Vec<std::result::Result<f64, Vec<i64>>> = {
        use rayon::prelude::*;
        vectors.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let dists: Vec<std::result::Result<f64, Vec<i64>>> = vectors.iter().map(eval).collect();

    let mut values = Vec::with_capacity(vectors.len());
    for d in dists {
        match d {
            Ok(v) => values.push(v),
            Err(witness) => return Err(Error::RationalRelation { witness }),
        }
    }
    let prods: Vec<f64> = vectors
        .iter()
        .map(|n| n.iter().map(|&k| k.unsigned_abs().max(1) as f64).product())
        .collect();
    let c = values
        .iter()
        .zip(&prods)
        .filter(|(_, &p)| p == 1.0)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, usize)> = None;
    for (i, (&v, &p)) in values.iter().zip(&prods).enumerate() {
        if p < 2.0 {
            continue;
        }
        let t = (c / v).ln() / p.ln();
        if best.is_none_or(|(b, _)| t > b) {
            best = Some((t, i));
        }
    }
    let (t_hat, witness) = match best {
        Some((t, i)) => (t, vectors[i].clone()),
        // Q = 1 with s = 1: nothing beyond the anchor
        None => (0.0, vectors[0].clone()),
    };
    let c_hat = values
        .iter()
        .zip(&prods)
        .map(|(&v, &p)| p.powf(t_hat) * v)
        .fold(f64::INFINITY, f64::min);
    Ok(FiniteTypeEstimate {
        t_hat,
        q,
        witness,
        c_hat,
    })
}

/// Nonzero vectors of `[-q, q]^s` whose first nonzero entry is positive,
/// in lexicographic order.
fn half_box(s: usize, q: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-q; s];
    loop {
        if let Some(first) = v.iter().find(|&&k| k != 0) {
            if *first > 0 {
                out.push(v.clone());
            }
        }
        let mut i = s;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < q {
                v[i] += 1;
                break;
            }
            v[i] = -q;
        }
    }
}

/// Fractional parts `{l theta}`, `l = 1..=L`, and `||l theta||` for
/// `l = 1..=J`.
fn multiples(theta: &RealConst, count: u64) -> std::result::Result<Vec<(f64, f64)>, u64> {
    let forms = LinearForms::new(std::slice::from_ref(theta));
    let ball = theta.ball(DEFAULT_PRECISION);
    (1..=count)
        .map(|l| {
            let d = forms.dist(&[l as i64]).ok_or(l)?;
            let f = ball
                .mul_int(&BigInt::from(l))
                .frac_certified()
                .ok()
                .and_then(|f| f.to_f64().ok())
                .unwrap_or(if d < 0.5 { 0.0 } else { 0.5 });
            Ok((f.min(1.0 - f64::EPSILON / 2.0), d))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NthetaReport {
    pub rhs: f64,
    #[serde(rename = "exactD")]
    pub exact_d: f64,
    #[serde(rename = "cRatio")]
    pub c_ratio: f64,
}

/// `D_L((l theta))` against `1/J + (1/L) sum_{j <= J} 1/(j ||j theta||)`.
pub fn ntheta_discrepancy_bound(theta: &RealConst, l: u64, j: u64) -> Result<NthetaReport> {
    if l == 0 || j == 0 {
        return Err(Error::Domain("need L >= 1 and J >= 1".into()));
    }
    let m = multiples(theta, l.max(j)).map_err(|k| Error::RationalRelation {
        witness: vec![k as i64],
    })?;
    let points: Vec<f64> = m[..l as usize].iter().map(|p| p.0).collect();
    let exact_d = discrepancy(&points)?.d;
    let s: f64 = m[..j as usize]
        .iter()
        .enumerate()
        .map(|(i, p)| 1.0 / ((i + 1) as f64 * p.1))
        .sum();
    let rhs = 1.0 / j as f64 + s / l as f64;
    Ok(NthetaReport {
        rhs,
        exact_d,
        c_ratio: exact_d / rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimaReport {
    pub lhs: f64,
    pub rhs: f64,
    #[serde(rename = "cRatio")]
    pub c_ratio: f64,
}

/// `sum_{l <= L} min(N, 1/||l xi||)` against `L log N (1 + N D_L((l xi)))`.
/// Terms with `||l xi|| = 0` count as `N`.
pub fn sum_of_minima(xi: &RealConst, l: u64, n: u64) -> Result<MinimaReport> {
    if l < 2 || n < 2 {
        return Err(Error::Domain("need L >= 2 and N >= 2".into()));
    }
    let forms = LinearForms::new(std::slice::from_ref(xi));
    let ball = xi.ball(DEFAULT_PRECISION);
    let nf = n as f64;
    let mut lhs = 0.0;
    let mut points = Vec::with_capacity(l as usize);
    let mut degenerate = 0;
    for k in 1..=l {
        let v = ball.mul_int(&BigInt::from(k));
        match forms.dist(&[k as i64]) {
            Some(d) => {
                lhs += nf.min(1.0 / d);
                let f = v.frac_certified().ok().and_then(|f| f.to_f64().ok()).unwrap_or(0.0);
                points.push(f.min(1.0 - f64::EPSILON / 2.0));
            }
            None => {
                degenerate += 1;
                lhs += nf;
                points.push(0.0);
            }
        }
    }
    if degenerate == l {
        return Err(Error::RationalRelation { witness: vec![1] });
    }
    let d = discrepancy(&points)?.d;
    let rhs = l as f64 * nf.ln() * (1.0 + nf * d);
    Ok(MinimaReport {
        lhs,
        rhs,
        c_ratio: lhs / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rc(s: &str) -> RealConst {
        RealConst::parse(s).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&k| BigInt::from(k)).collect()
    }

    #[test]
    fn nearest_int_examples() {
        assert!((nearest_int_dist(2.3) - 0.3).abs() < 1e-15);
        assert_eq!(nearest_int_dist(-0.5), 0.5);
        assert_eq!(nearest_int_dist(7.0), 0.0);
    }

    #[test]
    fn cf_examples() {
        let c = continued_fraction(&rc("sqrt(2)"), 50).unwrap();
        assert!(c.exact_input);
        assert_eq!(c.a0, BigInt::from(1));
        assert_eq!(c.partial_quotients, vec![BigInt::from(2); 49]);

        let c = continued_fraction(&rc("(1+sqrt(5))*1/2"), 30).unwrap();
        assert_eq!(c.quotients(), vec![BigInt::from(1); 30]);

        let c = continued_fraction(&rc("355/113"), 10).unwrap();
        assert_eq!(c.quotients(), ints(&[3, 7, 16]));
        assert_eq!(c.to_string(), "[3; 7, 16]");

        let c = continued_fraction(&rc("-1/2 + (-1)*sqrt(3)"), 6).unwrap();
        // -(1/2 + sqrt 3) = -2.2320508...
        assert_eq!(c.a0, BigInt::from(-3));
        let b = rc("-1/2 + (-1)*sqrt(3)").ball(512);
        assert!(convergent_inequality_holds(&b, &continued_fraction(&rc("-1/2 + (-1)*sqrt(3)"), 40).unwrap()));

        // perfect squares collapse to rationals
        assert_eq!(continued_fraction(&rc("sqrt(9)*1/2"), 5).unwrap().quotients(), ints(&[1, 2]));
    }

    #[test]
    fn cf_ball_path_agrees_with_known_expansions() {
        // pi = [3; 7, 15, 1, 292, 1, 1, 1, 2, 1, 3, ...]
        let c = continued_fraction(&rc("pi"), 11).unwrap();
        assert!(!c.exact_input);
        assert_eq!(c.quotients(), ints(&[3, 7, 15, 1, 292, 1, 1, 1, 2, 1, 3]));
        // surd through the interval path must match the exact path
        let exact = cf_surd(&1.into(), &1.into(), &7.into(), &3.into(), 40);
        let b = rc("1/3 + 1/3*sqrt(7)").ball(512);
        let approx = cf_interval(b.lower(), b.upper(), 40);
        assert_eq!(exact.quotients(), approx);
        // many quotients force a climb up the ladder
        assert_eq!(continued_fraction(&rc("pi*sqrt(2)"), 200).unwrap().quotients().len(), 200);
    }

    #[test]
    fn convergents_of_sqrt2() {
        let c = continued_fraction(&rc("sqrt(2)"), 8).unwrap();
        let conv = c.convergents();
        assert_eq!(conv[3], (BigInt::from(17), BigInt::from(12)));
        let x = rc("sqrt(2)").ball(1024);
        assert!(convergent_inequality_holds(&x, &continued_fraction(&rc("sqrt(2)"), 50).unwrap()));
    }

    #[test]
    fn type_probe_examples() {
        let phi = type_probe(&[rc("(1+sqrt(5))*1/2")], 10_000).unwrap();
        assert!((0.9..=1.1).contains(&phi.t_hat), "{phi:?}");
        assert!(phi.c_hat > 0.0);
        match type_probe(&[rc("1/3")], 10) {
            Err(Error::RationalRelation { witness }) => assert_eq!(witness, vec![3]),
            other => panic!("{other:?}"),
        }
        let pair = type_probe(&[rc("sqrt(2)"), rc("sqrt(3)")], 30).unwrap();
        assert!(pair.t_hat > 0.0 && pair.t_hat.is_finite());
        assert_eq!(pair.witness.len(), 2);
        assert!(type_probe(&[rc("sqrt(2)"), rc("sqrt(8)")], 3).is_err());
    }

    #[test]
    fn type_probe_is_monotone_in_q() {
        let phi = [rc("(1+sqrt(5))*1/2")];
        let mut prev = f64::NEG_INFINITY;
        for q in [2, 5, 13, 100, 1000, 4000] {
            let t = type_probe(&phi, q).unwrap().t_hat;
            assert!(t >= prev && t <= 1.1);
            prev = t;
        }
    }

    #[test]
    fn half_box_layout() {
        assert_eq!(half_box(1, 2), vec![vec![1], vec![2]]);
        let v = half_box(2, 1);
        assert_eq!(v, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(half_box(3, 2).len(), (5usize.pow(3) - 1) / 2);
    }

    #[test]
    fn ntheta_examples() {
        let ratios: Vec<f64> = [100, 1000, 10000]
            .iter()
            .map(|&l| ntheta_discrepancy_bound(&rc("sqrt(2)"), l, 31).unwrap().c_ratio)
            .collect();
        // J is fixed, so the right side levels off at 1/J while D_L keeps
        // falling: one constant covers the sweep
        assert!(ratios.iter().all(|&r| r > 0.0 && r < 1.0), "{ratios:?}");
        let r = ntheta_discrepancy_bound(&rc("(1+sqrt(5))*1/2"), 500, 500).unwrap();
        assert!(r.c_ratio < 10.0);
        assert!(matches!(
            ntheta_discrepancy_bound(&rc("1/2"), 10, 5),
            Err(Error::RationalRelation { .. })
        ));
    }

    #[test]
    fn minima_examples() {
        // hand enumeration for phi, L = N = 10
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let hand: f64 = (1..=10).map(|l| 10f64.min(1.0 / nearest_int_dist(l as f64 * phi))).sum();
        let r = sum_of_minima(&rc("(1+sqrt(5))*1/2"), 10, 10).unwrap();
        assert!((r.lhs - hand).abs() < 1e-9, "{} vs {hand}", r.lhs);
        let a = sum_of_minima(&rc("sqrt(2)"), 1000, 1000).unwrap();
        let b = sum_of_minima(&rc("sqrt(2)"), 2000, 1000).unwrap();
        assert!(a.lhs <= a.rhs && b.lhs <= b.rhs);
        assert!((0.5..2.0).contains(&(b.c_ratio / a.c_ratio)));
        // rational input: degenerate terms count N
        let r = sum_of_minima(&rc("1/2"), 4, 10).unwrap();
        assert_eq!(r.lhs, 2.0 + 10.0 + 2.0 + 10.0);
        assert!(sum_of_minima(&rc("3"), 4, 10).is_err());
    }
}
