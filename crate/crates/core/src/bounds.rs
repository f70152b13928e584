//! Exponent calculators for the discrepancy propositions and the main
//! decay estimate, the Weyl-differencing and linear-sum inequalities, and
//! the empirical bound scan.
//!
//! With `p_d = 2^(d-1)` and `c_d = 2 - 2^(2-d)` the bounds read
//! `D_N << a^aExp N^(-nExp)`:
//!
//! | bound   | aExp                               | nExp |
//! |---------|------------------------------------|------|
//! | prop 1  | `dt / (p_d(t+1) + t)`               | `c_d / (p_d(2t+1) + t)` |
//! | prop 2  | `2dt / (p_d(2t+1) + 4t + 1)`        | `c_d / (p_d(2t+1) + 7t + 2)` |
//! | prop 3  | `3dt / (2^d(3t+1) + 5t + 1)`        | `c_d p_d (3t+1) / ((p_d(3t+1) + 21t + 5)(2^d(3t+1) + 4t + 1))` |
//!
//! Prop 1 needs `a <= N^(c_d/(dt))`; the progression-length split uses
//! `a <= x^thr` with `thr = 1/(2^d(3t+1) + 21t + 5)^2`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::analytic::dist_to_int;
use crate::error::{Error, Result};
use crate::genpoly::GpExpr;
use crate::measures::{discrepancy, well_distribution};
use crate::sequence::{fractional_parts, generate};

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow2(e: i32) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// `"p/q"`, also for integers.
pub fn ratio_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.5"`.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let bad = || Error::Domain(format!("not a rational number: {text}"));
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let (a, b): (BigInt, BigInt) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((i, f)) = t.split_once('.') {
        let digits = format!("{i}{f}");
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), f.len());
        return Ok(BigRational::new(num, den));
    }
    Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
}

fn check_dt(d: u32, t: &BigRational) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(format!("degree {d} < 2")));
    }
    if d > 62 {
        return Err(Error::Domain(format!("degree {d} too large")));
    }
    if !t.is_positive() {
        return Err(Error::Domain(format!("type t = {t} must be positive")));
    }
    Ok(())
}

/// `(p_d, c_d, d)` as rationals.
fn common(d: u32) -> (BigRational, BigRational, BigRational) {
    let p = pow2(d as i32 - 1);
    let c = q(2) - pow2(2 - d as i32);
    (p, c, q(d as i64))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentSet {
    pub d: u32,
    pub t: BigRational,
    pub a_exp: BigRational,
    pub n_exp: BigRational,
    pub precond_a_exp: Option<BigRational>,
    pub eta_candidate: Option<BigRational>,
    pub threshold_exp: Option<BigRational>,
}

impl ExponentSet {
    fn new(d: u32, t: &BigRational, a_exp: BigRational, n_exp: BigRational) -> Self {
        ExponentSet {
            d,
            t: t.clone(),
            a_exp,
            n_exp,
            precond_a_exp: None,
            eta_candidate: None,
            threshold_exp: None,
        }
    }

    /// `a^aExp N^(-nExp)`.
    pub fn bound(&self, a: f64, n: f64) -> f64 {
        let ae = self.a_exp.to_f64().unwrap_or(f64::NAN);
        let ne = self.n_exp.to_f64().unwrap_or(f64::NAN);
        a.powf(ae) * n.powf(-ne)
    }
}

impl Serialize for ExponentSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("d", &self.d)?;
        m.serialize_entry("t", &ratio_str(&self.t))?;
        m.serialize_entry("aExp", &ratio_str(&self.a_exp))?;
        m.serialize_entry("nExp", &ratio_str(&self.n_exp))?;
        for (k, v) in [
            ("precondAExp", &self.precond_a_exp),
            ("etaCandidate", &self.eta_candidate),
            ("thresholdExp", &self.threshold_exp),
        ] {
            if let Some(v) = v {
                m.serialize_entry(k, &ratio_str(v))?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyLemmaExponents {
    /// Exponent of `a^(sd) |k_1 ... k_s|`.
    pub ak_exp: BigRational,
    /// Exponent of `N` in the bound for the `2^(d-1)`-th power of the sum.
    pub n_exp: BigRational,
}

/// `(t/(st+1), 2^(d-1) - c_d/(st+1))`.
pub fn key_lemma_exponents(d: u32, t: &BigRational, s: u32) -> Result<KeyLemmaExponents> {
    check_dt(d, t)?;
    if s < 1 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    let (p, c, _) = common(d);
    let st1 = q(s as i64) * t + q(1);
    Ok(KeyLemmaExponents {
        ak_exp: t / &st1,
        n_exp: p - c / st1,
    })
}

pub fn prop1_exponents(d: u32, t: &BigRational) -> Result<ExponentSet> {
    check_dt(d, t)?;
    let (p, c, dd) = common(d);
    let a_exp = &dd * t / (&p * (t + q(1)) + t);
    let n_exp = &c / (&p * (q(2) * t + q(1)) + t);
    let mut e = ExponentSet::new(d, t, a_exp, n_exp);
    e.precond_a_exp = Some(c / (dd * t));
    Ok(e)
}

pub fn prop2_exponents(d: u32, t: &BigRational) -> Result<ExponentSet> {
    check_dt(d, t)?;
    let (p, c, dd) = common(d);
    let base = &p * (q(2) * t + q(1));
    let a_exp = q(2) * dd * t / (&base + q(4) * t + q(1));
    let n_exp = c / (base + q(7) * t + q(2));
    Ok(ExponentSet::new(d, t, a_exp, n_exp))
}

pub fn prop3_exponents(d: u32, t: &BigRational) -> Result<ExponentSet> {
    check_dt(d, t)?;
    let (p, c, dd) = common(d);
    let t31 = q(3) * t + q(1);
    let two_d = pow2(d as i32);
    let a_exp = q(3) * dd * t / (&two_d * &t31 + q(5) * t + q(1));
    let n_exp = c * &p * &t31
        / ((&p * &t31 + q(21) * t + q(5)) * (&two_d * &t31 + q(4) * t + q(1)));
    let mut e = ExponentSet::new(d, t, a_exp, n_exp);
    e.threshold_exp = Some(threshold_exp(d, t)?);
    Ok(e)
}

/// `1/(2^d(3t+1) + 21t + 5)^2`.
pub fn threshold_exp(d: u32, t: &BigRational) -> Result<BigRational> {
    check_dt(d, t)?;
    let b = pow2(d as i32) * (q(3) * t + q(1)) + q(21) * t + q(5);
    Ok((&b * &b).recip())
}

/// Both branches of the split on the progression step.
///
/// For `a <= x^thr`, `|U| <= 2 M D_M` with `M <= x` and the prop 3 bound
/// give `|U| << x^(1 - nExp + thr aExp)`, so that branch decays with
/// `nExp - thr aExp`. For `a > x^thr` the trivial `|U| <= M < x^(1-thr)`
/// gives `thr`. The candidate exponent is the smaller of the two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaComposition {
    pub threshold: BigRational,
    pub small_step: BigRational,
    pub large_step: BigRational,
    pub candidate: BigRational,
}

pub fn eta_composition(d: u32, t: &BigRational) -> Result<EtaComposition> {
    let p3 = prop3_exponents(d, t)?;
    let thr = threshold_exp(d, t)?;
    let small = &p3.n_exp - &thr * &p3.a_exp;
    let candidate = small.clone().min(thr.clone());
    Ok(EtaComposition {
        threshold: thr.clone(),
        small_step: small,
        large_step: thr,
        candidate,
    })
}

/// Prop 3 exponents together with the threshold and the `eta` candidate.
pub fn theorem_eta(d: u32, t: &BigRational) -> Result<ExponentSet> {
    let mut e = prop3_exponents(d, t)?;
    let eta = eta_composition(d, t)?;
    e.eta_candidate = Some(eta.candidate);
    e.threshold_exp = Some(eta.threshold);
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop {
    One,
    Two,
    Three,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropBound {
    /// `a^aExp N^(-nExp)`, absent when the precondition fails.
    pub value: Option<f64>,
    #[serde(rename = "preconditionOk")]
    pub precondition_ok: bool,
    pub warning: Option<String>,
}

/// Bound value at `(a, N)`. Prop 1 refuses steps above its cap; props 2
/// and 3 state no cap, so they only warn when prop 1's cap fails.
pub fn prop_bound(prop: Prop, d: u32, t: &BigRational, a: u64, n: u64) -> Result<PropBound> {
    if a == 0 || n == 0 {
        return Err(Error::Domain("a and N must be positive".into()));
    }
    let p1 = prop1_exponents(d, t)?;
    let cap = p1.precond_a_exp.as_ref().and_then(|c| c.to_f64()).unwrap_or(0.0);
    let within = (a as f64).ln() <= cap * (n as f64).ln() + 1e-12;
    let set = match prop {
        Prop::One => p1,
        Prop::Two => prop2_exponents(d, t)?,
        Prop::Three => prop3_exponents(d, t)?,
    };
    let value = set.bound(a as f64, n as f64);
    Ok(match (prop, within) {
        (_, true) => PropBound {
            value: Some(value),
            precondition_ok: true,
            warning: None,
        },
        (Prop::One, false) => PropBound {
            value: None,
            precondition_ok: false,
            warning: Some(format!("a = {a} exceeds N^{}", ratio_str(set_cap(d, t)?.as_ref().unwrap()))),
        },
        (_, false) => PropBound {
            value: Some(value),
            precondition_ok: true,
            warning: Some(format!(
                "a = {a} exceeds the prop 1 cap N^{}; no cap is stated for this bound",
                ratio_str(set_cap(d, t)?.as_ref().unwrap())
            )),
        },
    })
}

fn set_cap(d: u32, t: &BigRational) -> Result<Option<BigRational>> {
    Ok(prop1_exponents(d, t)?.precond_a_exp)
}

/// Parameter choices made inside the proofs, evaluated at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofParameters {
    pub d: u32,
    pub t: f64,
    pub n: u64,
    pub a: u64,
    pub h: u64,
    pub eps: f64,
    /// Key lemma with `s` atoms and `|k_1 ... k_s| = kprod`:
    /// `L = N^c_d`, `J = a^(-dst/(st+1)) kprod^(-t/(st+1)) L^(1/(st+1))`.
    pub key_l: f64,
    pub key_j: f64,
    /// Prop 1: `H = ceil(N^(c_d/(p_d(2t+1))) a^(dt/(p_d(2t+1)+t)))`.
    pub prop1_h: f64,
    /// Prop 2: `delta^-1 = h N^theta`, `K = h^rho N^theta`, `H = a^-sigma N^theta`.
    pub prop2_delta: f64,
    pub prop2_k: f64,
    pub prop2_h: f64,
    pub prop2_rho: f64,
    pub prop2_r: u32,
    pub prop2_sigma: f64,
    pub prop2_theta: f64,
    /// Prop 3: `delta1^-1 = h N^theta1`, `K1 = h^rho1 N^theta1`,
    /// `delta2^-1 = |h k1| N^theta2`, `K2 = |h k1|^rho2 N^theta2`,
    /// `H = a^-sigma N^theta1`.
    pub prop3_h: f64,
    pub prop3_delta1: f64,
    pub prop3_k1: f64,
    pub prop3_delta2: f64,
    pub prop3_k2: f64,
    pub prop3_rho1: f64,
    pub prop3_rho2: f64,
    pub prop3_r: u32,
    pub prop3_sigma: f64,
    pub prop3_theta1: f64,
    pub prop3_theta2: f64,
}

fn f(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Evaluates every displayed parameter choice. `eps` plays the role of the
/// small `rho - 1`, and the smoothing order is the least integer above
/// `1/eps`. In prop 3, `k1` is the outer Fourier index.
#[allow(clippy::too_many_arguments)]
pub fn proof_parameters(
    d: u32,
    t: &BigRational,
    n: u64,
    a: u64,
    h: u64,
    s: u32,
    kprod: u64,
    k1: u64,
    eps: f64,
) -> Result<ProofParameters> {
    check_dt(d, t)?;
    if n == 0 || a == 0 || h == 0 || s == 0 || kprod == 0 || k1 == 0 || eps.is_nan() || eps <= 0.0 {
        return Err(Error::Domain("N, a, h, s, kprod, k1 and eps must be positive".into()));
    }
    let (p, c, dd) = common(d);
    let (nf, af, hf) = (n as f64, a as f64, h as f64);
    let st1 = q(s as i64) * t + q(1);
    let key_l = nf.powf(f(&c));
    let key_j = af.powf(-f(&(&dd * q(s as i64) * t / &st1)))
        * (kprod as f64).powf(-f(&(t / &st1)))
        * key_l.powf(f(&st1.recip()));

    let t21 = q(2) * t + q(1);
    let prop1_h = (nf.powf(f(&(&c / (&p * &t21)))) * af.powf(f(&(&dd * t / (&p * &t21 + t))))).ceil();

    let p2 = prop2_exponents(d, t)?;
    let (sigma2, theta2_) = (f(&p2.a_exp), f(&p2.n_exp));
    let rho = 1.0 + eps;
    let r = (1.0 / eps).floor() as u32 + 1;

    let p3 = prop3_exponents(d, t)?;
    let (sigma3, theta1) = (f(&p3.a_exp), f(&p3.n_exp));
    let t31 = q(3) * t + q(1);
    let theta2 = f(&(&c / (&p * &t31 + q(4) * t + q(1))));
    let hk = hf * k1 as f64;

    Ok(ProofParameters {
        d,
        t: f(t),
        n,
        a,
        h,
        eps,
        key_l,
        key_j,
        prop1_h: prop1_h.max(1.0),
        prop2_delta: 1.0 / (hf * nf.powf(theta2_)),
        prop2_k: hf.powf(rho) * nf.powf(theta2_),
        prop2_h: af.powf(-sigma2) * nf.powf(theta2_),
        prop2_rho: rho,
        prop2_r: r,
        prop2_sigma: sigma2,
        prop2_theta: theta2_,
        prop3_h: af.powf(-sigma3) * nf.powf(theta1),
        prop3_delta1: 1.0 / (hf * nf.powf(theta1)),
        prop3_k1: hf.powf(rho) * nf.powf(theta1),
        prop3_delta2: 1.0 / (hk * nf.powf(theta2)),
        prop3_k2: hk.powf(rho) * nf.powf(theta2),
        prop3_rho1: rho,
        prop3_rho2: rho,
        prop3_r: r,
        prop3_sigma: sigma3,
        prop3_theta1: theta1,
        prop3_theta2: theta2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|(1/(8N)) sum lambda_m|^(2^k)` against
/// `1/(8Q) + Q^(2^(1-k) - 2)/8 * sum_{r_1 <= Q} ... sum_{r_k <= Q^(2^(1-k))}
/// |(1/N) sum_{m <= N - r_1 - ... - r_k} Delta_{r_1..r_k} lambda_m|`,
/// with `Delta_r lambda_m = lambda_{m+r} conj(lambda_m)` iterated.
pub fn weyl_check(lambdas: &[Complex64], k: u32, q_param: f64) -> Result<InequalityCheck> {
    let n = lambdas.len();
    if n == 0 || k == 0 {
        return Err(Error::Domain("need N >= 1 and k >= 1".into()));
    }
    if !(1.0..=n as f64).contains(&q_param) {
        return Err(Error::Domain(format!("Q = {q_param} not in [1, N]")));
    }
    if k > 6 {
        return Err(Error::Domain(format!("k = {k} too large")));
    }
    if lambdas.iter().any(|l| l.norm() > 1.0 + 1e-12) {
        return Err(Error::Domain("some |lambda_m| exceeds 1".into()));
    }
    let nf = n as f64;
    let mean: Complex64 = lambdas.iter().sum::<Complex64>() / (8.0 * nf);
    let lhs = mean.norm().powi(1 << k);

    let limits: Vec<usize> = (0..k)
        .map(|i| q_param.powf(0.5f64.powi(i as i32)).floor() as usize)
        .collect();
    let total = nested_sum(lambdas, &limits, nf);
    let rhs = 1.0 / (8.0 * q_param) + total / (8.0 * q_param.powf(2.0 - 2f64.powi(1 - k as i32)));
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

fn nested_sum(seq: &[Complex64], limits: &[usize], nf: f64) -> f64 {
    match limits.split_first() {
        None => (seq.iter().sum::<Complex64>()).norm() / nf,
        Some((&lim, rest)) => {
            let mut total = 0.0;
            let mut next = Vec::with_capacity(seq.len());
            for r in 1..=lim {
                if r >= seq.len() {
                    break;
                }
                next.clear();
                next.extend((0..seq.len() - r).map(|m| seq[m + r] * seq[m].conj()));
                total += nested_sum(&next, rest, nf);
            }
            total
        }
    }
}

/// `|sum_{n=n1+1}^{n2} e(alpha n)| = |sin(pi L beta)/sin(pi beta)|` against
/// `min(L, 1/(2 ||alpha||))`, `L = n2 - n1`, `beta = alpha - round(alpha)`.
pub fn linear_sum_check(alpha: f64, n1: i64, n2: i64) -> Result<InequalityCheck> {
    if n1 >= n2 {
        return Err(Error::Domain(format!("need n1 < n2, got {n1} >= {n2}")));
    }
    if !alpha.is_finite() {
        return Err(Error::Domain("alpha must be finite".into()));
    }
    let l = (n2 - n1) as f64;
    let beta = alpha - alpha.round();
    if beta == 0.0 {
        return Ok(InequalityCheck {
            lhs: l,
            rhs: l,
            holds: true,
        });
    }
    let pi = std::f64::consts::PI;
    // L beta is reduced mod 2 so that the sine stays accurate for long ranges
    let lb = l * beta - 2.0 * (l * beta / 2.0).round();
    let lhs = ((pi * lb).sin() / (pi * beta).sin()).abs();
    let rhs = l.min(1.0 / (2.0 * dist_to_int(alpha)));
    Ok(InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "W")]
    pub w: u64,
    #[serde(rename = "slopeSoFar")]
    pub slope_so_far: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "prop2Bound")]
    pub prop2_bound: f64,
    #[serde(rename = "prop3Bound")]
    pub prop3_bound: f64,
}

pub const SCAN_CSV_HEADER: &str = "N,W,slopeSoFar,D,prop2Bound,prop3Bound";

impl ScanRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.w, self.slope_so_far, self.d, self.prop2_bound, self.prop3_bound
        )
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Exact `W(E_N)` and `D_N({f(n)})` along `n_list`, next to the prop 2 and
/// prop 3 bounds at `a = 1` for an assumed type.
pub fn bound_scan(
    expr: &GpExpr,
    n_list: &[u64],
    a_max: Option<u64>,
    t_assumed: &BigRational,
    precision_bits: u32,
) -> Result<Vec<ScanRow>> {
    let shape = expr.recognize_theorem_shape()?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("N list must be positive and increasing".into()));
    }
    let top = *n_list.last().unwrap() as usize;
    let p2 = prop2_exponents(shape.d, t_assumed)?;
    let p3 = prop3_exponents(shape.d, t_assumed)?;
    let seq = generate(expr, top, precision_bits)?;
    let fracs = fractional_parts(expr, top, precision_bits)?;
    let mut rows: Vec<ScanRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let w = well_distribution(&seq.prefix(n as usize), a_max).w;
        let d = discrepancy(&fracs[..n as usize])?.d;
        let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).chain([n as f64]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.w as f64).chain([w as f64]).collect();
        rows.push(ScanRow {
            n,
            w,
            slope_so_far: loglog_slope(&xs, &ys),
            d,
            prop2_bound: p2.bound(1.0, n as f64),
            prop3_bound: p3.bound(1.0, n as f64),
        });
    }
    Ok(rows)
}
