//! Exponential sums, the Erdős–Turán bound and the smoothed sawtooth
//! `G_r(x, tau, delta)`, the `r`-fold box average of `F(x, tau) = e(tau {x})`,
//! together with checks of its Fourier tail, `p`-norm and approximation error.
//!
//! Fourier convention: `G_r(x) = sum_k Ĝ_r(k) e(-k x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genpoly::{Evaluator, GpExpr};
use crate::measures::discrepancy;
use crate::sequence::map_indices;

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// `||x||`, distance to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `sum_{n=1}^{N} e(h f(a n + b))`.
///
/// Every phase `{|h| f(a n + b)}` is reduced in certified arithmetic before
/// it is turned into an `f64`; negative `h` conjugates each term, so
/// `exp_sum(-h) = conj(exp_sum(h))` holds exactly.
pub fn exp_sum(expr: &GpExpr, h: i64, n: u64, a: u64, b: i64, precision_bits: u32) -> Result<Complex64> {
    if h == 0 {
        return Err(Error::Domain("h must be nonzero".into()));
    }
    if a == 0 || a as i64 + b < 1 {
        return Err(Error::OutOfRange(format!("a = {a}, b = {b}: first index below 1")));
    }
    let ev = Evaluator::new(expr, precision_bits);
    let phases = map_indices(n as usize, |m| {
        ev.phase_f64((a as i64 * m as i64 + b) as u64, h.unsigned_abs())
    })?;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in phases {
        let t = e(p);
        sum += if h < 0 { t.conj() } else { t };
    }
    Ok(sum)
}

/// `|(1/N) sum_n e(h x_n)|` for `h = 1..=H`.
pub fn normalized_sums(points: &[f64], h_max: u64) -> Vec<f64> {
    let n = points.len() as f64;
    let one = |h: u64| {
        let s: Complex64 = points
            .iter()
            .map(|&x| e((h as f64 * x).rem_euclid(1.0)))
            .sum();
        s.norm() / n
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (1..=h_max).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (1..=h_max).map(one).collect()
    }
}

/// `2/(H+1) + 2 sum_{h=1}^{H} (1/h) |(1/N) sum_n e(h x_n)|`, an upper bound
/// for the extreme discrepancy of the points.
pub fn erdos_turan_rhs(points: &[f64], h_max: u64) -> Result<f64> {
    if h_max == 0 {
        return Err(Error::Domain("H must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::Domain("no points".into()));
    }
    let sums = normalized_sums(points, h_max);
    let tail: f64 = sums.iter().enumerate().map(|(i, s)| s / (i + 1) as f64).sum();
    Ok(2.0 / (h_max as f64 + 1.0) + 2.0 * tail)
}

/// `F(x, tau) = e(tau {x})`.
pub fn f_eval(x: f64, tau: f64) -> Complex64 {
    e(tau * x.rem_euclid(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingParams {
    pub r: u32,
    pub delta: f64,
    pub tau: f64,
    #[serde(rename = "kCut")]
    pub k_cut: u64,
}

impl SmoothingParams {
    pub fn new(r: u32, delta: f64, tau: f64, k_cut: u64) -> Result<Self> {
        let p = SmoothingParams { r, delta, tau, k_cut };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 1 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta = {} not in (0, 1)", self.delta)));
        }
        if self.k_cut < 1 {
            return Err(Error::Domain("K must be at least 1".into()));
        }
        if !self.tau.is_finite() {
            return Err(Error::Domain("tau must be finite".into()));
        }
        Ok(())
    }

    /// `0 < delta < min(1/(2|tau|), 1)`, needed for the `p`-norm bound.
    pub fn pnorm_precondition(&self) -> bool {
        self.delta < 1.0 && 2.0 * self.tau.abs() * self.delta < 1.0
    }

    /// `|tau + k| >= |k|/2` for every `|k| > K`, which is the same as
    /// `2|tau| <= K + 1`.
    pub fn tail_precondition(&self) -> bool {
        2.0 * self.tau.abs() <= self.k_cut as f64 + 1.0
    }
}

/// `sin(pi t)` with exact zeros at the integers.
fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

/// `sin(x)/x` with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `F̂(k, tau) = (e(tau) - 1) / (2 pi i (tau + k))`, and `1` when
/// `tau + k = 0`.
pub fn f_fourier_coeff(k: i64, tau: f64) -> Complex64 {
    let s = tau + k as f64;
    if s == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // e(tau) - 1 = 2i sin(pi tau) e(tau/2)
    e(tau / 2.0) * (sin_pi(tau) / (PI * s))
}

/// Closed form `Ĝ_r(k) = F̂(k, tau) (sin(2 pi k delta) / (2 pi k delta))^r`.
pub fn g_fourier_coeff(k: i64, p: &SmoothingParams) -> Complex64 {
    let f = f_fourier_coeff(k, p.tau);
    if k == 0 || f == Complex64::new(0.0, 0.0) {
        return f;
    }
    f * sinc(2.0 * PI * k as f64 * p.delta).powi(p.r as i32)
}

/// Coefficients for `k = -K..=K`.
fn coeff_table(p: &SmoothingParams) -> Vec<Complex64> {
    let k = p.k_cut as i64;
    (-k..=k).map(|j| g_fourier_coeff(j, p)).collect()
}

fn series_at(table: &[Complex64], x: f64) -> Complex64 {
    let k = (table.len() / 2) as i64;
    let x = x.rem_euclid(1.0);
    table
        .iter()
        .zip(-k..=k)
        .filter(|(c, _)| c.re != 0.0 || c.im != 0.0)
        .map(|(c, j)| c * e(-(j as f64) * x))
        .sum()
}

/// Truncated series `sum_{|k| <= K} Ĝ_r(k) e(-k x)`; the truncation error
/// is of order `(delta K)^(-r)` (see [`fourier_tail`]).
pub fn g_eval(x: f64, p: &SmoothingParams) -> Complex64 {
    series_at(&coeff_table(p), x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    #[serde(rename = "tailSum")]
    pub tail_sum: f64,
    pub bound: f64,
    #[serde(rename = "cRatio")]
    pub c_ratio: f64,
}

/// Ratio of `K` at which the tail sum is cut off.
pub const TAIL_SPAN: u64 = 1 << 10;

/// `sum_{K < |k| <= 1024 K} |Ĝ_r(k)|` against `(delta K)^(-r)`.
pub fn fourier_tail(p: &SmoothingParams) -> Result<TailReport> {
    p.validate()?;
    if !p.tail_precondition() {
        return Err(Error::PreconditionViolated(format!(
            "|tau + k| >= |k|/2 fails for some |k| > K (tau = {}, K = {})",
            p.tau, p.k_cut
        )));
    }
    let k = p.k_cut as i64;
    let top = k * TAIL_SPAN as i64;
    let mut tail = 0.0;
    for j in k + 1..=top {
        tail += g_fourier_coeff(j, p).norm() + g_fourier_coeff(-j, p).norm();
    }
    let bound = (p.delta * p.k_cut as f64).powi(-(p.r as i32));
    Ok(TailReport {
        tail_sum: tail,
        bound,
        c_ratio: tail / bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnormReport {
    pub sum: f64,
    /// `S(k_max) - S(k_max/2)`; small when the series has settled.
    pub increment: f64,
    #[serde(rename = "kMax")]
    pub k_max: u64,
}

pub const PNORM_K_MAX: u64 = 1_000_000;

/// Partial sum of `|Ĝ_r(k)|^p` over `|k| <= 10^6`.
pub fn pnorm_check(params: &SmoothingParams, p: f64) -> Result<PnormReport> {
    pnorm_check_to(params, p, PNORM_K_MAX)
}

pub fn pnorm_check_to(params: &SmoothingParams, p: f64, k_max: u64) -> Result<PnormReport> {
    params.validate()?;
    if !params.pnorm_precondition() {
        return Err(Error::PreconditionViolated(format!(
            "delta = {} is not below min(1/(2|tau|), 1) for tau = {}",
            params.delta, params.tau
        )));
    }
    if p.is_nan() || p <= 1.0 {
        return Err(Error::Domain(format!("p = {p} must exceed 1")));
    }
    let term = |k: i64| g_fourier_coeff(k, params).norm().powf(p);
    let half = (k_max / 2) as i64;
    let mut inner = term(0);
    for k in 1..=half {
        inner += term(k) + term(-k);
    }
    let mut outer = 0.0;
    for k in half + 1..=k_max as i64 {
        outer += term(k) + term(-k);
    }
    Ok(PnormReport {
        sum: inner + outer,
        increment: outer,
        k_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxReport {
    pub l1err: f64,
    pub bound: f64,
    #[serde(rename = "cRatio")]
    pub c_ratio: f64,
}

/// `sum_n |F(u_n) - G_r(u_n)|` against `N r delta + N r^2 delta |tau| + N D_N`,
/// with `G_r` evaluated from the truncated series.
pub fn approximation_error_points(points: &[f64], p: &SmoothingParams) -> Result<ApproxReport> {
    p.validate()?;
    let n = points.len() as f64;
    let d = discrepancy(points)?.d;
    let table = coeff_table(p);
    let l1: f64 = points
        .iter()
        .map(|&u| (f_eval(u, p.tau) - series_at(&table, u)).norm())
        .sum();
    let r = p.r as f64;
    let bound = n * r * p.delta + n * r * r * p.delta * p.tau.abs() + n * d;
    Ok(ApproxReport {
        l1err: l1,
        bound,
        c_ratio: l1 / bound,
    })
}

/// [`approximation_error_points`] for `u_n = {f(n)}`, `n = 1..=N`.
pub fn approximation_error(
    expr: &GpExpr,
    n: u64,
    p: &SmoothingParams,
    precision_bits: u32,
) -> Result<ApproxReport> {
    let ev = Evaluator::new(expr, precision_bits);
    let u = map_indices(n as usize, |m| ev.frac_f64(m))?;
    approximation_error_points(&u, p)
}
