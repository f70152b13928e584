//! Randomized sweeps over the hard inequalities. Every sweep draws from
//! `ChaCha8` seeded with [`SEED`], one stream per case, so results do not
//! depend on thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{e, erdos_turan_rhs};
use crate::bounds::{linear_sum_check, weyl_check};
use crate::dioph::{continued_fraction, convergent_inequality_holds, RealConst};
use crate::error::Result;
use crate::genpoly::parse;
use crate::measures::{discrepancy, progression_discrepancy_chain};
use crate::sequence::{fractional_parts, map_indices};

pub const SEED: u64 = 0x5EED;

/// Expressions sampled by the chain and Erdős–Turán sweeps.
pub const SAMPLE_EXPRS: &[&str] = &[
    "sqrt(5)*floor(sqrt(3)*floor(sqrt(2)*x^2))",
    "sqrt(2)*x^2",
    "sqrt(3)*x*floor(sqrt(2)*x)",
    "floor(sqrt(7)*x)*sqrt(5)",
    "sqrt(2)*floor(sqrt(3)*x^2)*floor(sqrt(5)*x)",
    "x*1/3",
    "0",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    /// Largest `lhs / rhs` seen.
    #[serde(rename = "worstRatio")]
    pub worst_ratio: f64,
    #[serde(rename = "firstViolation")]
    pub first_violation: Option<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Case {
    lhs: f64,
    rhs: f64,
    holds: bool,
    label: String,
}

fn rng_for(sweep: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(sweep << 32 | case);
    rng
}

fn summarize(name: &str, cases: Vec<Vec<Case>>) -> SweepReport {
    let mut rep = SweepReport {
        name: name.to_string(),
        cases: 0,
        violations: 0,
        worst_ratio: 0.0,
        first_violation: None,
    };
    for c in cases.into_iter().flatten() {
        rep.cases += 1;
        if c.rhs > 0.0 {
            rep.worst_ratio = rep.worst_ratio.max(c.lhs / c.rhs);
        }
        if !c.holds {
            rep.violations += 1;
            if rep.first_violation.is_none() {
                rep.first_violation = Some(format!("{} (lhs {} > rhs {})", c.label, c.lhs, c.rhs));
            }
        }
    }
    rep
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..n).map(|_| rng.random::<f64>()).collect(),
        // clustered near a random centre
        1 => {
            let c: f64 = rng.random();
            let w: f64 = rng.random_range(0.001..0.3);
            (0..n).map(|_| (c + w * rng.random::<f64>()).fract()).collect()
        }
        _ => {
            let alpha: f64 = rng.random();
            (1..=n).map(|m| (alpha * m as f64).fract()).collect()
        }
    }
}

/// Exact `D_N` against `2/(H+1) + 2 sum_{h<=H} |S_h/N|/h` for
/// `H = 1, 2, 4, ..., 64`, on random and sequence-derived point sets.
pub fn erdos_turan_sweep(cases: u64) -> Result<SweepReport> {
    let all = map_indices(cases as usize, |i| {
        let mut rng = rng_for(1, i);
        let n = rng.random_range(1..=500usize);
        let points = if rng.random_bool(0.25) {
            let expr = parse(SAMPLE_EXPRS[rng.random_range(0..SAMPLE_EXPRS.len())])?;
            fractional_parts(&expr, n, 256)?
        } else {
            random_points(&mut rng, n)
        };
        let d = discrepancy(&points)?.d;
        let mut out = Vec::new();
        for h in (0..7).map(|j| 1u64 << j) {
            let rhs = erdos_turan_rhs(&points, h)?;
            out.push(Case {
                lhs: d,
                rhs,
                holds: d <= rhs + 1e-12,
                label: format!("case {i}: n = {n}, H = {h}"),
            });
        }
        Ok(out)
    })?;
    Ok(summarize("erdos-turan", all))
}

fn unimodular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    match rng.random_range(0..4) {
        0 => (0..n).map(|_| e(rng.random())).collect(),
        1 => {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            (1..=n).map(|m| e((a * (m * m) as f64 + b * m as f64).fract())).collect()
        }
        2 => {
            let a: f64 = rng.random();
            (1..=n).map(|m| e((a * m as f64).fract())).collect()
        }
        _ => {
            // constant phase: the extreme case lhs = 8^(-2^k)
            let z = e(rng.random());
            vec![z; n]
        }
    }
}

/// Weyl differencing for random unimodular sequences, `k <= max_k`,
/// `N <= max_n`, `Q` log-uniform in `[1, N]`.
pub fn weyl_sweep(cases: u64, max_n: usize, max_k: u32) -> Result<SweepReport> {
    let all = map_indices(cases as usize, |i| {
        let mut rng = rng_for(2, i);
        let n = rng.random_range(1..=max_n);
        let k = rng.random_range(1..=max_k);
        let q = (n as f64).powf(rng.random::<f64>()).clamp(1.0, n as f64);
        let lam = unimodular(&mut rng, n);
        let c = weyl_check(&lam, k, q)?;
        Ok(vec![Case {
            lhs: c.lhs,
            rhs: c.rhs,
            holds: c.holds,
            label: format!("case {i}: N = {n}, k = {k}, Q = {q}"),
        }])
    })?;
    Ok(summarize("weyl", all))
}

/// `|sum e(alpha n)| <= min(L, 1/(2||alpha||))` over random ranges, with
/// a share of `alpha` close to integers.
pub fn linear_sum_sweep(cases: u64) -> Result<SweepReport> {
    let all = map_indices(cases as usize, |i| {
        let mut rng = rng_for(3, i);
        let base = rng.random_range(-5i64..5) as f64;
        let alpha = match rng.random_range(0..3) {
            0 => base + rng.random::<f64>(),
            1 => base + 10f64.powf(-rng.random_range(1.0..12.0)) * if rng.random() { 1.0 } else { -1.0 },
            _ => base + rng.random_range(1..20) as f64 / rng.random_range(1..20) as f64,
        };
        let n1 = rng.random_range(-100_000i64..100_000);
        let len = 10f64.powf(rng.random_range(0.0..6.0)) as i64 + 1;
        let c = linear_sum_check(alpha, n1, n1 + len)?;
        Ok(vec![Case {
            lhs: c.lhs,
            rhs: c.rhs,
            holds: c.holds,
            label: format!("case {i}: alpha = {alpha}, n1 = {n1}, L = {len}"),
        }])
    })?;
    Ok(summarize("linear-sum", all))
}

/// `|U(E_N, M, a, b)| <= 2 M D_M` on sampled `(expr, a, b, N)`.
pub fn chain_sweep(cases: u64, precision_bits: u32) -> Result<SweepReport> {
    let all = map_indices(cases as usize, |i| {
        let mut rng = rng_for(4, i);
        let text = SAMPLE_EXPRS[rng.random_range(0..SAMPLE_EXPRS.len())];
        let expr = parse(text)?;
        let a = rng.random_range(1..=64u64);
        let b = rng.random_range(1 - a as i64..=a as i64);
        let n = rng.random_range((a as i64 + b).max(1) as u64 + a..=4096);
        let c = progression_discrepancy_chain(&expr, n, a, b, precision_bits)?;
        Ok(vec![Case {
            lhs: c.lhs_u as f64,
            rhs: c.rhs,
            holds: c.holds(),
            label: format!("case {i}: {text}, N = {n}, a = {a}, b = {b}"),
        }])
    })?;
    Ok(summarize("chain", all))
}

/// `|x - p_k/q_k| < 1/(q_k q_(k+1))` for quadratic surds and their
/// first 40 convergents.
pub fn convergent_sweep() -> Result<SweepReport> {
    let consts = ["sqrt(2)", "sqrt(3)", "sqrt(5)", "sqrt(7)*1/3", "sqrt(2)+sqrt(2)*1/2", "1/2+sqrt(5)*1/2"];
    let mut cases = Vec::new();
    for c in consts {
        let x = RealConst::parse(c)?;
        let cf = continued_fraction(&x, 41)?;
        let holds = convergent_inequality_holds(&x.ball(4096), &cf);
        cases.push(Case {
            lhs: 0.0,
            rhs: 1.0,
            holds,
            label: format!("{c} = {cf}"),
        });
    }
    Ok(summarize("convergents", vec![cases]))
}

/// Case counts for [`run_suite`].
#[derive(Debug, Clone, Copy)]
pub struct SuiteSize {
    pub erdos_turan: u64,
    pub weyl: u64,
    pub linear_sum: u64,
    pub chain: u64,
}

impl SuiteSize {
    pub const FULL: SuiteSize = SuiteSize {
        erdos_turan: 1000,
        weyl: 1000,
        linear_sum: 10_000,
        chain: 100,
    };
    pub const QUICK: SuiteSize = SuiteSize {
        erdos_turan: 50,
        weyl: 50,
        linear_sum: 500,
        chain: 10,
    };
}

pub fn run_suite(size: SuiteSize, precision_bits: u32) -> Result<Vec<SweepReport>> {
    Ok(vec![
        erdos_turan_sweep(size.erdos_turan)?,
        weyl_sweep(size.weyl, 512, 3)?,
        linear_sum_sweep(size.linear_sum)?,
        chain_sweep(size.chain, precision_bits)?,
        convergent_sweep()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let reps = run_suite(SuiteSize::QUICK, 256).unwrap();
        assert_eq!(reps.len(), 5);
        for r in &reps {
            assert!(r.passed(), "{r:?}");
            assert!(r.cases > 0);
        }
    }

    #[test]
    fn sweeps_are_reproducible() {
        let a = weyl_sweep(20, 64, 3).unwrap();
        let b = weyl_sweep(20, 64, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn summary_counts_violations() {
        let rep = summarize(
            "x",
            vec![vec![
                Case { lhs: 1.0, rhs: 2.0, holds: true, label: "a".into() },
                Case { lhs: 3.0, rhs: 2.0, holds: false, label: "b".into() },
            ]],
        );
        assert_eq!((rep.cases, rep.violations), (2, 1));
        assert_eq!(rep.worst_ratio, 1.5);
        assert!(rep.first_violation.unwrap().starts_with('b'));
    }
}
