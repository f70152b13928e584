//! Well-distribution measure and extreme discrepancy, each with a slow
//! literal oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genpoly::{frac_to_unit_f64, Evaluator, GpExpr};
use crate::sequence::{chi, BinarySequence};

pub const NAIVE_W_LIMIT: usize = 4096;
pub const NAIVE_D_LIMIT: usize = 5000;

/// Progression `a*m + b`, `m = 1..=M`, and the sum `u` of the sequence
/// along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgressionWitness {
    pub a: u64,
    pub b: i64,
    pub m: u64,
    pub u: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "WellDistJson", from = "WellDistJson")]
pub struct WellDistReport {
    pub w: u64,
    pub witness: ProgressionWitness,
    pub a_max: u64,
    pub exhaustive: bool,
}

#[derive(Serialize, Deserialize)]
struct WellDistJson {
    w: u64,
    a: u64,
    b: i64,
    m: u64,
    #[serde(rename = "aMax")]
    a_max: u64,
    exhaustive: bool,
}

impl From<WellDistReport> for WellDistJson {
    fn from(r: WellDistReport) -> Self {
        WellDistJson {
            w: r.w,
            a: r.witness.a,
            b: r.witness.b,
            m: r.witness.m,
            a_max: r.a_max,
            exhaustive: r.exhaustive,
        }
    }
}

impl From<WellDistJson> for WellDistReport {
    // The sign of `u` is not part of the text schema.
    fn from(j: WellDistJson) -> Self {
        WellDistReport {
            w: j.w,
            witness: ProgressionWitness {
                a: j.a,
                b: j.b,
                m: j.m,
                u: j.w as i64,
            },
            a_max: j.a_max,
            exhaustive: j.exhaustive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub d: f64,
    /// Endpoints of an interval attaining (or, for half-open limits,
    /// approaching) the supremum.
    pub interval: (f64, f64),
    pub n: usize,
}

fn check_progression(len: usize, m: u64, a: u64, b: i64) -> Result<()> {
    let n = len as i128;
    let (m, a, b) = (m as i128, a as i128, b as i128);
    if a < 1 || m < 1 {
        return Err(Error::OutOfRange(format!("need a >= 1 and M >= 1, got a = {a}, M = {m}")));
    }
    if a + b < 1 || a * m + b > n {
        return Err(Error::OutOfRange(format!(
            "indices {}..={} not inside 1..={n}",
            a + b,
            a * m + b
        )));
    }
    Ok(())
}

/// `U(E, M, a, b) = sum_{m=1}^{M} e_{a m + b}`.
pub fn progression_sum(e: &BinarySequence, m: u64, a: u64, b: i64) -> Result<i64> {
    check_progression(e.len(), m, a, b)?;
    let first = (a as i64 + b) as usize;
    Ok((0..m as usize)
        .map(|k| e.get(first - 1 + k * a as usize) as i64)
        .sum())
}

/// Exact `W` over all steps `a <= a_max` (default and cap: `N`).
///
/// For a fixed step every admissible `(b, M)` is a contiguous run of one
/// residue class, so the best run in a class is its max prefix sum minus its
/// min prefix sum.
pub fn well_distribution(e: &BinarySequence, a_max: Option<u64>) -> WellDistReport {
    let n = e.len();
    assert!(n >= 1, "empty sequence");
    let requested = a_max.unwrap_or(n as u64).max(1);
    let cap = requested.min(n as u64) as usize;
    let signs = e.signs();

    // Steps are scanned in increasing order; a class of step `a` has at most
    // ceil(N/a) elements, so once that drops to the best value found no later
    // step can improve it (ties go to the smaller step anyway).
    let mut best = (0i64, 0usize);
    let mut a = 1usize;
    while a <= cap && n.div_ceil(a) as i64 > best.0 {
        let hi = (a + STEP_BLOCK).min(cap + 1);
        let (w, wa) = scan_block(&signs, a, hi);
        if w > best.0 {
            best = (w, wa);
        }
        a = hi;
    }
    let witness = witness_for_step(&signs, best.1, best.0);
    WellDistReport {
        w: best.0 as u64,
        witness,
        a_max: requested,
        exhaustive: requested >= n as u64,
    }
}

const STEP_BLOCK: usize = 64;

/// Best class range for steps in `lo..hi`, ties to the smaller step.
fn scan_block(signs: &[i8], lo: usize, hi: usize) -> (i64, usize) {
    let pick = |x: (i64, usize), y: (i64, usize)| {
        if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
            y
        } else {
            x
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (lo..hi)
            .into_par_iter()
            .map_init(Scratch::default, |s, a| (s.step_range(signs, a), a))
            .reduce(|| (-1, usize::MAX), pick)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = Scratch::default();
        (lo..hi)
            .map(|a| (s.step_range(signs, a), a))
            .fold((-1, usize::MAX), pick)
    }
}

#[derive(Default)]
struct Scratch {
    cur: Vec<i32>,
    max: Vec<i32>,
    min: Vec<i32>,
}

impl Scratch {
    fn step_range(&mut self, signs: &[i8], a: usize) -> i64 {
        for v in [&mut self.cur, &mut self.max, &mut self.min] {
            v.clear();
            v.resize(a, 0);
        }
        for chunk in signs.chunks(a) {
            let k = chunk.len();
            let (cur, max, min) = (&mut self.cur[..k], &mut self.max[..k], &mut self.min[..k]);
            for j in 0..k {
                let c = cur[j] + chunk[j] as i32;
                cur[j] = c;
                max[j] = max[j].max(c);
                min[j] = min[j].min(c);
            }
        }
        self.max
            .iter()
            .zip(&self.min)
            .map(|(x, y)| (x - y) as i64)
            .max()
            .unwrap_or(0)
    }
}

/// Lexicographically smallest `(b, M)` for step `a` with `|U| = w`, where
/// `w` is the largest class range for that step.
fn witness_for_step(signs: &[i8], a: usize, w: i64) -> ProgressionWitness {
    let n = signs.len();
    let mut best: Option<ProgressionWitness> = None;
    for r in 1..=a.min(n) {
        // prefix sums P_0 = 0, P_j = e_r + ... over the class r, r+a, ...
        let mut prefix = vec![0i64];
        let mut i = r;
        while i <= n {
            prefix.push(prefix.last().unwrap() + signs[i - 1] as i64);
            i += a;
        }
        let hi = *prefix.iter().max().unwrap();
        let lo = *prefix.iter().min().unwrap();
        if hi - lo != w {
            continue;
        }
        // A run P_j1 - P_j0 = +-w must start at an extreme and end at the
        // opposite one; take the earliest start, then the nearest end.
        let len = prefix.len();
        let (mut next_hi, mut next_lo) = (vec![usize::MAX; len + 1], vec![usize::MAX; len + 1]);
        for j in (0..len).rev() {
            next_hi[j] = if prefix[j] == hi { j } else { next_hi[j + 1] };
            next_lo[j] = if prefix[j] == lo { j } else { next_lo[j + 1] };
        }
        let cand = (0..len).find_map(|j0| {
            let end = if prefix[j0] == hi {
                next_lo[j0 + 1]
            } else if prefix[j0] == lo {
                next_hi[j0 + 1]
            } else {
                usize::MAX
            };
            (end != usize::MAX).then_some((j0, end))
        });
        let (j0, j1) = cand.expect("range attained");
        let start = r + j0 * a;
        let wit = ProgressionWitness {
            a: a as u64,
            b: start as i64 - a as i64,
            m: (j1 - j0) as u64,
            u: prefix[j1] - prefix[j0],
        };
        let better = match &best {
            None => true,
            Some(cur) => (wit.b, wit.m) < (cur.b, cur.m),
        };
        if better {
            best = Some(wit);
        }
    }
    best.expect("some class attains the maximum")
}

/// Literal triple loop over `(a, b, M)` in lexicographic order.
pub fn well_distribution_naive(e: &BinarySequence) -> Result<WellDistReport> {
    let n = e.len();
    if n > NAIVE_W_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: NAIVE_W_LIMIT,
        });
    }
    assert!(n >= 1, "empty sequence");
    let signs = e.signs();
    let n = n as i64;
    let mut best: Option<ProgressionWitness> = None;
    for a in 1..=n {
        for b in (1 - a)..=(n - a) {
            let mut u = 0i64;
            let mut m = 1i64;
            while a * m + b <= n {
                u += signs[(a * m + b - 1) as usize] as i64;
                if best.is_none_or(|w| u.abs() > w.u.abs()) {
                    best = Some(ProgressionWitness {
                        a: a as u64,
                        b,
                        m: m as u64,
                        u,
                    });
                }
                m += 1;
            }
        }
    }
    let witness = best.expect("n >= 1");
    Ok(WellDistReport {
        w: witness.u.unsigned_abs(),
        witness,
        a_max: n as u64,
        exhaustive: true,
    })
}

fn check_points(points: &[f64]) -> Result<()> {
    assert!(!points.is_empty(), "no points");
    match points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        Some(&x) => Err(Error::OutOfDomain(x)),
        None => Ok(()),
    }
}

/// Extreme discrepancy from the sorted sample:
/// `D = 1/n + max_i (i/n - x_(i)) + max_i (x_(i) - i/n)`.
pub fn discrepancy(points: &[f64]) -> Result<DiscrepancyReport> {
    check_points(points)?;
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let (mut up, mut up_at) = (f64::NEG_INFINITY, 0);
    let (mut down, mut down_at) = (f64::NEG_INFINITY, 0);
    for (k, &x) in xs.iter().enumerate() {
        let i = (k + 1) as f64 / nf;
        if i - x > up {
            (up, up_at) = (i - x, k);
        }
        if x - i > down {
            (down, down_at) = (x - i, k);
        }
    }
    let d = 1.0 / nf + up + down;
    let (p, q) = (xs[up_at], xs[down_at]);
    Ok(DiscrepancyReport {
        d: d.min(1.0),
        interval: (p.min(q), p.max(q)),
        n,
    })
}

/// Supremum over all intervals whose endpoints lie in
/// `{0, x_i, next_up(x_i), 1}`, which the sup over `[a, b)` approaches to
/// within an ulp.
pub fn discrepancy_naive(points: &[f64]) -> Result<DiscrepancyReport> {
    check_points(points)?;
    let n = points.len();
    if n > NAIVE_D_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: NAIVE_D_LIMIT,
        });
    }
    let mut ends: Vec<f64> = vec![0.0, 1.0];
    for &x in points {
        ends.push(x);
        ends.push(x.next_up());
    }
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    // below[k] = #{x < ends[k]}
    let below: Vec<usize> = ends.iter().map(|&t| xs.partition_point(|&x| x < t)).collect();
    let nf = n as f64;
    let mut best = (0.0, (0.0, 0.0));
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let count = (below[j] - below[i]) as f64 / nf;
            let dev = (count - (ends[j] - ends[i])).abs();
            if dev > best.0 {
                best = (dev, (ends[i], ends[j]));
            }
        }
    }
    Ok(DiscrepancyReport {
        d: best.0,
        interval: best.1,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainCheck {
    #[serde(rename = "lhsU")]
    pub lhs_u: u64,
    pub rhs: f64,
    pub m: u64,
    pub d_m: f64,
}

impl ChainCheck {
    /// `|U| <= 2 M D_M`, with slack for the `f64` rounding of the points.
    pub fn holds(&self) -> bool {
        self.lhs_u as f64 <= self.rhs + 1e-9
    }
}

/// Both sides of `|U(E_N, M, a, b)| <= 2 M D_M({f(a m + b)})` with
/// `M = floor((N - b)/a)`.
pub fn progression_discrepancy_chain(
    expr: &GpExpr,
    n: u64,
    a: u64,
    b: i64,
    precision_bits: u32,
) -> Result<ChainCheck> {
    if a == 0 {
        return Err(Error::OutOfRange("a must be positive".into()));
    }
    let m = (n as i64 - b).div_euclid(a as i64);
    if m < 1 || a as i64 + b < 1 {
        return Err(Error::OutOfRange(format!(
            "no admissible progression for N = {n}, a = {a}, b = {b}"
        )));
    }
    let ev = Evaluator::new(expr, precision_bits);
    let mut u = 0i64;
    let mut fracs = Vec::with_capacity(m as usize);
    for k in 1..=m {
        let idx = (a as i64 * k + b) as u64;
        let (s, x) = ev.eval_map(idx, |ball| Ok((chi(ball)?, frac_to_unit_f64(ball)?)))?;
        u += s as i64;
        fracs.push(x);
    }
    let d = discrepancy(&fracs)?.d;
    Ok(ChainCheck {
        lhs_u: u.unsigned_abs(),
        rhs: 2.0 * m as f64 * d,
        m: m as u64,
        d_m: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpoly::parse;
    use proptest::prelude::*;

    fn seq(s: &[i8]) -> BinarySequence {
        BinarySequence::from_signs(s)
    }

    #[test]
    fn progression_sum_examples() {
        let e = seq(&[1, -1, 1]);
        assert_eq!(progression_sum(&e, 2, 2, -1).unwrap(), 2);
        assert_eq!(progression_sum(&e, 3, 1, 0).unwrap(), 1);
        for k in 0..3 {
            assert_eq!(progression_sum(&e, 1, 1, k).unwrap(), e.get(k as usize) as i64);
        }
        assert!(progression_sum(&e, 2, 2, 0).is_err());
        assert!(progression_sum(&e, 1, 1, -1).is_err());
        assert!(progression_sum(&e, 0, 1, 0).is_err());
    }

    #[test]
    fn well_distribution_examples() {
        let r = well_distribution(&seq(&[1; 5]), None);
        assert_eq!((r.w, r.witness.a, r.witness.b, r.witness.m), (5, 1, 0, 5));
        assert!(r.exhaustive);

        let r = well_distribution(&seq(&[1, -1, 1]), None);
        assert_eq!((r.w, r.witness.a, r.witness.b, r.witness.m), (2, 2, -1, 2));

        let alt = seq(&[1, -1, 1, -1, 1, -1]);
        let r = well_distribution(&alt, None);
        assert_eq!((r.w, r.witness.a), (3, 2));
        assert_eq!(r, well_distribution_naive(&alt).unwrap());

        let r = well_distribution(&seq(&[-1]), None);
        assert_eq!((r.w, r.witness.u), (1, -1));

        let capped = well_distribution(&alt, Some(1));
        assert_eq!((capped.w, capped.a_max, capped.exhaustive), (1, 1, false));
    }

    #[test]
    fn naive_examples_and_guard() {
        assert_eq!(well_distribution_naive(&seq(&[1; 5])).unwrap().w, 5);
        assert_eq!(well_distribution_naive(&seq(&[-1])).unwrap().w, 1);
        let big = BinarySequence::from_fn(NAIVE_W_LIMIT + 1, |_| true);
        assert!(matches!(well_distribution_naive(&big), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn report_json_keys() {
        let r = well_distribution(&seq(&[1, -1, 1]), None);
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["a", "aMax", "b", "exhaustive", "m", "w"]);
        assert_eq!(v["b"], -1);
    }

    #[test]
    fn exhaustive_length_8_matches_naive() {
        for mask in 0u32..256 {
            let e = BinarySequence::from_fn(8, |i| mask >> i & 1 == 1);
            assert_eq!(well_distribution(&e, None), well_distribution_naive(&e).unwrap());
        }
    }

    #[test]
    fn discrepancy_examples() {
        let grid = |n: usize| (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect::<Vec<_>>();
        for f in [discrepancy, discrepancy_naive] {
            assert!((f(&[0.5]).unwrap().d - 1.0).abs() < 1e-12);
            assert!((f(&[0.25, 0.75]).unwrap().d - 0.5).abs() < 1e-12);
            for n in [1, 3, 10, 37] {
                assert!((f(&grid(n)).unwrap().d - 1.0 / n as f64).abs() < 1e-12);
            }
            assert!(matches!(f(&[0.2, 1.0]), Err(Error::OutOfDomain(_))));
            assert!(f(&[-0.0, 0.5]).is_ok());
        }
        let r = discrepancy(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(r.interval, (0.1, 0.3));
        assert!((r.d - 0.8).abs() < 1e-12);
    }

    #[test]
    fn chain_examples() {
        let c = progression_discrepancy_chain(&parse("x*1/2").unwrap(), 4, 1, 0, 256).unwrap();
        assert_eq!(c.lhs_u, 0);
        assert!(c.rhs >= 0.0 && c.holds());

        let thm = parse("sqrt(5)*floor(sqrt(3)*floor(sqrt(2)*x^2))").unwrap();
        let c = progression_discrepancy_chain(&thm, 64, 1, 0, 256).unwrap();
        assert_eq!(c.m, 64);
        assert!(c.holds(), "{c:?}");
        let c = progression_discrepancy_chain(&thm, 65, 2, 1, 256).unwrap();
        assert_eq!(c.m, 32);
        assert!(c.holds(), "{c:?}");

        // direct comparison with the generated sequence
        let e = crate::sequence::generate(&thm, 65, 256).unwrap();
        assert_eq!(c.lhs_u as i64, progression_sum(&e, 32, 2, 1).unwrap().abs());
        assert!(progression_discrepancy_chain(&thm, 4, 5, 0, 256).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = BinarySequence> {
        proptest::collection::vec(any::<bool>(), 1..200)
            .prop_map(|v| BinarySequence::from_fn(v.len(), |i| v[i]))
    }

    proptest! {
        #[test]
        fn w_symmetries_and_bound(e in arb_seq()) {
            let w = well_distribution(&e, None);
            prop_assert_eq!(w.w, well_distribution(&e.negated(), None).w);
            prop_assert_eq!(w.w, well_distribution(&e.reversed(), None).w);
            prop_assert!(w.w <= e.len() as u64);
            prop_assert_eq!(
                progression_sum(&e, w.witness.m, w.witness.a, w.witness.b).unwrap(),
                w.witness.u
            );
        }

        #[test]
        fn w_matches_naive(e in arb_seq()) {
            prop_assert_eq!(well_distribution(&e, None), well_distribution_naive(&e).unwrap());
        }

        #[test]
        fn constant_sequences_reach_n(n in 1usize..300, plus in any::<bool>()) {
            let e = BinarySequence::from_fn(n, |_| plus);
            prop_assert_eq!(well_distribution(&e, None).w, n as u64);
        }

        #[test]
        fn discrepancy_matches_naive(xs in proptest::collection::vec(0.0f64..1.0, 1..60)) {
            let a = discrepancy(&xs).unwrap();
            let b = discrepancy_naive(&xs).unwrap();
            prop_assert!((a.d - b.d).abs() < 1e-12, "{} vs {}", a.d, b.d);
            prop_assert!(a.d >= 1.0 / xs.len() as f64 - 1e-15 && a.d <= 1.0);
        }
    }
}
