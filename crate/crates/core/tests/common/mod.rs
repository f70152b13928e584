//! Reference computations that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // P_n(x) and P_n'(x) by the three-term recurrence
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// `int_a^b f` split into `panels` equal pieces.
    pub fn integrate(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                total += f(mid + half * x) * (w * half);
            }
        }
        total
    }

    /// Integrates over `[a, b]` with extra breakpoints; every piece is
    /// split so that no panel is wider than `max_width`.
    pub fn integrate_split(
        &self,
        a: f64,
        b: f64,
        breaks: &[f64],
        max_width: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Complex64 {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        pts.push(a);
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut total = Complex64::new(0.0, 0.0);
        for w in pts.windows(2) {
            let panels = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
            total += self.integrate(w[0], w[1], panels, &f);
        }
        total
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Density of the sum of `r` independent uniforms on `[0, 1]`.
pub fn irwin_hall(r: u32, s: f64) -> f64 {
    if s <= 0.0 || s >= r as f64 {
        return 0.0;
    }
    let fact: f64 = (1..r).map(|j| j as f64).product();
    let mut acc = 0.0;
    for j in 0..=(s.floor() as u32) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom(r, j) * (s - j as f64).powi(r as i32 - 1);
    }
    acc / fact
}

/// Density of the sum of `r` uniforms on `[-delta, delta]`, i.e. the
/// normalised `r`-fold box convolution.
pub fn box_density(r: u32, delta: f64, y: f64) -> f64 {
    irwin_hall(r, y / (2.0 * delta) + r as f64 / 2.0) / (2.0 * delta)
}

/// Kinks of [`box_density`].
pub fn box_kinks(r: u32, delta: f64) -> Vec<f64> {
    (0..=r).map(|j| 2.0 * delta * (j as f64 - r as f64 / 2.0)).collect()
}

pub struct Kernel {
    pub r: u32,
    pub delta: f64,
    pub tau: f64,
    gl: GaussLegendre,
}

impl Kernel {
    pub fn new(r: u32, delta: f64, tau: f64) -> Self {
        Kernel { r, delta, tau, gl: GaussLegendre::new(24) }
    }

    fn saw(&self, u: f64) -> Complex64 {
        e(self.tau * (u - u.floor()))
    }

    /// `G_r(x)` as the integral of `F(x - y)` against the box density,
    /// split at the density kinks and at the jumps of `F`.
    pub fn g(&self, x: f64) -> Complex64 {
        let rd = self.r as f64 * self.delta;
        let mut breaks = box_kinks(self.r, self.delta);
        for m in ((x - rd).floor() as i64 - 1)..=((x + rd).ceil() as i64 + 1) {
            breaks.push(x - m as f64);
        }
        self.gl.integrate_split(-rd, rd, &breaks, self.delta / 2.0, |y| {
            self.saw(x - y) * box_density(self.r, self.delta, y)
        })
    }

    /// Points of `[0, 1]` where `G_r` is not smooth.
    fn g_breaks(&self) -> Vec<f64> {
        box_kinks(self.r, self.delta)
            .into_iter()
            .map(|k| k - k.floor())
            .chain([0.0, 1.0])
            .collect()
    }

    /// `int_0^1 G_r(x) e(k x) dx`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let width = (1.0 / (4.0 * (k.unsigned_abs() as f64 + self.tau.abs() + 1.0))).min(0.05);
        self.gl
            .integrate_split(0.0, 1.0, &self.g_breaks(), width, |x| self.g(x) * e(k as f64 * x))
    }

    /// `int_0^1 |G_r|^2`.
    pub fn l2_sq(&self) -> f64 {
        self.gl
            .integrate_split(0.0, 1.0, &self.g_breaks(), 0.02, |x| Complex64::new(self.g(x).norm_sqr(), 0.0))
            .re
    }
}

/// `G_1(x) = (1/(2 delta)) int_{x-delta}^{x+delta} e(tau {u}) du` in closed
/// form, piece by piece between integers.
pub fn g1_closed(x: f64, tau: f64, delta: f64) -> Complex64 {
    let (lo, hi) = (x - delta, x + delta);
    let mut total = Complex64::new(0.0, 0.0);
    let mut m = lo.floor();
    while m < hi {
        let (u0, u1) = (lo.max(m), hi.min(m + 1.0));
        total += if tau == 0.0 {
            Complex64::new(u1 - u0, 0.0)
        } else {
            (e(tau * (u1 - m)) - e(tau * (u0 - m))) / Complex64::new(0.0, 2.0 * PI * tau)
        };
        m += 1.0;
    }
    total / (2.0 * delta)
}

/// `W` as the largest `|window sum|` over every residue class, by brute
/// force over all windows of each class.
pub fn w_oracle(signs: &[i8]) -> u64 {
    let n = signs.len();
    let mut best = 0i64;
    for a in 1..=n {
        for start in 0..a.min(n) {
            let class: Vec<i64> = signs[start..].iter().step_by(a).map(|&s| s as i64).collect();
            for i in 0..class.len() {
                let mut s = 0i64;
                for v in &class[i..] {
                    s += v;
                    best = best.max(s.abs());
                }
            }
        }
    }
    best as u64
}

/// Exact fractions over `i128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub n: i128,
    pub d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    pub fn new(n: i128, d: i128) -> Self {
        assert!(d != 0);
        let g = gcd(n, d).max(1) * d.signum();
        Frac { n: n / g, d: d / g }
    }
    pub fn int(n: i128) -> Self {
        Frac { n, d: 1 }
    }
    pub fn add(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }
    pub fn sub(self, o: Frac) -> Frac {
        self.add(Frac::new(-o.n, o.d))
    }
    pub fn mul(self, o: Frac) -> Frac {
        Frac::new(self.n * o.n, self.d * o.d)
    }
    pub fn div(self, o: Frac) -> Frac {
        Frac::new(self.n * o.d, self.d * o.n)
    }
    pub fn text(self) -> String {
        format!("{}/{}", self.n, self.d)
    }
}

/// The exponent formulas rewritten with `c_d = (2^d - 2)/2^(d-1)`,
/// `2^d = 2 p_d`, expanded over a common denominator. Returns
/// `[a1, n1, a2, n2, a3, n3, threshold]`.
pub fn exponent_oracle(d: u32, t: Frac) -> [Frac; 7] {
    let p = 1i128 << (d - 1);
    let c = Frac::new((1i128 << d) - 2, p);
    let (tn, td) = (t.n, t.d);
    // every denominator below is multiplied through by td
    let a1 = Frac::new(d as i128 * tn, p * (tn + td) + tn);
    let n1 = c.mul(Frac::new(td, p * (2 * tn + td) + tn));
    let a2 = Frac::new(2 * d as i128 * tn, p * (2 * tn + td) + 4 * tn + td);
    let n2 = c.mul(Frac::new(td, p * (2 * tn + td) + 7 * tn + 2 * td));
    let two_d = 2 * p;
    let a3 = Frac::new(3 * d as i128 * tn, two_d * (3 * tn + td) + 5 * tn + td);
    let num3 = p * (3 * tn + td);
    let n3 = c.mul(Frac::new(
        num3 * td,
        (p * (3 * tn + td) + 21 * tn + 5 * td) * (two_d * (3 * tn + td) + 4 * tn + td),
    ));
    let b = two_d * (3 * tn + td) + 21 * tn + 5 * td;
    let thr = Frac::new(td * td, b * b);
    [a1, n1, a2, n2, a3, n3, thr]
}
