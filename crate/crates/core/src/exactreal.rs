//! Dyadic ball arithmetic.
//!
//! A [`DyadicBall`] is the closed interval
//! `[(mantissa - radius) * 2^-scale, (mantissa + radius) * 2^-scale]`.
//! Every operation returns a ball containing all results obtainable from
//! points of the inputs, so a floor taken from a ball that does not straddle
//! an integer is the exact floor of the underlying real.
//!
//! Only the operations needed to evaluate generalized polynomials are
//! provided: addition, multiplication, floor and fractional part, plus the
//! constants `p/q`, `sqrt(k)` and `pi` at a requested precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default number of fractional bits for evaluation.
pub const DEFAULT_PRECISION: u32 = 256;
/// Top rung of the doubling ladder.
pub const MAX_PRECISION: u32 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallError {
    /// The ball contains an integer in its interior or on its upper edge, so
    /// its floor is not determined.
    StraddlesInteger,
    /// The ball is too wide to be represented faithfully by an `f64`.
    InsufficientPrecision,
}

impl fmt::Display for BallError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BallError::StraddlesInteger => f.write_str("ball straddles an integer"),
            BallError::InsufficientPrecision => f.write_str("ball too wide for f64"),
        }
    }
}

impl std::error::Error for BallError {}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicBall {
    mantissa: BigInt,
    scale: u32,
    radius: BigUint,
}

impl DyadicBall {
    pub fn new(mantissa: BigInt, scale: u32, radius: BigUint) -> Self {
        DyadicBall {
            mantissa,
            scale,
            radius,
        }
    }

    pub fn exact(mantissa: BigInt, scale: u32) -> Self {
        Self::new(mantissa, scale, BigUint::zero())
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Self::exact(v.into(), 0)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn radius(&self) -> &BigUint {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    /// Lower end of the ball, in units of `2^-scale`.
    fn lo_units(&self) -> BigInt {
        &self.mantissa - BigInt::from(self.radius.clone())
    }

    fn hi_units(&self) -> BigInt {
        &self.mantissa + BigInt::from(self.radius.clone())
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(self.lo_units(), pow2(self.scale))
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(self.hi_units(), pow2(self.scale))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    /// Re-express at a finer scale; exact.
    fn rescaled(&self, scale: u32) -> (BigInt, BigUint) {
        debug_assert!(scale >= self.scale);
        let shift = (scale - self.scale) as usize;
        (&self.mantissa << shift, &self.radius << shift)
    }

    pub fn add(&self, other: &DyadicBall) -> DyadicBall {
        let scale = self.scale.max(other.scale);
        let (m1, r1) = self.rescaled(scale);
        let (m2, r2) = other.rescaled(scale);
        DyadicBall::new(m1 + m2, scale, r1 + r2)
    }

    pub fn neg(&self) -> DyadicBall {
        DyadicBall::new(-&self.mantissa, self.scale, self.radius.clone())
    }

    pub fn sub(&self, other: &DyadicBall) -> DyadicBall {
        self.add(&other.neg())
    }

    /// Product ball. The scale of the result is the sum of the input scales;
    /// call [`DyadicBall::round_to`] to bound mantissa growth.
    pub fn mul(&self, other: &DyadicBall) -> DyadicBall {
        let m = &self.mantissa * &other.mantissa;
        // |xy - m1 m2| <= |m1| r2 + |m2| r1 + r1 r2
        let r = self.mantissa.magnitude() * &other.radius
            + other.mantissa.magnitude() * &self.radius
            + &self.radius * &other.radius;
        DyadicBall::new(m, self.scale + other.scale, r)
    }

    pub fn mul_int(&self, k: &BigInt) -> DyadicBall {
        DyadicBall::new(&self.mantissa * k, self.scale, &self.radius * k.magnitude())
    }

    /// Truncate to at most `prec` fractional bits. The radius grows by one
    /// unit in the last place whenever bits are actually discarded.
    pub fn round_to(&self, prec: u32) -> DyadicBall {
        if self.scale <= prec {
            return self.clone();
        }
        let shift = self.scale - prec;
        let (q, rem) = floor_shr_rem(&self.mantissa, shift);
        let (rq, rrem) = (&self.radius >> shift as usize, low_bits_nonzero(&self.radius, shift));
        let mut radius = rq;
        if rrem {
            radius += 1u32;
        }
        if rem {
            radius += 1u32;
        }
        DyadicBall::new(q, prec, radius)
    }

    /// `floor(x)` for every `x` in the ball.
    pub fn floor_certified(&self) -> Result<BigInt, BallError> {
        let lo = floor_shr(&self.lo_units(), self.scale);
        if self.radius.is_zero() {
            return Ok(lo);
        }
        let hi = floor_shr(&self.hi_units(), self.scale);
        if lo == hi {
            Ok(lo)
        } else {
            Err(BallError::StraddlesInteger)
        }
    }

    /// `x - floor(x)`; the result lies inside `[0, 1)`.
    pub fn frac_certified(&self) -> Result<DyadicBall, BallError> {
        let fl = self.floor_certified()?;
        let m = &self.mantissa - (fl << self.scale as usize);
        Ok(DyadicBall::new(m, self.scale, self.radius.clone()))
    }

    /// Certified comparison with another ball: `None` when they overlap.
    pub fn cmp_certified(&self, other: &DyadicBall) -> Option<Ordering> {
        let d = self.sub(other);
        if d.hi_units().is_negative() {
            Some(Ordering::Less)
        } else if d.lo_units().is_positive() {
            Some(Ordering::Greater)
        } else if d.mantissa.is_zero() && d.radius.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Nearest `f64` to the center, provided the ball is at most `2^-60` wide
    /// on either side.
    pub fn to_f64(&self) -> Result<f64, BallError> {
        // radius * 2^-scale <= 2^-60  <=>  radius * 2^60 <= 2^scale
        if (&self.radius << 60usize) > (BigUint::one() << self.scale as usize) {
            return Err(BallError::InsufficientPrecision);
        }
        Ok(self.center_f64())
    }

    /// Nearest `f64` to the center, ignoring the radius.
    pub fn center_f64(&self) -> f64 {
        dyadic_to_f64(&self.mantissa, self.scale)
    }

    // Constants at working precision.

    /// `p/q` with at most `prec` fractional bits (exact when `q` is a power
    /// of two).
    pub fn from_rational(value: &BigRational, prec: u32) -> DyadicBall {
        let (p, q) = (value.numer(), value.denom());
        debug_assert!(q.is_positive());
        let qm = q.magnitude();
        if qm.count_ones() == 1 {
            let j = qm.trailing_zeros().unwrap_or(0) as u32;
            return DyadicBall::exact(p.clone(), j);
        }
        let (m, rem) = (p << prec as usize).div_mod_floor(q);
        let radius = if rem.is_zero() { 0u32 } else { 1u32 };
        DyadicBall::new(m, prec, BigUint::from(radius))
    }

    /// `sqrt(k)` with `prec` fractional bits, radius one ulp unless exact.
    pub fn sqrt_int(k: &BigUint, prec: u32) -> DyadicBall {
        let scaled = k << (2 * prec as usize);
        let s = scaled.sqrt();
        let exact = &s * &s == scaled;
        DyadicBall::new(
            BigInt::from(s),
            prec,
            BigUint::from(if exact { 0u32 } else { 1u32 }),
        )
    }

    /// `pi` with `prec` fractional bits and radius one ulp.
    pub fn pi(prec: u32) -> DyadicBall {
        // Machin: pi = 16 atan(1/5) - 4 atan(1/239), in fixed point with
        // guard bits that absorb the per-term truncation errors.
        let guard = 32 + (32 - prec.leading_zeros());
        let total = prec + guard;
        let one = BigInt::one() << total as usize;
        let v = atan_inv(5, &one) * 16 - atan_inv(239, &one) * 4;
        // round to nearest at `prec`
        let half = BigInt::one() << (guard - 1) as usize;
        let m = floor_shr(&(v + half), guard);
        DyadicBall::new(m, prec, BigUint::one())
    }
}

impl fmt::Display for DyadicBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.radius.to_f64().unwrap_or(f64::INFINITY) * (-(self.scale as f64)).exp2();
        write!(f, "{} ± {:e}", self.center_f64(), r)
    }
}

/// Doubling sequence of working precisions `start, 2 start, ...` capped at
/// `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionLadder {
    pub start: u32,
    pub max: u32,
}

impl PrecisionLadder {
    pub fn new(start: u32) -> Self {
        PrecisionLadder {
            start: start.max(1),
            max: MAX_PRECISION.max(start),
        }
    }

    pub fn rungs(&self) -> Vec<u32> {
        let mut out = vec![self.start];
        let mut p = self.start;
        while p < self.max {
            p = p.saturating_mul(2).min(self.max);
            out.push(p);
        }
        out
    }
}

impl Default for PrecisionLadder {
    fn default() -> Self {
        PrecisionLadder::new(DEFAULT_PRECISION)
    }
}

fn pow2(k: u32) -> BigInt {
    BigInt::one() << k as usize
}

/// `floor(m / 2^k)`.
pub(crate) fn floor_shr(m: &BigInt, k: u32) -> BigInt {
    floor_shr_rem(m, k).0
}

/// `floor(m / 2^k)` and whether the division was inexact.
fn floor_shr_rem(m: &BigInt, k: u32) -> (BigInt, bool) {
    let mag = m.magnitude();
    let inexact = low_bits_nonzero(mag, k);
    let q = mag >> k as usize;
    let q = match m.sign() {
        Sign::Minus => {
            let q = BigInt::from(q);
            if inexact {
                -q - 1
            } else {
                -q
            }
        }
        _ => BigInt::from(q),
    };
    (q, inexact)
}

fn low_bits_nonzero(x: &BigUint, k: u32) -> bool {
    match x.trailing_zeros() {
        None => false,
        Some(tz) => tz < k as u64,
    }
}

fn atan_inv(x: u32, one: &BigInt) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut term = one / &x;
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        term = &term / &x2;
        if term.is_zero() {
            break;
        }
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Correctly rounded `m * 2^-s` (outside the subnormal range).
fn dyadic_to_f64(m: &BigInt, s: u32) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let mag = m.magnitude();
    let bits = mag.bits();
    let v = if bits <= 64 {
        ldexp(mag.to_u64().unwrap() as f64, -(s as i64))
    } else {
        let shift = bits - 64;
        let mut top = (mag >> shift as usize).to_u64().unwrap();
        if low_bits_nonzero(mag, shift as u32) {
            // sticky bit: lies far below the 53-bit rounding position
            top |= 1;
        }
        ldexp(top as f64, shift as i64 - s as i64)
    };
    if m.is_negative() {
        -v
    } else {
        v
    }
}
