//! `±1` sequences `e_n = chi(f(n))` and their packed file format.
//!
//! File layout (`GPSEQ1`): the six magic bytes `GPSEQ1`, the length `N` as
//! a little-endian `u64`, then `ceil(N/8)` payload bytes. Element `e_n` is
//! bit `(n-1) % 8` (LSB first) of byte `(n-1) / 8`; a set bit means `+1`.

use std::io::{Read, Write};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactreal::DyadicBall;
use crate::genpoly::{Evaluator, GpExpr, Straddle};

pub const MAGIC: &[u8; 6] = b"GPSEQ1";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinarySequence {
    len: usize,
    bits: Vec<u8>,
}

impl BinarySequence {
    /// Builds from signs; any positive value counts as `+1`.
    pub fn from_signs(signs: &[i8]) -> Self {
        Self::from_fn(signs.len(), |i| signs[i] > 0)
    }

    /// `plus(i)` tells whether element `i` (0-based) is `+1`.
    pub fn from_fn(len: usize, mut plus: impl FnMut(usize) -> bool) -> Self {
        let mut bits = vec![0u8; len.div_ceil(8)];
        for i in 0..len {
            if plus(i) {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        BinarySequence { len, bits }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Element `i` (0-based, so `e_{i+1}`) as `+1` or `-1`.
    pub fn get(&self, i: usize) -> i8 {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        if self.bits[i / 8] >> (i % 8) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn negated(&self) -> Self {
        Self::from_fn(self.len, |i| self.get(i) < 0)
    }

    pub fn reversed(&self) -> Self {
        Self::from_fn(self.len, |i| self.get(self.len - 1 - i) > 0)
    }

    /// The first `n` elements.
    pub fn prefix(&self, n: usize) -> Self {
        assert!(n <= self.len);
        Self::from_fn(n, |i| self.get(i) > 0)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(14 + self.bits.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        out.extend_from_slice(&self.bits);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 14 || &data[..6] != MAGIC {
            return Err(Error::Format("missing GPSEQ1 header".into()));
        }
        let n = u64::from_le_bytes(data[6..14].try_into().expect("8 bytes"));
        let len = usize::try_from(n).map_err(|_| Error::Format("length overflows usize".into()))?;
        let payload = &data[14..];
        if payload.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                len.div_ceil(8)
            )));
        }
        let mut bits = payload.to_vec();
        // Padding bits in the last byte are ignored.
        if len % 8 != 0 {
            let last = bits.len() - 1;
            bits[last] &= (1u8 << (len % 8)) - 1;
        }
        Ok(BinarySequence { len, bits })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_bytes())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::from_bytes(&data)
    }
}

/// `+1` if `{x} < 1/2`, `-1` if `{x} >= 1/2`, certified for every point of
/// the ball.
pub fn chi(x: &DyadicBall) -> std::result::Result<i8, Straddle> {
    let f = x
        .frac_certified()
        .map_err(|_| Straddle::new("chi: fractional part"))?;
    // floor(2 {x}) is 0 on [0, 1/2) and 1 on [1/2, 1)
    match f.mul_int(&2.into()).floor_certified() {
        Ok(k) if k.is_zero() => Ok(1),
        Ok(_) => Ok(-1),
        Err(_) => Err(Straddle::new("chi: fractional part near 1/2")),
    }
}

/// `e_n = chi(f(n))` for `n = 1..=len`.
///
/// Each index walks the precision ladder independently, so the result does
/// not depend on how the index range is split across workers.
pub fn generate(expr: &GpExpr, len: usize, precision_bits: u32) -> Result<BinarySequence> {
    if len == 0 {
        return Err(Error::Domain("sequence length must be at least 1".into()));
    }
    let ev = Evaluator::new(expr, precision_bits);
    let signs = map_indices(len, |n| ev.eval_map(n, chi))?;
    Ok(BinarySequence::from_signs(&signs))
}

/// Fractional parts `{f(n)}`, `n = 1..=len`, as `f64` in `[0, 1)`.
pub fn fractional_parts(expr: &GpExpr, len: usize, precision_bits: u32) -> Result<Vec<f64>> {
    let ev = Evaluator::new(expr, precision_bits);
    map_indices(len, |n| ev.frac_f64(n))
}

/// Apply `f` to `1..=len`, possibly in parallel. The reported error is
/// always the one at the smallest index.
pub(crate) fn map_indices<T: Send>(
    len: usize,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let all: Vec<Result<T>> = (1..=len as u64).into_par_iter().map(f).collect();
        all.into_iter().collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (1..=len as u64).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpoly::parse;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn exact(m: i64, s: u32) -> DyadicBall {
        DyadicBall::exact(BigInt::from(m), s)
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(&exact(1, 2)), Ok(1)); // 0.25
        assert_eq!(chi(&exact(-1, 2)), Ok(-1)); // frac 0.75
        assert_eq!(chi(&exact(7, 1)), Ok(-1)); // frac exactly 1/2
        assert_eq!(chi(&exact(0, 0)), Ok(1));
        let near_half = DyadicBall::new(BigInt::from(8), 4, 1u32.into());
        assert!(chi(&near_half).is_err());
    }

    #[test]
    fn generate_examples() {
        let s = generate(&parse("x*1/2").unwrap(), 4, 256).unwrap();
        assert_eq!(s.signs(), vec![-1, 1, -1, 1]);

        // f(1..3) ~ 2.2361, 8.8885, 15.7214 (fractional parts .2361 .8885 .7214)
        let thm = parse("sqrt(5)*floor(sqrt(3)*floor(sqrt(2)*x^2))").unwrap();
        assert_eq!(generate(&thm, 3, 256).unwrap().signs(), vec![1, -1, -1]);

        assert_eq!(generate(&parse("0").unwrap(), 5, 256).unwrap().signs(), vec![1; 5]);
        assert!(generate(&thm, 0, 256).is_err());
    }

    #[test]
    fn generate_reports_offending_index() {
        // sqrt(2)*sqrt(2)*x/4 hits exactly 1/2 at x = 1 but that cannot be
        // certified from balls
        let e = parse("sqrt(2)*sqrt(2)*x*1/4").unwrap();
        match generate(&e, 3, 64) {
            Err(Error::PrecisionExhausted { n, .. }) => assert_eq!(n, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_format_layout() {
        let s = BinarySequence::from_signs(&[1, -1, 1, 1, -1, -1, -1, -1, 1, 1]);
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..6], b"GPSEQ1");
        assert_eq!(&bytes[6..14], &10u64.to_le_bytes());
        assert_eq!(&bytes[14..], &[0b0000_1101, 0b0000_0011]);
        assert_eq!(BinarySequence::from_bytes(&bytes).unwrap(), s);
        assert!(BinarySequence::from_bytes(&bytes[..15]).is_err());
        assert!(BinarySequence::from_bytes(b"GPSEQ2\0\0\0\0\0\0\0\0").is_err());
    }

    proptest! {
        #[test]
        fn file_round_trip(signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 0..200)) {
            let s = BinarySequence::from_signs(&signs);
            let back = BinarySequence::read_from(&s.to_bytes()[..]).unwrap();
            prop_assert_eq!(back.signs(), signs);
        }

        #[test]
        fn chi_is_one_periodic(m in -1_000_000i64..1_000_000, s in 0u32..40, k in -50i64..50) {
            let x = exact(m, s);
            let shifted = x.add(&DyadicBall::from_int(k));
            prop_assert_eq!(chi(&x), chi(&shifted));
        }
    }
}
