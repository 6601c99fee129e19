//! Coefficient rings.
//!
//! Two instances are provided: exact arbitrary-precision integers
//! ([`BigInt`]) and IEEE doubles. Besides the ring operations, a coefficient
//! knows how to read its own decimal literal and how to travel over the
//! cluster wire.

use std::fmt::{Debug, Display};

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};

pub trait Coeff: Clone + Debug + Display + PartialEq + Send + Sync + 'static {
    /// Short name used in reports and on the wire.
    const NAME: &'static str;
    /// Tag byte identifying the coefficient encoding in cluster frames.
    const WIRE_TAG: u8;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, rhs: &Self);
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    /// `self += a * b`.
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul(b);
        self.add_assign(&p);
    }

    /// Running sum of products, possibly in a cheaper representation than
    /// `Self`.
    type Acc: Debug + Send;

    fn acc_zero() -> Self::Acc;
    fn acc_add_mul(acc: &mut Self::Acc, a: &Self, b: &Self);
    fn acc_finish(acc: Self::Acc) -> Self;

    fn parse_literal(s: &str) -> Option<Self>;

    fn write_wire(&self, out: &mut Vec<u8>);
    /// Decodes one coefficient from the front of `buf`, returning it together
    /// with the number of bytes consumed.
    fn read_wire(buf: &[u8]) -> Option<(Self, usize)>;
}

/// Integer accumulator: products of word-sized coefficients are summed in an
/// `i128` and spill into a big integer only on overflow.
#[derive(Clone, Debug, Default)]
pub struct IntAcc {
    small: i128,
    big: Option<BigInt>,
}

impl IntAcc {
    #[inline]
    fn add_small(&mut self, p: i128) {
        match self.small.checked_add(p) {
            Some(s) => self.small = s,
            None => {
                *self.big.get_or_insert_with(<BigInt as Zero>::zero) += self.small;
                self.small = p;
            }
        }
    }
}

impl Coeff for BigInt {
    const NAME: &'static str = "int";
    const WIRE_TAG: u8 = 1;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    type Acc = IntAcc;

    fn acc_zero() -> IntAcc {
        IntAcc::default()
    }

    #[inline]
    fn acc_add_mul(acc: &mut IntAcc, a: &Self, b: &Self) {
        match (a.to_i64(), b.to_i64()) {
            (Some(x), Some(y)) => acc.add_small(x as i128 * y as i128),
            _ => *acc.big.get_or_insert_with(<BigInt as Zero>::zero) += a * b,
        }
    }

    fn acc_finish(acc: IntAcc) -> Self {
        match acc.big {
            Some(big) => big + acc.small,
            None => BigInt::from(acc.small),
        }
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.strip_prefix('+').unwrap_or(s);
        if s.is_empty() || s.starts_with('+') {
            return None;
        }
        s.parse().ok()
    }

    // sign byte (0 zero, 1 positive, 2 negative), u32 length, magnitude LE
    fn write_wire(&self, out: &mut Vec<u8>) {
        let (sign, mag) = self.to_bytes_le();
        out.push(match sign {
            Sign::NoSign => 0,
            Sign::Plus => 1,
            Sign::Minus => 2,
        });
        if sign == Sign::NoSign {
            out.extend_from_slice(&0u32.to_le_bytes());
            return;
        }
        out.extend_from_slice(&(mag.len() as u32).to_le_bytes());
        out.extend_from_slice(&mag);
    }

    fn read_wire(buf: &[u8]) -> Option<(Self, usize)> {
        let sign = match *buf.first()? {
            0 => Sign::NoSign,
            1 => Sign::Plus,
            2 => Sign::Minus,
            _ => return None,
        };
        let len = u32::from_le_bytes(buf.get(1..5)?.try_into().ok()?) as usize;
        let mag = buf.get(5..5 + len)?;
        if sign == Sign::NoSign {
            return (len == 0).then(|| (<BigInt as Coeff>::zero(), 5));
        }
        Some((BigInt::from_bytes_le(sign, mag), 5 + len))
    }
}

impl Coeff for f64 {
    const NAME: &'static str = "f64";
    const WIRE_TAG: u8 = 2;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    type Acc = f64;

    fn acc_zero() -> f64 {
        0.0
    }

    #[inline]
    fn acc_add_mul(acc: &mut f64, a: &Self, b: &Self) {
        *acc += a * b;
    }

    fn acc_finish(acc: f64) -> Self {
        acc
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let v: f64 = s.parse().ok()?;
        v.is_finite().then_some(v)
    }

    fn write_wire(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn read_wire(buf: &[u8]) -> Option<(Self, usize)> {
        let bytes: [u8; 8] = buf.get(..8)?.try_into().ok()?;
        Some((f64::from_le_bytes(bytes), 8))
    }
}
