//! Small numerical helpers: compensated summation, exact binomials and an
//! arbitrary-precision dyadic rational used by the fermionic recursion when
//! floating point cancellation would destroy the result.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{Float, Signed, ToPrimitive, Zero};

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Exact binomial coefficient, `None` on overflow of `u128`.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Exact value `mantissa * 2^exponent`.
///
/// Every finite `f64` is representable, and sums and products stay exact, so
/// alternating sums of such values never lose precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn from_integer(value: i64) -> Self {
        Dyadic {
            mantissa: BigInt::from(value),
            exponent: 0,
        }
    }

    pub fn from_bigint(value: BigInt) -> Self {
        Dyadic {
            mantissa: value,
            exponent: 0,
        }
    }

    /// Panics on non-finite input.
    pub fn from_f64(value: f64) -> Self {
        assert!(value.is_finite(), "Dyadic::from_f64 on {value}");
        if value == 0.0 {
            return Self::zero();
        }
        let (mantissa, exponent, sign) = value.integer_decode();
        let mut m = BigInt::from(mantissa);
        if sign < 0 {
            m = -m;
        }
        Dyadic {
            mantissa: m,
            exponent: exponent as i64,
        }
    }

    /// `exp(x)` for any finite `x`, including arguments far outside the
    /// range of `f64` results. Relative error is that of `f64::exp` on the
    /// reduced argument.
    pub fn exp(x: f64) -> Self {
        let k = (x / std::f64::consts::LN_2).floor();
        let r = x - k * std::f64::consts::LN_2;
        let mut d = Self::from_f64(r.exp());
        d.exponent += k as i64;
        d
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        match self.mantissa.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        Dyadic {
            mantissa: num_traits::pow(self.mantissa.clone(), n as usize),
            exponent: self.exponent * n as i64,
        }
    }

    /// `(m, e)` with `|self| ≈ m * 2^e` and `m` holding the top 64 bits.
    fn leading(&self) -> (f64, i64) {
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 64).max(0);
        let abs = self.mantissa.abs();
        let mut top = (&abs >> shift as usize).to_u64().unwrap_or(u64::MAX);
        // Sticky bit keeps the final rounding to 53 bits correct.
        if shift > 0 && abs.trailing_zeros().unwrap_or(0) < shift as u64 {
            top |= 1;
        }
        (top as f64, self.exponent + shift)
    }

    /// Natural logarithm of a positive value; `None` otherwise.
    pub fn ln(&self) -> Option<f64> {
        if self.signum() != Ordering::Greater {
            return None;
        }
        let (m, e) = self.leading();
        Some(m.ln() + e as f64 * std::f64::consts::LN_2)
    }

    /// `self / other` rounded to `f64`; `None` when `other` is zero.
    pub fn ratio(&self, other: &Dyadic) -> Option<f64> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(0.0);
        }
        let (ma, ea) = self.leading();
        let (mb, eb) = other.leading();
        let sign = if (self.signum() == Ordering::Less) ^ (other.signum() == Ordering::Less) {
            -1.0
        } else {
            1.0
        };
        Some(sign * scale_by_pow2(ma / mb, ea - eb))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (m, e) = self.leading();
        let sign = if self.signum() == Ordering::Less { -1.0 } else { 1.0 };
        sign * scale_by_pow2(m, e)
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let exponent = a.exponent.min(b.exponent);
        let ma = &a.mantissa << (a.exponent - exponent) as usize;
        let mb = &b.mantissa << (b.exponent - exponent) as usize;
        (ma, mb, exponent)
    }
}

fn scale_by_pow2(mut value: f64, mut exponent: i64) -> f64 {
    // Step in chunks so intermediate powers of two stay representable.
    while exponent > 1000 {
        value *= 2f64.powi(1000);
        exponent -= 1000;
        if value.is_infinite() {
            return value;
        }
    }
    while exponent < -1000 {
        value *= 2f64.powi(-1000);
        exponent += 1000;
        if value == 0.0 {
            return value;
        }
    }
    value * 2f64.powi(exponent as i32)
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, exponent) = Dyadic::aligned(self, rhs);
        Dyadic {
            mantissa: a + b,
            exponent,
        }
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(3, 4), Some(0));
        assert_eq!(binomial(200, 0), Some(1));
        assert_eq!(binomial(52, 5), Some(2_598_960));
        assert_eq!(binomial(1000, 500), None);
    }

    #[test]
    fn exp_beyond_f64_range() {
        let d = Dyadic::exp(-2000.0);
        assert!((d.ln().unwrap() + 2000.0).abs() < 1e-9);
        assert_eq!(d.to_f64(), 0.0);
        let big = Dyadic::exp(900.0);
        assert!((big.ln().unwrap() - 900.0).abs() < 1e-9);
        assert!((Dyadic::exp(-1.5).to_f64() - (-1.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Dyadic::from_f64(1.0);
        let tiny = Dyadic::from_f64(1e-300);
        let s = &(&a + &tiny) - &a;
        assert_eq!(s.to_f64(), 1e-300);
    }

    #[test]
    fn ratio_of_tiny_values() {
        let a = Dyadic::exp(-5000.0);
        let b = Dyadic::exp(-5001.0);
        assert!((a.ratio(&b).unwrap() - 1f64.exp()).abs() < 1e-12);
        assert_eq!(a.ratio(&Dyadic::zero()), None);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let (dx, dy) = (Dyadic::from_f64(x), Dyadic::from_f64(y));
            prop_assert_eq!((&dx + &dy).to_f64(), x + y);
            prop_assert_eq!((&dx * &dy).to_f64(), x * y);
            prop_assert_eq!((&dx - &dy).to_f64(), x - y);
        }
    }
}
