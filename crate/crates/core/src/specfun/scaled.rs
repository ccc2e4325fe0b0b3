//! Complex numbers carried as a mantissa and a binary exponent.
//!
//! Bessel and Hankel values at high order overflow or underflow `f64` long
//! before their products do. Recurrences run in plain `Complex64` with
//! periodic renormalisation and every retained value is stored as a
//! [`Scaled`] so that products can be formed without intermediate overflow.

use std::ops::{Mul, Neg};

use num_complex::Complex64;

/// `mant * 2^exp`, with `max(|re|, |im|)` of the mantissa in `[0.5, 1)` unless zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    mant: Complex64,
    exp: i64,
}

pub(crate) fn frexp(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x > 0.0);
    let mut bits = x.to_bits();
    let mut bias = 0i64;
    if (bits >> 52) & 0x7ff == 0 {
        // subnormal: lift into the normal range first
        bits = (x * f64::from_bits(0x43f0_0000_0000_0000)).to_bits(); // 2^64
        bias = -64;
    }
    let e = ((bits >> 52) & 0x7ff) as i64 - 1022;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, e + bias)
}

/// Exact multiplication by `2^k`, saturating to zero/infinity.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= f64::from_bits(((1000 + 1023) as u64) << 52);
        k -= 1000;
    }
    while k < -1000 {
        x *= f64::from_bits(((-1000 + 1023) as u64) << 52);
        k += 1000;
    }
    x * f64::from_bits(((k + 1023) as u64) << 52)
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mant: Complex64 { re: 0.0, im: 0.0 },
        exp: 0,
    };

    pub fn new(mant: Complex64, exp: i64) -> Self {
        let m = mant.re.abs().max(mant.im.abs());
        if m == 0.0 {
            return Self::ZERO;
        }
        let (_, e) = frexp(m);
        Scaled {
            mant: Complex64::new(ldexp(mant.re, -e), ldexp(mant.im, -e)),
            exp: exp + e,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mant.re.is_finite() && self.mant.im.is_finite()
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Converts to `Complex64`; `None` when the magnitude overflows.
    /// Underflow rounds to zero.
    pub fn to_complex(self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if self.exp > 1024 {
            return None;
        }
        let z = Complex64::new(ldexp(self.mant.re, self.exp), ldexp(self.mant.im, self.exp));
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    /// Natural log of the modulus.
    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn conj(self) -> Self {
        Scaled {
            mant: self.mant.conj(),
            exp: self.exp,
        }
    }

    pub fn scale(self, s: Complex64) -> Self {
        Self::new(self.mant * s, self.exp)
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let shift = small.exp - big.exp;
        if shift < -60 {
            return big;
        }
        let s = Complex64::new(ldexp(small.mant.re, shift), ldexp(small.mant.im, shift));
        Self::new(big.mant + s, big.exp)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    pub fn div(self, other: Self) -> Self {
        Self::new(self.mant / other.mant, self.exp - other.exp)
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frexp_ldexp_roundtrip() {
        for &x in &[1.0, 0.75, 3.0e-310, 1.7e308, 12345.678] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m), "{x} -> {m}");
            assert_eq!(ldexp(m, e), x);
        }
    }

    #[test]
    fn products_survive_overflow() {
        let big = Scaled::new(Complex64::new(1.0, 1.0), 5000);
        let small = Scaled::new(Complex64::new(2.0, 0.0), -5003);
        let p = (big * small).to_complex().unwrap();
        assert!((p - Complex64::new(0.25, 0.25)).norm() < 1e-16);
        assert!(big.to_complex().is_none());
        assert_eq!(small.to_complex().unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn addition_aligns_exponents() {
        let a = Scaled::new(Complex64::new(3.0, 0.0), 100);
        let b = Scaled::new(Complex64::new(1.0, 0.0), 101);
        let s = a.add(b).div(Scaled::new(Complex64::new(1.0, 0.0), 100));
        assert_eq!(s.to_complex().unwrap(), Complex64::new(5.0, 0.0));
        assert!(a.sub(a).is_zero());
    }
}
