//! Fixed-point extended-precision scalars on top of `num-bigint`.
//!
//! The Pollaczek coefficient and moment recursions cancel catastrophically:
//! the triangular coefficients grow like ((1+ρ)/ρ)ⁿ while the moments they
//! combine into shrink below the support bound raised to n. A value here is
//! `mant · 2^(-scale)` with one scale shared per context, so addition and
//! subtraction are exact and only multiplication and division truncate, at
//! absolute resolution 2^(-scale).

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Shared fixed-point context: every [`ExtReal`] produced by it represents
/// `mant / 2^scale_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ExtCtx {
    scale_bits: u32,
}

/// Fixed-point extended-precision real. Meaningful only together with the
/// [`ExtCtx`] that produced it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct ExtReal(BigInt);

impl ExtCtx {
    pub fn new(scale_bits: u32) -> Self {
        Self { scale_bits }
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }

    pub fn zero(&self) -> ExtReal {
        ExtReal(BigInt::zero())
    }

    /// Exact conversion: every finite f64 is a dyadic rational.
    /// Magnitudes below 2^(-scale) flush to zero.
    pub fn from_f64(&self, x: f64) -> ExtReal {
        assert!(x.is_finite(), "extended-precision input must be finite");
        if x == 0.0 {
            return self.zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        // x = m * 2^e
        let (m, e) = if biased_exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), biased_exp - 1075)
        };
        let shift = self.scale_bits as i64 + e;
        let mut mant = BigInt::from(m);
        if shift >= 0 {
            mant <<= shift as u64;
        } else {
            mant = shr_to_zero(&mant, (-shift) as u64);
        }
        if negative {
            mant = -mant;
        }
        ExtReal(mant)
    }

    /// Nearest-representable conversion back to f64 (magnitude truncated at
    /// 63 significant bits, far below any tolerance used by callers).
    pub fn to_f64(&self, a: &ExtReal) -> f64 {
        if a.0.is_zero() {
            return 0.0;
        }
        let mag = a.0.magnitude();
        let bits = mag.bits();
        let drop = bits.saturating_sub(63);
        let top: u64 = (mag >> drop)
            .iter_u64_digits()
            .next()
            .expect("nonzero magnitude");
        let value = ldexp(top as f64, drop as i64 - self.scale_bits as i64);
        if a.0.is_negative() {
            -value
        } else {
            value
        }
    }

    pub fn mul(&self, a: &ExtReal, b: &ExtReal) -> ExtReal {
        ExtReal(shr_to_zero(&(&a.0 * &b.0), self.scale_bits as u64))
    }

    pub fn div(&self, a: &ExtReal, b: &ExtReal) -> ExtReal {
        assert!(!b.0.is_zero(), "extended-precision division by zero");
        ExtReal((&a.0 << self.scale_bits) / &b.0)
    }

    /// a + b * c without an intermediate allocation for the sum.
    pub fn mul_add(&self, a: &ExtReal, b: &ExtReal, c: &ExtReal) -> ExtReal {
        ExtReal(&a.0 + shr_to_zero(&(&b.0 * &c.0), self.scale_bits as u64))
    }
}

impl ExtReal {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &ExtReal) -> ExtReal {
        ExtReal(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &ExtReal) -> ExtReal {
        ExtReal(&self.0 - &other.0)
    }

    pub fn neg(&self) -> ExtReal {
        ExtReal(-&self.0)
    }

    pub fn add_assign(&mut self, other: &ExtReal) {
        self.0 += &other.0;
    }
}

/// Shift right with truncation toward zero (BigInt's `>>` floors, which would
/// bias negative values downward).
fn shr_to_zero(x: &BigInt, shift: u64) -> BigInt {
    if x.is_negative() {
        -(BigInt::from(x.magnitude() >> shift))
    } else {
        BigInt::from(x.magnitude() >> shift)
    }
}

/// f * 2^e with saturation, valid across the full f64 exponent range.
fn ldexp(f: f64, e: i64) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    let mut r = f;
    let mut e = e;
    while e > 1000 {
        r *= 2f64.powi(1000);
        if r.is_infinite() {
            return r;
        }
        e -= 1000;
    }
    while e < -1000 {
        r *= 2f64.powi(-1000);
        if r == 0.0 {
            return r;
        }
        e += 1000;
    }
    r * 2f64.powi(e as i32)
}
