//! Cheap certified upper bounds: a 64-bit mantissa and a binary exponent,
//! with every operation rounding upward.

use std::cmp::Ordering;
use std::fmt;

use rug::Integer;

use crate::dyadic::{Dyadic, DyadicComplex};

/// Nonnegative value `mant·2^exp`, used only as an upper bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct UBound {
    mant: u64,
    exp: i64,
}

const TOP: u64 = 1 << 63;

#[allow(clippy::should_implement_trait)]
impl UBound {
    pub const ZERO: UBound = UBound { mant: 0, exp: 0 };

    fn norm(mant: u128, exp: i64) -> UBound {
        if mant == 0 {
            return UBound::ZERO;
        }
        let bits = 128 - mant.leading_zeros() as i64;
        if bits <= 64 {
            let sh = 64 - bits;
            return UBound { mant: (mant as u64) << sh, exp: exp - sh };
        }
        let sh = bits - 64;
        let mut m = mant >> sh;
        if m << sh != mant {
            m += 1;
        }
        let mut e = exp + sh;
        if m >> 64 != 0 {
            m >>= 1;
            e += 1;
        }
        UBound { mant: m as u64, exp: e }
    }

    pub fn from_u64(v: u64) -> UBound {
        UBound::norm(v as u128, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> UBound {
        UBound { mant: TOP, exp: k - 63 }
    }

    /// Upper bound on `|v|`.
    pub fn from_integer(v: &Integer) -> UBound {
        let bits = v.significant_bits();
        if bits <= 64 {
            return UBound::from_u64(Integer::from(v.abs_ref()).to_u64_wrapping());
        }
        let sh = bits - 64;
        let top = Integer::from(v.abs_ref()) >> sh;
        let mut m = top.to_u64_wrapping() as u128;
        if v.find_one(0).is_some_and(|p| p < sh) {
            m += 1;
        }
        UBound::norm(m, sh as i64)
    }

    /// Upper bound on `|x|`.
    pub fn from_dyadic(x: &Dyadic) -> UBound {
        let b = UBound::from_integer(x.mantissa());
        b.shl(x.exponent())
    }

    /// Upper bound on `|z|` via `|re| + |im|`.
    pub fn from_complex(z: &DyadicComplex) -> UBound {
        UBound::from_dyadic(&z.re).add(UBound::from_dyadic(&z.im))
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0
    }

    pub fn shl(self, k: i64) -> UBound {
        if self.is_zero() {
            self
        } else {
            UBound { mant: self.mant, exp: self.exp + k }
        }
    }

    pub fn add(self, o: UBound) -> UBound {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = hi.exp - lo.exp;
        if d > 63 {
            // lo < 2^(hi.exp), absorbed by bumping the last mantissa bit
            return UBound::norm(hi.mant as u128 + 1, hi.exp);
        }
        let a = (hi.mant as u128) << 63;
        let b = (lo.mant as u128) << (63 - d);
        UBound::norm(a + b, hi.exp - 63)
    }

    pub fn mul(self, o: UBound) -> UBound {
        if self.is_zero() || o.is_zero() {
            return UBound::ZERO;
        }
        UBound::norm(self.mant as u128 * o.mant as u128, self.exp + o.exp)
    }

    pub fn pow(self, mut k: u64) -> UBound {
        let mut acc = UBound::from_u64(1);
        let mut base = self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }

    pub fn max(self, o: UBound) -> UBound {
        if self >= o {
            self
        } else {
            o
        }
    }

    /// Smallest `k` with `self <= 2^k`; `None` for zero.
    pub fn log2_ceil(self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let extra = if self.mant == TOP { 0 } else { 1 };
        Some(self.exp + 63 + extra)
    }

    /// Bits of precision certified by this error bound: largest `k` with
    /// `self <= 2^-k`. Zero maps to `i64::MAX`.
    pub fn bits(self) -> i64 {
        match self.log2_ceil() {
            None => i64::MAX,
            Some(k) => -k,
        }
    }

    /// `self <= 2^k`.
    pub fn le_pow2(self, k: i64) -> bool {
        self <= UBound::pow2(k)
    }

    pub fn to_dyadic(self) -> Dyadic {
        Dyadic::new(Integer::from(self.mant), self.exp)
    }

    pub fn to_f64(self) -> f64 {
        self.to_dyadic().to_f64()
    }
}

impl PartialOrd for UBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UBound {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.exp.cmp(&o.exp).then(self.mant.cmp(&o.mant)),
        }
    }
}

impl fmt::Display for UBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log2_ceil() {
            None => write!(f, "0"),
            Some(k) => write!(f, "<=2^{k}"),
        }
    }
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn clog2(n: u64) -> i64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_are_upper() {
        let x = Dyadic::from_f64(0.1);
        let b = UBound::from_dyadic(&x);
        assert!(b.to_dyadic() >= x);
        let big = Integer::from(Integer::u_pow_u(3, 200));
        let bb = UBound::from_integer(&big);
        assert!(bb.to_dyadic() >= Dyadic::from_integer(big.clone()));
        let neg = Dyadic::from_integer(-big);
        assert!(UBound::from_dyadic(&neg).to_dyadic() >= neg.abs());
    }

    #[test]
    fn ops_round_up() {
        let third = UBound::from_dyadic(&Dyadic::from_f64(1.0 / 3.0));
        let p = third.mul(third).mul(third);
        let exact = Dyadic::from_f64(1.0 / 3.0);
        let e3 = &(&exact * &exact) * &exact;
        assert!(p.to_dyadic() >= e3);
        let s = UBound::pow2(0).add(UBound::pow2(-100));
        assert!(s > UBound::pow2(0));
        assert_eq!(UBound::pow2(5).log2_ceil(), Some(5));
        assert_eq!(UBound::from_u64(33).log2_ceil(), Some(6));
        assert_eq!(UBound::from_u64(3).pow(40).log2_ceil(), Some(64));
        assert_eq!(UBound::ZERO.bits(), i64::MAX);
        assert_eq!(UBound::pow2(-7).bits(), 7);
    }

    #[test]
    fn clog2_values() {
        assert_eq!(clog2(1), 0);
        assert_eq!(clog2(2), 1);
        assert_eq!(clog2(3), 2);
        assert_eq!(clog2(512), 9);
        assert_eq!(clog2(513), 10);
    }
}
