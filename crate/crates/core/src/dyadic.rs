//! Exact dyadic scalars `m·2^e` and their complex counterpart.
//!
//! Values are always kept canonical: the mantissa is odd, or zero with
//! exponent zero. Text literals are `[-]0x<hex>p<exp>` for reals and
//! `<re>[+|-]<im>i` for complex values.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rug::Integer;

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Dyadic {
    mant: Integer,
    exp: i64,
}

fn shift_bits(k: i64) -> u32 {
    u32::try_from(k).expect("shift exceeds supported integer size")
}

/// Round `m / 2^k` to the nearest integer, ties to even. `k > 0`.
pub(crate) fn round_shift(m: &Integer, k: u32) -> Integer {
    let half = m.get_bit(k - 1);
    let sticky = k >= 2 && m.find_one(0).is_some_and(|p| p < k - 1);
    let mut q = Integer::from(m >> k);
    if half && (sticky || q.is_odd()) {
        q += 1;
    }
    q
}

impl Dyadic {
    pub fn new(mant: Integer, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.canonicalize();
        d
    }

    fn canonicalize(&mut self) {
        match self.mant.find_one(0) {
            None => self.exp = 0,
            Some(0) => {}
            Some(tz) => {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn one() -> Self {
        Dyadic::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(Integer::from(v), 0)
    }

    pub fn from_integer(v: Integer) -> Self {
        Dyadic::new(v, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: Integer::from(1), exp: k }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite float");
        if v == 0.0 {
            return Dyadic::zero();
        }
        let bits = v.to_bits();
        let sign = bits >> 63 != 0;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let m = Integer::from(m);
        Dyadic::new(if sign { -m } else { m }, e)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (f, e) = self.mant.to_f64_exp();
        let total = e as i64 + self.exp;
        if total > 1100 {
            return f.signum() * f64::INFINITY;
        }
        if total < -1100 {
            return 0.0;
        }
        f * 2f64.powi(total as i32)
    }

    pub fn mantissa(&self) -> &Integer {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.cmp0() == Ordering::Equal
    }

    pub fn is_negative(&self) -> bool {
        self.mant < 0
    }

    pub fn signum(&self) -> i32 {
        match self.mant.cmp0() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: Integer::from(self.mant.abs_ref()), exp: self.exp }
    }

    /// Multiply by `2^k` (exact).
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Number of bits after the binary point in the canonical form.
    pub fn frac_bits(&self) -> i64 {
        (-self.exp).max(0)
    }

    /// `floor(log2 |x|)`, or `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.significant_bits() as i64 - 1 + self.exp)
        }
    }

    /// `x·2^s` as an integer. Requires `exponent + s >= 0`.
    pub fn scaled_integer(&self, s: i64) -> Integer {
        if self.is_zero() {
            return Integer::new();
        }
        let e = self.exp + s;
        assert!(e >= 0, "scaled_integer would drop bits");
        Integer::from(&self.mant << shift_bits(e))
    }

    /// `round(x·2^s)`, nearest with ties to even.
    pub fn round_scaled(&self, s: i64) -> Integer {
        let e = self.exp + s;
        if e >= 0 {
            self.scaled_integer(s)
        } else if -e > self.mant.significant_bits() as i64 + 1 {
            Integer::new()
        } else {
            round_shift(&self.mant, shift_bits(-e))
        }
    }

    /// Nearest multiple of `2^-bits`, ties to even.
    pub fn round(&self, bits: i64) -> Dyadic {
        if self.exp >= -bits {
            return self.clone();
        }
        Dyadic::new(self.round_scaled(bits), -bits)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mant.cmp0(), other.mant.cmp0());
        if sa != sb || sa == Ordering::Equal {
            return sa.cmp(&sb);
        }
        // same nonzero sign: compare magnitudes by leading bit first
        let la = self.log2_floor().unwrap();
        let lb = other.log2_floor().unwrap();
        let mag = if la != lb {
            la.cmp(&lb)
        } else if self.exp >= other.exp {
            let a = Integer::from(&self.mant << shift_bits(self.exp - other.exp));
            a.cmp_abs(&other.mant)
        } else {
            let b = Integer::from(&other.mant << shift_bits(other.exp - self.exp));
            self.mant.cmp_abs(&b)
        };
        if sa == Ordering::Greater {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_impl(a: &Dyadic, b: &Dyadic, negate_b: bool) -> Dyadic {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if negate_b { -b } else { b.clone() };
    }
    let (lo, hi, lo_is_a) = if a.exp <= b.exp { (a, b, true) } else { (b, a, false) };
    let shifted = Integer::from(&hi.mant << shift_bits(hi.exp - lo.exp));
    let (x, y) = if lo_is_a { (lo.mant.clone(), shifted) } else { (shifted, lo.mant.clone()) };
    let m = if negate_b { x - y } else { x + y };
    Dyadic::new(m, lo.exp)
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        add_impl(self, rhs, false)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        add_impl(self, rhs, true)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd
        Dyadic { mant: Integer::from(&self.mant * &rhs.mant), exp: self.exp + rhs.exp }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: Integer::from(-&self.mant), exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $f:ident) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $f(self, rhs: &$t) -> $t {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(Dyadic, Add, add);
forward_owned!(Dyadic, Sub, sub);
forward_owned!(Dyadic, Mul, mul);

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_negative() { "-" } else { "" };
        let hex = Integer::from(self.mant.abs_ref()).to_string_radix(16);
        write!(f, "{sign}0x{hex}p{}", self.exp)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("invalid dyadic literal `{s}`"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
        let p = body.find(['p', 'P']).ok_or_else(bad)?;
        let (hex, exp) = (&body[..p], &body[p + 1..]);
        if hex.is_empty() || !hex.bytes().all(|c| c.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let exp_digits = exp.strip_prefix(['-', '+']).unwrap_or(exp);
        if exp_digits.is_empty() || !exp_digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let m = Integer::from_str_radix(hex, 16).map_err(|_| bad())?;
        let e: i64 = exp.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(if neg { -m } else { m }, e))
    }
}

/// A complex number with dyadic real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct DyadicComplex {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl DyadicComplex {
    pub fn new(re: Dyadic, im: Dyadic) -> Self {
        DyadicComplex { re, im }
    }

    pub fn real(re: Dyadic) -> Self {
        DyadicComplex { re, im: Dyadic::zero() }
    }

    pub fn zero() -> Self {
        DyadicComplex::default()
    }

    pub fn one() -> Self {
        DyadicComplex::real(Dyadic::one())
    }

    pub fn i() -> Self {
        DyadicComplex::new(Dyadic::zero(), Dyadic::one())
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        DyadicComplex::new(Dyadic::from_i64(re), Dyadic::from_i64(im))
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        DyadicComplex::new(Dyadic::from_f64(re), Dyadic::from_f64(im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        DyadicComplex::new(self.re.clone(), -&self.im)
    }

    /// `|re| + |im|`, an upper bound on the modulus within a factor √2.
    pub fn modulus_bound(&self) -> Dyadic {
        &self.re.abs() + &self.im.abs()
    }

    /// `re² + im²`, exact.
    pub fn norm_sqr(&self) -> Dyadic {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn shl(&self, k: i64) -> Self {
        DyadicComplex::new(self.re.shl(k), self.im.shl(k))
    }

    pub fn scale(&self, r: &Dyadic) -> Self {
        DyadicComplex::new(&self.re * r, &self.im * r)
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        DyadicComplex::new(-&self.im, self.re.clone())
    }

    pub fn frac_bits(&self) -> i64 {
        self.re.frac_bits().max(self.im.frac_bits())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Round both components to the nearest multiple of `2^-bits` (ties to even).
///
/// The modulus error is at most `2^-bits / √2`.
pub fn round_scalar(x: &DyadicComplex, bits: i64) -> DyadicComplex {
    DyadicComplex::new(x.re.round(bits), x.im.round(bits))
}

impl Add<&DyadicComplex> for &DyadicComplex {
    type Output = DyadicComplex;
    fn add(self, rhs: &DyadicComplex) -> DyadicComplex {
        DyadicComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&DyadicComplex> for &DyadicComplex {
    type Output = DyadicComplex;
    fn sub(self, rhs: &DyadicComplex) -> DyadicComplex {
        DyadicComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&DyadicComplex> for &DyadicComplex {
    type Output = DyadicComplex;
    fn mul(self, rhs: &DyadicComplex) -> DyadicComplex {
        if self.is_real() && rhs.is_real() {
            return DyadicComplex::real(&self.re * &rhs.re);
        }
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        DyadicComplex::new(re, im)
    }
}

impl Neg for &DyadicComplex {
    type Output = DyadicComplex;
    fn neg(self) -> DyadicComplex {
        DyadicComplex::new(-&self.re, -&self.im)
    }
}

impl Neg for DyadicComplex {
    type Output = DyadicComplex;
    fn neg(self) -> DyadicComplex {
        DyadicComplex::new(-self.re, -self.im)
    }
}

forward_owned!(DyadicComplex, Add, add);
forward_owned!(DyadicComplex, Sub, sub);
forward_owned!(DyadicComplex, Mul, mul);

impl From<Dyadic> for DyadicComplex {
    fn from(re: Dyadic) -> Self {
        DyadicComplex::real(re)
    }
}

impl fmt::Display for DyadicComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl FromStr for DyadicComplex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("invalid complex literal `{s}`"));
        let body = s.strip_suffix('i').ok_or_else(bad)?;
        let bytes = body.as_bytes();
        let split =
            (1..bytes.len()).find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'p' | b'P')).ok_or_else(bad)?;
        let re: Dyadic = body[..split].parse().map_err(|_| bad())?;
        let im_body = &body[split + 1..];
        if im_body.starts_with(['+', '-']) {
            return Err(bad());
        }
        let im: Dyadic = im_body.parse().map_err(|_| bad())?;
        let im = if bytes[split] == b'-' { -im } else { im };
        Ok(DyadicComplex::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = Dyadic::new(Integer::from(12), 0);
        assert_eq!(x.mantissa(), &Integer::from(3));
        assert_eq!(x.exponent(), 2);
        let z = Dyadic::new(Integer::new(), 17);
        assert_eq!(z.exponent(), 0);
        assert_eq!(z, Dyadic::zero());
        assert_eq!((&x - &x).exponent(), 0);
    }

    #[test]
    fn literal_roundtrip() {
        assert_eq!(d("0x3p-2").to_f64(), 0.75);
        assert_eq!(d("-0x3p-2").to_f64(), -0.75);
        assert_eq!(d("0x18p0").to_string(), "0x3p3");
        assert_eq!(Dyadic::zero().to_string(), "0x0p0");
        for s in ["0x1p0", "-0xabcdefp-100", "0x0p0", "0x5p7"] {
            assert_eq!(d(s).to_string(), s);
        }
        assert!("0x1".parse::<Dyadic>().is_err());
        assert!("1p0".parse::<Dyadic>().is_err());
        assert!("0xgp0".parse::<Dyadic>().is_err());
        assert!("0x1p".parse::<Dyadic>().is_err());
    }

    #[test]
    fn complex_literal() {
        let two: DyadicComplex = "0x1p1+0x0p0i".parse().unwrap();
        assert_eq!(two, DyadicComplex::from_i64(2, 0));
        assert_eq!(two.to_string(), "0x1p1+0x0p0i");
        let z: DyadicComplex = "-0x1p-3-0x3p-2i".parse().unwrap();
        assert_eq!(z.to_f64(), (-0.125, -0.75));
        assert_eq!(z.to_string(), "-0x1p-3-0x3p-2i");
        let w: DyadicComplex = "0x1p+2+0x1p-1i".parse().unwrap();
        assert_eq!(w.to_f64(), (4.0, 0.5));
        assert!("0x1p0".parse::<DyadicComplex>().is_err());
        assert!("0x1p0+-0x1p0i".parse::<DyadicComplex>().is_err());
    }

    #[test]
    fn exact_arithmetic() {
        let a = Dyadic::from_f64(1.0 / 3.0);
        let b = Dyadic::from_f64(-7.25e-9);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&a * &Dyadic::from_i64(3), &(&a + &a) + &a);
        assert_eq!((&a * &b).shl(7).shl(-7), &a * &b);
        assert!(a > b);
        assert!(Dyadic::from_i64(-3) < Dyadic::from_i64(-2));
        assert!(Dyadic::from_f64(0.5) < Dyadic::from_f64(0.75));
        assert_eq!(Dyadic::from_f64(1.5).cmp(&d("0x3p-1")), Ordering::Equal);
    }

    #[test]
    fn rounding_ties_to_even() {
        // 2.5 -> 2, 3.5 -> 4, -2.5 -> -2, 2.25 at 1 bit -> 2.0 (tie at quarter -> even)
        assert_eq!(Dyadic::from_f64(2.5).round(0), Dyadic::from_i64(2));
        assert_eq!(Dyadic::from_f64(3.5).round(0), Dyadic::from_i64(4));
        assert_eq!(Dyadic::from_f64(-2.5).round(0), Dyadic::from_i64(-2));
        assert_eq!(Dyadic::from_f64(-3.5).round(0), Dyadic::from_i64(-4));
        assert_eq!(Dyadic::from_f64(-2.6).round(0), Dyadic::from_i64(-3));
        assert_eq!(Dyadic::from_f64(2.25).round(1), Dyadic::from_i64(2));
        assert_eq!(Dyadic::from_f64(2.75).round(1), Dyadic::from_i64(3));
        assert_eq!(Dyadic::from_f64(1e-30).round(10), Dyadic::zero());
    }

    #[test]
    fn round_scalar_examples() {
        let one = DyadicComplex::one();
        assert_eq!(round_scalar(&one, 10), one);
        let tiny = DyadicComplex::real(Dyadic::pow2(-20));
        let r = round_scalar(&tiny, 10);
        assert!((&r - &tiny).modulus_bound() <= Dyadic::pow2(-10));
        let third = DyadicComplex::real(Dyadic::new(Integer::from(0x5555_5555_5555_5555u64), -64));
        let r = round_scalar(&third, 16);
        assert!((&r - &third).modulus_bound() <= Dyadic::pow2(-16));
        assert!(r.frac_bits() <= 17);
    }

    #[test]
    fn complex_ring() {
        let i = DyadicComplex::i();
        assert_eq!(&i * &i, DyadicComplex::from_i64(-1, 0));
        let z = DyadicComplex::from_i64(3, 4);
        assert_eq!(z.modulus_bound(), Dyadic::from_i64(7));
        assert_eq!(z.norm_sqr(), Dyadic::from_i64(25));
        assert_eq!(&z * &z.conj(), DyadicComplex::from_i64(25, 0));
    }
}
