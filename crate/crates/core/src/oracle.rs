//! Brute-force references: exact rational arithmetic and a certified
//! high-precision Horner scheme. Quadratic time, meant for tests.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Integer, Rational};

use crate::bound::{clog2, UBound};
use crate::dyadic::{round_scalar, Dyadic, DyadicComplex};
use crate::error::{Error, Result};
use crate::poly::ApproxPoly;

pub fn dyadic_to_rational(x: &Dyadic) -> Rational {
    let e = x.exponent();
    if e >= 0 {
        Rational::from(Integer::from(x.mantissa() << e as u32))
    } else {
        Rational::from((x.mantissa().clone(), Integer::from(1) << (-e) as u32))
    }
}

/// Exact complex rational.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QComplex {
    pub re: Rational,
    pub im: Rational,
}

impl QComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        QComplex { re, im }
    }

    pub fn zero() -> Self {
        QComplex::default()
    }

    pub fn one() -> Self {
        QComplex::new(Rational::from(1), Rational::new())
    }

    pub fn from_dyadic(z: &DyadicComplex) -> Self {
        QComplex::new(dyadic_to_rational(&z.re), dyadic_to_rational(&z.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == Ordering::Equal && self.im.cmp0() == Ordering::Equal
    }

    pub fn norm_sqr(&self) -> Rational {
        Rational::from(self.re.square_ref()) + Rational::from(self.im.square_ref())
    }

    /// `|re| + |im|`, an upper bound on the modulus.
    pub fn abs_bound(&self) -> Rational {
        Rational::from(self.re.abs_ref()) + Rational::from(self.im.abs_ref())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let n = self.norm_sqr();
        Ok(QComplex::new(Rational::from(&self.re / &n), -Rational::from(&self.im / &n)))
    }

    pub fn div(&self, o: &QComplex) -> Result<Self> {
        Ok(self * &o.recip()?)
    }

    /// `|self − z| ≤ 2^-bits`, decided exactly.
    pub fn within(&self, z: &DyadicComplex, bits: i64) -> bool {
        let d = self - &QComplex::from_dyadic(z);
        d.norm_sqr() <= pow2(-2 * bits)
    }
}

pub fn pow2(k: i64) -> Rational {
    dyadic_to_rational(&Dyadic::pow2(k))
}

impl Add<&QComplex> for &QComplex {
    type Output = QComplex;
    fn add(self, o: &QComplex) -> QComplex {
        QComplex::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }
}

impl Sub<&QComplex> for &QComplex {
    type Output = QComplex;
    fn sub(self, o: &QComplex) -> QComplex {
        QComplex::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }
}

impl Mul<&QComplex> for &QComplex {
    type Output = QComplex;
    fn mul(self, o: &QComplex) -> QComplex {
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        QComplex::new(re, im)
    }
}

impl Neg for &QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex::new(-self.re.clone(), -self.im.clone())
    }
}

/// Polynomial with exact complex rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactRationalPoly {
    coeffs: Vec<QComplex>,
}

impl ExactRationalPoly {
    pub fn new(mut coeffs: Vec<QComplex>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ExactRationalPoly { coeffs }
    }

    pub fn from_approx(f: &ApproxPoly) -> Self {
        ExactRationalPoly::new(f.coeffs().iter().map(QComplex::from_dyadic).collect())
    }

    pub fn from_i64(c: &[i64]) -> Self {
        ExactRationalPoly::new(c.iter().map(|&v| QComplex::new(Rational::from(v), Rational::new())).collect())
    }

    /// `∏ (x − p)`.
    pub fn from_roots(points: &[DyadicComplex]) -> Self {
        let mut acc = ExactRationalPoly::new(vec![QComplex::one()]);
        for p in points {
            acc = &acc * &ExactRationalPoly::new(vec![-&QComplex::from_dyadic(p), QComplex::one()]);
        }
        acc
    }

    pub fn coeffs(&self) -> &[QComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> QComplex {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &QComplex) -> QComplex {
        let mut acc = QComplex::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        ExactRationalPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| {
                    let k = Rational::from(k as u64);
                    QComplex::new(Rational::from(&c.re * &k), Rational::from(&c.im * &k))
                })
                .collect(),
        )
    }

    /// `Σ (|re| + |im|)`, an upper bound on the 1-norm.
    pub fn norm_bound(&self) -> Rational {
        self.coeffs.iter().fold(Rational::new(), |acc, c| acc + c.abs_bound())
    }

    /// `∥self − f∥₁ ≤ 2^-bits`, decided exactly on the `|re| + |im|` norm.
    pub fn within(&self, f: &ApproxPoly, bits: i64) -> bool {
        (self - &ExactRationalPoly::from_approx(f)).norm_bound() <= pow2(-bits)
    }
}

impl Add<&ExactRationalPoly> for &ExactRationalPoly {
    type Output = ExactRationalPoly;
    fn add(self, o: &ExactRationalPoly) -> ExactRationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ExactRationalPoly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl Sub<&ExactRationalPoly> for &ExactRationalPoly {
    type Output = ExactRationalPoly;
    fn sub(self, o: &ExactRationalPoly) -> ExactRationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ExactRationalPoly::new((0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl Mul<&ExactRationalPoly> for &ExactRationalPoly {
    type Output = ExactRationalPoly;
    fn mul(self, o: &ExactRationalPoly) -> ExactRationalPoly {
        if self.is_zero() || o.is_zero() {
            return ExactRationalPoly::default();
        }
        let mut out = vec![QComplex::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ExactRationalPoly::new(out)
    }
}

/// Long division: `f = Q·g + R` with `deg R < deg g`.
pub fn exact_divmod(f: &ExactRationalPoly, g: &ExactRationalPoly) -> Result<(ExactRationalPoly, ExactRationalPoly)> {
    let d = g.degree().ok_or(Error::ZeroDivisor)?;
    let lead_inv = g.coeffs[d].recip()?;
    let mut r = f.coeffs.clone();
    let qlen = r.len().saturating_sub(d);
    let mut q = vec![QComplex::zero(); qlen];
    for k in (0..qlen).rev() {
        let c = &r[k + d] * &lead_inv;
        if !c.is_zero() {
            for (j, gj) in g.coeffs.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&c * gj);
            }
        }
        q[k] = c;
    }
    r.truncate(d);
    Ok((ExactRationalPoly::new(q), ExactRationalPoly::new(r)))
}

/// The unique interpolant of degree `< n` through `(points[i], values[i])`.
pub fn exact_lagrange(points: &[DyadicComplex], values: &[DyadicComplex]) -> Result<ExactRationalPoly> {
    assert_eq!(points.len(), values.len());
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::CoincidentPoints { first: j, second: i });
            }
        }
    }
    let g = ExactRationalPoly::from_roots(points);
    let dg = g.derivative();
    let mut acc = ExactRationalPoly::default();
    for (p, v) in points.iter().zip(values) {
        if v.is_zero() {
            continue;
        }
        let x = QComplex::from_dyadic(p);
        let lam = dg.eval(&x);
        let (basis, _) = exact_divmod(&g, &ExactRationalPoly::new(vec![-&x, QComplex::one()]))?;
        let mu = QComplex::from_dyadic(v).div(&lam)?;
        acc = &acc + &(&basis * &ExactRationalPoly::new(vec![mu]));
    }
    Ok(acc)
}

/// `F(m + x)` by repeated synthetic division.
pub fn exact_taylor_shift(f: &ExactRationalPoly, m: &QComplex) -> ExactRationalPoly {
    let mut c = f.coeffs.clone();
    let n = c.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let t = &c[k + 1] * m;
            c[k] = &c[k] + &t;
        }
    }
    ExactRationalPoly::new(c)
}

/// Working precision of [`horner_eval_hp`]: each rounding contributes at
/// most `2^-p`, amplified by at most `max(1,|x|)^d`.
pub fn horner_precision(f: &ApproxPoly, x: &DyadicComplex, bits: i64) -> i64 {
    let d = f.len().saturating_sub(1);
    let r = UBound::from_complex(x).max(UBound::from_u64(1));
    let growth = r.pow(d as u64).log2_ceil().unwrap_or(0);
    bits + 2 + clog2(d as u64 + 1) + growth
}

/// `F(x)` within `2^-bits` by Horner's scheme with per-step rounding. The
/// stored coefficients of `F` are taken as exact.
pub fn horner_eval_hp(f: &ApproxPoly, x: &DyadicComplex, bits: i64) -> DyadicComplex {
    if f.is_zero() {
        return DyadicComplex::zero();
    }
    let p = horner_precision(f, x, bits);
    let mut acc = DyadicComplex::zero();
    for c in f.coeffs().iter().rev() {
        acc = round_scalar(&(&(&acc * x) + c), p);
    }
    round_scalar(&acc, bits + 1)
}
