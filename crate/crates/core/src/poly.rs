//! Approximate polynomials with a certified 1-norm error exponent, and exact
//! Gaussian-integer polynomials.

use rug::Integer;

use crate::bound::UBound;
use crate::dyadic::{round_scalar, Dyadic, DyadicComplex};

/// A polynomial `f̃` together with `errBits` such that `∥f̃ − f∥₁ ≤ 2^-errBits`
/// for an implicit target `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPoly {
    coeffs: Vec<DyadicComplex>,
    err_bits: i64,
    degree_bound: usize,
    norm: UBound,
}

fn trim(coeffs: &mut Vec<DyadicComplex>) {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
}

/// `errBits` for the sum of two errors given in bits.
pub(crate) fn combine_err(a: i64, b: i64) -> i64 {
    match (a == ApproxPoly::EXACT, b == ApproxPoly::EXACT) {
        (true, true) => ApproxPoly::EXACT,
        (true, false) => b,
        (false, true) => a,
        _ => UBound::pow2(-a).add(UBound::pow2(-b)).bits(),
    }
}

impl ApproxPoly {
    /// Sentinel `errBits` for an exact polynomial.
    pub const EXACT: i64 = i64::MAX;

    pub fn new(mut coeffs: Vec<DyadicComplex>, err_bits: i64) -> Self {
        trim(&mut coeffs);
        let degree_bound = coeffs.len().saturating_sub(1);
        let norm = coeffs.iter().fold(UBound::ZERO, |acc, c| acc.add(UBound::from_complex(c)));
        ApproxPoly { coeffs, err_bits, degree_bound, norm }
    }

    pub fn exact(coeffs: Vec<DyadicComplex>) -> Self {
        ApproxPoly::new(coeffs, ApproxPoly::EXACT)
    }

    pub fn from_real(coeffs: &[Dyadic]) -> Self {
        ApproxPoly::exact(coeffs.iter().cloned().map(DyadicComplex::real).collect())
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        ApproxPoly::exact(coeffs.iter().map(|&c| DyadicComplex::from_i64(c, 0)).collect())
    }

    pub fn zero() -> Self {
        ApproxPoly::exact(Vec::new())
    }

    pub fn one() -> Self {
        ApproxPoly::exact(vec![DyadicComplex::one()])
    }

    /// `x − p`, exact.
    pub fn linear(p: &DyadicComplex) -> Self {
        ApproxPoly::exact(vec![-p, DyadicComplex::one()])
    }

    pub fn with_degree_bound(mut self, bound: usize) -> Self {
        self.degree_bound = bound.max(self.coeffs.len().saturating_sub(1));
        self
    }

    pub fn with_err_bits(mut self, err_bits: i64) -> Self {
        self.err_bits = err_bits;
        self
    }

    pub fn coeffs(&self) -> &[DyadicComplex] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<DyadicComplex> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> DyadicComplex {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Number of stored coefficients.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the stored coefficients, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn err_bits(&self) -> i64 {
        self.err_bits
    }

    pub fn is_exact(&self) -> bool {
        self.err_bits == ApproxPoly::EXACT
    }

    /// Certified error as an upper bound (zero when exact).
    pub fn err_bound(&self) -> UBound {
        if self.is_exact() {
            UBound::ZERO
        } else {
            UBound::pow2(-self.err_bits)
        }
    }

    /// Upper bound on `∥coeffs∥₁` (computed from `|re|+|im|`).
    pub fn norm_bound(&self) -> UBound {
        self.norm
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_real())
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| *c == DyadicComplex::one())
    }

    pub fn leading(&self) -> Option<&DyadicComplex> {
        self.coeffs.last()
    }

    /// Largest number of fractional bits over all coefficients.
    pub fn frac_bits(&self) -> i64 {
        self.coeffs.iter().map(|c| c.frac_bits()).max().unwrap_or(0)
    }

    /// Coefficient-wise rounding to `bits` fractional bits. Returns the
    /// rounded polynomial (its `errBits` accounts for the rounding) and the
    /// rounding error bound on its own.
    pub fn round(&self, bits: i64) -> (ApproxPoly, UBound) {
        if self.frac_bits() <= bits {
            return (self.clone(), UBound::ZERO);
        }
        let mut err = UBound::ZERO;
        let coeffs: Vec<_> = self
            .coeffs
            .iter()
            .map(|c| {
                let r = round_scalar(c, bits);
                err = err.add(UBound::from_complex(&(&r - c)));
                r
            })
            .collect();
        let total = if self.is_exact() { err } else { err.add(self.err_bound()) };
        let p = ApproxPoly::new(coeffs, total.bits()).with_degree_bound(self.degree_bound);
        (p, err)
    }

    /// `f mod t^k`.
    pub fn truncate(&self, k: usize) -> ApproxPoly {
        let c = self.coeffs.iter().take(k).cloned().collect();
        ApproxPoly::new(c, self.err_bits)
    }

    /// Coefficients `k..` as a polynomial, i.e. `f div t^k`.
    pub fn high_part(&self, k: usize) -> ApproxPoly {
        let c = self.coeffs.iter().skip(k).cloned().collect();
        ApproxPoly::new(c, self.err_bits)
    }

    /// `t^d · f(1/t)`; requires `deg f <= d`.
    pub fn reverse(&self, d: usize) -> ApproxPoly {
        assert!(self.coeffs.len() <= d + 1, "reverse: degree exceeds bound");
        let mut c = vec![DyadicComplex::zero(); d + 1];
        for (k, v) in self.coeffs.iter().enumerate() {
            c[d - k] = v.clone();
        }
        ApproxPoly::new(c, self.err_bits).with_degree_bound(d)
    }

    /// `2^e0 · f(2^s x)`: coefficient `k` is multiplied by `2^(e0 + s·k)`.
    pub fn scale_geometric(&self, e0: i64, s: i64) -> ApproxPoly {
        let c = self.coeffs.iter().enumerate().map(|(k, v)| v.shl(e0 + s * k as i64)).collect();
        ApproxPoly::new(c, ApproxPoly::EXACT).with_degree_bound(self.degree_bound)
    }

    pub fn derivative(&self) -> ApproxPoly {
        let c: Vec<_> = self.coeffs.iter().enumerate().skip(1).map(|(k, v)| v.scale(&Dyadic::from_i64(k as i64))).collect();
        let err = if self.is_exact() {
            ApproxPoly::EXACT
        } else {
            let d = self.degree_bound.max(1) as u64;
            self.err_bound().mul(UBound::from_u64(d)).bits()
        };
        ApproxPoly::new(c, err).with_degree_bound(self.degree_bound.saturating_sub(1))
    }

    pub fn add(&self, o: &ApproxPoly) -> ApproxPoly {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &ApproxPoly) -> ApproxPoly {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &ApproxPoly, f: impl Fn(&DyadicComplex, &DyadicComplex) -> DyadicComplex) -> ApproxPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = DyadicComplex::zero();
        let c = (0..n).map(|k| f(self.coeffs.get(k).unwrap_or(&zero), o.coeffs.get(k).unwrap_or(&zero))).collect();
        ApproxPoly::new(c, combine_err(self.err_bits, o.err_bits)).with_degree_bound(self.degree_bound.max(o.degree_bound))
    }

    pub fn scale(&self, z: &DyadicComplex) -> ApproxPoly {
        let c = self.coeffs.iter().map(|v| v * z).collect();
        let err = if self.is_exact() { ApproxPoly::EXACT } else { self.err_bound().mul(UBound::from_complex(z)).bits() };
        ApproxPoly::new(c, err).with_degree_bound(self.degree_bound)
    }

    /// Exact value at `x` by Horner's rule.
    pub fn eval_exact(&self, x: &DyadicComplex) -> DyadicComplex {
        let mut acc = DyadicComplex::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }
}

/// Exact `∥f∥₁` upper bound `Σ |re| + |im|`.
pub fn one_norm_bound(f: &ApproxPoly) -> Dyadic {
    f.coeffs().iter().fold(Dyadic::zero(), |acc, c| &acc + &c.modulus_bound())
}

/// Upper bound on the 1-norm of a coefficient slice.
pub fn norm_of(coeffs: &[DyadicComplex]) -> UBound {
    coeffs.iter().fold(UBound::ZERO, |acc, c| acc.add(UBound::from_complex(c)))
}

/// Polynomial with Gaussian-integer coefficients, stored as separate real and
/// imaginary arrays.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaussianIntPoly {
    pub re: Vec<Integer>,
    pub im: Vec<Integer>,
}

impl GaussianIntPoly {
    pub fn new(re: Vec<Integer>, im: Vec<Integer>) -> Self {
        assert_eq!(re.len(), im.len());
        GaussianIntPoly { re, im }
    }

    pub fn from_real(re: Vec<Integer>) -> Self {
        let im = vec![Integer::new(); re.len()];
        GaussianIntPoly { re, im }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|v| v.cmp0() == std::cmp::Ordering::Equal)
    }

    /// Coefficients of `f·2^s`, exactly. Requires every exponent `>= -s`.
    pub fn from_scaled_exact(f: &[DyadicComplex], s: i64) -> Self {
        GaussianIntPoly { re: f.iter().map(|c| c.re.scaled_integer(s)).collect(), im: f.iter().map(|c| c.im.scaled_integer(s)).collect() }
    }

    /// Interpret coefficients as multiples of `2^-s`.
    pub fn to_dyadic(&self, s: i64) -> Vec<DyadicComplex> {
        self.re.iter().zip(&self.im).map(|(r, i)| DyadicComplex::new(Dyadic::new(r.clone(), -s), Dyadic::new(i.clone(), -s))).collect()
    }
}

/// Integer truncation: each component rounded to the nearest integer
/// (ties to even), so every coefficient moves by less than 1.
pub fn trunc_poly(f: &ApproxPoly) -> GaussianIntPoly {
    trunc_scaled(f.coeffs(), 0)
}

/// Integer truncation of `2^s·f`.
pub fn trunc_scaled(f: &[DyadicComplex], s: i64) -> GaussianIntPoly {
    GaussianIntPoly { re: f.iter().map(|c| c.re.round_scaled(s)).collect(), im: f.iter().map(|c| c.im.round_scaled(s)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert_eq!(one_norm_bound(&ApproxPoly::from_i64(&[1, 1])), Dyadic::from_i64(2));
        assert_eq!(one_norm_bound(&ApproxPoly::zero()), Dyadic::zero());
        let f = ApproxPoly::exact(vec![DyadicComplex::zero(), DyadicComplex::from_i64(3, 4)]);
        assert_eq!(one_norm_bound(&f), Dyadic::from_i64(7));
        assert!(f.norm_bound().to_dyadic() >= Dyadic::from_i64(7));
    }

    #[test]
    fn trunc_examples() {
        let f = ApproxPoly::exact(vec![DyadicComplex::from_f64(3.25, 0.5)]);
        let t = trunc_poly(&f);
        assert_eq!(t.re[0], 3);
        assert!(t.im[0] == 0 || t.im[0] == 1);
        let g = ApproxPoly::from_i64(&[5, -7, 9]);
        assert_eq!(trunc_poly(&g).re, vec![Integer::from(5), Integer::from(-7), Integer::from(9)]);
    }

    #[test]
    fn structure_ops() {
        let f = ApproxPoly::from_i64(&[1, 2, 3]);
        assert_eq!(f.reverse(2), ApproxPoly::from_i64(&[3, 2, 1]));
        assert_eq!(f.reverse(3).coeffs().len(), 4);
        assert_eq!(f.truncate(2), ApproxPoly::from_i64(&[1, 2]));
        assert_eq!(f.high_part(1), ApproxPoly::from_i64(&[2, 3]));
        assert_eq!(f.derivative(), ApproxPoly::from_i64(&[2, 6]));
        assert!(f.sub(&f).is_zero());
        assert_eq!(f.eval_exact(&DyadicComplex::from_i64(2, 0)), DyadicComplex::from_i64(17, 0));
        let s = f.scale_geometric(-1, 2);
        assert_eq!(s.coeffs()[2], DyadicComplex::from_i64(24, 0));
        assert_eq!(s.coeffs()[0], DyadicComplex::from_f64(0.5, 0.0));
    }

    #[test]
    fn round_tracks_error() {
        let f = ApproxPoly::exact(vec![DyadicComplex::from_f64(1.0 / 3.0, -1.0 / 7.0); 4]);
        let (r, e) = f.round(20);
        assert!(e.le_pow2(-18));
        assert!(r.err_bits() >= 18);
        assert!(r.frac_bits() <= 20);
    }
}
