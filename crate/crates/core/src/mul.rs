//! Certified approximate polynomial multiplication.
//!
//! Operands are scaled by `2^s`, truncated to Gaussian integers, multiplied
//! exactly through Kronecker substitution, and scaled back.

use rug::integer::Order;
use rug::Integer;

use crate::bound::{clog2, UBound};
use crate::error::{Error, Result};
use crate::poly::{trunc_scaled, ApproxPoly, GaussianIntPoly};

const LIMB: usize = 64;

/// Pack signed integers into `Σ c_k·2^(k·W)` with `W = 64·limbs` bits per slot.
pub fn kronecker_pack(coeffs: &[Integer], limbs: usize) -> Integer {
    let total = coeffs.len() * limbs;
    let mut pos = vec![0u64; total];
    let mut neg: Option<Vec<u64>> = None;
    for (k, c) in coeffs.iter().enumerate() {
        if c.cmp0() == std::cmp::Ordering::Equal {
            continue;
        }
        let slot = k * limbs..(k + 1) * limbs;
        if *c > 0 {
            c.write_digits(&mut pos[slot], Order::Lsf);
        } else {
            let buf = neg.get_or_insert_with(|| vec![0u64; total]);
            c.write_digits(&mut buf[slot], Order::Lsf);
        }
    }
    let p = Integer::from_digits(&pos, Order::Lsf);
    match neg {
        Some(buf) => p - Integer::from_digits(&buf, Order::Lsf),
        None => p,
    }
}

/// Inverse of [`kronecker_pack`]: split into `count` balanced slot digits.
/// Every coefficient must satisfy `|c| < 2^(W-1)`.
pub fn kronecker_unpack(z: &Integer, limbs: usize, count: usize) -> Vec<Integer> {
    let negative = *z < 0;
    let mut digits = z.to_digits::<u64>(Order::Lsf);
    digits.resize((count * limbs).max(digits.len()), 0);
    let w = (limbs * LIMB) as u32;
    let full = Integer::from(1) << w;
    let mut carry = false;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut d = Integer::from_digits(&digits[k * limbs..(k + 1) * limbs], Order::Lsf);
        if carry {
            d += 1;
        }
        carry = d.significant_bits() >= w;
        if carry {
            d -= &full;
        }
        if negative {
            d = -d;
        }
        out.push(d);
    }
    out
}

fn max_bits(v: &[Integer]) -> u32 {
    v.iter().map(|c| c.significant_bits()).max().unwrap_or(0)
}

/// Exact product of two integer polynomials.
pub fn int_poly_mul(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    if a.len() == 1 || b.len() == 1 {
        let (s, v) = if a.len() == 1 { (&a[0], b) } else { (&b[0], a) };
        return v.iter().map(|c| Integer::from(c * s)).collect();
    }
    let (ba, bb) = (max_bits(a), max_bits(b));
    if ba == 0 || bb == 0 {
        return vec![Integer::new(); len];
    }
    let bits = ba as usize + bb as usize + clog2(a.len().min(b.len()) as u64) as usize + 2;
    let limbs = bits.div_ceil(LIMB);
    let x = kronecker_pack(a, limbs);
    let z = if std::ptr::eq(a, b) { x.square() } else { x * kronecker_pack(b, limbs) };
    kronecker_unpack(&z, limbs, len)
}

fn add_vec(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    a.iter().zip(b).map(|(x, y)| Integer::from(x + y)).collect()
}

/// Exact product of Gaussian-integer polynomials, with three real products
/// in the general complex case.
pub fn exact_int_poly_mul(f: &GaussianIntPoly, g: &GaussianIntPoly) -> GaussianIntPoly {
    if f.is_empty() || g.is_empty() {
        return GaussianIntPoly::default();
    }
    match (f.is_real(), g.is_real()) {
        (true, true) => GaussianIntPoly::from_real(int_poly_mul(&f.re, &g.re)),
        (true, false) => GaussianIntPoly::new(int_poly_mul(&f.re, &g.re), int_poly_mul(&f.re, &g.im)),
        (false, true) => GaussianIntPoly::new(int_poly_mul(&f.re, &g.re), int_poly_mul(&f.im, &g.re)),
        (false, false) => {
            let p1 = int_poly_mul(&f.re, &g.re);
            let p2 = int_poly_mul(&f.im, &g.im);
            let p3 = int_poly_mul(&add_vec(&f.re, &f.im), &add_vec(&g.re, &g.im));
            let re = p1.iter().zip(&p2).map(|(x, y)| Integer::from(x - y)).collect();
            let im = p3.into_iter().zip(p1.iter().zip(&p2)).map(|(z, (x, y))| z - x - y).collect();
            GaussianIntPoly::new(re, im)
        }
    }
}

/// Parameters of one certified multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MulParams {
    /// Target output precision.
    pub ell: i64,
    /// Input coefficient moduli are below `2^b`.
    pub b: i64,
    /// Degree bound of both operands.
    pub n: usize,
    /// Scaling exponent `ℓ + b + 2⌈log₂(n+1)⌉ + 2`.
    pub s: i64,
}

/// Smallest `b >= 1` with `norm < 2^b`.
pub fn bits_above(norm: UBound) -> i64 {
    match norm.log2_ceil() {
        None => 1,
        Some(k) => {
            let k = if norm == UBound::pow2(k) { k + 1 } else { k };
            k.max(1)
        }
    }
}

impl MulParams {
    pub fn new(ell: i64, b: i64, n: usize) -> Self {
        MulParams { ell, b, n, s: ell + b + 2 * clog2(n as u64 + 1) + 2 }
    }

    pub fn for_operands(f: &ApproxPoly, g: &ApproxPoly, ell: i64) -> Self {
        let b = bits_above(f.norm_bound().max(g.norm_bound()));
        let n = f.degree_bound().max(g.degree_bound());
        MulParams::new(ell, b, n)
    }

    /// Input precision needed for the certificate: `s + 1`.
    pub fn required_input_bits(&self) -> i64 {
        self.s + 1
    }
}

/// `ℓ`-bit 1-norm approximation of the product of the implicit targets of
/// `f` and `g`.
pub fn approx_mul(f: &ApproxPoly, g: &ApproxPoly, ell: i64) -> Result<ApproxPoly> {
    let p = MulParams::for_operands(f, g, ell);
    let need = p.required_input_bits();
    for op in [f, g] {
        if op.err_bits() < need {
            return Err(Error::InsufficientInputPrecision { required: need, available: op.err_bits() });
        }
    }
    Ok(mul_stored_with(f, g, &p))
}

/// `ℓ`-bit approximation of the product of the stored coefficients of `f`
/// and `g`, ignoring their error exponents.
pub fn mul_stored(f: &ApproxPoly, g: &ApproxPoly, ell: i64) -> ApproxPoly {
    mul_stored_with(f, g, &MulParams::for_operands(f, g, ell))
}

fn mul_stored_with(f: &ApproxPoly, g: &ApproxPoly, p: &MulParams) -> ApproxPoly {
    let ell = p.ell;
    let deg = f.degree_bound() + g.degree_bound();
    if f.is_zero() || g.is_zero() {
        return ApproxPoly::new(Vec::new(), ell).with_degree_bound(deg);
    }
    let fi = trunc_scaled(f.coeffs(), p.s);
    let gi = trunc_scaled(g.coeffs(), p.s);
    let h = exact_int_poly_mul(&fi, &gi);
    // Truncation and input errors use at most 0.61·2^-ℓ of the budget; the
    // final rounding stays below 2^-(ℓ+2).
    let out_bits = ell + 2 + clog2(h.len() as u64);
    let coeffs = h.to_dyadic(2 * p.s);
    let prod = ApproxPoly::exact(coeffs);
    let (rounded, _) = prod.round(out_bits);
    rounded.with_err_bits(ell).with_degree_bound(deg)
}

/// Exact product of two polynomials (their error exponents combine to the
/// weaker one, relative to the exact product of the stored values).
pub fn exact_mul(f: &ApproxPoly, g: &ApproxPoly) -> ApproxPoly {
    if f.is_zero() || g.is_zero() {
        return ApproxPoly::zero();
    }
    let (sf, sg) = (f.frac_bits(), g.frac_bits());
    let fi = GaussianIntPoly::from_scaled_exact(f.coeffs(), sf);
    let gi = GaussianIntPoly::from_scaled_exact(g.coeffs(), sg);
    ApproxPoly::exact(exact_int_poly_mul(&fi, &gi).to_dyadic(sf + sg))
}
