//! Numerical polynomial division with certified residual and quotient and
//! remainder error bounds.
//!
//! The quotient comes from Newton inversion of the reversed divisor. Every
//! result is checked a posteriori: the residual `f − (Q̃g + R̃)` is measured,
//! the inverse series is bounded through its own defect `1 − rev(g)·Y`, and
//! the working precision doubles until the requested bounds hold.

use rug::Integer;

use crate::bound::{clog2, UBound};
use crate::dyadic::{Dyadic, DyadicComplex};
use crate::error::{escalation_cap, Error, Result};
use crate::mul::{bits_above, mul_stored};
use crate::poly::{norm_of, ApproxPoly};

/// All roots of the divisor have modulus below `2^rho`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootBound(pub i64);

impl RootBound {
    pub fn new(rho: i64) -> Self {
        RootBound(rho.max(1))
    }
}

#[derive(Clone, Debug)]
pub struct DivResult {
    pub quotient: ApproxPoly,
    pub remainder: ApproxPoly,
    /// `∥f − (Q̃g + R̃)∥₁ ≤ 2^-residual_bits` for the stored `f`, `g`.
    pub residual_bits: i64,
    /// The measured residual bound itself.
    pub residual: UBound,
}

/// Upper bound on `1/x` for `x > 0`.
pub(crate) fn recip_upper(x: &Dyadic) -> UBound {
    assert!(x.signum() > 0);
    let m = x.mantissa();
    let bits = m.significant_bits();
    let (top, sh) =
        if bits > 64 { (Integer::from(m >> (bits - 64)).to_u64_wrapping(), (bits - 64) as i64) } else { (m.to_u64_wrapping(), 0) };
    // 1/x <= 2^-(exp+sh) / top
    let q = (1u128 << 127).div_ceil(top as u128);
    let hi = (q >> 64) as u64;
    let lo = q as u64;
    UBound::from_u64(hi).shl(64).add(UBound::from_u64(lo)).shl(-127 - x.exponent() - sh)
}

/// Certified lower bound on `|z|`: `max(|re|, |im|)`.
pub(crate) fn modulus_lower(z: &DyadicComplex) -> Dyadic {
    z.re.abs().max(z.im.abs())
}

/// `1/x` within `2^-bits`, by Newton iteration with an exact residual check.
pub fn recip_real(x: &Dyadic, bits: i64) -> Dyadic {
    assert!(!x.is_zero(), "reciprocal of zero");
    let k = x.log2_floor().unwrap();
    // xs in [1, 2)
    let xs = x.abs().shl(-k);
    let target = bits + 2 - k.min(0) + 2;
    let target_s = target.max(8);
    let mut y = Dyadic::from_f64(1.0 / xs.to_f64()).round(50);
    let mut p = 50;
    let two = Dyadic::from_i64(2);
    loop {
        // |1/xs − y| <= |1 − xs·y| since xs >= 1
        let r = &Dyadic::one() - &(&xs * &y);
        if UBound::from_dyadic(&r).le_pow2(-(target_s + k.max(0))) {
            break;
        }
        p = (2 * p).min(target_s + k.max(0) + 8);
        y = (&y * &(&two - &(&xs * &y))).round(p);
    }
    let y = y.shl(-k);
    let y = if x.is_negative() { -y } else { y };
    y.round(bits + 1)
}

/// `1/z` within `2^-bits` (modulus).
pub fn recip_complex(z: &DyadicComplex, bits: i64) -> DyadicComplex {
    if z.is_real() {
        return DyadicComplex::real(recip_real(&z.re, bits + 1));
    }
    let n = z.norm_sqr();
    let zb = UBound::from_complex(z).log2_ceil().unwrap_or(0).max(0);
    let r = recip_real(&n, bits + zb + 3);
    let w = z.conj().scale(&r);
    crate::dyadic::round_scalar(&w, bits + 2)
}

/// Power-series inverse of `a` modulo `t^k`, computed at `w` fractional bits.
/// Requires `a(0) != 0`. The result is returned as exact stored values; its
/// quality is certified by the caller.
pub fn inverse_series(a: &ApproxPoly, k: usize, w: i64) -> ApproxPoly {
    let a0 = a.coeff(0);
    assert!(!a0.is_zero(), "inverse series needs a nonzero constant term");
    let mut y = if a0 == DyadicComplex::one() { ApproxPoly::one() } else { ApproxPoly::exact(vec![recip_complex(&a0, w)]) };
    let one = ApproxPoly::one();
    let mut len = 1;
    while len < k {
        len = (2 * len).min(k);
        let t = mul_stored(&a.truncate(len), &y, w + 2).truncate(len);
        let e = one.sub(&t).with_err_bits(ApproxPoly::EXACT);
        let u = mul_stored(&y, &e, w + 2).truncate(len);
        y = y.add(&u).with_err_bits(ApproxPoly::EXACT).round(w).0;
    }
    y.with_err_bits(ApproxPoly::EXACT)
}

/// A priori bound on `∥1/rev(g) mod t^k∥₁` for a divisor of degree `d` with
/// leading coefficient at least `lead_lower` in modulus and roots below
/// `2^root_exp`.
fn prior_inverse_bound(d: usize, k: usize, root_exp: i64, lead_recip: UBound) -> UBound {
    if k == 0 {
        return UBound::ZERO;
    }
    let body = if root_exp < 0 {
        // Σ C(d+j-1, j) r^j <= (1 − r)^-d <= (1 + 2r)^d for r <= 1/2
        UBound::from_u64(1).add(UBound::pow2(root_exp + 1)).pow(d as u64)
    } else {
        let c = Integer::from(Integer::binomial_u((d + k - 1) as u32, (k - 1) as u32));
        UBound::from_integer(&c).mul(UBound::pow2(root_exp).pow(k as u64 - 1))
    };
    body.mul(lead_recip)
}

fn log2_est(b: UBound) -> i64 {
    b.log2_ceil().unwrap_or(0).max(0)
}

/// Stored outcome of one division. `q_err`, `r_err` are only meaningful
/// when the division was run with `certify`.
pub(crate) struct RawDiv {
    pub q: ApproxPoly,
    pub r: ApproxPoly,
    pub residual: UBound,
    pub q_err: UBound,
    pub r_err: UBound,
}

/// Division of the stored `f` by the stored `g` with `∥f − (Q̃g + R̃)∥₁ ≤ 2^-ell`.
/// With `certify`, also bounds the distance of `Q̃`, `R̃` to the exact
/// quotient and remainder of the targets of `f` and `g` by `2^-ell`. The
/// divisor's roots are assumed below `2^root_exp`.
pub(crate) fn divide(f: &ApproxPoly, g: &ApproxPoly, root_exp: i64, ell: i64, certify: bool) -> Result<RawDiv> {
    let d = g.degree().ok_or(Error::ZeroDivisor)?;
    let m = match f.degree() {
        Some(m) if m >= d => m,
        _ => return Ok(RawDiv { q: ApproxPoly::zero(), r: f.clone(), residual: UBound::ZERO, q_err: UBound::ZERO, r_err: f.err_bound() }),
    };
    let k = m - d + 1;
    let lead = g.leading().unwrap().clone();
    let lead_low = modulus_lower(&lead);
    let g_exact = g.clone().with_err_bits(ApproxPoly::EXACT);
    let f_exact = f.clone().with_err_bits(ApproxPoly::EXACT);
    let a = g_exact.reverse(d).truncate(k);
    let f_rev = f_exact.reverse(m).truncate(k);
    let gnorm = g.norm_bound();
    let fnorm = f.norm_bound();

    let h_est = prior_inverse_bound(d, k, root_exp, recip_upper(&lead_low));
    let r_bits = if certify {
        let amp = UBound::from_u64(1).add(h_est.mul(UBound::from_u64(1).add(gnorm)));
        ell + 2 + log2_est(amp)
    } else {
        ell + 2
    };
    let mut w = r_bits + 2 * clog2(k as u64 + 1) + log2_est(h_est) + log2_est(fnorm) + log2_est(gnorm) + 8;

    let cap = escalation_cap();
    for _attempt in 0..=cap {
        let y = inverse_series(&a, k, w);
        let q_rev = mul_stored(&f_rev, &y, w).truncate(k);
        let q = q_rev.with_err_bits(ApproxPoly::EXACT).reverse(k - 1).round(w).0;
        let q = q.with_err_bits(ApproxPoly::EXACT);

        // f − Q̃g, exact up to the product error
        let p_bits = r_bits + 2;
        let prod = mul_stored(&q, &g_exact, p_bits);
        let diff = f_exact.sub(&prod).with_err_bits(ApproxPoly::EXACT);
        let e_hi = norm_of(&diff.coeffs()[d.min(diff.len())..]).add(UBound::pow2(-p_bits));
        let (rem, round_err) = diff.truncate(d).round(r_bits + 2 + clog2(d as u64 + 1));
        let residual = e_hi.add(round_err);
        if !residual.le_pow2(-ell) {
            w *= 2;
            continue;
        }
        let rem = rem.with_err_bits(ApproxPoly::EXACT);
        if !certify {
            return Ok(RawDiv { q, r: rem, residual, q_err: UBound::ZERO, r_err: UBound::ZERO });
        }

        // a posteriori bound on the inverse series through its defect
        let t = mul_stored(&a, &y, 40).truncate(k);
        let defect = norm_of(ApproxPoly::one().sub(&t).coeffs()).add(UBound::pow2(-40));
        if defect > UBound::pow2(-1) {
            w *= 2;
            continue;
        }
        let h_post = y.norm_bound().mul(UBound::from_u64(1).add(defect.shl(1)));
        let mut q_err = e_hi.mul(h_post);
        let mut r_err = residual.add(q_err.mul(gnorm));
        if !q_err.le_pow2(-ell) || !r_err.le_pow2(-ell) {
            w *= 2;
            continue;
        }

        if !f.is_exact() || !g.is_exact() {
            let (df, dg) = (f.err_bound(), g.err_bound());
            let lead_rest = lead_low.clone() - dg.to_dyadic();
            if lead_rest.signum() <= 0 {
                return Err(Error::DegenerateDivisor { bound: g.err_bits() });
            }
            let kk = f.degree_bound().max(m) - d + 1;
            let h_star = prior_inverse_bound(d, kk, root_exp, recip_upper(&lead_rest));
            let delta = df.add(q.norm_bound().add(q_err).mul(dg));
            q_err = q_err.add(delta.mul(h_star));
            r_err = r_err.add(delta.mul(UBound::from_u64(1).add(h_star.mul(gnorm.add(dg)))));
        }
        return Ok(RawDiv { q, r: rem, residual, q_err, r_err });
    }
    Err(Error::PrecisionExhausted { attempts: cap + 1 })
}

fn finish(raw: RawDiv, k: usize, d: usize, ell: i64) -> DivResult {
    DivResult {
        quotient: raw.q.with_err_bits(raw.q_err.bits()).with_degree_bound(k),
        remainder: raw.r.with_err_bits(raw.r_err.bits()).with_degree_bound(d.saturating_sub(1)),
        residual_bits: ell,
        residual: raw.residual,
    }
}

/// Division by a normalized divisor (`∥f∥₁ ≤ 1`, `1 ≤ ∥g∥₁ ≤ 2`, roots of `g`
/// below `2^rho`).
pub fn div_normalized(f: &ApproxPoly, g: &ApproxPoly, rho: RootBound, ell: i64) -> Result<DivResult> {
    let n = g.degree().ok_or(Error::ZeroDivisor)?;
    let bound = 4 * n as i64 * rho.0;
    if g.leading().unwrap().norm_sqr() < Dyadic::pow2(-2 * bound) {
        return Err(Error::DegenerateDivisor { bound });
    }
    let raw = divide(f, g, rho.0, ell, true)?;
    let k = f.degree_bound().max(f.degree().unwrap_or(0)).saturating_sub(n);
    Ok(finish(raw, k, n, ell))
}

/// Division by a monic divisor with roots below `2^rho`, through the
/// geometric scaling `f*(x) = 2^(-b-sM) f(2^s x)`, `g*(x) = 2^(-sn) g(2^s x)`
/// with `s = rho + ⌈log₂ 2n⌉`, which moves the divisor's roots inside the
/// disc of radius `1/2n`.
pub fn div_monic(f: &ApproxPoly, g: &ApproxPoly, rho: RootBound, ell: i64) -> Result<DivResult> {
    let n = g.degree().ok_or(Error::ZeroDivisor)?;
    let raw = monic_raw(f, g, rho, ell, true)?;
    let k = f.degree_bound().max(f.degree().unwrap_or(0)).saturating_sub(n);
    Ok(finish(raw, k, n, ell))
}

/// [`div_monic`] without the quotient and remainder certificates: only the
/// residual bound `∥f − (Q̃g + R̃)∥₁ ≤ 2^-ell` is guaranteed.
pub(crate) fn monic_raw(f: &ApproxPoly, g: &ApproxPoly, rho: RootBound, ell: i64, certify: bool) -> Result<RawDiv> {
    let n = g.degree().ok_or(Error::ZeroDivisor)?;
    if !g.is_monic() {
        return Err(Error::NotMonic);
    }
    if n == 0 {
        return Ok(RawDiv { q: f.clone(), r: ApproxPoly::zero(), residual: UBound::ZERO, q_err: f.err_bound(), r_err: UBound::ZERO });
    }
    if f.degree().is_none_or(|m| m < n) {
        return divide(f, g, rho.0, ell, certify);
    }
    let b = bits_above(f.norm_bound());
    let s = rho.0 + clog2(2 * n as u64);
    let big_m = f.degree_bound().max(f.degree().unwrap_or(0)) as i64;
    let shift = b + s * big_m;
    let f_star = f.scale_geometric(-shift, s).with_err_bits(f.err_bits().saturating_add(b)).with_degree_bound(f.degree_bound());
    // the exact divisor is monic as well, so its error sits in degrees < n
    let g_star = g.scale_geometric(-s * n as i64, s).with_err_bits(g.err_bits().saturating_add(s));
    let raw = divide(&f_star, &g_star, rho.0 - s, ell + shift, certify)?;

    let q_shift = shift - s * n as i64;
    Ok(RawDiv {
        q: raw.q.scale_geometric(q_shift, -s),
        r: raw.r.scale_geometric(shift, -s),
        residual: raw.residual.shl(shift),
        q_err: raw.q_err.shl(q_shift),
        r_err: raw.r_err.shl(shift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mul::exact_mul;

    fn residual_exact(f: &ApproxPoly, g: &ApproxPoly, r: &DivResult) -> UBound {
        let qg = exact_mul(&r.quotient, g);
        norm_of(f.sub(&qg).sub(&r.remainder).coeffs())
    }

    #[test]
    fn recip_scalars() {
        for v in [3.0, -0.1, 1e-30, 7e20, 1.0] {
            let x = Dyadic::from_f64(v);
            let y = recip_real(&x, 100);
            let err = &(&x * &y) - &Dyadic::one();
            // |y − 1/x| = |xy − 1| / |x|
            let bound = UBound::from_dyadic(&err).mul(recip_upper(&x.abs()));
            assert!(bound.le_pow2(-100), "{v}");
        }
        let z = DyadicComplex::from_f64(0.3, -2.5);
        let y = recip_complex(&z, 80);
        let err = &(&z * &y) - &DyadicComplex::one();
        assert!(UBound::from_complex(&err).le_pow2(-78));
    }

    #[test]
    fn recip_upper_is_upper() {
        for v in [3.0, 0.1, 1e-30, 7e20] {
            let x = Dyadic::from_f64(v);
            let u = recip_upper(&x).to_dyadic();
            assert!(&u * &x >= Dyadic::one());
            assert!((&u * &x).to_f64() < 1.0 + 1e-15);
        }
    }

    #[test]
    fn inverse_series_geometric() {
        // 1/(1 − t/2) = Σ 2^-j t^j
        let a = ApproxPoly::exact(vec![DyadicComplex::one(), DyadicComplex::from_f64(-0.5, 0.0)]);
        let y = inverse_series(&a, 8, 60);
        for j in 0..8 {
            assert_eq!(y.coeff(j), DyadicComplex::from_f64(0.5f64.powi(j as i32), 0.0));
        }
    }

    #[test]
    fn monic_examples() {
        let f = ApproxPoly::from_i64(&[1, 0, 1]);
        let g = ApproxPoly::from_i64(&[0, 1]);
        let r = div_monic(&f, &g, RootBound(1), 30).unwrap();
        assert!(norm_of(r.quotient.sub(&ApproxPoly::from_i64(&[0, 1])).coeffs()).le_pow2(-30));
        assert!(norm_of(r.remainder.sub(&ApproxPoly::one()).coeffs()).le_pow2(-30));
        assert!(residual_exact(&f, &g, &r).le_pow2(-30));

        let small = ApproxPoly::from_i64(&[5, 7]);
        let g2 = ApproxPoly::from_i64(&[1, 2, 1]);
        let r = div_monic(&small, &g2, RootBound(1), 30).unwrap();
        assert!(r.quotient.is_zero());
        assert_eq!(r.remainder.coeffs(), small.coeffs());

        let bad = ApproxPoly::from_i64(&[1, 2]);
        assert_eq!(div_monic(&f, &bad, RootBound(1), 10).unwrap_err(), Error::NotMonic);
    }

    #[test]
    fn normalized_examples() {
        let f = ApproxPoly::exact(vec![DyadicComplex::zero(), DyadicComplex::zero(), DyadicComplex::one()]);
        let g = ApproxPoly::from_i64(&[0, 1]);
        let r = div_normalized(&f, &g, RootBound(1), 20).unwrap();
        assert!(norm_of(r.quotient.sub(&g).coeffs()).le_pow2(-20));
        assert!(r.remainder.norm_bound().le_pow2(-20));
        let h = ApproxPoly::exact(vec![DyadicComplex::from_f64(0.25, 0.0), DyadicComplex::from_f64(0.75, 0.0)]);
        let r = div_normalized(&h, &h, RootBound(1), 40).unwrap();
        assert!(norm_of(r.quotient.sub(&ApproxPoly::one()).coeffs()).le_pow2(-40));
        assert!(r.remainder.norm_bound().le_pow2(-40));
        let tiny = ApproxPoly::exact(vec![DyadicComplex::one(), DyadicComplex::real(Dyadic::pow2(-30))]);
        assert!(matches!(div_normalized(&f, &tiny, RootBound(1), 20), Err(Error::DegenerateDivisor { .. })));
    }
}
