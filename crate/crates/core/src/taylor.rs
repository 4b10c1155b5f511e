//! Taylor shift `F(m + x)` by evaluation on the circle `m + ω̃_k` and
//! interpolation at the nodes `ω̃_k`.
//!
//! The nodes only need to be distinct: `F(m + ·)` interpolates the exact
//! values `F(m + ω̃_k)` at the exact dyadic nodes `ω̃_k`, so their distance to
//! the true roots of unity only affects conditioning.

use rug::Integer;

use crate::bound::{clog2, UBound};
use crate::dyadic::{round_scalar, Dyadic, DyadicComplex};
use crate::error::{escalation_cap, Error, Result};
use crate::interp::{interpolate_report, InterpProblem};
use crate::mpeval::{coefficient_bound, multipoint_eval};
use crate::poly::ApproxPoly;

#[derive(Clone, Debug)]
pub struct ShiftProblem {
    pub f: ApproxPoly,
    pub m: DyadicComplex,
    pub big_l: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftReport {
    /// `V` of the interpolation values `F(m + ω̃_k)`.
    pub value_bound: i64,
    /// A priori bound `log n + τ + (n−1)(1 + log max(1,|m|)) + 2` on `V`.
    pub value_law: i64,
    pub value_bits: i64,
    pub node_bits: i64,
}

/// `⌊x·2^p⌋` for the `atan(1/x)` series, with at most `terms + 1` ulps of
/// error and the number of terms used.
fn atan_inv(x: u32, p: u32) -> (Integer, u32) {
    let x2 = Integer::from(x) * x;
    let mut power = (Integer::from(1) << p) / x;
    let mut sum = power.clone();
    let mut k = 1u32;
    loop {
        power /= &x2;
        if power == 0 {
            break;
        }
        let term = Integer::from(&power / (2 * k + 1));
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    (sum, k)
}

/// `π` within `2^-bits`, by Machin's formula `16 atan(1/5) − 4 atan(1/239)`.
pub fn pi(bits: i64) -> Dyadic {
    let guard = 2 * clog2(bits as u64 + 2) + 12;
    let p = (bits + guard) as u32;
    let (a, _) = atan_inv(5, p);
    let (b, _) = atan_inv(239, p);
    // each series is off by at most (terms + 2)·k ulps ≪ 2^guard
    Dyadic::new(a * 16 - b * 4, -(p as i64)).round(bits + 1)
}

/// `cos θ`, `sin θ` within `2^-bits` for `0 ≤ θ < 4`, by their Taylor
/// series in fixed point. `θ` is given as an exact dyadic.
fn cos_sin(theta: &Dyadic, bits: i64) -> (Dyadic, Dyadic) {
    let guard = 2 * clog2(bits as u64 + 2) + 12;
    let p = bits + guard;
    let t = theta.round_scaled(p);
    let one = Integer::from(1) << p as u32;
    let (mut c, mut s) = (one.clone(), Integer::new());
    let mut term = one;
    let mut k = 1u32;
    // term_k ≈ θ^k/k!·2^p, each truncation adds one ulp; the error of
    // term_k stays below k ulps once θ/k < 1, and the tail after the first
    // zero term is below one ulp
    loop {
        term = ((term * &t) >> p as u32) / k;
        if term == 0 {
            break;
        }
        match k % 4 {
            1 => s += &term,
            2 => c -= &term,
            3 => s -= &term,
            _ => c += &term,
        }
        k += 1;
    }
    (Dyadic::new(c, -p).round(bits + 1), Dyadic::new(s, -p).round(bits + 1))
}

/// `ω̃_k ≈ e^(2πik/n)` within `2^-ell`, `k = 0..n`. Symmetric positions are
/// derived exactly (negations, conjugates, multiplication by `i`).
pub fn unit_circle_points(n: usize, ell: i64) -> Vec<DyadicComplex> {
    assert!(n >= 1);
    let base_len = if n.is_multiple_of(4) {
        n / 8
    } else if n.is_multiple_of(2) {
        n / 4
    } else {
        n / 2
    };
    // base powers by repeated multiplication: error grows by about 2^-p per step
    let p = ell + 4 + clog2(n as u64 + 1);
    let mut base = vec![DyadicComplex::one()];
    if base_len >= 1 {
        let theta = scale_div(&pi(p + 8).shl(1), n as i64, p + 8);
        let (c, s) = cos_sin(&theta, p + 4);
        let w = DyadicComplex::new(c, s);
        let mut acc = w.clone();
        base.push(round_scalar(&w, ell + 1));
        for _ in 2..=base_len {
            acc = round_scalar(&(&acc * &w), p);
            base.push(round_scalar(&acc, ell + 1));
        }
    }
    let get = |k: usize| -> DyadicComplex { resolve(k, n, &base) };
    (0..n).map(get).collect()
}

/// `x/d` to `bits` fractional bits (`d > 0`).
fn scale_div(x: &Dyadic, d: i64, bits: i64) -> Dyadic {
    let num = x.scaled_integer(bits + 2);
    Dyadic::new(num / d, -(bits + 2))
}

fn resolve(k: usize, n: usize, base: &[DyadicComplex]) -> DyadicComplex {
    if 2 * k > n {
        return resolve(n - k, n, base).conj();
    }
    if n.is_multiple_of(2) && 4 * k > n {
        return -resolve(n / 2 - k, n, base).conj();
    }
    if n.is_multiple_of(4) && 8 * k > n {
        return resolve(n / 4 - k, n, base).conj().mul_i();
    }
    base[k].clone()
}

/// `F̃_m` with `∥F̃_m − F(m + ·)∥₁ ≤ 2^-L`.
pub fn taylor_shift(problem: &ShiftProblem) -> Result<ApproxPoly> {
    taylor_shift_report(problem).map(|(f, _)| f)
}

pub fn taylor_shift_report(problem: &ShiftProblem) -> Result<(ApproxPoly, ShiftReport)> {
    let f = &problem.f;
    let big_l = problem.big_l;
    let n = f.degree_bound().max(f.degree().unwrap_or(0)) + 1;
    let tau = coefficient_bound(f);
    let mlog = UBound::from_complex(&problem.m).log2_ceil().unwrap_or(0).max(0);
    let value_law = clog2(n as u64) + tau + (n as i64 - 1) * (1 + mlog) + 2;
    if n == 1 || problem.m.is_zero() {
        // F(0 + x) = F: only re-rounding
        let (out, _) = f.round(big_l + 1);
        let rep = ShiftReport { value_bound: tau, value_law, value_bits: 0, node_bits: 0 };
        return Ok((out.with_err_bits(crate::poly::combine_err(f.err_bits(), big_l + 1)), rep));
    }
    let node_bits = 2 * clog2(n as u64) + 16;
    let nodes = unit_circle_points(n, node_bits);
    let shifted: Vec<DyadicComplex> = nodes.iter().map(|w| w + &problem.m).collect();
    // interpolation at near-roots of unity amplifies value errors by about 2^n
    let mut value_bits = big_l + n as i64 + 2 * clog2(n as u64) + 8;
    let cap = escalation_cap();
    for _ in 0..=cap {
        let values = multipoint_eval(f, &shifted, value_bits)?;
        let problem_i = InterpProblem::new(nodes.clone(), values).with_value_err_bits(value_bits);
        match interpolate_report(&problem_i, big_l) {
            Ok((out, irep)) => {
                debug_assert!(irep.value_bound <= value_law, "value bound {} above {}", irep.value_bound, value_law);
                let rep = ShiftReport { value_bound: irep.value_bound, value_law, value_bits, node_bits };
                return Ok((out.with_degree_bound(n - 1), rep));
            }
            Err(Error::InsufficientInputPrecision { required, .. }) => value_bits = required.max(value_bits + 16),
            Err(e) => return Err(e),
        }
    }
    Err(Error::PrecisionExhausted { attempts: cap + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        // hex digits of π from the Blowfish initialisation table
        let reference: Dyadic = "0x3243f6a8885a308d313198a2e03707344a4093822299f31d0082efa98ec4e6c89452821e638d01377be5466cf34e90c6cc0ac29b7c97c50dd3f84d5b5b54709179216d5d98979fb1bp-576".parse().unwrap();
        for bits in [20, 200, 500] {
            assert!((&pi(bits) - &reference).abs() <= Dyadic::pow2(-bits));
        }
    }

    #[test]
    fn small_circles() {
        assert_eq!(unit_circle_points(1, 40), vec![DyadicComplex::one()]);
        let four = unit_circle_points(4, 40);
        assert_eq!(four, vec![DyadicComplex::one(), DyadicComplex::i(), -DyadicComplex::one(), -DyadicComplex::i()]);
        assert_eq!(unit_circle_points(2, 10), vec![DyadicComplex::one(), -DyadicComplex::one()]);
    }

    #[test]
    fn eighth_roots() {
        let ell = 100;
        let pts = unit_circle_points(8, ell);
        let half_sqrt2 = &pts[1].re;
        // 2·c² − 1 ≈ 0
        let e = &(&(half_sqrt2 * half_sqrt2) * &Dyadic::from_i64(2)) - &Dyadic::one();
        assert!(e.abs() <= Dyadic::pow2(-ell + 2));
        assert_eq!(pts[1].re, pts[1].im);
        for w in &pts {
            let m = &w.norm_sqr() - &Dyadic::one();
            assert!(m.abs() <= Dyadic::pow2(-ell + 2));
            let mut p = w.clone();
            for _ in 0..3 {
                p = &p * &p;
            }
            assert!(UBound::from_complex(&(&p - &DyadicComplex::one())).le_pow2(-ell + 5));
        }
    }
}
