//! Random problem instances and the quadratic Horner baseline, shared by the
//! benchmark driver and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Integer;

use crate::bound::clog2;
use crate::dyadic::{Dyadic, DyadicComplex};
use crate::oracle::horner_eval_hp;
use crate::poly::ApproxPoly;

/// Fractional bits of generated coefficients and points.
pub const INPUT_FRAC_BITS: i64 = 64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform dyadic in `(-2^mag, 2^mag)` with `frac` fractional bits.
pub fn random_dyadic(rng: &mut ChaCha8Rng, mag: i64, frac: i64) -> Dyadic {
    let bits = (mag + frac).max(1) as u32;
    let mut v = Integer::new();
    for _ in 0..bits.div_ceil(32) {
        v = (v << 32) + rng.gen::<u32>();
    }
    v.keep_bits_mut(bits);
    if rng.gen() {
        v = -v;
    }
    Dyadic::new(v, -frac)
}

/// Polynomial of degree `n − 1` with `∥F∥₁ < 2^tau`.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize, tau: i64) -> ApproxPoly {
    let mag = tau - clog2(n as u64) - 1;
    ApproxPoly::exact(
        (0..n).map(|_| DyadicComplex::new(random_dyadic(rng, mag, INPUT_FRAC_BITS), random_dyadic(rng, mag, INPUT_FRAC_BITS))).collect(),
    )
}

/// Real polynomial of degree `n − 1` with `∥F∥₁ < 2^tau`.
pub fn random_real_poly(rng: &mut ChaCha8Rng, n: usize, tau: i64) -> ApproxPoly {
    let mag = tau - clog2(n as u64);
    ApproxPoly::exact((0..n).map(|_| DyadicComplex::real(random_dyadic(rng, mag, INPUT_FRAC_BITS))).collect())
}

/// `m` points with `|re| + |im| < 2^gamma`.
pub fn random_points(rng: &mut ChaCha8Rng, m: usize, gamma: i64) -> Vec<DyadicComplex> {
    (0..m)
        .map(|_| DyadicComplex::new(random_dyadic(rng, gamma - 1, INPUT_FRAC_BITS), random_dyadic(rng, gamma - 1, INPUT_FRAC_BITS)))
        .collect()
}

/// A degree `n − 1` polynomial and `n` points.
pub fn eval_instance(seed: u64, n: usize, tau: i64, gamma: i64) -> (ApproxPoly, Vec<DyadicComplex>) {
    let mut r = rng(seed);
    let f = random_poly(&mut r, n, tau);
    let pts = random_points(&mut r, n, gamma);
    (f, pts)
}

/// Evaluation at every point by certified Horner, `Θ(n²)` operations.
pub fn horner_eval_all(f: &ApproxPoly, points: &[DyadicComplex], big_l: i64) -> Vec<DyadicComplex> {
    points.par_iter().map(|x| horner_eval_hp(f, x, big_l)).collect()
}
