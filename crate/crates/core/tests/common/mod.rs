#![allow(dead_code)]

use polyeval::{ApproxPoly, Dyadic, DyadicComplex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::Integer;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform dyadic in `(-2^mag, 2^mag)` with `frac` fractional bits.
pub fn rand_dyadic(rng: &mut ChaCha8Rng, mag: i64, frac: i64) -> Dyadic {
    let bits = (mag + frac) as u32;
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

pub fn rand_complex(rng: &mut ChaCha8Rng, mag: i64, frac: i64) -> DyadicComplex {
    DyadicComplex::new(rand_dyadic(rng, mag, frac), rand_dyadic(rng, mag, frac))
}

/// Point in the closed disc of radius `2^mag` (real and imaginary parts in
/// `(-2^(mag-1), 2^(mag-1))`, so `|re| + |im| < 2^mag`).
pub fn rand_point(rng: &mut ChaCha8Rng, mag: i64, frac: i64) -> DyadicComplex {
    rand_complex(rng, mag - 1, frac + 1)
}

pub fn rand_points(rng: &mut ChaCha8Rng, n: usize, mag: i64, frac: i64) -> Vec<DyadicComplex> {
    (0..n).map(|_| rand_point(rng, mag, frac)).collect()
}

/// Random polynomial of degree `deg` whose coefficients have `|re|,|im| < 2^mag`.
pub fn rand_poly(rng: &mut ChaCha8Rng, deg: usize, mag: i64, frac: i64) -> ApproxPoly {
    ApproxPoly::exact((0..=deg).map(|_| rand_complex(rng, mag, frac)).collect())
}

pub fn rand_real_poly(rng: &mut ChaCha8Rng, deg: usize, mag: i64, frac: i64) -> ApproxPoly {
    ApproxPoly::exact((0..=deg).map(|_| DyadicComplex::real(rand_dyadic(rng, mag, frac))).collect())
}

/// Scale `f` by a power of two so that `∥f∥₁ ≤ 2^mag`.
pub fn normalize_to(f: &ApproxPoly, mag: i64) -> ApproxPoly {
    let k = f.norm_bound().log2_ceil().unwrap_or(0);
    ApproxPoly::exact(f.coeffs().iter().map(|c| c.shl(mag - k)).collect())
}
