mod common;

use common::*;
use polyeval::oracle::{exact_taylor_shift, horner_eval_hp, ExactRationalPoly, QComplex};
use polyeval::taylor::{taylor_shift, taylor_shift_report, ShiftProblem};
use polyeval::{ApproxPoly, DyadicComplex};
use proptest::prelude::*;

fn shift(f: &ApproxPoly, m: &DyadicComplex, l: i64) -> ApproxPoly {
    taylor_shift(&ShiftProblem { f: f.clone(), m: m.clone(), big_l: l }).unwrap()
}

fn oracle(f: &ApproxPoly, m: &DyadicComplex) -> ExactRationalPoly {
    exact_taylor_shift(&ExactRationalPoly::from_approx(f), &QComplex::from_dyadic(m))
}

#[test]
fn identity_shift() {
    let mut rng = rng(41);
    let f = rand_poly(&mut rng, 11, 6, 30);
    let g = shift(&f, &DyadicComplex::zero(), 128);
    assert!(ExactRationalPoly::from_approx(&f).within(&g, 128));
    assert_eq!(g.degree_bound(), 11);
}

#[test]
fn square_shifted_by_one() {
    let f = ApproxPoly::from_i64(&[0, 0, 1]);
    let g = shift(&f, &DyadicComplex::one(), 100);
    assert!(ExactRationalPoly::from_i64(&[1, 2, 1]).within(&g, 100));
}

#[test]
fn constant_and_linear() {
    let c = ApproxPoly::exact(vec![DyadicComplex::from_f64(1.5, -0.25)]);
    let g = shift(&c, &DyadicComplex::from_i64(7, -3), 60);
    assert_eq!(g.coeffs(), c.coeffs());
    let f = ApproxPoly::from_i64(&[2, 3]);
    let g = shift(&f, &DyadicComplex::from_i64(-1, 1), 80);
    assert!(oracle(&f, &DyadicComplex::from_i64(-1, 1)).within(&g, 80));
}

#[test]
fn random_deg31_at_3_plus_2i() {
    let mut rng = rng(42);
    let f = normalize_to(&rand_poly(&mut rng, 31, 16, 48), 16);
    let m = DyadicComplex::from_i64(3, 2);
    let (g, rep) = taylor_shift_report(&ShiftProblem { f: f.clone(), m: m.clone(), big_l: 256 }).unwrap();
    let want = oracle(&f, &m);
    for k in 0..32 {
        assert!(want.coeff(k).within(&g.coeff(k), 256), "coefficient {k}");
    }
    assert!(want.within(&g, 256));
    assert!(rep.value_bound <= rep.value_law);
}

#[test]
fn evaluation_consistency() {
    let mut rng = rng(43);
    let f = rand_poly(&mut rng, 20, 4, 30);
    let m = DyadicComplex::from_f64(-1.5, 0.75);
    let l = 120;
    let g = shift(&f, &m, l);
    for _ in 0..5 {
        let t = rand_point(&mut rng, 0, 30);
        let a = horner_eval_hp(&g, &t, l + 10);
        let b = horner_eval_hp(&f, &(&m + &t), l + 10);
        // |t| ≤ 1, so the shifted polynomial's error moves values by at most 2^-L
        assert!(polyeval::UBound::from_complex(&(&a - &b)).le_pow2(-l + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn involution(seed in any::<u64>(), n in 1usize..16, mre in -8i64..8, mim in -8i64..8) {
        let mut rng = rng(seed);
        let f = rand_poly(&mut rng, n - 1, 4, 24);
        let m = DyadicComplex::from_i64(mre, mim);
        let l = 96;
        // inner margin covers the growth of F(m + ·) and of its inverse shift
        let margin = 24 + (n as i64) * 7;
        let g = shift(&f, &m, l + margin);
        let back = shift(&g, &-m, l);
        prop_assert!(ExactRationalPoly::from_approx(&f).within(&back, l - 2));
    }
}
