//! Quadratic interval refinement of real roots, with the polynomial
//! evaluations of every active interval batched into one multipoint
//! evaluation per round.
//!
//! Each interval carries `N = 2^n_log`. A step places the secant point in
//! one of the `N` equal subintervals and checks the signs at its ends. On a
//! sign change the interval shrinks by `N` and `N` squares; otherwise the
//! midpoint sign gives a bisection and `N` drops to `max(4, ⌈√N⌉)`.
//!
//! Every decision comes from a certified sign: a value within `2^-p` whose
//! modulus exceeds twice that. Signs that cannot be decided are retried at a
//! perturbed point and doubled precision in the next round of the same
//! sweep.

use rug::{Integer, Rational};

use crate::dyadic::{Dyadic, DyadicComplex};
use crate::error::{escalation_cap, Error, Result};
use crate::mpeval::{coefficient_bound, multipoint_eval};
use crate::oracle::dyadic_to_rational;
use crate::poly::ApproxPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolatingInterval {
    pub a: Dyadic,
    pub b: Dyadic,
    /// Certified signs of `F(a)`, `F(b)`; zero until checked.
    pub sign_a: i32,
    pub sign_b: i32,
    /// `log₂ N`.
    pub n_log: u32,
    /// Zero-width interval at an exact root.
    pub exact: bool,
    fa: Option<Dyadic>,
    fb: Option<Dyadic>,
}

impl IsolatingInterval {
    pub fn new(a: Dyadic, b: Dyadic) -> Self {
        assert!(a < b, "interval must have a < b");
        IsolatingInterval { a, b, sign_a: 0, sign_b: 0, n_log: 2, exact: false, fa: None, fb: None }
    }

    fn exact_root(x: Dyadic) -> Self {
        IsolatingInterval { a: x.clone(), b: x, sign_a: 0, sign_b: 0, n_log: 2, exact: true, fa: None, fb: None }
    }

    pub fn width(&self) -> Dyadic {
        &self.b - &self.a
    }

    pub fn n(&self) -> Option<u64> {
        1u64.checked_shl(self.n_log)
    }

    /// `⌈log₂ width⌉`, `None` for an exact root.
    pub fn width_log(&self) -> Option<i64> {
        let w = self.width();
        let f = w.log2_floor()?;
        Some(if w == Dyadic::pow2(f) { f } else { f + 1 })
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.a <= x && x <= &self.b
    }

    fn done(&self, big_l: i64) -> bool {
        self.exact || self.width_log().is_none_or(|w| w <= -big_l)
    }
}

#[derive(Clone, Debug)]
pub struct RefineJob {
    /// Real coefficients, square-free (not checked).
    pub f: ApproxPoly,
    pub intervals: Vec<IsolatingInterval>,
    pub big_l: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineReport {
    pub sweeps: u32,
    /// Batched evaluation calls, including the initial endpoint check.
    pub eval_calls: u32,
    /// QIR steps taken per interval, and how many of them succeeded.
    pub steps: Vec<u32>,
    pub successes: Vec<u32>,
}

/// Certified sign of `F(x)`: `±1` once an evaluation at some precision in
/// `start_bits..=cap_bits` (doubling) is separated from zero, else `0`.
pub fn certified_sign(f: &ApproxPoly, x: &Dyadic, start_bits: i64, cap_bits: i64) -> i32 {
    let pt = [DyadicComplex::real(x.clone())];
    let mut p = start_bits.max(1);
    loop {
        let Ok(y) = multipoint_eval(f, &pt, p) else {
            return 0;
        };
        let s = decide(&y[0], p);
        if s != 0 || p >= cap_bits {
            return s;
        }
        p = (2 * p).min(cap_bits);
    }
}

fn decide(y: &DyadicComplex, p: i64) -> i32 {
    if y.re.abs() > Dyadic::pow2(1 - p) {
        y.re.signum()
    } else {
        0
    }
}

/// Points whose sign one interval needs in a sweep: the grid points
/// `x_(m−1), x_m, x_(m+1)` around the secant point, and the midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Grid(i8),
    Mid,
    Left,
    Right,
}

struct Request {
    interval: usize,
    slot: Slot,
    base: Dyadic,
    x: Dyadic,
    bits: i64,
    cap: i64,
    lo: Dyadic,
    hi: Dyadic,
    step: Dyadic,
    sign: i32,
    value: Option<Dyadic>,
}

struct Planner<'a> {
    f: &'a ApproxPoly,
    big_l: i64,
    tau: i64,
    deg: i64,
    calls: u32,
}

impl Planner<'_> {
    fn start_bits(&self, iv: &IsolatingInterval) -> i64 {
        -iv.width_log().unwrap_or(0) + 3 * iv.n_log as i64 + 32
    }

    fn cap_bits(&self, start: i64) -> i64 {
        (self.big_l + 8 * self.deg + self.tau).max(start) + start
    }

    /// Decides every request, perturbing undecided points inside
    /// `(lo, hi)` and doubling their precision each round.
    fn resolve(&mut self, reqs: &mut [Request]) -> Result<()> {
        let rounds = escalation_cap() + 2;
        for round in 0..=rounds {
            let open: Vec<usize> = (0..reqs.len()).filter(|&i| reqs[i].sign == 0).collect();
            if open.is_empty() {
                return Ok(());
            }
            let bits = open.iter().map(|&i| reqs[i].bits).max().unwrap();
            let pts: Vec<DyadicComplex> = open.iter().map(|&i| DyadicComplex::real(reqs[i].x.clone())).collect();
            self.calls += 1;
            let ys = multipoint_eval(self.f, &pts, bits)?;
            for (&i, y) in open.iter().zip(&ys) {
                let r = &mut reqs[i];
                r.sign = decide(y, r.bits);
                if r.sign != 0 {
                    r.value = Some(y.re.round(r.bits - 24));
                    continue;
                }
                if round == 0 && self.f.is_exact() && self.f.eval_exact(&DyadicComplex::real(r.x.clone())).is_zero() {
                    // exact root: sign 0 is final
                    r.value = Some(Dyadic::zero());
                    continue;
                }
                r.bits = (2 * r.bits).min(r.cap);
                r.x = perturb(&r.base, &r.step, round + 1, &r.lo, &r.hi);
            }
            if open.iter().all(|&i| reqs[i].sign != 0 || reqs[i].value.is_some()) {
                return Ok(());
            }
        }
        Ok(())
    }
}

/// `base + j·step` for the `k`-th offset `j` in `0, 1, −1, 2, −2, …`, kept
/// strictly inside `(lo, hi)`.
fn perturb(base: &Dyadic, step: &Dyadic, k: u32, lo: &Dyadic, hi: &Dyadic) -> Dyadic {
    let j = (k as i64 + 1) / 2 * if k % 2 == 1 { 1 } else { -1 };
    let x = base + &(step * &Dyadic::from_i64(j));
    if &x <= lo || &x >= hi {
        base.clone()
    } else {
        x
    }
}

fn grid(iv: &IsolatingInterval, i: &Integer) -> Dyadic {
    &iv.a + &(&iv.width() * &Dyadic::new(i.clone(), -(iv.n_log as i64)))
}

/// `m = round(N·t)` for the secant point `a + t·(b − a)`.
fn secant_index(iv: &IsolatingInterval) -> Integer {
    let (fa, fb) = (iv.fa.as_ref().unwrap(), iv.fb.as_ref().unwrap());
    let t = dyadic_to_rational(fa) / dyadic_to_rational(&(fa - fb));
    let n = Integer::from(1) << iv.n_log;
    let m = (t * Rational::from(n.clone()) + Rational::from((1, 2))).floor().numer().clone();
    m.clamp(&Integer::ZERO, &n)
}

/// Requests for one QIR step on `iv`, whose endpoint signs and values are known.
fn step_requests(pl: &Planner, j: usize, iv: &IsolatingInterval) -> Vec<Request> {
    let m = secant_index(iv);
    let n = Integer::from(1) << iv.n_log;
    let bits = pl.start_bits(iv);
    let cap = pl.cap_bits(bits);
    let mk = |slot, base: Dyadic, step: Dyadic| Request {
        interval: j,
        slot,
        x: base.clone(),
        base,
        bits,
        cap,
        lo: iv.a.clone(),
        hi: iv.b.clone(),
        step,
        sign: 0,
        value: None,
    };
    let step = &iv.width() * &Dyadic::pow2(-(iv.n_log as i64) - 4);
    let mut out = Vec::with_capacity(4);
    for k in -1i8..=1 {
        let i = Integer::from(&m + k);
        if i > 0 && i < n {
            out.push(mk(Slot::Grid(k), grid(iv, &i), step.clone()));
        }
    }
    let mid = &(&iv.a + &iv.b) * &Dyadic::pow2(-1);
    out.push(mk(Slot::Mid, mid, &iv.width() * &Dyadic::pow2(-6)));
    out
}

/// Applies the decided signs of one step.
fn apply(iv: &IsolatingInterval, reqs: &[&Request], index: usize) -> Result<(IsolatingInterval, bool)> {
    if let Some(r) = reqs.iter().find(|r| r.sign == 0 && r.value.is_some()) {
        return Ok((IsolatingInterval::exact_root(r.x.clone()), false));
    }
    // the window x_(m−1) ≤ x_m ≤ x_(m+1), endpoints standing in outside (a, b)
    let m = secant_index(iv);
    let n = Integer::from(1) << iv.n_log;
    let window: Vec<(Dyadic, i32, Option<Dyadic>)> = (-1i8..=1)
        .filter_map(|k| {
            let i = Integer::from(&m + k);
            if i < 0 || i > n {
                None
            } else if i == 0 {
                Some((iv.a.clone(), iv.sign_a, iv.fa.clone()))
            } else if i == n {
                Some((iv.b.clone(), iv.sign_b, iv.fb.clone()))
            } else {
                let r = reqs.iter().find(|r| r.slot == Slot::Grid(k)).unwrap();
                Some((r.x.clone(), r.sign, r.value.clone()))
            }
        })
        .collect();
    for w in window.windows(2) {
        let ((l, sl, vl), (r, sr, vr)) = (&w[0], &w[1]);
        if *sl != 0 && *sr != 0 && sl != sr && l < r {
            let n_log = iv.n_log.saturating_mul(2);
            let out = IsolatingInterval {
                a: l.clone(),
                b: r.clone(),
                sign_a: *sl,
                sign_b: *sr,
                n_log,
                exact: false,
                fa: vl.clone(),
                fb: vr.clone(),
            };
            return Ok((out, true));
        }
    }
    let mid = reqs.iter().find(|r| r.slot == Slot::Mid).unwrap();
    if mid.sign == 0 {
        return Err(Error::EvaluationUndecidable { interval: index });
    }
    let n_log = iv.n_log.div_ceil(2).max(2);
    let out = if mid.sign == iv.sign_a {
        IsolatingInterval { a: mid.x.clone(), sign_a: mid.sign, fa: mid.value.clone(), n_log, ..iv.clone() }
    } else {
        IsolatingInterval { b: mid.x.clone(), sign_b: mid.sign, fb: mid.value.clone(), n_log, ..iv.clone() }
    };
    Ok((out, false))
}

/// Certifies endpoint signs of intervals that have none yet.
fn check_endpoints(pl: &mut Planner, ivs: &mut [IsolatingInterval]) -> Result<()> {
    let mut reqs = Vec::new();
    for (j, iv) in ivs.iter().enumerate() {
        if iv.exact || (iv.fa.is_some() && iv.fb.is_some()) {
            continue;
        }
        let bits = pl.start_bits(iv).max(64);
        let cap = pl.cap_bits(bits);
        for (slot, x) in [(Slot::Left, &iv.a), (Slot::Right, &iv.b)] {
            // endpoints are fixed, so a zero step disables perturbation
            reqs.push(Request {
                interval: j,
                slot,
                base: x.clone(),
                x: x.clone(),
                bits,
                cap,
                lo: iv.a.clone(),
                hi: iv.b.clone(),
                step: Dyadic::zero(),
                sign: 0,
                value: None,
            });
        }
    }
    if reqs.is_empty() {
        return Ok(());
    }
    pl.resolve(&mut reqs)?;
    for r in &reqs {
        let iv = &mut ivs[r.interval];
        if iv.exact {
            continue;
        }
        if r.sign == 0 {
            if r.value.is_some() {
                *iv = IsolatingInterval::exact_root(r.x.clone());
                continue;
            }
            return Err(Error::EvaluationUndecidable { interval: r.interval });
        }
        match r.slot {
            Slot::Left => (iv.sign_a, iv.fa) = (r.sign, r.value.clone()),
            _ => (iv.sign_b, iv.fb) = (r.sign, r.value.clone()),
        }
    }
    for (j, iv) in ivs.iter().enumerate() {
        if !iv.exact && iv.sign_a == iv.sign_b {
            return Err(Error::InvalidInput(format!("interval {j} has no certified sign change")));
        }
    }
    Ok(())
}

fn planner(f: &ApproxPoly, big_l: i64) -> Result<Planner<'_>> {
    if !f.is_real() {
        return Err(Error::InvalidInput("refinement needs real coefficients".into()));
    }
    if f.degree().unwrap_or(0) == 0 {
        return Err(Error::InvalidInput("refinement needs a polynomial of positive degree".into()));
    }
    Ok(Planner { f, big_l, tau: coefficient_bound(f), deg: f.degree().unwrap() as i64, calls: 0 })
}

/// One QIR step on a single interval.
pub fn qir_step(f: &ApproxPoly, iv: &IsolatingInterval, big_l: i64) -> Result<IsolatingInterval> {
    let mut pl = planner(f, big_l)?;
    let mut one = [iv.clone()];
    check_endpoints(&mut pl, &mut one)?;
    if one[0].exact {
        return Ok(one[0].clone());
    }
    let mut reqs = step_requests(&pl, 0, &one[0]);
    pl.resolve(&mut reqs)?;
    let refs: Vec<&Request> = reqs.iter().collect();
    Ok(apply(&one[0], &refs, 0)?.0)
}

/// Refines every interval to width `≤ 2^-L`.
pub fn refine_batch(job: &RefineJob) -> Result<Vec<IsolatingInterval>> {
    refine_batch_report(job).map(|(v, _)| v)
}

pub fn refine_batch_report(job: &RefineJob) -> Result<(Vec<IsolatingInterval>, RefineReport)> {
    let mut pl = planner(&job.f, job.big_l)?;
    let mut ivs = job.intervals.clone();
    let mut rep = RefineReport { steps: vec![0; ivs.len()], successes: vec![0; ivs.len()], ..Default::default() };
    check_endpoints(&mut pl, &mut ivs)?;
    loop {
        let active: Vec<usize> = (0..ivs.len()).filter(|&j| !ivs[j].done(job.big_l)).collect();
        if active.is_empty() {
            break;
        }
        rep.sweeps += 1;
        let mut reqs: Vec<Request> = active.iter().flat_map(|&j| step_requests(&pl, j, &ivs[j])).collect();
        pl.resolve(&mut reqs)?;
        for &j in &active {
            let mine: Vec<&Request> = reqs.iter().filter(|r| r.interval == j).collect();
            let (next, ok) = apply(&ivs[j], &mine, j)?;
            debug_assert!(next.a >= ivs[j].a && next.b <= ivs[j].b);
            rep.steps[j] += 1;
            rep.successes[j] += ok as u32;
            ivs[j] = next;
        }
    }
    rep.eval_calls = pl.calls;
    Ok((ivs, rep))
}
