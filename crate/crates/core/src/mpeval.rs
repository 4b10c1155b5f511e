//! Certified multipoint evaluation through subproduct and remainder trees.
//!
//! Every node `v` of the remainder tree divides the remainder of its parent
//! (or `F` at the root) by `g_v`. For a leaf `x_j` the computed value then
//! differs from `F(x_j)` by at most
//!
//! ```text
//! Σ_{v on path} (∥Q̃_v∥_R·δ_v·R^(deg g_v − 1) + ∥E_v∥_R)  +  ∥F − F̂∥·R^deg F
//! ```
//!
//! where `∥p∥_R = Σ |p_k|·R^k` with `R ≥ max(1, |x_j|)` the node's radius,
//! `δ_v` is the certified error of `g̃_v` and `E_v` the division residual.
//! The geometric scaling inside the monic division already bounds `∥E_v∥_R`.
//! Precisions are chosen a priori from tracked norm bounds, the sum is
//! checked a posteriori, and all precisions get extra headroom when the
//! check fails.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use rug::Integer;

use crate::bound::{clog2, UBound};
use crate::div::{div_monic, monic_raw, RootBound};
use crate::dyadic::{round_scalar, DyadicComplex};
use crate::error::{escalation_cap, Error, Result};
use crate::poly::ApproxPoly;
use crate::tree::{build_with_need, point_bound, propagate_need, SubproductTree, TreeShape};

/// Constant in front of `n·⌈log₂ n⌉` in the division precision.
pub const DIV_CONST: i64 = 2;
/// Constant in front of `nΓ + n·⌈log₂ n⌉` in the multiplication precision.
pub const MUL_CONST: i64 = 1;
const MUL_GUARD: i64 = 16;

/// A priori working precisions for one evaluation problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionBudget {
    pub n: usize,
    pub tau: i64,
    pub gamma: i64,
    pub big_l: i64,
    /// `L + τ + 2nΓ + C·n·⌈log₂ n⌉`.
    pub ell_div: i64,
    /// `L + τ + C′·(nΓ + n·⌈log₂ n⌉)` plus a guard.
    pub ell_mul: i64,
    /// Extra bits granted on escalation.
    pub headroom: i64,
}

fn log_n(n: usize) -> i64 {
    clog2(n as u64).max(1)
}

pub fn schedule_precisions(n: usize, tau: i64, gamma: i64, big_l: i64) -> PrecisionBudget {
    let ni = n as i64;
    let nl = ni * log_n(n);
    PrecisionBudget {
        n,
        tau,
        gamma,
        big_l,
        ell_div: big_l + tau + 2 * ni * gamma + DIV_CONST * nl,
        ell_mul: big_l + tau + MUL_CONST * (ni * gamma + nl) + MUL_GUARD,
        headroom: 0,
    }
}

impl PrecisionBudget {
    /// Division precision at layer `i`; the schedule is uniform over layers.
    pub fn div_bits(&self, _layer: usize) -> i64 {
        self.ell_div + self.headroom
    }

    pub fn mul_bits(&self, _layer: usize) -> i64 {
        self.ell_mul + self.headroom
    }
}

/// `max(1, ⌈log₂ ∥F∥₁⌉)`.
pub fn coefficient_bound(f: &ApproxPoly) -> i64 {
    f.norm_bound().log2_ceil().unwrap_or(1).max(1)
}

/// Both remainders of `parent` modulo the two children of a node, each
/// certified to the layer's division precision.
pub fn remainder_layer(
    parent: &ApproxPoly,
    g_left: &ApproxPoly,
    g_right: &ApproxPoly,
    budget: &PrecisionBudget,
    i: usize,
) -> Result<(ApproxPoly, ApproxPoly)> {
    let rho = RootBound::new(budget.gamma);
    let ell = budget.div_bits(i);
    let (l, r) = rayon::join(|| div_monic(parent, g_left, rho, ell), || div_monic(parent, g_right, rho, ell));
    Ok((l?.remainder, r?.remainder))
}

/// The remainders `r_v = r_parent mod g_v` of one evaluation, aligned with
/// the nodes of the subproduct tree.
#[derive(Clone, Debug)]
pub struct RemainderTree {
    pub remainders: Vec<ApproxPoly>,
    /// Accumulated error bound along the path from the root, evaluated at
    /// the node's points.
    pub path_err: Vec<UBound>,
}

/// Instrumentation of one [`multipoint_eval_report`] call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub budget: PrecisionBudget,
    /// Deepest precision at which the coefficients of `F` or the points were
    /// requested.
    pub query_bits: i64,
    /// Retries after a failed a posteriori check.
    pub escalations: u32,
    pub max_tree_bits: i64,
    pub max_div_bits: i64,
}

#[derive(Clone, Debug)]
struct Plan {
    /// Residual target of the division at each node (`None`: no division).
    div_bits: Vec<Option<i64>>,
    tree_need: Vec<i64>,
    f_bits: i64,
}

fn log2_up(b: UBound) -> i64 {
    b.log2_ceil().unwrap_or(0).max(0)
}

/// Upper bound on `∥f div g∥₁ / ∥f∥₁` for monic `g` of degree `d` with roots of
/// modulus at most `r ≥ 1` and a quotient with `k` coefficients.
fn quotient_growth(d: usize, k: usize, r: UBound) -> UBound {
    let c = Integer::from(Integer::binomial_u((d + k - 1) as u32, (k - 1) as u32));
    UBound::from_integer(&c).mul(r.pow(k as u64 - 1))
}

fn plan(shape: &TreeShape, f: &ApproxPoly, big_l: i64, headroom: i64) -> Plan {
    let nn = shape.nodes.len();
    let deg_f = f.degree_bound().max(f.degree().unwrap_or(0));
    let p = clog2(shape.depth() as u64 + 2);
    let mut div_bits = vec![None; nn];
    let mut need = vec![0i64; nn];
    let mut lr_out = vec![0i64; nn];
    let gam = |v: usize| log2_up(shape.nodes[v].radius);
    let f_bits = big_l + 3 + p + gam(0) * deg_f as i64 + clog2(deg_f as u64 + 1) + headroom;
    for layer in &shape.layers {
        for &v in layer {
            let node = &shape.nodes[v];
            let (dd, lr_in) = match node.parent {
                None => (deg_f, coefficient_bound(f)),
                Some(par) => (shape.nodes[par].len() - 1, lr_out[par]),
            };
            let d = node.len();
            if dd < d {
                lr_out[v] = lr_in;
                continue;
            }
            let k = dd - d + 1;
            let lq = lr_in + log2_up(quotient_growth(d, k, node.radius));
            lr_out[v] = lr_in.max(lq + log2_up(node.gnorm)) + 1;
            let t = big_l + 3 + p + headroom;
            div_bits[v] = Some(t);
            // ∥Q∥_R ≤ ∥Q∥·R^(k-1), and g's error is weighted by R^(d-1)
            need[v] = t + lq + gam(v) * (dd as i64 - 1) + 1;
        }
    }
    propagate_need(shape, &mut need);
    Plan { div_bits, tree_need: need, f_bits }
}

/// Exact division by `x − c`.
fn synthetic_div(f: &ApproxPoly, c: &DyadicComplex) -> (ApproxPoly, DyadicComplex) {
    let coeffs = f.coeffs();
    if coeffs.is_empty() {
        return (ApproxPoly::zero(), DyadicComplex::zero());
    }
    let mut q = vec![DyadicComplex::zero(); coeffs.len() - 1];
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for k in (0..coeffs.len() - 1).rev() {
        q[k] = acc.clone();
        acc = &(&acc * c) + &coeffs[k];
    }
    (ApproxPoly::exact(q), acc)
}

const SYNTHETIC_MAX_DEG: usize = 4;

/// `Σ |p_k|·r^k`.
fn weighted_norm(p: &ApproxPoly, r: UBound) -> UBound {
    let mut acc = UBound::ZERO;
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(r).add(UBound::from_complex(c));
    }
    acc
}

/// One node of the remainder descent: the remainder and the node's error
/// contribution at its points.
fn descend_node(dividend: &ApproxPoly, g: &ApproxPoly, radius: UBound, bits: Option<i64>) -> Result<(ApproxPoly, UBound)> {
    let Some(bits) = bits else {
        return Ok((dividend.clone(), UBound::ZERO));
    };
    let d = g.len() - 1;
    let delta = g.err_bound().mul(radius.pow(d as u64 - 1));
    if d == 1 && dividend.len() <= SYNTHETIC_MAX_DEG + 1 {
        let c = -g.coeff(0);
        let (q, r) = synthetic_div(dividend, &c);
        let term = weighted_norm(&q, radius).mul(delta);
        return Ok((ApproxPoly::exact(vec![r]), term));
    }
    let rho = RootBound::new(log2_up(radius));
    let raw = monic_raw(dividend, &g.clone().with_err_bits(ApproxPoly::EXACT), rho, bits, false)?;
    // the scaled division bounds ∥E∥_R for any R ≤ 2^rho by its residual
    let term = weighted_norm(&raw.q, radius).mul(delta).add(raw.residual);
    Ok((raw.r, term))
}

fn run_descent(tree: &SubproductTree, f_hat: &ApproxPoly, plan: &Plan) -> Result<RemainderTree> {
    let shape = &tree.shape;
    let nn = shape.nodes.len();
    let mut rems: Vec<Option<ApproxPoly>> = vec![None; nn];
    let mut path_err = vec![UBound::ZERO; nn];
    for layer in &shape.layers {
        let out: Vec<Result<(usize, ApproxPoly, UBound)>> = layer
            .par_iter()
            .map(|&v| {
                let node = &shape.nodes[v];
                let dividend = match node.parent {
                    None => f_hat,
                    Some(p) => rems[p].as_ref().unwrap(),
                };
                let (r, term) = descend_node(dividend, &tree.polys[v], node.radius, plan.div_bits[v])?;
                Ok((v, r, term))
            })
            .collect();
        for res in out {
            let (v, r, term) = res?;
            let above = shape.nodes[v].parent.map_or(UBound::ZERO, |p| path_err[p]);
            path_err[v] = above.add(term);
            rems[v] = Some(r);
        }
    }
    Ok(RemainderTree { remainders: rems.into_iter().map(Option::unwrap).collect(), path_err })
}

static EVAL_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of [`multipoint_eval_report`] calls made by this process.
pub fn eval_call_count() -> u64 {
    EVAL_CALLS.load(Ordering::Relaxed)
}

/// Values `ỹ_j` with `|ỹ_j − F(x_j)| ≤ 2^-L`.
pub fn multipoint_eval(f: &ApproxPoly, points: &[DyadicComplex], big_l: i64) -> Result<Vec<DyadicComplex>> {
    multipoint_eval_report(f, points, big_l).map(|(v, _)| v)
}

pub fn multipoint_eval_report(f: &ApproxPoly, points: &[DyadicComplex], big_l: i64) -> Result<(Vec<DyadicComplex>, EvalReport)> {
    EVAL_CALLS.fetch_add(1, Ordering::Relaxed);
    let deg_f = f.degree_bound().max(f.degree().unwrap_or(0));
    let n = points.len().max(deg_f + 1);
    let mut budget = schedule_precisions(n, coefficient_bound(f), point_bound(points), big_l);
    if points.is_empty() {
        let report = EvalReport { budget, query_bits: 0, escalations: 0, max_tree_bits: 0, max_div_bits: 0 };
        return Ok((Vec::new(), report));
    }
    let shape = TreeShape::new(points);
    let r_root = shape.nodes[0].radius;
    let f_amp = r_root.pow(deg_f as u64);
    let limit = UBound::pow2(-big_l - 1);
    if f.err_bound().mul(f_amp) > UBound::pow2(-big_l - 3) {
        let required = big_l + 3 + log2_up(f_amp);
        return Err(Error::InsufficientInputPrecision { required, available: f.err_bits() });
    }

    let cap = escalation_cap();
    let mut headroom = 0;
    for attempt in 0..=cap {
        budget.headroom = headroom;
        let plan = plan(&shape, f, big_l, headroom);
        let (f_hat, f_round) = if f.frac_bits() > plan.f_bits { f.round(plan.f_bits) } else { (f.clone(), UBound::ZERO) };
        let f_hat = f_hat.with_err_bits(ApproxPoly::EXACT);
        let f_term = f.err_bound().add(f_round).mul(f_amp);

        let tree = build_with_need(shape.clone(), points, &plan.tree_need);
        let rt = run_descent(&tree, &f_hat, &plan)?;

        let mut values = Vec::with_capacity(points.len());
        let mut ok = true;
        for v in shape.layers.iter().flatten().copied().filter(|&v| shape.nodes[v].is_leaf()) {
            let err = rt.path_err[v].add(f_term);
            if err > limit {
                ok = false;
                break;
            }
            values.push((shape.nodes[v].lo, rt.remainders[v].coeff(0)));
        }
        if ok {
            values.sort_by_key(|(j, _)| *j);
            let out = values.into_iter().map(|(_, y)| round_scalar(&y, big_l + 2)).collect();
            let leaf_bits = shape.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf()).map(|(v, _)| plan.tree_need[v]).max().unwrap();
            let report = EvalReport {
                budget,
                query_bits: plan.f_bits.max(leaf_bits),
                escalations: attempt,
                max_tree_bits: *plan.tree_need.iter().max().unwrap(),
                max_div_bits: plan.div_bits.iter().flatten().copied().max().unwrap_or(0),
            };
            return Ok((out, report));
        }
        headroom = (2 * headroom).max(32);
    }
    Err(Error::PrecisionExhausted { attempts: cap + 1 })
}

/// The remainder tree of `F` over `points` at the precisions
/// [`multipoint_eval`] would use for target `L`.
pub fn remainder_tree(f: &ApproxPoly, points: &[DyadicComplex], big_l: i64) -> Result<(SubproductTree, RemainderTree)> {
    let shape = TreeShape::new(points);
    let plan = plan(&shape, f, big_l, 0);
    let tree = build_with_need(shape, points, &plan.tree_need);
    let rt = run_descent(&tree, &f.clone().with_err_bits(ApproxPoly::EXACT), &plan)?;
    Ok((tree, rt))
}
