//! Lagrange interpolation through the subproduct tree.
//!
//! With `g = ∏ (x − x_i)` and `λ_i = g′(x_i)`, the interpolant is
//! `F = Σ μ_i ∏_{j≠i} (x − x_j)` with `μ_i = v_i / λ_i`. The `λ_i` come from a
//! multipoint evaluation of `g′`, and the sum is assembled bottom-up: a node
//! combines its children as `g_right·F_left + g_left·F_right`.

use rayon::prelude::*;

use crate::bound::{clog2, UBound};
use crate::div::{modulus_lower, recip_complex, recip_upper};
use crate::dyadic::{round_scalar, Dyadic, DyadicComplex};
use crate::error::{escalation_cap, Error, Result};
use crate::mpeval::multipoint_eval;
use crate::mul::mul_stored;
use crate::poly::ApproxPoly;
use crate::tree::{build_with_need, point_bound, propagate_need, SubproductTree, TreeShape};

#[derive(Clone, Debug)]
pub struct InterpProblem {
    pub points: Vec<DyadicComplex>,
    pub values: Vec<DyadicComplex>,
    /// Every value is within `2^-value_err_bits` of its target.
    pub value_err_bits: i64,
}

impl InterpProblem {
    pub fn new(points: Vec<DyadicComplex>, values: Vec<DyadicComplex>) -> Self {
        assert_eq!(points.len(), values.len(), "one value per point");
        InterpProblem { points, values, value_err_bits: ApproxPoly::EXACT }
    }

    pub fn with_value_err_bits(mut self, bits: i64) -> Self {
        self.value_err_bits = bits;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Γ`: all `|x_i| ≤ 2^Γ`.
    pub fn gamma(&self) -> i64 {
        point_bound(&self.points)
    }

    /// `V = max log₂ max(2, |v_i|)`.
    pub fn value_bound(&self) -> i64 {
        self.values.iter().map(|v| UBound::from_complex(v).log2_ceil().unwrap_or(1).max(1)).max().unwrap_or(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpReport {
    /// `Λ`: all `|λ_i| ≥ 2^-Λ`, discovered from certified lower bounds.
    pub lambda_bound: i64,
    pub value_bound: i64,
    pub escalations: u32,
    /// Precision of the denominators `λ̃_i`.
    pub lambda_bits: i64,
    /// Rounding precision of the combination products.
    pub work_bits: i64,
}

/// Tree precision under which [`lagrange_denominators`] reaches `ell` bits.
pub fn denominator_tree_bits(points: &[DyadicComplex], ell: i64) -> i64 {
    let n = points.len() as i64;
    ell + 4 + clog2(n as u64) + point_bound(points) * (n - 1).max(0)
}

/// `λ̃_i` within `2^-ell` of `∏_{j≠i} (x_i − x_j)`, by evaluating the
/// derivative of the tree root at the points.
pub fn lagrange_denominators(tree: &SubproductTree, ell: i64) -> Result<Vec<DyadicComplex>> {
    if tree.len() == 1 {
        return Ok(vec![DyadicComplex::one()]);
    }
    let dg = tree.root().derivative();
    multipoint_eval(&dg, &tree.points, ell)
}

/// `g_right·F_left + g_left·F_right` with products rounded to `ell + 2` bits
/// and the error exponent derived from those of the operands.
pub fn combine_layer(mu_left: &ApproxPoly, mu_right: &ApproxPoly, g_left: &ApproxPoly, g_right: &ApproxPoly, ell: i64) -> ApproxPoly {
    let half = |f: &ApproxPoly, g: &ApproxPoly| {
        let (e, d) = (f.err_bound(), g.err_bound());
        let err = e.mul(g.norm_bound()).add(f.norm_bound().mul(d)).add(e.mul(d));
        (mul_stored(f, g, ell + 2), err)
    };
    let ((a, ea), (b, eb)) = rayon::join(|| half(mu_left, g_right), || half(mu_right, g_left));
    let mut err = ea.add(eb);
    if !a.is_zero() || !b.is_zero() {
        err = err.add(UBound::pow2(-ell - 1));
    }
    let deg = (mu_left.degree_bound() + g_right.degree_bound()).max(mu_right.degree_bound() + g_left.degree_bound());
    a.add(&b).with_err_bits(err.bits()).with_degree_bound(deg)
}

fn find_duplicate(points: &[DyadicComplex]) -> Option<(usize, usize)> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let key = |i: &usize| (points[*i].re.clone(), points[*i].im.clone());
    idx.sort_by_key(key);
    idx.windows(2).find(|w| points[w[0]] == points[w[1]]).map(|w| (w[0].min(w[1]), w[0].max(w[1])))
}

fn nearest(points: &[DyadicComplex], i: usize) -> usize {
    (0..points.len())
        .filter(|&j| j != i)
        .min_by(|&a, &b| (&points[a] - &points[i]).norm_sqr().cmp(&(&points[b] - &points[i]).norm_sqr()))
        .unwrap()
}

fn build_tree(points: &[DyadicComplex], bits: i64) -> SubproductTree {
    let shape = TreeShape::new(points);
    let mut need = vec![bits; shape.nodes.len()];
    propagate_need(&shape, &mut need);
    build_with_need(shape, points, &need)
}

/// Certified lower bounds on `|λ_i|` from `λ̃_i` at precision `bits`;
/// `None` when some `λ_i` cannot be separated from zero.
fn lambda_lower(lam: &[DyadicComplex], bits: i64) -> std::result::Result<Vec<Dyadic>, usize> {
    let eps = Dyadic::pow2(-bits);
    lam.iter()
        .enumerate()
        .map(|(i, l)| {
            let lo = &modulus_lower(l) - &eps;
            if lo.signum() > 0 {
                Ok(lo)
            } else {
                Err(i)
            }
        })
        .collect()
}

/// `F̃` with `∥F̃ − F∥₁ ≤ 2^-L` for the interpolant `F` of degree `< n`.
pub fn interpolate(problem: &InterpProblem, big_l: i64) -> Result<ApproxPoly> {
    interpolate_report(problem, big_l).map(|(f, _)| f)
}

pub fn interpolate_report(problem: &InterpProblem, big_l: i64) -> Result<(ApproxPoly, InterpReport)> {
    let n = problem.len();
    let pts = &problem.points;
    let vb = problem.value_bound();
    if n == 0 {
        let rep = InterpReport { lambda_bound: 0, value_bound: vb, escalations: 0, lambda_bits: 0, work_bits: 0 };
        return Ok((ApproxPoly::zero(), rep));
    }
    if let Some((a, b)) = find_duplicate(pts) {
        return Err(Error::CoincidentPoints { first: a, second: b });
    }
    let cap = escalation_cap();
    let logn = clog2(n as u64);
    let shape = TreeShape::new(pts);
    let lg = shape.nodes[0].gnorm.log2_ceil().unwrap_or(0).max(0);

    // discover Λ: raise the precision of λ̃ until every |λ_i| is certified > 0
    let mut p = 32 + logn;
    let mut found = Err(0);
    for _ in 0..=cap {
        let tree = build_tree(pts, denominator_tree_bits(pts, p));
        found = lambda_lower(&lagrange_denominators(&tree, p)?, p);
        if found.is_ok() {
            break;
        }
        p *= 2;
    }
    let lower = found.map_err(|i| {
        let j = nearest(pts, i);
        Error::CoincidentPoints { first: i.min(j), second: i.max(j) }
    })?;
    let lambda = lower.iter().map(|l| recip_upper(l).log2_ceil().unwrap_or(0).max(0)).max().unwrap();

    let eps_v = if problem.value_err_bits == ApproxPoly::EXACT { UBound::ZERO } else { UBound::pow2(-problem.value_err_bits) };
    let mut headroom = 0;
    for attempt in 0..=cap {
        // μ error budget and the precisions it implies
        let p_mu = big_l + 4 + lg + logn + headroom;
        let p_lam = p_mu + vb + 2 * lambda + 4;
        let work = big_l + 4 + lg + logn + headroom;
        let comb_tree = big_l + 5 + vb + lambda + 2 * lg + 2 * logn + headroom;
        let value_need = p_mu + lambda + 3;
        if !eps_v.le_pow2(-value_need) && attempt == 0 {
            return Err(Error::InsufficientInputPrecision { required: value_need, available: problem.value_err_bits });
        }
        let tree = build_tree(pts, comb_tree.max(denominator_tree_bits(pts, p_lam)));
        let lam = lagrange_denominators(&tree, p_lam)?;
        let lower = match lambda_lower(&lam, p_lam) {
            Ok(lo) => lo,
            Err(i) => {
                let j = nearest(pts, i);
                return Err(Error::CoincidentPoints { first: i.min(j), second: i.max(j) });
            }
        };
        let eps_lam = UBound::pow2(-p_lam);
        let q = p_mu + vb + 2;
        let leaves: Vec<ApproxPoly> = (0..n)
            .into_par_iter()
            .map(|i| {
                let v = &problem.values[i];
                let r = recip_complex(&lam[i], q);
                let mu = round_scalar(&(v * &r), p_mu + 1);
                // |μ̃ − v/λ| ≤ |v|(|1/λ̃ − 1/λ| + |r − 1/λ̃|) + ε_v/|λ| + rounding
                let inv_lo = recip_upper(&lower[i]);
                let inv_lt = recip_upper(&modulus_lower(&lam[i]));
                let vv = UBound::from_complex(v);
                let e = vv
                    .mul(eps_lam.mul(inv_lo).mul(inv_lt).add(UBound::pow2(-q)))
                    .add(eps_v.mul(inv_lo))
                    .add(UBound::from_complex(&(&mu - &(v * &r))));
                ApproxPoly::new(vec![mu], e.bits()).with_degree_bound(0)
            })
            .collect();
        let f = combine_tree(&tree, leaves, work);
        let (out, round_err) = f.round(big_l + 2 + logn);
        let total = f.err_bound().add(round_err);
        if total.le_pow2(-big_l) {
            let rep = InterpReport { lambda_bound: lambda, value_bound: vb, escalations: attempt, lambda_bits: p_lam, work_bits: work };
            let out = out.with_err_bits(total.bits()).with_degree_bound(n - 1);
            return Ok((out, rep));
        }
        headroom = (2 * headroom).max(32);
    }
    Err(Error::PrecisionExhausted { attempts: cap + 1 })
}

/// Bottom-up assembly of `Σ μ_i ∏_{j≠i} (x − x_j)` from per-leaf weights.
fn combine_tree(tree: &SubproductTree, leaves: Vec<ApproxPoly>, work: i64) -> ApproxPoly {
    let shape = &tree.shape;
    let mut acc: Vec<Option<ApproxPoly>> = vec![None; shape.nodes.len()];
    let mut leaves: Vec<Option<ApproxPoly>> = leaves.into_iter().map(Some).collect();
    for layer in shape.layers.iter().rev() {
        let done: Vec<(usize, ApproxPoly)> = layer
            .par_iter()
            .map(|&v| {
                let node = &shape.nodes[v];
                let f = match node.children {
                    None => leaves[node.lo].clone().unwrap(),
                    Some((a, b)) => combine_layer(acc[a].as_ref().unwrap(), acc[b].as_ref().unwrap(), &tree.polys[a], &tree.polys[b], work),
                };
                (v, f)
            })
            .collect();
        for (v, f) in done {
            if let Some((a, b)) = shape.nodes[v].children {
                acc[a] = None;
                acc[b] = None;
            } else {
                leaves[shape.nodes[v].lo] = None;
            }
            acc[v] = Some(f);
        }
    }
    acc[0].take().unwrap()
}
