//! Subproduct trees over arbitrary point counts.
//!
//! The tree is nearly balanced: a node over `m` points gives `⌈m/2⌉` to its
//! left child. Nodes are stored in depth-first order with the root at 0, and
//! grouped into layers by depth so that each layer can be processed in
//! parallel.

use rayon::prelude::*;

use crate::bound::UBound;
use crate::dyadic::{round_scalar, DyadicComplex};
use crate::mul::{exact_mul, mul_stored};
use crate::poly::ApproxPoly;

#[derive(Clone, Debug)]
pub struct Node {
    /// Leaf range `lo..hi` of the points.
    pub lo: usize,
    pub hi: usize,
    pub depth: usize,
    pub children: Option<(usize, usize)>,
    pub parent: Option<usize>,
    /// `max(1, max |x_j|)` over the node's points.
    pub radius: UBound,
    /// `∏ (1 + |x_j|)`, bounding `∥g∥₁` of the exact node polynomial.
    pub gnorm: UBound,
}

impl Node {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Shape of a subproduct tree, without polynomials.
#[derive(Clone, Debug)]
pub struct TreeShape {
    pub nodes: Vec<Node>,
    pub layers: Vec<Vec<usize>>,
}

impl TreeShape {
    pub fn new(points: &[DyadicComplex]) -> Self {
        assert!(!points.is_empty(), "subproduct tree needs at least one point");
        let moduli: Vec<UBound> = points.iter().map(UBound::from_complex).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() - 1);
        build_shape(&mut nodes, &moduli, 0, points.len(), 0, None);
        let depth = nodes.iter().map(|n| n.depth).max().unwrap();
        let mut layers = vec![Vec::new(); depth + 1];
        for (k, n) in nodes.iter().enumerate() {
            layers[n.depth].push(k);
        }
        TreeShape { nodes, layers }
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn sibling(&self, v: usize) -> Option<usize> {
        let p = self.nodes[v].parent?;
        let (a, b) = self.nodes[p].children.unwrap();
        Some(if a == v { b } else { a })
    }
}

fn build_shape(nodes: &mut Vec<Node>, moduli: &[UBound], lo: usize, hi: usize, depth: usize, parent: Option<usize>) -> usize {
    let idx = nodes.len();
    let one = UBound::from_u64(1);
    let radius = moduli[lo..hi].iter().fold(one, |a, &b| a.max(b));
    let gnorm = moduli[lo..hi].iter().fold(one, |a, &b| a.mul(one.add(b)));
    nodes.push(Node { lo, hi, depth, children: None, parent, radius, gnorm });
    if hi - lo > 1 {
        let mid = lo + (hi - lo).div_ceil(2);
        let l = build_shape(nodes, moduli, lo, mid, depth + 1, Some(idx));
        let r = build_shape(nodes, moduli, mid, hi, depth + 1, Some(idx));
        nodes[idx].children = Some((l, r));
    }
    idx
}

#[derive(Clone, Debug)]
pub struct SubproductTree {
    pub shape: TreeShape,
    /// Monic node polynomials `∏ (x − x_j)`, aligned with `shape.nodes`.
    pub polys: Vec<ApproxPoly>,
    pub points: Vec<DyadicComplex>,
    /// All `|x_j| ≤ 2^gamma`, `gamma ≥ 1`.
    pub gamma: i64,
}

impl SubproductTree {
    pub fn root(&self) -> &ApproxPoly {
        &self.polys[0]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polynomials of one depth layer, left to right.
    pub fn layer(&self, depth: usize) -> Vec<&ApproxPoly> {
        self.shape.layers[depth].iter().map(|&k| &self.polys[k]).collect()
    }

    /// Weakest certified precision over all nodes.
    pub fn min_err_bits(&self) -> i64 {
        self.polys.iter().map(|p| p.err_bits()).min().unwrap()
    }
}

/// `max(1, ⌈log₂ max |x_j|⌉)`.
pub fn point_bound(points: &[DyadicComplex]) -> i64 {
    points.iter().map(|p| UBound::from_complex(p).log2_ceil().unwrap_or(0)).max().unwrap_or(1).max(1)
}

/// Per-node precisions that make every node of the tree at least as accurate
/// as `need[v]` demands, given that a node's error feeds into its parent
/// multiplied by the sibling's norm.
pub(crate) fn propagate_need(shape: &TreeShape, need: &mut [i64]) {
    for layer in &shape.layers[1..] {
        for &v in layer {
            let p = shape.nodes[v].parent.unwrap();
            let sib = shape.sibling(v).unwrap();
            let lg = shape.nodes[sib].gnorm.log2_ceil().unwrap_or(0).max(0);
            need[v] = need[v].max(need[p] + lg + 4);
        }
    }
}

/// Builds the node polynomials so that node `v` is certified to `need[v]`
/// bits; `need` must already be propagated.
pub(crate) fn build_with_need(shape: TreeShape, points: &[DyadicComplex], need: &[i64]) -> SubproductTree {
    let mut polys: Vec<Option<ApproxPoly>> = vec![None; shape.nodes.len()];
    for layer in shape.layers.iter().rev() {
        let done: Vec<(usize, ApproxPoly)> = layer
            .par_iter()
            .map(|&v| {
                let node = &shape.nodes[v];
                let poly = match node.children {
                    None => {
                        let x = &points[node.lo];
                        let xr = round_scalar(x, need[v]);
                        let err = if &xr == x { ApproxPoly::EXACT } else { need[v] };
                        ApproxPoly::linear(&xr).with_err_bits(err)
                    }
                    Some((a, b)) => {
                        let (ga, gb) = (polys[a].as_ref().unwrap(), polys[b].as_ref().unwrap());
                        node_product(ga, gb, need[v])
                    }
                };
                (v, poly)
            })
            .collect();
        for (v, p) in done {
            polys[v] = Some(p);
        }
    }
    let gamma = point_bound(points);
    SubproductTree { shape, polys: polys.into_iter().map(Option::unwrap).collect(), points: points.to_vec(), gamma }
}

/// Product of two node polynomials with the error of the result tracked
/// from the errors of the factors.
pub(crate) fn node_product(a: &ApproxPoly, b: &ApproxPoly, bits: i64) -> ApproxPoly {
    let (da, db) = (a.err_bound(), b.err_bound());
    let err = da.mul(b.norm_bound()).add(db.mul(a.norm_bound())).add(da.mul(db));
    if a.frac_bits() + b.frac_bits() <= bits + 1 {
        return exact_mul(a, b).with_err_bits(err.bits()).with_degree_bound(a.degree_bound() + b.degree_bound());
    }
    let p = mul_stored(a, b, bits + 1);
    p.with_err_bits(err.add(UBound::pow2(-bits - 1)).bits())
}

/// Subproduct tree with every node certified to `ell` bits.
pub fn build_subproduct_tree(points: &[DyadicComplex], ell: i64) -> SubproductTree {
    let shape = TreeShape::new(points);
    let mut need = vec![ell; shape.nodes.len()];
    propagate_need(&shape, &mut need);
    build_with_need(shape, points, &need)
}
