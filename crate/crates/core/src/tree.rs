//! Brute-force tree expansion of the Picard iterates.
//!
//! `Γ^(0) = {•}` (a bare leaf) is used internally so that
//! `Γ^(k) = {0} ∪ Γ^(k-1) × Γ^(k-1)` holds for every `k >= 1`; the pair of
//! two bare leaves is the `Leaf1` tree of depth 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::exp_poly::{outer_integral_value, ExpPoly, ExpPolyOptions, Term};
use crate::lattice::{box_indices, check_dim, CoeffField, FrequencyVector, LatticeIndex};

const MODULE: &str = "tree_oracle";

pub const MAX_TREE_DEPTH: u32 = 4;
pub const MAX_SUM_DEPTH: u32 = 3;
pub const TUPLE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf0,
    Leaf1,
    Zero,
    Pair(Arc<GammaTree>, Arc<GammaTree>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaTree {
    shape: Shape,
    depth: u32,
    l: u32,
    d: u32,
    f: u64,
}

impl GammaTree {
    fn leaf(shape: Shape, depth: u32) -> Self {
        GammaTree {
            shape,
            depth,
            l: 0,
            d: 1,
            f: 1,
        }
    }

    fn leaf1() -> Self {
        GammaTree {
            shape: Shape::Leaf1,
            depth: 1,
            l: 1,
            d: 2,
            f: 1,
        }
    }

    fn pair(a: Arc<GammaTree>, b: Arc<GammaTree>) -> Self {
        let l = a.l + b.l + 1;
        GammaTree {
            depth: a.depth + 1,
            d: a.d + b.d,
            f: l as u64 * a.f * b.f,
            l,
            shape: Shape::Pair(a, b),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of internal nodes, 𝔩.
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Number of leaves, 𝔡.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// 𝔉, the product of subtree sizes over internal nodes.
    pub fn f(&self) -> u64 {
        self.f
    }

    /// Recomputes the cached statistics from the children.
    pub fn stats_consistent(&self) -> bool {
        match &self.shape {
            Shape::Leaf0 | Shape::Zero => self.l == 0 && self.d == 1 && self.f == 1,
            Shape::Leaf1 => self.l == 1 && self.d == 2 && self.f == 1,
            Shape::Pair(a, b) => {
                let l = a.l + b.l + 1;
                a.stats_consistent()
                    && b.stats_consistent()
                    && self.l == l
                    && self.d == a.d + b.d
                    && self.f == l as u64 * a.f * b.f
            }
        }
    }

    fn children(&self) -> Option<(&GammaTree, &GammaTree)> {
        match &self.shape {
            Shape::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The multiset 𝔸^(k,γ) as sorted `(α, multiplicity)` pairs.
    pub fn a_set(&self) -> Vec<(MultiIndex, u64)> {
        let mut map = BTreeMap::new();
        match &self.shape {
            Shape::Leaf0 | Shape::Zero => {
                map.insert(vec![0u32], 1u64);
            }
            Shape::Leaf1 => {
                map.insert(vec![1, 0], 1);
                map.insert(vec![0, 1], 1);
            }
            Shape::Pair(a, b) => {
                let (sa, sb) = (a.a_set(), b.a_set());
                let d = self.d as usize;
                for (x, mx) in &sa {
                    for (y, my) in &sb {
                        let mut base = x.components().to_vec();
                        base.extend_from_slice(y.components());
                        for i in 0..d {
                            let mut alpha = base.clone();
                            alpha[i] += 1;
                            *map.entry(alpha).or_insert(0) += mx * my;
                        }
                    }
                }
            }
        }
        map.into_iter().map(|(a, m)| (MultiIndex::new(a), m)).collect()
    }
}

/// All trees of depth `k`, with `Zero` first and pairs in lexicographic order
/// of their children.
pub fn enumerate_trees(k: u32) -> Result<Vec<Arc<GammaTree>>> {
    if k == 0 || k > MAX_TREE_DEPTH {
        return Err(Error::invalid(
            MODULE,
            format!("tree depth {k} outside 1..={MAX_TREE_DEPTH}"),
        ));
    }
    let mut level = vec![
        Arc::new(GammaTree::leaf(Shape::Leaf0, 1)),
        Arc::new(GammaTree::leaf1()),
    ];
    for depth in 2..=k {
        let mut next = Vec::with_capacity(1 + level.len() * level.len());
        next.push(Arc::new(GammaTree::leaf(Shape::Zero, depth)));
        for a in &level {
            for b in &level {
                next.push(Arc::new(GammaTree::pair(a.clone(), b.clone())));
            }
        }
        level = next;
    }
    Ok(level)
}

/// A tree together with its ordered leaf indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeAssignment {
    tree: Arc<GammaTree>,
    leaves: Vec<LatticeIndex>,
}

impl TreeAssignment {
    pub fn new(tree: Arc<GammaTree>, leaves: Vec<LatticeIndex>) -> Result<Self> {
        if leaves.len() != tree.d as usize {
            return Err(Error::invalid(
                MODULE,
                format!("tree has {} leaves, assignment has {}", tree.d, leaves.len()),
            ));
        }
        let nu = leaves[0].nu();
        for m in &leaves {
            check_dim(nu, m.nu())?;
        }
        Ok(TreeAssignment { tree, leaves })
    }

    pub fn tree(&self) -> &GammaTree {
        &self.tree
    }

    pub fn leaves(&self) -> &[LatticeIndex] {
        &self.leaves
    }

    pub fn mu(&self) -> LatticeIndex {
        sum_indices(&self.leaves)
    }

    /// Σ|m_j|.
    pub fn total_l1(&self) -> u64 {
        self.leaves.iter().map(LatticeIndex::l1).sum()
    }

    /// `I(·, m)` as an exponential polynomial in `t`.
    pub fn tree_i_poly(&self, omega: &FrequencyVector, opts: &ExpPolyOptions) -> Result<ExpPoly> {
        check_dim(omega.nu(), self.leaves[0].nu())?;
        node_i(&self.tree, &self.leaves, omega, opts)
    }

    /// 𝔣(m), the product of `-i μ ω / 2` over internal nodes.
    pub fn frak_f(&self, omega: &FrequencyVector) -> Complex64 {
        walk(&self.tree, &self.leaves, &mut |mu| {
            Complex64::new(0.0, -omega.phase_unchecked(mu) / 2.0)
        })
    }

    /// 𝔓(m), the product of `|μ|` over internal nodes.
    pub fn frak_p(&self) -> f64 {
        walk(&self.tree, &self.leaves, &mut |mu| Complex64::new(mu.l1() as f64, 0.0)).re
    }

    /// 𝔠(m) = Π c(m_j).
    pub fn frak_c(&self, c: &CoeffField) -> Complex64 {
        self.leaves.iter().map(|m| c.get(m)).product()
    }

    /// Σ_{α∈𝔸} Π |m_i|^{α_i}, counted with multiplicity.
    pub fn p_expansion(&self) -> f64 {
        self.tree
            .a_set()
            .iter()
            .map(|(alpha, mult)| {
                let prod: f64 = alpha
                    .components()
                    .iter()
                    .zip(&self.leaves)
                    .map(|(&a, m)| (m.l1() as f64).powi(a as i32))
                    .product();
                *mult as f64 * prod
            })
            .sum()
    }
}

fn sum_indices(leaves: &[LatticeIndex]) -> LatticeIndex {
    let mut mu = LatticeIndex::zero(leaves[0].nu());
    for m in leaves {
        mu = &mu + m;
    }
    mu
}

fn split_leaves<'a>(tree: &GammaTree, leaves: &'a [LatticeIndex]) -> (&'a [LatticeIndex], &'a [LatticeIndex]) {
    let (a, _) = tree.children().expect("pair node");
    leaves.split_at(a.d as usize)
}

/// Product over internal nodes of `node(μ)`.
fn walk(tree: &GammaTree, leaves: &[LatticeIndex], node: &mut dyn FnMut(&LatticeIndex) -> Complex64) -> Complex64 {
    match &tree.shape {
        Shape::Leaf0 | Shape::Zero => Complex64::new(1.0, 0.0),
        Shape::Leaf1 => node(&sum_indices(leaves)),
        Shape::Pair(a, b) => {
            let (la, lb) = split_leaves(tree, leaves);
            let own = node(&sum_indices(leaves));
            own * walk(a, la, node) * walk(b, lb, node)
        }
    }
}

fn node_i(tree: &GammaTree, leaves: &[LatticeIndex], omega: &FrequencyVector, opts: &ExpPolyOptions) -> Result<ExpPoly> {
    let cube = |n: &LatticeIndex| omega.phase_unchecked(n).powi(3);
    match &tree.shape {
        Shape::Leaf0 | Shape::Zero => Ok(ExpPoly::monomial(Complex64::new(1.0, 0.0), 0, cube(&leaves[0]))),
        Shape::Leaf1 => {
            let inner = ExpPoly::monomial(Complex64::new(1.0, 0.0), 0, cube(&leaves[0]) + cube(&leaves[1]));
            inner.outer_integral(cube(&sum_indices(leaves)), opts)
        }
        Shape::Pair(a, b) => {
            let (la, lb) = split_leaves(tree, leaves);
            let prod = node_i(a, la, omega, opts)?.multiply(&node_i(b, lb, omega, opts)?, opts)?;
            prod.outer_integral(cube(&sum_indices(leaves)), opts)
        }
    }
}

/// `I(t, m)`.
pub fn tree_i(t: f64, assignment: &TreeAssignment, omega: &FrequencyVector) -> Result<Complex64> {
    let opts = options_for(t)?;
    Ok(assignment.tree_i_poly(omega, &opts)?.eval(t))
}

fn options_for(t: f64) -> Result<ExpPolyOptions> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(MODULE, format!("time {t} must be finite and >= 0")));
    }
    Ok(ExpPolyOptions {
        horizon: t.max(1e-12),
        ..ExpPolyOptions::default()
    })
}

/// One leaf assignment of a subtree, reduced to what its parent needs.
#[derive(Clone)]
struct Partial {
    mu: LatticeIndex,
    weight: Complex64,
    poly: ExpPoly,
}

struct Budget {
    used: u64,
}

impl Budget {
    fn charge(&mut self, n: u64) -> Result<()> {
        self.used += n;
        if self.used > TUPLE_BUDGET {
            return Err(Error::BudgetExceeded {
                module: MODULE,
                reason: format!("more than {TUPLE_BUDGET} leaf tuples"),
            });
        }
        Ok(())
    }
}

fn combine(
    left: &[Partial],
    right: &[Partial],
    by_mu: &BTreeMap<LatticeIndex, Vec<usize>>,
    omega: &FrequencyVector,
    radius: u32,
    opts: &ExpPolyOptions,
) -> Result<Vec<Partial>> {
    let mut out = Vec::new();
    for p in left {
        for (mu_r, idxs) in by_mu {
            let mu = &p.mu + mu_r;
            if mu.l1() > radius as u64 {
                continue;
            }
            let k = omega.phase_unchecked(&mu);
            if k == 0.0 {
                continue;
            }
            let factor = Complex64::new(0.0, -k / 2.0);
            for &j in idxs {
                let q = &right[j];
                let poly = p.poly.multiply(&q.poly, opts)?.outer_integral(k.powi(3), opts)?;
                out.push(Partial {
                    mu: mu.clone(),
                    weight: p.weight * q.weight * factor,
                    poly,
                });
            }
        }
    }
    Ok(out)
}

fn group_by_mu(parts: &[Partial]) -> BTreeMap<LatticeIndex, Vec<usize>> {
    let mut map: BTreeMap<LatticeIndex, Vec<usize>> = BTreeMap::new();
    for (i, p) in parts.iter().enumerate() {
        map.entry(p.mu.clone()).or_default().push(i);
    }
    map
}

/// c_k(t, n) as the full sum over `Γ^(k)` and all leaf assignments with
/// every subtree index inside the box `|·| <= radius`.
pub fn tree_sum_ck(
    k: u32,
    n: &LatticeIndex,
    t: f64,
    c_init: &CoeffField,
    omega: &FrequencyVector,
    radius: u32,
) -> Result<Complex64> {
    if k == 0 || k > MAX_SUM_DEPTH {
        return Err(Error::invalid(
            MODULE,
            format!("tree sums are supported for 1 <= k <= {MAX_SUM_DEPTH}, got {k}"),
        ));
    }
    check_dim(omega.nu(), c_init.nu())?;
    check_dim(omega.nu(), n.nu())?;
    let opts = options_for(t)?;
    if n.l1() > radius as u64 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut budget = Budget { used: 0 };

    let leaf: Vec<Partial> = box_indices(c_init.nu(), radius)
        .into_iter()
        .filter_map(|m| {
            let c = c_init.get(&m);
            (c != Complex64::new(0.0, 0.0)).then(|| Partial {
                poly: ExpPoly::monomial(Complex64::new(1.0, 0.0), 0, omega.phase_unchecked(&m).powi(3)),
                mu: m,
                weight: c,
            })
        })
        .collect();
    budget.charge(leaf.len() as u64)?;

    // Partials for every tree of depth k-1, in enumeration order.
    let mut level: Vec<Vec<Partial>> = vec![leaf];
    for _ in 1..k {
        let width: u64 = level.iter().map(|p| p.len() as u64).sum();
        budget.charge(width.saturating_mul(width))?;
        let groups: Vec<_> = level.iter().map(|p| group_by_mu(p)).collect();
        let mut next = Vec::with_capacity(1 + level.len() * level.len());
        next.push(level[0].clone());
        for a in &level {
            for (b, by_mu) in level.iter().zip(&groups) {
                next.push(combine(a, b, by_mu, omega, radius, &opts)?);
            }
        }
        level = next;
    }

    let groups: Vec<_> = level.iter().map(|p| group_by_mu(p)).collect();
    let mut root_count = 0u64;
    for a in &level {
        for by_mu in &groups {
            for p in a {
                if let Some(v) = by_mu.get(&(n - &p.mu)) {
                    root_count += v.len() as u64;
                }
            }
        }
    }
    budget.charge(root_count)?;

    let kn = omega.phase_unchecked(n);
    let theta = kn.powi(3);
    let factor = Complex64::new(0.0, -kn / 2.0);
    let zero_tree = c_init.get(n) * Complex64::cis(theta * t);
    if kn == 0.0 {
        return Ok(zero_tree);
    }

    let pairs: Vec<(usize, usize)> = (0..level.len())
        .flat_map(|a| (0..level.len()).map(move |b| (a, b)))
        .collect();
    let contributions: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut raw: Vec<Term> = Vec::new();
            let mut scratch: Vec<Term> = Vec::new();
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &level[a] {
                let Some(idxs) = groups[b].get(&(n - &p.mu)) else {
                    continue;
                };
                for &j in idxs {
                    let q = &level[b][j];
                    raw.clear();
                    p.poly.push_product_terms(&q.poly, &mut raw);
                    acc += p.weight * q.weight * outer_integral_value(&raw, theta, t, &opts, &mut scratch);
                }
            }
            acc * factor
        })
        .collect();
    Ok(zero_tree + contributions.into_iter().sum::<Complex64>())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub k: u32,
    pub n: Vec<i64>,
    pub picard_value: [f64; 2],
    pub tree_value: [f64; 2],
    pub abs_diff: f64,
}

impl OracleReport {
    pub fn new(k: u32, n: &LatticeIndex, picard: Complex64, tree: Complex64) -> Self {
        OracleReport {
            k,
            n: n.components().to_vec(),
            picard_value: [picard.re, picard.im],
            tree_value: [tree.re, tree.im],
            abs_diff: (picard - tree).norm(),
        }
    }

    pub fn relative_diff(&self) -> f64 {
        let p = Complex64::new(self.picard_value[0], self.picard_value[1]).norm();
        if p > 0.0 {
            self.abs_diff / p
        } else {
            self.abs_diff
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hermitian_symmetrize;
    use crate::picard::{iterates, SolverConfig};
    use crate::quadrature::integrate_adaptive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn idx(v: &[i64]) -> LatticeIndex {
        LatticeIndex::new(v.to_vec())
    }

    fn w1() -> FrequencyVector {
        FrequencyVector::new(vec![1.0]).unwrap()
    }

    fn random_data(seed: u64, radius: u32, scale: f64) -> CoeffField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        for n in box_indices(1, radius) {
            let r = scale * 10f64.powi(-(n.l1() as i32)) * rng.random_range(0.2..1.0);
            entries.push((n, Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))));
        }
        hermitian_symmetrize(&CoeffField::from_entries(1, radius, entries).unwrap())
    }

    #[test]
    fn enumeration_sizes_and_stats() {
        let sizes: Vec<usize> = (1..=4).map(|k| enumerate_trees(k).unwrap().len()).collect();
        assert_eq!(sizes, vec![2, 5, 26, 677]);
        for k in 1..=4 {
            assert!(enumerate_trees(k).unwrap().iter().all(|t| t.stats_consistent() && t.depth() == k));
        }
        assert!(enumerate_trees(0).is_err());
        assert!(enumerate_trees(5).is_err());
    }

    #[test]
    fn pair_of_leaf1_stats() {
        let trees = enumerate_trees(2).unwrap();
        let t = trees.iter().find(|t| matches!(t.shape(), Shape::Pair(a, b) if a.d() == 2 && b.d() == 2)).unwrap();
        assert_eq!((t.l(), t.d(), t.f()), (3, 4, 3));
    }

    #[test]
    fn leaf_integral_has_unit_modulus() {
        let tree = enumerate_trees(1).unwrap()[0].clone();
        let a = TreeAssignment::new(tree, vec![idx(&[2])]).unwrap();
        let v = tree_i(0.3, &a, &w1()).unwrap();
        assert!((v - Complex64::cis(8.0 * 0.3)).norm() < 1e-15);
    }

    #[test]
    fn resonant_leaf1_is_linear_in_t() {
        // (μω)^3 = m1^3 + m2^3 when one leaf is zero.
        let tree = enumerate_trees(1).unwrap()[1].clone();
        let a = TreeAssignment::new(tree, vec![idx(&[2]), idx(&[0])]).unwrap();
        let t = 0.4;
        let v = tree_i(t, &a, &w1()).unwrap();
        assert!((v - t * Complex64::cis(8.0 * t)).norm() < 1e-15);
    }

    #[test]
    fn nested_integral_matches_quadrature() {
        let trees = enumerate_trees(2).unwrap();
        let tree = trees.iter().find(|t| t.d() == 3 && matches!(t.shape(), Shape::Pair(a, _) if a.d() == 2)).unwrap();
        let leaves = vec![idx(&[1]), idx(&[-2]), idx(&[1])];
        let a = TreeAssignment::new(tree.clone(), leaves).unwrap();
        let t = 0.7;
        // inner: ∫_0^s e^{i(s-σ)(-1)} e^{iσ(1-8)} dσ; outer: ∫_0^t e^{i(t-s)·0} inner(s) e^{is} ds
        let inner = |s: f64| integrate_adaptive(|sig| Complex64::cis(-(s - sig) - 7.0 * sig), 0.0, s, 1e-14).0;
        let expected = integrate_adaptive(|s| inner(s) * Complex64::cis(s), 0.0, t, 1e-13).0;
        let v = tree_i(t, &a, &w1()).unwrap();
        assert!((v - expected).norm() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn a_set_keeps_multiplicities() {
        let trees = enumerate_trees(2).unwrap();
        let t = trees.iter().find(|t| matches!(t.shape(), Shape::Pair(a, b) if a.d() == 2 && b.d() == 1)).unwrap();
        let set = t.a_set();
        let total: u64 = set.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 2 * 3);
        assert!(set.iter().all(|(a, _)| a.weight() == t.l()));
        assert!(set.contains(&(MultiIndex::new(vec![1, 1, 0]), 2)));
        assert!(set.contains(&(MultiIndex::new(vec![2, 0, 0]), 1)));
    }

    fn random_assignment(rng: &mut ChaCha8Rng, tree: &Arc<GammaTree>) -> TreeAssignment {
        let leaves = (0..tree.d()).map(|_| idx(&[rng.random_range(-4..=4)])).collect();
        TreeAssignment::new(tree.clone(), leaves).unwrap()
    }

    #[test]
    fn integral_bound_on_random_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let trees: Vec<_> = (1..=3).flat_map(|k| enumerate_trees(k).unwrap()).collect();
        for _ in 0..100 {
            let tree = &trees[rng.random_range(0..trees.len())];
            let a = random_assignment(&mut rng, tree);
            let t: f64 = rng.random_range(0.01..1.0);
            let v = tree_i(t, &a, &w1()).unwrap();
            let bound = t.powi(tree.l() as i32) / tree.f() as f64;
            assert!(v.norm() <= bound * (1.0 + 1e-12), "{v} > {bound}");
        }
    }

    #[test]
    fn f_and_p_bounds_on_random_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let omega = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        let trees: Vec<_> = (1..=3).flat_map(|k| enumerate_trees(k).unwrap()).collect();
        for _ in 0..300 {
            let tree = &trees[rng.random_range(0..trees.len())];
            let leaves = (0..tree.d())
                .map(|_| idx(&[rng.random_range(-3..=3), rng.random_range(-3..=3)]))
                .collect();
            let a = TreeAssignment::new(tree.clone(), leaves).unwrap();
            let f = a.frak_f(&omega).norm();
            let p = a.frak_p();
            assert!(f <= omega.norm().powi(tree.l() as i32) * p * (1.0 + 1e-12));
            assert!(p <= a.p_expansion() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let data = CoeffField::zero(1, 3);
        for k in 1..=3 {
            assert_eq!(tree_sum_ck(k, &idx(&[1]), 0.05, &data, &w1(), 3).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn k1_single_tree_case() {
        // Only n = 3 is populated; every pair would need a leaf outside the box.
        let data = CoeffField::from_entries(1, 3, [(idx(&[3]), Complex64::new(0.1, 0.0))]).unwrap();
        let t = 0.05;
        let v = tree_sum_ck(1, &idx(&[3]), t, &data, &w1(), 3).unwrap();
        assert!((v - 0.1 * Complex64::cis(27.0 * t)).norm() < 1e-16);
    }

    #[test]
    fn matches_picard_iterates_k_le_2() {
        let data = random_data(5, 3, 0.1);
        let t = 0.05;
        let cfg = SolverConfig::new(3, t);
        let its = iterates(&data, &w1(), &cfg, 2).unwrap();
        for k in 1..=2u32 {
            for n in box_indices(1, 3) {
                let tree = tree_sum_ck(k, &n, t, &data, &w1(), 3).unwrap();
                let pic = its[k as usize].get(&n).map(|p| p.eval(t)).unwrap_or_default();
                let rep = OracleReport::new(k, &n, pic, tree);
                assert!(rep.relative_diff() <= 1e-10, "{rep:?}");
            }
        }
    }

    #[test]
    fn budget_and_range_errors() {
        let data = random_data(1, 3, 0.1);
        assert!(tree_sum_ck(4, &idx(&[0]), 0.1, &data, &w1(), 3).is_err());
        assert!(tree_sum_ck(0, &idx(&[0]), 0.1, &data, &w1(), 3).is_err());
        let big = CoeffField::from_entries(
            2,
            6,
            box_indices(2, 6).into_iter().map(|n| (n, Complex64::new(1e-3, 0.0))),
        )
        .unwrap();
        let omega = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).unwrap();
        assert!(matches!(
            tree_sum_ck(3, &idx(&[0, 1]), 0.1, &big, &omega, 6),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn report_json_shape() {
        let rep = OracleReport::new(2, &idx(&[1]), Complex64::new(1.0, 0.0), Complex64::new(1.0, 1e-12));
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["k", "n", "picard_value", "tree_value", "abs_diff"] {
            assert!(v.get(key).is_some());
        }
    }
}
