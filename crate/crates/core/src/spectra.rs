//! Invariants of a signal under left translation: triple correlation, full
//! and selective bispectra, and max/average pooling.
//!
//! The bispectrum of a pair is
//! `beta_{i,j} = (F_i (x) F_j) C_ij [ (+)_k F_k^H ] C_ij^H`,
//! which for one-dimensional irreps is `F_i F_j conj(F_{i+j})`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::context::GroupContext;
use crate::error::{invalid, Error, Result};
use crate::fourier::FourierCoefficients;
use crate::group::{GroupKind, GroupSignal};
use crate::linalg::{kron, scalar, CMatrix, C64};
use crate::representations::KroneckerTable;

/// `T[g1, g2] = sum_g s(g) s(g g1) s(g g2)`.
pub fn triple_correlation(ctx: &GroupContext, signal: &GroupSignal) -> Result<DMatrix<f64>> {
    signal.check_group(ctx.group())?;
    let n = ctx.order();
    let s = signal.values();
    let grp = ctx.group();
    let mut t = DMatrix::<f64>::zeros(n, n);
    let mut shifted = vec![0.0; n];
    // T is symmetric, so filling columns in place of rows is fine.
    let data = t.as_mut_slice();
    for g in 0..n {
        for (h, v) in shifted.iter_mut().enumerate() {
            *v = s[grp.mul(g, h)];
        }
        let sg = s[g];
        for (g1, col) in data.chunks_exact_mut(n).enumerate() {
            let p = sg * shifted[g1];
            for (dst, v) in col.iter_mut().zip(&shifted) {
                *dst += p * v;
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Full,
    Selective,
    Commutative,
}

impl fmt::Display for SpectrumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumMode::Full => "full",
            SpectrumMode::Selective => "selective",
            SpectrumMode::Commutative => "commutative",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BispectrumEntry {
    pub pair: (usize, usize),
    pub matrix: CMatrix,
}

/// Bispectral coefficients for a list of irrep pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct BispectrumCoefficients {
    kind: GroupKind,
    mode: SpectrumMode,
    entries: Vec<BispectrumEntry>,
    index: HashMap<(usize, usize), usize>,
}

impl BispectrumCoefficients {
    pub fn new(ctx: &GroupContext, mode: SpectrumMode, entries: Vec<BispectrumEntry>) -> Result<Self> {
        let mut index = HashMap::new();
        for (e, entry) in entries.iter().enumerate() {
            let (a, b) = entry.pair;
            if a >= ctx.num_irreps() || b >= ctx.num_irreps() {
                return invalid(format!("pair ({a},{b}) out of range for {}", ctx.kind()));
            }
            let d = ctx.dim(a) * ctx.dim(b);
            if entry.matrix.shape() != (d, d) {
                return invalid(format!(
                    "bispectrum for ({}, {}) has shape {:?}, expected {d}x{d}",
                    ctx.label(a),
                    ctx.label(b),
                    entry.matrix.shape()
                ));
            }
            if index.insert(entry.pair, e).is_some() {
                return invalid(format!("pair ({}, {}) listed twice", ctx.label(a), ctx.label(b)));
            }
        }
        Ok(BispectrumCoefficients { kind: ctx.kind().clone(), mode, entries, index })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    pub fn entries(&self) -> &[BispectrumEntry] {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&CMatrix> {
        self.index.get(&(a, b)).map(|&e| &self.entries[e].matrix)
    }

    pub fn require(&self, ctx: &GroupContext, a: usize, b: usize) -> Result<&CMatrix> {
        self.get(a, b).ok_or_else(|| {
            Error::IncompleteInput(format!("missing bispectral coefficient for ({}, {})", ctx.label(a), ctx.label(b)))
        })
    }

    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|e| e.matrix.len()).sum()
    }

    /// Flat real layout: pairs in order, each matrix row major, real part
    /// then imaginary part per entry.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.scalar_count());
        for e in &self.entries {
            let m = &e.matrix;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    out.push(m[(i, j)].re);
                    out.push(m[(i, j)].im);
                }
            }
        }
        out
    }

    pub(crate) fn check(&self, ctx: &GroupContext) -> Result<()> {
        if &self.kind != ctx.kind() {
            return invalid(format!("bispectrum belongs to {} but the group is {}", self.kind, ctx.kind()));
        }
        Ok(())
    }
}

fn check_coeffs(ctx: &GroupContext, f: &FourierCoefficients) -> Result<()> {
    if f.kind() != ctx.kind() {
        return invalid(format!("coefficients belong to {} but the group is {}", f.kind(), ctx.kind()));
    }
    Ok(())
}

/// Bispectral coefficient of one pair through its Clebsch-Gordan matrix.
pub fn bispectrum_entry(ctx: &GroupContext, f: &FourierCoefficients, a: usize, b: usize) -> Result<CMatrix> {
    check_coeffs(ctx, f)?;
    let cg = ctx.cg(a, b)?;
    let c = &cg.matrix;
    let inner = cg.block_sum(|k| f.get(k)).adjoint();
    Ok(kron(f.get(a), f.get(b)) * c * inner * c.adjoint())
}

/// Closed form for one-dimensional irreps.
pub fn commutative_entry(ctx: &GroupContext, f: &FourierCoefficients, a: usize, b: usize) -> Result<CMatrix> {
    check_coeffs(ctx, f)?;
    let dual = ctx
        .irreps()
        .dual()
        .ok_or_else(|| Error::InvalidParameter(format!("closed-form bispectrum needs an abelian group, got {}", ctx.kind())))?;
    let k = dual.product(a, b);
    Ok(scalar(f.get(a)[(0, 0)] * f.get(b)[(0, 0)] * f.get(k)[(0, 0)].conj()))
}

/// All `r^2` pairs through Clebsch-Gordan matrices.
pub fn full_bispectrum(ctx: &GroupContext, f: &FourierCoefficients) -> Result<BispectrumCoefficients> {
    let r = ctx.num_irreps();
    let mut entries = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            entries.push(BispectrumEntry { pair: (a, b), matrix: bispectrum_entry(ctx, f, a, b)? });
        }
    }
    BispectrumCoefficients::new(ctx, SpectrumMode::Full, entries)
}

/// All `|G|^2` pairs of an abelian group in closed form.
pub fn commutative_bispectrum(ctx: &GroupContext, f: &FourierCoefficients) -> Result<BispectrumCoefficients> {
    let r = ctx.num_irreps();
    let mut entries = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            entries.push(BispectrumEntry { pair: (a, b), matrix: commutative_entry(ctx, f, a, b)? });
        }
    }
    BispectrumCoefficients::new(ctx, SpectrumMode::Commutative, entries)
}

/// Only the pairs of `plan`.
pub fn selective_bispectrum(ctx: &GroupContext, f: &FourierCoefficients, plan: &SelectionPlan) -> Result<BispectrumCoefficients> {
    plan.check(ctx)?;
    let abelian = ctx.irreps().dual().is_some();
    let entries = plan
        .pairs
        .iter()
        .map(|&(a, b)| {
            let m = if abelian { commutative_entry(ctx, f, a, b)? } else { bispectrum_entry(ctx, f, a, b)? };
            Ok(BispectrumEntry { pair: (a, b), matrix: m })
        })
        .collect::<Result<Vec<_>>>()?;
    BispectrumCoefficients::new(ctx, SpectrumMode::Selective, entries)
}

/// `F_a F_b conj(F_{a+b})` for each pair, on flat abelian coefficients.
pub fn abelian_bispectrum_values(
    ctx: &GroupContext,
    f: &[C64],
    pairs: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Vec<C64>> {
    let Some(dual) = ctx.irreps().dual() else {
        return invalid(format!("closed-form bispectrum needs an abelian group, got {}", ctx.kind()));
    };
    if f.len() != ctx.num_irreps() {
        return Err(Error::IncompleteInput(format!("expected {} coefficients, got {}", ctx.num_irreps(), f.len())));
    }
    Ok(pairs.into_iter().map(|(a, b)| f[a] * f[b] * f[dual.product(a, b)].conj()).collect())
}

pub fn max_pool(signal: &GroupSignal) -> f64 {
    signal.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn avg_pool(signal: &GroupSignal) -> f64 {
    signal.values().iter().sum::<f64>() / signal.len() as f64
}

/// Ordered list of irrep pairs whose bispectra determine a generic signal up
/// to translation, with the irreps each pair makes recoverable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionPlan {
    pub kind: GroupKind,
    pub pairs: Vec<(usize, usize)>,
    pub seed: Option<usize>,
    /// Irreps in the order they become known.
    pub covered: Vec<usize>,
    /// Irreps first made available by each pair.
    pub unlocks: Vec<Vec<usize>>,
}

impl SelectionPlan {
    pub fn scalar_count(&self, ctx: &GroupContext) -> usize {
        self.pairs.iter().map(|&(a, b)| (ctx.dim(a) * ctx.dim(b)).pow(2)).sum()
    }

    pub fn labeled_pairs(&self, ctx: &GroupContext) -> Vec<(String, String)> {
        self.pairs.iter().map(|&(a, b)| (ctx.label(a).to_string(), ctx.label(b).to_string())).collect()
    }

    pub fn is_complete(&self, ctx: &GroupContext) -> bool {
        self.covered.len() == ctx.num_irreps()
    }

    fn check(&self, ctx: &GroupContext) -> Result<()> {
        if &self.kind != ctx.kind() {
            return invalid(format!("plan was built for {} but the group is {}", self.kind, ctx.kind()));
        }
        Ok(())
    }

    /// Rebuilds coverage information for an arbitrary pair list, in order.
    pub fn from_pairs(ctx: &GroupContext, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let kt = ctx.kronecker();
        let mut covered: Vec<usize> = Vec::new();
        let mut unlocks = Vec::new();
        for &(a, b) in &pairs {
            if a >= ctx.num_irreps() || b >= ctx.num_irreps() {
                return invalid(format!("pair ({a},{b}) out of range for {}", ctx.kind()));
            }
            let mut new = Vec::new();
            for k in std::iter::once(a).chain(std::iter::once(b)).chain(kt.products(a, b)) {
                if !covered.contains(&k) && !new.contains(&k) {
                    new.push(k);
                }
            }
            covered.extend(&new);
            unlocks.push(new);
        }
        Ok(SelectionPlan { kind: ctx.kind().clone(), pairs, seed: None, covered, unlocks })
    }
}

fn square_is_trivial(kt: &KroneckerTable, s: usize) -> bool {
    kt.products(s, s) == vec![0]
}

fn greedy_from_seed(ctx: &GroupContext, s: usize) -> SelectionPlan {
    let kt = ctx.kronecker();
    let r = kt.size();
    let mut covered = vec![0];
    let mut pairs = vec![(0, 0)];
    let mut unlocks = vec![vec![0]];
    if s != 0 {
        covered.push(s);
        pairs.push((0, s));
        unlocks.push(vec![s]);
    }
    loop {
        let mut sorted = covered.clone();
        sorted.sort_unstable();
        let mut next = None;
        'scan: for (p, &i) in sorted.iter().enumerate() {
            for &j in &sorted[p..] {
                let new: Vec<usize> = kt.products(i, j).into_iter().filter(|k| !covered.contains(k)).collect();
                if !new.is_empty() {
                    next = Some(((i, j), new));
                    break 'scan;
                }
            }
        }
        match next {
            Some((pair, new)) => {
                pairs.push(pair);
                covered.extend(&new);
                unlocks.push(new);
            }
            None => break,
        }
        if covered.len() == r {
            break;
        }
    }
    SelectionPlan { kind: ctx.kind().clone(), pairs, seed: Some(s), covered, unlocks }
}

/// Greedy selection over the Kronecker table. Without an explicit seed the
/// first non-trivial irrep (skipping 1-dimensional irreps whose square is
/// trivial) whose closure reaches every irrep is used. Pairs are added in
/// lexicographic order, each one unlocking at least one new irrep.
pub fn selection_plan(ctx: &GroupContext, seed: Option<usize>) -> Result<SelectionPlan> {
    let kt = ctx.kronecker();
    if !kt.is_binary() {
        return Err(Error::Unsupported(format!("{} has tensor products with multiplicity above one", ctx.kind())));
    }
    let r = kt.size();
    if r == 1 {
        return Ok(SelectionPlan {
            kind: ctx.kind().clone(),
            pairs: vec![(0, 0)],
            seed: None,
            covered: vec![0],
            unlocks: vec![vec![0]],
        });
    }
    let uncovered = |p: &SelectionPlan| -> Vec<String> {
        (0..r).filter(|k| !p.covered.contains(k)).map(|k| ctx.label(k).to_string()).collect()
    };
    if let Some(s) = seed {
        if s >= r {
            return invalid(format!("seed index {s} out of range"));
        }
        let p = greedy_from_seed(ctx, s);
        if p.covered.len() == r {
            return Ok(p);
        }
        return Err(Error::Incomplete { uncovered: uncovered(&p) });
    }
    let mut best: Option<SelectionPlan> = None;
    for s in 1..r {
        if ctx.dim(s) == 1 && square_is_trivial(kt, s) {
            continue;
        }
        let p = greedy_from_seed(ctx, s);
        if p.covered.len() == r {
            return Ok(p);
        }
        if best.as_ref().is_none_or(|b| p.covered.len() > b.covered.len()) {
            best = Some(p);
        }
    }
    let p = best.unwrap_or_else(|| greedy_from_seed(ctx, 0));
    Err(Error::Incomplete { uncovered: uncovered(&p) })
}

/// Axis-by-axis chain for an abelian group: `|G|` pairs.
fn abelian_plan(ctx: &GroupContext) -> Result<SelectionPlan> {
    let dual = ctx.irreps().dual().ok_or_else(|| Error::Internal("abelian plan without a dual".into()))?;
    let ns = &dual.ns;
    let idx = |c: &[usize]| dual.index_of(c);
    let mut pairs = vec![(0usize, 0usize)];
    for l in 0..ns.len() {
        let nl = ns[l];
        if nl == 1 {
            continue;
        }
        let unit = |t: usize| {
            let mut v = vec![0; ns.len()];
            v[l] = t;
            v
        };
        let e = idx(&unit(1));
        pairs.push((0, e));
        for t in 2..nl {
            pairs.push((e, idx(&unit(t - 1))));
        }
        let lower: Vec<usize> = dual
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().skip(l).all(|&x| x == 0) && c.iter().any(|&x| x != 0))
            .map(|(k, _)| k)
            .collect();
        for t in 1..nl {
            for &k in &lower {
                pairs.push((idx(&unit(t)), k));
            }
        }
    }
    SelectionPlan::from_pairs(ctx, pairs)
}

fn dihedral_plan(ctx: &GroupContext, n: usize) -> Result<SelectionPlan> {
    let irreps = ctx.irreps();
    let r1 = irreps.index_of("rho_1")?;
    let mut pairs = vec![(0, 0), (0, r1)];
    for k in 1..=(n - 1) / 2 {
        pairs.push((r1, irreps.index_of(&format!("rho_{k}"))?));
    }
    let mut plan = SelectionPlan::from_pairs(ctx, pairs)?;
    plan.seed = Some(r1);
    Ok(plan)
}

/// The plan used by the inversion routines of each family.
pub fn canonical_plan(ctx: &GroupContext) -> Result<SelectionPlan> {
    match ctx.kind() {
        _ if ctx.irreps().dual().is_some() => abelian_plan(ctx),
        GroupKind::Dihedral(n) => dihedral_plan(ctx, *n),
        _ => selection_plan(ctx, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(kind: GroupKind) -> std::sync::Arc<GroupContext> {
        GroupContext::get(&kind).unwrap()
    }

    #[test]
    fn abelian_plans_have_group_order_pairs() {
        for ns in [vec![1], vec![2], vec![7], vec![2, 2], vec![3, 4], vec![2, 3, 2], vec![1, 5]] {
            let c = ctx(GroupKind::Commutative(ns.clone()));
            let p = canonical_plan(&c).unwrap();
            assert_eq!(p.pairs.len(), c.order(), "{ns:?}");
            assert!(p.is_complete(&c), "{ns:?}");
            assert!(p.unlocks.iter().skip(1).all(|u| u.len() == 1), "{ns:?}");
        }
    }

    #[test]
    fn cyclic_plan_shape() {
        let c = ctx(GroupKind::Cyclic(6));
        let p = canonical_plan(&c).unwrap();
        assert_eq!(p.pairs, vec![(0, 0), (0, 1), (1, 1), (1, 2), (1, 3), (1, 4)]);
        let g = selection_plan(&c, None).unwrap();
        assert_eq!(g.pairs, p.pairs);
    }

    #[test]
    fn dihedral_plan_counts() {
        for n in 3..12 {
            let c = ctx(GroupKind::Dihedral(n));
            let p = canonical_plan(&c).unwrap();
            let k = (n - 1) / 2;
            assert_eq!(p.pairs.len(), k + 2);
            assert_eq!(p.scalar_count(&c), 1 + 4 + 16 * k);
            assert!(p.is_complete(&c));
        }
    }

    #[test]
    fn elementary_two_group_has_no_seed() {
        let c = ctx(GroupKind::Commutative(vec![2, 2]));
        assert!(matches!(selection_plan(&c, None), Err(Error::Incomplete { .. })));
    }

    #[test]
    fn bad_seed_reports_uncovered() {
        let c = ctx(GroupKind::FullOctahedral);
        match selection_plan(&c, Some(1)) {
            Err(Error::Incomplete { uncovered }) => assert!(uncovered.contains(&"rho_5".to_string())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pooling() {
        let s = GroupSignal::new(GroupKind::Cyclic(4), vec![1.0, 3.0, -2.0, 2.0]).unwrap();
        assert_eq!(max_pool(&s), 3.0);
        assert_eq!(avg_pool(&s), 1.0);
    }
}
