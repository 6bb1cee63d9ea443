//! Irreducible unitary representations, characters and the Kronecker
//! product table.
//!
//! Irreps are stored as one matrix per group element. Abelian groups also
//! carry their dual as a lattice (`AbelianDual`), so tensor products can be
//! read off by adding coordinates.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::group::{unflatten, FiniteGroup, GroupKind, IntMat3};
use crate::linalg::{c, cis, frob, scalar, to_complex, CMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct Irrep {
    label: String,
    dim: usize,
    images: Vec<CMatrix>,
}

impl Irrep {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, g: usize) -> &CMatrix {
        &self.images[g]
    }

    pub fn character(&self, g: usize) -> C64 {
        self.images[g].trace()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim == 1 && self.images.iter().all(|m| (m[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12)
    }
}

/// Dual of an abelian group as `Z/n_1 + ... + Z/n_L`. `coords[k]` is the
/// lattice point of irrep `k`; tensor products add coordinates.
#[derive(Clone, Debug)]
pub struct AbelianDual {
    pub ns: Vec<usize>,
    pub coords: Vec<Vec<usize>>,
    /// Irrep index of each lattice point, keyed by mixed radix (last axis fastest).
    slot: Vec<usize>,
}

impl AbelianDual {
    pub fn new(ns: Vec<usize>, coords: Vec<Vec<usize>>) -> Self {
        let mut slot = vec![usize::MAX; ns.iter().product()];
        for (k, c) in coords.iter().enumerate() {
            slot[radix(&ns, c.iter().copied())] = k;
        }
        debug_assert!(slot.iter().all(|&k| k != usize::MAX));
        AbelianDual { ns, coords, slot }
    }

    pub fn index_of(&self, coord: &[usize]) -> usize {
        self.slot[radix(&self.ns, coord.iter().copied())]
    }

    pub fn product(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.coords[i], &self.coords[j]);
        self.slot[radix(&self.ns, (0..self.ns.len()).map(|l| (a[l] + b[l]) % self.ns[l]))]
    }

    pub fn negate(&self, i: usize) -> usize {
        let a = &self.coords[i];
        self.slot[radix(&self.ns, (0..self.ns.len()).map(|l| (self.ns[l] - a[l]) % self.ns[l]))]
    }
}

fn radix(ns: &[usize], coord: impl Iterator<Item = usize>) -> usize {
    coord.zip(ns).fold(0, |acc, (c, n)| acc * n + c)
}

#[derive(Clone, Debug)]
pub struct IrrepSet {
    kind: GroupKind,
    irreps: Vec<Irrep>,
    dual: Option<AbelianDual>,
}

impl IrrepSet {
    /// The complete, ordered set of irreps of `group`.
    pub fn new(group: &FiniteGroup) -> Result<Self> {
        let set = match group.kind().clone() {
            GroupKind::Cyclic(n) => abelian(group, &[n]),
            GroupKind::Commutative(ns) => abelian(group, &ns),
            GroupKind::Dihedral(n) if n <= 2 => dihedral_small(group, n),
            GroupKind::Dihedral(n) => dihedral(group, n),
            GroupKind::Octahedral => octahedral(group, false)?,
            GroupKind::FullOctahedral => octahedral(group, true)?,
        };
        let total: usize = set.irreps.iter().map(|r| r.dim * r.dim).sum();
        if total != group.order() {
            return Err(Error::Construction(format!("irrep dimensions square-sum to {total}, expected {}", group.order())));
        }
        Ok(set)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn get(&self, i: usize) -> &Irrep {
        &self.irreps[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Irrep> {
        self.irreps.iter()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(|r| r.dim).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.irreps.iter().map(|r| r.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.irreps
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::InvalidParameter(format!("no irrep labelled '{label}' on {}", self.kind)))
    }

    pub fn dual(&self) -> Option<&AbelianDual> {
        self.dual.as_ref()
    }

    /// Largest deviation from `rho(g) rho(h) = rho(gh)` over all pairs.
    pub fn homomorphism_error(&self, group: &FiniteGroup) -> f64 {
        let n = group.order();
        let mut worst: f64 = 0.0;
        for r in &self.irreps {
            for a in 0..n {
                for b in 0..n {
                    let d = frob(&(&r.images[a] * &r.images[b] - &r.images[group.mul(a, b)]));
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    pub fn unitarity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.irreps {
            let id = CMatrix::identity(r.dim, r.dim);
            for m in &r.images {
                worst = worst.max(frob(&(m * m.adjoint() - &id)));
            }
        }
        worst
    }
}

fn abelian(group: &FiniteGroup, ns: &[usize]) -> IrrepSet {
    let n = group.order();
    let coords: Vec<Vec<usize>> = (0..n).map(|k| unflatten(k, ns)).collect();
    let irreps = coords
        .iter()
        .map(|k| {
            let label = if ns.len() == 1 {
                format!("rho_{}", k[0])
            } else {
                let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
                format!("rho_{}", parts.join("_"))
            };
            let images = (0..n)
                .map(|g| {
                    let gc = unflatten(g, ns);
                    let phase: f64 = k.iter().zip(&gc).zip(ns).map(|((a, b), m)| ((a * b) % m) as f64 / *m as f64).sum();
                    scalar(cis(2.0 * PI * phase))
                })
                .collect();
            Irrep { label, dim: 1, images }
        })
        .collect();
    IrrepSet { kind: group.kind().clone(), irreps, dual: Some(AbelianDual::new(ns.to_vec(), coords)) }
}

fn sign_irrep(label: &str, group: &FiniteGroup, f: impl Fn(usize) -> bool) -> Irrep {
    Irrep {
        label: label.to_string(),
        dim: 1,
        images: (0..group.order()).map(|g| scalar(c(if f(g) { -1.0 } else { 1.0 }, 0.0))).collect(),
    }
}

fn dihedral_small(group: &FiniteGroup, n: usize) -> IrrepSet {
    let m = |g: usize| g / n;
    let l = |g: usize| g % n;
    let mut irreps = vec![sign_irrep("rho_0", group, |_| false), sign_irrep("rho_01", group, |g| m(g) == 1)];
    let dual = if n == 1 {
        AbelianDual::new(vec![2], vec![vec![0], vec![1]])
    } else {
        irreps.push(sign_irrep("rho_02", group, |g| l(g) == 1));
        irreps.push(sign_irrep("rho_03", group, |g| (l(g) + m(g)) % 2 == 1));
        AbelianDual::new(vec![2, 2], vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]])
    };
    IrrepSet { kind: group.kind().clone(), irreps, dual: Some(dual) }
}

/// `R(theta) S^m` as a complex 2x2 matrix, with `S = diag(1, -1)`.
pub(crate) fn rot_ref(theta: f64, m: usize) -> CMatrix {
    let (s, co) = theta.sin_cos();
    let sg = if m == 1 { -1.0 } else { 1.0 };
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s * sg, 0.0), c(s, 0.0), c(co * sg, 0.0)])
}

fn dihedral(group: &FiniteGroup, n: usize) -> IrrepSet {
    let m = |g: usize| g / n;
    let l = |g: usize| g % n;
    let mut irreps = vec![sign_irrep("rho_0", group, |_| false), sign_irrep("rho_01", group, |g| m(g) == 1)];
    if n.is_multiple_of(2) {
        irreps.push(sign_irrep("rho_02", group, |g| l(g) % 2 == 1));
        irreps.push(sign_irrep("rho_03", group, |g| (l(g) + m(g)) % 2 == 1));
    }
    for k in 1..=(n - 1) / 2 {
        let images = (0..2 * n).map(|g| rot_ref(2.0 * PI * (k * l(g)) as f64 / n as f64, m(g))).collect();
        irreps.push(Irrep { label: format!("rho_{k}"), dim: 2, images });
    }
    IrrepSet { kind: group.kind().clone(), irreps, dual: None }
}

fn int_to_real(m: &IntMat3) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| m[i][j] as f64)
}

/// Images of the two rotation generators (quarter turn about z, third turn
/// about the diagonal) under A1, T1, T2, E, A2.
fn octahedral_generator_images() -> Vec<[DMatrix<f64>; 2]> {
    use crate::group::{QUARTER_Z, THIRD_DIAG};
    let h = 3f64.sqrt() / 2.0;
    let one = DMatrix::from_element(1, 1, 1.0);
    let a = int_to_real(&QUARTER_Z);
    let b = int_to_real(&THIRD_DIAG);
    vec![
        [one.clone(), one.clone()],
        [a.clone(), b.clone()],
        [-a, b],
        [DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]), DMatrix::from_row_slice(2, 2, &[-0.5, -h, h, -0.5])],
        [-one.clone(), one],
    ]
}

fn octahedral(group: &FiniteGroup, full: bool) -> Result<IrrepSet> {
    let base = octahedral_generator_images();
    let mut gen_images: Vec<Vec<DMatrix<f64>>> = Vec::new();
    for parity in if full { vec![1.0, -1.0] } else { vec![1.0] } {
        for imgs in &base {
            let d = imgs[0].nrows();
            let mut v = vec![imgs[0].clone(), imgs[1].clone()];
            if full {
                v.push(DMatrix::identity(d, d) * parity);
            }
            gen_images.push(v);
        }
    }
    let n = group.order();
    let mut irreps = Vec::new();
    for (k, gens) in gen_images.iter().enumerate() {
        let d = gens[0].nrows();
        let mut images: Vec<DMatrix<f64>> = vec![DMatrix::identity(d, d); n];
        for g in 1..n {
            let (parent, gi) = group.word(g).ok_or_else(|| Error::Internal("matrix group without words".into()))?;
            images[g] = &images[parent] * &gens[gi];
        }
        irreps.push(Irrep { label: format!("rho_{k}"), dim: d, images: images.iter().map(to_complex).collect() });
    }
    let set = IrrepSet { kind: group.kind().clone(), irreps, dual: None };
    let err = set.homomorphism_error(group);
    if err > 1e-10 {
        return Err(Error::Construction(format!("octahedral generator images violate the group relations (error {err:.3e})")));
    }
    Ok(set)
}

/// `chi[k][g]` for every irrep `k` and element `g`.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    values: Vec<Vec<C64>>,
}

impl CharacterTable {
    pub fn new(group: &FiniteGroup, irreps: &IrrepSet) -> Self {
        let values = irreps.iter().map(|r| (0..group.order()).map(|g| r.character(g)).collect()).collect();
        CharacterTable { values }
    }

    pub fn get(&self, k: usize, g: usize) -> C64 {
        self.values[k][g]
    }

    pub fn row(&self, k: usize) -> &[C64] {
        &self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest deviation of `<chi_i, chi_j>` from the identity matrix.
    pub fn orthogonality_error(&self) -> f64 {
        let r = self.values.len();
        let n = self.values.first().map_or(1, |v| v.len()) as f64;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let ip: C64 = self.values[i].iter().zip(&self.values[j]).map(|(a, b)| a * b.conj()).sum::<C64>() / n;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - c(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Multiplicities `m[i][j][k]` of irrep `k` in `rho_i (x) rho_j`, stored
/// sparsely per pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KroneckerTable {
    r: usize,
    /// Entries of pair `(i, j)` live at `offsets[i r + j]..offsets[i r + j + 1]`.
    offsets: Vec<usize>,
    entries: Vec<(usize, u32)>,
}

impl KroneckerTable {
    fn build(r: usize, mut row: impl FnMut(usize, usize, &mut Vec<(usize, u32)>) -> Result<()>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(r * r + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for i in 0..r {
            for j in 0..r {
                row(i, j, &mut entries)?;
                offsets.push(entries.len());
            }
        }
        Ok(KroneckerTable { r, offsets, entries })
    }

    /// Multiplicities from character inner products, rounded to integers.
    pub fn from_characters(chars: &CharacterTable) -> Result<Self> {
        let r = chars.len();
        let n = chars.row(0).len();
        let mut prod = vec![ZERO; n];
        Self::build(r, |i, j, out| {
            for (g, p) in prod.iter_mut().enumerate() {
                *p = chars.get(i, g) * chars.get(j, g);
            }
            for k in 0..r {
                let ip: C64 = prod.iter().zip(chars.row(k)).map(|(a, b)| a * b.conj()).sum::<C64>() / n as f64;
                let m = ip.re.round();
                if (ip - c(m, 0.0)).norm() > 1e-6 || m < 0.0 {
                    return Err(Error::NumericalConsistency(format!(
                        "character inner product for ({i},{j},{k}) is {ip}, not a non-negative integer"
                    )));
                }
                if m > 0.0 {
                    out.push((k, m as u32));
                }
            }
            Ok(())
        })
    }

    /// Multiplicities of an abelian group read off its dual lattice.
    pub fn from_dual(dual: &AbelianDual) -> Self {
        Self::build(dual.coords.len(), |i, j, out| {
            out.push((dual.product(i, j), 1));
            Ok(())
        })
        .expect("dual products never fail")
    }

    pub fn size(&self) -> usize {
        self.r
    }

    fn pair(&self, i: usize, j: usize) -> &[(usize, u32)] {
        let p = i * self.r + j;
        &self.entries[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn mult(&self, i: usize, j: usize, k: usize) -> u32 {
        self.pair(i, j).iter().find(|e| e.0 == k).map_or(0, |e| e.1)
    }

    /// Irreps occurring in `rho_i (x) rho_j`, in irrep order.
    pub fn products(&self, i: usize, j: usize) -> Vec<usize> {
        self.pair(i, j).iter().map(|e| e.0).collect()
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|e| e.1 <= 1)
    }

    /// Row `i` as one bit string per column, bit `k` set when `rho_k` occurs.
    pub fn row_words(&self, i: usize) -> Vec<String> {
        (0..self.r).map(|j| (0..self.r).map(|k| if self.mult(i, j, k) > 0 { '1' } else { '0' }).collect()).collect()
    }
}
