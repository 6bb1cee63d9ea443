//! Clebsch-Gordan matrices: unitary `C` with
//! `(rho_i (x) rho_j)(g) = C [ (+)_k rho_k(g) ] C^H` for every `g`.
//!
//! Blocks are laid out in Kronecker-table order. Multiplicities above one
//! are rejected. Dihedral 2x2 pairs go through a real Schur decomposition of
//! the rotation generator; everything else uses projection operators.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};

use crate::context::GroupContext;
use crate::error::{Error, Result};
use crate::group::GroupKind;
use crate::linalg::{c, columns_to_matrix, direct_sum, frob, kron, mgs, to_complex, CMatrix, CVector};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const BLOCK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CgDecomposition {
    pub pair: (usize, usize),
    /// Irrep index of each diagonal block, in order.
    pub blocks: Vec<usize>,
    pub matrix: CMatrix,
}

impl CgDecomposition {
    /// Block-diagonal matrix built from one matrix per block irrep.
    pub fn block_sum<'a>(&self, f: impl Fn(usize) -> &'a CMatrix) -> CMatrix {
        let mats: Vec<&CMatrix> = self.blocks.iter().map(|&k| f(k)).collect();
        direct_sum(mats)
    }

    /// Row/column offset of each block.
    pub fn offsets(&self, ctx: &GroupContext) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut o = 0;
        for &k in &self.blocks {
            out.push(o);
            o += ctx.dim(k);
        }
        out
    }
}

/// Residuals of the contract: `(|C^H C - I|, max_g |C^H T(g) C - (+)rho(g)|)`.
pub fn verify(ctx: &GroupContext, cg: &CgDecomposition) -> (f64, f64) {
    let (i, j) = cg.pair;
    let cm = &cg.matrix;
    let dim = cm.nrows();
    let unit = frob(&(cm.adjoint() * cm - CMatrix::identity(dim, dim)));
    let mut worst: f64 = 0.0;
    for g in 0..ctx.order() {
        let t = kron(ctx.irreps().get(i).image(g), ctx.irreps().get(j).image(g));
        let lhs = cm.adjoint() * t * cm;
        let rhs = cg.block_sum(|k| ctx.irreps().get(k).image(g));
        worst = worst.max(frob(&(lhs - rhs)));
    }
    (unit, worst)
}

fn check(ctx: &GroupContext, cg: CgDecomposition) -> Result<CgDecomposition> {
    let (u, b) = verify(ctx, &cg);
    if u > UNITARITY_TOL || b > BLOCK_TOL {
        return Err(Error::NumericalConsistency(format!(
            "Clebsch-Gordan matrix for ({}, {}) on {}: unitarity {u:.3e}, block residual {b:.3e}",
            ctx.label(cg.pair.0),
            ctx.label(cg.pair.1),
            ctx.kind()
        )));
    }
    Ok(cg)
}

fn multiplicity_free(ctx: &GroupContext, i: usize, j: usize) -> Result<Vec<usize>> {
    let kt = ctx.kronecker();
    let ks = kt.products(i, j);
    if let Some(&k) = ks.iter().find(|&&k| kt.mult(i, j, k) > 1) {
        return Err(Error::Unsupported(format!(
            "{} occurs {} times in {} (x) {}; only multiplicity-free products are supported",
            ctx.label(k),
            kt.mult(i, j, k),
            ctx.label(i),
            ctx.label(j)
        )));
    }
    Ok(ks)
}

/// Decomposition of `rho_i (x) rho_j`, dispatching on the group family.
pub fn build(ctx: &GroupContext, i: usize, j: usize) -> Result<CgDecomposition> {
    match ctx.kind() {
        GroupKind::Dihedral(n) if *n > 2 && ctx.dim(i) == 2 && ctx.dim(j) == 2 => cg_dihedral_real(ctx, i, j),
        _ => cg_general(ctx, i, j),
    }
}

/// Projection-operator construction, valid for any group.
pub fn cg_general(ctx: &GroupContext, i: usize, j: usize) -> Result<CgDecomposition> {
    let ks = multiplicity_free(ctx, i, j)?;
    let dim = ctx.dim(i) * ctx.dim(j);
    if dim == 1 {
        return Ok(CgDecomposition { pair: (i, j), blocks: ks, matrix: CMatrix::identity(1, 1) });
    }
    let n = ctx.order();
    let irreps = ctx.irreps();
    let tg: Vec<CMatrix> = (0..n).map(|g| kron(irreps.get(i).image(g), irreps.get(j).image(g))).collect();
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    for &k in &ks {
        let rk = irreps.get(k);
        let dk = rk.dim();
        let scale = dk as f64 / n as f64;
        let mut pk = CMatrix::zeros(dim, dim);
        for (g, t) in tg.iter().enumerate() {
            pk += t * (rk.character(g).conj() * scale);
        }
        let rank = pk.clone().svd(false, false).singular_values.iter().filter(|s| **s > 0.5).count();
        if rank != dk {
            return Err(Error::NumericalConsistency(format!(
                "isotypic projector for {} in {} (x) {} has rank {rank}, expected {dk}",
                ctx.label(k),
                ctx.label(i),
                ctx.label(j)
            )));
        }
        // P_{a0} maps the first basis vector of the copy to the a-th.
        let p_a0: Vec<CMatrix> = (0..dk)
            .map(|a| {
                let mut p = CMatrix::zeros(dim, dim);
                for (g, t) in tg.iter().enumerate() {
                    p += t * (rk.image(g)[(a, 0)].conj() * scale);
                }
                p
            })
            .collect();
        let mut best = 0;
        let mut best_norm = -1.0;
        for col in 0..dim {
            let nrm = p_a0[0].column(col).norm();
            if nrm > best_norm + 1e-12 {
                best = col;
                best_norm = nrm;
            }
        }
        if best_norm < 1e-8 {
            return Err(Error::NumericalConsistency(format!("empty projector for {}", ctx.label(k))));
        }
        let v: CVector = p_a0[0].column(best).into_owned();
        let c1 = &p_a0[0] * &v;
        let c1 = &c1 / c(c1.norm(), 0.0);
        for p in &p_a0 {
            cols.push(p * &c1);
        }
    }
    let ortho = mgs(&cols, 1e-8);
    let cols: Option<Vec<CVector>> = ortho.into_iter().collect();
    let cols = cols.ok_or_else(|| Error::NumericalConsistency("Clebsch-Gordan columns are linearly dependent".into()))?;
    if cols.len() != dim {
        return Err(Error::NumericalConsistency(format!("found {} columns, expected {dim}", cols.len())));
    }
    check(ctx, CgDecomposition { pair: (i, j), blocks: ks, matrix: columns_to_matrix(&cols, dim) })
}

fn real(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Real orthogonal decomposition of a product of two 2-dimensional dihedral
/// irreps, read off the real Schur form of the rotation generator and then
/// aligned with the reflection generator.
pub fn cg_dihedral_real(ctx: &GroupContext, i: usize, j: usize) -> Result<CgDecomposition> {
    let n = match ctx.kind() {
        GroupKind::Dihedral(n) if *n > 2 => *n,
        other => return Err(Error::InvalidParameter(format!("real dihedral decomposition needs dihedral n>2, got {other}"))),
    };
    if ctx.dim(i) != 2 || ctx.dim(j) != 2 {
        return Err(Error::InvalidParameter("real dihedral decomposition needs two 2-dimensional irreps".into()));
    }
    let ks = multiplicity_free(ctx, i, j)?;
    let irreps = ctx.irreps();
    let (a, x) = (1usize, n);
    let ta = real(&kron(irreps.get(i).image(a), irreps.get(j).image(a)));
    let tx = real(&kron(irreps.get(i).image(x), irreps.get(j).image(x)));
    let schur = Schur::try_new(ta.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalConsistency("real Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut found: Vec<(usize, Vec<DVector<f64>>)> = Vec::new();
    let mut plus: Vec<DVector<f64>> = Vec::new();
    let mut minus: Vec<DVector<f64>> = Vec::new();
    let mut col = 0;
    while col < 4 {
        if col + 1 < 4 && t[(col + 1, col)].abs() > 1e-8 {
            let mut v1 = q.column(col).into_owned();
            let mut v2 = q.column(col + 1).into_owned();
            if t[(col + 1, col)] < 0.0 {
                std::mem::swap(&mut v1, &mut v2);
            }
            // Rotate within the plane so x acts as diag(1, -1).
            let m11 = v1.dot(&(&tx * &v1));
            let m12 = v1.dot(&(&tx * &v2));
            let alpha = 0.5 * m12.atan2(m11);
            let (s, co) = alpha.sin_cos();
            let w1 = &v1 * co + &v2 * s;
            let w2 = &v2 * co - &v1 * s;
            let cos_t = w1.dot(&(&ta * &w1));
            let sin_t = w2.dot(&(&ta * &w1));
            let theta = sin_t.atan2(cos_t);
            let k = (theta * n as f64 / (2.0 * PI)).round() as i64;
            if k < 1 || 2 * k >= n as i64 || (theta - 2.0 * PI * k as f64 / n as f64).abs() > 1e-8 {
                return Err(Error::NumericalConsistency(format!(
                    "rotation block with angle {theta} matches no 2-dimensional irrep of D_{n}"
                )));
            }
            let idx = irreps.index_of(&format!("rho_{k}"))?;
            found.push((idx, vec![w1, w2]));
            col += 2;
        } else {
            let lam = t[(col, col)];
            let v = q.column(col).into_owned();
            if (lam - 1.0).abs() < 1e-8 {
                plus.push(v);
            } else if (lam + 1.0).abs() < 1e-8 {
                minus.push(v);
            } else {
                return Err(Error::NumericalConsistency(format!("real eigenvalue {lam} of an orthogonal rotation image")));
            }
            col += 1;
        }
    }
    for (space, a_sign) in [(plus, 1), (minus, -1)] {
        if space.is_empty() {
            continue;
        }
        let p = space.len();
        let v = DMatrix::from_columns(&space);
        let mx = v.transpose() * &tx * &v;
        let eig = nalgebra::SymmetricEigen::new(mx);
        for e in 0..p {
            let x_sign = if eig.eigenvalues[e] > 0.0 { 1 } else { -1 };
            let label = match (a_sign, x_sign) {
                (1, 1) => "rho_0",
                (1, _) => "rho_01",
                (_, 1) => "rho_02",
                _ => "rho_03",
            };
            let w = &v * eig.eigenvectors.column(e);
            found.push((irreps.index_of(label)?, vec![w]));
        }
    }
    found.sort_by_key(|(k, _)| *k);
    let blocks: Vec<usize> = found.iter().map(|(k, _)| *k).collect();
    if blocks != ks {
        return Err(Error::NumericalConsistency(format!(
            "real Schur blocks {blocks:?} disagree with the Kronecker table {ks:?}"
        )));
    }
    let cols: Vec<DVector<f64>> = found.into_iter().flat_map(|(_, v)| v).collect();
    let m = to_complex(&DMatrix::from_columns(&cols));
    check(ctx, CgDecomposition { pair: (i, j), blocks, matrix: m })
}
