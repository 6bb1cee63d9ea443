//! Recovery of a signal, up to translation, from its selective bispectrum.
//!
//! Abelian groups walk the lattice chain of the canonical plan and then fix
//! the leftover phase per axis so the result is real. Dihedral and
//! octahedral groups walk the same kind of chain with matrices: the seed
//! coefficient is only known up to an orthogonal factor `U`, which is found
//! by a grid search plus Levenberg-Marquardt refinement on the consistency
//! residual of the remaining pairs.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::GroupContext;
use crate::error::{invalid, Error, Result};
use crate::fourier::{igft, igft_real, FourierCoefficients};
use crate::group::{GroupKind, GroupSignal};
use crate::linalg::{c, cis, scalar, to_complex, CMatrix, C64};
use crate::representations::AbelianDual;
use crate::spectra::{canonical_plan, BispectrumCoefficients, SelectionPlan};

/// Coefficients smaller than this fraction of the overall scale count as zero.
pub const NONGENERIC_REL: f64 = 1e-12;
/// Largest acceptable product of condition numbers along the chain.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative imaginary norm tolerated in the reconstructed signal.
pub const REAL_TOL: f64 = 1e-8;
/// Relative squared consistency residual below which the orthogonal factor
/// counts as resolved.
pub const RESOLVED_TOL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Indeterminacy {
    ResolvedToReal,
    UnresolvedUnitary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InversionStep {
    pub pair: (String, String),
    pub recovered: Vec<String>,
    /// Product of the condition numbers of the two known factors.
    pub condition: f64,
}

#[derive(Clone, Debug)]
pub struct InversionResult {
    pub fourier: FourierCoefficients,
    pub signal: Option<GroupSignal>,
    pub indeterminacy: Indeterminacy,
    /// Largest imaginary part of the inverse transform before truncation.
    pub residual_imag: f64,
    /// Relative squared mismatch between the plan's bispectra and the
    /// recovered coefficients.
    pub consistency_residual: f64,
    pub steps: Vec<InversionStep>,
}

/// Inverts with the routine appropriate for the group.
pub fn invert(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    match ctx.kind() {
        GroupKind::Cyclic(_) => invert_cyclic(ctx, beta),
        _ if ctx.irreps().dual().is_some() => invert_commutative(ctx, beta),
        GroupKind::Dihedral(_) => invert_dihedral(ctx, beta),
        GroupKind::Octahedral | GroupKind::FullOctahedral => invert_octahedral(ctx, beta),
        other => Err(Error::Unsupported(format!("no inversion routine for {other}"))),
    }
}

pub fn invert_cyclic(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    if !matches!(ctx.kind(), GroupKind::Cyclic(_)) {
        return invalid(format!("invert_cyclic needs a cyclic group, got {}", ctx.kind()));
    }
    invert_commutative(ctx, beta)
}

fn real_cbrt_keep_phase(z: C64) -> C64 {
    C64::from_polar(z.norm().cbrt(), z.arg())
}

/// Scale used to decide when a coefficient is numerically zero.
fn plan_scale(beta: &BispectrumCoefficients, ctx: &GroupContext, plan: &SelectionPlan) -> Result<f64> {
    let mut s: f64 = 0.0;
    for &(a, b) in &plan.pairs {
        let m = beta.require(ctx, a, b)?;
        let nrm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() {
            return invalid(format!("non-finite bispectrum for ({}, {})", ctx.label(a), ctx.label(b)));
        }
        s = s.max(nrm.cbrt());
    }
    Ok(s)
}

pub fn invert_commutative(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    beta.check(ctx)?;
    let dual = ctx
        .irreps()
        .dual()
        .ok_or_else(|| Error::InvalidParameter(format!("invert_commutative needs an abelian group, got {}", ctx.kind())))?
        .clone();
    let plan = canonical_plan(ctx)?;
    let scale = plan_scale(beta, ctx, &plan)?;
    let tiny = NONGENERIC_REL * scale.max(f64::MIN_POSITIVE);
    let r = ctx.num_irreps();
    let mut f: Vec<Option<C64>> = vec![None; r];
    let mut steps = Vec::with_capacity(plan.pairs.len());
    let get = |a: usize, b: usize| -> Result<C64> { Ok(beta.require(ctx, a, b)?[(0, 0)]) };

    let f0 = real_cbrt_keep_phase(get(0, 0)?);
    if f0.norm() <= tiny {
        return Err(Error::NonGeneric(format!("{} coefficient vanishes", ctx.label(0))));
    }
    f[0] = Some(f0);
    steps.push(step(ctx, (0, 0), &[0], 1.0));
    for (p, &(a, b)) in plan.pairs.iter().enumerate().skip(1) {
        let target = plan.unlocks[p][0];
        let value = if a == 0 {
            let m = (get(a, b)? / f0).norm().sqrt();
            c(m, 0.0)
        } else {
            let fa = f[a].ok_or_else(|| Error::Internal("chain uses an unknown coefficient".into()))?;
            let fb = f[b].ok_or_else(|| Error::Internal("chain uses an unknown coefficient".into()))?;
            (get(a, b)? / (fa * fb)).conj()
        };
        if value.norm() <= tiny || !value.is_finite() {
            return Err(Error::NonGeneric(format!(
                "{} vanishes, so the chain through ({}, {}) breaks",
                ctx.label(target),
                ctx.label(a),
                ctx.label(b)
            )));
        }
        f[target] = Some(value);
        steps.push(step(ctx, (a, b), &[target], 1.0));
    }
    let mut f: Vec<C64> = f.into_iter().map(|v| v.expect("plan covers every irrep")).collect();
    fix_phase_axes(&dual, &mut f);
    let fourier = FourierCoefficients::new(ctx, f.iter().map(|z| scalar(*z)).collect())?;
    let consistency = abelian_consistency(ctx, beta, &plan, &f)?;
    let residual_imag = max_imag(&igft(ctx, &fourier)?);
    let signal = igft_real(ctx, &fourier, REAL_TOL)?;
    Ok(InversionResult {
        fourier,
        signal: Some(signal),
        indeterminacy: Indeterminacy::ResolvedToReal,
        residual_imag,
        consistency_residual: consistency,
        steps,
    })
}

fn abelian_consistency(ctx: &GroupContext, beta: &BispectrumCoefficients, plan: &SelectionPlan, f: &[C64]) -> Result<f64> {
    let dual = ctx.irreps().dual().expect("abelian");
    let (mut num, mut den) = (0.0, 0.0);
    for &(a, b) in &plan.pairs {
        let want = beta.require(ctx, a, b)?[(0, 0)];
        let got = f[a] * f[b] * f[dual.product(a, b)].conj();
        num += (want - got).norm_sqr();
        den += want.norm_sqr();
    }
    Ok(num / den.max(f64::MIN_POSITIVE))
}

fn max_imag(z: &[C64]) -> f64 {
    z.iter().fold(0.0, |a, v| a.max(v.im.abs()))
}

/// The chain leaves `F_k` off by a character `exp(-i sum_l psi_l k_l)`.
/// Conjugate symmetry `F_{-e} = conj(F_e)` pins each `psi_l` up to a
/// multiple of `2 pi / n_l`, i.e. up to a translation. Returns the phases.
fn fix_phase_axes(dual: &AbelianDual, f: &mut [C64]) -> Vec<f64> {
    let mut phases = Vec::with_capacity(dual.ns.len());
    for (l, &nl) in dual.ns.iter().enumerate() {
        if nl <= 1 {
            phases.push(0.0);
            continue;
        }
        let mut e = vec![0; dual.ns.len()];
        e[l] = 1;
        let ie = dual.index_of(&e);
        e[l] = nl - 1;
        let im = dual.index_of(&e);
        let z = f[im].conj() / f[ie];
        let phi = (z.arg() / nl as f64).rem_euclid(2.0 * PI / nl as f64);
        for (k, v) in f.iter_mut().enumerate() {
            *v *= cis(phi * dual.coords[k][l] as f64);
        }
        phases.push(phi);
    }
    phases
}

/// Finds `phi` in `[0, 2 pi / n)` such that `F_k exp(i phi k)` is the
/// transform of a real signal, and applies it.
pub fn fix_phase_cyclic(ctx: &GroupContext, f: &FourierCoefficients) -> Result<(f64, FourierCoefficients)> {
    if !matches!(ctx.kind(), GroupKind::Cyclic(_)) {
        return invalid(format!("fix_phase_cyclic needs a cyclic group, got {}", ctx.kind()));
    }
    let dual = ctx.irreps().dual().expect("cyclic groups carry a dual");
    let mut v: Vec<C64> = f.coeffs().iter().map(|m| m[(0, 0)]).collect();
    let phi = fix_phase_axes(dual, &mut v)[0];
    let fixed = FourierCoefficients::new(ctx, v.into_iter().map(scalar).collect())?;
    igft_real(ctx, &fixed, REAL_TOL)?;
    Ok((phi, fixed))
}

fn step(ctx: &GroupContext, pair: (usize, usize), rec: &[usize], condition: f64) -> InversionStep {
    InversionStep {
        pair: (ctx.label(pair.0).to_string(), ctx.label(pair.1).to_string()),
        recovered: rec.iter().map(|&k| ctx.label(k).to_string()).collect(),
        condition,
    }
}

pub fn invert_dihedral(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    match ctx.kind() {
        GroupKind::Dihedral(n) if *n <= 2 => invert_commutative(ctx, beta),
        GroupKind::Dihedral(_) => invert_matrix(ctx, beta),
        other => invalid(format!("invert_dihedral needs a dihedral group, got {other}")),
    }
}

pub fn invert_octahedral(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    match ctx.kind() {
        GroupKind::Octahedral | GroupKind::FullOctahedral => invert_matrix(ctx, beta),
        other => invalid(format!("invert_octahedral needs an octahedral group, got {other}")),
    }
}

type RMat = DMatrix<f64>;

struct ChainPair {
    a: usize,
    b: usize,
    c: RMat,
    beta: RMat,
    blocks: Vec<(usize, usize, usize)>,
}

/// The matrix chain with every input reduced to real arithmetic.
struct Chain {
    r: usize,
    f0: f64,
    tiny: f64,
    seed: usize,
    p_seed: RMat,
    pairs: Vec<ChainPair>,
}

struct ChainRun {
    coeffs: Vec<Option<RMat>>,
    residual: f64,
    m_norm: f64,
    conditions: Vec<f64>,
}

fn real_part(m: &CMatrix, what: &str, tol: f64) -> Result<RMat> {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
    if m.iter().any(|z| z.im.abs() > tol * scale) {
        return Err(Error::InconsistentInput(format!(
            "{what} has an imaginary part; real irreps of a real signal give real values"
        )));
    }
    Ok(m.map(|z| z.re))
}

fn cond_real(m: &RMat) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    let max = s.max();
    let min = s.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl Chain {
    fn new(ctx: &GroupContext, beta: &BispectrumCoefficients, plan: &SelectionPlan) -> Result<Self> {
        if plan.pairs.len() < 2 || plan.pairs[0] != (0, 0) || plan.pairs[1].0 != 0 {
            return Err(Error::Internal("matrix chain needs a plan starting (0,0), (0,seed)".into()));
        }
        let scale = plan_scale(beta, ctx, plan)?;
        let tiny = NONGENERIC_REL * scale.max(f64::MIN_POSITIVE);
        let b00 = real_part(beta.require(ctx, 0, 0)?, "the trivial bispectrum", 1e-9)?[(0, 0)];
        let f0 = b00.cbrt();
        if f0.abs() <= tiny {
            return Err(Error::NonGeneric(format!("{} coefficient vanishes", ctx.label(0))));
        }
        let seed = plan.pairs[1].1;
        let d = ctx.dim(seed);
        if !(2..=3).contains(&d) {
            return Err(Error::Unsupported(format!("seed of dimension {d}; only 2 and 3 are handled")));
        }
        let b0s = real_part(beta.require(ctx, 0, seed)?, "the seed bispectrum", 1e-9)?;
        let gram = (&b0s + b0s.transpose()) * (0.5 / f0);
        let eig = gram.clone().symmetric_eigen();
        let gram_scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let mut lam = Vec::with_capacity(d);
        for &l in eig.eigenvalues.iter() {
            if l < -1e-10 * gram_scale {
                return Err(Error::InconsistentInput(format!(
                    "seed Gram matrix has negative eigenvalue {l:.3e}; the bispectrum cannot come from a real signal"
                )));
            }
            lam.push(l.max(0.0).sqrt());
        }
        let v = &eig.eigenvectors;
        let p_seed = v * RMat::from_diagonal(&nalgebra::DVector::from_vec(lam)) * v.transpose();
        let mut pairs = Vec::new();
        for &(a, b) in plan.pairs.iter().skip(2) {
            let cg = ctx.cg(a, b)?;
            let cr = real_part(&cg.matrix, "a Clebsch-Gordan matrix", 1e-12)?;
            let br = real_part(beta.require(ctx, a, b)?, "a bispectral coefficient", 1e-9)?;
            let offs = cg.offsets(ctx);
            let blocks = cg.blocks.iter().zip(offs).map(|(&k, o)| (k, o, ctx.dim(k))).collect();
            pairs.push(ChainPair { a, b, c: cr, beta: br, blocks });
        }
        Ok(Chain { r: ctx.num_irreps(), f0, tiny, seed, p_seed, pairs })
    }

    /// Walks the chain for a given orthogonal factor. In strict mode
    /// ill-conditioned factors are reported; otherwise they make the
    /// residual infinite.
    fn run(&self, u: &RMat, strict: bool, ctx: &GroupContext, mut resid: Option<&mut Vec<f64>>) -> Result<ChainRun> {
        let mut coeffs: Vec<Option<RMat>> = vec![None; self.r];
        coeffs[0] = Some(RMat::from_element(1, 1, self.f0));
        let fs = &self.p_seed * u;
        let cs = cond_real(&fs);
        if strict && cs > MAX_CONDITION.sqrt() {
            return Err(Error::NonGeneric(format!("seed coefficient {} is singular (condition {cs:.3e})", ctx.label(self.seed))));
        }
        coeffs[self.seed] = Some(fs);
        let mut conditions = vec![1.0, cs];
        let (mut res, mut mn) = (0.0, 0.0);
        let fail =
            |conds: Vec<f64>| ChainRun { coeffs: vec![None; self.r], residual: f64::INFINITY, m_norm: 1.0, conditions: conds };
        for p in &self.pairs {
            let (fa, fb) = match (&coeffs[p.a], &coeffs[p.b]) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(Error::Internal("chain uses an unknown coefficient".into())),
            };
            let cond = cond_real(fa) * cond_real(fb);
            conditions.push(cond);
            if cond > MAX_CONDITION || !cond.is_finite() {
                if strict {
                    return Err(Error::NonGeneric(format!(
                        "factors of ({}, {}) are ill-conditioned (condition {cond:.3e})",
                        ctx.label(p.a),
                        ctx.label(p.b)
                    )));
                }
                return Ok(fail(conditions));
            }
            let (ia, ib) = match (fa.clone().try_inverse(), fb.clone().try_inverse()) {
                (Some(x), Some(y)) => (x, y),
                _ => return Ok(fail(conditions)),
            };
            let x = p.c.transpose() * ia.kronecker(&ib) * &p.beta * &p.c;
            let m = x.transpose();
            let mut diff = m.clone();
            for &(k, o, d) in &p.blocks {
                let blk = m.view((o, o), (d, d)).into_owned();
                match &coeffs[k] {
                    Some(known) => {
                        diff.view_mut((o, o), (d, d)).copy_from(&(&blk - known));
                    }
                    None => {
                        diff.view_mut((o, o), (d, d)).fill(0.0);
                        if strict {
                            let ck = cond_real(&blk);
                            // A 1x1 block always has condition 1; check its size too.
                            if ck > MAX_CONDITION.sqrt() || !ck.is_finite() || blk.norm() <= self.tiny {
                                return Err(Error::NonGeneric(format!(
                                    "recovered {} is singular (condition {ck:.3e})",
                                    ctx.label(k)
                                )));
                            }
                        }
                        coeffs[k] = Some(blk);
                    }
                }
            }
            res += diff.norm_squared();
            mn += m.norm_squared();
            if let Some(v) = resid.as_deref_mut() {
                v.extend(diff.iter());
            }
        }
        Ok(ChainRun { coeffs, residual: res, m_norm: mn, conditions })
    }

    fn relative(&self, run: &ChainRun) -> f64 {
        if run.m_norm > 0.0 {
            run.residual / run.m_norm
        } else {
            run.residual
        }
    }
}

fn rot2(theta: f64, reflect: bool) -> RMat {
    let (s, c) = theta.sin_cos();
    let r = RMat::from_row_slice(2, 2, &[c, -s, s, c]);
    if reflect {
        r * RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
    } else {
        r
    }
}

fn rot3(a: f64, b: f64, g: f64, reflect: bool) -> RMat {
    let rz = |t: f64| {
        let (s, c) = t.sin_cos();
        RMat::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
    };
    let (s, c) = b.sin_cos();
    let ry = RMat::from_row_slice(3, 3, &[c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c]);
    let r = rz(a) * ry * rz(g);
    if reflect {
        -r
    } else {
        r
    }
}

/// Orthogonal matrix from a parameter vector and determinant sign.
fn orth(d: usize, p: &[f64], reflect: bool) -> RMat {
    if d == 2 {
        rot2(p[0], reflect)
    } else {
        rot3(p[0], p[1], p[2], reflect)
    }
}

fn grid(d: usize) -> Vec<(Vec<f64>, bool)> {
    let mut out = Vec::new();
    for reflect in [false, true] {
        if d == 2 {
            for i in 0..720 {
                out.push((vec![2.0 * PI * i as f64 / 720.0], reflect));
            }
        } else {
            let m = 24;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let a = 2.0 * PI * i as f64 / m as f64;
                        let b = PI * (j as f64 + 0.5) / m as f64;
                        let g = 2.0 * PI * k as f64 / m as f64;
                        out.push((vec![a, b, g], reflect));
                    }
                }
            }
        }
    }
    out
}

/// Levenberg-Marquardt on the chain residual with a central-difference
/// Jacobian.
fn refine(chain: &Chain, ctx: &GroupContext, d: usize, start: &[f64], reflect: bool) -> (Vec<f64>, f64) {
    let eval = |p: &[f64]| -> Option<(Vec<f64>, f64)> {
        let mut v = Vec::new();
        let run = chain.run(&orth(d, p, reflect), false, ctx, Some(&mut v)).ok()?;
        if !run.residual.is_finite() {
            return None;
        }
        Some((v, chain.relative(&run)))
    };
    let mut p = start.to_vec();
    let Some((mut r, mut rel)) = eval(&p) else {
        return (p, f64::INFINITY);
    };
    let mut cost: f64 = r.iter().map(|x| x * x).sum();
    let mut lambda = 1e-3;
    let np = p.len();
    for _ in 0..200 {
        if rel < 1e-30 {
            break;
        }
        let h = 1e-6;
        let mut jac = RMat::zeros(r.len(), np);
        let mut ok = true;
        for q in 0..np {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[q] += h;
            pm[q] -= h;
            match (eval(&pp), eval(&pm)) {
                (Some((rp, _)), Some((rm, _))) if rp.len() == r.len() && rm.len() == r.len() => {
                    for i in 0..r.len() {
                        jac[(i, q)] = (rp[i] - rm[i]) / (2.0 * h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let rv = nalgebra::DVector::from_vec(r.clone());
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for q in 0..np {
                a[(q, q)] += lambda * jtj[(q, q)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = p.iter().zip(delta.iter()).map(|(x, dx)| x + dx).collect();
            if let Some((rc, relc)) = eval(&cand) {
                let cc: f64 = rc.iter().map(|x| x * x).sum();
                if cc < cost {
                    let small = delta.norm() < 1e-15;
                    p = cand;
                    r = rc;
                    rel = relc;
                    cost = cc;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = !small;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (p, rel)
}

fn invert_matrix(ctx: &GroupContext, beta: &BispectrumCoefficients) -> Result<InversionResult> {
    beta.check(ctx)?;
    let plan = canonical_plan(ctx)?;
    let chain = Chain::new(ctx, beta, &plan)?;
    let d = ctx.dim(chain.seed);

    // Genericity does not depend on the orthogonal factor.
    chain.run(&RMat::identity(d, d), true, ctx, None)?;

    let pts = grid(d);
    let scores: Vec<f64> = pts
        .par_iter()
        .map(|(p, refl)| match chain.run(&orth(d, p, *refl), false, ctx, None) {
            Ok(run) if run.residual.is_finite() => chain.relative(&run),
            _ => f64::INFINITY,
        })
        .collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&x, &y| scores[x].total_cmp(&scores[y]).then(x.cmp(&y)));
    let keep = if d == 2 { 8 } else { 16 };
    let refined: Vec<(usize, Vec<f64>, f64)> = order
        .iter()
        .take(keep)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| {
            let (p, rel) = refine(&chain, ctx, d, &pts[i].0, pts[i].1);
            (i, p, rel)
        })
        .collect();
    let (best_i, best_p, best_rel) = refined
        .into_iter()
        .min_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)))
        .ok_or_else(|| Error::Internal("empty search grid".into()))?;
    if !best_rel.is_finite() {
        return Err(Error::InversionFailure("no orthogonal factor gives a finite chain residual".into()));
    }
    let u = orth(d, &best_p, pts[best_i].1);
    let run = chain.run(&u, true, ctx, None)?;
    let coeffs: Vec<CMatrix> = run
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, m)| m.as_ref().map(to_complex).ok_or_else(|| Error::Incomplete { uncovered: vec![ctx.label(k).to_string()] }))
        .collect::<Result<_>>()?;
    let fourier = FourierCoefficients::new(ctx, coeffs)?;
    let z = igft(ctx, &fourier)?;
    let residual_imag = max_imag(&z);
    let resolved = best_rel < RESOLVED_TOL;
    let signal = GroupSignal::new(ctx.kind().clone(), z.iter().map(|v| v.re).collect())?;
    let mut steps = vec![step(ctx, (0, 0), &[0], 1.0), step(ctx, (0, chain.seed), &[chain.seed], run.conditions[1])];
    for (p, (pair, cond)) in plan.pairs.iter().skip(2).zip(run.conditions.iter().skip(2)).enumerate() {
        steps.push(step(ctx, *pair, &plan.unlocks[p + 2], *cond));
    }
    Ok(InversionResult {
        fourier,
        signal: Some(signal),
        indeterminacy: if resolved { Indeterminacy::ResolvedToReal } else { Indeterminacy::UnresolvedUnitary },
        residual_imag,
        consistency_residual: best_rel,
        steps,
    })
}
