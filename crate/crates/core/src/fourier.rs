//! Group Fourier transform, its inverse, and a radix-2 FFT for cyclic groups.
//!
//! Conventions: `F_rho = sum_g s(g) rho(g)^H` and
//! `s(g) = 1/|G| sum_rho d_rho tr(rho(g) F_rho)`.

use std::f64::consts::PI;

use crate::context::GroupContext;
use crate::error::{invalid, Error, Result};
use crate::group::{act, GroupKind, GroupSignal};
use crate::linalg::{c, cis, frob, frob_sq, scalar, CMatrix, C64, ZERO};

/// One coefficient matrix per irrep, in irrep order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    kind: GroupKind,
    coeffs: Vec<CMatrix>,
}

impl FourierCoefficients {
    pub fn new(ctx: &GroupContext, coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.len() != ctx.num_irreps() {
            return Err(Error::IncompleteInput(format!(
                "{} coefficient matrices given, {} has {} irreps",
                coeffs.len(),
                ctx.kind(),
                ctx.num_irreps()
            )));
        }
        for (k, m) in coeffs.iter().enumerate() {
            let d = ctx.dim(k);
            if m.shape() != (d, d) {
                return invalid(format!("coefficient for {} has shape {:?}, expected {d}x{d}", ctx.label(k), m.shape()));
            }
        }
        Ok(FourierCoefficients { kind: ctx.kind().clone(), coeffs })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<CMatrix> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check(&self, ctx: &GroupContext) -> Result<()> {
        if &self.kind != ctx.kind() {
            return invalid(format!("coefficients belong to {} but the group is {}", self.kind, ctx.kind()));
        }
        Ok(())
    }
}

pub fn gft(ctx: &GroupContext, signal: &GroupSignal) -> Result<FourierCoefficients> {
    signal.check_group(ctx.group())?;
    let s = signal.values();
    let coeffs = if ctx.kind().is_abelian() {
        let chars = ctx.characters();
        (0..ctx.num_irreps())
            .map(|k| {
                let row = chars.row(k);
                scalar(s.iter().zip(row).map(|(v, chi)| chi.conj() * *v).sum())
            })
            .collect()
    } else {
        ctx.irreps()
            .iter()
            .map(|rho| {
                let d = rho.dim();
                let mut f = CMatrix::zeros(d, d);
                for (g, v) in s.iter().enumerate() {
                    let m = rho.image(g);
                    for i in 0..d {
                        for j in 0..d {
                            f[(i, j)] += m[(j, i)].conj() * *v;
                        }
                    }
                }
                f
            })
            .collect()
    };
    Ok(FourierCoefficients { kind: ctx.kind().clone(), coeffs })
}

/// Transform on an abelian group as a flat list `F_k`, without matrix
/// wrappers.
pub fn gft_abelian(ctx: &GroupContext, signal: &GroupSignal) -> Result<Vec<C64>> {
    signal.check_group(ctx.group())?;
    if !ctx.kind().is_abelian() {
        return invalid(format!("gft_abelian needs an abelian group, got {}", ctx.kind()));
    }
    let s = signal.values();
    let chars = ctx.characters();
    Ok((0..ctx.num_irreps()).map(|k| s.iter().zip(chars.row(k)).map(|(v, chi)| chi.conj() * *v).sum()).collect())
}

/// Inverse transform; the result is complex in general.
pub fn igft(ctx: &GroupContext, f: &FourierCoefficients) -> Result<Vec<C64>> {
    f.check(ctx)?;
    let n = ctx.order();
    let inv_n = 1.0 / n as f64;
    let out = (0..n)
        .map(|g| {
            let mut acc = ZERO;
            for (k, rho) in ctx.irreps().iter().enumerate() {
                let m = rho.image(g);
                let fk = &f.coeffs[k];
                let d = rho.dim();
                let mut tr = ZERO;
                for i in 0..d {
                    for j in 0..d {
                        tr += m[(i, j)] * fk[(j, i)];
                    }
                }
                acc += tr * d as f64;
            }
            acc * inv_n
        })
        .collect();
    Ok(out)
}

/// Inverse transform of coefficients that should come from a real signal.
/// Fails when the imaginary part exceeds `rel_tol` times the signal norm.
pub fn igft_real(ctx: &GroupContext, f: &FourierCoefficients, rel_tol: f64) -> Result<GroupSignal> {
    let z = igft(ctx, f)?;
    let re: f64 = z.iter().map(|v| v.re * v.re).sum::<f64>().sqrt();
    let im: f64 = z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
    if im > rel_tol * re.max(f64::MIN_POSITIVE) {
        return Err(Error::InversionFailure(format!(
            "inverse transform is not real: imaginary norm {im:.3e}, real norm {re:.3e}"
        )));
    }
    GroupSignal::new(ctx.kind().clone(), z.iter().map(|v| v.re).collect())
}

/// In-place forward DFT of power-of-two length with kernel `exp(-2 pi i k g / n)`.
pub fn fft_radix2(buf: &mut [C64]) -> Result<()> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("radix-2 FFT needs a power-of-two length, got {n}"));
    }
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
    }
    let twiddle: Vec<C64> = (0..n / 2).map(|k| cis(-2.0 * PI * k as f64 / n as f64)).collect();
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddle[k * step];
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len *= 2;
    }
    Ok(())
}

/// Fourier coefficients `F_k` of a signal on a cyclic group. Power-of-two
/// orders use the radix-2 FFT; other orders fall back to the direct sum.
pub fn fft_cyclic(signal: &GroupSignal) -> Result<Vec<C64>> {
    let n = match signal.kind() {
        GroupKind::Cyclic(n) => *n,
        other => return invalid(format!("fft_cyclic needs a cyclic group, got {other}")),
    };
    let mut buf: Vec<C64> = signal.values().iter().map(|v| c(*v, 0.0)).collect();
    if n.is_power_of_two() {
        fft_radix2(&mut buf)?;
        Ok(buf)
    } else {
        Ok((0..n)
            .map(|k| buf.iter().enumerate().map(|(g, v)| v * cis(-2.0 * PI * ((k * g) % n) as f64 / n as f64)).sum())
            .collect())
    }
}

/// `| |s|^2 - 1/|G| sum d |F|^2 |`.
pub fn plancherel_gap(ctx: &GroupContext, signal: &GroupSignal, f: &FourierCoefficients) -> Result<f64> {
    f.check(ctx)?;
    let lhs: f64 = signal.values().iter().map(|v| v * v).sum();
    let rhs: f64 = f.coeffs.iter().enumerate().map(|(k, m)| ctx.dim(k) as f64 * frob_sq(m)).sum::<f64>() / ctx.order() as f64;
    Ok((lhs - rhs).abs())
}

/// Translation rule of the transform: `F(act(h, s))_rho = F(s)_rho rho(h)^H`.
/// Returns the largest Frobenius deviation over irreps.
pub fn check_equivariance(ctx: &GroupContext, signal: &GroupSignal, h: usize) -> Result<f64> {
    let shifted = act(ctx.group(), h, signal)?;
    let a = gft(ctx, &shifted)?;
    let b = gft(ctx, signal)?;
    let mut worst: f64 = 0.0;
    for (k, rho) in ctx.irreps().iter().enumerate() {
        let expect = b.get(k) * rho.image(h).adjoint();
        worst = worst.max(frob(&(a.get(k) - expect)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radix2_matches_direct_sum() {
        let s = GroupSignal::random(&GroupKind::Cyclic(16), 9).unwrap();
        let fast = fft_cyclic(&s).unwrap();
        for (k, fk) in fast.iter().enumerate() {
            let direct: C64 = s.values().iter().enumerate().map(|(g, v)| cis(-2.0 * PI * (k * g) as f64 / 16.0) * *v).sum();
            assert!((fk - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn radix2_rejects_bad_lengths() {
        let mut v = vec![ZERO; 6];
        assert!(fft_radix2(&mut v).is_err());
        let mut one = vec![c(2.0, 0.0)];
        fft_radix2(&mut one).unwrap();
        assert_eq!(one[0], c(2.0, 0.0));
    }

    #[test]
    fn shape_validation() {
        let ctx = GroupContext::get(&GroupKind::Dihedral(4)).unwrap();
        assert!(FourierCoefficients::new(&ctx, vec![CMatrix::zeros(1, 1); 5]).is_err());
        let mut shapes: Vec<CMatrix> = ctx.irreps().dims().iter().map(|&d| CMatrix::zeros(d, d)).collect();
        assert!(FourierCoefficients::new(&ctx, shapes.clone()).is_ok());
        shapes[4] = CMatrix::zeros(1, 1);
        assert!(FourierCoefficients::new(&ctx, shapes).is_err());
    }
}
