//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn scalar(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Block-diagonal matrix with the given blocks in order.
pub fn direct_sum<'a>(blocks: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let blocks: Vec<&CMatrix> = blocks.into_iter().collect();
    let r: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cdim: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(r, cdim);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

pub fn frob_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frob(m: &CMatrix) -> f64 {
    frob_sq(m).sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn imag_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// 2-norm condition number; infinite for singular input.
pub fn cond(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Principal square root of a Hermitian matrix. Eigenvalues down to `-tol`
/// are clamped to zero; anything more negative is reported back as `Err`
/// with the offending eigenvalue.
pub fn hermitian_sqrt(m: &CMatrix, tol: f64) -> std::result::Result<CMatrix, f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut lam = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        if l < -tol {
            return Err(l);
        }
        lam.push(l.max(0.0).sqrt());
    }
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&CVector::from_iterator(lam.len(), lam.iter().map(|&x| c(x, 0.0))));
    Ok(v * d * v.adjoint())
}

/// Ordered modified Gram-Schmidt. Columns with residual norm below `tol` are
/// reported as `None`.
pub fn mgs(cols: &[CVector], tol: f64) -> Vec<Option<CVector>> {
    let mut basis: Vec<CVector> = Vec::new();
    let mut out = Vec::with_capacity(cols.len());
    for v in cols {
        let mut w = v.clone();
        for b in &basis {
            let p = b.dotc(&w);
            w -= b * p;
        }
        let n = w.norm();
        if n < tol {
            out.push(None);
        } else {
            w /= c(n, 0.0);
            basis.push(w.clone());
            out.push(Some(w));
        }
    }
    out
}

pub fn columns_to_matrix(cols: &[CVector], nrows: usize) -> CMatrix {
    let mut m = CMatrix::zeros(nrows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

/// Relative Frobenius distance `|a-b| / max(|b|, floor)`.
pub fn rel_dist(a: &CMatrix, b: &CMatrix, floor: f64) -> f64 {
    frob(&(a - b)) / frob(b).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_layout() {
        let a = scalar(c(2.0, 0.0));
        let b = CMatrix::identity(2, 2);
        let s = direct_sum([&a, &b]);
        assert_eq!(s.shape(), (3, 3));
        assert_eq!(s[(0, 0)], c(2.0, 0.0));
        assert_eq!(s[(2, 2)], ONE);
        assert_eq!(s[(0, 1)], ZERO);
    }

    #[test]
    fn sqrt_of_psd() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.2), c(-0.1, 0.3), c(2.0, 0.0)]);
        let p = &a * a.adjoint();
        let s = hermitian_sqrt(&p, 1e-12).unwrap();
        assert!(frob(&(&s * &s - &p)) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-0.5, 0.0)]));
        assert!(hermitian_sqrt(&m, 1e-10).is_err());
    }

    #[test]
    fn cond_of_singular_is_infinite() {
        let m = CMatrix::from_element(2, 2, ONE);
        assert!(cond(&m) > 1e15);
    }
}
