// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear-algebra kernels.
//!
//! Hermitian eigendecomposition is the workhorse: unitary propagators,
//! operator functions such as `sin(eta x + phi)` and matrix square roots
//! for the Uhlmann fidelity all go through [`hermitian_eigen`]. A
//! scaling-and-squaring Taylor exponential is kept for non-normal inputs
//! and as an independent cross-check of the spectral route.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Complex zero.
pub const C0: Complex64 = Complex64::new(0.0, 0.0);
/// Complex one.
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
/// Imaginary unit.
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Eigendecomposition of a Hermitian matrix, `m = V diag(w) V†`.
///
/// Only the lower triangle is read. Eigenvalues are returned in ascending
/// order with eigenvectors permuted to match, so repeated calls give
/// identical outputs regardless of the solver's internal ordering.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen requires a square matrix");
    if n == 0 {
        return (DVector::zeros(0), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let w = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut v = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &eig.eigenvectors.column(src));
    }
    (w, v)
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (w, v) = hermitian_eigen(m);
    spectral_synthesis(&w, &v, f)
}

/// Rebuilds `V diag(f(w)) V†` from a precomputed eigendecomposition.
pub fn spectral_synthesis(w: &DVector<f64>, v: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let mut scaled = v.clone();
    for (j, &wj) in w.iter().enumerate() {
        let fj = f(wj);
        scaled.column_mut(j).scale_mut_c(fj);
    }
    matmul(&scaled, &v.adjoint())
}

trait ScaleC {
    fn scale_mut_c(&mut self, c: Complex64);
}

impl<S> ScaleC for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_c(&mut self, c: Complex64) {
        for x in self.iter_mut() {
            *x *= c;
        }
    }
}

/// Matrix product specialised for complex operands.
///
/// The generic fallback inside nalgebra walks the operands column by
/// column; this kernel splits real and imaginary parts so the inner loop is
/// plain `f64` arithmetic that the compiler vectorises.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul dimension mismatch");
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let are: Vec<f64> = a.iter().map(|z| z.re).collect();
    let aim: Vec<f64> = a.iter().map(|z| z.im).collect();
    let mut out = CMatrix::zeros(n, m);
    let mut cre = vec![0.0; n];
    let mut cim = vec![0.0; n];
    for j in 0..m {
        cre.iter_mut().for_each(|x| *x = 0.0);
        cim.iter_mut().for_each(|x| *x = 0.0);
        for p in 0..k {
            let bz = b[(p, j)];
            if bz.re == 0.0 && bz.im == 0.0 {
                continue;
            }
            let col_re = &are[p * n..(p + 1) * n];
            let col_im = &aim[p * n..(p + 1) * n];
            for i in 0..n {
                cre[i] += col_re[i] * bz.re - col_im[i] * bz.im;
                cim[i] += col_re[i] * bz.im + col_im[i] * bz.re;
            }
        }
        for i in 0..n {
            out[(i, j)] = Complex64::new(cre[i], cim[i]);
        }
    }
    out
}

/// Matrix-vector product `a x`.
pub fn matvec(a: &CMatrix, x: &CVector) -> CVector {
    assert_eq!(a.ncols(), x.len(), "matvec dimension mismatch");
    let n = a.nrows();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for (p, xp) in x.iter().enumerate() {
        if xp.re == 0.0 && xp.im == 0.0 {
            continue;
        }
        let col = a.column(p);
        for (i, z) in col.iter().enumerate() {
            re[i] += z.re * xp.re - z.im * xp.im;
            im[i] += z.re * xp.im + z.im * xp.re;
        }
    }
    CVector::from_iterator(n, re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)))
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `(m - m†)/2`.
pub fn anti_hermitian_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()).scale(0.5)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled so its 1-norm is below 1/2, the series is summed
/// until the next term no longer changes the result, and the square is
/// taken back. Accurate to a few ulps times the condition of the
/// squaring phase; used for general matrices and as a second opinion on
/// the spectral route.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm requires a square matrix");
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.5 {
        squarings = (norm1 / 0.5).log2().ceil() as u32;
    }
    let scaled = m.scale(0.5f64.powi(squarings as i32));
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=40 {
        term = matmul(&term, &scaled).scale(1.0 / k as f64);
        let tn = frobenius(&term);
        result += &term;
        if tn <= f64::EPSILON * frobenius(&result) * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn matmul_matches_nalgebra() {
        let a = sample(7, 1);
        let b = sample(7, 2);
        let diff = &matmul(&a, &b) - &a * &b;
        assert!(frobenius(&diff) < 1e-13);
    }

    #[test]
    fn matvec_matches_nalgebra() {
        let a = sample(6, 3);
        let x = CVector::from_iterator(6, sample(6, 4).column(0).iter().copied());
        assert!((matvec(&a, &x) - &a * &x).norm() < 1e-13);
    }

    #[test]
    fn eigen_reconstructs_and_sorts() {
        let a = sample(8, 5);
        let h = hermitian_part(&a);
        let (w, v) = hermitian_eigen(&h);
        assert!(w.as_slice().windows(2).all(|p| p[0] <= p[1]));
        let back = spectral_synthesis(&w, &v, |x| Complex64::new(x, 0.0));
        assert!(frobenius(&(back - &h)) < 1e-12);
    }

    #[test]
    fn taylor_and_spectral_exponentials_agree() {
        let h = hermitian_part(&sample(6, 9)).scale(7.0);
        let spectral = hermitian_function(&h, |x| (-CI * x).exp());
        let taylor = expm(&h.map(|z| -CI * z));
        assert!(frobenius(&(spectral - taylor)) < 1e-11);
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 1)] = Complex64::new(2.0, 0.0);
        m[(1, 2)] = Complex64::new(3.0, 0.0);
        let e = expm(&m);
        // exp(N) = I + N + N^2/2 for N^3 = 0.
        assert!((e[(0, 2)] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((e[(1, 1)] - C1).norm() < 1e-14);
    }
}
