// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Compressed sparse rows for the master-equation right-hand side.
//!
//! Ladder operators and most Hamiltonians have a handful of nonzeros per
//! row, so `S * rho` costs `O(nnz * d)` instead of `O(d^3)`.

use num_complex::Complex64;

use crate::linalg::CMatrix;

#[derive(Debug, Clone)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub(crate) fn from_dense(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `self * m`.
    pub(crate) fn mul_dense(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, m.ncols());
        for j in 0..m.ncols() {
            let col = m.column(j);
            let col = col.as_slice();
            let dst = out.column_mut(j);
            let dst = dst.data.into_slice_mut();
            for (i, d) in dst.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[p] * col[self.cols[p]];
                }
                *d = acc;
            }
        }
        out
    }
}
