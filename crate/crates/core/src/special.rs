// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Combinatorial helpers: log-factorials, binomials and compensated sums.

use num_complex::Complex64;

/// Table of `ln n!` for `n = 0..=n_max`, accumulated as `sum ln k`.
///
/// Building the table by cumulative summation keeps every entry exact to
/// a few ulps for the sizes used here (a few hundred), and binomials then
/// cost three lookups.
#[derive(Debug, Clone)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(n_max: usize) -> Self {
        let mut table = Vec::with_capacity(n_max + 1);
        let mut acc = NeumaierSum::default();
        table.push(0.0);
        for k in 1..=n_max {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        LnFactorial { table }
    }

    /// `ln n!`. Panics if `n` exceeds the table size.
    pub fn ln_fact(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`; `-inf` when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }

    /// `C(n, k)` as a float.
    pub fn binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        self.ln_binomial(n, k).exp()
    }
}

/// Neumaier's variant of Kahan summation for real terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated summation of complex terms (real and imaginary parts
/// accumulated separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e^{i pi j / 4}` for integer `j`, with exact values on the axes and
/// `sqrt(1/2)` on the diagonals.
pub fn eighth_root_of_unity(j: i64) -> Complex64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match j.rem_euclid(8) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(h, h),
        2 => Complex64::new(0.0, 1.0),
        3 => Complex64::new(-h, h),
        4 => Complex64::new(-1.0, 0.0),
        5 => Complex64::new(-h, -h),
        6 => Complex64::new(0.0, -1.0),
        _ => Complex64::new(h, -h),
    }
}

/// Double factorial `(n)!!` with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}
