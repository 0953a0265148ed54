// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space representation.
//!
//! A [`ModeLayout`] describes the tensor product of up to three bosonic
//! modes and the internal levels of the ion. Modes always appear in the
//! canonical order `a` (ion motion), `b1` (cavity 1), `b2` (cavity 2),
//! followed by the ion. Flat indices are little-endian: the first factor
//! present in the layout is the fastest-varying digit, so
//!
//! ```text
//! flat = n_a + d_a * (n_b1 + d_b1 * (n_b2 + d_b2 * level))
//! ```
//!
//! when all three modes are present. Absent modes are simply skipped. The
//! ion is always a factor; `ion_levels == 1` makes it a trivial one.
//!
//! Ion level `0` is the ground state `|g>`. With two levels, level `1` is
//! the single excited state and serves as the upper state of either
//! transition. With three levels, level `j` is `|e_j>`.

use std::fmt;
use std::io::Write;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::io::fmt17;
use crate::linalg::{self, hermitian_eigen, inf_norm, matmul, matvec, CMatrix, CVector, C0, C1};

/// Default threshold on top-level Fock population before a warning is logged.
pub const DEFAULT_LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Relative Hermiticity tolerance for operators flagged Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Bosonic modes of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Ion motion.
    A,
    /// First cavity mode (optomechanical coupling).
    B1,
    /// Second cavity mode (cross-Kerr coupling).
    B2,
}

impl Mode {
    /// All modes in canonical order.
    pub const ALL: [Mode; 3] = [Mode::A, Mode::B1, Mode::B2];

    fn slot(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B1 => 1,
            Mode::B2 => 2,
        }
    }

    /// Short lowercase name used in dumps.
    pub fn name(self) -> &'static str {
        match self {
            Mode::A => "a",
            Mode::B1 => "b1",
            Mode::B2 => "b2",
        }
    }

    /// Parses the short name produced by [`Mode::name`].
    pub fn from_name(s: &str) -> Result<Mode> {
        match s {
            "a" => Ok(Mode::A),
            "b1" => Ok(Mode::B1),
            "b2" => Ok(Mode::B2),
            other => invalid_arg(format!("unknown mode '{other}'")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One tensor factor of a layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subsystem {
    Mode(Mode),
    Ion,
}

impl From<Mode> for Subsystem {
    fn from(m: Mode) -> Self {
        Subsystem::Mode(m)
    }
}

/// Occupation numbers and ion level of a product basis state.
///
/// Modes absent from a layout must carry occupation zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Occupation {
    pub a: usize,
    pub b1: usize,
    pub b2: usize,
    pub level: usize,
}

impl Occupation {
    pub fn new(a: usize, b1: usize, b2: usize, level: usize) -> Self {
        Occupation { a, b1, b2, level }
    }

    /// Occupation of a single mode.
    pub fn of(&self, mode: Mode) -> usize {
        match mode {
            Mode::A => self.a,
            Mode::B1 => self.b1,
            Mode::B2 => self.b2,
        }
    }

    fn set(&mut self, mode: Mode, n: usize) {
        match mode {
            Mode::A => self.a = n,
            Mode::B1 => self.b1 = n,
            Mode::B2 => self.b2 = n,
        }
    }

    fn digit(&self, sub: Subsystem) -> usize {
        match sub {
            Subsystem::Mode(m) => self.of(m),
            Subsystem::Ion => self.level,
        }
    }
}

/// Tensor-product structure of the truncated Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    cutoffs: [Option<usize>; 3],
    ion_levels: usize,
}

impl ModeLayout {
    /// Builds a layout from `(mode, cutoff)` pairs given in any order.
    pub fn new(modes: &[(Mode, usize)], ion_levels: usize) -> Result<Self> {
        let mut cutoffs = [None; 3];
        for &(m, d) in modes {
            if d == 0 {
                return invalid_arg(format!("cutoff of mode {m} must be at least 1"));
            }
            if cutoffs[m.slot()].replace(d).is_some() {
                return invalid_arg(format!("mode {m} listed twice"));
            }
        }
        if ion_levels == 0 {
            return invalid_arg("ion_levels must be at least 1");
        }
        if ion_levels > 3 {
            return invalid_arg("at most three ion levels are modelled");
        }
        Ok(ModeLayout {
            cutoffs,
            ion_levels,
        })
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.cutoffs.iter().flatten().product::<usize>() * self.ion_levels
    }

    /// Cutoff (local dimension) of `mode`, if present.
    pub fn cutoff(&self, mode: Mode) -> Option<usize> {
        self.cutoffs[mode.slot()]
    }

    /// Cutoff of `mode`, or an invalid-argument error naming it.
    pub fn require(&self, mode: Mode) -> Result<usize> {
        self.cutoff(mode)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {mode} is not part of the layout")))
    }

    pub fn has_mode(&self, mode: Mode) -> bool {
        self.cutoff(mode).is_some()
    }

    pub fn ion_levels(&self) -> usize {
        self.ion_levels
    }

    /// Modes present, in canonical order.
    pub fn modes(&self) -> Vec<Mode> {
        Mode::ALL
            .into_iter()
            .filter(|m| self.has_mode(*m))
            .collect()
    }

    /// Tensor factors with their local dimensions, fastest digit first.
    pub fn factors(&self) -> Vec<(Subsystem, usize)> {
        let mut f: Vec<(Subsystem, usize)> = self
            .modes()
            .into_iter()
            .map(|m| (Subsystem::Mode(m), self.cutoff(m).unwrap()))
            .collect();
        f.push((Subsystem::Ion, self.ion_levels));
        f
    }

    /// Local dimension of a factor, if present.
    pub fn factor_dim(&self, sub: Subsystem) -> Option<usize> {
        match sub {
            Subsystem::Mode(m) => self.cutoff(m),
            Subsystem::Ion => Some(self.ion_levels),
        }
    }

    /// Stride of a factor in the flat index.
    pub fn stride(&self, sub: Subsystem) -> Option<usize> {
        let mut stride = 1;
        for (s, d) in self.factors() {
            if s == sub {
                return Some(stride);
            }
            stride *= d;
        }
        None
    }

    /// Ion level index of the upper state of `transition` (1 or 2).
    pub fn excited_level(&self, transition: usize) -> Result<usize> {
        match (transition, self.ion_levels) {
            (1 | 2, 2) => Ok(1),
            (1 | 2, 3) => Ok(transition),
            (1 | 2, _) => invalid_arg(format!(
                "transition {transition} needs at least two ion levels, layout has {}",
                self.ion_levels
            )),
            _ => invalid_arg(format!("unknown transition {transition}; expected 1 or 2")),
        }
    }

    /// Flat index of a product basis state.
    pub fn flat_index(&self, occ: &Occupation) -> Result<usize> {
        for m in Mode::ALL {
            let n = occ.of(m);
            match self.cutoff(m) {
                Some(d) if n >= d => {
                    return Err(Error::OutOfRange(format!(
                        "occupation {n} of mode {m} is not below its cutoff {d}"
                    )))
                }
                None if n != 0 => {
                    return Err(Error::OutOfRange(format!(
                        "mode {m} is absent but has occupation {n}"
                    )))
                }
                _ => {}
            }
        }
        if occ.level >= self.ion_levels {
            return Err(Error::OutOfRange(format!(
                "ion level {} is not below {}",
                occ.level, self.ion_levels
            )));
        }
        let mut flat = 0;
        let mut stride = 1;
        for (s, d) in self.factors() {
            flat += occ.digit(s) * stride;
            stride *= d;
        }
        Ok(flat)
    }

    /// Inverse of [`ModeLayout::flat_index`].
    pub fn occupation(&self, flat: usize) -> Occupation {
        debug_assert!(flat < self.dim());
        let mut occ = Occupation::default();
        let mut rest = flat;
        for (s, d) in self.factors() {
            let digit = rest % d;
            rest /= d;
            match s {
                Subsystem::Mode(m) => occ.set(m, digit),
                Subsystem::Ion => occ.level = digit,
            }
        }
        occ
    }

    /// Layout of the factors in `keep` (ion dropped to a single level if absent).
    pub fn sublayout(&self, keep: &[Subsystem]) -> Result<ModeLayout> {
        let mut modes = Vec::new();
        let mut levels = 1;
        for &s in keep {
            match s {
                Subsystem::Mode(m) => modes.push((m, self.require(m)?)),
                Subsystem::Ion => levels = self.ion_levels,
            }
        }
        ModeLayout::new(&modes, levels)
    }

    fn check_same(&self, other: &ModeLayout) -> Result<()> {
        if self != other {
            return invalid_arg(format!("layout mismatch: {self} vs {other}"));
        }
        Ok(())
    }
}

impl fmt::Display for ModeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .modes()
            .iter()
            .map(|m| format!("{m}:{}", self.cutoff(*m).unwrap()))
            .collect();
        write!(f, "[{}; ion:{}]", parts.join(", "), self.ion_levels)
    }
}

/// Positional layout constructor: `cutoffs` lists modes `a`, `b1`, `b2` in order.
pub fn make_layout(cutoffs: &[usize], ion_levels: usize) -> Result<ModeLayout> {
    if cutoffs.len() > 3 {
        return invalid_arg("at most three bosonic modes (a, b1, b2)");
    }
    let modes: Vec<(Mode, usize)> = Mode::ALL
        .iter()
        .copied()
        .zip(cutoffs.iter().copied())
        .collect();
    ModeLayout::new(&modes, ion_levels)
}

/// Lifts an operator acting on the factors `subs` to the full layout.
///
/// `local` must be indexed little-endian over `subs`, which have to be
/// listed in canonical order. Cost is `O(dim * nnz_per_column)`.
pub fn embed(layout: &ModeLayout, subs: &[Subsystem], local: &CMatrix) -> Result<CMatrix> {
    let mut strides = Vec::with_capacity(subs.len());
    let mut dims = Vec::with_capacity(subs.len());
    for w in subs.windows(2) {
        if w[0] >= w[1] {
            return invalid_arg("embedded factors must be distinct and in canonical order");
        }
    }
    for &s in subs {
        let d = layout.factor_dim(s).ok_or_else(|| {
            Error::InvalidArgument(format!("factor {s:?} is not part of the layout"))
        })?;
        dims.push(d);
        strides.push(layout.stride(s).unwrap());
    }
    let ld: usize = dims.iter().product();
    if local.nrows() != ld || local.ncols() != ld {
        return invalid_arg(format!(
            "local operator is {}x{}, expected {ld}x{ld}",
            local.nrows(),
            local.ncols()
        ));
    }
    // Offset contributed by each local index.
    let offsets: Vec<usize> = (0..ld)
        .map(|mut l| {
            let mut off = 0;
            for k in 0..dims.len() {
                off += (l % dims[k]) * strides[k];
                l /= dims[k];
            }
            off
        })
        .collect();
    let columns: Vec<Vec<(usize, Complex64)>> = (0..ld)
        .map(|c| {
            (0..ld)
                .filter(|&r| local[(r, c)] != C0)
                .map(|r| (r, local[(r, c)]))
                .collect()
        })
        .collect();
    let d = layout.dim();
    let mut out = CMatrix::zeros(d, d);
    for col in 0..d {
        let mut lc = 0;
        let mut mult = 1;
        for k in 0..dims.len() {
            lc += ((col / strides[k]) % dims[k]) * mult;
            mult *= dims[k];
        }
        let base = col - offsets[lc];
        for &(r, v) in &columns[lc] {
            out[(base + offsets[r], col)] = v;
        }
    }
    Ok(out)
}

/// Kronecker product of local operators listed fastest-digit first.
pub fn kron_le(factors: &[&CMatrix]) -> CMatrix {
    let mut acc = CMatrix::from_element(1, 1, C1);
    for f in factors {
        acc = f.kronecker(&acc);
    }
    acc
}

/// Truncated annihilation operator on a `d`-level mode.
pub fn annihilation_local(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Number operator on a `d`-level mode.
pub fn number_local(d: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        (0..d).map(|n| Complex64::new(n as f64, 0.0)),
    ))
}

/// Position quadrature `a + a†` on a `d`-level mode.
pub fn position_local(d: usize) -> CMatrix {
    let a = annihilation_local(d);
    &a + a.adjoint()
}

/// `|g><e|` on the ion factor for the given excited level.
pub fn lowering_local(levels: usize, excited: usize) -> CMatrix {
    let mut m = CMatrix::zeros(levels, levels);
    m[(0, excited)] = C1;
    m
}

/// Hermiticity class recorded by operator constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hermiticity {
    Hermitian,
    AntiHermitian,
    General,
}

/// Complex square matrix on a layout with a Hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    layout: ModeLayout,
    matrix: CMatrix,
    kind: Hermiticity,
}

fn check_dims(layout: &ModeLayout, m: &CMatrix) -> Result<()> {
    let d = layout.dim();
    if m.nrows() != d || m.ncols() != d {
        return invalid_arg(format!(
            "matrix is {}x{}, layout needs {d}x{d}",
            m.nrows(),
            m.ncols()
        ));
    }
    Ok(())
}

impl OperatorMatrix {
    /// Wraps a matrix without any symmetry claim.
    pub fn general(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        check_dims(&layout, &matrix)?;
        Ok(OperatorMatrix {
            layout,
            matrix,
            kind: Hermiticity::General,
        })
    }

    /// Wraps a matrix that must be Hermitian to [`HERMITICITY_TOL`].
    ///
    /// The stored matrix is the exact Hermitian part of the input.
    pub fn hermitian(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        check_dims(&layout, &matrix)?;
        let dev = inf_norm(&(&matrix - matrix.adjoint()));
        if dev > HERMITICITY_TOL * inf_norm(&matrix) {
            return invalid_arg(format!("matrix is not Hermitian (deviation {dev:.3e})"));
        }
        let matrix = linalg::hermitian_part(&matrix);
        Ok(OperatorMatrix {
            layout,
            matrix,
            kind: Hermiticity::Hermitian,
        })
    }

    /// Wraps a matrix that must be anti-Hermitian to [`HERMITICITY_TOL`].
    pub fn anti_hermitian(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        check_dims(&layout, &matrix)?;
        let dev = inf_norm(&(&matrix + matrix.adjoint()));
        if dev > HERMITICITY_TOL * inf_norm(&matrix) {
            return invalid_arg(format!(
                "matrix is not anti-Hermitian (deviation {dev:.3e})"
            ));
        }
        let matrix = linalg::anti_hermitian_part(&matrix);
        Ok(OperatorMatrix {
            layout,
            matrix,
            kind: Hermiticity::AntiHermitian,
        })
    }

    pub(crate) fn from_parts(layout: ModeLayout, matrix: CMatrix, kind: Hermiticity) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        OperatorMatrix {
            layout,
            matrix,
            kind,
        }
    }

    pub fn identity(layout: &ModeLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix::from_parts(
            layout.clone(),
            CMatrix::identity(d, d),
            Hermiticity::Hermitian,
        )
    }

    pub fn zeros(layout: &ModeLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix::from_parts(layout.clone(), CMatrix::zeros(d, d), Hermiticity::Hermitian)
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermiticity(&self) -> Hermiticity {
        self.kind
    }

    pub fn is_hermitian(&self) -> bool {
        self.kind == Hermiticity::Hermitian
    }

    /// Re-checks the matrix and flags it Hermitian.
    pub fn into_hermitian(self) -> Result<Self> {
        OperatorMatrix::hermitian(self.layout, self.matrix)
    }

    /// Hermitian adjoint.
    pub fn dagger(&self) -> Self {
        OperatorMatrix::from_parts(self.layout.clone(), self.matrix.adjoint(), self.kind)
    }

    /// Multiplies by a complex scalar, tracking the Hermiticity flag.
    pub fn scale(&self, c: Complex64) -> Self {
        let kind = match self.kind {
            _ if c.im == 0.0 => self.kind,
            Hermiticity::Hermitian if c.re == 0.0 => Hermiticity::AntiHermitian,
            Hermiticity::AntiHermitian if c.re == 0.0 => Hermiticity::Hermitian,
            _ => Hermiticity::General,
        };
        OperatorMatrix::from_parts(self.layout.clone(), self.matrix.map(|z| z * c), kind)
    }

    /// Multiplies by a real scalar.
    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.matrix)
    }

    /// `(A + A†)/2`, flagged Hermitian.
    pub fn hermitian_part(&self) -> Self {
        OperatorMatrix::from_parts(
            self.layout.clone(),
            linalg::hermitian_part(&self.matrix),
            Hermiticity::Hermitian,
        )
    }

    /// `(A - A†)/2`, flagged anti-Hermitian.
    pub fn anti_hermitian_part(&self) -> Self {
        OperatorMatrix::from_parts(
            self.layout.clone(),
            linalg::anti_hermitian_part(&self.matrix),
            Hermiticity::AntiHermitian,
        )
    }

    /// Applies the operator to a state.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.layout.check_same(&psi.layout)?;
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: matvec(&self.matrix, &psi.amplitudes),
        })
    }

    /// Writes nonzero entries as `row,col,re,im` CSV lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let z = self.matrix[(r, c)];
                if z != C0 {
                    writeln!(w, "{r},{c},{},{}", fmt17(z.re), fmt17(z.im))?;
                }
            }
        }
        Ok(())
    }

    fn combine_kind(a: Hermiticity, b: Hermiticity) -> Hermiticity {
        if a == b {
            a
        } else {
            Hermiticity::General
        }
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    /// # Panics
    /// Panics if the layouts differ.
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        OperatorMatrix::from_parts(
            self.layout.clone(),
            &self.matrix + &rhs.matrix,
            OperatorMatrix::combine_kind(self.kind, rhs.kind),
        )
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        OperatorMatrix::from_parts(
            self.layout.clone(),
            &self.matrix - &rhs.matrix,
            OperatorMatrix::combine_kind(self.kind, rhs.kind),
        )
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        OperatorMatrix::from_parts(
            self.layout.clone(),
            matmul(&self.matrix, &rhs.matrix),
            Hermiticity::General,
        )
    }
}

/// Annihilation operator of `mode` embedded in the full space.
pub fn ladder_op(layout: &ModeLayout, mode: Mode) -> Result<OperatorMatrix> {
    let d = layout.require(mode)?;
    let m = embed(layout, &[mode.into()], &annihilation_local(d))?;
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        m,
        Hermiticity::General,
    ))
}

/// Creation operator of `mode`.
pub fn creation_op(layout: &ModeLayout, mode: Mode) -> Result<OperatorMatrix> {
    Ok(ladder_op(layout, mode)?.dagger())
}

/// Number operator of `mode`.
pub fn number_op(layout: &ModeLayout, mode: Mode) -> Result<OperatorMatrix> {
    let d = layout.require(mode)?;
    let m = embed(layout, &[mode.into()], &number_local(d))?;
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        m,
        Hermiticity::Hermitian,
    ))
}

/// Position quadrature `x = a + a†` of `mode`.
pub fn position_op(layout: &ModeLayout, mode: Mode) -> Result<OperatorMatrix> {
    let d = layout.require(mode)?;
    let m = embed(layout, &[mode.into()], &position_local(d))?;
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        m,
        Hermiticity::Hermitian,
    ))
}

/// Ion lowering operator `|g><e_j|` for transition `j` in {1, 2}.
pub fn lowering_op(layout: &ModeLayout, transition: usize) -> Result<OperatorMatrix> {
    let e = layout.excited_level(transition)?;
    let m = embed(
        layout,
        &[Subsystem::Ion],
        &lowering_local(layout.ion_levels(), e),
    )?;
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        m,
        Hermiticity::General,
    ))
}

/// Projector onto ion level `level`.
pub fn ion_projector(layout: &ModeLayout, level: usize) -> Result<OperatorMatrix> {
    let l = layout.ion_levels();
    if level >= l {
        return Err(Error::OutOfRange(format!(
            "ion level {level} is not below {l}"
        )));
    }
    let mut local = CMatrix::zeros(l, l);
    local[(level, level)] = C1;
    let m = embed(layout, &[Subsystem::Ion], &local)?;
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        m,
        Hermiticity::Hermitian,
    ))
}

/// Population found in the top Fock level of each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationLeakage {
    pub per_mode: Vec<(Mode, f64)>,
}

impl TruncationLeakage {
    /// Largest top-level population over all modes (0 when no mode can leak).
    pub fn max(&self) -> f64 {
        self.per_mode.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Logs a warning for each mode whose leakage exceeds `threshold`.
    pub fn warn_above(&self, threshold: f64, context: &str) {
        for &(m, p) in &self.per_mode {
            if p > threshold {
                warn!("{context}: population {p:.3e} in the top Fock level of mode {m} exceeds {threshold:.1e}; raise its cutoff");
            }
        }
    }

    fn from_diagonal(layout: &ModeLayout, populations: impl Fn(usize) -> f64) -> Self {
        let mut per_mode = Vec::new();
        for m in layout.modes() {
            let d = layout.cutoff(m).unwrap();
            if d < 2 {
                continue;
            }
            let mut p = 0.0;
            for i in 0..layout.dim() {
                if layout.occupation(i).of(m) == d - 1 {
                    p += populations(i);
                }
            }
            per_mode.push((m, p));
        }
        TruncationLeakage { per_mode }
    }
}

/// Pure state on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: ModeLayout,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(layout: ModeLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return invalid_arg(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.dim()
            ));
        }
        Ok(StateVector { layout, amplitudes })
    }

    pub fn zeros(layout: &ModeLayout) -> Self {
        StateVector {
            layout: layout.clone(),
            amplitudes: CVector::zeros(layout.dim()),
        }
    }

    /// Product Fock state with unit norm.
    pub fn basis(layout: &ModeLayout, occ: &Occupation) -> Result<Self> {
        let i = layout.flat_index(occ)?;
        let mut v = StateVector::zeros(layout);
        v.amplitudes[i] = C1;
        Ok(v)
    }

    /// Normalised linear combination `sum_k c_k |psi_k>`.
    pub fn superposition(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty superposition".into()))?;
        let mut acc = StateVector::zeros(&first.1.layout);
        for (c, s) in terms {
            acc.layout.check_same(&s.layout)?;
            acc.amplitudes.axpy(*c, &s.amplitudes, C1);
        }
        acc.normalized()
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// Amplitude of a product basis state.
    pub fn amplitude(&self, occ: &Occupation) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.flat_index(occ)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Unit-norm copy; zero vectors are rejected.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState(
                "cannot normalise a zero or non-finite state".into(),
            ));
        }
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.unscale(n),
        })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        self.layout.check_same(&other.layout)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `<psi|A|psi>` (not divided by the norm).
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        let a_psi = op.apply(self)?;
        self.overlap(&a_psi)
    }

    /// Copy multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.map(|z| z * c),
        }
    }

    /// Copy with the global phase fixed: the first amplitude whose modulus
    /// exceeds `1e-12` times the norm is made real and positive.
    pub fn phase_fixed(&self) -> Self {
        let cut = 1e-12 * self.norm();
        match self.amplitudes.iter().find(|z| z.norm() > cut) {
            Some(z) => {
                let phase = z.conj() / z.norm();
                self.scaled(phase)
            }
            None => self.clone(),
        }
    }

    /// `|psi><psi|`.
    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            layout: self.layout.clone(),
            matrix: m,
        }
    }

    /// Top-level Fock populations.
    pub fn truncation_leakage(&self) -> TruncationLeakage {
        TruncationLeakage::from_diagonal(&self.layout, |i| self.amplitudes[i].norm_sqr())
    }

    /// Writes `flat,<modes...>,level,re,im` CSV rows after phase fixing.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let fixed = self.phase_fixed();
        let modes = self.layout.modes();
        let mut header = vec!["flat".to_string()];
        header.extend(modes.iter().map(|m| m.name().to_string()));
        header.extend(["level".to_string(), "re".to_string(), "im".to_string()]);
        writeln!(w, "{}", header.join(","))?;
        for (i, z) in fixed.amplitudes.iter().enumerate() {
            let occ = self.layout.occupation(i);
            let mut row = vec![i.to_string()];
            row.extend(modes.iter().map(|m| occ.of(*m).to_string()));
            row.push(occ.level.to_string());
            row.push(fmt17(z.re));
            row.push(fmt17(z.im));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Mixed state on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: ModeLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Wraps a matrix after checking shape, Hermiticity (relative 1e-10)
    /// and unit trace (1e-8).
    pub fn new(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        check_dims(&layout, &matrix)?;
        let dev = inf_norm(&(&matrix - matrix.adjoint()));
        if dev > 1e-10 * inf_norm(&matrix).max(1.0) {
            return Err(Error::InvalidState(format!(
                "density matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C1).norm() > 1e-8 {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(DensityOperator {
            layout,
            matrix: linalg::hermitian_part(&matrix),
        })
    }

    /// Writes nonzero entries as `row,col,re,im` CSV lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for r in 0..self.matrix.nrows() {
            for c in 0..self.matrix.ncols() {
                let z = self.matrix[(r, c)];
                if z != C0 {
                    writeln!(w, "{r},{c},{},{}", fmt17(z.re), fmt17(z.im))?;
                }
            }
        }
        Ok(())
    }

    /// Wraps a matrix with no checks (used inside integrators).
    pub(crate) fn from_matrix_unchecked(layout: ModeLayout, matrix: CMatrix) -> Self {
        DensityOperator { layout, matrix }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Smallest eigenvalue of the (Hermitian part of the) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let (w, _) = hermitian_eigen(&self.matrix);
        w.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(rho A)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        self.layout.check_same(&op.layout)?;
        let d = self.layout.dim();
        let mut acc = C0;
        for i in 0..d {
            for k in 0..d {
                acc += self.matrix[(i, k)] * op.matrix[(k, i)];
            }
        }
        Ok(acc)
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Top-level Fock populations.
    pub fn truncation_leakage(&self) -> TruncationLeakage {
        TruncationLeakage::from_diagonal(&self.layout, |i| self.matrix[(i, i)].re)
    }

    /// Reduced state on the factors in `keep`.
    pub fn partial_trace(&self, keep: &[Subsystem]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return invalid_arg("partial trace needs at least one kept factor");
        }
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort();
        keep_sorted.dedup();
        let sub = self.layout.sublayout(&keep_sorted)?;
        let keep_ion = keep_sorted.contains(&Subsystem::Ion);
        let d = self.layout.dim();
        // Split every flat index into (kept index, traced-out key).
        let mut kept = vec![0usize; d];
        let mut traced = vec![0usize; d];
        for i in 0..d {
            let occ = self.layout.occupation(i);
            let mut reduced = Occupation::default();
            let mut key = 0usize;
            let mut mult = 1usize;
            for (s, dim) in self.layout.factors() {
                let is_kept = match s {
                    Subsystem::Mode(m) => keep_sorted.contains(&Subsystem::Mode(m)),
                    Subsystem::Ion => keep_ion,
                };
                let digit = occ.digit(s);
                if is_kept {
                    match s {
                        Subsystem::Mode(m) => reduced.set(m, digit),
                        Subsystem::Ion => reduced.level = digit,
                    }
                } else {
                    key += digit * mult;
                    mult *= dim;
                }
            }
            kept[i] = sub
                .flat_index(&reduced)
                .expect("reduced index within sublayout");
            traced[i] = key;
        }
        let n_traced = d / sub.dim();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_traced];
        for i in 0..d {
            groups[traced[i]].push(i);
        }
        let ds = sub.dim();
        let mut out = CMatrix::zeros(ds, ds);
        for g in &groups {
            for &i in g {
                for &j in g {
                    out[(kept[i], kept[j])] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityOperator {
            layout: sub,
            matrix: out,
        })
    }

    /// Checks positivity to `tol` and returns the Hermitian eigendecomposition.
    fn positive_eigen(&self, tol: f64) -> Result<(nalgebra::DVector<f64>, CMatrix)> {
        let (w, v) = hermitian_eigen(&self.matrix);
        let min = w.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "density matrix has eigenvalue {min:.3e} below -{tol:.1e}"
            )));
        }
        Ok((w, v))
    }
}

/// Tolerance on negative eigenvalues accepted by the mixed-state fidelity.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Fidelity between two states of the same kind.
pub trait Fidelity {
    /// `|<x|y>|` for pure states and `Tr sqrt(sqrt(rho) sigma sqrt(rho))`
    /// for mixed ones. Inputs are normalised first.
    fn fidelity(&self, other: &Self) -> Result<f64>;
}

impl Fidelity for StateVector {
    fn fidelity(&self, other: &Self) -> Result<f64> {
        let x = self.normalized()?;
        let y = other.normalized()?;
        Ok(x.overlap(&y)?.norm().min(1.0))
    }
}

impl Fidelity for DensityOperator {
    fn fidelity(&self, other: &Self) -> Result<f64> {
        self.layout.check_same(&other.layout)?;
        let tr_a = self.trace().re;
        let tr_b = other.trace().re;
        if !(tr_a > 0.0 && tr_b > 0.0) {
            return Err(Error::InvalidState(
                "density matrix with non-positive trace".into(),
            ));
        }
        let (wa, va) = self.positive_eigen(POSITIVITY_TOL * tr_a)?;
        let (wb, vb) = other.positive_eigen(POSITIVITY_TOL * tr_b)?;
        // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of
        // sqrt(rho) sqrt(sigma). Singular values are insensitive to the
        // rounding-level eigenvalues of nearly pure inputs, whose square
        // roots would otherwise pollute the trace at the 1e-8 level.
        let sqrt_of = |w: &nalgebra::DVector<f64>, v: &CMatrix, tr: f64| {
            linalg::spectral_synthesis(w, v, |x| Complex64::new((x.max(0.0) / tr).sqrt(), 0.0))
        };
        let prod = matmul(&sqrt_of(&wa, &va, tr_a), &sqrt_of(&wb, &vb, tr_b));
        let f: f64 = prod.singular_values().iter().sum();
        Ok(f.min(1.0))
    }
}

/// Fidelity of two pure or two mixed states (see [`Fidelity`]).
pub fn state_fidelity<S: Fidelity>(x: &S, y: &S) -> Result<f64> {
    x.fidelity(y)
}

/// `sqrt(<psi|rho|psi>)`, the fidelity between a mixed and a pure state.
pub fn mixed_pure_fidelity(rho: &DensityOperator, psi: &StateVector) -> Result<f64> {
    rho.layout.check_same(&psi.layout)?;
    let psi = psi.normalized()?;
    let tr = rho.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidState(
            "density matrix with non-positive trace".into(),
        ));
    }
    let v = psi
        .amplitudes
        .dotc(&matvec(&rho.matrix, &psi.amplitudes))
        .re
        / tr;
    if v < -POSITIVITY_TOL {
        return Err(Error::InvalidState(format!("negative population {v:.3e}")));
    }
    Ok(v.max(0.0).sqrt().min(1.0))
}

/// Convenience: partial trace of a density operator.
pub fn partial_trace(rho: &DensityOperator, keep: &[Subsystem]) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

/// Product basis state from `(mode, n)` pairs and an ion level.
pub fn basis_state(
    layout: &ModeLayout,
    occupations: &[(Mode, usize)],
    level: usize,
) -> Result<StateVector> {
    let mut occ = Occupation {
        level,
        ..Default::default()
    };
    for &(m, n) in occupations {
        occ.set(m, n);
    }
    StateVector::basis(layout, &occ)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn little_endian_indexing() {
        let l = make_layout(&[2, 3], 2).unwrap();
        assert_eq!(l.dim(), 12);
        assert_eq!(l.flat_index(&Occupation::new(1, 0, 0, 0)).unwrap(), 1);
        assert_eq!(l.flat_index(&Occupation::new(0, 1, 0, 0)).unwrap(), 2);
        assert_eq!(l.flat_index(&Occupation::new(0, 0, 0, 1)).unwrap(), 6);
        for i in 0..l.dim() {
            assert_eq!(l.flat_index(&l.occupation(i)).unwrap(), i);
        }
    }

    #[test]
    fn kron_matches_embed() {
        let l = make_layout(&[3, 2], 2).unwrap();
        let a = annihilation_local(3);
        let s = lowering_local(2, 1);
        let id = CMatrix::identity(2, 2);
        let k = kron_le(&[&a, &id, &s]);
        let e = embed(&l, &[Mode::A.into(), Mode::B1.into(), Subsystem::Ion], &k).unwrap();
        let prod = matmul(
            &embed(&l, &[Mode::A.into()], &a).unwrap(),
            &embed(&l, &[Subsystem::Ion], &s).unwrap(),
        );
        assert_eq!(e, prod);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(make_layout(&[0], 1).is_err());
        assert!(make_layout(&[2], 0).is_err());
        assert!(ModeLayout::new(&[(Mode::A, 2), (Mode::A, 3)], 1).is_err());
    }

    #[test]
    fn excited_level_mapping() {
        let two = make_layout(&[1], 2).unwrap();
        assert_eq!(two.excited_level(1).unwrap(), 1);
        assert_eq!(two.excited_level(2).unwrap(), 1);
        let three = make_layout(&[1], 3).unwrap();
        assert_eq!(three.excited_level(2).unwrap(), 2);
        assert!(make_layout(&[1], 1).unwrap().excited_level(1).is_err());
        assert!(three.excited_level(3).is_err());
    }
}
