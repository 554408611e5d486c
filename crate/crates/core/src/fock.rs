//! Truncated Fock spaces.
//!
//! Each mode keeps the occupation levels `0..=cutoff`. Multi-mode basis states
//! are ordered with the first mode varying slowest, so the flat index of
//! `|k₁,…,kₙ⟩` is `((k₁·L + k₂)·L + …)·L + kₙ` with `L = cutoff + 1`.
//!
//! Ladder operators are the exact top-left blocks of their infinite
//! counterparts, `a|k⟩ = √k|k−1⟩`, and quadratures follow
//! `Q = (a + a†)/√2`, `P = (a − a†)/(i√2)` with ħ = 1, so `[a, a†] = 1` and
//! `[Q, P] = i` hold everywhere except on the top occupation level.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Number of modes and per-mode cutoff of a truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSpec {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
}

impl ModeSpec {
    pub const DEFAULT_DIM_CAP: usize = 4096;

    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_cap(n_modes, cutoff, Self::DEFAULT_DIM_CAP)
    }

    /// Like [`ModeSpec::new`] with an explicit bound on `(cutoff + 1)^n_modes`.
    pub fn with_cap(n_modes: usize, cutoff: usize, cap: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidModeSpec("n_modes must be >= 1".into()));
        }
        if cutoff == 0 {
            return Err(Error::InvalidModeSpec("cutoff must be >= 1".into()));
        }
        let exponent = u32::try_from(n_modes).map_err(|_| Error::DimensionOverflow { dim: usize::MAX, cap })?;
        let dim = (cutoff + 1).checked_pow(exponent).ok_or(Error::DimensionOverflow { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::DimensionOverflow { dim, cap });
        }
        Ok(Self { n_modes, cutoff, dim })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Levels per mode, `cutoff + 1`.
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Spec of one mode with the same cutoff.
    pub fn single_mode(&self) -> ModeSpec {
        ModeSpec { n_modes: 1, cutoff: self.cutoff, dim: self.cutoff + 1 }
    }

    /// Same number of modes, cutoff `cutoff / 2`: the block on which
    /// truncation artifacts of low-degree operators are absent.
    pub fn reliable(&self) -> ModeSpec {
        let cutoff = (self.cutoff / 2).max(1).min(self.cutoff);
        let dim = (cutoff + 1).pow(self.n_modes as u32);
        ModeSpec { n_modes: self.n_modes, cutoff, dim }
    }

    /// Flat index of a multi-index of occupations.
    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.n_modes {
            return Err(Error::DimensionMismatch { left: occupations.len(), right: self.n_modes });
        }
        let mut idx = 0;
        for &k in occupations {
            if k > self.cutoff {
                return Err(Error::InvalidModeSpec(format!("occupation {k} above cutoff {}", self.cutoff)));
            }
            idx = idx * self.levels() + k;
        }
        Ok(idx)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.levels()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes).map(|m| self.occupation(index, m)).collect()
    }

    /// Flat-index step between neighbouring occupations of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.levels().pow((self.n_modes - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeOutOfRange { mode, n_modes: self.n_modes });
        }
        Ok(())
    }
}

/// State vector in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    spec: ModeSpec,
    amplitudes: Vec<C64>,
}

impl FockVector {
    pub fn new(spec: ModeSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::DimensionMismatch { left: amplitudes.len(), right: spec.dim() });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("FockVector amplitudes"));
        }
        Ok(Self { spec, amplitudes })
    }

    pub fn zeros(spec: ModeSpec) -> Self {
        Self { spec, amplitudes: vec![ZERO; spec.dim()] }
    }

    pub fn basis(spec: ModeSpec, occupations: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(spec);
        let idx = spec.index(occupations)?;
        v.amplitudes[idx] = ONE;
        Ok(v)
    }

    /// The Fock vacuum `|0,…,0⟩`.
    pub fn vacuum(spec: ModeSpec) -> Self {
        let mut v = Self::zeros(spec);
        v.amplitudes[0] = ONE;
        v
    }

    pub fn spec(&self) -> ModeSpec {
        self.spec
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        for z in &mut self.amplitudes {
            *z /= n;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.spec != other.spec {
            return Err(Error::DimensionMismatch { left: self.spec.dim(), right: other.spec.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { spec: self.spec, amplitudes: self.amplitudes.iter().map(|z| z * factor).collect() }
    }

    pub fn sub(&self, other: &FockVector) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::DimensionMismatch { left: self.spec.dim(), right: other.spec.dim() });
        }
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a - b).collect();
        Ok(Self { spec: self.spec, amplitudes })
    }

    /// Largest deviation from `other`, entrywise.
    pub fn max_abs_diff(&self, other: &FockVector) -> Result<f64> {
        Ok(self.sub(other)?.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Dense operator on a truncated Fock space, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    spec: ModeSpec,
    entries: Vec<C64>,
}

impl OperatorMatrix {
    pub fn new(spec: ModeSpec, entries: Vec<C64>) -> Result<Self> {
        let d = spec.dim();
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { left: entries.len(), right: d * d });
        }
        Ok(Self { spec, entries })
    }

    pub fn zeros(spec: ModeSpec) -> Self {
        Self { spec, entries: vec![ZERO; spec.dim() * spec.dim()] }
    }

    pub fn identity(spec: ModeSpec) -> Self {
        let mut m = Self::zeros(spec);
        for i in 0..spec.dim() {
            m.entries[i * spec.dim() + i] = ONE;
        }
        m
    }

    pub fn spec(&self) -> ModeSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        let d = self.dim();
        self.entries[row * d + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut out = Self::zeros(self.spec);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { spec: self.spec, entries: self.entries.iter().map(|z| z * factor).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { spec: self.spec, entries })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self { spec: self.spec, entries })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik == ZERO {
                    continue;
                }
                let other_row = &other.entries[k * d..(k + 1) * d];
                for (o, b) in row.iter_mut().zip(other_row) {
                    *o += aik * b;
                }
            }
        }
        Ok(Self { spec: self.spec, entries: out })
    }

    /// `self · v`.
    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if v.spec != self.spec {
            return Err(Error::DimensionMismatch { left: self.dim(), right: v.spec.dim() });
        }
        let d = self.dim();
        let amplitudes = (0..d)
            .map(|i| self.entries[i * d..(i + 1) * d].iter().zip(&v.amplitudes).map(|(a, b)| a * b).sum())
            .collect();
        Ok(FockVector { spec: self.spec, amplitudes })
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.max_norm())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()).map(|d| d <= tol).unwrap_or(false)
    }

    /// Restriction to basis states whose occupations are all `≤ target.cutoff()`.
    pub fn restrict(&self, target: ModeSpec) -> Result<Self> {
        if target.n_modes() != self.spec.n_modes() || target.cutoff() > self.spec.cutoff() {
            return Err(Error::DimensionMismatch { left: target.dim(), right: self.dim() });
        }
        let kept: Vec<usize> =
            (0..target.dim()).map(|i| self.spec.index(&target.occupations(i))).collect::<Result<_>>()?;
        let d = self.dim();
        let mut out = Self::zeros(target);
        for (r, &i) in kept.iter().enumerate() {
            for (c, &j) in kept.iter().enumerate() {
                out.entries[r * target.dim() + c] = self.entries[i * d + j];
            }
        }
        Ok(out)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.try_add(rhs).expect("operator dimensions must match")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.try_sub(rhs).expect("operator dimensions must match")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.try_mul(rhs).expect("operator dimensions must match")
    }
}

/// Annihilation and creation operators of one mode.
///
/// `a_dag` is built as the exact conjugate transpose of `a`.
pub fn make_ladder(spec: ModeSpec, mode: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    spec.check_mode(mode)?;
    let stride = spec.stride(mode);
    let mut a = OperatorMatrix::zeros(spec);
    for idx in 0..spec.dim() {
        let k = spec.occupation(idx, mode);
        if k > 0 {
            a.set(idx - stride, idx, C64::new((k as f64).sqrt(), 0.0));
        }
    }
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Position and momentum quadratures `(Q, P)` of one mode.
pub fn make_quadratures(spec: ModeSpec, mode: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (a, a_dag) = make_ladder(spec, mode)?;
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &a_dag).scaled(C64::new(inv_sqrt2, 0.0));
    // (a − a†)/(i√2) = −i(a − a†)/√2
    let p = (&a - &a_dag).scaled(C64::new(0.0, -inv_sqrt2));
    Ok((q, p))
}

/// Number operator `a†a` of one mode, diagonal by construction.
pub fn number_operator(spec: ModeSpec, mode: usize) -> Result<OperatorMatrix> {
    spec.check_mode(mode)?;
    let mut n = OperatorMatrix::zeros(spec);
    for idx in 0..spec.dim() {
        n.set(idx, idx, C64::new(spec.occupation(idx, mode) as f64, 0.0));
    }
    Ok(n)
}

/// `AB − BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let ab = a.try_mul(b)?;
    let ba = b.try_mul(a)?;
    ab.try_sub(&ba)
}

/// Kronecker product of one single-mode operator per mode; mode 0 is the
/// slowest-varying factor.
pub fn tensor_embed(spec: ModeSpec, single_mode_ops: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    if single_mode_ops.len() != spec.n_modes() {
        return Err(Error::WrongOperatorCount { expected: spec.n_modes(), got: single_mode_ops.len() });
    }
    let levels = spec.levels();
    for op in single_mode_ops {
        if op.dim() != levels {
            return Err(Error::DimensionMismatch { left: op.dim(), right: levels });
        }
    }
    let d = spec.dim();
    let occ: Vec<Vec<usize>> = (0..d).map(|i| spec.occupations(i)).collect();
    let mut out = OperatorMatrix::zeros(spec);
    for i in 0..d {
        for j in 0..d {
            let mut value = ONE;
            for (m, op) in single_mode_ops.iter().enumerate() {
                let f = op.get(occ[i][m], occ[j][m]);
                if f == ZERO {
                    value = ZERO;
                    break;
                }
                value *= f;
            }
            out.entries[i * d + j] = value;
        }
    }
    Ok(out)
}
