//! Dense eigen-solvers used by the rest of the crate.
//!
//! Only what the laboratory needs: a cyclic Jacobi solver for complex
//! Hermitian matrices (primed vacua, displaced eigenvectors) and an implicit
//! QL solver for real symmetric tridiagonal matrices (Gauss–Laguerre nodes),
//! plus a small real square matrix for Jacobians and symplectic forms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Column-major eigenvectors: `vectors[k * dim + i]` is component `i` of
    /// eigenvector `k`.
    pub vectors: Vec<C64>,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> &[C64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix given row-major.
///
/// The strictly Hermitian part is used; any anti-Hermitian noise in the
/// input is averaged away first.
pub fn hermitian_eigen(dim: usize, matrix: &[C64]) -> Result<HermitianEigen> {
    if matrix.len() != dim * dim {
        return Err(Error::DimensionMismatch { left: matrix.len(), right: dim * dim });
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("hermitian_eigen input"));
    }
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            a[i * dim + j] = (matrix[i * dim + j] + matrix[j * dim + i].conj()) * 0.5;
        }
    }
    // w holds eigenvectors as columns, row-major.
    let mut w = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        w[i * dim + i] = C64::new(1.0, 0.0);
    }

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        let target = f64::EPSILON * scale;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..dim)
                .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * dim + j].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= target {
                break;
            }
            for p in 0..dim {
                for q in (p + 1)..dim {
                    rotate(dim, &mut a, &mut w, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    let diag: Vec<f64> = (0..dim).map(|i| a[i * dim + i].re).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = Vec::with_capacity(dim * dim);
    for &k in &order {
        vectors.extend((0..dim).map(|i| w[i * dim + k]));
    }
    Ok(HermitianEigen { dim, values, vectors })
}

fn rotate(dim: usize, a: &mut [C64], w: &mut [C64], p: usize, q: usize) {
    let apq = a[p * dim + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let alpha = a[p * dim + p].re;
    let beta = a[q * dim + q].re;
    if r <= f64::EPSILON * 1e-3 * (alpha.abs() + beta.abs()) {
        a[p * dim + q] = C64::new(0.0, 0.0);
        a[q * dim + p] = C64::new(0.0, 0.0);
        return;
    }
    let u = apq / r;
    let zeta = (beta - alpha) / (2.0 * r);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // V = [[c, s u], [-s conj(u), c]] on the (p, q) plane.
    let vpp = C64::new(c, 0.0);
    let vpq = u * s;
    let vqp = -u.conj() * s;
    let vqq = C64::new(c, 0.0);
    for k in 0..dim {
        let akp = a[k * dim + p];
        let akq = a[k * dim + q];
        a[k * dim + p] = akp * vpp + akq * vqp;
        a[k * dim + q] = akp * vpq + akq * vqq;
        let wkp = w[k * dim + p];
        let wkq = w[k * dim + q];
        w[k * dim + p] = wkp * vpp + wkq * vqp;
        w[k * dim + q] = wkp * vpq + wkq * vqq;
    }
    for k in 0..dim {
        let apk = a[p * dim + k];
        let aqk = a[q * dim + k];
        a[p * dim + k] = vpp.conj() * apk + vqp.conj() * aqk;
        a[q * dim + k] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[p * dim + q] = C64::new(0.0, 0.0);
    a[q * dim + p] = C64::new(0.0, 0.0);
    a[p * dim + p] = C64::new(a[p * dim + p].re, 0.0);
    a[q * dim + q] = C64::new(a[q * dim + q].re, 0.0);
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and sub-diagonal, by implicit QL with Wilkinson-type shifts.
pub fn tridiagonal_eigenvalues(diagonal: &[f64], off_diagonal: &[f64]) -> Result<Vec<f64>> {
    let n = diagonal.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off_diagonal.len() + 1 != n {
        return Err(Error::DimensionMismatch { left: off_diagonal.len() + 1, right: n });
    }
    let mut d = diagonal.to_vec();
    let mut e = off_diagonal.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NonFinite("tridiagonal QL did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

/// Small dense real square matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { left: data.len(), right: n * n });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * factor).collect() }
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}
