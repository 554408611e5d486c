//! Symplectic forms, sampled canonicity, and constant almost complex structures.
//!
//! Real coordinates are interleaved as `(q₁, p₁, q₂, p₂, …)` and the canonical
//! form pairs `Ω(∂q, ∂p) = +1` in every mode block, i.e. `Ω = [[0, 1], [−1, 0]]`.
//! With this pairing the standard structure `J∂q = ∂p` tames `Ω`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::poly::{jacobian_from, PolyMap};
use crate::linalg::RealMatrix;
use crate::{Error, Result, C64};

pub const DEFAULT_SAMPLE_COUNT: usize = 25;
pub const DEFAULT_CANONICITY_TOL: f64 = 1e-9;
const J_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    matrix: RealMatrix,
}

impl SymplecticForm {
    /// Darboux form on `2n` real coordinates.
    pub fn canonical(n_modes: usize) -> Self {
        let mut m = RealMatrix::zeros(2 * n_modes);
        for l in 0..n_modes {
            m[(2 * l, 2 * l + 1)] = 1.0;
            m[(2 * l + 1, 2 * l)] = -1.0;
        }
        Self { matrix: m }
    }

    /// Checks antisymmetry and nondegeneracy.
    pub fn new(matrix: RealMatrix) -> Result<Self> {
        let n = matrix.dim();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidPolyMap(format!("symplectic form needs even dimension, got {n}")));
        }
        if matrix.max_abs_diff(&matrix.transpose().scaled(-1.0))? > 0.0 {
            return Err(Error::InvalidPolyMap("symplectic form is not antisymmetric".into()));
        }
        if determinant(&matrix).abs() <= f64::EPSILON {
            return Err(Error::InvalidPolyMap("symplectic form is degenerate".into()));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Ω(u, v) = uᵀ Ω v`.
    pub fn pair(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                s += ui * self.matrix[(i, j)] * vj;
            }
        }
        s
    }
}

fn determinant(m: &RealMatrix) -> f64 {
    let n = m.dim();
    let mut a: Vec<f64> = m.as_slice().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs())).expect("non-empty range");
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicityReport {
    pub canonical: bool,
    /// `max over samples of ‖MᵀΩM − Ω‖_max`.
    pub max_defect: f64,
    /// `max over samples of ‖MᵀΩM + Ω‖_max`; zero for anti-canonical maps.
    pub anti_defect: f64,
}

impl CanonicityReport {
    pub fn anti_canonical(&self, tol: f64) -> bool {
        self.anti_defect <= tol
    }
}

/// Samples the Jacobian of `map` and measures how far it is from preserving `Ω`.
pub fn canonicity_check(
    map: &PolyMap,
    omega: &SymplecticForm,
    samples: &[Vec<C64>],
    tol: f64,
) -> Result<CanonicityReport> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if omega.dim() != 2 * map.n_modes() {
        return Err(Error::DimensionMismatch { left: omega.dim(), right: 2 * map.n_modes() });
    }
    let derivs = map.wirtinger();
    let neg_omega = omega.matrix.scaled(-1.0);
    let mut max_defect: f64 = 0.0;
    let mut anti_defect: f64 = 0.0;
    for w in samples {
        if w.len() != map.n_modes() {
            return Err(Error::DimensionMismatch { left: w.len(), right: map.n_modes() });
        }
        let jac = jacobian_from(&derivs, w)?;
        let pulled = jac.transpose().matmul(&omega.matrix)?.matmul(&jac)?;
        let d = pulled.max_abs_diff(&omega.matrix)?;
        let a = pulled.max_abs_diff(&neg_omega)?;
        if !d.is_finite() {
            return Err(Error::NonFinite("canonicity defect"));
        }
        max_defect = max_defect.max(d);
        anti_defect = anti_defect.max(a);
    }
    Ok(CanonicityReport { canonical: max_defect <= tol, max_defect, anti_defect })
}

/// Halton points in the box `[−2, 2]^{2n}`, returned as complex `w` tuples.
pub fn default_samples(n_modes: usize) -> Vec<Vec<C64>> {
    halton_samples(n_modes, DEFAULT_SAMPLE_COUNT, 2.0)
}

fn halton_samples(n_modes: usize, count: usize, half_width: f64) -> Vec<Vec<C64>> {
    let primes = first_primes(2 * n_modes);
    (1..=count)
        .map(|i| {
            (0..n_modes)
                .map(|l| {
                    let q = radical_inverse(i, primes[2 * l]);
                    let p = radical_inverse(i, primes[2 * l + 1]);
                    C64::new(half_width * (2.0 * q - 1.0), half_width * (2.0 * p - 1.0))
                })
                .collect()
        })
        .collect()
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut k = 2;
    while primes.len() < count {
        if primes.iter().all(|p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

/// Constant (per chart) tensor `J` with `J² = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostComplexStructure {
    matrix: RealMatrix,
}

impl AlmostComplexStructure {
    /// Wraps a matrix without checking `J² = −1`; see [`j_check`].
    pub fn from_matrix(matrix: RealMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }
}

/// `J∂q = ∂p`, `J∂p = −∂q` in every mode block.
pub fn j_standard(n_modes: usize) -> AlmostComplexStructure {
    let mut m = RealMatrix::zeros(2 * n_modes);
    for l in 0..n_modes {
        m[(2 * l + 1, 2 * l)] = 1.0;
        m[(2 * l, 2 * l + 1)] = -1.0;
    }
    AlmostComplexStructure { matrix: m }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JCheck {
    pub square_ok: bool,
    pub compatible: bool,
    pub tamed: bool,
}

pub fn j_check(j: &AlmostComplexStructure, omega: &SymplecticForm) -> Result<JCheck> {
    let n = j.matrix.dim();
    if n != omega.dim() {
        return Err(Error::DimensionMismatch { left: n, right: omega.dim() });
    }
    let square = j.matrix.matmul(&j.matrix)?;
    let square_ok = square.max_abs_diff(&RealMatrix::identity(n).scaled(-1.0))? <= J_TOL;
    let pulled = j.matrix.transpose().matmul(&omega.matrix)?.matmul(&j.matrix)?;
    let compatible = pulled.max_abs_diff(&omega.matrix)? <= J_TOL;
    let tamed = (0..n).all(|i| {
        let mut u = alloc::vec![0.0; n];
        u[i] = 1.0;
        let ju: Vec<f64> = (0..n).map(|r| j.matrix[(r, i)]).collect();
        omega.pair(&u, &ju) > 0.0
    });
    Ok(JCheck { square_ok, compatible, tamed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Poly;
    use alloc::vec;

    #[test]
    fn standard_structure_blocks() {
        let j1 = j_standard(1);
        assert_eq!(j1.matrix().as_slice(), &[0.0, -1.0, 1.0, 0.0]);
        let j2 = j_standard(2);
        let m = j2.matrix();
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(3, 2)], 1.0);
        assert_eq!(m[(0, 2)], 0.0);
        let sq = m.matmul(m).unwrap();
        assert_eq!(sq, RealMatrix::identity(4).scaled(-1.0));
    }

    #[test]
    fn j_checks() {
        for n in 1..=4 {
            let r = j_check(&j_standard(n), &SymplecticForm::canonical(n)).unwrap();
            assert_eq!(r, JCheck { square_ok: true, compatible: true, tamed: true }, "n = {n}");
        }
        let id = AlmostComplexStructure::from_matrix(RealMatrix::identity(2));
        assert!(!j_check(&id, &SymplecticForm::canonical(1)).unwrap().square_ok);
        let neg = AlmostComplexStructure::from_matrix(j_standard(1).matrix().scaled(-1.0));
        let r = j_check(&neg, &SymplecticForm::canonical(1)).unwrap();
        assert!(r.square_ok && !r.tamed);
        assert!(j_check(&j_standard(2), &SymplecticForm::canonical(1)).is_err());
    }

    #[test]
    fn canonicity_of_linear_maps() {
        let omega = SymplecticForm::canonical(1);
        let samples = default_samples(1);
        let id = canonicity_check(&PolyMap::identity(1), &omega, &samples, 1e-9).unwrap();
        assert!(id.canonical);
        assert_eq!(id.max_defect, 0.0);

        let rot = PolyMap::linear(C64::from_polar(1.0, 0.7), C64::new(0.0, 0.0));
        let r = canonicity_check(&rot, &omega, &samples, 1e-9).unwrap();
        assert!(r.canonical && r.max_defect <= 1e-12);

        let scale = PolyMap::linear(C64::new(2.0, 0.0), C64::new(0.0, 0.0));
        let r = canonicity_check(&scale, &omega, &samples, 1e-9).unwrap();
        assert!(!r.canonical);
        assert_eq!(r.max_defect, 3.0);

        let conj = PolyMap::linear(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let r = canonicity_check(&conj, &omega, &samples, 1e-9).unwrap();
        assert!(!r.canonical && r.anti_canonical(1e-12));
        assert_eq!(r.max_defect, 2.0);
    }

    #[test]
    fn bogoliubov_is_canonical() {
        let t: f64 = 0.5;
        let b = PolyMap::linear(C64::new(t.cosh(), 0.0), C64::new(t.sinh(), 0.0));
        let r = canonicity_check(&b, &SymplecticForm::canonical(1), &default_samples(1), 1e-9).unwrap();
        assert!(r.canonical, "{}", r.max_defect);
    }

    #[test]
    fn nonlinear_shear_is_canonical() {
        // q' = q, p' = p + q²: canonical, nonholomorphic in w.
        // With w = q + ip: q = (w + w̄)/2 and p' + ... expressed as
        // w' = w + i (w + w̄)² / 4.
        let i4 = C64::new(0.0, 0.25);
        let p = Poly::from_terms(
            1,
            [
                (C64::new(1.0, 0.0), crate::phase_space::Monomial::w(1, 0)),
                (i4, crate::phase_space::Monomial::new(vec![2], vec![0]).unwrap()),
                (i4 * 2.0, crate::phase_space::Monomial::new(vec![1], vec![1]).unwrap()),
                (i4, crate::phase_space::Monomial::new(vec![0], vec![2]).unwrap()),
            ],
        )
        .unwrap();
        let shear = PolyMap::new(1, vec![p]).unwrap();
        let r = canonicity_check(&shear, &SymplecticForm::canonical(1), &default_samples(1), 1e-9).unwrap();
        assert!(r.canonical, "{}", r.max_defect);
    }

    #[test]
    fn empty_samples_rejected() {
        let r = canonicity_check(&PolyMap::identity(1), &SymplecticForm::canonical(1), &[], 1e-9);
        assert_eq!(r, Err(Error::NoSamples));
    }

    #[test]
    fn samples_are_inside_box_and_distinct() {
        let s = default_samples(2);
        assert_eq!(s.len(), 25);
        for p in &s {
            for z in p {
                assert!(z.re.abs() <= 2.0 && z.im.abs() <= 2.0);
            }
        }
        assert_ne!(s[0], s[1]);
    }

    #[test]
    fn custom_form_validation() {
        assert!(SymplecticForm::new(RealMatrix::identity(2)).is_err());
        assert!(SymplecticForm::new(RealMatrix::zeros(2)).is_err());
        let m = SymplecticForm::canonical(2).matrix().clone();
        assert!(SymplecticForm::new(m).is_ok());
    }
}
