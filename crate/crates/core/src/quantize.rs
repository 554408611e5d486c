//! Normal-ordered quantization of polynomial maps and the vacuum diagnostics
//! built on it.
//!
//! A classical monomial `wʲ w̄ᵏ` becomes `(a†)ᵏ aʲ`. Matrices are built
//! entry by entry from the action on number states, which coincides with the
//! product of truncated ladder matrices.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coherent::{coherent_amplitudes, coherent_vector, CoherentLabel};
use crate::fock::{FockVector, ModeSpec, OperatorMatrix};
use crate::linalg::hermitian_eigen;
use crate::phase_space::{Poly, PolyMap};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Singular values closer than this to the smallest one mark a degenerate
/// primed vacuum.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Directions with more than this weight on top-level states are treated as
/// truncation artifacts by [`primed_vacuum`].
pub const ARTIFACT_WEIGHT: f64 = 0.5;

/// `Π (a_l†)^{creators_l} Π a_l^{annihilators_l}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalMonomial {
    pub creators: Vec<u32>,
    pub annihilators: Vec<u32>,
}

impl NormalMonomial {
    pub fn degree(&self) -> u32 {
        self.creators.iter().sum::<u32>() + self.annihilators.iter().sum::<u32>()
    }

    pub fn is_annihilator_only(&self) -> bool {
        self.creators.iter().all(|&k| k == 0)
    }
}

/// Normal-ordered operator polynomial in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalOrderedPoly {
    n_modes: usize,
    terms: BTreeMap<NormalMonomial, C64>,
}

impl NormalOrderedPoly {
    /// Quantizes one component: `wʲ w̄ᵏ ↦ (a†)ᵏ aʲ`, coefficients unchanged.
    pub fn from_poly(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| (NormalMonomial { creators: m.anti.clone(), annihilators: m.holo.clone() }, *c))
            .collect();
        Self { n_modes: p.n_vars(), terms }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NormalMonomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &NormalMonomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(NormalMonomial::degree).max().unwrap_or(0)
    }

    /// True when no term carries a creation operator.
    pub fn is_annihilator_only(&self) -> bool {
        self.terms.keys().all(NormalMonomial::is_annihilator_only)
    }

    /// Coefficient-wise difference, for structural comparisons.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }
}

/// One normal-ordered operator `a'_l = G_l(a, a†)` per output mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMap {
    pub components: Vec<NormalOrderedPoly>,
}

impl QuantizedMap {
    pub fn n_modes(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(NormalOrderedPoly::degree).max().unwrap_or(0)
    }
}

pub fn normal_order_quantize(map: &PolyMap) -> QuantizedMap {
    QuantizedMap { components: map.components().iter().map(NormalOrderedPoly::from_poly).collect() }
}

/// Dense matrix of `nop` on the truncated space.
///
/// Entries are exact on levels `≤ cutoff − degree`; above that, terms whose
/// image would leave the truncation are dropped.
pub fn realize(nop: &NormalOrderedPoly, spec: ModeSpec) -> Result<OperatorMatrix> {
    if nop.n_modes() != spec.n_modes() {
        return Err(Error::DimensionMismatch { left: nop.n_modes(), right: spec.n_modes() });
    }
    let degree = nop.degree();
    if degree as usize > spec.cutoff() {
        return Err(Error::DegreeExceedsCutoff { degree, cutoff: spec.cutoff() });
    }
    let n = spec.cutoff();
    let dim = spec.dim();
    let mut out = OperatorMatrix::zeros(spec);
    let mut target = vec![0usize; spec.n_modes()];
    for col in 0..dim {
        let occ = spec.occupations(col);
        'terms: for (m, c) in nop.terms() {
            let mut factor = 1.0;
            for l in 0..spec.n_modes() {
                let (j, k) = (m.annihilators[l] as usize, m.creators[l] as usize);
                if occ[l] < j || occ[l] - j + k > n {
                    continue 'terms;
                }
                let lowered = occ[l] - j;
                let raised = lowered + k;
                // aʲ|n⟩ = √(n!/(n−j)!)|n−j⟩, then (a†)ᵏ|m⟩ = √((m+k)!/m!)|m+k⟩.
                factor *= sqrt_falling(occ[l], lowered, raised);
                target[l] = raised;
            }
            let row = spec.index(&target)?;
            let prev = out.get(row, col);
            out.set(row, col, prev + c * factor);
        }
    }
    Ok(out)
}

/// `√(n!/m! · r!/m!)` from integer products, exact whenever the product is.
fn sqrt_falling(n: usize, m: usize, r: usize) -> f64 {
    let down: f64 = (m + 1..=n).map(|i| i as f64).product();
    let up: f64 = (m + 1..=r).map(|i| i as f64).product();
    let both = down * up;
    if both < 9.007_199_254_740_992e15 {
        both.sqrt()
    } else {
        down.sqrt() * up.sqrt()
    }
}

/// Realizes every component of a map.
pub fn realize_map(q: &QuantizedMap, spec: ModeSpec) -> Result<Vec<OperatorMatrix>> {
    q.components.iter().map(|nop| realize(nop, spec)).collect()
}

/// `‖G|0⟩‖`, the norm of the vacuum column.
pub fn vacuum_residual(g: &OperatorMatrix) -> f64 {
    let d = g.dim();
    (0..d).map(|i| g.get(i, 0).norm_sqr()).sum::<f64>().sqrt()
}

/// `(Σ_l ‖G_l|0⟩‖²)^{1/2}` over all components.
pub fn vacuum_residual_joint(gs: &[OperatorMatrix]) -> f64 {
    gs.iter().map(|g| vacuum_residual(g).powi(2)).sum::<f64>().sqrt()
}

/// Best approximate common null vector of a set of operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimedVacuum {
    /// Unit vector, phase fixed so its largest component is real and positive.
    pub vector: FockVector,
    /// `(Σ_l ‖G_l v‖²)^{1/2}` at the returned vector.
    pub defect: f64,
    /// Another accepted direction lies within [`DEGENERACY_TOL`] of `defect`.
    pub degenerate: bool,
    /// Number of smaller singular directions skipped as truncation artifacts.
    pub excluded_artifacts: usize,
}

impl PrimedVacuum {
    /// `|⟨0|0'⟩|`.
    pub fn vacuum_overlap(&self) -> f64 {
        self.vector.amplitudes()[0].norm()
    }
}

/// Smallest singular direction of `G`.
pub fn primed_vacuum(g: &OperatorMatrix) -> Result<PrimedVacuum> {
    primed_vacuum_joint(core::slice::from_ref(g))
}

/// Smallest singular direction of the stacked operator `(G_1; …; G_n)`.
///
/// The square truncation can create spurious null vectors concentrated on the
/// top level (`a†` kills `|N⟩`), so eigen-directions of `Σ G_l†G_l` carrying
/// more than [`ARTIFACT_WEIGHT`] of their weight on states with some mode at
/// the cutoff are skipped.
pub fn primed_vacuum_joint(gs: &[OperatorMatrix]) -> Result<PrimedVacuum> {
    let spec = gs.first().ok_or(Error::WrongOperatorCount { expected: 1, got: 0 })?.spec();
    let dim = spec.dim();
    let mut gram = vec![ZERO; dim * dim];
    for g in gs {
        if g.spec() != spec {
            return Err(Error::DimensionMismatch { left: g.dim(), right: dim });
        }
        let e = g.entries();
        for k in 0..dim {
            let row = &e[k * dim..(k + 1) * dim];
            for i in 0..dim {
                let gi = row[i].conj();
                if gi == ZERO {
                    continue;
                }
                for j in 0..dim {
                    gram[i * dim + j] += gi * row[j];
                }
            }
        }
    }
    let eig = hermitian_eigen(dim, &gram)?;
    let top: Vec<bool> = (0..dim).map(|i| spec.occupations(i).iter().any(|&k| k == spec.cutoff())).collect();
    let accepted: Vec<usize> = (0..dim)
        .filter(|&k| {
            let w: f64 = eig.vector(k).iter().zip(&top).filter(|(_, &t)| t).map(|(c, _)| c.norm_sqr()).sum();
            w <= ARTIFACT_WEIGHT
        })
        .collect();
    let (best, excluded) = match accepted.first() {
        Some(&k) => (k, k),
        None => (0, 0),
    };
    let sigma = |k: usize| eig.values[k].max(0.0).sqrt();
    let degenerate = accepted.get(1).is_some_and(|&k| sigma(k) - sigma(best) <= DEGENERACY_TOL);

    let mut v: Vec<C64> = eig.vector(best).to_vec();
    let pivot = v.iter().enumerate().fold(0, |acc, (i, c)| if c.norm() > v[acc].norm() { i } else { acc });
    let phase = v[pivot].conj() / v[pivot].norm();
    for c in v.iter_mut() {
        *c *= phase;
    }
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
    let vector = FockVector::new(spec, v)?.normalized()?;
    // Measure the defect directly rather than trusting the eigenvalue near zero.
    let mut defect_sq = 0.0;
    for g in gs {
        defect_sq += g.apply(&vector)?.norm_sqr();
    }
    Ok(PrimedVacuum { vector, defect: defect_sq.sqrt(), degenerate, excluded_artifacts: excluded })
}

/// Best approximate joint eigenvector of `G_l` with eigenvalues `w'_l`: the
/// primed vacuum of `G_l − w'_l`.
pub fn primed_coherent(gs: &[OperatorMatrix], eigenvalues: &[C64]) -> Result<PrimedVacuum> {
    if gs.len() != eigenvalues.len() {
        return Err(Error::WrongOperatorCount { expected: gs.len(), got: eigenvalues.len() });
    }
    let shifted: Vec<OperatorMatrix> = gs
        .iter()
        .zip(eigenvalues)
        .map(|(g, &w)| g.try_sub(&OperatorMatrix::identity(g.spec()).scaled(w)))
        .collect::<Result<_>>()?;
    primed_vacuum_joint(&shifted)
}

/// Outcome of [`coherence_map_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    /// `w' = g(z, z̄)`.
    pub classical_image: Vec<C64>,
    /// `(Σ_l ‖(G_l − w'_l)|z⟩‖²)^{1/2}`.
    pub residual: f64,
    pub per_mode: Vec<f64>,
    /// Truncation bound on `residual` valid when the map is holomorphic.
    pub bound: f64,
    /// Defect of the best primed eigenvector of `G` with eigenvalue `w'`.
    pub primed_defect: f64,
}

impl CoherenceReport {
    pub fn within_bound(&self) -> bool {
        self.residual <= self.bound
    }
}

/// Transports `|z⟩` through the quantized map and measures how far it is
/// from an eigenvector of `a' = G` with the classical eigenvalue `g(z, z̄)`.
pub fn coherence_map_test(map: &PolyMap, label: &CoherentLabel, spec: ModeSpec) -> Result<CoherenceReport> {
    let v = coherent_vector(label, spec)?;
    let z = label.components();
    let classical_image = map.eval(z)?;
    let gs = realize_map(&normal_order_quantize(map), spec)?;
    let mut per_mode = Vec::with_capacity(gs.len());
    for (g, &w) in gs.iter().zip(&classical_image) {
        per_mode.push(g.apply(&v)?.sub(&v.scaled(w))?.norm());
    }
    let residual = per_mode.iter().map(|r| r * r).sum::<f64>().sqrt();
    let bound = transport_bound(map, z, spec.cutoff());
    let primed_defect = primed_coherent(&gs, &classical_image)?.defect;
    Ok(CoherenceReport { classical_image, residual, per_mode, bound, primed_defect })
}

/// For `Π a_l^{d_l}` acting on `|z⟩`, the truncation error is
/// `Π|z_l|^{d_l}` times the norm of the coherent amplitudes above `N − d_l`.
/// Creation operators are counted as annihilators, so for nonholomorphic maps
/// this is the bound a holomorphic map of the same shape would satisfy.
fn transport_bound(map: &PolyMap, z: &[C64], cutoff: usize) -> f64 {
    let amps: Vec<Vec<C64>> = z.iter().map(|&zl| coherent_amplitudes(zl, cutoff)).collect();
    // tail[l][d] = ‖(c_k)_{N−d<k≤N}‖
    let tail: Vec<Vec<f64>> = amps
        .iter()
        .map(|a| {
            let mut t = vec![0.0; cutoff + 2];
            let mut acc = 0.0;
            for d in 1..=cutoff + 1 {
                acc += a[cutoff + 1 - d].norm_sqr();
                t[d] = acc.sqrt();
            }
            t
        })
        .collect();
    let mut total_sq = 0.0;
    let mut scale = 0.0;
    for p in map.components() {
        let mut b = 0.0;
        for (m, c) in p.terms() {
            let mut weight = c.norm();
            let mut t = 0.0;
            for l in 0..z.len() {
                let d = (m.holo[l] + m.anti[l]) as usize;
                weight *= z[l].norm().powi(d as i32);
                t += tail[l][d.min(cutoff + 1)];
            }
            b += weight * t;
            scale += weight;
        }
        total_sq += b * b;
    }
    total_sq.sqrt() + 1e-12 * (1.0 + scale)
}

/// `max_{l,m} ‖[G_l, G_m†] − δ_lm‖` on the reliable block.
pub fn commutator_diagnostic(map: &PolyMap, spec: ModeSpec) -> Result<f64> {
    let gs = realize_map(&normal_order_quantize(map), spec)?;
    let reliable = spec.reliable();
    let mut worst = 0.0f64;
    for (l, gl) in gs.iter().enumerate() {
        for (m, gm) in gs.iter().enumerate() {
            let gm_dag = gm.adjoint();
            let mut c = gl.try_mul(&gm_dag)?.try_sub(&gm_dag.try_mul(gl)?)?;
            if l == m {
                c = c.try_sub(&OperatorMatrix::identity(spec))?;
            }
            worst = worst.max(c.restrict(reliable)?.max_norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_ladder, number_operator};
    use crate::phase_space::Monomial;

    const ONE: C64 = C64::new(1.0, 0.0);

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn single(terms: &[(C64, u32, u32)]) -> PolyMap {
        let p =
            Poly::from_terms(1, terms.iter().map(|&(k, j, a)| (k, Monomial::new(vec![j], vec![a]).unwrap()))).unwrap();
        PolyMap::new(1, vec![p]).unwrap()
    }

    fn g_of(map: &PolyMap, spec: ModeSpec) -> OperatorMatrix {
        realize_map(&normal_order_quantize(map), spec).unwrap().remove(0)
    }

    #[test]
    fn quantization_orders_creators_left() {
        let q = normal_order_quantize(&single(&[(c(1.0), 1, 1)]));
        let m = NormalMonomial { creators: vec![1], annihilators: vec![1] };
        assert_eq!(q.components[0].coefficient(&m), c(1.0));
        let spec = ModeSpec::new(1, 8).unwrap();
        assert_eq!(g_of(&single(&[(c(1.0), 1, 1)]), spec), number_operator(spec, 0).unwrap());
    }

    #[test]
    fn ladder_maps_realize_to_ladder_matrices() {
        let spec = ModeSpec::new(1, 8).unwrap();
        let (a, a_dag) = make_ladder(spec, 0).unwrap();
        assert_eq!(g_of(&PolyMap::identity(1), spec), a);
        assert_eq!(g_of(&single(&[(c(1.0), 0, 1)]), spec), a_dag);
        let q = g_of(&single(&[(c(1.0), 1, 0), (c(1.0), 0, 1)]), spec);
        let one = FockVector::basis(spec, &[1]).unwrap();
        assert_eq!(q.apply(&FockVector::vacuum(spec)).unwrap(), one);
    }

    #[test]
    fn realization_matches_ladder_products() {
        let spec = ModeSpec::new(2, 6).unwrap();
        let (a0, d0) = make_ladder(spec, 0).unwrap();
        let (a1, d1) = make_ladder(spec, 1).unwrap();
        let m = Monomial::new(vec![2, 1], vec![1, 2]).unwrap();
        let p = Poly::from_terms(2, [(C64::new(0.5, -1.0), m)]).unwrap();
        let map = PolyMap::new(2, vec![p.clone(), p]).unwrap();
        let g = realize_map(&normal_order_quantize(&map), spec).unwrap().remove(0);
        let oracle = (&(&(&d0 * &(&d1 * &d1)) * &(&a0 * &a0)) * &a1).scaled(C64::new(0.5, -1.0));
        assert!(g.max_abs_diff(&oracle).unwrap() < 1e-13);
    }

    #[test]
    fn degree_above_cutoff_rejected() {
        let spec = ModeSpec::new(1, 2).unwrap();
        let err = realize_map(&normal_order_quantize(&single(&[(c(1.0), 3, 0)])), spec).unwrap_err();
        assert_eq!(err, Error::DegreeExceedsCutoff { degree: 3, cutoff: 2 });
    }

    #[test]
    fn vacuum_residual_examples() {
        let spec = ModeSpec::new(1, 8).unwrap();
        let rot = PolyMap::linear(C64::from_polar(1.0, 0.7), ZERO);
        assert_eq!(vacuum_residual(&g_of(&rot, spec)), 0.0);
        assert_eq!(vacuum_residual(&g_of(&PolyMap::linear(ONE, ONE), spec)), 1.0);
        let eps = vacuum_residual(&g_of(&PolyMap::linear(ONE, c(0.3)), spec));
        assert!((eps - 0.3).abs() < 1e-15);
    }

    #[test]
    fn primed_vacuum_of_a_is_fock_vacuum() {
        let spec = ModeSpec::new(1, 10).unwrap();
        let pv = primed_vacuum(&g_of(&PolyMap::identity(1), spec)).unwrap();
        assert_eq!(pv.defect, 0.0);
        assert!((pv.vacuum_overlap() - 1.0).abs() < 1e-14);
        assert!(!pv.degenerate);
    }

    #[test]
    fn primed_vacuum_of_creator_has_unit_defect() {
        let spec = ModeSpec::new(1, 10).unwrap();
        let pv = primed_vacuum(&g_of(&single(&[(c(1.0), 0, 1)]), spec)).unwrap();
        assert_eq!(pv.excluded_artifacts, 1);
        assert!((pv.defect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bogoliubov_primed_vacuum_overlap() {
        let spec = ModeSpec::new(1, 32).unwrap();
        let map = PolyMap::linear(c(1.0), c(0.3));
        let pv = primed_vacuum(&g_of(&map, spec)).unwrap();
        assert!(pv.defect < 1e-6, "{}", pv.defect);
        // Null vector of a + εa† has c₀ = (1 − ε²)^{1/4}.
        let expected = (1.0f64 - 0.09).powf(0.25);
        assert!((pv.vacuum_overlap() - expected).abs() < 1e-8);
        assert!(pv.vacuum_overlap() < 1.0);
    }

    #[test]
    fn coherence_of_identity_is_eigen_residual() {
        let spec = ModeSpec::new(1, 12).unwrap();
        let label = CoherentLabel::single(C64::new(0.9, -0.4)).unwrap();
        let rep = coherence_map_test(&PolyMap::identity(1), &label, spec).unwrap();
        let expected = crate::coherent::eigen_residual(&label, spec).unwrap()[0];
        assert!((rep.residual - expected).abs() < 1e-15);
        assert!(rep.within_bound());
    }

    #[test]
    fn coherence_square_vs_sum() {
        let spec = ModeSpec::new(1, 48).unwrap();
        let label = CoherentLabel::single(c(0.8)).unwrap();
        let sq = coherence_map_test(&single(&[(c(1.0), 2, 0)]), &label, spec).unwrap();
        assert!(sq.residual <= 1e-6 && sq.within_bound());
        assert!((sq.classical_image[0] - c(0.64)).norm() < 1e-15);
        let sum = coherence_map_test(&PolyMap::linear(ONE, ONE), &label, spec).unwrap();
        assert!((sum.residual - 1.0).abs() < 1e-10);
        assert!(!sum.within_bound());
    }

    #[test]
    fn commutator_examples() {
        let spec = ModeSpec::new(1, 16).unwrap();
        assert!(commutator_diagnostic(&PolyMap::identity(1), spec).unwrap() < 1e-14);
        let t = 0.5f64;
        let bog = PolyMap::linear(c(t.cosh()), c(t.sinh()));
        assert!(commutator_diagnostic(&bog, spec).unwrap() <= 1e-10);
        let sum = commutator_diagnostic(&PolyMap::linear(ONE, ONE), spec).unwrap();
        assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn conjugation_gives_adjoint() {
        let spec = ModeSpec::new(1, 6).unwrap();
        let map = single(&[(c(0.5), 2, 0), (c(-1.5), 1, 1), (c(2.0), 0, 1)]);
        let g = g_of(&map, spec);
        let g_conj = g_of(&map.conjugate(), spec);
        assert!(g_conj.max_abs_diff(&g.adjoint()).unwrap() < 1e-14);
    }
}
