//! Coherent states `|z⟩` on a truncated Fock space.
//!
//! Amplitudes are the exact untruncated ones, `e^{−|z|²/2} zᵏ/√k!` for
//! `k ≤ cutoff`, so a truncated coherent vector has norm² equal to the Poisson
//! mass retained below the cutoff rather than one.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::fock::{FockVector, ModeSpec, OperatorMatrix};
use crate::phase_space::PolyMap;
use crate::quadrature::QuadratureGrid;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Product grids larger than this are refused by [`resolve_unity`].
pub const MAX_QUADRATURE_NODES: usize = 4_000_000;

/// Label `z = (z₁,…,zₙ)` of a multi-mode coherent state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentLabel {
    z: Vec<C64>,
}

impl CoherentLabel {
    pub const DEFAULT_RADIUS_BOUND: f64 = 6.0;

    pub fn new(z: Vec<C64>) -> Result<Self> {
        Self::with_bound(z, Self::DEFAULT_RADIUS_BOUND)
    }

    /// Rejects components with `|z_l| > bound`.
    pub fn with_bound(z: Vec<C64>, bound: f64) -> Result<Self> {
        for c in &z {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("coherent label"));
            }
            let r = c.norm();
            if r > bound {
                return Err(Error::RadiusExceeded { radius: r, bound });
            }
        }
        if z.is_empty() {
            return Err(Error::InvalidModeSpec("empty coherent label".into()));
        }
        Ok(Self { z })
    }

    pub fn single(z: C64) -> Result<Self> {
        Self::new(vec![z])
    }

    pub fn components(&self) -> &[C64] {
        &self.z
    }

    pub fn n_modes(&self) -> usize {
        self.z.len()
    }

    fn check(&self, spec: &ModeSpec) -> Result<()> {
        if self.z.len() != spec.n_modes() {
            return Err(Error::DimensionMismatch { left: self.z.len(), right: spec.n_modes() });
        }
        Ok(())
    }
}

/// Single-mode amplitudes `e^{−|z|²/2} zᵏ/√k!`, `k = 0..=cutoff`.
pub fn coherent_amplitudes(z: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    out.push(c);
    for k in 1..=cutoff {
        c = c * z / (k as f64).sqrt();
        out.push(c);
    }
    out
}

fn kron(parts: &[Vec<C64>]) -> Vec<C64> {
    let mut acc = vec![C64::new(1.0, 0.0)];
    for p in parts {
        let mut next = Vec::with_capacity(acc.len() * p.len());
        for a in &acc {
            for b in p {
                next.push(a * b);
            }
        }
        acc = next;
    }
    acc
}

/// Tensor product of single-mode coherent vectors, truncated at the cutoff.
pub fn coherent_vector(label: &CoherentLabel, spec: ModeSpec) -> Result<FockVector> {
    label.check(&spec)?;
    let parts: Vec<Vec<C64>> = label.z.iter().map(|&z| coherent_amplitudes(z, spec.cutoff())).collect();
    FockVector::new(spec, kron(&parts))
}

/// Squared norm of the truncated coherent vector: the retained Poisson mass.
pub fn retained_mass(label: &CoherentLabel, spec: ModeSpec) -> Result<f64> {
    label.check(&spec)?;
    Ok(label
        .z
        .iter()
        .map(|&z| coherent_amplitudes(z, spec.cutoff()).iter().map(|c| c.norm_sqr()).sum::<f64>())
        .product())
}

/// Upper bound on `‖(a − z)|z⟩‖` for a single mode truncated at `cutoff`.
///
/// The residual is exactly `|z|·|c_N| = e^{−|z|²/2} |z|^{N+1}/√N!`; the bound
/// drops the Gaussian factor.
pub fn tail_bound(radius: f64, cutoff: usize) -> f64 {
    if radius == 0.0 {
        return 0.0;
    }
    let log_fact: f64 = (1..=cutoff).map(|k| (k as f64).ln()).sum();
    ((cutoff as f64 + 1.0) * radius.ln() - 0.5 * log_fact).exp()
}

/// `‖(a_l − z_l)|z⟩‖` for every mode `l`.
pub fn eigen_residual(label: &CoherentLabel, spec: ModeSpec) -> Result<Vec<f64>> {
    label.check(&spec)?;
    let n = spec.cutoff();
    let amps: Vec<Vec<C64>> = label.z.iter().map(|&z| coherent_amplitudes(z, n)).collect();
    let norms: Vec<f64> = amps.iter().map(|a| a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut out = Vec::with_capacity(label.n_modes());
    for (l, (&z, a)) in label.z.iter().zip(&amps).enumerate() {
        // (a − z)|z⟩ on one mode: √(k+1) c_{k+1} − z c_k, top level loses its raising partner.
        let single: f64 = (0..=n)
            .map(|k| {
                let lowered = if k < n { a[k + 1] * ((k + 1) as f64).sqrt() } else { ZERO };
                (lowered - z * a[k]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        let others: f64 = norms.iter().enumerate().filter(|(m, _)| *m != l).map(|(_, v)| v).product();
        out.push(single * others);
    }
    Ok(out)
}

/// `⟨z₁|z₂⟩` of truncated coherent vectors.
pub fn overlap(z1: &CoherentLabel, z2: &CoherentLabel, spec: ModeSpec) -> Result<C64> {
    z1.check(&spec)?;
    z2.check(&spec)?;
    let n = spec.cutoff();
    Ok(z1
        .z
        .iter()
        .zip(&z2.z)
        .map(|(&a, &b)| {
            coherent_amplitudes(a, n).iter().zip(coherent_amplitudes(b, n)).map(|(x, y)| x.conj() * y).sum::<C64>()
        })
        .product())
}

/// Family of states integrated by [`resolve_unity`].
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    /// `|w⟩` itself.
    Coherent,
    /// `|g(w, w̄)⟩`: the coherent state at the transformed classical point,
    /// integrated against the original measure.
    Transported(PolyMap),
}

/// Outcome of [`resolve_unity`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnityReport {
    /// `S − 1` on the reliable block (levels `≤ cutoff/2` in every mode).
    pub residual: OperatorMatrix,
    pub max_residual: f64,
    /// `S₀₀`, the vacuum-vacuum entry of the integrated projector.
    pub vacuum_entry: f64,
    pub nodes: usize,
}

/// `S = ∫ |ψ(w)⟩⟨ψ(w)| dμ(w)` with `dμ = Π d²w_l/π`, evaluated on the product
/// grid and compared with the identity on the reliable block.
///
/// With `tolerance` set, the [`StateFamily::Coherent`] family must reach it or
/// the measured defect is returned as [`Error::QuadratureNotConverged`].
/// Transported families are only measured. Amplitudes are built directly from
/// their closed form, so labels beyond the coherent radius bound are allowed
/// here: entries on the reliable block do not depend on the truncation tail.
pub fn resolve_unity(
    spec: ModeSpec,
    grid: &QuadratureGrid,
    family: &StateFamily,
    tolerance: Option<f64>,
) -> Result<UnityReport> {
    if let StateFamily::Transported(map) = family {
        if map.n_modes() != spec.n_modes() {
            return Err(Error::DimensionMismatch { left: map.n_modes(), right: spec.n_modes() });
        }
    }
    let n_modes = spec.n_modes();
    let per_mode = grid.len();
    let total = u32::try_from(n_modes)
        .ok()
        .and_then(|e| per_mode.checked_pow(e))
        .filter(|&t| t <= MAX_QUADRATURE_NODES)
        .ok_or_else(|| {
            Error::InvalidGrid(alloc::format!("{per_mode}^{n_modes} product nodes exceed {MAX_QUADRATURE_NODES}"))
        })?;

    let reliable = spec.reliable();
    let levels = reliable.cutoff();
    let dim = reliable.dim();
    let nodes: Vec<(C64, f64)> = grid.nodes().collect();
    let mut s = vec![ZERO; dim * dim];
    let mut comp = vec![ZERO; dim * dim];
    let mut point = vec![ZERO; n_modes];
    let mut index = vec![0usize; n_modes];
    for _ in 0..total {
        let mut weight = 1.0;
        for (l, &i) in index.iter().enumerate() {
            point[l] = nodes[i].0;
            weight *= nodes[i].1;
        }
        let labels = match family {
            StateFamily::Coherent => point.clone(),
            StateFamily::Transported(map) => map.eval(&point)?,
        };
        let parts: Vec<Vec<C64>> = labels.iter().map(|&z| coherent_amplitudes(z, levels)).collect();
        let psi = kron(&parts);
        for i in 0..dim {
            let wi = psi[i] * weight;
            if wi == ZERO {
                continue;
            }
            let row = &mut s[i * dim..(i + 1) * dim];
            let row_comp = &mut comp[i * dim..(i + 1) * dim];
            for ((entry, c), pj) in row.iter_mut().zip(row_comp.iter_mut()).zip(&psi) {
                let term = wi * pj.conj();
                neumaier_add(&mut entry.re, &mut c.re, term.re);
                neumaier_add(&mut entry.im, &mut c.im, term.im);
            }
        }
        // Odometer over the product grid, last mode fastest.
        for l in (0..n_modes).rev() {
            index[l] += 1;
            if index[l] < per_mode {
                break;
            }
            index[l] = 0;
        }
    }
    for (entry, c) in s.iter_mut().zip(&comp) {
        *entry += *c;
    }
    let vacuum_entry = s[0].re;
    for i in 0..dim {
        s[i * dim + i] -= C64::new(1.0, 0.0);
    }
    let residual = OperatorMatrix::new(reliable, s)?;
    let max_residual = residual.max_norm();
    if !max_residual.is_finite() {
        return Err(Error::NonFinite("resolution of unity"));
    }
    if let (StateFamily::Coherent, Some(tol)) = (family, tolerance) {
        if max_residual > tol {
            return Err(Error::QuadratureNotConverged { defect: max_residual, tolerance: tol });
        }
    }
    Ok(UnityReport { residual, max_residual, vacuum_entry, nodes: total })
}

/// Compensated summation step; `comp` collects the lost low-order bits.
fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
