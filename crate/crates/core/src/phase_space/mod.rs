//! Classical phase space: polynomial coordinate changes `w' = g(w, w̄)`.
//!
//! Maps are polynomials in `w` and `w̄` with a degree cap, so the `∂̄` test is
//! exact coefficient inspection: a map is holomorphic precisely when no term
//! carries a `w̄` exponent.

mod poly;
mod symplectic;

pub use poly::{Composition, Monomial, Poly, PolyMap, Term};
pub use symplectic::{
    canonicity_check, default_samples, j_check, j_standard, AlmostComplexStructure, CanonicityReport, JCheck,
    SymplecticForm, DEFAULT_CANONICITY_TOL, DEFAULT_SAMPLE_COUNT,
};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Holomorphy {
    Holomorphic,
    Antiholomorphic,
    Mixed,
}

impl Holomorphy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Holomorphy::Holomorphic => "Holomorphic",
            Holomorphy::Antiholomorphic => "Antiholomorphic",
            Holomorphy::Mixed => "Mixed",
        }
    }
}

/// A term proving `∂̄g ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Output component carrying the term.
    pub component: usize,
    pub monomial: Monomial,
    pub coefficient: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbarClassification {
    pub class: Holomorphy,
    /// Set for constant maps, which are both holomorphic and antiholomorphic.
    pub degenerate: bool,
    pub witness: Option<Witness>,
}

/// Classifies a map by inspecting which of `w`, `w̄` its terms depend on.
///
/// The witness is the first term, in component order and then canonical term
/// order, that carries a `w̄` exponent.
pub fn dbar_classify(map: &PolyMap) -> DbarClassification {
    let mut depends_on_w = false;
    let mut witness = None;
    for (l, p) in map.components().iter().enumerate() {
        for (m, c) in p.terms() {
            if m.holo_degree() > 0 {
                depends_on_w = true;
            }
            if m.anti_degree() > 0 && witness.is_none() {
                witness = Some(Witness { component: l, monomial: m.clone(), coefficient: *c });
            }
        }
    }
    match (depends_on_w, witness) {
        (w, None) => DbarClassification { class: Holomorphy::Holomorphic, degenerate: !w, witness: None },
        (false, Some(wit)) => {
            DbarClassification { class: Holomorphy::Antiholomorphic, degenerate: false, witness: Some(wit) }
        }
        (true, Some(wit)) => DbarClassification { class: Holomorphy::Mixed, degenerate: false, witness: Some(wit) },
    }
}
