//! Chart atlases with polynomial transitions.
//!
//! An atlas is holomorphic when every transition is; its quantum counterpart is
//! that every chart observer shares the Fock vacuum and the coherent states.
//! [`coherence_report`] measures the latter directly. [`duality_filter`]
//! sorts user-declared coordinate changes into canonical and non-canonical
//! ones and checks whether the canonical nonholomorphic ones close under
//! composition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::coherent::CoherentLabel;
use crate::fock::ModeSpec;
use crate::phase_space::{
    canonicity_check, dbar_classify, default_samples, DbarClassification, Holomorphy, PolyMap, SymplecticForm,
    DEFAULT_CANONICITY_TOL,
};
use crate::quantize::{
    coherence_map_test, normal_order_quantize, primed_vacuum_joint, realize_map, vacuum_residual_joint,
};
use crate::{Error, Result, C64};

/// Largest defect allowed when an inverse pair is composed at the samples.
pub const INVERSE_TOL: f64 = 1e-8;
/// Coefficient tolerance for structural matches in [`duality_filter`].
pub const CLOSURE_TOL: f64 = 1e-9;
/// Upper limit on the number of words [`duality_filter`] will form.
pub const MAX_WORDS: usize = 100_000;

/// Informational coordinate box `[lo, hi]` in every real coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: String,
    pub domain: Option<DomainBox>,
}

impl Chart {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), domain: None }
    }
}

/// Directed transition `from → to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub map: PolyMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    n_modes: usize,
    charts: Vec<Chart>,
    transitions: BTreeMap<(String, String), PolyMap>,
}

impl Atlas {
    /// Validates names, endpoints, connectivity and inverse pairs.
    pub fn new(n_modes: usize, charts: Vec<Chart>, transitions: Vec<Transition>) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidAtlas("an atlas needs at least one mode".into()));
        }
        if charts.is_empty() {
            return Err(Error::InvalidAtlas("an atlas needs at least one chart".into()));
        }
        let mut names = BTreeSet::new();
        for c in &charts {
            if c.name.is_empty() || c.name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidAtlas(format!("invalid chart name {:?}", c.name)));
            }
            if !names.insert(c.name.clone()) {
                return Err(Error::InvalidAtlas(format!("duplicate chart {}", c.name)));
            }
            if let Some(b) = c.domain {
                if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi) {
                    return Err(Error::InvalidAtlas(format!("empty domain box on chart {}", c.name)));
                }
            }
        }
        let mut map = BTreeMap::new();
        for t in transitions {
            for end in [&t.from, &t.to] {
                if !names.contains(end) {
                    return Err(Error::InvalidAtlas(format!("transition names unknown chart {end}")));
                }
            }
            if t.from == t.to {
                return Err(Error::InvalidAtlas(format!("transition from {} to itself", t.from)));
            }
            if t.map.n_modes() != n_modes {
                return Err(Error::DimensionMismatch { left: t.map.n_modes(), right: n_modes });
            }
            let key = (t.from, t.to);
            if map.contains_key(&key) {
                return Err(Error::InvalidAtlas(format!("duplicate transition {} -> {}", key.0, key.1)));
            }
            map.insert(key, t.map);
        }
        let atlas = Self { n_modes, charts, transitions: map };
        atlas.check_connected()?;
        atlas.check_inverses()?;
        Ok(atlas)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    /// Transitions in `(from, to)` order.
    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, &PolyMap)> {
        self.transitions.iter().map(|((a, b), m)| (a.as_str(), b.as_str(), m))
    }

    pub fn transition(&self, from: &str, to: &str) -> Option<&PolyMap> {
        self.transitions.get(&(String::from(from), String::from(to)))
    }

    fn check_connected(&self) -> Result<()> {
        let names: Vec<&str> = self.charts.iter().map(|c| c.name.as_str()).collect();
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in self.transitions.keys() {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen = BTreeSet::from([names[0]]);
        let mut stack = vec![names[0]];
        while let Some(n) = stack.pop() {
            for &m in adj.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        match names.iter().find(|n| !seen.contains(*n)) {
            Some(missing) => Err(Error::MissingTransition(names[0].into(), (*missing).into())),
            None => Ok(()),
        }
    }

    fn check_inverses(&self) -> Result<()> {
        let samples = default_samples(self.n_modes);
        for ((a, b), forward) in &self.transitions {
            if a > b {
                continue;
            }
            let Some(back) = self.transitions.get(&(b.clone(), a.clone())) else { continue };
            for w in &samples {
                let round = back.eval(&forward.eval(w)?)?;
                let defect = round.iter().zip(w).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                if defect.is_nan() || defect > INVERSE_TOL {
                    return Err(Error::InvalidAtlas(format!(
                        "{a} -> {b} and {b} -> {a} are not inverse (defect {defect:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructureVerdict {
    ComplexStructure,
    AlmostComplexOnly,
}

impl StructureVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructureVerdict::ComplexStructure => "ComplexStructure",
            StructureVerdict::AlmostComplexOnly => "AlmostComplexOnly",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionClass {
    pub from: String,
    pub to: String,
    pub classification: DbarClassification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtlasClassification {
    pub verdict: StructureVerdict,
    pub transitions: Vec<TransitionClass>,
    /// `(from, to)` of every non-holomorphic transition.
    pub witnesses: Vec<(String, String)>,
}

pub fn classify_atlas(atlas: &Atlas) -> AtlasClassification {
    let mut transitions = Vec::new();
    let mut witnesses = Vec::new();
    for (from, to, map) in atlas.transitions() {
        let classification = dbar_classify(map);
        if classification.class != Holomorphy::Holomorphic {
            witnesses.push((from.into(), to.into()));
        }
        transitions.push(TransitionClass { from: from.into(), to: to.into(), classification });
    }
    let verdict =
        if witnesses.is_empty() { StructureVerdict::ComplexStructure } else { StructureVerdict::AlmostComplexOnly };
    AtlasClassification { verdict, transitions, witnesses }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoherenceVerdict {
    Global,
    GlobalUpToDisplacement,
    Local,
}

impl CoherenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoherenceVerdict::Global => "GLOBAL",
            CoherenceVerdict::GlobalUpToDisplacement => "GLOBAL-UP-TO-DISPLACEMENT",
            CoherenceVerdict::Local => "LOCAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub residual: f64,
    pub bound: f64,
    pub primed_defect: f64,
}

/// Quantum comparison of the two observers joined by one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCoherence {
    pub from: String,
    pub to: String,
    pub vacuum_residual: f64,
    /// `|⟨0|0'⟩|` for the primed vacuum of the quantized transition.
    pub vacuum_overlap: f64,
    pub primed_defect: f64,
    pub primed_degenerate: bool,
    /// `g(0)`.
    pub offset: Vec<C64>,
    pub probes: Vec<ProbeResult>,
    /// Both observers share the vacuum ray and the coherent states.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtlasCoherence {
    pub verdict: CoherenceVerdict,
    pub transitions: Vec<TransitionCoherence>,
    /// `(from, to)` of every transition whose observers disagree.
    pub disagreeing: Vec<(String, String)>,
}

/// Quantizes every transition and tests the vacuum and each probe.
///
/// A transition agrees when every probe residual lies within its holomorphic
/// transport bound and the vacuum is mapped to a multiple of itself
/// (`‖G|0⟩‖ = |g(0)|`). Agreement everywhere with some `g(0) ≠ 0` is reported as
/// [`CoherenceVerdict::GlobalUpToDisplacement`].
pub fn coherence_report(atlas: &Atlas, spec: ModeSpec, probes: &[CoherentLabel]) -> Result<AtlasCoherence> {
    if spec.n_modes() != atlas.n_modes() {
        return Err(Error::DimensionMismatch { left: spec.n_modes(), right: atlas.n_modes() });
    }
    let mut transitions = Vec::new();
    let mut disagreeing = Vec::new();
    let mut displaced = false;
    for (from, to, map) in atlas.transitions() {
        let gs = realize_map(&normal_order_quantize(map), spec)?;
        let vacuum_residual = vacuum_residual_joint(&gs);
        let primed = primed_vacuum_joint(&gs)?;
        let offset = map.offset();
        let offset_norm = offset.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut probe_results = Vec::with_capacity(probes.len());
        let mut agrees = vacuum_residual <= offset_norm + 1e-12 * (1.0 + offset_norm);
        for label in probes {
            let rep = coherence_map_test(map, label, spec)?;
            agrees &= rep.within_bound();
            probe_results.push(ProbeResult {
                residual: rep.residual,
                bound: rep.bound,
                primed_defect: rep.primed_defect,
            });
        }
        if !agrees {
            disagreeing.push((from.into(), to.into()));
        }
        displaced |= !map.preserves_origin();
        transitions.push(TransitionCoherence {
            from: from.into(),
            to: to.into(),
            vacuum_residual,
            vacuum_overlap: primed.vacuum_overlap(),
            primed_defect: primed.defect,
            primed_degenerate: primed.degenerate,
            offset,
            probes: probe_results,
            agrees,
        });
    }
    let verdict = if !disagreeing.is_empty() {
        CoherenceVerdict::Local
    } else if displaced {
        CoherenceVerdict::GlobalUpToDisplacement
    } else {
        CoherenceVerdict::Global
    };
    Ok(AtlasCoherence { verdict, transitions, disagreeing })
}

/// Named coordinate changes to test as duality transformations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityCandidateSet {
    generators: Vec<(String, PolyMap)>,
    composition_depth: usize,
}

impl DualityCandidateSet {
    pub fn new(generators: Vec<(String, PolyMap)>, composition_depth: usize) -> Result<Self> {
        if composition_depth == 0 {
            return Err(Error::InvalidCandidates("composition depth must be at least 1".into()));
        }
        let n = generators.first().map(|(_, m)| m.n_modes());
        let mut names = BTreeSet::new();
        for (name, map) in &generators {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidCandidates(format!("duplicate generator {name}")));
            }
            if Some(map.n_modes()) != n {
                return Err(Error::InvalidCandidates(format!("generator {name} has a different mode count")));
            }
        }
        Ok(Self { generators, composition_depth })
    }

    pub fn generators(&self) -> &[(String, PolyMap)] {
        &self.generators
    }

    pub fn composition_depth(&self) -> usize {
        self.composition_depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DualityCategory {
    HolomorphicCanonical,
    NonholomorphicCanonical,
    NonCanonical,
}

impl DualityCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            DualityCategory::HolomorphicCanonical => "holomorphic-canonical",
            DualityCategory::NonholomorphicCanonical => "nonholomorphic-canonical",
            DualityCategory::NonCanonical => "non-canonical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorVerdict {
    pub name: String,
    pub class: Holomorphy,
    pub category: DualityCategory,
    pub canonicity_defect: f64,
    /// `MᵀΩM = −Ω` at every sample.
    pub anti_canonical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductCheck {
    /// Generator names, outermost first: `[f, g]` is `f ∘ g`.
    pub word: Vec<String>,
    /// Element of the comparison set the product equals, if any.
    pub matches: Option<String>,
    /// The degree cap dropped terms while composing.
    pub inexact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub generators: Vec<GeneratorVerdict>,
    pub products: Vec<ProductCheck>,
    pub closed: bool,
}

impl DualityReport {
    pub fn outside(&self) -> impl Iterator<Item = &ProductCheck> {
        self.products.iter().filter(|p| p.matches.is_none())
    }
}

/// Partitions the generators and checks closure of the canonical
/// nonholomorphic ones.
///
/// Words of length `2..=depth` in the nonholomorphic-canonical generators are
/// composed and compared coefficient-wise, within [`CLOSURE_TOL`], against
/// those generators, the holomorphic-canonical generators and the identity.
pub fn duality_filter(candidates: &DualityCandidateSet, omega: &SymplecticForm) -> Result<DualityReport> {
    let mut verdicts = Vec::new();
    for (name, map) in &candidates.generators {
        let samples = default_samples(map.n_modes());
        let can = canonicity_check(map, omega, &samples, DEFAULT_CANONICITY_TOL)?;
        let class = dbar_classify(map).class;
        let category = match (can.canonical, class) {
            (false, _) => DualityCategory::NonCanonical,
            (true, Holomorphy::Holomorphic) => DualityCategory::HolomorphicCanonical,
            (true, _) => DualityCategory::NonholomorphicCanonical,
        };
        verdicts.push(GeneratorVerdict {
            name: name.clone(),
            class,
            category,
            canonicity_defect: can.max_defect,
            anti_canonical: can.anti_canonical(DEFAULT_CANONICITY_TOL),
        });
    }

    let dual: Vec<&(String, PolyMap)> = candidates
        .generators
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.category == DualityCategory::NonholomorphicCanonical)
        .map(|(g, _)| g)
        .collect();
    let mut reference: Vec<(String, PolyMap)> = candidates
        .generators
        .iter()
        .zip(&verdicts)
        .filter(|(_, v)| v.category != DualityCategory::NonCanonical)
        .map(|(g, _)| g.clone())
        .collect();
    if let Some((_, m)) = candidates.generators.first() {
        reference.push((String::from("identity"), PolyMap::identity(m.n_modes())));
    }

    let k = dual.len();
    let mut total = 0usize;
    for len in 2..=candidates.composition_depth {
        let count = u32::try_from(len).ok().and_then(|e| k.checked_pow(e));
        total = count.and_then(|c| total.checked_add(c)).filter(|&t| t <= MAX_WORDS).ok_or_else(|| {
            Error::InvalidCandidates(format!("more than {MAX_WORDS} words at depth {}", candidates.composition_depth))
        })?;
    }

    let mut products = Vec::with_capacity(total);
    // Extend words one generator at a time, innermost on the right.
    let mut layer: Vec<(Vec<usize>, PolyMap, bool)> = (0..k).map(|i| (vec![i], dual[i].1.clone(), false)).collect();
    for _ in 2..=candidates.composition_depth {
        let mut next = Vec::with_capacity(layer.len() * k);
        for (word, map, inexact) in &layer {
            for (i, (_, g)) in dual.iter().enumerate() {
                let comp = g.compose(map)?;
                let mut w = Vec::with_capacity(word.len() + 1);
                w.push(i);
                w.extend_from_slice(word);
                let exact = comp.is_exact();
                next.push((w, comp.map, *inexact || !exact));
            }
        }
        for (word, map, inexact) in &next {
            let matches = reference.iter().find(|(_, r)| r.approx_eq(map, CLOSURE_TOL)).map(|(n, _)| n.clone());
            products.push(ProductCheck {
                word: word.iter().map(|&i| dual[i].0.clone()).collect(),
                matches,
                inexact: *inexact,
            });
        }
        layer = next;
    }
    let closed = products.iter().all(|p| p.matches.is_some());
    Ok(DualityReport { generators: verdicts, products, closed })
}
