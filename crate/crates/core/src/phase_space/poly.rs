use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::RealMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Exponents of `w₁^{j₁}…wₙ^{jₙ} w̄₁^{k₁}…w̄ₙ^{kₙ}`.
///
/// Ordering is lexicographic on `(holo, anti)`, which fixes the canonical
/// term order of every polynomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub holo: Vec<u32>,
    pub anti: Vec<u32>,
}

impl Monomial {
    pub fn new(holo: Vec<u32>, anti: Vec<u32>) -> Result<Self> {
        if holo.len() != anti.len() {
            return Err(Error::InvalidPolyMap(format!(
                "exponent lists of different lengths ({} vs {})",
                holo.len(),
                anti.len()
            )));
        }
        Ok(Self { holo, anti })
    }

    pub fn constant(n_vars: usize) -> Self {
        Self { holo: vec![0; n_vars], anti: vec![0; n_vars] }
    }

    /// `w_var`.
    pub fn w(n_vars: usize, var: usize) -> Self {
        let mut m = Self::constant(n_vars);
        m.holo[var] = 1;
        m
    }

    /// `w̄_var`.
    pub fn w_bar(n_vars: usize, var: usize) -> Self {
        let mut m = Self::constant(n_vars);
        m.anti[var] = 1;
        m
    }

    pub fn n_vars(&self) -> usize {
        self.holo.len()
    }

    pub fn degree(&self) -> u32 {
        self.holo.iter().chain(&self.anti).sum()
    }

    pub fn holo_degree(&self) -> u32 {
        self.holo.iter().sum()
    }

    pub fn anti_degree(&self) -> u32 {
        self.anti.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Swaps the roles of `w` and `w̄`.
    pub fn conjugate(&self) -> Self {
        Self { holo: self.anti.clone(), anti: self.holo.clone() }
    }

    fn times(&self, other: &Self) -> Self {
        Self {
            holo: self.holo.iter().zip(&other.holo).map(|(a, b)| a + b).collect(),
            anti: self.anti.iter().zip(&other.anti).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn eval(&self, w: &[C64]) -> C64 {
        let mut v = ONE;
        for (i, z) in w.iter().enumerate() {
            if self.holo[i] > 0 {
                v *= z.powu(self.holo[i]);
            }
            if self.anti[i] > 0 {
                v *= z.conj().powu(self.anti[i]);
            }
        }
        v
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        let single = self.n_vars() == 1;
        let mut parts: Vec<String> = Vec::new();
        let mut push = |base: &str, var: usize, exp: u32| {
            if exp == 0 {
                return;
            }
            let mut s = String::from(base);
            if !single {
                s.push_str(&format!("{}", var + 1));
            }
            if exp > 1 {
                s.push_str(&format!("^{exp}"));
            }
            parts.push(s);
        };
        for v in 0..self.n_vars() {
            push("w", v, self.holo[v]);
        }
        for v in 0..self.n_vars() {
            push("w\u{304}", v, self.anti[v]);
        }
        f.write_str(&parts.join(" "))
    }
}

/// Complex polynomial in `(w, w̄)` with canonically ordered terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    n_vars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero(n_vars: usize) -> Self {
        Self { n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, c: C64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(Monomial::constant(n_vars), c);
        p
    }

    /// The coordinate `w_var` itself.
    pub fn coordinate(n_vars: usize, var: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(Monomial::w(n_vars, var), ONE);
        p
    }

    pub fn from_terms(n_vars: usize, terms: impl IntoIterator<Item = (C64, Monomial)>) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (c, m) in terms {
            if m.n_vars() != n_vars {
                return Err(Error::InvalidPolyMap(format!(
                    "monomial over {} variables in a polynomial over {n_vars}",
                    m.n_vars()
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Terms in canonical order; zero coefficients never appear.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn constant_term(&self) -> C64 {
        self.coefficient(&Monomial::constant(self.n_vars))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: C64) {
        if c == ZERO {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == ZERO {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// Product with terms above `cap` dropped; returns the sum of the
    /// magnitudes of the dropped coefficients alongside.
    pub fn mul_capped(&self, other: &Poly, cap: u32) -> (Poly, f64) {
        let mut out = Poly::zero(self.n_vars);
        let mut dropped = 0.0;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                if ma.degree() + mb.degree() > cap {
                    dropped += c.norm();
                    continue;
                }
                out.add_term(ma.times(mb), c);
            }
        }
        (out, dropped)
    }

    /// Complex conjugate as a function: `Σ c̄ w^k w̄^j`.
    pub fn conjugate(&self) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (m, c) in &self.terms {
            out.add_term(m.conjugate(), c.conj());
        }
        out
    }

    pub fn eval(&self, w: &[C64]) -> C64 {
        self.terms.iter().map(|(m, c)| c * m.eval(w)).sum()
    }

    /// Wirtinger derivative `∂/∂w_var`.
    pub fn d_holo(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.holo[var];
            if e > 0 {
                let mut d = m.clone();
                d.holo[var] -= 1;
                out.add_term(d, c * e as f64);
            }
        }
        out
    }

    /// Wirtinger derivative `∂/∂w̄_var`.
    pub fn d_anti(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.anti[var];
            if e > 0 {
                let mut d = m.clone();
                d.anti[var] -= 1;
                out.add_term(d, c * e as f64);
            }
        }
        out
    }

    /// Largest coefficient difference against `other`, missing terms read as zero.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let mut worst: f64 = 0.0;
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

/// One monomial with its coefficient, as it appears in text formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub monomial: Monomial,
}

/// Polynomial map `w' = g(w, w̄)` from `Cⁿ` to `Cⁿ`, one [`Poly`] per output mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    n_modes: usize,
    max_degree: u32,
    components: Vec<Poly>,
}

/// Result of [`PolyMap::compose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub map: PolyMap,
    /// Sum of the magnitudes of coefficients dropped by the degree cap.
    pub discarded_mass: f64,
}

impl Composition {
    pub fn is_exact(&self) -> bool {
        self.discarded_mass == 0.0
    }
}

impl PolyMap {
    pub const DEFAULT_MAX_DEGREE: u32 = 6;

    pub fn new(n_modes: usize, components: Vec<Poly>) -> Result<Self> {
        Self::with_max_degree(n_modes, components, Self::DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(n_modes: usize, components: Vec<Poly>, max_degree: u32) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidPolyMap("a map needs at least one mode".into()));
        }
        if components.len() != n_modes {
            return Err(Error::InvalidPolyMap(format!("{} component(s) for {n_modes} mode(s)", components.len())));
        }
        for p in &components {
            if p.n_vars() != n_modes {
                return Err(Error::InvalidPolyMap(format!(
                    "component over {} variables in a map over {n_modes}",
                    p.n_vars()
                )));
            }
            let degree = p.degree();
            if degree > max_degree {
                return Err(Error::DegreeOverflow { degree, cap: max_degree });
            }
        }
        Ok(Self { n_modes, max_degree, components })
    }

    /// Builds a map from per-component term lists.
    pub fn from_terms(n_modes: usize, components: Vec<Vec<Term>>) -> Result<Self> {
        let polys = components
            .into_iter()
            .map(|terms| Poly::from_terms(n_modes, terms.into_iter().map(|t| (t.coeff, t.monomial))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_modes, polys)
    }

    pub fn identity(n_modes: usize) -> Self {
        let components = (0..n_modes).map(|l| Poly::coordinate(n_modes, l)).collect();
        Self { n_modes, max_degree: Self::DEFAULT_MAX_DEGREE, components }
    }

    /// Single-mode linear map `w' = αw + βw̄`.
    pub fn linear(alpha: C64, beta: C64) -> Self {
        let p = Poly::from_terms(1, [(alpha, Monomial::w(1, 0)), (beta, Monomial::w_bar(1, 0))])
            .expect("single-variable monomials");
        Self { n_modes: 1, max_degree: Self::DEFAULT_MAX_DEGREE, components: vec![p] }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, l: usize) -> &Poly {
        &self.components[l]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, w: &[C64]) -> Result<Vec<C64>> {
        if w.len() != self.n_modes {
            return Err(Error::DimensionMismatch { left: w.len(), right: self.n_modes });
        }
        Ok(self.components.iter().map(|p| p.eval(w)).collect())
    }

    /// `g(0)` per component.
    pub fn offset(&self) -> Vec<C64> {
        self.components.iter().map(Poly::constant_term).collect()
    }

    pub fn preserves_origin(&self) -> bool {
        self.offset().iter().all(|c| *c == ZERO)
    }

    /// `w ↦ conj(g(w, w̄))`.
    pub fn conjugate(&self) -> PolyMap {
        Self {
            n_modes: self.n_modes,
            max_degree: self.max_degree,
            components: self.components.iter().map(Poly::conjugate).collect(),
        }
    }

    pub fn add(&self, other: &PolyMap) -> Result<PolyMap> {
        self.check_modes(other)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect();
        Self::with_max_degree(self.n_modes, components, self.max_degree.max(other.max_degree))
    }

    pub fn scale(&self, factor: C64) -> PolyMap {
        Self {
            n_modes: self.n_modes,
            max_degree: self.max_degree,
            components: self.components.iter().map(|p| p.scale(factor)).collect(),
        }
    }

    /// `self ∘ inner`, truncated at this map's degree cap.
    pub fn compose(&self, inner: &PolyMap) -> Result<Composition> {
        self.check_modes(inner)?;
        let n = self.n_modes;
        let cap = self.max_degree;
        let conj_inner: Vec<Poly> = inner.components.iter().map(Poly::conjugate).collect();
        let mut discarded = 0.0;
        let mut holo_pows: Vec<Vec<Poly>> = vec![vec![Poly::constant(n, ONE)]; n];
        let mut anti_pows: Vec<Vec<Poly>> = vec![vec![Poly::constant(n, ONE)]; n];
        let power = |table: &mut Vec<Vec<Poly>>, base: &[Poly], var: usize, e: u32, dropped: &mut f64| -> Poly {
            while table[var].len() <= e as usize {
                let last = table[var].last().expect("power table seeded with 1");
                let (next, d) = last.mul_capped(&base[var], cap);
                *dropped += d;
                table[var].push(next);
            }
            table[var][e as usize].clone()
        };
        let mut components = Vec::with_capacity(n);
        for outer in &self.components {
            let mut acc = Poly::zero(n);
            for (m, c) in outer.terms() {
                let mut prod = Poly::constant(n, *c);
                for var in 0..n {
                    if m.holo[var] > 0 {
                        let f = power(&mut holo_pows, &inner.components, var, m.holo[var], &mut discarded);
                        let (p, d) = prod.mul_capped(&f, cap);
                        discarded += d;
                        prod = p;
                    }
                    if m.anti[var] > 0 {
                        let f = power(&mut anti_pows, &conj_inner, var, m.anti[var], &mut discarded);
                        let (p, d) = prod.mul_capped(&f, cap);
                        discarded += d;
                        prod = p;
                    }
                }
                acc = acc.add(&prod);
            }
            components.push(acc);
        }
        Ok(Composition { map: Self { n_modes: n, max_degree: cap, components }, discarded_mass: discarded })
    }

    /// Real Jacobian `∂(q'₁,p'₁,…)/∂(q₁,p₁,…)` at `w`, with `q = Re w`, `p = Im w`.
    pub fn real_jacobian(&self, w: &[C64]) -> Result<RealMatrix> {
        let derivs = self.wirtinger();
        jacobian_from(&derivs, w)
    }

    /// `(∂g_l/∂w_m, ∂g_l/∂w̄_m)` for all `l, m`, row-major in `(l, m)`.
    pub(crate) fn wirtinger(&self) -> Vec<(Poly, Poly)> {
        let n = self.n_modes;
        let mut out = Vec::with_capacity(n * n);
        for p in &self.components {
            for m in 0..n {
                out.push((p.d_holo(m), p.d_anti(m)));
            }
        }
        out
    }

    /// Structural equality up to `tol` on every coefficient.
    pub fn approx_eq(&self, other: &PolyMap, tol: f64) -> bool {
        self.n_modes == other.n_modes
            && self.components.iter().zip(&other.components).all(|(a, b)| a.max_coeff_diff(b) <= tol)
    }

    /// Canonical term list per component.
    pub fn to_terms(&self) -> Vec<Vec<Term>> {
        self.components
            .iter()
            .map(|p| p.terms().map(|(m, c)| Term { coeff: *c, monomial: m.clone() }).collect())
            .collect()
    }

    fn check_modes(&self, other: &PolyMap) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch { left: self.n_modes, right: other.n_modes });
        }
        Ok(())
    }
}

pub(crate) fn jacobian_from(derivs: &[(Poly, Poly)], w: &[C64]) -> Result<RealMatrix> {
    let n = w.len();
    if derivs.len() != n * n {
        return Err(Error::DimensionMismatch { left: derivs.len(), right: n * n });
    }
    let mut jac = RealMatrix::zeros(2 * n);
    for l in 0..n {
        for m in 0..n {
            let (dw, dwbar) = &derivs[l * n + m];
            let a = dw.eval(w);
            let b = dwbar.eval(w);
            let dq = a + b;
            let dp = (a - b) * C64::new(0.0, 1.0);
            jac[(2 * l, 2 * m)] = dq.re;
            jac[(2 * l + 1, 2 * m)] = dq.im;
            jac[(2 * l, 2 * m + 1)] = dp.re;
            jac[(2 * l + 1, 2 * m + 1)] = dp.im;
        }
    }
    Ok(jac)
}
