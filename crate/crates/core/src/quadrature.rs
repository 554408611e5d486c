//! Polar quadrature over disks in each complex coordinate plane.
//!
//! Radially the rule is Gauss–Laguerre in `x = r²`: for the measure
//! `d²z/π = dx dθ / (2π)` a Gaussian-weighted integrand `e^{-x} p(x)` is
//! integrated exactly for polynomials `p` of degree `< 2R`. Angularly it is the
//! uniform trapezoid rule, exact for trigonometric polynomials of degree
//! `< M`. Nodes outside `radius_cut` are discarded.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::tridiagonal_eigenvalues;
use crate::{Error, Result, C64};

/// Gauss–Laguerre nodes `x_i` and weights `w_i` for `∫₀^∞ e^{-x} f(x) dx`.
///
/// Weights are returned in the exponentially scaled form `w_i e^{x_i}`, which
/// stays representable for the large nodes where `w_i` itself underflows.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGrid("Gauss–Laguerre order must be >= 1".into()));
        }
        // Jacobi matrix of the Laguerre recurrence: diagonal 2i+1, off-diagonal i+1.
        let diag: Vec<f64> = (0..order).map(|i| (2 * i + 1) as f64).collect();
        let off: Vec<f64> = (1..order).map(|i| i as f64).collect();
        let guesses = tridiagonal_eigenvalues(&diag, &off)?;
        let mut nodes = Vec::with_capacity(order);
        let mut scaled_weights = Vec::with_capacity(order);
        for x0 in guesses {
            let x = polish_root(order, x0);
            nodes.push(x);
            scaled_weights.push((x - log_christoffel_sum(order, x)).exp());
        }
        Ok(Self { nodes, scaled_weights })
    }
}

/// `(L_n(x), L_{n-1}(x), s)` with both values scaled by `e^{-s}`.
fn laguerre(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (prev, 0.0, 0.0);
    }
    let mut cur = 1.0 - x;
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            log_scale += 100.0 * core::f64::consts::LN_10;
        }
    }
    (cur, prev, log_scale)
}

/// `ln Σ_{k<n} L_k(x)²`. Its reciprocal is the Gauss weight at a root of
/// `L_n`, and unlike `1/L_{n+1}(x)²` it is insensitive to small root errors.
fn log_christoffel_sum(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 1..n {
        sum += cur * cur;
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            sum *= 1e-200;
            log_scale += 200.0 * core::f64::consts::LN_10;
        }
    }
    sum.ln() + log_scale
}

fn polish_root(n: usize, mut x: f64) -> f64 {
    for _ in 0..8 {
        let (ln, lnm1, _) = laguerre(n, x);
        let deriv = n as f64 * (ln - lnm1) / x;
        if deriv == 0.0 || !deriv.is_finite() {
            break;
        }
        let step = ln / deriv;
        let next = x - step;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        x = next;
        if step.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    x
}

/// Radial–angular product grid on the disk `|z| ≤ radius_cut`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    radial_order: usize,
    angular_count: usize,
    radius_cut: f64,
    radii: Vec<f64>,
    /// Measure weights per radial node, already divided by `angular_count`.
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub const DEFAULT_RADIAL_ORDER: usize = 64;
    pub const DEFAULT_ANGULAR_COUNT: usize = 128;
    pub const DEFAULT_RADIUS_CUT: f64 = 6.0;

    pub fn new(radial_order: usize, angular_count: usize, radius_cut: f64) -> Result<Self> {
        if angular_count < 4 {
            return Err(Error::InvalidGrid(format!("angular count {angular_count} < 4")));
        }
        if !(radius_cut.is_finite() && radius_cut > 0.0) {
            return Err(Error::InvalidGrid(format!("radius cut {radius_cut} must be positive")));
        }
        let rule = GaussLaguerre::new(radial_order)?;
        let cut_sq = radius_cut * radius_cut;
        let mut radii = Vec::new();
        let mut weights = Vec::new();
        for (&x, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
            if x <= cut_sq {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::InvalidGrid(format!("non-positive weight at node {x}")));
                }
                radii.push(x.sqrt());
                weights.push(w / angular_count as f64);
            }
        }
        if radii.is_empty() {
            return Err(Error::InvalidGrid(format!("no radial node within radius {radius_cut}")));
        }
        Ok(Self { radial_order, angular_count, radius_cut, radii, weights })
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn radius_cut(&self) -> f64 {
        self.radius_cut
    }

    /// Radii of the retained radial nodes.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angular_count
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// `(z, weight)` pairs for `∫ f(z) d²z/π ≈ Σ weight · f(z)`, radial index
    /// slowest.
    pub fn nodes(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        let m = self.angular_count;
        self.radii.iter().zip(&self.weights).flat_map(move |(&r, &w)| {
            (0..m).map(move |j| {
                let theta = 2.0 * core::f64::consts::PI * j as f64 / m as f64;
                (C64::from_polar(r, theta), w)
            })
        })
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_RADIAL_ORDER, Self::DEFAULT_ANGULAR_COUNT, Self::DEFAULT_RADIUS_CUT)
            .expect("default grid is valid")
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn order_16_matches_reference_rule() {
        // Reference values from numpy.polynomial.laguerre.laggauss(16).
        let gl = GaussLaguerre::new(16).unwrap();
        let reference = [
            (0, 0.08764941047892776, 0.22503631486425152),
            (5, 5.078018614549768, 1.813134687381371),
            (15, 51.70116033954332, 11.824277551658456),
        ];
        for (i, x, w) in reference {
            assert!(rel(gl.nodes[i], x) < 1e-13, "node {i}: {}", gl.nodes[i]);
            assert!(rel(gl.scaled_weights[i], w) < 1e-12, "weight {i}: {}", gl.scaled_weights[i]);
        }
    }

    #[test]
    fn order_64_matches_extended_precision_rule() {
        // Reference values from a 40-digit mpmath root solve of L_64.
        let gl = GaussLaguerre::new(64).unwrap();
        let reference = [
            (0, 0.022415874146705280023, 0.057528037889452589044),
            (20, 16.839663652648737211, 1.6602675479032260381),
            (29, 35.502323891141209587, 2.5097795756063137203),
        ];
        for (i, x, w) in reference {
            assert!(rel(gl.nodes[i], x) < 1e-13, "node {i}: {}", gl.nodes[i]);
            assert!(rel(gl.scaled_weights[i], w) < 1e-11, "weight {i}: {}", gl.scaled_weights[i]);
        }
    }

    #[test]
    fn order_256_smallest_node_matches_extended_precision_rule() {
        let rule = GaussLaguerre::new(256).unwrap();
        assert!(rel(rule.nodes[0], 0.0056366402446178818962) < 1e-12);
        assert!(rel(rule.scaled_weights[0], 0.014465465595793692191) < 1e-12);
        let mass: f64 = rule.nodes.iter().zip(&rule.scaled_weights).map(|(x, w)| w * (-x).exp()).sum();
        assert!((mass - 1.0).abs() < 1e-14, "{mass}");
    }

    #[test]
    fn integrates_laguerre_moments() {
        // ∫ e^{-x} x^k dx = k!
        let gl = GaussLaguerre::new(24).unwrap();
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let s: f64 = gl.nodes.iter().zip(&gl.scaled_weights).map(|(x, w)| w * (-x).exp() * x.powi(k)).sum();
            assert!(rel(s, fact) < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(QuadratureGrid::new(16, 3, 6.0).is_err());
        assert!(QuadratureGrid::new(16, 8, 0.0).is_err());
        assert!(QuadratureGrid::new(0, 8, 6.0).is_err());
        assert!(QuadratureGrid::new(16, 8, 1e-3).is_err());
    }

    #[test]
    fn default_grid_keeps_nodes_inside_cut() {
        let g = QuadratureGrid::default();
        assert_eq!(g.radii().len(), 30);
        assert!(g.radii().iter().all(|&r| r <= 6.0));
        assert_eq!(g.len(), 30 * 128);
        // Gaussian mass inside the disk: 1 - e^{-36}, up to node placement.
        let mass: f64 = g.nodes().map(|(z, w)| w * (-z.norm_sqr()).exp()).sum();
        assert!((mass - 1.0).abs() < 1e-13);
    }
}
