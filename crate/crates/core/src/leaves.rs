//! Leaf geometries: affine actions on the flat leaves ℝ^{n+1} with the
//! degenerate parallel metric, and the invariant-open-set classifier on
//! two-dimensional Minkowski space.

use crate::linalg::rational_within;
use crate::{PpError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Affine map of a leaf ℝ^{n+1} in coordinates (v, x₁, …, xₙ). The linear
/// part has first row (1, *, …, *) and lower-right n×n block A ∈ O(1, n−1).
#[derive(Debug, Clone)]
pub struct LeafAffineMap {
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl LeafAffineMap {
    pub fn identity(n: usize) -> Self {
        LeafAffineMap {
            linear: DMatrix::identity(n + 1, n + 1),
            translation: DVector::zeros(n + 1),
        }
    }

    pub fn translation_by(t: DVector<f64>) -> Self {
        let n = t.len() - 1;
        LeafAffineMap { linear: DMatrix::identity(n + 1, n + 1), translation: t }
    }

    /// Boost of rapidity θ in the (x₁, x₂) Lorentz plane, extended by the
    /// identity; fixes the degenerate metric and the V-axis.
    pub fn boost(theta: f64, n: usize) -> Self {
        assert!(n >= 2);
        let mut m = DMatrix::identity(n + 1, n + 1);
        m[(1, 1)] = theta.cosh();
        m[(1, 2)] = theta.sinh();
        m[(2, 1)] = theta.sinh();
        m[(2, 2)] = theta.cosh();
        LeafAffineMap { linear: m, translation: DVector::zeros(n + 1) }
    }

    /// Unipotent element in Heisenberg standard form: shears the
    /// V-coordinate by a covector b, A = identity.
    pub fn unipotent(b: &[f64]) -> Self {
        let n = b.len();
        let mut m = DMatrix::identity(n + 1, n + 1);
        for (j, &bj) in b.iter().enumerate() {
            m[(0, j + 1)] = bj;
        }
        LeafAffineMap { linear: m, translation: DVector::zeros(n + 1) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        LeafAffineMap {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = self.linear.clone().try_inverse()?;
        let t = -(&inv * &self.translation);
        Some(LeafAffineMap { linear: inv, translation: t })
    }
}

pub fn apply_leaf_map(m: &LeafAffineMap, x: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != m.linear.nrows() {
        return Err(PpError::Dimension(format!(
            "expected a point in ℝ^{}, got length {}",
            m.linear.nrows(),
            x.len()
        )));
    }
    Ok(&m.linear * x + &m.translation)
}

/// The degenerate leaf metric h = −dx₁² + Σ_{i≥2} dx_i² with radical along
/// the first (V) coordinate.
pub fn leaf_metric(n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(1, 1)] = -1.0;
    for i in 2..=n {
        h[(i, i)] = 1.0;
    }
    h
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafStructureCheck {
    pub preserves: bool,
    pub metric_residual: f64,
    pub v_axis_residual: f64,
}

/// Membership test for the structural group: the linear part must fix the
/// degenerate metric h by congruence and fix the V-axis (first column
/// (1, 0, …, 0)); the first-row entries are otherwise free.
pub fn preserves_leaf_structure(m: &LeafAffineMap) -> LeafStructureCheck {
    let n = m.linear.nrows() - 1;
    let h = leaf_metric(n);
    let metric_residual = (m.linear.transpose() * &h * &m.linear - &h).amax();
    let mut v_axis_residual = (m.linear[(0, 0)] - 1.0).abs();
    for i in 1..=n {
        v_axis_residual = v_axis_residual.max(m.linear[(i, 0)].abs());
    }
    LeafStructureCheck {
        preserves: metric_residual < 1e-10 && v_axis_residual < 1e-10,
        metric_residual,
        v_axis_residual,
    }
}

/// The boost-invariant quadratic x² − y² on the Lorentz plane; constant on
/// the orbits of any list of boosts.
pub fn quad_form_orbit(boost_params: &[f64], x: [f64; 2]) -> f64 {
    let mut p = x;
    for &theta in boost_params {
        let (c, s) = (theta.cosh(), theta.sinh());
        p = [c * p[0] + s * p[1], s * p[0] + c * p[1]];
    }
    p[0] * p[0] - p[1] * p[1]
}

// ---------------------------------------------------------------------------
// Invariant open sets of Mink^{1,1}

/// A finitely generated group of Lorentz affine maps of Mink^{1,1}:
/// generator (t, v) acts by boost of rapidity t followed by translation v,
/// in standard (x, y) coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinkQuotientAction {
    pub generators: Vec<(f64, [f64; 2])>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenSetClass {
    FullMinkowski,
    HalfMinkowski,
    Inconclusive,
}

fn null_coords(v: [f64; 2]) -> (f64, f64) {
    (v[0] + v[1], v[0] - v[1])
}

/// Certify, at desk scale, that a list of reals generates a non-discrete
/// subgroup of ℝ: two entries whose ratio no continued-fraction convergent
/// with denominator ≤ 10⁶ matches to 1e-13 (true rationals match to
/// round-off; irrational ratios miss by ≳ 1e-12 at that denominator bound).
fn nondiscrete_values(vals: &[f64]) -> bool {
    let nz: Vec<f64> = vals.iter().copied().filter(|x| x.abs() > 1e-12).collect();
    for i in 0..nz.len() {
        for j in i + 1..nz.len() {
            if rational_within(nz[i] / nz[j], 1_000_000, 1e-13).is_none() {
                return true;
            }
        }
    }
    false
}

/// Dichotomy for invariant open sets: the orbit closure of the seed is
/// either all of Mink^{1,1} or an open half plane bounded by a lightlike
/// line. Null coordinates are u = x+y, w = x−y; the preserved foliation is
/// the u-levels, and the induced action on ℝ = Mink/L is u ↦ e^t u + τ_u.
pub fn classify_invariant_open(
    action: &MinkQuotientAction,
    seed: [f64; 2],
) -> (OpenSetClass, Option<String>) {
    let boosts: Vec<f64> = action
        .generators
        .iter()
        .map(|(t, _)| *t)
        .filter(|t| t.abs() > 1e-9)
        .collect();
    if boosts.is_empty() {
        return (OpenSetClass::Inconclusive, Some("no generator with a nontrivial boost part".into()));
    }

    // Translation elements: pure-translation generators plus the
    // commutators [boost, generator], which are always translations.
    let mut trans: Vec<(f64, f64)> = Vec::new();
    for (t, v) in &action.generators {
        if t.abs() <= 1e-9 {
            trans.push(null_coords(*v));
        }
    }
    for (t1, v1) in &action.generators {
        for (t2, v2) in &action.generators {
            // In null coordinates each generator is u ↦ e^t u + τ, and the
            // commutator g₁g₂g₁⁻¹g₂⁻¹ is the pure translation by
            // τ₁(1 − e^{t₂}) + τ₂(e^{t₁} − 1) in each coordinate.
            let (u1, w1) = null_coords(*v1);
            let (u2, w2) = null_coords(*v2);
            let (e1, f1) = (t1.exp(), (-t1).exp());
            let (e2, f2) = (t2.exp(), (-t2).exp());
            let cu = u1 + e1 * u2 - e2 * u1 - u2;
            let cw = w1 + f1 * w2 - f2 * w1 - w2;
            if cu.abs() > 1e-12 || cw.abs() > 1e-12 {
                trans.push((cu, cw));
            }
        }
    }
    // Spread translations along the boost flow so the value lists see the
    // full conjugation orbit at desk scale.
    let base = trans.clone();
    for &t in &boosts {
        for (u, w) in &base {
            for k in [-2.0f64, -1.0, 1.0, 2.0] {
                trans.push(((k * t).exp() * u, (-k * t).exp() * w));
            }
        }
    }

    let us: Vec<f64> = trans.iter().map(|(u, _)| *u).collect();
    let ws: Vec<f64> = trans.iter().map(|(_, w)| *w).collect();
    if !nondiscrete_values(&us) && !nondiscrete_values(&ws) {
        return (
            OpenSetClass::Inconclusive,
            Some("translation part not certified non-discrete in either null coordinate".into()),
        );
    }

    let has_u_translation = us.iter().any(|u| u.abs() > 1e-12);
    if has_u_translation {
        // The induced group on ℝ contains a scaling and a nonzero
        // translation: every orbit closure meets both signs.
        return (OpenSetClass::FullMinkowski, None);
    }
    // All translations lie in the lightlike u = 0 line; the induced group
    // on ℝ is pure scaling and the orbit of π(seed) stays in one open ray.
    let pi_seed = seed[0] + seed[1];
    if pi_seed.abs() < 1e-12 {
        return (
            OpenSetClass::Inconclusive,
            Some("seed lies on the boundary lightlike line".into()),
        );
    }
    (OpenSetClass::HalfMinkowski, None)
}
