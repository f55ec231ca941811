//! The model spaces X as homogeneous spaces: canonical-section points,
//! isometry action, invariant metric, closed-form geodesics, leaf function
//! and curvature.
//!
//! Points are coset representatives exp(ℓL)·exp(A⁻)·exp(vV)·o, NOT an
//! external coordinate chart. The flavor presets are the two 4-dimensional
//! models; `GenericModel` runs the same machinery for any symmetric triple
//! that passes the analyzer.

use crate::groups::{ambient_mul, omega, one_param_ambient, AmbientVector, IsomElement};
use crate::lie::{
    analyze_symmetric_triple, bracket, derivation_block_f64, transvection_triple, Flavor,
    SymmetricTriple, TransvectionReport,
};
use crate::linalg::phi12;
use crate::rational::{rat_from_f64, rat_to_f64, Rat, RatMat};
use crate::{PpError, Result};
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num::Zero;

// ---------------------------------------------------------------------------
// Flavor presets (n = 2)

/// Canonical-section representative (ℓ, α, v) ↔ exp(ℓL)exp(α·a⁻)exp(vV)·o.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub l: f64,
    pub alpha: [f64; 2],
    pub v: f64,
}

impl ModelPoint {
    pub fn base() -> Self {
        ModelPoint { l: 0.0, alpha: [0.0, 0.0], v: 0.0 }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.l, self.alpha[0], self.alpha[1], self.v]
    }
}

/// Tangent vector at `base`, components in the frame (L, a₃, a₄, V) of ĝ⁻.
#[derive(Debug, Clone, Copy)]
pub struct TangentVector {
    pub base: ModelPoint,
    pub comp: [f64; 4],
}

/// One of the two 4-dimensional flavor models.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub flavor: Flavor,
    pub transvection_data: SymmetricTriple,
    /// Basis of the isotropy transversal a⁺ = span{a₁, a₂} inside heis₅
    /// coordinates (a₁..a₄, z).
    pub isotropy: Vec<[f64; 5]>,
}

impl ModelSpace {
    pub fn new(flavor: Flavor) -> Self {
        ModelSpace {
            flavor,
            transvection_data: transvection_triple(flavor),
            isotropy: vec![[1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]],
        }
    }

    /// The section representative of p in the ambient group.
    pub fn section(&self, p: &ModelPoint) -> IsomElement {
        let a = Vector4::new(0.0, 0.0, p.alpha[0], p.alpha[1]);
        let xi = crate::groups::rho(p.l, 0.0, self.flavor) * a;
        IsomElement { s: p.l, t: 0.0, xi: [xi[0], xi[1], xi[2], xi[3]], z: p.v, flavor: self.flavor }
    }

    /// Reduce a group element to the canonical section: peel the exp(ℝL)
    /// factor, split the Heisenberg part along a⁻ ⊕ a⁺, absorb the isotropy.
    pub fn reduce(&self, g: &IsomElement) -> ModelPoint {
        let eta = crate::groups::rho(-g.s, 0.0, self.flavor) * Vector4::from_column_slice(&g.xi);
        let a_minus = [0.0, 0.0, eta[2], eta[3]];
        let a_plus = [eta[0], eta[1], 0.0, 0.0];
        ModelPoint {
            l: g.s,
            alpha: [eta[2], eta[3]],
            v: g.z - 0.5 * omega(&a_minus, &a_plus),
        }
    }

    pub fn act(&self, g: &IsomElement, p: &ModelPoint) -> Result<ModelPoint> {
        if g.flavor != self.flavor {
            return Err(PpError::Input("isometry flavor does not match the model".into()));
        }
        Ok(self.reduce(&ambient_mul(g, &self.section(p))?))
    }

    /// Invariant metric in the ĝ⁻ frame (L, a₃, a₄, V): constant, with
    /// ⟨L,V⟩ = 1 and the flavor's form on a⁻. Signature (2,2).
    pub fn metric_at(&self, _p: &ModelPoint) -> Matrix4<f64> {
        let h = self.h_minus();
        let mut m = Matrix4::zeros();
        m[(0, 3)] = 1.0;
        m[(3, 0)] = 1.0;
        m[(1, 1)] = h[0];
        m[(2, 2)] = h[1];
        m
    }

    /// Metric on a⁻ = span{a₃, a₄}: diag(−1,1) for H, diag(1,−1) for E.
    fn h_minus(&self) -> [f64; 2] {
        match self.flavor {
            Flavor::H => [-1.0, 1.0],
            Flavor::E => [1.0, -1.0],
        }
    }

    /// Metric in chart coordinates (∂ℓ, ∂α₃, ∂α₄, ∂v): the pp-wave form
    /// [[α₄²−α₃², 0, 0, 1], [0, h, 0], [1, 0, 0, 0]].
    pub fn chart_metric(&self, p: &ModelPoint) -> Matrix4<f64> {
        let h = self.h_minus();
        let mut m = Matrix4::zeros();
        m[(0, 0)] = p.alpha[1] * p.alpha[1] - p.alpha[0] * p.alpha[0];
        m[(0, 3)] = 1.0;
        m[(3, 0)] = 1.0;
        m[(1, 1)] = h[0];
        m[(2, 2)] = h[1];
        m
    }

    fn ambient_vector(u: &TangentVector) -> AmbientVector {
        AmbientVector {
            sigma: u.comp[0],
            tau: 0.0,
            a: [0.0, 0.0, u.comp[1], u.comp[2]],
            w: u.comp[3],
        }
    }

    /// γ(t) = σ(p)·exp(t ξ_u)·o — the transvection-orbit geodesic, defined
    /// for all real t.
    pub fn geodesic(&self, p: &ModelPoint, u: &TangentVector, t: f64) -> ModelPoint {
        self.geodesic_with_velocity(p, u, t).0
    }

    /// Geodesic point together with its chart-coordinate velocity
    /// (dℓ, dα₃, dα₄, dv), computed analytically so the speed check stays
    /// honest at large |t| where finite differences lose all precision.
    pub fn geodesic_with_velocity(&self, p: &ModelPoint, u: &TangentVector, t: f64) -> (ModelPoint, [f64; 4]) {
        let xi = Self::ambient_vector(u);
        let g = ambient_mul(&self.section(p), &one_param_ambient(&xi, t, self.flavor))
            .expect("same flavor");
        let point = self.reduce(&g);

        // d/dε reduce(g·exp(εξ)) at ε = 0.
        let m = derivation_block_f64(self.flavor, 1.0, 0.0);
        let eta0 = crate::groups::rho(-g.s, 0.0, self.flavor) * Vector4::from_column_slice(&g.xi);
        let a_u = Vector4::new(0.0, 0.0, u.comp[1], u.comp[2]);
        let deta = a_u - m * eta0 * u.comp[0];
        let a_full = [0.0, 0.0, eta0[2], eta0[3]];
        let xp_full = [eta0[0], eta0[1], 0.0, 0.0];
        let da_full = [0.0, 0.0, deta[2], deta[3]];
        let dxp_full = [deta[0], deta[1], 0.0, 0.0];
        let a_u4 = [0.0, 0.0, u.comp[1], u.comp[2]];
        let eta04 = [eta0[0], eta0[1], eta0[2], eta0[3]];
        let dz = u.comp[3] + 0.5 * omega(&eta04, &a_u4);
        let dv = dz - 0.5 * omega(&da_full, &xp_full) - 0.5 * omega(&a_full, &dxp_full);
        (point, [u.comp[0], deta[2], deta[3], dv])
    }

    /// Speed g(γ', γ') of the geodesic at parameter t, via the chart metric.
    pub fn geodesic_speed(&self, p: &ModelPoint, u: &TangentVector, t: f64) -> f64 {
        let (q, vel) = self.geodesic_with_velocity(p, u, t);
        let g = self.chart_metric(&q);
        let v = Vector4::from_column_slice(&vel);
        (v.transpose() * g * v)[(0, 0)]
    }

    /// The submersion f whose level sets are the lightlike leaves: the
    /// ℓ-coordinate. f∘k − f is constant for every isometry k.
    pub fn leaf_function(&self, p: &ModelPoint) -> f64 {
        p.l
    }

    /// Value of f together with the degenerate leaf metric in the leaf
    /// coordinates (v, x₁, x₂): diag(0, −1, 1), radical = ℝV.
    pub fn leaf_data(&self, p: &ModelPoint) -> (f64, DMatrix<f64>) {
        let mut h = DMatrix::zeros(3, 3);
        h[(1, 1)] = -1.0;
        h[(2, 2)] = 1.0;
        (p.l, h)
    }

    /// R(x,y)z = −[[x,y],z] through the transvection algebra, exact mode.
    /// Inputs/outputs in the ĝ⁻ frame (L, a₃, a₄, V).
    pub fn curvature_triple(&self, x: &[f64; 4], y: &[f64; 4], z: &[f64; 4]) -> [f64; 4] {
        let xr = x.map(rat_from_f64);
        let yr = y.map(rat_from_f64);
        let zr = z.map(rat_from_f64);
        let out = curvature_triple_exact(self.flavor, &xr, &yr, &zr);
        out.map(|c| rat_to_f64(&c))
    }

    /// Spanning vectors w₁(s), w₂(s) of Stab_{Heis₅}(p_s), flavor E only.
    pub fn stabilizer_heis(&self, s: f64) -> Result<([f64; 4], [f64; 4])> {
        match self.flavor {
            Flavor::H => Err(PpError::FlavorH),
            Flavor::E => Ok((
                [s.cos(), 0.0, s.sin(), 0.0],
                [0.0, s.cos(), 0.0, -s.sin()],
            )),
        }
    }

    /// p_s := act(exp(sL), base) — our identification of the flavor-E
    /// transversal points.
    pub fn p_s(&self, s: f64) -> ModelPoint {
        let g = one_param_ambient(
            &AmbientVector { sigma: 1.0, tau: 0.0, a: [0.0; 4], w: 0.0 },
            s,
            self.flavor,
        );
        self.act(&g, &ModelPoint::base()).expect("same flavor")
    }
}

/// Exact-mode curvature tensor of the flavor model on ĝ⁻ (frame L,a₃,a₄,V):
/// R(x,y)z = −[[x,y],z] in the transvection algebra.
pub fn curvature_triple_exact(flavor: Flavor, x: &[Rat; 4], y: &[Rat; 4], z: &[Rat; 4]) -> [Rat; 4] {
    let alg = crate::lie::transvection_algebra(flavor);
    let embed = |v: &[Rat; 4]| -> Vec<Rat> {
        vec![v[0].clone(), Rat::zero(), Rat::zero(), v[1].clone(), v[2].clone(), v[3].clone()]
    };
    let xy = bracket(&alg, &embed(x), &embed(y)).unwrap();
    let full = bracket(&alg, &xy, &embed(z)).unwrap();
    debug_assert!(full[1].is_zero() && full[2].is_zero(), "curvature left ĝ⁻");
    [-full[0].clone(), -full[3].clone(), -full[4].clone(), -full[5].clone()]
}

// ---------------------------------------------------------------------------
// Generic transvection models

/// Element (s, ξ, z) of the transvection group ℝ ⋉_L Heis of a generic
/// model (no SO°(1,1) factor).
#[derive(Debug, Clone)]
pub struct TransvectionElement {
    pub s: f64,
    pub xi: DVector<f64>,
    pub z: f64,
}

/// Point of a generic model, a⁻ coordinates of arbitrary dimension.
#[derive(Debug, Clone)]
pub struct GenericPoint {
    pub l: f64,
    pub alpha: DVector<f64>,
    pub v: f64,
}

/// A model built from any symmetric triple that passes the analyzer. The
/// machinery mirrors the flavor presets: D = ad_L on a, ρ(s) = exp(sD),
/// ω and the induced metric from the analyzer's report.
pub struct GenericModel {
    pub report: TransvectionReport,
    dim_a: usize,
    half: usize, // dim a⁺ = dim a⁻
    d: DMatrix<f64>,       // ad_L on a, in the a-basis (a⁺ then a⁻)
    omega: DMatrix<f64>,   // symplectic form on a
    h_minus: DMatrix<f64>, // induced metric on a⁻
}

impl GenericModel {
    pub fn from_triple(triple: &SymmetricTriple, v_candidate: &[Rat]) -> Result<Self> {
        let report = analyze_symmetric_triple(triple, v_candidate)?;
        if !report.verdicts.passed() {
            return Err(PpError::Precondition(
                "symmetric triple fails the transvection identities".into(),
            ));
        }
        if report.a_plus.len() != report.a_minus.len() {
            return Err(PpError::Precondition("dim a⁺ ≠ dim a⁻".into()));
        }
        let half = report.a_minus.len();
        let dim_a = 2 * half;
        let a_basis: Vec<Vec<Rat>> =
            report.a_plus.iter().chain(report.a_minus.iter()).cloned().collect();
        // D = ad_L restricted to a, in a-coordinates.
        let cols = RatMat::from_cols(&a_basis);
        let mut d = DMatrix::zeros(dim_a, dim_a);
        for (j, bj) in a_basis.iter().enumerate() {
            let br = bracket(&triple.algebra, &report.lightlike_partner, bj)
                .map_err(|e| PpError::Precondition(e.to_string()))?;
            let coords = cols.solve(&br).ok_or_else(|| {
                PpError::Precondition("ad_L does not preserve the transversal a".into())
            })?;
            for i in 0..dim_a {
                d[(i, j)] = rat_to_f64(&coords[i]);
            }
        }
        let omega = report.omega.to_f64();
        // Induced metric on a⁻ from the triple's form.
        let mut h_minus = DMatrix::zeros(half, half);
        for i in 0..half {
            for j in 0..half {
                h_minus[(i, j)] =
                    rat_to_f64(&triple.form.eval(&report.a_minus[i], &report.a_minus[j]));
            }
        }
        Ok(GenericModel { report, dim_a, half, d, omega, h_minus })
    }

    pub fn base(&self) -> GenericPoint {
        GenericPoint { l: 0.0, alpha: DVector::zeros(self.half), v: 0.0 }
    }

    fn rho(&self, s: f64) -> DMatrix<f64> {
        crate::linalg::expm(&(&self.d * s))
    }

    fn om(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.omega * y)[(0, 0)]
    }

    pub fn mul(&self, g: &TransvectionElement, h: &TransvectionElement) -> TransvectionElement {
        let rh = self.rho(g.s) * &h.xi;
        TransvectionElement {
            s: g.s + h.s,
            xi: &g.xi + &rh,
            z: g.z + h.z + 0.5 * self.om(&g.xi, &rh),
        }
    }

    pub fn section(&self, p: &GenericPoint) -> TransvectionElement {
        let mut a = DVector::zeros(self.dim_a);
        for i in 0..self.half {
            a[self.half + i] = p.alpha[i];
        }
        TransvectionElement { s: p.l, xi: self.rho(p.l) * a, z: p.v }
    }

    pub fn reduce(&self, g: &TransvectionElement) -> GenericPoint {
        let eta = self.rho(-g.s) * &g.xi;
        let mut a_minus = DVector::zeros(self.dim_a);
        let mut a_plus = DVector::zeros(self.dim_a);
        for i in 0..self.half {
            a_plus[i] = eta[i];
            a_minus[self.half + i] = eta[self.half + i];
        }
        GenericPoint {
            l: g.s,
            alpha: DVector::from_fn(self.half, |i, _| eta[self.half + i]),
            v: g.z - 0.5 * self.om(&a_minus, &a_plus),
        }
    }

    pub fn act(&self, g: &TransvectionElement, p: &GenericPoint) -> GenericPoint {
        self.reduce(&self.mul(g, &self.section(p)))
    }

    /// exp(u·ξ) for ξ = (σ, a, w) in ĝ⁻ (a supported on a⁻), same φ-function
    /// closed form as the presets.
    pub fn one_param(&self, sigma: f64, a: &DVector<f64>, w: f64, u: f64) -> TransvectionElement {
        let m = &self.d * sigma;
        let (p1, _) = phi12(&(&m * u));
        let xi = p1 * a * u;
        let (_, p2n) = phi12(&(m.transpose() * (-u)));
        let corr = (a.transpose() * p2n * u * u * &self.omega * a)[(0, 0)];
        TransvectionElement { s: u * sigma, xi, z: w * u + 0.5 * corr }
    }

    /// Geodesic through p with ĝ⁻ initial data (σ, α̇ ∈ a⁻, w).
    pub fn geodesic(&self, p: &GenericPoint, sigma: f64, adot: &DVector<f64>, w: f64, t: f64) -> GenericPoint {
        let mut a = DVector::zeros(self.dim_a);
        for i in 0..self.half {
            a[self.half + i] = adot[i];
        }
        let g = self.mul(&self.section(p), &self.one_param(sigma, &a, w, t));
        self.reduce(&g)
    }

    pub fn leaf_function(&self, p: &GenericPoint) -> f64 {
        p.l
    }

    /// Invariant metric in the frame (L, a⁻ basis, V): block form with
    /// ⟨L,V⟩ = 1 and h on a⁻.
    pub fn metric_frame(&self) -> DMatrix<f64> {
        let n = self.half + 2;
        let mut m = DMatrix::zeros(n, n);
        m[(0, n - 1)] = 1.0;
        m[(n - 1, 0)] = 1.0;
        for i in 0..self.half {
            for j in 0..self.half {
                m[(1 + i, 1 + j)] = self.h_minus[(i, j)];
            }
        }
        m
    }
}
