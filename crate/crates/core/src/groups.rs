//! Group arithmetic: Heis_{2n+1}, the ambient (ℝ×SO°(1,1))⋉Heis₅ in both
//! flavors, and Osc_s = ℝ⋉Heis₃, with closed-form one-parameter subgroups.
//!
//! Coordinates are exponential throughout; the Heisenberg BCH convention is
//! (ξ₁,z₁)(ξ₂,z₂) = (ξ₁+ξ₂, z₁+z₂+½ω(ξ₁,ξ₂)). The SO°(1,1) coordinate t is
//! the additive Lie-algebra parameter of L_{0,t} (not e^t).

use crate::lie::{derivation_block_f64, Flavor};
use crate::linalg::phi12;
use crate::rational::{rat, Rat};
use crate::{PpError, Result};
use nalgebra::{DMatrix, Matrix4, Vector4};
use num::Zero;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Heisenberg

/// Element of Heis_{2n+1} in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisElement {
    pub xi: Vec<f64>,
    pub z: f64,
}

impl HeisElement {
    pub fn identity(n: usize) -> Self {
        HeisElement { xi: vec![0.0; 2 * n], z: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.xi.len() / 2
    }
}

/// ω(ξ₁, ξ₂) with ω(a_i, a_{n+i}) = 1.
pub fn omega(xi1: &[f64], xi2: &[f64]) -> f64 {
    let n = xi1.len() / 2;
    (0..n).map(|i| xi1[i] * xi2[n + i] - xi1[n + i] * xi2[i]).sum()
}

pub fn omega_exact(xi1: &[Rat], xi2: &[Rat]) -> Rat {
    let n = xi1.len() / 2;
    let mut acc = Rat::zero();
    for i in 0..n {
        acc = &acc + &(&(&xi1[i] * &xi2[n + i]) - &(&xi1[n + i] * &xi2[i]));
    }
    acc
}

pub fn heis_mul(g: &HeisElement, h: &HeisElement) -> Result<HeisElement> {
    if g.xi.len() != h.xi.len() {
        return Err(PpError::Dimension("Heisenberg ranks differ".into()));
    }
    Ok(HeisElement {
        xi: g.xi.iter().zip(&h.xi).map(|(a, b)| a + b).collect(),
        z: g.z + h.z + 0.5 * omega(&g.xi, &h.xi),
    })
}

pub fn heis_inv(g: &HeisElement) -> HeisElement {
    HeisElement { xi: g.xi.iter().map(|x| -x).collect(), z: -g.z }
}

/// Exact-mode Heisenberg multiplication, used by the associativity checks.
pub fn heis_mul_exact(g: (&[Rat], &Rat), h: (&[Rat], &Rat)) -> (Vec<Rat>, Rat) {
    let xi: Vec<Rat> = g.0.iter().zip(h.0).map(|(a, b)| a + b).collect();
    let z = &(g.1 + h.1) + &(&rat(1, 2) * &omega_exact(g.0, h.0));
    (xi, z)
}

/// The homothety Ψ_λ(ξ, z) = (λξ, λ²z), an automorphism for λ ≠ 0.
pub struct HeisHomothety {
    pub lambda: f64,
}

pub fn heis_homothety(lambda: f64) -> Result<HeisHomothety> {
    if lambda == 0.0 {
        return Err(PpError::Input("homothety parameter must be nonzero".into()));
    }
    Ok(HeisHomothety { lambda })
}

impl HeisHomothety {
    pub fn apply(&self, g: &HeisElement) -> HeisElement {
        HeisElement {
            xi: g.xi.iter().map(|x| self.lambda * x).collect(),
            z: self.lambda * self.lambda * g.z,
        }
    }
}

// ---------------------------------------------------------------------------
// Ambient group (ℝ × SO°(1,1)) ⋉ Heis₅

/// Element (s, t, ξ, z) of the ambient isometry group, flavor H or E.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsomElement {
    pub s: f64,
    pub t: f64,
    pub xi: [f64; 4],
    pub z: f64,
    pub flavor: Flavor,
}

impl IsomElement {
    pub fn identity(flavor: Flavor) -> Self {
        IsomElement { s: 0.0, t: 0.0, xi: [0.0; 4], z: 0.0, flavor }
    }

    pub fn central(z: f64, flavor: Flavor) -> Self {
        IsomElement { s: 0.0, t: 0.0, xi: [0.0; 4], z, flavor }
    }

    pub fn heis(&self) -> HeisElement {
        HeisElement { xi: self.xi.to_vec(), z: self.z }
    }
}

/// ρ(s, t) = exp L_{s,t}: closed-form hyperbolic/trigonometric blocks. The
/// s-part and t-part commute, so ρ(s,t) = exp(s L_{1,0}) · exp(t L_{0,1}).
pub fn rho(s: f64, t: f64, flavor: Flavor) -> Matrix4<f64> {
    let (ct, st) = (t.cosh(), t.sinh());
    // exp(t L_{0,1}): [[cosh t, sinh t]] on (a1,a2), [[cosh t, −sinh t]] on (a3,a4).
    let mut et = Matrix4::zeros();
    et[(0, 0)] = ct;
    et[(0, 1)] = st;
    et[(1, 0)] = st;
    et[(1, 1)] = ct;
    et[(2, 2)] = ct;
    et[(2, 3)] = -st;
    et[(3, 2)] = -st;
    et[(3, 3)] = ct;
    let mut es = Matrix4::zeros();
    match flavor {
        Flavor::H => {
            let (c, sh) = (s.cosh(), s.sinh());
            // (a1,a3) block [[c,−sh],[−sh,c]], (a2,a4) block [[c,sh],[sh,c]]
            es[(0, 0)] = c;
            es[(0, 2)] = -sh;
            es[(2, 0)] = -sh;
            es[(2, 2)] = c;
            es[(1, 1)] = c;
            es[(1, 3)] = sh;
            es[(3, 1)] = sh;
            es[(3, 3)] = c;
        }
        Flavor::E => {
            let (c, sn) = (s.cos(), s.sin());
            // rotation by +s on (a1,a3), by −s on (a2,a4)
            es[(0, 0)] = c;
            es[(0, 2)] = -sn;
            es[(2, 0)] = sn;
            es[(2, 2)] = c;
            es[(1, 1)] = c;
            es[(1, 3)] = sn;
            es[(3, 1)] = -sn;
            es[(3, 3)] = c;
        }
    }
    es * et
}

pub fn rho_apply(s: f64, t: f64, flavor: Flavor, xi: &[f64; 4]) -> [f64; 4] {
    let v = rho(s, t, flavor) * Vector4::from_column_slice(xi);
    [v[0], v[1], v[2], v[3]]
}

/// Semidirect law (s₁,t₁,h₁)(s₂,t₂,h₂) = (s₁+s₂, t₁+t₂, h₁·ρ(s₁,t₁)h₂).
pub fn ambient_mul(g: &IsomElement, h: &IsomElement) -> Result<IsomElement> {
    if g.flavor != h.flavor {
        return Err(PpError::Input("flavor mismatch in ambient multiplication".into()));
    }
    let rh = rho_apply(g.s, g.t, g.flavor, &h.xi);
    let mut xi = [0.0; 4];
    for i in 0..4 {
        xi[i] = g.xi[i] + rh[i];
    }
    Ok(IsomElement {
        s: g.s + h.s,
        t: g.t + h.t,
        xi,
        z: g.z + h.z + 0.5 * omega(&g.xi, &rh),
        flavor: g.flavor,
    })
}

pub fn ambient_inv(g: &IsomElement) -> IsomElement {
    let xi = rho_apply(-g.s, -g.t, g.flavor, &g.xi);
    IsomElement { s: -g.s, t: -g.t, xi: [-xi[0], -xi[1], -xi[2], -xi[3]], z: -g.z, flavor: g.flavor }
}

/// Conjugate a purely hyperbolic/rotational element γ = (0, t₀, a₀, z₀),
/// t₀ ≠ 0, into one with zero Heisenberg ξ-part: solve (I − ρ(0,t₀))a₁ = −a₀
/// and conjugate by α = (0,0,a₁,0). Returns (conjugator, normalized).
pub fn normalize_hyperbolic(gamma: &IsomElement) -> Result<(IsomElement, IsomElement)> {
    if gamma.s != 0.0 {
        return Err(PpError::NonHyperbolic("s-component must vanish".into()));
    }
    if gamma.t == 0.0 {
        return Err(PpError::NonHyperbolic("t₀ = 0".into()));
    }
    let r = rho(0.0, gamma.t, gamma.flavor);
    let m = Matrix4::identity() - r;
    let lu = m.lu();
    let a1 = lu
        .solve(&(-Vector4::from_column_slice(&gamma.xi)))
        .ok_or_else(|| PpError::NonHyperbolic("1 is an eigenvalue of ρ(0,t₀)".into()))?;
    let alpha = IsomElement {
        s: 0.0,
        t: 0.0,
        xi: [a1[0], a1[1], a1[2], a1[3]],
        z: 0.0,
        flavor: gamma.flavor,
    };
    let normalized = ambient_mul(&ambient_mul(&alpha, gamma)?, &ambient_inv(&alpha))?;
    Ok((alpha, normalized))
}

// ---------------------------------------------------------------------------
// Osc_s

/// Element of Osc_s = ℝ⋉Heis₃ with the ℝ-factor acting by diag(e^τ, e^{−τ})
/// on (x, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscElement {
    pub tau: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl OscElement {
    pub fn identity() -> Self {
        OscElement { tau: 0.0, x: 0.0, y: 0.0, z: 0.0 }
    }
}

pub fn osc_mul(g: &OscElement, h: &OscElement) -> OscElement {
    let (hx, hy) = (g.tau.exp() * h.x, (-g.tau).exp() * h.y);
    OscElement {
        tau: g.tau + h.tau,
        x: g.x + hx,
        y: g.y + hy,
        z: g.z + h.z + 0.5 * (g.x * hy - g.y * hx),
    }
}

pub fn osc_inv(g: &OscElement) -> OscElement {
    OscElement {
        tau: -g.tau,
        x: -(-g.tau).exp() * g.x,
        y: -g.tau.exp() * g.y,
        z: -g.z,
    }
}

// ---------------------------------------------------------------------------
// One-parameter subgroups

/// Lie-algebra vector of the ambient group: σ·L + τ·(boost) + a-part + w·𝔷.
#[derive(Debug, Clone, Copy)]
pub struct AmbientVector {
    pub sigma: f64,
    pub tau: f64,
    pub a: [f64; 4],
    pub w: f64,
}

/// Lie-algebra vector α·T + a·X + b·Y + c·Z of osc_s.
#[derive(Debug, Clone, Copy)]
pub struct OscVector {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// exp(u·ξ) in the ambient group. The Heisenberg part is Ξ(u) = u φ₁(uM)·a
/// with M = L_{σ,τ}, and the center picks up the quadratic correction
/// z(u) = wu + ½ aᵀ (u²φ₂(−uMᵀ)) Ω a.
pub fn one_param_ambient(xi: &AmbientVector, u: f64, flavor: Flavor) -> IsomElement {
    let m = derivation_block_f64(flavor, xi.sigma, xi.tau);
    let (p1, _) = phi12(&(&m * u));
    let a = DMatrix::from_column_slice(4, 1, &xi.a);
    let big_xi = p1 * &a * u;
    let (_, p2n) = phi12(&(m.transpose() * (-u)));
    let om = crate::lie::omega_heis_f64(2);
    let corr = (a.transpose() * p2n * u * u * &om * &a)[(0, 0)];
    IsomElement {
        s: u * xi.sigma,
        t: u * xi.tau,
        xi: [big_xi[(0, 0)], big_xi[(1, 0)], big_xi[(2, 0)], big_xi[(3, 0)]],
        z: xi.w * u + 0.5 * corr,
        flavor,
    }
}

/// exp(u·ξ) in Osc_s, in closed form.
pub fn one_param_osc(xi: &OscVector, u: f64) -> OscElement {
    let al = xi.alpha;
    if al.abs() < 1e-300 {
        return OscElement { tau: 0.0, x: xi.a * u, y: xi.b * u, z: xi.c * u };
    }
    let eau = (al * u).exp();
    let emau = (-al * u).exp();
    OscElement {
        tau: al * u,
        x: xi.a * (eau - 1.0) / al,
        y: xi.b * (1.0 - emau) / al,
        z: xi.c * u + xi.a * xi.b / al * (u - (al * u).sinh() / al),
    }
}

// ---------------------------------------------------------------------------
// Projections

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    P1(f64),
    P2(f64, f64),
    Q(f64),
}

/// p₁ → s, p₂ → (s, t), q → t; all three are group homomorphisms.
pub fn project(gamma: &IsomElement, which: &str) -> Result<Projection> {
    match which {
        "p1" => Ok(Projection::P1(gamma.s)),
        "p2" => Ok(Projection::P2(gamma.s, gamma.t)),
        "q" => Ok(Projection::Q(gamma.t)),
        other => Err(PpError::Input(format!("unknown projection {:?}", other))),
    }
}
