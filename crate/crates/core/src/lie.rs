//! Finite-dimensional Lie algebras with bilinear forms, derivations and
//! involutions, plus the symmetric-triple analyzer that certifies the
//! transvection-algebra identities.
//!
//! Exact mode throughout, except for `eigen_spectrum` / `invariant_planes`
//! which are spectral and therefore f64.

use crate::linalg::nullspace_complex;
use crate::rational::{
    in_span, rat_i, rat_to_f64, vec_is_zero, vec_max_abs, vec_scale, vec_sub, Rat, RatMat,
};
use crate::report::{Check, VerificationReport};
use crate::{PpError, Result};
use nalgebra::{Complex, DMatrix, DVector};
use num::{One, Signed, Zero};

// ---------------------------------------------------------------------------
// Types

/// Algebra given by basis labels and structure constants
/// c^k_{ij}: [e_i, e_j] = Σ_k c^k_{ij} e_k (exact rationals).
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    pub dim: usize,
    pub labels: Vec<String>,
    c: Vec<Rat>, // dim³, index (i,j,k)
}

impl LieAlgebra {
    pub fn new(dim: usize, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), dim);
        LieAlgebra { dim, labels, c: vec![Rat::zero(); dim * dim * dim] }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.c[self.idx(i, j, k)]
    }

    /// Set c^k_{ij} for one slot only (no antisymmetric completion);
    /// used to build deliberately broken tables in tests.
    pub fn set_constant_raw(&mut self, i: usize, j: usize, k: usize, v: Rat) {
        let id = self.idx(i, j, k);
        self.c[id] = v;
    }

    /// Define [e_i, e_j] = Σ coeffs, with the antisymmetric slot filled in.
    pub fn set_bracket(&mut self, i: usize, j: usize, coeffs: &[(usize, Rat)]) {
        for (k, v) in coeffs {
            let id = self.idx(i, j, *k);
            self.c[id] = v.clone();
            let id2 = self.idx(j, i, *k);
            self.c[id2] = -v.clone();
        }
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Rat> {
        (0..self.dim).map(|k| self.constant(i, j, k).clone()).collect()
    }

    /// Matrix of ad_x in the given basis: (ad_x)_{kj} = Σ_i x_i c^k_{ij}.
    pub fn ad(&self, x: &[Rat]) -> RatMat {
        let mut m = RatMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for i in 0..self.dim {
                if x[i].is_zero() {
                    continue;
                }
                for k in 0..self.dim {
                    let t = &x[i] * self.constant(i, j, k);
                    m[(k, j)] = &m[(k, j)] + &t;
                }
            }
        }
        m
    }
}

/// Symmetric bilinear form; the signature (p, q) counts positive/negative
/// eigenvalues (computed numerically at construction).
#[derive(Debug, Clone)]
pub struct BilinearForm {
    pub mat: RatMat,
    pub signature: (usize, usize),
}

impl BilinearForm {
    pub fn new(mat: RatMat) -> Result<Self> {
        if mat.rows != mat.cols {
            return Err(PpError::Dimension("bilinear form must be square".into()));
        }
        if mat != mat.transpose() {
            return Err(PpError::Precondition("bilinear form must be symmetric".into()));
        }
        let eig = mat.to_f64().symmetric_eigen().eigenvalues;
        let p = eig.iter().filter(|&&l| l > 1e-12).count();
        let q = eig.iter().filter(|&&l| l < -1e-12).count();
        Ok(BilinearForm { mat, signature: (p, q) })
    }

    pub fn eval(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.mat.rows {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.mat.cols {
                let t = &x[i] * &(&self.mat[(i, j)] * &y[j]);
                acc = &acc + &t;
            }
        }
        acc
    }
}

/// Linear map checked against the Leibniz rule by `is_derivation`.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub matrix: RatMat,
}

/// Algebra + ad-invariant form + involution; the raw data of a symmetric
/// space presented infinitesimally.
#[derive(Debug, Clone)]
pub struct SymmetricTriple {
    pub algebra: LieAlgebra,
    pub form: BilinearForm,
    pub involution: RatMat,
}

/// Output of `analyze_symmetric_triple`: the Θ-eigenspace decomposition,
/// the lightlike pair (L, V), the transversal a = a⁺ ⊕ a⁻ with its 2-form
/// ω, and one verdict per named identity.
#[derive(Debug, Clone)]
pub struct TransvectionReport {
    pub plus_space: Vec<Vec<Rat>>,
    pub minus_space: Vec<Vec<Rat>>,
    pub center_field: Vec<Rat>,
    pub lightlike_partner: Vec<Rat>,
    pub a_plus: Vec<Vec<Rat>>,
    pub a_minus: Vec<Vec<Rat>>,
    pub omega: RatMat,
    pub verdicts: VerificationReport,
}

// ---------------------------------------------------------------------------
// Factories

/// heis_{2n+1}: basis a₁..a_{2n}, z with [a_i, a_{n+i}] = z.
pub fn heis(n: usize) -> LieAlgebra {
    let mut labels: Vec<String> = (1..=2 * n).map(|i| format!("a{}", i)).collect();
    labels.push("z".into());
    let mut alg = LieAlgebra::new(2 * n + 1, labels);
    for i in 0..n {
        alg.set_bracket(i, n + i, &[(2 * n, rat_i(1))]);
    }
    alg
}

/// The symplectic form of heis_{2n+1} on the a-part: ω(a_i, a_{n+i}) = 1.
pub fn omega_heis(n: usize) -> RatMat {
    let mut m = RatMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = rat_i(1);
        m[(n + i, i)] = rat_i(-1);
    }
    m
}

pub fn omega_heis_f64(n: usize) -> DMatrix<f64> {
    omega_heis(n).to_f64()
}

/// osc_s: basis (T, X, Y, Z) with [T,X]=X, [T,Y]=−Y, [X,Y]=Z.
pub fn osc_s() -> LieAlgebra {
    let mut alg = LieAlgebra::new(4, vec!["T".into(), "X".into(), "Y".into(), "Z".into()]);
    alg.set_bracket(0, 1, &[(1, rat_i(1))]);
    alg.set_bracket(0, 2, &[(2, rat_i(-1))]);
    alg.set_bracket(1, 2, &[(3, rat_i(1))]);
    alg
}

/// The bi-invariant form of osc_s: ⟨T,Z⟩ = ⟨X,Y⟩ = 1.
pub fn osc_form() -> BilinearForm {
    let mut m = RatMat::zeros(4, 4);
    m[(0, 3)] = rat_i(1);
    m[(3, 0)] = rat_i(1);
    m[(1, 2)] = rat_i(1);
    m[(2, 1)] = rat_i(1);
    BilinearForm::new(m).expect("symmetric by construction")
}

/// Involution of osc_s with fixed part span{X+Y}:
/// Θ(T) = −T, Θ(Z) = −Z, Θ(X) = Y, Θ(Y) = X.
pub fn osc_involution() -> RatMat {
    RatMat::from_i64_rows(&[
        &[-1, 0, 0, 0],
        &[0, 0, 1, 0],
        &[0, 1, 0, 0],
        &[0, 0, 0, -1],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Flavor {
    H,
    E,
}

/// The 4×4 derivation block L_{s,t} of the chosen flavor (exact entries).
pub fn derivation_block(flavor: Flavor, s: &Rat, t: &Rat) -> RatMat {
    let s = s.clone();
    let t = t.clone();
    let z = Rat::zero;
    let rows = match flavor {
        Flavor::H => vec![
            vec![z(), t.clone(), -s.clone(), z()],
            vec![t.clone(), z(), z(), s.clone()],
            vec![-s.clone(), z(), z(), -t.clone()],
            vec![z(), s, -t, z()],
        ],
        Flavor::E => vec![
            vec![z(), t.clone(), -s.clone(), z()],
            vec![t.clone(), z(), z(), s.clone()],
            vec![s.clone(), z(), z(), -t.clone()],
            vec![z(), -s, -t, z()],
        ],
    };
    RatMat::from_rows(&rows)
}

pub fn derivation_block_f64(flavor: Flavor, s: f64, t: f64) -> DMatrix<f64> {
    let rows: [f64; 16] = match flavor {
        Flavor::H => [0., t, -s, 0., t, 0., 0., s, -s, 0., 0., -t, 0., s, -t, 0.],
        Flavor::E => [0., t, -s, 0., t, 0., 0., s, s, 0., 0., -t, 0., -s, -t, 0.],
    };
    DMatrix::from_row_slice(4, 4, &rows)
}

/// L_{s,t} extended by zero on the center: a derivation of heis₅.
pub fn derivation_heis5(flavor: Flavor, s: &Rat, t: &Rat) -> RatMat {
    let b = derivation_block(flavor, s, t);
    let mut m = RatMat::zeros(5, 5);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = b[(i, j)].clone();
        }
    }
    m
}

/// Transvection algebra ℝL ⋉ heis₅ of the flavor model:
/// basis (L, a₁..a₄, z), [L, a] = L_{1,0}·a, [a_i, a_j] = ω(a_i, a_j) z.
pub fn transvection_algebra(flavor: Flavor) -> LieAlgebra {
    let labels =
        vec!["L".into(), "a1".into(), "a2".into(), "a3".into(), "a4".into(), "z".into()];
    let mut alg = LieAlgebra::new(6, labels);
    let block = derivation_block(flavor, &rat_i(1), &Rat::zero());
    for j in 0..4 {
        let coeffs: Vec<(usize, Rat)> = (0..4)
            .filter(|&k| !block[(k, j)].is_zero())
            .map(|k| (k + 1, block[(k, j)].clone()))
            .collect();
        alg.set_bracket(0, j + 1, &coeffs);
    }
    let om = omega_heis(2);
    for i in 0..4 {
        for j in i + 1..4 {
            if !om[(i, j)].is_zero() {
                alg.set_bracket(i + 1, j + 1, &[(5, om[(i, j)].clone())]);
            }
        }
    }
    alg
}

/// Ad-invariant form of the transvection algebra: ⟨L,z⟩ = 1, and on the
/// a-part ⟨A₁,A₂⟩ = ω(L⁻¹A₁, A₂) — diag(1,−1,−1,1) for H, diag(1,−1,1,−1)
/// for E in the basis a₁..a₄.
pub fn transvection_form(flavor: Flavor) -> BilinearForm {
    let mut m = RatMat::zeros(6, 6);
    m[(0, 5)] = rat_i(1);
    m[(5, 0)] = rat_i(1);
    let diag: [i64; 4] = match flavor {
        Flavor::H => [1, -1, -1, 1],
        Flavor::E => [1, -1, 1, -1],
    };
    for (i, d) in diag.iter().enumerate() {
        m[(i + 1, i + 1)] = rat_i(*d);
    }
    BilinearForm::new(m).expect("symmetric by construction")
}

/// Involution of the transvection algebra: fixes a₁, a₂; flips L, a₃, a₄, z.
pub fn transvection_involution() -> RatMat {
    let mut m = RatMat::identity(6);
    for &i in &[0usize, 3, 4, 5] {
        m[(i, i)] = rat_i(-1);
    }
    m
}

pub fn transvection_triple(flavor: Flavor) -> SymmetricTriple {
    SymmetricTriple {
        algebra: transvection_algebra(flavor),
        form: transvection_form(flavor),
        involution: transvection_involution(),
    }
}

pub fn osc_triple() -> SymmetricTriple {
    SymmetricTriple { algebra: osc_s(), form: osc_form(), involution: osc_involution() }
}

// ---------------------------------------------------------------------------
// Operations

/// [x, y] by structure constants. Exact mode.
pub fn bracket(alg: &LieAlgebra, x: &[Rat], y: &[Rat]) -> Result<Vec<Rat>> {
    if x.len() != alg.dim || y.len() != alg.dim {
        return Err(PpError::Dimension(format!(
            "bracket expects vectors of length {}, got {} and {}",
            alg.dim,
            x.len(),
            y.len()
        )));
    }
    let mut out = vec![Rat::zero(); alg.dim];
    for i in 0..alg.dim {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..alg.dim {
            if y[j].is_zero() {
                continue;
            }
            let f = &x[i] * &y[j];
            for k in 0..alg.dim {
                let c = alg.constant(i, j, k);
                if !c.is_zero() {
                    let t = &f * c;
                    out[k] = &out[k] + &t;
                }
            }
        }
    }
    Ok(out)
}

fn basis_vec(dim: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); dim];
    v[i] = rat_i(1);
    v
}

/// Antisymmetry of the stored table plus the Jacobi identity over all basis
/// triples. Exact mode: pass means residual exactly zero.
pub fn check_jacobi(alg: &LieAlgebra) -> VerificationReport {
    let mut rep = VerificationReport::new("jacobi");
    let mut anti_res = Rat::zero();
    let mut anti_witness = None;
    for i in 0..alg.dim {
        for j in 0..alg.dim {
            for k in 0..alg.dim {
                let s = alg.constant(i, j, k) + alg.constant(j, i, k);
                if s.abs() > anti_res {
                    anti_res = s.abs();
                    anti_witness = Some(format!("c^{}_({},{}) + c^{}_({},{})", k, i, j, k, j, i));
                }
            }
        }
    }
    rep.push(Check::from_residual(
        "antisymmetry",
        rat_to_f64(&anti_res),
        0.0,
        &anti_witness.unwrap_or_default(),
    ));

    let mut jac_res = Rat::zero();
    let mut jac_witness = None;
    for i in 0..alg.dim {
        let ei = basis_vec(alg.dim, i);
        for j in i + 1..alg.dim {
            let ej = basis_vec(alg.dim, j);
            for k in j + 1..alg.dim {
                let ek = basis_vec(alg.dim, k);
                let t1 = bracket(alg, &bracket(alg, &ei, &ej).unwrap(), &ek).unwrap();
                let t2 = bracket(alg, &bracket(alg, &ej, &ek).unwrap(), &ei).unwrap();
                let t3 = bracket(alg, &bracket(alg, &ek, &ei).unwrap(), &ej).unwrap();
                let mut total = Rat::zero();
                for c in 0..alg.dim {
                    total = &total + &(&(&t1[c] + &t2[c]) + &t3[c]).abs();
                }
                if total > jac_res {
                    jac_res = total;
                    jac_witness = Some(format!("basis triple ({},{},{})", i, j, k));
                }
            }
        }
    }
    rep.push(Check::from_residual(
        "jacobi",
        rat_to_f64(&jac_res),
        0.0,
        &jac_witness.unwrap_or_default(),
    ));
    rep
}

/// Leibniz rule D[x,y] = [Dx,y] + [x,Dy] on all basis pairs. Exact mode.
pub fn is_derivation(alg: &LieAlgebra, d: &Derivation) -> (bool, Rat) {
    let mut res = Rat::zero();
    for i in 0..alg.dim {
        let ei = basis_vec(alg.dim, i);
        let dei = d.matrix.mul_vec(&ei);
        for j in 0..alg.dim {
            let ej = basis_vec(alg.dim, j);
            let dej = d.matrix.mul_vec(&ej);
            let lhs = d.matrix.mul_vec(&bracket(alg, &ei, &ej).unwrap());
            let rhs = crate::rational::vec_add(
                &bracket(alg, &dei, &ej).unwrap(),
                &bracket(alg, &ei, &dej).unwrap(),
            );
            let r = vec_max_abs(&vec_sub(&lhs, &rhs));
            if r > res {
                res = r;
            }
        }
    }
    (res.is_zero(), res)
}

/// ⟨[x,y],z⟩ + ⟨y,[x,z]⟩ = 0 on all basis triples. Exact mode.
pub fn is_ad_invariant(alg: &LieAlgebra, b: &BilinearForm) -> (bool, Rat) {
    let mut res = Rat::zero();
    for i in 0..alg.dim {
        let ei = basis_vec(alg.dim, i);
        for j in 0..alg.dim {
            let ej = basis_vec(alg.dim, j);
            let bij = bracket(alg, &ei, &ej).unwrap();
            for k in 0..alg.dim {
                let ek = basis_vec(alg.dim, k);
                let bik = bracket(alg, &ei, &ek).unwrap();
                let r = (&b.eval(&bij, &ek) + &b.eval(&ej, &bik)).abs();
                if r > res {
                    res = r;
                }
            }
        }
    }
    (res.is_zero(), res)
}

/// Solve D = ad_x; `Some(x)` iff D is inner. Exact mode.
pub fn is_inner(alg: &LieAlgebra, d: &Derivation) -> Option<Vec<Rat>> {
    let n = alg.dim;
    // Unknown x ∈ ℝⁿ; equations (ad_x)_{kj} = D_{kj}.
    let mut sys = RatMat::zeros(n * n, n);
    let mut rhs = vec![Rat::zero(); n * n];
    for k in 0..n {
        for j in 0..n {
            let row = k * n + j;
            for i in 0..n {
                sys[(row, i)] = alg.constant(i, j, k).clone();
            }
            rhs[row] = d.matrix[(k, j)].clone();
        }
    }
    sys.solve(&rhs)
}

/// Eigenvalues with multiplicity, sorted lexicographically by (re, im). f64.
///
/// The plain Francis QR iteration can cycle on matrices whose spectrum has
/// the exact ±a±bi symmetry our derivation families produce, so the Schur
/// solve is iteration-bounded and retried under random orthogonal
/// similarity transforms (which leave the spectrum unchanged).
pub fn eigen_spectrum(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    use nalgebra::linalg::Schur;
    let n = m.nrows();
    let mut work = m.clone();
    let mut rng_state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut raw: Option<Vec<Complex<f64>>> = None;
    for attempt in 0..20 {
        if let Some(schur) = Schur::try_new(work.clone(), 1e-13, 100 * n * n * (attempt + 2)) {
            raw = Some(schur.complex_eigenvalues().iter().copied().collect());
            break;
        }
        // random orthogonal change of basis, exact similarity
        let r = DMatrix::from_fn(n, n, |_, _| next());
        let q = r.qr().q();
        work = q.transpose() * m * q;
    }
    let mut eigs = raw.expect("eigenvalue iteration failed after 20 basis changes");
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    eigs
}

/// A D-invariant real 2-plane together with the trace of D restricted to it.
#[derive(Debug, Clone)]
pub struct InvariantPlane {
    pub span: [DVector<f64>; 2],
    pub restricted_trace: f64,
}

/// All real invariant 2-planes of a 4×4 matrix with simple spectrum: spans
/// of two real eigenvectors, or the real form of a conjugate eigenpair.
/// With `unimodular_only`, keep those on which the restricted trace is 0.
pub fn invariant_planes(m: &DMatrix<f64>, unimodular_only: bool) -> Result<Vec<InvariantPlane>> {
    assert_eq!(m.shape(), (4, 4), "invariant_planes expects a 4x4 matrix");
    let eigs = eigen_spectrum(m);
    for i in 0..4 {
        for j in i + 1..4 {
            if (eigs[i] - eigs[j]).norm() < 1e-9 * (1.0 + eigs[i].norm()) {
                return Err(PpError::DegenerateSpectrum(format!(
                    "repeated eigenvalue near {}",
                    eigs[i]
                )));
            }
        }
    }
    let mc = m.map(|x| Complex::new(x, 0.0));
    let eigvec = |lam: Complex<f64>| -> DVector<Complex<f64>> {
        let shifted = &mc - DMatrix::<Complex<f64>>::identity(4, 4) * lam;
        let ns = nullspace_complex(&shifted, 1e-10);
        assert!(!ns.is_empty(), "no eigenvector found for simple eigenvalue");
        let v = &ns[0];
        // Rotate the phase so the largest component is real and positive.
        let (mut big, mut arg) = (0.0, Complex::new(1.0, 0.0));
        for c in v.iter() {
            if c.norm() > big {
                big = c.norm();
                arg = c / c.norm();
            }
        }
        (v / arg).normalize()
    };
    let imag_tol = 1e-9 * (1.0 + m.amax());
    let mut planes = Vec::new();
    for i in 0..4 {
        // Conjugate pair: take each eigenvalue with im > 0 once.
        if eigs[i].im > imag_tol {
            let v = eigvec(eigs[i]);
            let re = v.map(|c| c.re);
            let im = v.map(|c| c.im);
            planes.push(InvariantPlane { span: [re, im], restricted_trace: 2.0 * eigs[i].re });
        }
        if eigs[i].im.abs() > imag_tol {
            continue;
        }
        for j in i + 1..4 {
            if eigs[j].im.abs() > imag_tol {
                continue;
            }
            let vi = eigvec(eigs[i]).map(|c| c.re);
            let vj = eigvec(eigs[j]).map(|c| c.re);
            planes.push(InvariantPlane {
                span: [DVector::from(vi), DVector::from(vj)],
                restricted_trace: eigs[i].re + eigs[j].re,
            });
        }
    }
    if unimodular_only {
        planes.retain(|p| p.restricted_trace.abs() < imag_tol);
    }
    Ok(planes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneClass {
    Abelian,
    Heisenberg,
}

/// Lift a 2-plane in heis/𝔷 back to heis: the span is a Heisenberg
/// subalgebra iff ω on the two spanning vectors is nonzero, else abelian.
pub fn plane_to_subalgebra(v1: &DVector<f64>, v2: &DVector<f64>) -> PlaneClass {
    assert_eq!(v1.len() % 2, 0);
    let n = v1.len() / 2;
    let om = omega_heis_f64(n);
    let val = (v1.transpose() * &om * v2)[(0, 0)];
    if val.abs() > 1e-9 * (1.0 + v1.norm() * v2.norm()) {
        PlaneClass::Heisenberg
    } else {
        PlaneClass::Abelian
    }
}

/// ωD + Dᵀω = 0. Exact mode.
pub fn preserves_symplectic(d: &RatMat, omega: &RatMat) -> (bool, Rat) {
    let r = omega.mul(d).add(&d.transpose().mul(omega));
    (r.is_zero(), r.max_abs())
}

// ---------------------------------------------------------------------------
// Symmetric-triple analyzer

fn projector(theta: &RatMat, sign: i64) -> RatMat {
    // (I ± Θ)/2
    let n = theta.rows;
    RatMat::identity(n).add(&theta.scale(&rat_i(sign))).scale(&Rat::new(1.into(), 2.into()))
}

fn theta_eigenspace(theta: &RatMat, sign: i64) -> Vec<Vec<Rat>> {
    // kernel of Θ − sign·I
    let n = theta.rows;
    theta.sub(&RatMat::identity(n).scale(&rat_i(sign))).nullspace()
}

/// Verify the symmetric-triple axioms and the full list of transvection
/// identities, with one residual per named identity. Exact mode.
pub fn analyze_symmetric_triple(
    triple: &SymmetricTriple,
    v_candidate: &[Rat],
) -> Result<TransvectionReport> {
    let alg = &triple.algebra;
    let b = &triple.form;
    let theta = &triple.involution;
    let n = alg.dim;
    if theta.rows != n || b.mat.rows != n || v_candidate.len() != n {
        return Err(PpError::Dimension("triple pieces must share the algebra dimension".into()));
    }

    // Triple invariants.
    if !theta.mul(theta).sub(&RatMat::identity(n)).is_zero() {
        return Err(PpError::Precondition("Θ² ≠ identity".into()));
    }
    for i in 0..n {
        let ei = basis_vec(n, i);
        let tei = theta.mul_vec(&ei);
        for j in 0..n {
            let ej = basis_vec(n, j);
            let lhs = bracket(alg, &tei, &theta.mul_vec(&ej))?;
            let rhs = theta.mul_vec(&bracket(alg, &ei, &ej)?);
            if !vec_is_zero(&vec_sub(&lhs, &rhs)) {
                return Err(PpError::Precondition("Θ is not a Lie-algebra automorphism".into()));
            }
        }
    }
    if theta.transpose().mul(&b.mat).mul(theta) != b.mat {
        return Err(PpError::Precondition("form is not Θ-invariant".into()));
    }
    let (ad_ok, _) = is_ad_invariant(alg, b);
    if !ad_ok {
        return Err(PpError::Precondition("form is not ad-invariant".into()));
    }

    // V: central, isotropic, Θ-anti-invariant.
    for i in 0..n {
        if !vec_is_zero(&bracket(alg, v_candidate, &basis_vec(n, i))?) {
            return Err(PpError::Precondition("V candidate is not central".into()));
        }
    }
    if !b.eval(v_candidate, v_candidate).is_zero() {
        return Err(PpError::Precondition("V candidate is not isotropic".into()));
    }
    let plus_space = theta_eigenspace(theta, 1);
    let minus_space = theta_eigenspace(theta, -1);

    let mut verdicts = VerificationReport::new("transvection-identities");

    if minus_space.is_empty() {
        verdicts.push(Check::fail("tangent_space_nonempty", 1.0, "ĝ⁻ = 0 (Θ has no −1 eigenspace)"));
        return Ok(TransvectionReport {
            plus_space,
            minus_space,
            center_field: v_candidate.to_vec(),
            lightlike_partner: vec![],
            a_plus: vec![],
            a_minus: vec![],
            omega: RatMat::zeros(0, 0),
            verdicts,
        });
    }

    let theta_v = theta.mul_vec(v_candidate);
    if !vec_is_zero(&crate::rational::vec_add(&theta_v, v_candidate)) {
        return Err(PpError::Precondition("V candidate is not Θ-anti-invariant".into()));
    }

    // L ∈ ĝ⁻ with ⟨L,V⟩ = 1 and ⟨L,L⟩ = 0.
    let mut l_raw: Option<Vec<Rat>> = None;
    for w in &minus_space {
        let c = b.eval(w, v_candidate);
        if !c.is_zero() {
            l_raw = Some(vec_scale(w, &c.recip()));
            break;
        }
    }
    let Some(l0) = l_raw else {
        return Err(PpError::DegeneratePairing(
            "no vector in ĝ⁻ pairs non-trivially with V".into(),
        ));
    };
    let half_norm = &b.eval(&l0, &l0) * &Rat::new(1.into(), 2.into());
    let l = vec_sub(&l0, &vec_scale(v_candidate, &half_norm));
    debug_assert!(b.eval(&l, v_candidate).is_one());
    debug_assert!(b.eval(&l, &l).is_zero());

    // a = span{L,V}^⊥ and its Θ-splitting.
    let mut ortho = RatMat::zeros(2, n);
    for j in 0..n {
        let ej = basis_vec(n, j);
        ortho[(0, j)] = b.eval(&l, &ej);
        ortho[(1, j)] = b.eval(v_candidate, &ej);
    }
    let a_basis_all = ortho.nullspace();
    let split = |sign: i64| -> Vec<Vec<Rat>> {
        let mut rows = RatMat::zeros(n + 2, n);
        let pm = theta.sub(&RatMat::identity(n).scale(&rat_i(sign)));
        for i in 0..n {
            for j in 0..n {
                rows[(i, j)] = pm[(i, j)].clone();
            }
        }
        for j in 0..n {
            rows[(n, j)] = ortho[(0, j)].clone();
            rows[(n + 1, j)] = ortho[(1, j)].clone();
        }
        rows.nullspace()
    };
    let a_plus = split(1);
    let a_minus = split(-1);
    let a_basis: Vec<Vec<Rat>> = a_plus.iter().chain(a_minus.iter()).cloned().collect();
    {
        let dim_a = a_basis_all.len();
        if a_plus.len() + a_minus.len() != dim_a {
            return Err(PpError::Precondition(
                "a = span{L,V}^⊥ does not split under Θ".into(),
            ));
        }
    }

    let p_minus = projector(theta, -1);
    let push_residual = |verdicts: &mut VerificationReport, name: &str, res: Rat, witness: &str| {
        verdicts.push(Check::from_residual(name, rat_to_f64(&res), 0.0, witness));
    };

    // [ĝ⁻, ĝ⁻] ⊆ ĝ⁺
    let mut res = Rat::zero();
    for x in &minus_space {
        for y in &minus_space {
            let r = vec_max_abs(&p_minus.mul_vec(&bracket(alg, x, y)?));
            if r > res {
                res = r;
            }
        }
    }
    push_residual(&mut verdicts, "minus_bracket_in_plus", res, "some [ĝ⁻,ĝ⁻] leaves ĝ⁺");

    // [a⁻, a⁻] = 0 and [a⁺, a⁺] = 0
    for (name, part) in [("a_minus_abelian", &a_minus), ("a_plus_abelian", &a_plus)] {
        let mut res = Rat::zero();
        for x in part.iter() {
            for y in part.iter() {
                let r = vec_max_abs(&bracket(alg, x, y)?);
                if r > res {
                    res = r;
                }
            }
        }
        push_residual(&mut verdicts, name, res, "nonzero bracket inside the part");
    }

    // [a⁻, a⁺] ⊆ ℝV and the ω-relation [A₁,A₂] = ω(A₁,A₂)V on all of a.
    let m_a = a_basis.len();
    let mut omega = RatMat::zeros(m_a, m_a);
    let mut cross_res = Rat::zero();
    let mut omega_res = Rat::zero();
    for (i, x) in a_basis.iter().enumerate() {
        for (j, y) in a_basis.iter().enumerate() {
            let br = bracket(alg, x, y)?;
            let coeff = b.eval(&br, &l); // ⟨λV, L⟩ = λ
            omega[(i, j)] = coeff.clone();
            let r = vec_max_abs(&vec_sub(&br, &vec_scale(v_candidate, &coeff)));
            if r > omega_res {
                omega_res = r.clone();
            }
            let in_minus = i >= a_plus.len();
            let jn_minus = j >= a_plus.len();
            if in_minus != jn_minus && r > cross_res {
                cross_res = r;
            }
        }
    }
    push_residual(&mut verdicts, "cross_bracket_central", cross_res, "[a⁻,a⁺] leaves ℝV");
    push_residual(&mut verdicts, "omega_heisenberg_relation", omega_res, "[A₁,A₂] ≠ ω(A₁,A₂)V");

    let om_det = omega.det();
    verdicts.push(if om_det.is_zero() {
        Check::fail("omega_nondegenerate", 1.0, "det ω = 0")
    } else {
        Check::pass("omega_nondegenerate", 0.0)
    });

    // [[a⁻, a⁻], a⁻] = 0: the flat-leaf identity.
    let mut flat_res = Rat::zero();
    for x in &a_minus {
        for y in &a_minus {
            let xy = bracket(alg, x, y)?;
            for z in &a_minus {
                let r = vec_max_abs(&bracket(alg, &xy, z)?);
                if r > flat_res {
                    flat_res = r;
                }
            }
        }
    }
    push_residual(&mut verdicts, "flat_leaves", flat_res, "[[a⁻,a⁻],a⁻] ≠ 0");

    // L non-inner as a derivation of the nilpotent part n = a ⊕ ℝV.
    let mut n_basis = a_basis.clone();
    n_basis.push(v_candidate.to_vec());
    match restrict_ad(alg, &l, &n_basis) {
        Some((sub, d)) => {
            let inner = is_inner(&sub, &Derivation { matrix: d });
            verdicts.push(match inner {
                None => Check::pass("L_non_inner", 0.0),
                Some(_) => Check::fail("L_non_inner", 1.0, "ad_L is inner on a ⊕ ℝV"),
            });
        }
        None => {
            verdicts.push(Check::fail("L_non_inner", 1.0, "ad_L does not preserve a ⊕ ℝV"));
        }
    }

    Ok(TransvectionReport {
        plus_space,
        minus_space,
        center_field: v_candidate.to_vec(),
        lightlike_partner: l,
        a_plus,
        a_minus,
        omega,
        verdicts,
    })
}

/// Express the subalgebra spanned by `sub_basis` in its own coordinates and
/// restrict ad_x to it; `None` when brackets leave the span.
fn restrict_ad(
    alg: &LieAlgebra,
    x: &[Rat],
    sub_basis: &[Vec<Rat>],
) -> Option<(LieAlgebra, RatMat)> {
    let m = sub_basis.len();
    let cols = RatMat::from_cols(sub_basis);
    let expand = |v: &[Rat]| -> Option<Vec<Rat>> { cols.solve(v) };
    let mut sub = LieAlgebra::new(m, (0..m).map(|i| format!("n{}", i)).collect());
    for i in 0..m {
        for j in i + 1..m {
            let br = bracket(alg, &sub_basis[i], &sub_basis[j]).ok()?;
            if !in_span(sub_basis, &br) {
                return None;
            }
            let coords = expand(&br)?;
            let coeffs: Vec<(usize, Rat)> =
                coords.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.clone())).collect();
            sub.set_bracket(i, j, &coeffs);
        }
    }
    let mut d = RatMat::zeros(m, m);
    for j in 0..m {
        let adxj = bracket(alg, x, &sub_basis[j]).ok()?;
        let coords = expand(&adxj)?;
        for k in 0..m {
            d[(k, j)] = coords[k].clone();
        }
    }
    Some((sub, d))
}
