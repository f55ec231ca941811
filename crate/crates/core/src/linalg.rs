//! f64 / complex helpers: matrix exponentials, the φ-functions used by the
//! closed-form one-parameter subgroups, complex nullspaces for eigenvector
//! extraction, continued fractions, and a fixed-step RK4 integrator.

use nalgebra::{Complex, DMatrix, DVector};

/// Matrix exponential by scaling-and-squaring with a Taylor kernel.
/// Matrices here are tiny (≤ 12×12), so this is both simple and accurate.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(m.nrows(), m.ncols());
    let norm = m.amax() * m.ncols() as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        squarings += 1;
        scale *= 0.5;
    }
    let a = m * scale;
    let n = m.nrows();
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// φ₁(X) = Σ Xᵏ/(k+1)!,  φ₂(X) = Σ Xᵏ/(k+2)!.
///
/// Computed from one exponential of the block matrix
/// [[X, I, 0], [0, 0, I], [0, 0, 0]], whose top row is [eˣ, φ₁(X), φ₂(X)].
pub fn phi12(x: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = x.nrows();
    assert_eq!(n, x.ncols());
    let mut big = DMatrix::zeros(3 * n, 3 * n);
    big.view_mut((0, 0), (n, n)).copy_from(x);
    big.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
    big.view_mut((n, 2 * n), (n, n)).copy_from(&DMatrix::identity(n, n));
    let e = expm(&big);
    (e.view((0, n), (n, n)).into(), e.view((0, 2 * n), (n, n)).into())
}

/// Nullspace basis of a complex matrix by Gaussian elimination with a
/// relative pivot tolerance.
pub fn nullspace_complex(m: &DMatrix<Complex<f64>>, tol: f64) -> Vec<DVector<Complex<f64>>> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let scale: f64 = a.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let thresh = tol * scale;
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[(i, c)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best <= thresh {
            continue;
        }
        a.swap_rows(r, p);
        let inv = Complex::new(1.0, 0.0) / a[(r, c)];
        for j in c..cols {
            a[(r, j)] *= inv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f.norm() > 0.0 {
                    for j in c..cols {
                        let t = f * a[(r, j)];
                        a[(i, j)] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = DVector::from_element(cols, Complex::new(0.0, 0.0));
            v[f] = Complex::new(1.0, 0.0);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[(row, f)];
            }
            v
        })
        .collect()
}

/// Best rational approximation p/q of `x` with q ≤ `max_denom`, via the
/// continued-fraction expansion. Returns `Some((p, q))` when the expansion
/// terminates (|x − p/q| < `tol`) within the denominator bound, `None` when
/// it certifiably does not — the shared "irrational at desk scale" test.
pub fn rational_within(x: f64, max_denom: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, 0i64, 1i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i64;
        let (p, q) = (ai.checked_mul(p0)?.checked_add(p1)?, ai.checked_mul(q0)?.checked_add(q1)?);
        if q.abs() > max_denom {
            return None;
        }
        if (x - p as f64 / q as f64).abs() < tol {
            return Some((p, q));
        }
        p1 = p0;
        q1 = q0;
        p0 = p;
        q0 = q;
        let frac = v - a;
        if frac.abs() < 1e-15 {
            return None; // converged but outside tol: treat as no certificate
        }
        v = 1.0 / frac;
    }
    None
}

/// Classic fixed-step RK4 on y' = f(t, y).
pub fn rk4<F: Fn(f64, &[f64]) -> Vec<f64>>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut t = t0;
    let axpy = |y: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    for _ in 0..steps {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    y
}
