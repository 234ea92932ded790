//! Continuous-time algebraic Riccati equation
//! `AᵀS + SA − SBR⁻¹BᵀS + Q = 0` by Newton–Kleinman iteration.
//!
//! Each Newton step solves one Lyapunov equation through its Kronecker form,
//! an `n² × n²` dense system; that is cheap for the state sizes used here.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};

use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 10_000;
const CONVERGENCE: f64 = 1e-14;

/// Solves `Fᵀ X + X F = −W` for `X`.
pub fn solve_lyapunov(f: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = f.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let ft = f.transpose();
    let lhs = eye.kronecker(&ft) + ft.kronecker(&eye);
    let rhs = DMatrix::from_column_slice(n * n, 1, (-w).as_slice());
    let x = lhs.lu().solve(&rhs)?;
    let x = DMatrix::from_column_slice(n, n, x.as_slice());
    let sym = (&x + x.transpose()) * 0.5;
    sym.iter().all(|v| v.is_finite()).then_some(sym)
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Largest real part among the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// A gain `K` with `A − BK` Hurwitz: zero when `A` already is, otherwise
/// the shifted-Lyapunov construction `K = BᵀZ⁻¹` with
/// `(A + βI)Z + Z(A + βI)ᵀ = 2BBᵀ`, which places every closed-loop
/// eigenvalue on `Re s = −β`.
pub fn stabilizing_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if spectral_abscissa(a) < 0.0 {
        return Ok(DMatrix::zeros(b.ncols(), n));
    }
    let beta = a.norm() + 1.0;
    let shifted = a + DMatrix::<f64>::identity(n, n) * beta;
    let z = solve_lyapunov(&(-shifted.transpose()), &(b * b.transpose() * 2.0))
        .ok_or(Error::NoStabilizingSolution("shifted Lyapunov equation is singular"))?;
    let z_inv = z
        .try_inverse()
        .ok_or(Error::NoStabilizingSolution("pair (A, B) is not controllable"))?;
    Ok(b.transpose() * z_inv)
}

/// `‖AᵀS + SA − SBR⁻¹BᵀS + Q‖_max`.
pub fn riccati_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r_inv: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> f64 {
    (a.transpose() * s + s * a - s * b * r_inv * b.transpose() * s + q).amax()
}

/// Stabilizing solution `S` of the continuous ARE.
pub fn solve_are(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r_inv = r.clone().try_inverse().ok_or(Error::InvalidWeights("R is singular"))?;
    let mut k = stabilizing_gain(a, b)?;
    let mut s_prev: Option<DMatrix<f64>> = None;

    for _ in 0..MAX_ITERATIONS {
        let closed = a - b * &k;
        let w = q + k.transpose() * r * &k;
        let s = solve_lyapunov(&closed, &w).ok_or(Error::NoStabilizingSolution("Lyapunov step is singular"))?;
        k = &r_inv * b.transpose() * &s;
        if let Some(prev) = &s_prev {
            if (&s - prev).amax() <= CONVERGENCE * s.amax().max(1.0) {
                return finish(a, b, q, &r_inv, s);
            }
        }
        s_prev = Some(s);
    }
    Err(Error::NoStabilizingSolution("Newton iteration did not converge"))
}

fn finish(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r_inv: &DMatrix<f64>,
    s: DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let closed = a - b * r_inv * b.transpose() * &s;
    if !(spectral_abscissa(&closed) < 0.0) {
        return Err(Error::NoStabilizingSolution("closed loop is not Hurwitz"));
    }
    let scale = q.amax().max(1.0);
    if !(riccati_residual(a, b, q, r_inv, &s) / scale < 1e-8) {
        return Err(Error::NoStabilizingSolution("Riccati residual above tolerance"));
    }
    Ok(s)
}
