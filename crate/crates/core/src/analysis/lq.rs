//! Continuous-time LQ design by Newton–Kleinman iteration.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Stop once the Riccati residual Frobenius norm drops below this.
pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LqDesign {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// Gain row(s) with `u = -K x`.
    pub k: DMatrix<f64>,
    /// Frobenius norm of `AᵀP + PA - PBR⁻¹BᵀP + Q`.
    pub residual: f64,
    /// Residual norm after each Newton step.
    pub trace: Vec<f64>,
    /// Eigenvalues of `A - BK` as `[re, im]`.
    pub closed_loop_eigenvalues: Vec<[f64; 2]>,
}

/// Eigenvalues of a real square matrix as `[re, im]` pairs sorted by real
/// part, then imaginary part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<[f64; 2]> {
    let mut ev: Vec<[f64; 2]> = m.complex_eigenvalues().iter().map(|c| [c.re, c.im]).collect();
    ev.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    ev
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    eigenvalues(m).iter().all(|e| e[0] < 0.0)
}

/// Solves `AᵀX + XA + Q = 0` through the Kronecker-vectorized system.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "Lyapunov solve needs square A and Q of equal size, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let lhs = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DMatrix::from_column_slice(n * n, 1, q.as_slice());
    let x = lhs.lu().solve(&rhs).ok_or(Error::Singular("Lyapunov equation"))?;
    let x = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok(symmetrize(&x))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn riccati_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<f64> {
    let r_inv = r.clone().try_inverse().ok_or(Error::Singular("R inverse"))?;
    let res = a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q;
    Ok(res.norm())
}

/// Stabilizing gain from Bass's construction: with `β` above every real
/// part of `A`, `Z` solving `(A + βI)Z + Z(A + βI)ᵀ = 2BBᵀ` gives a
/// Hurwitz `A - BBᵀZ⁻¹` whenever `(A, B)` is controllable.
fn initial_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, m) = (a.nrows(), b.ncols());
    if is_hurwitz(a) {
        return Ok(DMatrix::zeros(m, n));
    }
    let beta = a.norm() + 1.0;
    let shifted = -(a + DMatrix::identity(n, n) * beta);
    // shifted Z + Z shiftedᵀ + 2BBᵀ = 0
    let z = solve_lyapunov(&shifted.transpose(), &(b * b.transpose() * 2.0))?;
    let z_inv = z
        .try_inverse()
        .ok_or_else(|| Error::NotStabilizable("controllability Gramian is singular".into()))?;
    let k = b.transpose() * z_inv;
    if !is_hurwitz(&(a - b * &k)) {
        return Err(Error::NotStabilizable("no stabilizing initial gain found".into()));
    }
    Ok(k)
}

/// LQ-optimal state feedback for `ẋ = Ax + Bu` with cost `∫ xᵀQx + uᵀRu`.
pub fn lq_design(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<LqDesign> {
    let (n, m) = (a.nrows(), b.ncols());
    if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "A {:?}, B {:?}, Q {:?}, R {:?}",
            a.shape(),
            b.shape(),
            q.shape(),
            r.shape()
        )));
    }
    if r.clone().cholesky().is_none() {
        return Err(Error::invalid("R", "must be symmetric positive definite"));
    }
    let r_inv = r.clone().try_inverse().ok_or(Error::Singular("R inverse"))?;
    let mut k = initial_gain(a, b)?;
    let mut trace = Vec::new();
    let mut best: Option<(f64, DMatrix<f64>, DMatrix<f64>)> = None;
    // polishing steps taken after reaching the tolerance
    let mut polish = 0;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let ak = a - b * &k;
        let qk = q + k.transpose() * r * &k;
        let p = solve_lyapunov(&ak, &qk)?;
        k = &r_inv * b.transpose() * &p;
        let res = riccati_residual(a, b, q, r, &p)?;
        trace.push(res);
        if best.as_ref().is_none_or(|(r0, _, _)| res < *r0) {
            best = Some((res, p, k.clone()));
        }
        if res <= NEWTON_TOLERANCE {
            polish += 1;
            if polish > 2 {
                break;
            }
        }
    }
    let (residual, p, k) = best.expect("at least one iteration runs");
    if residual > NEWTON_TOLERANCE {
        return Err(Error::RiccatiNonConvergence {
            iterations: trace.len(),
            trace,
        });
    }
    let closed_loop_eigenvalues = eigenvalues(&(a - b * &k));
    Ok(LqDesign {
        q: q.clone(),
        r: r.clone(),
        p,
        k,
        residual,
        trace,
        closed_loop_eigenvalues,
    })
}
