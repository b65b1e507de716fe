use nalgebra::DMatrix;
use serde::Serialize;

use super::lq::eigenvalues;
use crate::error::{Error, Result};
use crate::plant::GIVEN_A;

/// Symmetry tolerance for positive-definiteness checks.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// The four reference cell matrices `P1..P4`.
pub const PAPER_P: [[[f64; 2]; 2]; 4] = [
    [[5.7838, 0.9475], [0.9475, 8.4630]],
    [[3.5593, 0.6051], [0.6051, 5.2080]],
    [[4.0042, 0.6808], [0.6808, 5.8590]],
    [[4.8940, 0.8321], [0.8321, 7.1610]],
];

pub const PAPER_PHI: f64 = 0.4;
pub const PAPER_GAMMA: f64 = 3.0;

pub fn mat2(m: &[[f64; 2]; 2]) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

/// Cholesky-based test; rejects matrices asymmetric beyond `1e-9`.
pub fn is_positive_definite(p: &DMatrix<f64>) -> Result<bool> {
    if !p.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {:?}", p.shape())));
    }
    let asym = (p - p.transpose()).abs().max();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric {
            name: "P",
            asymmetry: asym,
        });
    }
    Ok(p.clone().cholesky().is_some())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResidual {
    /// `AᵀP + PA`
    pub s: DMatrix<f64>,
    /// Ascending eigenvalues of `S`.
    pub eigenvalues: Vec<f64>,
}

pub fn lyapunov_residual(a: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<LyapunovResidual> {
    if a.shape() != p.shape() || !a.is_square() {
        return Err(Error::Dimension(format!("A {:?} vs P {:?}", a.shape(), p.shape())));
    }
    let s = a.transpose() * p + p * a;
    let s = (&s + s.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = s.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(LyapunovResidual { s, eigenvalues })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixCheck {
    pub name: String,
    pub p: DMatrix<f64>,
    pub positive_definite: bool,
    pub leading_minors: Vec<f64>,
    pub lyapunov: LyapunovResidual,
}

/// Positive-definiteness of `P1..P4` plus Lyapunov residual spectra against
/// the fixed closed-loop matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub a: DMatrix<f64>,
    pub a_eigenvalues: Vec<[f64; 2]>,
    pub matrices: Vec<MatrixCheck>,
    pub all_positive_definite: bool,
    /// Given constants with no generating relation; carried as metadata.
    pub phi_k: f64,
    pub gamma: f64,
}

fn leading_minors(p: &DMatrix<f64>) -> Vec<f64> {
    (1..=p.nrows())
        .map(|k| p.view((0, 0), (k, k)).into_owned().determinant())
        .collect()
}

pub fn stability_report() -> Result<StabilityReport> {
    let a = mat2(&GIVEN_A);
    let matrices = PAPER_P
        .iter()
        .enumerate()
        .map(|(idx, raw)| {
            let p = mat2(raw);
            Ok(MatrixCheck {
                name: format!("P{}", idx + 1),
                positive_definite: is_positive_definite(&p)?,
                leading_minors: leading_minors(&p),
                lyapunov: lyapunov_residual(&a, &p)?,
                p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        a_eigenvalues: eigenvalues(&a),
        all_positive_definite: matrices.iter().all(|m| m.positive_definite),
        matrices,
        a,
        phi_k: PAPER_PHI,
        gamma: PAPER_GAMMA,
    })
}
