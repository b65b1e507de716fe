//! LQ baseline design, positive-definiteness and Lyapunov diagnostics, and
//! response metrics.

mod lq;
mod metrics;
mod stability;

pub use lq::{eigenvalues, is_hurwitz, lq_design, riccati_residual, solve_lyapunov, LqDesign, NEWTON_TOLERANCE};
pub use metrics::{compute_metrics, compute_series_metrics, ResponseMetrics, CHATTER_WINDOW, DEFAULT_BAND, STEADY_WINDOW};
pub use stability::{
    is_positive_definite, lyapunov_residual, mat2, stability_report, LyapunovResidual, MatrixCheck, StabilityReport,
    PAPER_GAMMA, PAPER_P, PAPER_PHI,
};

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::plant::{linearize_pendulum, PendulumParams};

/// State weight used for the pendulum LQ baseline.
pub const PENDULUM_Q: [f64; 2] = [20.0, 0.1];
/// Input weight used for the pendulum LQ baseline.
pub const PENDULUM_R: f64 = 0.1;

/// LQ design on the linearized pendulum with `Q = diag(20, 0.1)`, `R = 0.1`.
pub fn pendulum_lq(params: &PendulumParams) -> Result<LqDesign> {
    let (a, b) = linearize_pendulum(params);
    let b = DMatrix::from_column_slice(2, 1, b.as_slice());
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(&PENDULUM_Q));
    let r = DMatrix::from_element(1, 1, PENDULUM_R);
    lq_design(&a, &b, &q, &r)
}
