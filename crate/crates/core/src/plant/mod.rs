//! Plant models and fixed-step closed-loop simulation.

mod lti;
mod ode;
mod pendulum;
mod sim;

use nalgebra::{DMatrix, DVector};

pub use lti::{make_lti_from_tf, LtiPlant};
pub use ode::rk4_step;
pub use pendulum::{linearize_pendulum, pendulum_deriv, Friction, Pendulum, PendulumParams};
pub use sim::{
    simulate_closed_loop, Control, Observation, Setpoint, SimConfig, StateFeedback, Trajectory, ZeroController,
    DIVERGENCE_LIMIT,
};

use crate::error::Result;

/// Continuous-time plant `ẋ = f(x, u)`, `y = h(x) + D u`.
pub trait Plant {
    fn state_dim(&self) -> usize;
    fn derivative(&self, x: &[f64], u: f64) -> Result<Vec<f64>>;
    fn output(&self, x: &[f64]) -> f64;

    /// Column names for the state in trajectory CSV; empty hides the state.
    fn state_labels(&self) -> Vec<String> {
        Vec::new()
    }

    fn feedthrough(&self) -> f64 {
        0.0
    }

    /// Input dead time in seconds.
    fn delay(&self) -> f64 {
        0.0
    }
}

/// Fixed closed-loop linear model used by the pendulum stability checks.
pub const GIVEN_A: [[f64; 2]; 2] = [[0.0, 1.0], [58.1, -0.193]];
pub const GIVEN_B_DISTURBANCE: [f64; 2] = [0.0, -0.255];

/// `ẋ = A x + B_ω ω(t)`, `y = x1`, with the fixed matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GivenLinearSystem {
    inner: LtiPlant,
}

impl GivenLinearSystem {
    pub fn new() -> Self {
        let a = DMatrix::from_row_slice(2, 2, &[GIVEN_A[0][0], GIVEN_A[0][1], GIVEN_A[1][0], GIVEN_A[1][1]]);
        let b = DVector::from_column_slice(&GIVEN_B_DISTURBANCE);
        let c = DVector::from_column_slice(&[1.0, 0.0]);
        Self {
            inner: LtiPlant::new(a, b, c, 0.0, 0.0).expect("dimensions are fixed"),
        }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.inner.a
    }
}

impl Default for GivenLinearSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl Plant for GivenLinearSystem {
    fn state_dim(&self) -> usize {
        2
    }

    fn derivative(&self, x: &[f64], u: f64) -> Result<Vec<f64>> {
        self.inner.derivative(x, u)
    }

    fn output(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn state_labels(&self) -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }
}

/// Simulates the fixed linear model under the disturbance `ω(t)`; the
/// trajectory's `u` column records `ω`.
pub fn given_linear_system<W>(mut disturbance: W, x0: &[f64], cfg: &SimConfig) -> Result<Trajectory>
where
    W: FnMut(f64) -> f64,
{
    let sys = GivenLinearSystem::new();
    let cfg = SimConfig {
        x0: x0.to_vec(),
        period: 1,
        ..cfg.clone()
    };
    let mut open_loop = |obs: &Observation| Ok(disturbance(obs.t));
    simulate_closed_loop(&sys, &mut open_loop, &cfg)
}
