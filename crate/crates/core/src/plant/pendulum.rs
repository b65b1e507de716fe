//! Two-state inverted pendulum on a cart (angle and angular rate).
//!
//! ```text
//! ẋ1 = x2
//! ẋ2 = (g sin x1 - a m l x2² sin(2 x1)/2 - a cos(x1) u [- cv x2 - cd sign(x2)])
//!      / (4l/3 - a m l cos² x1)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Plant;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Friction {
    /// Viscous coefficient, N·m·s/rad.
    pub cv: f64,
    /// Dry (Coulomb) coefficient, N·m.
    pub cd: f64,
    pub enabled: bool,
}

impl Default for Friction {
    fn default() -> Self {
        Self {
            cv: 0.05,
            cd: 0.02,
            enabled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    pub g: f64,
    /// Pendulum mass, kg.
    pub m: f64,
    /// Cart mass, kg.
    pub mc: f64,
    /// Half-length, m.
    pub l: f64,
    /// Input coupling factor.
    pub a: f64,
    pub friction: Friction,
}

impl Default for PendulumParams {
    fn default() -> Self {
        let (m, mc) = (2.0, 8.0);
        Self {
            g: 9.8,
            m,
            mc,
            l: 0.5,
            a: 1.0 / (m + mc),
            friction: Friction::default(),
        }
    }
}

impl PendulumParams {
    /// Variant with the coupling written as `a = l / (m + M)`.
    pub fn with_length_coupling() -> Self {
        let p = Self::default();
        Self {
            a: p.l / (p.m + p.mc),
            ..p
        }
    }

    pub fn with_friction(mut self, enabled: bool) -> Self {
        self.friction.enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("m", self.m), ("mc", self.mc), ("l", self.l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !self.a.is_finite() {
            return Err(Error::invalid("a", "must be finite"));
        }
        if !(self.friction.cv >= 0.0 && self.friction.cd >= 0.0) {
            return Err(Error::invalid("friction", "coefficients must be >= 0"));
        }
        // worst case cos² = 1
        if 4.0 * self.l / 3.0 - self.a * self.m * self.l <= 0.0 {
            return Err(Error::invalid("a", "denominator 4l/3 - a m l vanishes"));
        }
        Ok(())
    }
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn pendulum_deriv(x: &[f64], u: f64, p: &PendulumParams) -> Result<[f64; 2]> {
    let (x1, x2) = (x[0], x[1]);
    let c = x1.cos();
    let den = 4.0 * p.l / 3.0 - p.a * p.m * p.l * c * c;
    if den <= 0.0 {
        return Err(Error::SingularDynamics { value: den, angle: x1 });
    }
    let mut num = p.g * x1.sin() - p.a * p.m * p.l * x2 * x2 * (2.0 * x1).sin() / 2.0 - p.a * c * u;
    if p.friction.enabled {
        num -= p.friction.cv * x2 + p.friction.cd * sign0(x2);
    }
    Ok([x2, num / den])
}

/// Small-angle linearization at the upright equilibrium.
pub fn linearize_pendulum(p: &PendulumParams) -> (DMatrix<f64>, DVector<f64>) {
    let d = 4.0 * p.l / 3.0 - p.a * p.m * p.l;
    let damping = if p.friction.enabled { -p.friction.cv / d } else { 0.0 };
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, p.g / d, damping]);
    let b = DVector::from_column_slice(&[0.0, -p.a / d]);
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub params: PendulumParams,
}

impl Pendulum {
    pub fn new(params: PendulumParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl Plant for Pendulum {
    fn state_dim(&self) -> usize {
        2
    }

    fn derivative(&self, x: &[f64], u: f64) -> Result<Vec<f64>> {
        pendulum_deriv(x, u, &self.params).map(|d| d.to_vec())
    }

    fn output(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn state_labels(&self) -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }
}
