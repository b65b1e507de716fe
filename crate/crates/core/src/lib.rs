//! Cloud-model control toolkit.
//!
//! * [`cloud`]: triangle and normal membership clouds, forward drop
//!   generation and reverse estimation.
//! * [`controller`]: the two-input cloud controller on symmetric partitions,
//!   its Gaussian variant, and the rule-list asymmetric controller.
//! * [`decomposition`]: relay + local PD decomposition of the controller and
//!   its grid certification.
//! * [`plant`]: inverted pendulum, transfer-function plants with dead time,
//!   and the fixed-step closed-loop simulator.
//! * [`analysis`]: LQ baseline, positive-definiteness and Lyapunov
//!   diagnostics, response metrics.
//! * [`experiment`]: config-driven runners behind the `cloudreg` binary.

pub mod analysis;
pub mod cloud;
pub mod controller;
pub mod decomposition;
pub mod error;
pub mod experiment;
pub mod plant;
pub mod rng;

pub use error::{Error, Result};
pub use rng::RandomSource;
