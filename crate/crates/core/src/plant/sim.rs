use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ode::rk4_step;
use super::Plant;
use crate::controller::{CloudController, GeneralController};
use crate::error::{Error, Result};

/// States beyond this magnitude abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Setpoint {
    Constant { value: f64 },
    Step { time: f64, before: f64, after: f64 },
}

impl Setpoint {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Setpoint::Constant { value } => value,
            Setpoint::Step { time, before, after } => {
                if t < time {
                    before
                } else {
                    after
                }
            }
        }
    }
}

impl Default for Setpoint {
    fn default() -> Self {
        Setpoint::Constant { value: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Controller period in integration steps.
    pub period: usize,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub setpoint: Setpoint,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", format!("must be > 0, got {}", self.t_final)));
        }
        if self.period == 0 {
            return Err(Error::invalid("period", "must be >= 1"));
        }
        if !self.steps().is_multiple_of(self.period) {
            return Err(Error::invalid(
                "period",
                format!("{} steps is not a multiple of the controller period {}", self.steps(), self.period),
            ));
        }
        Ok(())
    }

    /// Number of integration steps in the horizon.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn controller_period(&self) -> f64 {
        self.period as f64 * self.dt
    }
}

/// What a controller sees at a sampling instant.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub t: f64,
    pub r: f64,
    pub y: f64,
    pub x: &'a [f64],
    /// Controller period in seconds.
    pub period: f64,
}

/// A sampled-data control law.
pub trait Control {
    fn control(&mut self, obs: &Observation) -> Result<f64>;
}

impl<F> Control for F
where
    F: FnMut(&Observation) -> Result<f64>,
{
    fn control(&mut self, obs: &Observation) -> Result<f64> {
        self(obs)
    }
}

impl Control for CloudController {
    fn control(&mut self, obs: &Observation) -> Result<f64> {
        self.update(obs.r - obs.y, obs.period)
    }
}

impl Control for GeneralController {
    fn control(&mut self, obs: &Observation) -> Result<f64> {
        self.update(obs.r - obs.y, obs.period)
    }
}

/// Always outputs zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroController;

impl Control for ZeroController {
    fn control(&mut self, _obs: &Observation) -> Result<f64> {
        Ok(0.0)
    }
}

/// Full-state feedback `u = -K x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFeedback {
    pub k: Vec<f64>,
}

impl Control for StateFeedback {
    fn control(&mut self, obs: &Observation) -> Result<f64> {
        if obs.x.len() != self.k.len() {
            return Err(Error::Dimension(format!(
                "gain has {} entries for a {}-state plant",
                self.k.len(),
                obs.x.len()
            )));
        }
        Ok(-self.k.iter().zip(obs.x).map(|(k, x)| k * x).sum::<f64>())
    }
}

/// Uniformly sampled closed-loop record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub state_labels: Vec<String>,
    pub t: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub delay_steps: usize,
    /// `delay_steps * dt - delay`.
    pub delay_rounding_error: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0) - self.t.first().copied().unwrap_or(0.0)
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend(self.state_labels.iter().cloned());
        cols.extend(["y", "u", "r"].map(String::from));
        cols.join(",")
    }

    /// `t,<state labels>,y,u,r` at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for k in 0..self.len() {
            let mut row = format!("{:?}", self.t[k]);
            for (idx, _) in self.state_labels.iter().enumerate() {
                row.push_str(&format!(",{:?}", self.states[k][idx]));
            }
            row.push_str(&format!(",{:?},{:?},{:?}", self.y[k], self.u[k], self.r[k]));
            writeln!(out, "{row}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Column by name (`t`, a state label, `y`, `u` or `r`).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        match name {
            "t" => Some(self.t.clone()),
            "y" => Some(self.y.clone()),
            "u" => Some(self.u.clone()),
            "r" => Some(self.r.clone()),
            _ => {
                let idx = self.state_labels.iter().position(|l| l == name)?;
                Some(self.states.iter().map(|s| s[idx]).collect())
            }
        }
    }
}

/// Runs the loop `r -> e -> controller -> u -> plant -> y` with a
/// zero-order hold between controller samples and an input-side dead-time
/// buffer.
pub fn simulate_closed_loop<P, C>(plant: &P, controller: &mut C, cfg: &SimConfig) -> Result<Trajectory>
where
    P: Plant + ?Sized,
    C: Control + ?Sized,
{
    cfg.validate()?;
    if cfg.x0.len() != plant.state_dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries, plant has {} states",
            cfg.x0.len(),
            plant.state_dim()
        )));
    }
    let n = cfg.steps();
    let delay_steps = (plant.delay() / cfg.dt).round() as usize;
    let mut buffer: VecDeque<f64> = std::iter::repeat_n(0.0, delay_steps).collect();

    let mut traj = Trajectory {
        dt: cfg.dt,
        state_labels: plant.state_labels(),
        t: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        y: Vec::with_capacity(n + 1),
        u: Vec::with_capacity(n + 1),
        r: Vec::with_capacity(n + 1),
        delay_steps,
        delay_rounding_error: delay_steps as f64 * cfg.dt - plant.delay(),
    };

    let mut x = cfg.x0.clone();
    let mut u = 0.0;
    let mut applied = if delay_steps == 0 { 0.0 } else { buffer[0] };
    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let r = cfg.setpoint.at(t);
        let y_meas = plant.output(&x) + plant.feedthrough() * applied;
        if k % cfg.period == 0 {
            let obs = Observation {
                t,
                r,
                y: y_meas,
                x: &x,
                period: cfg.controller_period(),
            };
            u = controller.control(&obs)?;
        }
        traj.t.push(t);
        traj.states.push(x.clone());
        traj.y.push(y_meas);
        traj.u.push(u);
        traj.r.push(r);
        if k == n {
            break;
        }
        applied = if delay_steps == 0 {
            u
        } else {
            buffer.push_back(u);
            buffer.pop_front().expect("buffer holds delay_steps entries")
        };
        x = rk4_step(|s, v| plant.derivative(s, v), &x, applied, cfg.dt).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step: k },
            other => other,
        })?;
        let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm.is_nan() || norm > DIVERGENCE_LIMIT {
            return Err(Error::Diverged {
                step: k + 1,
                t: (k + 1) as f64 * cfg.dt,
                norm,
            });
        }
    }
    Ok(traj)
}
