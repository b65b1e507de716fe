//! Transient response metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plant::Trajectory;

/// Default settling band (fraction of the setpoint span).
pub const DEFAULT_BAND: f64 = 0.02;
/// Trailing fraction of the horizon used for the chatter width.
pub const CHATTER_WINDOW: f64 = 0.2;
/// Trailing fraction of the horizon used for the steady-state error.
pub const STEADY_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseMetrics {
    pub band: f64,
    /// Seconds from the first sample; the horizon when unsettled.
    pub settling_time: f64,
    pub settled: bool,
    /// Mean `|y - r|` over the final 10 %, in percent of the span.
    pub steady_state_error_pct: f64,
    pub overshoot_pct: f64,
    /// Peak-to-peak `y` over the final 20 %.
    pub chatter_width: f64,
    pub max_amplitude: f64,
    pub span: f64,
}

impl ResponseMetrics {
    /// Converts the amplitude-valued fields from radians to degrees.
    pub fn in_degrees(mut self) -> Self {
        self.chatter_width = self.chatter_width.to_degrees();
        self.max_amplitude = self.max_amplitude.to_degrees();
        self.span = self.span.to_degrees();
        self
    }
}

pub fn compute_metrics(traj: &Trajectory, band: f64) -> Result<ResponseMetrics> {
    compute_series_metrics(&traj.t, &traj.y, &traj.r, band)
}

/// Metrics from raw series sampled on a uniform grid.
///
/// The span is `|r_final - y(0)|`; when that is zero the band and
/// percentages are taken against a unit span.
pub fn compute_series_metrics(t: &[f64], y: &[f64], r: &[f64], band: f64) -> Result<ResponseMetrics> {
    if t.is_empty() {
        return Err(Error::Empty("trajectory has no samples"));
    }
    if y.len() != t.len() || r.len() != t.len() {
        return Err(Error::Dimension("t, y and r must have equal length".into()));
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::invalid("band", format!("must be in (0, 1), got {band}")));
    }
    let n = t.len();
    let t0 = t[0];
    let horizon = t[n - 1] - t0;
    let r_final = r[n - 1];
    let raw_span = (r_final - y[0]).abs();
    let span = if raw_span > 0.0 { raw_span } else { 1.0 };
    let tol = band * span;
    let err: Vec<f64> = y.iter().zip(r).map(|(y, r)| (y - r).abs()).collect();

    let (settling_time, settled) = match err.iter().rposition(|&e| e > tol) {
        None => (0.0, true),
        Some(last) if last == n - 1 => (horizon, false),
        Some(last) => {
            // interpolate the band crossing between `last` and `last + 1`
            let (e0, e1) = (err[last], err[last + 1]);
            let frac = if e0 > e1 { (e0 - tol) / (e0 - e1) } else { 1.0 };
            (t[last] + frac * (t[last + 1] - t[last]) - t0, true)
        }
    };

    let window_start = |frac: f64| {
        let cut = t[n - 1] - frac * horizon;
        t.iter().position(|&ti| ti >= cut).unwrap_or(n - 1)
    };
    let ss = window_start(STEADY_WINDOW);
    let steady = err[ss..].iter().sum::<f64>() / (n - ss) as f64;

    let ch = window_start(CHATTER_WINDOW);
    let (lo, hi) = y[ch..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let direction = (r_final - y[0]).signum();
    let overshoot = if raw_span > 0.0 {
        let peak = y.iter().map(|&v| direction * (v - r_final)).fold(0.0f64, f64::max);
        peak / span * 100.0
    } else {
        0.0
    };

    Ok(ResponseMetrics {
        band,
        settling_time,
        settled,
        steady_state_error_pct: steady / span * 100.0,
        overshoot_pct: overshoot,
        chatter_width: hi - lo,
        max_amplitude: y.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        span: raw_span,
    })
}
