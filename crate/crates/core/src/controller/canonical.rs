//! Two-input cloud controller on equal symmetric partitions.

use serde::{Deserialize, Serialize};

use super::partition::{ConsequentFamily, Partition, RuleBase};
use crate::cloud::{gaussian_membership, sample_entropy};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Smallest accepted sampled flank denominator, relative to the spacing.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Stochastic,
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    #[default]
    Triangle,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputMode {
    Incremental,
    #[default]
    Positional,
}

/// How the error change fed to the controller is formed from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// `e(k) - e(k-1)`
    #[default]
    Difference,
    /// `(e(k) - e(k-1)) / T` with `T` the controller period.
    Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub ke: f64,
    pub kde: f64,
    pub ku: f64,
    pub e_partition: Partition,
    pub de_partition: Partition,
    pub consequents: ConsequentFamily,
    pub rules: RuleBase,
    pub drops: usize,
    pub mode: Mode,
    pub shape: Shape,
    pub output: OutputMode,
    pub delta: DeltaMode,
}

impl ControllerConfig {
    /// Canonical controller: both inputs on `[-L, L]` with `2J + 1` clouds,
    /// singleton outputs on `[-H, H]`, rules `U_{-(i+j)}`.
    pub fn canonical(j: i32, l: f64, h: f64, he: f64, ke: f64, kde: f64, ku: f64) -> Result<Self> {
        let p = Partition::new(-l, l, j, he)?;
        let cfg = Self {
            ke,
            kde,
            ku,
            e_partition: p,
            de_partition: p,
            consequents: ConsequentFamily::new(h, j)?,
            rules: RuleBase::canonical(j),
            drops: 3000,
            mode: Mode::Stochastic,
            shape: Shape::Triangle,
            output: OutputMode::Positional,
            delta: DeltaMode::Difference,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Deterministic canonical controller with unit universes.
    pub fn deterministic(j: i32, ku: f64) -> Result<Self> {
        let mut cfg = Self::canonical(j, 1.0, 1.0, 0.0, 1.0, 1.0, ku)?;
        cfg.mode = Mode::Deterministic;
        Ok(cfg)
    }

    /// Scaling gains used for the inverted pendulum study
    /// (`k_e = 0.1908`, `k_v = 0.0367`, `k_u = 1.2`).
    pub const PENDULUM_GAINS: (f64, f64, f64) = (0.1908, 0.0367, 1.2);

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("ke", self.ke), ("kde", self.kde), ("ku", self.ku)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        self.e_partition.validate()?;
        self.de_partition.validate()?;
        if self.drops == 0 {
            return Err(Error::invalid("drops", "must be >= 1"));
        }
        if self.e_partition.j != self.de_partition.j
            || self.e_partition.j != self.consequents.j
            || self.e_partition.j != self.rules.j()
        {
            return Err(Error::invalid(
                "J",
                "partitions, consequents and rules must share J",
            ));
        }
        if self.mode == Mode::Stochastic && !(1000..=3000).contains(&self.drops) {
            log::warn!("drop count {} outside the recommended 1000..=3000", self.drops);
        }
        Ok(())
    }

    pub fn j(&self) -> i32 {
        self.e_partition.j
    }

    /// `M = 2J + 1`.
    pub fn cloud_count(&self) -> i32 {
        2 * self.j() + 1
    }

    /// Effective output gain `K_u * H` in the canonical formulas.
    pub fn output_gain(&self) -> f64 {
        self.ku * self.consequents.h
    }

    pub fn is_deterministic(&self) -> bool {
        self.mode == Mode::Deterministic
    }
}

/// Scales the raw inputs and saturates them into each universe.
pub fn scale_and_clamp(e: f64, de: f64, cfg: &ControllerConfig) -> (f64, f64) {
    (
        cfg.e_partition.clamp(cfg.ke * e),
        cfg.de_partition.clamp(cfg.kde * de),
    )
}

/// Samples `N(hi, he) - N(lo, he)`, redrawing when it nearly vanishes.
pub fn sample_denominator(lo: f64, hi: f64, he: f64, rng: &mut RandomSource) -> f64 {
    let floor = DENOMINATOR_FLOOR * (hi - lo).abs();
    loop {
        let d = rng.normal(hi, he) - rng.normal(lo, he);
        if d.abs() >= floor {
            return d;
        }
    }
}

/// Corner weights `(w1, w2, w3, w4)` of the four rules fired in cell `(i, j)`.
///
/// `μ_i = (λ_{i+1} - x) / D` and `μ_{i+1} = 1 - μ_i` for each input. The
/// deterministic mode uses the exact spacing for `D`; the stochastic mode
/// redraws both denominators for each of `drops` samples, clamps the
/// memberships into `[0, 1]` and returns the per-rule mean.
#[allow(clippy::too_many_arguments)]
pub fn fire_corner_weights(
    e: f64,
    de: f64,
    i: i32,
    j: i32,
    pe: &Partition,
    pde: &Partition,
    mode: Mode,
    drops: usize,
    rng: &mut RandomSource,
) -> [f64; 4] {
    let (ei0, ei1) = (pe.center(i), pe.center(i + 1));
    let (dj0, dj1) = (pde.center(j), pde.center(j + 1));
    match mode {
        Mode::Deterministic => corner_products((ei1 - e) / (ei1 - ei0), (dj1 - de) / (dj1 - dj0)),
        Mode::Stochastic => {
            let drops = drops.max(1);
            let mut acc = [0.0; 4];
            for _ in 0..drops {
                let den_e = sample_denominator(ei0, ei1, pe.he, rng);
                let den_de = sample_denominator(dj0, dj1, pde.he, rng);
                let mu_i = ((ei1 - e) / den_e).clamp(0.0, 1.0);
                let mu_j = ((dj1 - de) / den_de).clamp(0.0, 1.0);
                let w = corner_products(mu_i, mu_j);
                for (a, w) in acc.iter_mut().zip(w) {
                    *a += w;
                }
            }
            acc.map(|a| a / drops as f64)
        }
    }
}

fn corner_products(mu_i: f64, mu_j: f64) -> [f64; 4] {
    let (mu_i1, mu_j1) = (1.0 - mu_i, 1.0 - mu_j);
    [mu_i * mu_j, mu_i * mu_j1, mu_i1 * mu_j, mu_i1 * mu_j1]
}

/// Singleton consequents of the canonical rules fired in cell `(i, j)`,
/// scaled by `H`.
pub fn consequent_singletons(i: i32, j: i32, big_j: i32, h: f64) -> [f64; 4] {
    let s = |k: i32| -(k as f64) * h / (2 * big_j) as f64;
    [s(i + j), s(i + j + 1), s(i + j + 1), s(i + j + 2)]
}

/// Center-of-gravity aggregation `Σ w u / Σ w`.
pub fn aggregate(w: &[f64], u: &[f64]) -> Option<f64> {
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        Some(w.iter().zip(u).map(|(w, u)| w * u).sum::<f64>() / total)
    } else {
        None
    }
}

/// Previous error and output, both zero initially.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ControllerState {
    pub previous_error: f64,
    pub previous_control: f64,
}

/// One inference step, recorded for `--trace`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub e_star: f64,
    pub de_star: f64,
    pub i: i32,
    pub j: i32,
    pub w: [f64; 4],
    pub u_star: f64,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "e_star,de_star,i,j,w1,w2,w3,w4,u_star";

    pub fn to_csv(&self) -> String {
        format!(
            "{:?},{:?},{},{},{:?},{:?},{:?},{:?},{:?}",
            self.e_star, self.de_star, self.i, self.j, self.w[0], self.w[1], self.w[2], self.w[3], self.u_star
        )
    }
}

/// Normalized controller output `u*` for scaled inputs, with trace data.
pub fn infer(e_star: f64, de_star: f64, cfg: &ControllerConfig, rng: &mut RandomSource) -> Result<TraceRow> {
    let i = cfg.e_partition.locate_cell(e_star);
    let j = cfg.de_partition.locate_cell(de_star);
    match cfg.shape {
        Shape::Triangle => {
            let w = fire_corner_weights(
                e_star,
                de_star,
                i,
                j,
                &cfg.e_partition,
                &cfg.de_partition,
                cfg.mode,
                cfg.drops,
                rng,
            );
            let corners = [(i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1)];
            let u = corners.map(|(a, b)| cfg.consequents.value(cfg.rules.consequent(a, b)));
            let u_star = aggregate(&w, &u).ok_or(Error::DegenerateCell { i, j })?;
            Ok(TraceRow {
                e_star,
                de_star,
                i,
                j,
                w,
                u_star,
            })
        }
        Shape::Normal => infer_normal(e_star, de_star, i, j, cfg, rng),
    }
}

/// Gaussian-cloud variant: every rule fires; per drop one entropy is drawn
/// for each input variable.
fn infer_normal(
    e_star: f64,
    de_star: f64,
    i: i32,
    j: i32,
    cfg: &ControllerConfig,
    rng: &mut RandomSource,
) -> Result<TraceRow> {
    let (pe, pde) = (&cfg.e_partition, &cfg.de_partition);
    let big_j = cfg.j();
    let m = (2 * big_j + 1) as usize;
    let (en_e, en_de) = (pe.normal_entropy(), pde.normal_entropy());
    let drops = match cfg.mode {
        Mode::Deterministic => 1,
        Mode::Stochastic => cfg.drops.max(1),
    };
    let mut w = vec![0.0; m * m];
    let mut mu_e = vec![0.0; m];
    let mut mu_de = vec![0.0; m];
    for _ in 0..drops {
        let (s_e, s_de) = match cfg.mode {
            Mode::Deterministic => (en_e, en_de),
            Mode::Stochastic => (sample_entropy(en_e, pe.he, rng), sample_entropy(en_de, pde.he, rng)),
        };
        for (a, idx) in (-big_j..=big_j).enumerate() {
            mu_e[a] = gaussian_membership(pe.center(idx), s_e, e_star);
            mu_de[a] = gaussian_membership(pde.center(idx), s_de, de_star);
        }
        for a in 0..m {
            for b in 0..m {
                w[a * m + b] += mu_e[a] * mu_de[b];
            }
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, ia) in (-big_j..=big_j).enumerate() {
        for (b, jb) in (-big_j..=big_j).enumerate() {
            let wab = w[a * m + b] / drops as f64;
            num += wab * cfg.consequents.value(cfg.rules.consequent(ia, jb));
            den += wab;
        }
    }
    if den <= 0.0 {
        return Err(Error::DegenerateCell { i, j });
    }
    let corner = |a: i32, b: i32| w[((a + big_j) as usize) * m + (b + big_j) as usize] / drops as f64 / den;
    Ok(TraceRow {
        e_star,
        de_star,
        i,
        j,
        w: [corner(i, j), corner(i, j + 1), corner(i + 1, j), corner(i + 1, j + 1)],
        u_star: num / den,
    })
}

/// Scales, infers and applies `K_u`; incremental mode accumulates into the
/// state's previous control.
pub fn controller_step(
    e: f64,
    de: f64,
    cfg: &ControllerConfig,
    state: &mut ControllerState,
    rng: &mut RandomSource,
) -> Result<f64> {
    controller_step_traced(e, de, cfg, state, rng).map(|(u, _)| u)
}

pub fn controller_step_traced(
    e: f64,
    de: f64,
    cfg: &ControllerConfig,
    state: &mut ControllerState,
    rng: &mut RandomSource,
) -> Result<(f64, TraceRow)> {
    let (e_star, de_star) = scale_and_clamp(e, de, cfg);
    let row = infer(e_star, de_star, cfg, rng)?;
    let du = cfg.ku * row.u_star;
    let u = match cfg.output {
        OutputMode::Positional => du,
        OutputMode::Incremental => state.previous_control + du,
    };
    state.previous_error = e;
    state.previous_control = u;
    Ok((u, row))
}

/// A controller instance bound to one loop: config, state, random stream
/// and an optional trace buffer.
#[derive(Debug, Clone)]
pub struct CloudController {
    pub cfg: ControllerConfig,
    pub state: ControllerState,
    rng: RandomSource,
    trace: Option<Vec<TraceRow>>,
}

impl CloudController {
    pub fn new(cfg: ControllerConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: ControllerState::default(),
            rng: RandomSource::new(seed),
            trace: None,
        })
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> Option<&[TraceRow]> {
        self.trace.as_deref()
    }

    /// Forms `Δe` from the stored previous error and runs one step.
    pub fn update(&mut self, e: f64, period: f64) -> Result<f64> {
        let diff = e - self.state.previous_error;
        let de = match self.cfg.delta {
            DeltaMode::Difference => diff,
            DeltaMode::Rate => diff / period,
        };
        self.step(e, de)
    }

    pub fn step(&mut self, e: f64, de: f64) -> Result<f64> {
        let (u, row) = controller_step_traced(e, de, &self.cfg, &mut self.state, &mut self.rng)?;
        if let Some(t) = self.trace.as_mut() {
            t.push(row);
        }
        Ok(u)
    }
}
