//! Rule-list cloud controller with asymmetric triangle antecedents and
//! triangle consequent clouds.
//!
//! For every rule `j` and each of `k` drops the firing strength `w_j^k` is
//! the product of the antecedent memberships (widths resampled per drop).
//! The consequent drop is
//!
//! ```text
//! u_j^k = Ex_u - (w_j^k - 1) En_u'   if x < Ex_x
//! u_j^k = Ex_u + (w_j^k - 1) En_u'   otherwise
//! ```
//!
//! with `En_u'` drawn from the consequent cloud. The reverse cloud keeps the
//! means `w_j`, `u_j`, and the output is `Σ w_j u_j / Σ w_j`.

use serde::{Deserialize, Serialize};

use super::canonical::{DeltaMode, Mode};
use crate::cloud::{sample_entropy, TriangleCloud};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Rules whose antecedent support, widened by this many hyper-entropies,
/// excludes the input are skipped (their firing probability is below 1e-15).
const SUPPORT_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralRule {
    pub antecedents: Vec<TriangleCloud>,
    pub consequent: TriangleCloud,
}

impl GeneralRule {
    fn may_fire(&self, x: &[f64], mode: Mode) -> bool {
        self.antecedents.iter().zip(x).all(|(c, &xi)| {
            let pad = match mode {
                Mode::Deterministic => 0.0,
                Mode::Stochastic => SUPPORT_SIGMAS * c.he,
            };
            xi > c.ex - c.en1 - pad && xi < c.ex + c.en2 + pad
        })
    }
}

/// One inference with the rule-list controller. `drops` is ignored in
/// deterministic mode (hyper-entropies are treated as zero).
pub fn general_controller_step(
    x: &[f64],
    rules: &[GeneralRule],
    drops: usize,
    mode: Mode,
    rng: &mut RandomSource,
) -> Result<f64> {
    if rules.is_empty() {
        return Err(Error::Empty("general controller needs at least one rule"));
    }
    if let Some(r) = rules.iter().find(|r| r.antecedents.len() != x.len()) {
        return Err(Error::Dimension(format!(
            "rule has {} antecedents for a {}-dimensional input",
            r.antecedents.len(),
            x.len()
        )));
    }
    let k = match mode {
        Mode::Deterministic => 1,
        Mode::Stochastic => drops.max(1),
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for rule in rules.iter().filter(|r| r.may_fire(x, mode)) {
        let ant0 = &rule.antecedents[0];
        let below = x[0] < ant0.ex;
        let c = &rule.consequent;
        let mut w_sum = 0.0;
        let mut shift_sum = 0.0;
        for _ in 0..k {
            let w: f64 = rule
                .antecedents
                .iter()
                .zip(x)
                .map(|(a, &xi)| match mode {
                    Mode::Deterministic => a.membership(xi),
                    Mode::Stochastic => a.sample_membership(xi, rng),
                })
                .product();
            // x below the antecedent center pushes u above Ex_u (right flank)
            let flank = if below { c.en2 } else { c.en1 };
            let en_u = match mode {
                Mode::Deterministic => flank,
                Mode::Stochastic => sample_entropy(flank, c.he, rng),
            };
            let shift = (w - 1.0) * en_u;
            w_sum += w;
            shift_sum += if below { -shift } else { shift };
        }
        let w_j = w_sum / k as f64;
        // mean of u_j^k, accumulated as an offset from Ex_u
        let u_j = c.ex + shift_sum / k as f64;
        num += w_j * u_j;
        den += w_j;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::NoRuleFired { input: x.to_vec() })
    }
}

/// Parameters of a two-input PD-style rule grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleGrid {
    /// Clouds per variable (odd, >= 3).
    pub clouds: usize,
    /// Universe half-width of every variable.
    pub l: f64,
    pub he: f64,
    /// Multipliers on the left/right antecedent widths.
    pub en1_scale: f64,
    pub en2_scale: f64,
}

impl Default for RuleGrid {
    fn default() -> Self {
        Self {
            clouds: 5,
            l: 1.0,
            he: 0.01,
            en1_scale: 1.0,
            en2_scale: 1.0,
        }
    }
}

impl RuleGrid {
    /// Rule `(a, b) -> U_{clamp(-(a + b))}` over `clouds x clouds` antecedent
    /// pairs, with `clouds` consequent clouds on the same universe.
    pub fn rules(&self) -> Result<Vec<GeneralRule>> {
        if self.clouds < 3 || self.clouds.is_multiple_of(2) {
            return Err(Error::invalid("clouds", format!("must be odd and >= 3, got {}", self.clouds)));
        }
        if !(self.en1_scale > 0.0 && self.en2_scale > 0.0) {
            return Err(Error::invalid("en_scale", "width multipliers must be > 0"));
        }
        let n = (self.clouds / 2) as i32;
        let step = self.l / n as f64;
        let cloud = |idx: i32, s1: f64, s2: f64| TriangleCloud::new(idx as f64 * step, step * s1, step * s2, self.he);
        let mut rules = Vec::with_capacity(self.clouds * self.clouds);
        for a in -n..=n {
            for b in -n..=n {
                let out = (-(a + b)).clamp(-n, n);
                rules.push(GeneralRule {
                    antecedents: vec![
                        cloud(a, self.en1_scale, self.en2_scale)?,
                        cloud(b, self.en1_scale, self.en2_scale)?,
                    ],
                    consequent: cloud(out, 1.0, 1.0)?,
                });
            }
        }
        Ok(rules)
    }
}

/// Closed-loop wrapper around [`general_controller_step`] for error / error
/// change inputs.
#[derive(Debug, Clone)]
pub struct GeneralController {
    pub rules: Vec<GeneralRule>,
    pub ke: f64,
    pub kde: f64,
    pub ku: f64,
    pub l: f64,
    pub drops: usize,
    pub mode: Mode,
    pub delta: DeltaMode,
    previous_error: f64,
    previous_output: f64,
    rng: RandomSource,
}

impl GeneralController {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rules: Vec<GeneralRule>,
        ke: f64,
        kde: f64,
        ku: f64,
        l: f64,
        drops: usize,
        mode: Mode,
        delta: DeltaMode,
        seed: u64,
    ) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Empty("general controller needs at least one rule"));
        }
        if drops == 0 {
            return Err(Error::invalid("drops", "must be >= 1"));
        }
        Ok(Self {
            rules,
            ke,
            kde,
            ku,
            l,
            drops,
            mode,
            delta,
            previous_error: 0.0,
            previous_output: 0.0,
            rng: RandomSource::new(seed),
        })
    }

    /// Runs one step; when no rule fires the previous output is held.
    pub fn update(&mut self, e: f64, period: f64) -> Result<f64> {
        let diff = e - self.previous_error;
        let de = match self.delta {
            DeltaMode::Difference => diff,
            DeltaMode::Rate => diff / period,
        };
        self.previous_error = e;
        let x = [
            (self.ke * e).clamp(-self.l, self.l),
            (self.kde * de).clamp(-self.l, self.l),
        ];
        match general_controller_step(&x, &self.rules, self.drops, self.mode, &mut self.rng) {
            Ok(u) => {
                self.previous_output = self.ku * u;
                Ok(self.previous_output)
            }
            Err(Error::NoRuleFired { .. }) => Ok(self.previous_output),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(ant_ex: f64, cons_ex: f64, he: f64) -> GeneralRule {
        GeneralRule {
            antecedents: vec![TriangleCloud::new(ant_ex, 1.0, 1.0, he).unwrap()],
            consequent: TriangleCloud::new(cons_ex, 0.4, 0.4, he).unwrap(),
        }
    }

    #[test]
    fn full_firing_returns_expectation() {
        let mut rng = RandomSource::new(0);
        let u = general_controller_step(&[0.0], &[rule(0.0, 0.7, 0.0)], 100, Mode::Stochastic, &mut rng).unwrap();
        assert_eq!(u, 0.7);
    }

    #[test]
    fn half_firing_above_center() {
        let mut rng = RandomSource::new(0);
        let u = general_controller_step(&[0.5], &[rule(0.0, 0.7, 0.0)], 10, Mode::Deterministic, &mut rng).unwrap();
        assert!((u - (0.7 - 0.5 * 0.4)).abs() < 1e-15);
        let u = general_controller_step(&[-0.5], &[rule(0.0, 0.7, 0.0)], 10, Mode::Deterministic, &mut rng).unwrap();
        assert!((u - (0.7 + 0.5 * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_cancels() {
        let rules = [rule(-0.4, 0.5, 0.0), rule(0.4, -0.5, 0.0)];
        let mut rng = RandomSource::new(0);
        let u = general_controller_step(&[0.0], &rules, 10, Mode::Deterministic, &mut rng).unwrap();
        assert!(u.abs() < 1e-15);
    }

    #[test]
    fn silent_rules_signal_hold() {
        let mut rng = RandomSource::new(0);
        let err = general_controller_step(&[5.0], &[rule(0.0, 0.5, 0.0)], 10, Mode::Deterministic, &mut rng);
        assert!(matches!(err, Err(Error::NoRuleFired { .. })));
        assert!(general_controller_step(&[0.0], &[], 10, Mode::Deterministic, &mut rng).is_err());
        assert!(general_controller_step(&[0.0, 1.0], &[rule(0.0, 0.5, 0.0)], 10, Mode::Deterministic, &mut rng).is_err());
    }

    #[test]
    fn rule_grid_shape() {
        let rules = RuleGrid::default().rules().unwrap();
        assert_eq!(rules.len(), 25);
        assert!(RuleGrid { clouds: 4, ..Default::default() }.rules().is_err());
        let u = general_controller_step(&[0.0, 0.0], &rules, 1, Mode::Deterministic, &mut RandomSource::new(0)).unwrap();
        assert!(u.abs() < 1e-15);
    }

    #[test]
    fn wrapper_holds_output_when_nothing_fires() {
        let mut r = rule(0.0, 0.5, 0.0);
        r.antecedents.push(TriangleCloud::new(0.0, 1.0, 1.0, 0.0).unwrap());
        let mut c = GeneralController::new(vec![r], 1.0, 0.0, 2.0, 10.0, 1, Mode::Deterministic, DeltaMode::Difference, 0).unwrap();
        let u0 = c.update(0.0, 0.01).unwrap();
        assert_eq!(u0, 1.0);
        let u1 = c.update(5.0, 0.01).unwrap();
        assert_eq!(u1, u0);
    }
}
