//! Cloud-model primitives: membership clouds, the forward drop generator and
//! the reverse (backward) estimators.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Relative floor applied to sampled entropies.
pub const ENTROPY_FLOOR: f64 = 1e-6;

/// Asymmetric triangle membership cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleCloud {
    pub ex: f64,
    pub en1: f64,
    pub en2: f64,
    pub he: f64,
}

impl TriangleCloud {
    pub fn new(ex: f64, en1: f64, en2: f64, he: f64) -> Result<Self> {
        let c = Self { ex, en1, en2, he };
        c.validate()?;
        if he > en1.min(en2) / 3.0 {
            log::warn!(
                "hyper-entropy {he} exceeds min(en1, en2)/3 = {}; entropy samples will often hit the floor",
                en1.min(en2) / 3.0
            );
        }
        Ok(c)
    }

    pub fn symmetric(ex: f64, en: f64, he: f64) -> Result<Self> {
        Self::new(ex, en, en, he)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ex.is_finite() {
            return Err(Error::invalid("ex", "must be finite"));
        }
        if !(self.en1 > 0.0 && self.en1.is_finite()) {
            return Err(Error::invalid("en1", format!("must be > 0, got {}", self.en1)));
        }
        if !(self.en2 > 0.0 && self.en2.is_finite()) {
            return Err(Error::invalid("en2", format!("must be > 0, got {}", self.en2)));
        }
        if !(self.he >= 0.0 && self.he.is_finite()) {
            return Err(Error::invalid("he", format!("must be >= 0, got {}", self.he)));
        }
        Ok(())
    }

    /// Deterministic membership of the base triangle.
    pub fn membership(&self, x: f64) -> f64 {
        triangle_membership(self.ex, self.en1, self.en2, x)
    }

    /// Lower and upper support bounds.
    pub fn support(&self) -> (f64, f64) {
        (self.ex - self.en1, self.ex + self.en2)
    }

    /// One membership evaluation with both widths resampled.
    pub fn sample_membership(&self, x: f64, rng: &mut RandomSource) -> f64 {
        let en1 = sample_entropy(self.en1, self.he, rng);
        let en2 = sample_entropy(self.en2, self.he, rng);
        triangle_membership(self.ex, en1, en2, x)
    }
}

/// Triangle with support `[ex - en1, ex + en2]` and peak 1 at `ex`.
pub fn triangle_membership(ex: f64, en1: f64, en2: f64, x: f64) -> f64 {
    let d = x - ex;
    if d < 0.0 {
        if d >= -en1 {
            1.0 + d / en1
        } else {
            0.0
        }
    } else if d <= en2 {
        1.0 - d / en2
    } else {
        0.0
    }
}

/// Symmetric Gaussian membership cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalCloud {
    pub ex: f64,
    pub en: f64,
    pub he: f64,
}

impl NormalCloud {
    pub fn new(ex: f64, en: f64, he: f64) -> Result<Self> {
        if !ex.is_finite() {
            return Err(Error::invalid("ex", "must be finite"));
        }
        if !(en > 0.0 && en.is_finite()) {
            return Err(Error::invalid("en", format!("must be > 0, got {en}")));
        }
        if !(he >= 0.0 && he.is_finite()) {
            return Err(Error::invalid("he", format!("must be >= 0, got {he}")));
        }
        Ok(Self { ex, en, he })
    }

    /// Membership with a sampled entropy; deterministic without a source or
    /// with zero hyper-entropy.
    pub fn membership(&self, x: f64, rng: Option<&mut RandomSource>) -> f64 {
        let en = match rng {
            Some(rng) => sample_entropy(self.en, self.he, rng),
            None => self.en,
        };
        gaussian_membership(self.ex, en, x)
    }
}

pub fn gaussian_membership(ex: f64, en: f64, x: f64) -> f64 {
    let d = x - ex;
    (-(d * d) / (2.0 * en * en)).exp()
}

/// Applies the entropy floor `ENTROPY_FLOOR * en` to a raw Gaussian draw.
pub fn floor_entropy(en: f64, raw: f64) -> f64 {
    let eps = ENTROPY_FLOOR * en;
    if raw < eps {
        eps
    } else {
        raw
    }
}

/// Draws `en' ~ N(en, he)`, floored at `1e-6 * en`. Zero hyper-entropy
/// returns `en` without touching the stream.
pub fn sample_entropy(en: f64, he: f64, rng: &mut RandomSource) -> f64 {
    if he == 0.0 {
        return en;
    }
    floor_entropy(en, rng.normal(en, he))
}

/// One forward-generator sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudDrop {
    pub x: f64,
    pub mu: f64,
}

/// Forward generator: `k` drops with `x' ~ N(ex, (en1 + en2)/2)` and the
/// membership evaluated with freshly sampled widths.
pub fn forward_drops(c: &TriangleCloud, k: usize, rng: &mut RandomSource) -> Result<Vec<CloudDrop>> {
    if k == 0 {
        return Err(Error::invalid("k", "drop count must be >= 1"));
    }
    c.validate()?;
    let spread = 0.5 * (c.en1 + c.en2);
    let drops = (0..k)
        .map(|_| {
            let x = rng.normal(c.ex, spread);
            let en1 = sample_entropy(c.en1, c.he, rng);
            let en2 = sample_entropy(c.en2, c.he, rng);
            CloudDrop {
                x,
                mu: triangle_membership(c.ex, en1, en2, x),
            }
        })
        .collect();
    Ok(drops)
}

/// Reverse-cloud expectation: the mean of the drop positions.
pub fn backward_mean(drops: &[CloudDrop]) -> Result<f64> {
    if drops.is_empty() {
        return Err(Error::Empty("backward_mean needs at least one drop"));
    }
    Ok(drops.iter().map(|d| d.x).sum::<f64>() / drops.len() as f64)
}

/// First-order backward estimator for a normal cloud (diagnostic only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalEstimate {
    pub ex: f64,
    pub en: f64,
    pub he: f64,
}

pub fn backward_estimate_normal(drops: &[CloudDrop]) -> Result<NormalEstimate> {
    if drops.len() < 10 {
        return Err(Error::invalid(
            "drops",
            format!("need at least 10 drops, got {}", drops.len()),
        ));
    }
    let n = drops.len() as f64;
    let ex = drops.iter().map(|d| d.x).sum::<f64>() / n;
    let mad = drops.iter().map(|d| (d.x - ex).abs()).sum::<f64>() / n;
    let en = (std::f64::consts::FRAC_PI_2).sqrt() * mad;
    let var = drops.iter().map(|d| (d.x - ex).powi(2)).sum::<f64>() / (n - 1.0);
    let he = (var - en * en).max(0.0).sqrt();
    Ok(NormalEstimate { ex, en, he })
}

/// Writes drops as `x,mu` CSV at full precision.
pub fn write_drops_csv<W: Write>(drops: &[CloudDrop], mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,mu")?;
    for d in drops {
        writeln!(out, "{:?},{:?}", d.x, d.mu)?;
    }
    Ok(())
}
