use serde::{Deserialize, Serialize};

use crate::cloud::{NormalCloud, TriangleCloud};
use crate::error::{Error, Result};

/// Equal symmetric partition of a universe into `M = 2J + 1` triangle clouds.
///
/// Centers are `mid + i * L / J` for `i = -J..=J`, where `mid` and `L` are
/// the midpoint and half-width of `[lo, hi]`. Each cloud's flanks reach the
/// neighbouring centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub lo: f64,
    pub hi: f64,
    pub j: i32,
    pub he: f64,
}

impl Partition {
    pub fn new(lo: f64, hi: f64, j: i32, he: f64) -> Result<Self> {
        let p = Self { lo, hi, j, he };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(
                "universe",
                format!("need lo < hi, got [{}, {}]", self.lo, self.hi),
            ));
        }
        if self.j < 1 {
            return Err(Error::invalid("J", format!("must be >= 1, got {}", self.j)));
        }
        if !(self.he >= 0.0 && self.he.is_finite()) {
            return Err(Error::invalid("he", format!("must be >= 0, got {}", self.he)));
        }
        Ok(())
    }

    /// Number of clouds `M = 2J + 1`.
    pub fn size(&self) -> usize {
        (2 * self.j + 1) as usize
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.hi + self.lo)
    }

    pub fn spacing(&self) -> f64 {
        self.half_width() / self.j as f64
    }

    /// Center `λ_i`; `i` is not range checked.
    pub fn center(&self, i: i32) -> f64 {
        self.mid() + i as f64 * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (-self.j..=self.j).map(|i| self.center(i)).collect()
    }

    pub fn clouds(&self) -> Vec<TriangleCloud> {
        let w = self.spacing();
        (-self.j..=self.j)
            .map(|i| TriangleCloud {
                ex: self.center(i),
                en1: w,
                en2: w,
                he: self.he,
            })
            .collect()
    }

    /// Gaussian clouds on the same centers, crossing at membership 0.5.
    pub fn normal_clouds(&self) -> Vec<NormalCloud> {
        let en = self.normal_entropy();
        (-self.j..=self.j)
            .map(|i| NormalCloud {
                ex: self.center(i),
                en,
                he: self.he,
            })
            .collect()
    }

    /// Gaussian width that puts the crossing of neighbours at 0.5.
    pub fn normal_entropy(&self) -> f64 {
        self.spacing() / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Cell index `i` with `λ_i <= x < λ_{i+1}`, clamped into `[-J, J-1]`
    /// so the right edge maps to the last cell.
    pub fn locate_cell(&self, x: f64) -> i32 {
        let raw = ((x - self.lo) / self.spacing()).floor() as i64 - self.j as i64;
        let mut i = raw.clamp(-(self.j as i64), (self.j - 1) as i64) as i32;
        // floor() on a rounded quotient can land one cell off near a center
        if i > -self.j && x < self.center(i) {
            i -= 1;
        } else if i < self.j - 1 && x >= self.center(i + 1) {
            i += 1;
        }
        i
    }

    /// Membership of cloud `i` at `x` (deterministic triangle).
    pub fn membership(&self, i: i32, x: f64) -> f64 {
        let w = self.spacing();
        crate::cloud::triangle_membership(self.center(i), w, w, x)
    }
}

/// Builds a validated partition.
pub fn build_partition(lo: f64, hi: f64, j: i32, he: f64) -> Result<Partition> {
    Partition::new(lo, hi, j, he)
}

/// Singleton output family `U_k = k H / (2J)`, `k = -2J..=2J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsequentFamily {
    pub h: f64,
    pub j: i32,
}

impl ConsequentFamily {
    pub fn new(h: f64, j: i32) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("H", format!("must be > 0, got {h}")));
        }
        if j < 1 {
            return Err(Error::invalid("J", format!("must be >= 1, got {j}")));
        }
        Ok(Self { h, j })
    }

    /// Spacing `V = H / 2J`.
    pub fn step(&self) -> f64 {
        self.h / (2 * self.j) as f64
    }

    pub fn value(&self, k: i32) -> f64 {
        k as f64 * self.h / (2 * self.j) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (-2 * self.j..=2 * self.j).map(|k| self.value(k)).collect()
    }
}

/// Rule table `(i, j) -> consequent index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    j: i32,
    table: Vec<i32>,
}

impl RuleBase {
    /// `IF e* is E_i AND Δe* is ΔE_j THEN Δu* is U_{-(i+j)}`.
    pub fn canonical(j: i32) -> Self {
        let table = (-j..=j)
            .flat_map(|a| (-j..=j).map(move |b| -(a + b)))
            .collect();
        Self { j, table }
    }

    /// Custom table, row-major over `i` then `j`, both from `-J` to `J`.
    pub fn from_table(j: i32, table: Vec<i32>) -> Result<Self> {
        let m = (2 * j + 1) as usize;
        if table.len() != m * m {
            return Err(Error::invalid(
                "rules",
                format!("expected {} entries, got {}", m * m, table.len()),
            ));
        }
        if let Some(k) = table.iter().find(|k| k.abs() > 2 * j) {
            return Err(Error::invalid(
                "rules",
                format!("consequent index {k} outside [-{0}, {0}]", 2 * j),
            ));
        }
        Ok(Self { j, table })
    }

    pub fn j(&self) -> i32 {
        self.j
    }

    pub fn consequent(&self, i: i32, j: i32) -> i32 {
        let m = 2 * self.j + 1;
        self.table[((i + self.j) * m + (j + self.j)) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let p = build_partition(-1.0, 1.0, 2, 0.0).unwrap();
        assert_eq!(p.centers(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(p.membership(0, 0.25), 0.5);

        let p = build_partition(-1.0, 1.0, 1, 0.0).unwrap();
        assert_eq!(p.centers(), vec![-1.0, 0.0, 1.0]);
        assert!(p.clouds().iter().all(|c| c.en1 == 1.0 && c.en2 == 1.0));
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert!(build_partition(1.0, 1.0, 2, 0.0).is_err());
        assert!(build_partition(2.0, 1.0, 2, 0.0).is_err());
        assert!(build_partition(-1.0, 1.0, 0, 0.0).is_err());
        assert!(build_partition(-1.0, 1.0, 1, -1.0).is_err());
    }

    #[test]
    fn adjacent_memberships_sum_to_one() {
        let p = build_partition(-1.0, 1.0, 3, 0.0).unwrap();
        for i in -3..3 {
            for s in 0..=50 {
                let x = p.center(i) + p.spacing() * s as f64 / 50.0;
                let sum = p.membership(i, x) + p.membership(i + 1, x);
                assert!((sum - 1.0).abs() <= 1e-15, "i={i} x={x} sum={sum}");
            }
        }
    }

    #[test]
    fn locate_cell_examples() {
        let p = build_partition(-1.0, 1.0, 2, 0.0).unwrap();
        assert_eq!(p.locate_cell(0.3), 0);
        assert_eq!(p.locate_cell(1.0), 1);
        assert_eq!(p.locate_cell(-1.0), -2);
        assert_eq!(p.locate_cell(0.5), 1);
        assert_eq!(p.locate_cell(-0.5), -1);
        assert_eq!(p.locate_cell(-1e-17), -1);
    }

    #[test]
    fn locate_cell_brackets_input() {
        for j in 1..=5 {
            let p = build_partition(-1.0, 1.0, j, 0.0).unwrap();
            for s in 0..=1000 {
                let x = -1.0 + 2.0 * s as f64 / 1000.0;
                let i = p.locate_cell(x);
                assert!((-j..j).contains(&i));
                assert!(p.center(i) <= x);
                assert!(x < p.center(i + 1) || (i == j - 1 && x <= p.center(j)));
            }
        }
    }

    #[test]
    fn consequent_family_is_symmetric() {
        let f = ConsequentFamily::new(1.0, 2).unwrap();
        let v = f.values();
        assert_eq!(v.len(), 9);
        assert_eq!(f.step(), 0.25);
        for (a, b) in v.iter().zip(v.iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn canonical_rules() {
        let r = RuleBase::canonical(2);
        assert_eq!(r.consequent(0, 0), 0);
        assert_eq!(r.consequent(2, 2), -4);
        assert_eq!(r.consequent(-2, 1), 1);
        assert!(RuleBase::from_table(1, vec![0; 8]).is_err());
        assert!(RuleBase::from_table(1, vec![3; 9]).is_err());
    }
}
