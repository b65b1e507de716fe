use nalgebra::{DMatrix, DVector};

use super::Plant;
use crate::error::{Error, Result};

/// State-space plant `ẋ = A x + B u(t - τ)`, `y = C x + D u(t - τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
    /// Input dead time in seconds.
    pub delay: f64,
}

impl LtiPlant {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64, delay: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{}, B has {} rows, C has {} columns",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if !(delay >= 0.0 && delay.is_finite()) {
            return Err(Error::invalid("delay", format!("must be >= 0, got {delay}")));
        }
        Ok(Self { a, b, c, d, delay })
    }

    /// Buffer length representing the dead time at step `dt`.
    pub fn delay_steps(&self, dt: f64) -> usize {
        (self.delay / dt).round() as usize
    }
}

fn strip_leading_zeros(p: &[f64]) -> &[f64] {
    let start = p.iter().position(|&c| c != 0.0).unwrap_or(p.len());
    &p[start..]
}

/// Controllable canonical realization of `num(s) / den(s) · e^{-delay s}`.
/// Coefficients are listed from the highest power down.
pub fn make_lti_from_tf(numerator: &[f64], denominator: &[f64], delay: f64) -> Result<LtiPlant> {
    let den = strip_leading_zeros(denominator);
    let num = strip_leading_zeros(numerator);
    if den.is_empty() {
        return Err(Error::invalid("denominator", "leading coefficient must be non-zero"));
    }
    let n = den.len() - 1;
    let num_deg = num.len().saturating_sub(1);
    if num_deg > n {
        return Err(Error::ImproperTransferFunction { num: num_deg, den: n });
    }
    if n == 0 {
        return Err(Error::invalid("denominator", "static gain has no state-space dynamics"));
    }
    let lead = den[0];
    // monic a_i, ascending powers: den = s^n + a[n-1] s^{n-1} + ... + a[0]
    let a_coef: Vec<f64> = (0..n).map(|k| den[n - k] / lead).collect();
    // numerator padded to n + 1 ascending coefficients
    let b_coef: Vec<f64> = (0..=n)
        .map(|k| if k < num.len() { num[num.len() - 1 - k] / lead } else { 0.0 })
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for r in 0..n - 1 {
        a[(r, r + 1)] = 1.0;
    }
    for k in 0..n {
        a[(n - 1, k)] = -a_coef[k];
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let d = b_coef[n];
    let c = DVector::from_iterator(n, (0..n).map(|k| b_coef[k] - a_coef[k] * d));
    LtiPlant::new(a, b, c, d, delay)
}

impl Plant for LtiPlant {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn derivative(&self, x: &[f64], u: f64) -> Result<Vec<f64>> {
        let x = DVector::from_column_slice(x);
        Ok((&self.a * x + &self.b * u).as_slice().to_vec())
    }

    fn output(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>()
    }

    fn feedthrough(&self) -> f64 {
        self.d
    }

    fn delay(&self) -> f64 {
        self.delay
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_order_example() {
        let p = make_lti_from_tf(&[167.8], &[1.0, 142.0, 146.0, 0.0], 0.25).unwrap();
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -146.0, -142.0]);
        assert_eq!(p.a, a);
        assert_eq!(p.b.as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(p.c.as_slice(), &[167.8, 0.0, 0.0]);
        assert_eq!(p.d, 0.0);
        assert_eq!(p.delay_steps(0.005), 50);
    }

    #[test]
    fn biproper_feedthrough() {
        // (2s + 3) / (s + 1) = 2 + 1/(s + 1)
        let p = make_lti_from_tf(&[2.0, 3.0], &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(p.d, 2.0);
        assert_eq!(p.c.as_slice(), &[1.0]);
        assert_eq!(p.a[(0, 0)], -1.0);
    }

    #[test]
    fn non_monic_denominator_is_normalized() {
        let p = make_lti_from_tf(&[4.0], &[2.0, 4.0], 0.0).unwrap();
        assert_eq!(p.a[(0, 0)], -2.0);
        assert_eq!(p.c[0], 2.0);
    }

    #[test]
    fn improper_rejected() {
        assert!(matches!(
            make_lti_from_tf(&[1.0, 0.0, 0.0], &[1.0, 1.0], 0.0),
            Err(Error::ImproperTransferFunction { num: 2, den: 1 })
        ));
        assert!(make_lti_from_tf(&[1.0], &[0.0, 0.0], 0.0).is_err());
    }
}
