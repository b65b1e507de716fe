use crate::error::{Error, Result};

/// One classical fourth-order Runge–Kutta step of `ẋ = f(x, u)` with `u`
/// held constant over the step.
pub fn rk4_step<F>(f: F, x: &[f64], u: f64, dt: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    let n = x.len();
    let offset = |k: &[f64], h: f64| -> Vec<f64> { (0..n).map(|i| x[i] + h * k[i]).collect() };
    let k1 = f(x, u)?;
    check(&k1)?;
    let k2 = f(&offset(&k1, 0.5 * dt), u)?;
    check(&k2)?;
    let k3 = f(&offset(&k2, 0.5 * dt), u)?;
    check(&k3)?;
    let k4 = f(&offset(&k3, dt), u)?;
    check(&k4)?;
    Ok((0..n)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn check(k: &[f64]) -> Result<()> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        // the simulator fills in the step index
        Err(Error::NonFinite { step: 0 })
    }
}
