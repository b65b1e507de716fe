//! Rule-list cloud controller on a third-order plant with 0.25 s dead time
//! (the `paper-lti` preset). Pass a drop count to trade accuracy for speed.
//!
//! ```bash
//! cargo run --release --example lti_dead_time -- 300
//! ```

use cloudreg::analysis::compute_metrics;
use cloudreg::experiment::{ControllerSpec, ExperimentConfig};
use cloudreg::plant::simulate_closed_loop;

fn main() -> cloudreg::Result<()> {
    let mut cfg = ExperimentConfig::preset("paper-lti")?;
    if let (Some(k), Some(ControllerSpec::General(g))) =
        (std::env::args().nth(1).and_then(|s| s.parse().ok()), cfg.controller.as_mut())
    {
        g.drops = k;
    }
    let plant = cfg.require_plant()?.build()?;
    let mut controller = cfg.require_controller()?.build(&plant, cfg.seed)?;
    let traj = simulate_closed_loop(&plant, &mut controller, cfg.require_sim()?)?;
    println!("delay buffer: {} steps (rounding error {:e} s)", traj.delay_steps, traj.delay_rounding_error);
    for k in (0..traj.len()).step_by(400) {
        println!("t = {:5.1}  y = {:.4}  u = {:+.4}", traj.t[k], traj.y[k], traj.u[k]);
    }
    println!("\n{:#?}", compute_metrics(&traj, 0.02)?);
    Ok(())
}
