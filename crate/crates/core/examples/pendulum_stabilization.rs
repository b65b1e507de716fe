//! Triangle cloud controller on the inverted pendulum from 20 degrees,
//! using the bundled `paper-pendulum` preset.

use cloudreg::analysis::compute_metrics;
use cloudreg::experiment::ExperimentConfig;
use cloudreg::plant::simulate_closed_loop;

fn main() -> cloudreg::Result<()> {
    let cfg = ExperimentConfig::preset("paper-pendulum")?;
    let plant = cfg.require_plant()?.build()?;
    let mut controller = cfg.require_controller()?.build(&plant, cfg.seed)?;
    let traj = simulate_closed_loop(&plant, &mut controller, cfg.require_sim()?)?;

    for k in (0..traj.len()).step_by(100) {
        println!("t = {:5.2}  theta = {:+8.4} deg  u = {:+9.3}", traj.t[k], traj.y[k].to_degrees(), traj.u[k]);
    }
    let m = compute_metrics(&traj, cfg.metrics.band)?.in_degrees();
    println!("\n{m:#?}");
    Ok(())
}
