//! LQ state feedback on the linearized pendulum, then closed on the
//! nonlinear model.

use cloudreg::analysis::{compute_metrics, pendulum_lq};
use cloudreg::plant::{simulate_closed_loop, Pendulum, PendulumParams, SimConfig, StateFeedback};

fn main() -> cloudreg::Result<()> {
    let params = PendulumParams::default();
    let design = pendulum_lq(&params)?;
    println!("P = {:.6}", design.p);
    println!("K = {:.6}", design.k);
    println!("Riccati residual {:.3e} after {} Newton steps", design.residual, design.trace.len());
    println!("closed-loop eigenvalues {:?}", design.closed_loop_eigenvalues);

    let sim = SimConfig {
        dt: 0.005,
        t_final: 5.0,
        period: 2,
        x0: vec![20f64.to_radians(), 0.0],
        setpoint: Default::default(),
    };
    let mut fb = StateFeedback { k: design.k.iter().copied().collect() };
    let traj = simulate_closed_loop(&Pendulum::new(params)?, &mut fb, &sim)?;
    println!("{:#?}", compute_metrics(&traj, 0.02)?.in_degrees());
    Ok(())
}
