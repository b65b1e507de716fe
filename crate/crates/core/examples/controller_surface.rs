//! Control surface of the canonical J = 2 controller, deterministic next to
//! one stochastic evaluation per point.

use cloudreg::controller::{infer, ControllerConfig, Mode};
use cloudreg::RandomSource;

fn main() -> cloudreg::Result<()> {
    let mut det = ControllerConfig::canonical(2, 1.0, 1.0, 0.02, 1.0, 1.0, 1.0)?;
    det.mode = Mode::Deterministic;
    let mut sto = det.clone();
    sto.mode = Mode::Stochastic;
    sto.drops = 1000;
    let mut rng = RandomSource::new(3);

    let axis: Vec<f64> = (0..=8).map(|k| -1.0 + 0.25 * k as f64).collect();
    print!("{:>7}", "e \\ de");
    for de in &axis {
        print!("{de:>15.2}");
    }
    println!();
    for &e in &axis {
        print!("{e:>7.2}");
        for &de in &axis {
            let d = infer(e, de, &det, &mut rng)?.u_star;
            let s = infer(e, de, &sto, &mut rng)?.u_star;
            print!("  {d:+.3}/{s:+.3}");
        }
        println!();
    }
    Ok(())
}
