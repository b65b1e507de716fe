//! Triangle cloud, normal cloud and LQ on the pendulum with and without
//! friction. Writes the table, trajectories and overlays to the given
//! directory (default `out/compare`).

use std::path::PathBuf;

use cloudreg::experiment::{cmd_compare, ExperimentConfig};

fn main() -> cloudreg::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/compare"));
    let cfg = ExperimentConfig::preset("paper-pendulum")?;
    let table = cmd_compare(&cfg, cfg.seed, &out)?;
    println!("{:<9} {:<13} {:>8} {:>10} {:>10} {:>10}", "ctrl", "condition", "t_s", "chatter", "max", "final");
    for row in &table.rows {
        match (&row.metrics, row.final_abs_deg) {
            (Some(m), Some(f)) => println!(
                "{:<9} {:<13} {:>8.3} {:>10.4} {:>10.3} {:>10.4}",
                row.controller, row.condition, m.settling_time, m.chatter_width, m.max_amplitude, f
            ),
            _ => println!("{:<9} {:<13} {}", row.controller, row.condition, row.error.as_deref().unwrap_or("")),
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
