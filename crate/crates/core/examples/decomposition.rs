//! Splits the deterministic controller into a multi-value relay plus a
//! local PD term and checks the identity on a grid.

use cloudreg::controller::ControllerConfig;
use cloudreg::decomposition::{relay_table, verify_theorem1};

fn main() -> cloudreg::Result<()> {
    for j in 1..=3 {
        for ku in [0.5, 1.0, 1.2] {
            let cfg = ControllerConfig::deterministic(j, ku)?;
            let s = verify_theorem1(&cfg, 101)?;
            println!(
                "J = {j}, ku = {ku}: max residual {:.2e}, product form {:.3}, certified {}",
                s.max_residual, s.max_product_form_residual, s.certified
            );
        }
    }
    let cfg = ControllerConfig::deterministic(2, 1.2)?;
    let table = relay_table(&cfg)?;
    println!("\nrelay levels for J = 2 ({} cells):", table.cell_count());
    print!("{}", table.to_csv());
    Ok(())
}
