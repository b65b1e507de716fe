//! Positive-definiteness of the four cell matrices and Lyapunov residual
//! spectra against the fixed linear model.

fn main() -> cloudreg::Result<()> {
    let rep = cloudreg::analysis::stability_report()?;
    println!("A eigenvalues {:?}", rep.a_eigenvalues);
    for m in &rep.matrices {
        println!(
            "{}: positive definite {}, minors {:?}, eig(AᵀP + PA) {:?}",
            m.name, m.positive_definite, m.leading_minors, m.lyapunov.eigenvalues
        );
    }
    println!("phi = {}, gamma = {}", rep.phi_k, rep.gamma);
    Ok(())
}
