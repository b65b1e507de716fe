//! Forward triangle-cloud drops and the reverse-cloud mean.
//!
//! ```bash
//! cargo run --example gen_cloud_drops -- 0.5 3000
//! ```

use cloudreg::cloud::{backward_estimate_normal, backward_mean, forward_drops, TriangleCloud};
use cloudreg::RandomSource;

fn main() -> cloudreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let ex: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let k: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3000);

    let cloud = TriangleCloud::new(ex, 1.0, 1.5, 0.05)?;
    let mut rng = RandomSource::new(1);
    let drops = forward_drops(&cloud, k, &mut rng)?;

    let sigma = 0.5 * (cloud.en1 + cloud.en2);
    println!("cloud {cloud:?}, {k} drops");
    println!("backward mean {:.5} (3 sigma band +/- {:.5})", backward_mean(&drops)?, 3.0 * sigma / (k as f64).sqrt());
    println!("normal-cloud estimate {:?}", backward_estimate_normal(&drops)?);
    for d in drops.iter().take(5) {
        println!("  x = {:+.4}  mu = {:.4}", d.x, d.mu);
    }
    Ok(())
}
