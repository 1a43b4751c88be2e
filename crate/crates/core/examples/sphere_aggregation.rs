//! Aggregation of the frustrated sphere model and the fitted contraction rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::integrate::IntegratorSettings;
use synclab::linalg::random_skew;
use synclab::reduce_sphere::sphere_aggregation_check;
use synclab::sample::cluster_points;
use synclab::state::{PerOscillator, SphereConfig};

fn main() -> synclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = cluster_points(&mut rng, 6, 3, 0.2)?;
    let omega = PerOscillator::Shared(random_skew(&mut rng, 3, 1.0));
    let w = random_skew(&mut rng, 3, 0.3);
    let cfg = SphereConfig::new(x, omega, 1.0, 1.0, w)?;
    let rep = sphere_aggregation_check(&cfg, &IntegratorSettings::rk4(1e-3).with_record_every(50), 20.0)?;
    println!("{:?} ({:?})", rep.verdict, rep.hypothesis);
    println!("  ||W||_op = {:.4}, initial gap {:.4} < {:.4}", rep.w_operator_norm, rep.initial_gap, rep.gap_bound);
    println!("  final max distance {:.2e}", rep.final_max_distance);
    println!("  fitted rate {:.4?}, guaranteed at least 2 kappa (a - ||W||_op) = {:.4}", rep.fitted_rate, rep.predicted_rate);
    Ok(())
}
