//! Cross-ratios, the Ptolemy residual and the diameter on the sphere model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::integrate::{integrate, IntegratorSettings};
use synclab::invariants::{drift_report, drift_report_as, sphere_diameter, Kind};
use synclab::linalg::{random_skew, RMat};
use synclab::sample::{concyclic_points, uniform_points};
use synclab::state::{PerOscillator, SphereConfig};

fn main() -> synclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let settings = IntegratorSettings::rk4(1e-3);

    let omega = PerOscillator::Shared(random_skew(&mut rng, 3, 1.0));
    let cfg = SphereConfig::new(uniform_points(&mut rng, 5, 3), omega, 1.0, 1.0, RMat::zeros(3, 3))?;
    let traj = integrate(&cfg, &settings, 5.0)?;
    for r in drift_report(&traj, &["H:*"], 1e-6)? {
        println!("{:<10} rel dev {:.2e}  {}", r.name, r.max_rel_dev, r.verdict.as_str());
    }

    // Concyclic points stay concyclic: every Ptolemy residual stays at zero.
    let omega = PerOscillator::Shared(random_skew(&mut rng, 3, 1.0));
    let circle = SphereConfig::new(concyclic_points(&mut rng, 5, 3, 0.4)?, omega, 1.0, 1.0, RMat::zeros(3, 3))?;
    let traj = integrate(&circle, &settings, 5.0)?;
    let worst = drift_report_as(&traj, &["ptolemy:*"], Kind::Vanishing, 1e-6)?
        .into_iter()
        .map(|r| r.max_abs_dev)
        .fold(0.0, f64::max);
    println!("largest Ptolemy residual along the run: {worst:.2e}");

    for kappa in [1.0, -1.0] {
        let cfg = SphereConfig::unfrustrated(uniform_points(&mut ChaCha8Rng::seed_from_u64(5), 6, 3), kappa)?;
        let traj = integrate(&cfg, &settings, 5.0)?;
        println!("kappa = {kappa:+}: D_M {:.4} -> {:.4}", sphere_diameter(&traj.first().x), sphere_diameter(&traj.last().x));
    }
    Ok(())
}
