//! Lohe matrix model: cross-ratio spectra, unitarity and aggregation under
//! frustration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::equilibria::matrix_aggregation_check;
use synclab::integrate::{integrate, IntegratorSettings};
use synclab::invariants::{drift_report, matrix_cross_ratio_spectrum};
use synclab::linalg::{random_hermitian, unitarity_residual};
use synclab::sample::{haar_states, unitary_cluster, unitary_near_identity};
use synclab::state::{PerOscillator, UnitaryConfig};

fn main() -> synclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let settings = IntegratorSettings::rk4(1e-3);

    let cfg = UnitaryConfig::new(
        haar_states(&mut rng, 4, 2),
        PerOscillator::Shared(random_hermitian(&mut rng, 2, 1.0)),
        1.0,
        synclab::linalg::cidentity(2),
    )?;
    println!("spectrum of C_0123 at t = 0: {:.4?}", matrix_cross_ratio_spectrum(&cfg.u, 0, 1, 2, 3)?);
    let traj = integrate(&cfg, &settings, 5.0)?;
    for r in drift_report(&traj, &["spectrum:0,1,2,3"], 1e-6)? {
        println!("{}: max eigenvalue displacement {:.2e}  {}", r.name, r.max_abs_dev, r.verdict.as_str());
    }
    let worst = traj.states.iter().flat_map(|s| s.u.iter().map(unitarity_residual)).fold(0.0, f64::max);
    println!("max ||U*U - I||_F along the run: {worst:.2e}");

    let v = unitary_near_identity(&mut rng, 2, 0.1)?;
    let cfg = UnitaryConfig::new(unitary_cluster(&mut rng, 5, 2, 0.5)?, PerOscillator::Shared(random_hermitian(&mut rng, 2, 1.0)), 1.0, v)?;
    let rep = matrix_aggregation_check(&cfg, &settings.with_record_every(20), 20.0)?;
    println!(
        "aggregation: {:?} ({:?}), ||V - I|| = {:.3}, D(U) {:.3} -> {:.2e}, Riccati inequality holds: {}",
        rep.verdict, rep.hypothesis, rep.frustration_distance, rep.initial_diameter, rep.final_diameter, rep.riccati_holds
    );
    Ok(())
}
