//! Conserved and monotone quantities of the cosine Kuramoto-Sakaguchi flow.
//!
//! `cargo run --example kuramoto_invariants -- [alpha]`

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::integrate::{integrate, IntegratorSettings};
use synclab::invariants::drift_report;
use synclab::sample::random_phases;
use synclab::state::{Flavor, PhaseConfig};

fn main() -> synclab::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.3);
    let theta = random_phases(&mut ChaCha8Rng::seed_from_u64(7), 6);
    let settings = IntegratorSettings::rk4(1e-3);

    for (alpha, names) in [(0.0, &["I", "sum_theta"][..]), (alpha, &["J", "sum_theta"][..]), (FRAC_PI_2, &["K:*"][..])] {
        let cfg = PhaseConfig::new(theta.clone(), 1.0, alpha, Flavor::Cosine)?;
        let traj = integrate(&cfg, &settings, 10.0)?;
        println!("alpha = {alpha:.4}");
        for r in drift_report(&traj, names, 1e-6)? {
            println!("  {:<12} {:?}  v0 = {:+.6e}  rel dev = {:.2e}  {}", r.name, r.kind, r.v0, r.max_rel_dev, r.verdict.as_str());
        }
    }
    Ok(())
}
