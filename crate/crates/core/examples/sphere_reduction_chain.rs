//! Full sphere model versus its stereographic form versus the reduced
//! `(a, b, M)` system, all on one time grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::integrate::IntegratorSettings;
use synclab::reduce_sphere::sphere_reduction_chain;
use synclab::sample::uniform_points;
use synclab::state::SphereConfig;

fn main() -> synclab::Result<()> {
    let x = uniform_points(&mut ChaCha8Rng::seed_from_u64(21), 6, 4);
    let cfg = SphereConfig::unfrustrated(x, 1.0)?;
    let rep = sphere_reduction_chain(&cfg, &IntegratorSettings::rk4(1e-3), 3.0)?;
    println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    Ok(())
}
