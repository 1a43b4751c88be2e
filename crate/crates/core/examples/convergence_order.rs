//! Empirical order of the fixed-step schemes by step halving.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::integrate::{convergence_order, Scheme};
use synclab::sample::{haar_states, random_phases, uniform_points};
use synclab::state::{Flavor, PhaseConfig, SphereConfig, UnitaryConfig};

fn main() -> synclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phase = PhaseConfig::new(random_phases(&mut rng, 5), 1.0, 0.2, Flavor::Cosine)?;
    let sphere = SphereConfig::unfrustrated(uniform_points(&mut rng, 5, 3), 1.0)?;
    let unitary = UnitaryConfig::unfrustrated(haar_states(&mut rng, 4, 2), 1.0)?;
    for scheme in [Scheme::Rk4, Scheme::Dopri5] {
        println!(
            "{scheme:?}: phase {:?}, sphere {:?}, unitary {:?}",
            convergence_order(&phase, scheme)?,
            convergence_order(&sphere, scheme)?,
            convergence_order(&unitary, scheme)?
        );
    }
    Ok(())
}
