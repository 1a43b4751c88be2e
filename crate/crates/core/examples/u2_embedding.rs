//! `U(2)` written as a phase times a unit quaternion, and the matrix model
//! on `U(2)` seen as a sphere model on `S^3`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclab::dynamics::reduce_matrix_to_sphere_check;
use synclab::linalg::{frobenius, haar_unitary};
use synclab::sample::haar_states;
use synclab::state::{assemble_unitary2, embed_unitary2_to_sphere, pauli_hamiltonian, PerOscillator, UnitaryConfig};

fn main() -> synclab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = haar_unitary(&mut rng, 2);
    let (theta, x) = embed_unitary2_to_sphere(&u)?;
    println!("U = e^(i {theta:.4}) q(x), x = {:.4?}", x.as_slice());
    println!("round trip error {:.1e}", frobenius(&(assemble_unitary2(theta, &x) - &u)));

    let h = PerOscillator::Shared(pauli_hamiltonian([0.3, -0.2, 0.5], 0.0));
    let cfg = UnitaryConfig::new(haar_states(&mut rng, 4, 2), h, 1.0, synclab::linalg::cidentity(2))?;
    println!("matrix flow vs sphere flow on S^3: residual {:.1e}", reduce_matrix_to_sphere_check(&cfg)?);
    Ok(())
}
