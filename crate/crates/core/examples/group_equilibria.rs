//! Unitary representations of finite groups as equilibria of the matrix
//! model with zero Hamiltonian.

use synclab::equilibria::{cyclic_rep, is_equilibrium, symmetric_standard_rep};
use synclab::linalg::cidentity;

fn main() -> synclab::Result<()> {
    let reps = [cyclic_rep(3)?, cyclic_rep(5)?, symmetric_standard_rep(3)?, symmetric_standard_rep(4)?];
    for rep in reps {
        let cfg = rep.to_config(1.0, cidentity(rep.dim()))?;
        let check = is_equilibrium(&cfg, 1e-10)?;
        println!(
            "{:?}: order {}, dim {}, sum of rho(g) = {:.1e}, max ||dU/dt|| = {:.1e}, equilibrium: {}",
            rep.group, rep.order(), rep.dim(), rep.sum_residual(), check.residual, check.is_equilibrium
        );
    }
    Ok(())
}
