//! Phase-times-quaternion coordinates on `U(2)`.
//!
//! `U = e^{-iθ} (x4 I + i Σ_k x_k σ_k)` with the Pauli basis ordered so that
//! `σ1 = diag(1, -1)`, `σ2 = [[0, -i], [i, 0]]`, `σ3 = [[0, 1], [1, 0]]`. In
//! this order `σ_a σ_b = δ_ab I - i ε_abc σ_c`.

use crate::error::{Error, Result};
use crate::linalg::{c, unitarity_residual, CMat, Complex64, RVec};

use super::UNITARY_TOL;

/// The Pauli matrix `σ_k` for `k ∈ {1, 2, 3}` in the ordering above.
pub fn pauli(k: usize) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        1 => CMat::from_row_slice(2, 2, &[one, z, z, -one]),
        2 => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => CMat::from_row_slice(2, 2, &[z, one, one, z]),
        _ => panic!("Pauli index must be 1, 2 or 3, got {k}"),
    }
}

/// `x4 I + i Σ x_k σ_k` for a 4-vector `x`.
pub fn quaternion_matrix(x: &[f64]) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            c(x[3], x[0]),
            c(x[1], x[2]),
            c(-x[1], x[2]),
            c(x[3], -x[0]),
        ],
    )
}

/// Reassembles `e^{-iθ} (x4 I + i Σ x_k σ_k)`.
pub fn assemble_unitary2(theta: f64, x: &RVec) -> CMat {
    quaternion_matrix(x.as_slice()) * Complex64::from_polar(1.0, -theta)
}

/// Splits a 2x2 unitary into `(θ, x)` with `θ ∈ [-π/2, π/2)` and `‖x‖ = 1`.
///
/// The pair is unique up to `(θ + π, -x)`; the branch is fixed by taking
/// `θ = -arg(det U) / 2`.
pub fn embed_unitary2_to_sphere(u: &CMat) -> Result<(f64, RVec)> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::Dimension { expected: 2, rows: u.nrows(), cols: u.ncols() });
    }
    let residual = unitarity_residual(u);
    if !(residual <= UNITARY_TOL) {
        return Err(Error::NonUnitary { index: 0, residual });
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let theta = -det.arg() / 2.0;
    let p = u * Complex64::from_polar(1.0, theta);
    let x = RVec::from_vec(vec![
        (p[(0, 0)] - p[(1, 1)]).im / 2.0,
        (p[(0, 1)] - p[(1, 0)]).re / 2.0,
        (p[(0, 1)] + p[(1, 0)]).im / 2.0,
        (p[(0, 0)] + p[(1, 1)]).re / 2.0,
    ]);
    let n = x.norm();
    Ok((theta, x / n))
}

/// Unitary frustration `v4 I + i Σ v_k σ_k` from unit Pauli coordinates.
pub fn pauli_frustration(v: [f64; 4]) -> Result<CMat> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "Pauli coordinates of the frustration must have unit norm, got {n}"
        )));
    }
    Ok(quaternion_matrix(&v))
}

/// Hermitian `Σ ω_k σ_k + ν I`.
pub fn pauli_hamiltonian(omega: [f64; 3], nu: f64) -> CMat {
    let mut h = CMat::identity(2, 2) * c(nu, 0.0);
    for (k, w) in omega.iter().enumerate() {
        h += pauli(k + 1) * c(*w, 0.0);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cidentity, frobenius, haar_unitary, I};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn pauli_products_follow_the_permuted_orientation() {
        // σ1 σ2 = -i σ3 in this ordering.
        let lhs = pauli(1) * pauli(2);
        let rhs = pauli(3) * (-I);
        assert!(frobenius(&(lhs - rhs)) < 1e-15);
        for k in 1..=3 {
            assert!(frobenius(&(pauli(k) * pauli(k) - cidentity(2))) < 1e-15);
        }
    }

    #[test]
    fn identity_embeds_to_north_pole() {
        let (theta, x) = embed_unitary2_to_sphere(&cidentity(2)).unwrap();
        assert_eq!(theta, 0.0);
        assert_eq!(x.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn pure_phase_is_recovered() {
        let u = cidentity(2) * Complex64::from_polar(1.0, -PI / 3.0);
        let (theta, x) = embed_unitary2_to_sphere(&u).unwrap();
        assert!((theta - PI / 3.0).abs() < 1e-15);
        assert!((x - RVec::from_vec(vec![0.0, 0.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn i_sigma1_embeds_to_first_axis() {
        let u = pauli(1) * I;
        let (theta, x) = embed_unitary2_to_sphere(&u).unwrap();
        assert!(theta.abs() < 1e-15);
        assert!((x.clone() - RVec::from_vec(vec![1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        // Reassemble the matrix entry by entry.
        let back = assemble_unitary2(theta, &x);
        assert_eq!(back[(0, 0)], c(0.0, 1.0));
        assert_eq!(back[(1, 1)], c(0.0, -1.0));
        assert_eq!(back[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn rejects_non_unitary() {
        let mut u = cidentity(2);
        u[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(
            embed_unitary2_to_sphere(&u),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn haar_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u = haar_unitary(&mut rng, 2);
            let (theta, x) = embed_unitary2_to_sphere(&u).unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-14);
            let back = assemble_unitary2(theta, &x);
            for (a, b) in back.iter().zip(u.iter()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }
}
