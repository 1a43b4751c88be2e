//! Right-hand sides of the three frustrated models.
//!
//! Each evaluator has a slice-based kernel (used by the integrators, no
//! allocation proportional to `N²`) and a config-level wrapper returning a
//! tangent value.

use crate::error::{Error, Result};
use crate::linalg::{c, unitarity_residual, CMat, Complex64, RMat, RVec, I};
use crate::state::{
    embed_unitary2_to_sphere, Flavor, PerOscillator, PhaseConfig, SphereConfig, UnitaryConfig,
    UNITARY_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TangentPhase(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct TangentSphere(pub Vec<RVec>);

#[derive(Debug, Clone, PartialEq)]
pub struct TangentUnitary(pub Vec<CMat>);

impl TangentSphere {
    /// `max_i |⟨dx_i, x_i⟩|`.
    pub fn tangency_residual(&self, x: &[RVec]) -> f64 {
        self.0.iter().zip(x).map(|(d, p)| d.dot(p).abs()).fold(0.0, f64::max)
    }
}

impl TangentUnitary {
    /// `max_j ‖dU_j U_j* + U_j dU_j*‖_F`, zero exactly when the flow is
    /// tangent to `U(d)`.
    pub fn tangency_residual(&self, u: &[CMat]) -> f64 {
        self.0
            .iter()
            .zip(u)
            .map(|(d, uj)| {
                let a = d * uj.adjoint();
                crate::linalg::frobenius(&(&a + a.adjoint()))
            })
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(crate::linalg::frobenius).fold(0.0, f64::max)
    }
}

/// Phase-model kernel on raw slices.
pub fn kuramoto_rhs_into(cfg: &PhaseConfig, theta: &[f64], out: &mut [f64]) {
    let n = theta.len();
    let scale = cfg.kappa / n as f64;
    // Σ_k sin(θ_k − θ_j + α) = Im(e^{i(α − θ_j)} Σ_k e^{iθ_k}), so one pass
    // over the mean field suffices for both flavors.
    let (mut s, mut co) = (0.0, 0.0);
    for t in theta {
        s += t.sin();
        co += t.cos();
    }
    for j in 0..n {
        let coupling = match cfg.flavor {
            // Σ_k sin(θ_k − θ_j + α)
            Flavor::Sine => {
                let phi = cfg.alpha - theta[j];
                s * phi.cos() + co * phi.sin()
            }
            // Σ_k cos(θ_j − θ_k + α) = Re(e^{i(θ_j + α)} Σ_k e^{−iθ_k})
            Flavor::Cosine => {
                let phi = theta[j] + cfg.alpha;
                co * phi.cos() + s * phi.sin()
            }
        };
        out[j] = cfg.nu[j] + scale * coupling;
    }
}

pub fn kuramoto_rhs(cfg: &PhaseConfig) -> TangentPhase {
    let mut out = vec![0.0; cfg.n()];
    kuramoto_rhs_into(cfg, &cfg.theta, &mut out);
    TangentPhase(out)
}

/// Sphere-model kernel. `x` and `out` hold `N` consecutive blocks of length
/// `d + 1`.
pub fn sphere_rhs_into(cfg: &SphereConfig, x: &[f64], out: &mut [f64]) {
    let m = cfg.ambient_dim();
    let n = x.len() / m;
    let mut centroid = vec![0.0; m];
    for block in x.chunks_exact(m) {
        for (c, v) in centroid.iter_mut().zip(block) {
            *c += v;
        }
    }
    for cv in centroid.iter_mut() {
        *cv /= n as f64;
    }
    // V x_c = a x_c + W x_c
    let mut vxc = vec![0.0; m];
    for r in 0..m {
        let mut acc = cfg.a * centroid[r];
        for col in 0..m {
            acc += cfg.w[(r, col)] * centroid[col];
        }
        vxc[r] = acc;
    }
    for (i, (xi, oi)) in x.chunks_exact(m).zip(out.chunks_exact_mut(m)).enumerate() {
        let inner: f64 = xi.iter().zip(&vxc).map(|(p, q)| p * q).sum();
        let omega = cfg.omega.get(i);
        for r in 0..m {
            let mut rot = 0.0;
            for col in 0..m {
                rot += omega[(r, col)] * xi[col];
            }
            oi[r] = rot + cfg.kappa * (vxc[r] - inner * xi[r]);
        }
    }
}

pub fn sphere_rhs(cfg: &SphereConfig) -> TangentSphere {
    let m = cfg.ambient_dim();
    let flat: Vec<f64> = cfg.x.iter().flat_map(|p| p.iter().copied()).collect();
    let mut out = vec![0.0; flat.len()];
    sphere_rhs_into(cfg, &flat, &mut out);
    TangentSphere(out.chunks_exact(m).map(RVec::from_column_slice).collect())
}

/// Matrix-model rhs on decoded unitaries:
/// `dU_j = −i H_j U_j + (κ/2)(V U_c − U_j (V U_c)* U_j)`.
pub fn lohe_matrix_rhs_of(cfg: &UnitaryConfig, u: &[CMat]) -> Vec<CMat> {
    let d = cfg.dim();
    let n = u.len();
    let mut uc = CMat::zeros(d, d);
    for uk in u {
        uc += uk;
    }
    uc /= c(n as f64, 0.0);
    let vuc = &cfg.v * uc;
    let vuc_adj = vuc.adjoint();
    let half = c(cfg.kappa / 2.0, 0.0);
    u.iter()
        .enumerate()
        .map(|(j, uj)| {
            let drift = cfg.h.get(j) * uj * (-I);
            let coupling = (&vuc - uj * &vuc_adj * uj) * half;
            drift + coupling
        })
        .collect()
}

pub fn lohe_matrix_rhs(cfg: &UnitaryConfig) -> TangentUnitary {
    TangentUnitary(lohe_matrix_rhs_of(cfg, &cfg.u))
}

/// `U_j ← U_j L` for every oscillator.
pub fn right_translate(cfg: &UnitaryConfig, l: &CMat) -> Result<UnitaryConfig> {
    let d = cfg.dim();
    if l.nrows() != d || l.ncols() != d {
        return Err(Error::Dimension { expected: d, rows: l.nrows(), cols: l.ncols() });
    }
    let residual = unitarity_residual(l);
    if !(residual <= UNITARY_TOL) {
        return Err(Error::NonUnitary { index: 0, residual });
    }
    Ok(cfg.with_states(cfg.u.iter().map(|u| u * l).collect()))
}

/// Applies the same right translation to a tangent value.
pub fn translate_tangent(t: &TangentUnitary, l: &CMat) -> TangentUnitary {
    TangentUnitary(t.0.iter().map(|d| d * l).collect())
}

/// `max_j ‖rhs(U L)_j − rhs(U)_j L‖_F`.
pub fn right_translation_residual(cfg: &UnitaryConfig, l: &CMat) -> Result<f64> {
    let moved = right_translate(cfg, l)?;
    let lhs = lohe_matrix_rhs(&moved);
    let rhs = translate_tangent(&lohe_matrix_rhs(cfg), l);
    Ok(lhs
        .0
        .iter()
        .zip(&rhs.0)
        .map(|(a, b)| crate::linalg::frobenius(&(a - b)))
        .fold(0.0, f64::max))
}

/// Levi-Civita symbol on `{0, 1, 2}`.
fn epsilon(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Pauli coordinates `(ω, ν)` of a 2x2 Hermitian `H = Σ ω_k σ_k + ν I`.
pub fn hamiltonian_coordinates(h: &CMat) -> ([f64; 3], f64) {
    let nu = (h[(0, 0)] + h[(1, 1)]).re / 2.0;
    let w1 = (h[(0, 0)] - h[(1, 1)]).re / 2.0;
    // σ2 = [[0, −i], [i, 0]], σ3 = [[0, 1], [1, 0]]: h01 = ω3 − i ω2.
    let w2 = -h[(0, 1)].im;
    let w3 = h[(0, 1)].re;
    ([w1, w2, w3], nu)
}

/// Pauli coordinates of a unit quaternion matrix `v4 I + i Σ v_k σ_k`.
pub fn frustration_coordinates(v: &CMat) -> [f64; 4] {
    [
        (v[(0, 0)] - v[(1, 1)]).im / 2.0,
        (v[(0, 1)] - v[(1, 0)]).re / 2.0,
        (v[(0, 1)] + v[(1, 0)]).im / 2.0,
        (v[(0, 0)] + v[(1, 1)]).re / 2.0,
    ]
}

/// Real 4x4 generator of `x ↦ −i H P(x)` on the quaternion part, for the
/// traceless part `ω·σ` of `H`.
pub fn pauli_generator(omega: [f64; 3]) -> RMat {
    let mut g = RMat::zeros(4, 4);
    for cc in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                acc -= epsilon(a, b, cc) * omega[a];
            }
            g[(cc, b)] = acc;
        }
        g[(cc, 3)] = -omega[cc];
        g[(3, cc)] = omega[cc];
    }
    g
}

/// Left multiplication by the unit quaternion `v`: `V P(x) = P(Ṽ x)`.
pub fn quaternion_left_multiplier(v: [f64; 4]) -> RMat {
    let [v1, v2, v3, v4] = v;
    RMat::from_row_slice(
        4,
        4,
        &[
            v4, -v3, v2, v1, //
            v3, v4, -v1, v2, //
            -v2, v1, v4, v3, //
            -v1, -v2, -v3, v4,
        ],
    )
}

/// Compares the 5N-dimensional `(θ, x)` form of the `U(2)` model against the
/// matrix rhs pushed forward through the embedding, returning the largest
/// discrepancy over `(θ̇_j, ẋ_j)`.
///
/// Requires identical `H` for all oscillators (its trace part enters `θ̇`).
/// With `V ≠ I` the phase and quaternion parts do not decouple unless every
/// `θ_j = 0`; in that branch the comparison uses the `SU(2)` form.
pub fn reduce_matrix_to_sphere_check(cfg: &UnitaryConfig) -> Result<f64> {
    if cfg.dim() != 2 {
        return Err(Error::Dimension { expected: 2, rows: cfg.dim(), cols: cfg.dim() });
    }
    let n = cfg.n();
    let mut theta = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    for (j, u) in cfg.u.iter().enumerate() {
        let (t, x) = embed_unitary2_to_sphere(u).map_err(|e| match e {
            Error::NonUnitary { residual, .. } => Error::NonUnitary { index: j, residual },
            other => other,
        })?;
        theta.push(t);
        xs.push(x);
    }

    let v = frustration_coordinates(&cfg.v);
    let rebuilt = crate::state::quaternion_matrix(&v);
    if crate::linalg::frobenius(&(&rebuilt - &cfg.v)) > 1e-10 {
        return Err(Error::invalid("frustration must be of the form v4 I + i Σ v_k σ_k"));
    }
    let v_is_identity = (v[3] - 1.0).abs() < 1e-14 && v[..3].iter().all(|a| a.abs() < 1e-14);

    let pushed = pushforward(cfg, &theta, &xs);

    let reduced: Vec<(f64, RVec)> = if v_is_identity {
        phase_quaternion_rhs_identity(cfg, &theta, &xs)?
    } else {
        let worst = theta.iter().map(|t| t.abs()).fold(0.0, f64::max);
        if worst > 1e-12 {
            return Err(Error::invalid(
                "with V ≠ I the reduced check needs every phase θ_j = 0",
            ));
        }
        su2_rhs(cfg, &xs, v)?
    };

    let mut worst: f64 = 0.0;
    for ((dt_p, dx_p), (dt_r, dx_r)) in pushed.iter().zip(&reduced) {
        worst = worst.max((dt_p - dt_r).abs());
        worst = worst.max((dx_p - dx_r).amax());
    }
    Ok(worst)
}

/// Decomposes `e^{iθ} dU` in the basis `{I, iσ1, iσ2, iσ3}`. The real parts
/// of the coefficients are `ẋ`, the imaginary parts are `−θ̇ x`.
fn pushforward(cfg: &UnitaryConfig, theta: &[f64], xs: &[RVec]) -> Vec<(f64, RVec)> {
    let du = lohe_matrix_rhs_of(cfg, &cfg.u);
    du.iter()
        .zip(theta)
        .zip(xs)
        .map(|((d, t), x)| {
            let p = d * Complex64::from_polar(1.0, *t);
            let coeff = [
                (p[(0, 0)] - p[(1, 1)]) * (-I) / 2.0,
                (p[(0, 1)] - p[(1, 0)]) / 2.0,
                (p[(0, 1)] + p[(1, 0)]) * (-I) / 2.0,
                (p[(0, 0)] + p[(1, 1)]) / 2.0,
            ];
            let xdot = RVec::from_iterator(4, coeff.iter().map(|z| z.re));
            // Imaginary parts equal −θ̇ x; project onto x.
            let im = RVec::from_iterator(4, coeff.iter().map(|z| z.im));
            let thetadot = -im.dot(x);
            (thetadot, xdot)
        })
        .collect()
}

/// `(θ, x)` system for `V = I`:
/// `θ̇_j = ν + (κ/N) Σ_k sin(θ_k − θ_j) ⟨x_j, x_k⟩`,
/// `ẋ_j = Ω x_j + (κ/N) Σ_k cos(θ_k − θ_j)(x_k − ⟨x_j, x_k⟩ x_j)`.
fn phase_quaternion_rhs_identity(
    cfg: &UnitaryConfig,
    theta: &[f64],
    xs: &[RVec],
) -> Result<Vec<(f64, RVec)>> {
    let (omega, nu) = shared_hamiltonian(cfg)?;
    let gen = pauli_generator(omega);
    let n = xs.len() as f64;
    let scale = cfg.kappa / n;
    Ok(theta
        .iter()
        .zip(xs)
        .map(|(tj, xj)| {
            let mut tdot = nu;
            let mut xdot = &gen * xj;
            for (tk, xk) in theta.iter().zip(xs) {
                let inner = xj.dot(xk);
                let dphi = tk - tj;
                tdot += scale * dphi.sin() * inner;
                xdot += (xk - xj * inner) * (scale * dphi.cos());
            }
            (tdot, xdot)
        })
        .collect())
}

/// `SU(2)` form with frustration:
/// `ẋ_j = Ω x_j + (κ/N) Σ_k (Ṽ x_k − ⟨x_j, Ṽ x_k⟩ x_j)`, with `θ ≡ 0`
/// preserved when `H` is traceless.
fn su2_rhs(cfg: &UnitaryConfig, xs: &[RVec], v: [f64; 4]) -> Result<Vec<(f64, RVec)>> {
    let (omega, nu) = shared_hamiltonian(cfg)?;
    if nu.abs() > 1e-14 {
        return Err(Error::invalid(
            "with V ≠ I the reduced check needs a traceless Hamiltonian",
        ));
    }
    let gen = pauli_generator(omega);
    let vt = quaternion_left_multiplier(v);
    let n = xs.len() as f64;
    let mut xc = RVec::zeros(4);
    for x in xs {
        xc += x;
    }
    xc /= n;
    let vxc = &vt * xc;
    Ok(xs
        .iter()
        .map(|xj| {
            let xdot = &gen * xj + (&vxc - xj * xj.dot(&vxc)) * cfg.kappa;
            (0.0, xdot)
        })
        .collect())
}

fn shared_hamiltonian(cfg: &UnitaryConfig) -> Result<([f64; 3], f64)> {
    let h0 = cfg.h.get(0);
    let identical = match &cfg.h {
        PerOscillator::Shared(_) => true,
        PerOscillator::Individual(hs) => {
            hs.iter().all(|h| crate::linalg::frobenius(&(h - h0)) < 1e-14)
        }
    };
    if !identical {
        return Err(Error::invalid("the reduced check needs identical Hamiltonians"));
    }
    Ok(hamiltonian_coordinates(h0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cidentity, haar_unitary, random_skew, random_unit_vector};
    use crate::state::{pauli, pauli_hamiltonian, quaternion_matrix, vec_from};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn phase(theta: Vec<f64>, kappa: f64, alpha: f64, flavor: Flavor) -> PhaseConfig {
        PhaseConfig::new(theta, kappa, alpha, flavor).unwrap()
    }

    #[test]
    fn antipodal_pair_is_stationary() {
        let d = kuramoto_rhs(&phase(vec![0.0, PI], 1.0, 0.0, Flavor::Sine));
        assert!(d.0.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn two_term_sine_sum() {
        let d = kuramoto_rhs(&phase(vec![0.0, PI / 2.0], 2.0, 0.0, Flavor::Sine));
        assert!((d.0[0] - 1.0).abs() < 1e-15);
        assert!((d.0[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_cosine_oscillator() {
        let d = kuramoto_rhs(&phase(vec![0.4], 1.0, PI / 3.0, Flavor::Cosine));
        assert!((d.0[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cosine_flow_is_sine_flow_with_complementary_frustration() {
        let theta = vec![0.1, 1.3, -2.0, 2.9, 0.7];
        let alpha = 0.37;
        let cos = kuramoto_rhs(&phase(theta.clone(), 1.3, alpha, Flavor::Cosine));
        let sin = kuramoto_rhs(&phase(theta.clone(), 1.3, PI / 2.0 - alpha, Flavor::Sine));
        for (a, b) in cos.0.iter().zip(&sin.0) {
            assert!((a - b).abs() < 1e-14);
        }
        // Pairwise form.
        for j in 0..5 {
            let direct: f64 =
                theta.iter().map(|tk| (theta[j] - tk + alpha).cos()).sum::<f64>() * 1.3 / 5.0;
            assert!((cos.0[j] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn single_sphere_point_is_fixed() {
        let cfg = SphereConfig::unfrustrated(vec![vec_from(&[0.6, 0.8, 0.0])], 1.0).unwrap();
        assert!(sphere_rhs(&cfg).0[0].norm() < 1e-15);
    }

    #[test]
    fn orthonormal_pair_moves_toward_each_other() {
        let cfg = SphereConfig::unfrustrated(
            vec![vec_from(&[1.0, 0.0]), vec_from(&[0.0, 1.0])],
            1.0,
        )
        .unwrap();
        let d = sphere_rhs(&cfg);
        assert!((d.0[0].clone() - vec_from(&[0.0, 0.5])).norm() < 1e-15);
        assert!((d.0[1].clone() - vec_from(&[0.5, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn pure_skew_frustration_keeps_relative_angle() {
        let w = RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let x = vec![vec_from(&[1.0, 0.0]), vec_from(&[0.0, 1.0])];
        let cfg =
            SphereConfig::new(x.clone(), PerOscillator::Shared(RMat::zeros(2, 2)), 1.0, 0.0, w)
                .unwrap();
        let d = sphere_rhs(&cfg);
        // By hand: x_c = (1/2, 1/2), W x_c = (−1/2, 1/2), so dx_1 = (0, 1/2)
        // and dx_2 = (−1/2, 0); ⟨dx_1, x_2⟩ + ⟨x_1, dx_2⟩ = 1/2 − 1/2.
        assert!((d.0[0].clone() - vec_from(&[0.0, 0.5])).norm() < 1e-15);
        assert!((d.0[1].clone() - vec_from(&[-0.5, 0.0])).norm() < 1e-15);
        let rate = d.0[0].dot(&x[1]) + x[0].dot(&d.0[1]);
        assert!(rate.abs() < 1e-15);
    }

    #[test]
    fn sphere_rhs_matches_pairwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<RVec> = (0..5).map(|_| random_unit_vector(&mut rng, 4)).collect();
        let omega = random_skew(&mut rng, 4, 0.3);
        let w = random_skew(&mut rng, 4, 0.2);
        let cfg =
            SphereConfig::new(x.clone(), PerOscillator::Shared(omega.clone()), 0.8, 0.7, w)
                .unwrap();
        let v = cfg.frustration();
        let d = sphere_rhs(&cfg);
        for i in 0..5 {
            let mut expect = &omega * &x[i];
            for k in 0..5 {
                let vk = &v * &x[k];
                expect += (&vk - &x[i] * x[i].dot(&vk)) * (0.8 / 5.0);
            }
            assert!((&d.0[i] - expect).norm() < 1e-14);
        }
        assert!(d.tangency_residual(&x) < 1e-14);
    }

    #[test]
    fn aggregated_matrices_are_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = haar_unitary(&mut rng, 3);
        let cfg = UnitaryConfig::unfrustrated(vec![u.clone(), u.clone(), u], 1.0).unwrap();
        assert!(lohe_matrix_rhs(&cfg).max_norm() < 1e-14);
    }

    #[test]
    fn scalar_matrix_model_is_sine_kuramoto() {
        let theta = [0.3, -1.1, 2.5, 0.9];
        let nu = 0.4;
        let alpha = 0.6;
        let u: Vec<CMat> = theta
            .iter()
            .map(|t| CMat::from_element(1, 1, Complex64::from_polar(1.0, -t)))
            .collect();
        let cfg = UnitaryConfig::new(
            u.clone(),
            PerOscillator::Shared(CMat::from_element(1, 1, c(nu, 0.0))),
            1.7,
            CMat::from_element(1, 1, Complex64::from_polar(1.0, -alpha)),
        )
        .unwrap();
        let du = lohe_matrix_rhs(&cfg);
        let kur = kuramoto_rhs(
            &PhaseConfig::with_frequencies(theta.to_vec(), vec![nu; 4], 1.7, alpha, Flavor::Sine)
                .unwrap(),
        );
        for j in 0..4 {
            let lhs = (du.0[j][(0, 0)] * u[j][(0, 0)].conj() * I).re;
            assert!((lhs - kur.0[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn tangent_to_unitary_group() {
        let u = vec![cidentity(2), pauli(1) * I];
        let cfg = UnitaryConfig::unfrustrated(u.clone(), 1.0).unwrap();
        let d = lohe_matrix_rhs(&cfg);
        assert!(d.tangency_residual(&u) < 1e-12);
    }

    #[test]
    fn right_translation_by_identity_and_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<CMat> = (0..3).map(|_| haar_unitary(&mut rng, 2)).collect();
        let cfg = UnitaryConfig::unfrustrated(u, 1.0).unwrap();
        assert_eq!(right_translate(&cfg, &cidentity(2)).unwrap(), cfg);

        let scalar = UnitaryConfig::unfrustrated(
            vec![
                CMat::from_element(1, 1, Complex64::from_polar(1.0, 0.2)),
                CMat::from_element(1, 1, Complex64::from_polar(1.0, 1.9)),
            ],
            1.0,
        )
        .unwrap();
        let l = CMat::from_element(1, 1, Complex64::from_polar(1.0, 0.7));
        let moved = right_translate(&scalar, &l).unwrap();
        let before = lohe_matrix_rhs(&scalar);
        let after = lohe_matrix_rhs(&moved);
        // Phase rates i dU U* are unchanged.
        for j in 0..2 {
            let r0 = before.0[j][(0, 0)] * scalar.u[j][(0, 0)].conj();
            let r1 = after.0[j][(0, 0)] * moved.u[j][(0, 0)].conj();
            assert!((r0 - r1).norm() < 1e-15);
        }
        let mut bad = cidentity(2);
        bad[(1, 1)] = c(2.0, 0.0);
        assert!(right_translate(&cfg, &bad).is_err());
    }

    #[test]
    fn quaternion_multiplier_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let v = random_unit_vector(&mut rng, 4);
            let x = random_unit_vector(&mut rng, 4);
            let vv = [v[0], v[1], v[2], v[3]];
            let lhs = quaternion_matrix(v.as_slice()) * quaternion_matrix(x.as_slice());
            let rhs = quaternion_matrix((quaternion_left_multiplier(vv) * &x).as_slice());
            assert!(crate::linalg::frobenius(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn pauli_generator_matches_hamiltonian_action() {
        let omega = [0.3, -0.8, 1.1];
        let h = pauli_hamiltonian(omega, 0.0);
        let x = vec_from(&[0.1, 0.5, -0.3, 0.8]);
        let lhs = h * quaternion_matrix(x.as_slice()) * (-I);
        let rhs = quaternion_matrix((pauli_generator(omega) * &x).as_slice());
        assert!(crate::linalg::frobenius(&(lhs - rhs)) < 1e-14);
        let (w, nu) = hamiltonian_coordinates(&pauli_hamiltonian(omega, 0.25));
        for k in 0..3 {
            assert!((w[k] - omega[k]).abs() < 1e-15);
        }
        assert!((nu - 0.25).abs() < 1e-15);
    }
}
