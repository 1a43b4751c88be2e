//! Equilibria built from finite-group representations, and aggregation
//! certification for the Lohe matrix model.

use std::io::Write;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate_flat, IntegratorSettings, System};
use crate::invariants::matrix_diameter;
use crate::linalg::{c, cidentity, frobenius, unitarity_residual, CMat, RMat};
use crate::reduce_sphere::{log_linear_rate, AggregationVerdict, Hypothesis};
use crate::state::{PerOscillator, UnitaryConfig, Validate};

/// Default equilibrium tolerance.
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
/// Slack allowed in the discrete Riccati inequality.
pub const RICCATI_SLACK: f64 = 1e-3;
/// Aggregation threshold on the final matrix diameter.
pub const MATRIX_AGGREGATION_TOL: f64 = 1e-4;
/// Largest symmetric group constructed (`|S_6| = 720`).
pub const MAX_SYMMETRIC_DEGREE: usize = 6;

/// Equilibrium tolerance scaled for `N` matrices of size `d`.
pub fn scaled_tolerance(tol: f64, d: usize, n: usize) -> f64 {
    tol * ((d * n) as f64).sqrt().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupTag {
    Cyclic(usize),
    Symmetric(usize),
}

/// A finite group given by its multiplication table together with a unitary
/// representation.
#[derive(Debug, Clone)]
pub struct FiniteGroupRep {
    pub group: GroupTag,
    /// Human-readable element labels.
    pub elements: Vec<String>,
    /// `table[g][h]` is the index of `g h`.
    pub table: Vec<Vec<usize>>,
    pub rho: Vec<CMat>,
    pub irreducible: bool,
}

/// `ρ(k) = e^{2πik/N}` on `Z_N`.
pub fn cyclic_rep(n: usize) -> Result<FiniteGroupRep> {
    if n == 0 {
        return Err(Error::invalid("cyclic group order must be at least 1"));
    }
    let rho = (0..n)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            CMat::from_element(1, 1, c(phi.cos(), phi.sin()))
        })
        .collect();
    Ok(FiniteGroupRep {
        group: GroupTag::Cyclic(n),
        elements: (0..n).map(|k| k.to_string()).collect(),
        table: (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect(),
        rho,
        irreducible: true,
    })
}

/// Orthonormal basis of the sum-zero hyperplane of `R^n`; column `k` is
/// `(1, …, 1, −k, 0, …)/√(k(k+1))` with `k` leading ones.
pub fn simplex_basis(n: usize) -> RMat {
    RMat::from_fn(n, n - 1, |i, col| {
        let k = col + 1;
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        match i.cmp(&k) {
            std::cmp::Ordering::Less => s,
            std::cmp::Ordering::Equal => -(k as f64) * s,
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

/// The `(n − 1)`-dimensional standard representation of `S_n`, elements in
/// lexicographic one-line order.
pub fn symmetric_standard_rep(n: usize) -> Result<FiniteGroupRep> {
    if !(2..=MAX_SYMMETRIC_DEGREE).contains(&n) {
        return Err(Error::invalid(format!(
            "symmetric group degree must lie in 2..={MAX_SYMMETRIC_DEGREE}, got {n}"
        )));
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let index = |p: &[usize]| perms.iter().position(|q| q == p).expect("closed under composition");
    // (g h)(i) = g(h(i)).
    let table = perms
        .iter()
        .map(|g| perms.iter().map(|h| index(&h.iter().map(|&i| g[i]).collect::<Vec<_>>())).collect())
        .collect();
    let b = simplex_basis(n);
    let rho = perms
        .iter()
        .map(|p| {
            let mut perm = RMat::zeros(n, n);
            for (i, &pi) in p.iter().enumerate() {
                perm[(pi, i)] = 1.0;
            }
            (b.transpose() * perm * &b).map(|v| c(v, 0.0))
        })
        .collect();
    Ok(FiniteGroupRep {
        group: GroupTag::Symmetric(n),
        elements: perms.iter().map(|p| p.iter().map(|i| (i + 1).to_string()).join("")).collect(),
        table,
        rho,
        irreducible: true,
    })
}

impl FiniteGroupRep {
    pub fn order(&self) -> usize {
        self.rho.len()
    }

    pub fn dim(&self) -> usize {
        self.rho.first().map_or(0, |m| m.nrows())
    }

    /// `max ‖ρ(g)ρ(h) − ρ(gh)‖_F`.
    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.order();
        (0..n)
            .cartesian_product(0..n)
            .map(|(g, h)| frobenius(&(&self.rho[g] * &self.rho[h] - &self.rho[self.table[g][h]])))
            .fold(0.0, f64::max)
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.rho.iter().map(unitarity_residual).fold(0.0, f64::max)
    }

    /// `‖Σ_g ρ(g)‖_F`.
    pub fn sum_residual(&self) -> f64 {
        let mut s = CMat::zeros(self.dim(), self.dim());
        for m in &self.rho {
            s += m;
        }
        frobenius(&s)
    }

    pub fn diameter(&self) -> f64 {
        matrix_diameter(&self.rho)
    }

    /// Oscillator configuration `U_i = ρ(g_i)` with `H = 0`.
    pub fn to_config(&self, kappa: f64, v: CMat) -> Result<UnitaryConfig> {
        let d = self.dim();
        UnitaryConfig::new(self.rho.clone(), PerOscillator::Shared(CMat::zeros(d, d)), kappa, v)
    }

    /// JSON export: group, labels, table and matrices as nested `[re, im]`
    /// arrays.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Export<'a> {
            group: GroupTag,
            dim: usize,
            irreducible: bool,
            elements: &'a [String],
            table: &'a [Vec<usize>],
            matrices: Vec<Vec<Vec<[f64; 2]>>>,
        }
        let matrices = self
            .rho
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|col| [m[(r, col)].re, m[(r, col)].im]).collect())
                    .collect()
            })
            .collect();
        serde_json::to_writer_pretty(
            w,
            &Export {
                group: self.group,
                dim: self.dim(),
                irreducible: self.irreducible,
                elements: &self.elements,
                table: &self.table,
                matrices,
            },
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumCheck {
    pub is_equilibrium: bool,
    /// `max_j ‖dU_j/dt‖_F`.
    pub residual: f64,
}

/// Evaluates the right-hand side with `H = 0` and compares it against `tol`.
pub fn is_equilibrium(cfg: &UnitaryConfig, tol: f64) -> Result<EquilibriumCheck> {
    cfg.ensure_valid()?;
    if cfg.h.iter().any(|h| frobenius(h) != 0.0) {
        return Err(Error::invalid("equilibrium check expects H = 0"));
    }
    let residual = crate::dynamics::lohe_matrix_rhs(cfg).max_norm();
    Ok(EquilibriumCheck { is_equilibrium: residual < tol, residual })
}

/// `G_ij = U_i U_j*` and `L_ij = I − G_ij`.
pub fn gram_pair(u: &[CMat], i: usize, j: usize) -> (CMat, CMat) {
    let g = &u[i] * u[j].adjoint();
    let l = cidentity(g.nrows()) - &g;
    (g, l)
}

/// `max_{i,j} |‖L_ij‖_F² − tr(L_ij + L_ji)|`.
pub fn l_identity_residual(u: &[CMat]) -> f64 {
    let n = u.len();
    (0..n)
        .cartesian_product(0..n)
        .map(|(i, j)| {
            let (_, lij) = gram_pair(u, i, j);
            let (_, lji) = gram_pair(u, j, i);
            let f = frobenius(&lij);
            ((lij + lji).trace() - c(f * f, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixAggregationReport {
    pub verdict: AggregationVerdict,
    pub hypothesis: Hypothesis,
    /// `‖V − I‖_F`.
    pub frustration_distance: f64,
    pub initial_diameter: f64,
    /// `√(2 − 3‖V − I‖_F)`, `NaN` when the radicand is negative.
    pub diameter_bound: f64,
    pub final_diameter: f64,
    /// Largest excess of the secant slope over the Riccati bound (negative
    /// when the inequality holds with margin).
    pub riccati_max_excess: f64,
    pub riccati_holds: bool,
    /// Least-squares slope of `−ln D(U)`.
    pub fitted_rate: Option<f64>,
}

/// `−(κ/2)(2 − 3v) D + (κ/2) D³`.
pub fn riccati_bound(kappa: f64, v: f64, d: f64) -> f64 {
    -0.5 * kappa * (2.0 - 3.0 * v) * d + 0.5 * kappa * d.powi(3)
}

/// Integrates the matrix model and checks aggregation and the differential
/// inequality for `D(U)`. Each secant slope between consecutive record
/// points is compared with the larger of the two endpoint bounds.
pub fn matrix_aggregation_check(
    cfg: &UnitaryConfig,
    settings: &IntegratorSettings,
    t_final: f64,
) -> Result<MatrixAggregationReport> {
    cfg.ensure_valid()?;
    let d = cfg.dim();
    let v_dist = frobenius(&(&cfg.v - cidentity(d)));
    let identical_h = match &cfg.h {
        PerOscillator::Shared(_) => true,
        PerOscillator::Individual(h) => h.iter().all(|m| m == &h[0]),
    };
    let initial_diameter = matrix_diameter(&cfg.u);
    let radicand = 2.0 - 3.0 * v_dist;
    let diameter_bound = if radicand >= 0.0 { radicand.sqrt() } else { f64::NAN };
    let certified = identical_h
        && cfg.kappa > 0.0
        && v_dist < 2.0 / 3.0
        && initial_diameter < diameter_bound;

    let mut times = Vec::new();
    let mut diam = Vec::new();
    let last = integrate_flat(cfg, System::initial(cfg), settings, t_final, |t, y| {
        times.push(t);
        diam.push(matrix_diameter(&cfg.decode(y).u));
    })?;
    let final_diameter = matrix_diameter(&cfg.decode(&last).u);

    let mut excess = f64::NEG_INFINITY;
    for k in 1..times.len() {
        let slope = (diam[k] - diam[k - 1]) / (times[k] - times[k - 1]);
        let bound = riccati_bound(cfg.kappa, v_dist, diam[k - 1])
            .max(riccati_bound(cfg.kappa, v_dist, diam[k]));
        excess = excess.max(slope - bound);
    }
    Ok(MatrixAggregationReport {
        verdict: if final_diameter < MATRIX_AGGREGATION_TOL {
            AggregationVerdict::Aggregated
        } else {
            AggregationVerdict::NotAggregated
        },
        hypothesis: if certified { Hypothesis::Certified } else { Hypothesis::Unconditioned },
        frustration_distance: v_dist,
        initial_diameter,
        diameter_bound,
        final_diameter,
        riccati_max_excess: excess,
        riccati_holds: excess <= RICCATI_SLACK,
        fitted_rate: log_linear_rate(&times, &diam, 1e-12),
    })
}

/// Largest Frobenius displacement of any oscillator from its initial state
/// over the run.
pub fn max_displacement(cfg: &UnitaryConfig, settings: &IntegratorSettings, t_final: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    integrate_flat(cfg, System::initial(cfg), settings, t_final, |_, y| {
        for (u, u0) in cfg.decode(y).u.iter().zip(&cfg.u) {
            worst = worst.max(frobenius(&(u - u0)));
        }
    })?;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cyclic_examples() {
        let trivial = cyclic_rep(1).unwrap();
        assert_eq!(trivial.rho[0][(0, 0)], c(1.0, 0.0));
        let r3 = cyclic_rep(3).unwrap();
        assert!(r3.sum_residual() < 1e-15);
        let r4 = cyclic_rep(4).unwrap();
        assert!(r4.homomorphism_residual() < 1e-15);
        assert!((r4.rho[1][(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(cyclic_rep(0).is_err());
    }

    #[test]
    fn symmetric_examples() {
        let s2 = symmetric_standard_rep(2).unwrap();
        assert_eq!(s2.dim(), 1);
        let signs: Vec<f64> = s2.rho.iter().map(|m| m[(0, 0)].re).collect();
        assert!((signs[0] - 1.0).abs() < 1e-15 && (signs[1] + 1.0).abs() < 1e-15);
        let s3 = symmetric_standard_rep(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(s3.sum_residual() < 1e-12);
        assert!((s3.diameter() - 6f64.sqrt()).abs() < 1e-12);
        assert_eq!(s3.elements[0], "123");
        assert_eq!(s3.elements[5], "321");
        assert!(symmetric_standard_rep(1).is_err());
        assert!(symmetric_standard_rep(7).is_err());
    }

    #[test]
    fn representation_residuals() {
        for n in 2..=5 {
            let r = symmetric_standard_rep(n).unwrap();
            assert!(r.homomorphism_residual() < 1e-12);
            assert!(r.unitarity_residual() < 1e-12);
            assert!(r.sum_residual() < 1e-12);
            assert!((r.diameter() - (2.0 * n as f64).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn equilibria_examples() {
        let cfg = cyclic_rep(4).unwrap().to_config(1.0, cidentity(1)).unwrap();
        assert!(is_equilibrium(&cfg, 1e-12).unwrap().is_equilibrium);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = haar_unitary(&mut rng, 2);
        let cfg = symmetric_standard_rep(3).unwrap().to_config(1.0, v).unwrap();
        assert!(is_equilibrium(&cfg, 1e-10).unwrap().residual < 1e-10);

        let cfg = UnitaryConfig::unfrustrated(vec![cidentity(2); 3], 1.0).unwrap();
        assert!(is_equilibrium(&cfg, 1e-14).unwrap().residual < 1e-14);
    }

    #[test]
    fn l_identity_on_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u: Vec<CMat> = (0..4).map(|_| haar_unitary(&mut rng, 3)).collect();
        assert!(l_identity_residual(&u) < 1e-10);
    }

    #[test]
    fn json_export_round_trips_shape() {
        let mut buf = Vec::new();
        symmetric_standard_rep(3).unwrap().write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["matrices"].as_array().unwrap().len(), 6);
        assert_eq!(v["dim"], 2);
    }
}
