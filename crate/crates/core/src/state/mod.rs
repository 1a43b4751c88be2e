//! Configuration types for the phase, sphere and unitary-matrix models.
//!
//! Constructors sanitize their input (unit-normalize sphere points,
//! skew-symmetrize `Omega` and `W`) and then run [`Validate::validate`];
//! struct literals skip both, which is how invalid configurations reach the
//! diagnostics.

mod embed;
pub mod scenario;

pub use scenario::ScenarioSpec;

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cidentity, frobenius, frobenius_real, hermitian_residual, skew_part, skew_residual,
    unitarity_residual, CMat, RMat, RVec,
};

pub use embed::{
    assemble_unitary2, embed_unitary2_to_sphere, pauli, pauli_frustration, pauli_hamiltonian,
    quaternion_matrix,
};


pub const SPHERE_NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const SKEW_TOL: f64 = 1e-14;

/// Coupling function of the phase model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `dθ_j = ν_j + (κ/N) Σ_k sin(θ_k − θ_j + α)`
    Sine,
    /// `dθ_j = ν_j + (κ/N) Σ_k cos(θ_j − θ_k + α)`, the sine flow with
    /// frustration `π/2 − α`.
    Cosine,
}

/// Either one value shared by every oscillator or one value per oscillator.
#[derive(Debug, Clone, PartialEq)]
pub enum PerOscillator<T> {
    Shared(T),
    Individual(Vec<T>),
}

impl<T> PerOscillator<T> {
    pub fn get(&self, i: usize) -> &T {
        match self {
            PerOscillator::Shared(v) => v,
            PerOscillator::Individual(vs) => &vs[i],
        }
    }

    pub fn is_shared(&self) -> bool {
        matches!(self, PerOscillator::Shared(_))
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = &T> + '_> {
        match self {
            PerOscillator::Shared(v) => Box::new(std::iter::once(v)),
            PerOscillator::Individual(vs) => Box::new(vs.iter()),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerOscillator<U> {
        match self {
            PerOscillator::Shared(v) => PerOscillator::Shared(f(v)),
            PerOscillator::Individual(vs) => PerOscillator::Individual(vs.iter().map(f).collect()),
        }
    }

    fn len_matches(&self, n: usize) -> bool {
        match self {
            PerOscillator::Shared(_) => true,
            PerOscillator::Individual(vs) => vs.len() == n,
        }
    }
}

/// One failed invariant, with the offending index (if any) and magnitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub index: Option<usize>,
    pub magnitude: f64,
}

impl Violation {
    fn at(invariant: &'static str, index: usize, magnitude: f64) -> Self {
        Violation { invariant, index: Some(index), magnitude }
    }

    fn global(invariant: &'static str, magnitude: f64) -> Self {
        Violation { invariant, index: None, magnitude }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} at index {} ({:.3e})", self.invariant, i, self.magnitude),
            None => write!(f, "{} ({:.3e})", self.invariant, self.magnitude),
        }
    }
}

pub trait Validate {
    /// Every invariant that fails, empty when the value is well formed.
    fn validate(&self) -> Vec<Violation>;

    fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msg = v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            Err(Error::InvalidArgument(msg))
        }
    }
}

/// Phase-model configuration. Angles are kept unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub theta: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa: f64,
    pub alpha: f64,
    pub flavor: Flavor,
}

impl PhaseConfig {
    /// Identical oscillators (`ν ≡ 0`).
    pub fn new(theta: Vec<f64>, kappa: f64, alpha: f64, flavor: Flavor) -> Result<Self> {
        let nu = vec![0.0; theta.len()];
        Self::with_frequencies(theta, nu, kappa, alpha, flavor)
    }

    pub fn with_frequencies(
        theta: Vec<f64>,
        nu: Vec<f64>,
        kappa: f64,
        alpha: f64,
        flavor: Flavor,
    ) -> Result<Self> {
        let cfg = PhaseConfig { theta, nu, kappa, alpha, flavor };
        cfg.ensure_valid()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        PhaseConfig { theta, ..self.clone() }
    }
}

impl Validate for PhaseConfig {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.theta.is_empty() {
            out.push(Violation::global("N >= 1", 0.0));
        }
        if self.nu.len() != self.theta.len() {
            out.push(Violation::global("frequency count matches N", self.nu.len() as f64));
        }
        for (i, t) in self.theta.iter().enumerate() {
            if !t.is_finite() {
                out.push(Violation::at("finite phase", i, *t));
            }
        }
        for (i, w) in self.nu.iter().enumerate() {
            if !w.is_finite() {
                out.push(Violation::at("finite frequency", i, *w));
            }
        }
        if !self.kappa.is_finite() {
            out.push(Violation::global("finite coupling", self.kappa));
        }
        if !self.alpha.is_finite() {
            out.push(Violation::global("finite frustration", self.alpha));
        }
        out
    }
}

/// Sphere-model configuration with frustration `V = a I + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereConfig {
    pub x: Vec<RVec>,
    pub omega: PerOscillator<RMat>,
    pub kappa: f64,
    pub a: f64,
    pub w: RMat,
}

impl SphereConfig {
    /// Normalizes the points and skew-symmetrizes `omega` and `w`.
    pub fn new(
        x: Vec<RVec>,
        omega: PerOscillator<RMat>,
        kappa: f64,
        a: f64,
        w: RMat,
    ) -> Result<Self> {
        let x = x
            .into_iter()
            .map(|p| {
                let n = p.norm();
                if n > 0.0 {
                    p / n
                } else {
                    p
                }
            })
            .collect();
        let cfg = SphereConfig {
            x,
            omega: omega.map(skew_part),
            kappa,
            a,
            w: skew_part(&w),
        };
        cfg.ensure_valid()?;
        Ok(cfg)
    }

    /// `Ω = 0`, `V = I`.
    pub fn unfrustrated(x: Vec<RVec>, kappa: f64) -> Result<Self> {
        let m = x.first().map(|p| p.len()).unwrap_or(0);
        Self::new(x, PerOscillator::Shared(RMat::zeros(m, m)), kappa, 1.0, RMat::zeros(m, m))
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Ambient dimension `d + 1`.
    pub fn ambient_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn frustration(&self) -> RMat {
        let m = self.ambient_dim();
        RMat::identity(m, m) * self.a + &self.w
    }

    pub fn with_points(&self, x: Vec<RVec>) -> Self {
        SphereConfig { x, ..self.clone() }
    }
}

impl Validate for SphereConfig {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let m = self.w.nrows();
        if self.x.is_empty() {
            out.push(Violation::global("N >= 1", 0.0));
        }
        if self.w.ncols() != m || m < 2 {
            out.push(Violation::global("square frustration of size d+1 >= 2", m as f64));
        }
        for (i, p) in self.x.iter().enumerate() {
            if p.len() != m {
                out.push(Violation::at("point dimension is d+1", i, p.len() as f64));
                continue;
            }
            if p.iter().any(|v| !v.is_finite()) {
                out.push(Violation::at("finite point", i, f64::NAN));
                continue;
            }
            let dev = (p.norm() - 1.0).abs();
            if dev > SPHERE_NORM_TOL {
                out.push(Violation::at("unit norm", i, dev));
            }
        }
        if !self.omega.len_matches(self.x.len()) {
            out.push(Violation::global("one Omega per oscillator", 0.0));
        }
        for (i, om) in self.omega.iter().enumerate() {
            if om.nrows() != m || om.ncols() != m {
                out.push(Violation::at("Omega dimension", i, om.nrows() as f64));
                continue;
            }
            let r = skew_residual(om);
            if r > SKEW_TOL * (1.0 + frobenius_real(om)) {
                out.push(Violation::at("Omega skew-symmetry", i, r));
            }
        }
        if self.w.is_square() {
            let r = skew_residual(&self.w);
            if r > SKEW_TOL * (1.0 + frobenius_real(&self.w)) {
                out.push(Violation::global("W skew-symmetry", r));
            }
        }
        if !self.kappa.is_finite() || !self.a.is_finite() {
            out.push(Violation::global("finite parameters", self.kappa));
        }
        out
    }
}

/// Matrix-model configuration: `N` unitaries, Hamiltonian(s) and unitary
/// frustration `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryConfig {
    pub u: Vec<CMat>,
    pub h: PerOscillator<CMat>,
    pub kappa: f64,
    pub v: CMat,
}

impl UnitaryConfig {
    pub fn new(u: Vec<CMat>, h: PerOscillator<CMat>, kappa: f64, v: CMat) -> Result<Self> {
        let cfg = UnitaryConfig { u, h, kappa, v };
        cfg.ensure_valid()?;
        Ok(cfg)
    }

    /// `H = 0`, `V = I`.
    pub fn unfrustrated(u: Vec<CMat>, kappa: f64) -> Result<Self> {
        let d = u.first().map(|m| m.nrows()).unwrap_or(0);
        Self::new(u, PerOscillator::Shared(CMat::zeros(d, d)), kappa, cidentity(d))
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn with_states(&self, u: Vec<CMat>) -> Self {
        UnitaryConfig { u, ..self.clone() }
    }
}

impl Validate for UnitaryConfig {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let d = self.v.nrows();
        if self.u.is_empty() {
            out.push(Violation::global("N >= 1", 0.0));
        }
        if !self.v.is_square() || d == 0 {
            out.push(Violation::global("square frustration", d as f64));
            return out;
        }
        for (i, u) in self.u.iter().enumerate() {
            if u.nrows() != d || u.ncols() != d {
                out.push(Violation::at("matrix dimension is d", i, u.nrows() as f64));
                continue;
            }
            let r = unitarity_residual(u);
            if !(r <= UNITARY_TOL) {
                out.push(Violation::at("non-unitary", i, r));
            }
        }
        if !self.h.len_matches(self.u.len()) {
            out.push(Violation::global("one Hamiltonian per oscillator", 0.0));
        }
        for (i, h) in self.h.iter().enumerate() {
            if h.nrows() != d || h.ncols() != d {
                out.push(Violation::at("Hamiltonian dimension", i, h.nrows() as f64));
                continue;
            }
            let r = hermitian_residual(h);
            if !(r <= UNITARY_TOL * (1.0 + frobenius(h))) {
                out.push(Violation::at("Hamiltonian not Hermitian", i, r));
            }
        }
        let rv = unitarity_residual(&self.v);
        if !(rv <= UNITARY_TOL) {
            out.push(Violation::global("frustration not unitary", rv));
        }
        if !self.kappa.is_finite() {
            out.push(Violation::global("finite coupling", self.kappa));
        }
        out
    }
}

/// Column vector from a slice.
pub fn vec_from(v: &[f64]) -> RVec {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn exact_unit_sphere_point_validates() {
        let x = vec![vec_from(&[1.0, 0.0, 0.0]), vec_from(&[0.0, 1.0, 0.0])];
        let cfg = SphereConfig::unfrustrated(x, 1.0).unwrap();
        assert!(cfg.validate().is_empty());
    }

    #[test]
    fn scaled_matrix_is_flagged_non_unitary() {
        let mut u1 = cidentity(2);
        u1[(0, 0)] = c(2.0, 0.0);
        let cfg = UnitaryConfig {
            u: vec![cidentity(2), u1],
            h: PerOscillator::Shared(CMat::zeros(2, 2)),
            kappa: 1.0,
            v: cidentity(2),
        };
        let v = cfg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].invariant, "non-unitary");
        assert_eq!(v[0].index, Some(1));
        assert!(UnitaryConfig::new(cfg.u.clone(), cfg.h.clone(), 1.0, cidentity(2)).is_err());
    }

    #[test]
    fn symmetric_w_is_flagged_before_sanitizing() {
        let w = RMat::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let raw = SphereConfig {
            x: vec![vec_from(&[1.0, 0.0])],
            omega: PerOscillator::Shared(RMat::zeros(2, 2)),
            kappa: 1.0,
            a: 1.0,
            w: w.clone(),
        };
        let v = raw.validate();
        assert!(v.iter().any(|x| x.invariant == "W skew-symmetry"));

        // The constructor keeps only the skew part, which is zero here.
        let cfg = SphereConfig::new(raw.x.clone(), raw.omega.clone(), 1.0, 1.0, w).unwrap();
        assert!(cfg.validate().is_empty());
        assert_eq!(cfg.w, RMat::zeros(2, 2));
    }

    #[test]
    fn constructor_normalizes_points() {
        let cfg = SphereConfig::unfrustrated(vec![vec_from(&[3.0, 4.0])], 1.0).unwrap();
        assert!((cfg.x[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_config_rejects_non_finite() {
        assert!(PhaseConfig::new(vec![0.0, f64::NAN], 1.0, 0.0, Flavor::Sine).is_err());
        assert!(PhaseConfig::new(vec![], 1.0, 0.0, Flavor::Sine).is_err());
        let cfg = PhaseConfig::new(vec![0.0, 7.0], 1.0, 0.2, Flavor::Cosine).unwrap();
        assert!(cfg.validate().is_empty());
    }
}
