//! Conserved and monotone functionals of the three models, a name-based
//! registry for them, and drift reports over trajectories.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::linalg::{frobenius, inverse_with_condition, sorted_eigenvalues, CMat, Complex64, RVec};
use crate::state::{Flavor, PhaseConfig, SphereConfig, UnitaryConfig};

/// Below this magnitude a denominator or pairwise distance counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-14;
/// `J_α` needs `|α| < π/2 − J_ALPHA_MARGIN`.
pub const J_ALPHA_MARGIN: f64 = 1e-9;
/// Inversion in the matrix cross-ratio fails above this condition estimate.
pub const MAX_CONDITION: f64 = 1e12;
/// Drift is measured relative to `max(|v0|, DRIFT_FLOOR)`.
pub const DRIFT_FLOOR: f64 = 1e-8;

fn half_sine(a: f64, b: f64) -> f64 {
    ((a - b) / 2.0).sin()
}

/// `∏_i sin((θ_{i+1} − θ_i)/2)` with `θ_{N+1} = θ_1`.
pub fn functional_i(theta: &[f64]) -> f64 {
    let n = theta.len();
    (0..n).map(|i| half_sine(theta[(i + 1) % n], theta[i])).product()
}

/// `J_α` in log form: `log|J|` and the sign of `J`. A vanishing `I` gives
/// `log_abs = −∞` and sign 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogValue {
    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.abs() < std::f64::consts::FRAC_PI_2 - J_ALPHA_MARGIN) {
        return Err(Error::invalid(format!(
            "J_alpha needs |alpha| < pi/2, got alpha = {alpha}"
        )));
    }
    Ok(())
}

/// `log|I(θ)| + tan α Σθ_j` and the sign of `I`.
pub fn log_j_alpha(theta: &[f64], alpha: f64) -> Result<LogValue> {
    check_alpha(alpha)?;
    let n = theta.len();
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for i in 0..n {
        let s = half_sine(theta[(i + 1) % n], theta[i]);
        if s == 0.0 {
            return Ok(LogValue { log_abs: f64::NEG_INFINITY, sign: 0.0 });
        }
        log_abs += s.abs().ln();
        sign *= s.signum();
    }
    let total: f64 = theta.iter().sum();
    Ok(LogValue { log_abs: log_abs + alpha.tan() * total, sign })
}

/// `I(θ) exp(tan α Σθ_j)`.
pub fn functional_j_alpha(theta: &[f64], alpha: f64) -> Result<f64> {
    Ok(log_j_alpha(theta, alpha)?.value())
}

fn distinct4(n: usize, idx: [usize; 4], min_n: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::invalid(format!("need at least {min_n} oscillators, got {n}")));
    }
    if idx.iter().any(|&i| i >= n) || idx.iter().duplicates().next().is_some() {
        return Err(Error::invalid(format!("indices {idx:?} must be distinct and below {n}")));
    }
    Ok(())
}

/// `(Δ_ab Δ_cd) / (Δ_ac Δ_bd)` with `Δ_ij = sin((θ_i − θ_j)/2)`.
pub fn cross_ratio_k(theta: &[f64], a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
    distinct4(theta.len(), [a, b, c, d], 4)?;
    let den = half_sine(theta[a], theta[c]) * half_sine(theta[b], theta[d]);
    if den.abs() < DEGENERACY_TOL {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(half_sine(theta[a], theta[b]) * half_sine(theta[c], theta[d]) / den)
}

fn dist(x: &[RVec], i: usize, j: usize) -> f64 {
    (&x[i] - &x[j]).norm()
}

/// `(‖x_a − x_b‖ ‖x_c − x_d‖) / (‖x_a − x_c‖ ‖x_b − x_d‖)`.
pub fn sphere_cross_ratio_h(x: &[RVec], a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
    distinct4(x.len(), [a, b, c, d], 4)?;
    let den = dist(x, a, c) * dist(x, b, d);
    if den < DEGENERACY_TOL {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(dist(x, a, b) * dist(x, c, d) / den)
}

/// `ℓ_ab ℓ_cd + ℓ_bc ℓ_ad − ℓ_ac ℓ_bd`; zero iff the four points are
/// concyclic in the order `a, b, c, d`.
pub fn ptolemy_residual(x: &[RVec], a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
    distinct4(x.len(), [a, b, c, d], 4)?;
    Ok(dist(x, a, b) * dist(x, c, d) + dist(x, b, c) * dist(x, a, d)
        - dist(x, a, c) * dist(x, b, d))
}

/// `(R, φ)` with `R e^{iφ} = (1/N) Σ e^{iθ_j}`; `φ = 0` when `R < 1e-14`.
pub fn order_parameter(theta: &[f64]) -> (f64, f64) {
    let n = theta.len() as f64;
    let (s, c) = theta.iter().fold((0.0, 0.0), |(s, c), t| (s + t.sin(), c + t.cos()));
    let (s, c) = (s / n, c / n);
    let r = s.hypot(c).min(1.0);
    let phi = if r < 1e-14 { 0.0 } else { s.atan2(c) };
    (r, phi)
}

pub fn centroid(x: &[RVec]) -> RVec {
    let mut c = RVec::zeros(x[0].len());
    for p in x {
        c += p;
    }
    c / x.len() as f64
}

/// `ρ = ‖x_c‖`.
pub fn sphere_order_parameter(x: &[RVec]) -> f64 {
    centroid(x).norm()
}

/// `θ_max − θ_min` on the unwrapped phases.
pub fn phase_diameter(theta: &[f64]) -> f64 {
    let (lo, hi) = theta
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(*t), hi.max(*t)));
    hi - lo
}

/// `Σ_{i,j} ‖x_i − x_j‖²` over ordered pairs.
pub fn sphere_diameter(x: &[RVec]) -> f64 {
    let mut sum = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            sum += (&x[i] - &x[j]).norm_squared();
        }
    }
    2.0 * sum
}

/// `max_{i,j} (1 − ⟨x_i, x_j⟩)`.
pub fn aggregation_gap(x: &[RVec]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            worst = worst.max(1.0 - x[i].dot(&x[j]));
        }
    }
    worst
}

/// `max_{i,j} ‖x_i − x_j‖`.
pub fn max_pairwise_distance(x: &[RVec]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            worst = worst.max(dist(x, i, j));
        }
    }
    worst
}

/// `max_{i,j} ‖U_i − U_j‖_F`.
pub fn matrix_diameter(u: &[CMat]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            worst = worst.max(frobenius(&(&u[i] - &u[j])));
        }
    }
    worst
}

/// `∏_{i<j} ‖x_i − x_j‖`.
pub fn skew_frustration_product(x: &[RVec]) -> Result<f64> {
    let mut prod = 1.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let d = dist(x, i, j);
            if d < DEGENERACY_TOL {
                return Err(Error::ZeroFactor { i, j });
            }
            prod *= d;
        }
    }
    Ok(prod)
}

/// `C_ijkl = (U_i − U_k)(U_i − U_l)^{-1}(U_j − U_l)(U_j − U_k)^{-1}`.
pub fn matrix_cross_ratio(u: &[CMat], i: usize, j: usize, k: usize, l: usize) -> Result<CMat> {
    let n = u.len();
    if [i, j, k, l].iter().any(|&m| m >= n) || i == l || j == k {
        return Err(Error::invalid(format!(
            "cross-ratio indices ({i}, {j}, {k}, {l}) need i != l, j != k, all below {n}"
        )));
    }
    let inv = |m: CMat| -> Result<CMat> {
        match inverse_with_condition(&m) {
            Some((inv, cond)) if cond < MAX_CONDITION => Ok(inv),
            Some((_, cond)) => Err(Error::SingularDifference { condition: cond }),
            None => Err(Error::SingularDifference { condition: f64::INFINITY }),
        }
    };
    let a = &u[i] - &u[k];
    let b = inv(&u[i] - &u[l])?;
    let c = &u[j] - &u[l];
    let d = inv(&u[j] - &u[k])?;
    Ok(a * b * c * d)
}

/// Eigenvalues of `C_ijkl`, sorted by `(re, im)`.
pub fn matrix_cross_ratio_spectrum(
    u: &[CMat],
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<Vec<Complex64>> {
    Ok(sorted_eigenvalues(&matrix_cross_ratio(u, i, j, k, l)?))
}

/// Residual of the best `m`-dimensional affine fit: the root sum of squares
/// of the singular values of the centered point matrix beyond the `m`
/// largest.
pub fn affine_residual(x: &[RVec], m: usize) -> f64 {
    let c = centroid(x);
    let dim = c.len();
    let mat = crate::linalg::RMat::from_fn(dim, x.len(), |r, col| x[col][r] - c[r]);
    let mut sv: Vec<f64> = mat.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter().skip(m).map(|s| s * s).sum::<f64>().sqrt()
}

/// Borrowed view of any model state, for the functional registry.
#[derive(Debug, Clone, Copy)]
pub enum ModelState<'a> {
    Phase(&'a PhaseConfig),
    Sphere(&'a SphereConfig),
    Unitary(&'a UnitaryConfig),
}

pub trait AsModelState {
    fn model_state(&self) -> ModelState<'_>;
}

impl AsModelState for PhaseConfig {
    fn model_state(&self) -> ModelState<'_> {
        ModelState::Phase(self)
    }
}

impl AsModelState for SphereConfig {
    fn model_state(&self) -> ModelState<'_> {
        ModelState::Sphere(self)
    }
}

impl AsModelState for UnitaryConfig {
    fn model_state(&self) -> ModelState<'_> {
        ModelState::Unitary(self)
    }
}

/// A registered functional, parsed from names such as `I`, `J`,
/// `K:0,1,2,3`, `H:0,1,2,3`, `ptolemy:0,1,2,3`, `rho2`, `D_M`,
/// `skew_product`, `inner:0,1`, `D_U` or `spectrum:0,1,2,3`. Indices are
/// zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    I,
    J,
    K([usize; 4]),
    R,
    SumTheta,
    PhaseDiameter,
    H([usize; 4]),
    Ptolemy([usize; 4]),
    Rho,
    Rho2,
    SphereDiameter,
    AggregationGap,
    SkewProduct,
    Inner(usize, usize),
    MatrixDiameter,
    Spectrum([usize; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Phase,
    Sphere,
    Unitary,
}

fn parse_indices<const K: usize>(name: &str, args: &str) -> Result<[usize; K]> {
    let parsed: std::result::Result<Vec<usize>, _> =
        args.split(',').map(|s| s.trim().parse::<usize>()).collect();
    match parsed {
        Ok(v) if v.len() == K => Ok(std::array::from_fn(|i| v[i])),
        _ => Err(Error::UnknownFunctional(format!("{name} (expected {K} indices)"))),
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let (head, args) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let f = match (head, args) {
            ("I", None) => Functional::I,
            ("J", None) => Functional::J,
            ("K", Some(a)) => Functional::K(parse_indices(name, a)?),
            ("R", None) => Functional::R,
            ("sum_theta", None) => Functional::SumTheta,
            ("D", None) => Functional::PhaseDiameter,
            ("H", Some(a)) => Functional::H(parse_indices(name, a)?),
            ("ptolemy", Some(a)) => Functional::Ptolemy(parse_indices(name, a)?),
            ("rho", None) => Functional::Rho,
            ("rho2", None) => Functional::Rho2,
            ("D_M", None) => Functional::SphereDiameter,
            ("D_A", None) => Functional::AggregationGap,
            ("skew_product", None) => Functional::SkewProduct,
            ("inner", Some(a)) => {
                let [i, j] = parse_indices::<2>(name, a)?;
                Functional::Inner(i, j)
            }
            ("D_U", None) => Functional::MatrixDiameter,
            ("spectrum", Some(a)) => Functional::Spectrum(parse_indices(name, a)?),
            _ => return Err(Error::UnknownFunctional(name.to_string())),
        };
        Ok(f)
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |i: &[usize; 4]| i.iter().join(",");
        match self {
            Functional::I => write!(f, "I"),
            Functional::J => write!(f, "J"),
            Functional::K(i) => write!(f, "K:{}", q(i)),
            Functional::R => write!(f, "R"),
            Functional::SumTheta => write!(f, "sum_theta"),
            Functional::PhaseDiameter => write!(f, "D"),
            Functional::H(i) => write!(f, "H:{}", q(i)),
            Functional::Ptolemy(i) => write!(f, "ptolemy:{}", q(i)),
            Functional::Rho => write!(f, "rho"),
            Functional::Rho2 => write!(f, "rho2"),
            Functional::SphereDiameter => write!(f, "D_M"),
            Functional::AggregationGap => write!(f, "D_A"),
            Functional::SkewProduct => write!(f, "skew_product"),
            Functional::Inner(i, j) => write!(f, "inner:{i},{j}"),
            Functional::MatrixDiameter => write!(f, "D_U"),
            Functional::Spectrum(i) => write!(f, "spectrum:{}", q(i)),
        }
    }
}

/// How a functional is expected to behave along the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Conserved,
    NonIncreasing,
    NonDecreasing,
    /// Identically zero (e.g. the Ptolemy residual of a concyclic quadruple);
    /// checked in absolute terms.
    Vanishing,
    /// Recorded without a verdict.
    Observed,
}

/// A functional value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Log(LogValue),
    Spectrum(Vec<Complex64>),
}

impl Value {
    /// Scalar columns for CSV output.
    pub fn columns(&self) -> Vec<f64> {
        match self {
            Value::Scalar(v) => vec![*v],
            Value::Log(l) => vec![l.value()],
            Value::Spectrum(ev) => ev.iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Headline scalar: the value itself, or the largest eigenvalue modulus.
    pub fn headline(&self) -> f64 {
        match self {
            Value::Scalar(v) => *v,
            Value::Log(l) => l.value(),
            Value::Spectrum(ev) => ev.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }
}

fn wrong_model(f: Functional, found: &str) -> Error {
    Error::invalid(format!("functional {f} does not apply to the {found} model"))
}

impl Functional {
    pub fn family(&self) -> Family {
        use Functional::*;
        match self {
            I | J | K(_) | R | SumTheta | PhaseDiameter => Family::Phase,
            H(_) | Ptolemy(_) | Rho | Rho2 | SphereDiameter | AggregationGap | SkewProduct
            | Inner(..) => Family::Sphere,
            MatrixDiameter | Spectrum(_) => Family::Unitary,
        }
    }

    /// Expands a name into functionals. `K:*`, `H:*` and `ptolemy:*` become
    /// every increasing quadruple `a < b < c < d` of an `n`-oscillator state;
    /// `spectrum:*` becomes the quadruples `(0, 1, 2, 3), (1, 2, 3, 4), ...`.
    pub fn expand(name: &str, n: usize) -> Result<Vec<Functional>> {
        let quads = || (0..n).combinations(4).map(|v| [v[0], v[1], v[2], v[3]]);
        match name {
            "K:*" => Ok(quads().map(Functional::K).collect()),
            "H:*" => Ok(quads().map(Functional::H).collect()),
            "ptolemy:*" => Ok(quads().map(Functional::Ptolemy).collect()),
            "spectrum:*" => Ok((0..n.saturating_sub(3))
                .map(|i| Functional::Spectrum([i, i + 1, i + 2, i + 3]))
                .collect()),
            _ => Ok(vec![name.parse()?]),
        }
    }

    pub fn eval(&self, state: ModelState<'_>) -> Result<Value> {
        use Functional::*;
        let f = *self;
        match (f, state) {
            (I, ModelState::Phase(p)) => Ok(Value::Scalar(functional_i(&p.theta))),
            (J, ModelState::Phase(p)) => Ok(Value::Log(log_j_alpha(&p.theta, p.alpha)?)),
            (K([a, b, c, d]), ModelState::Phase(p)) => {
                Ok(Value::Scalar(cross_ratio_k(&p.theta, a, b, c, d)?))
            }
            (R, ModelState::Phase(p)) => Ok(Value::Scalar(order_parameter(&p.theta).0)),
            (SumTheta, ModelState::Phase(p)) => Ok(Value::Scalar(p.theta.iter().sum())),
            (PhaseDiameter, ModelState::Phase(p)) => Ok(Value::Scalar(phase_diameter(&p.theta))),
            (H([a, b, c, d]), ModelState::Sphere(s)) => {
                Ok(Value::Scalar(sphere_cross_ratio_h(&s.x, a, b, c, d)?))
            }
            (Ptolemy([a, b, c, d]), ModelState::Sphere(s)) => {
                Ok(Value::Scalar(ptolemy_residual(&s.x, a, b, c, d)?))
            }
            (Rho, ModelState::Sphere(s)) => Ok(Value::Scalar(sphere_order_parameter(&s.x))),
            (Rho2, ModelState::Sphere(s)) => {
                Ok(Value::Scalar(sphere_order_parameter(&s.x).powi(2)))
            }
            (SphereDiameter, ModelState::Sphere(s)) => Ok(Value::Scalar(sphere_diameter(&s.x))),
            (AggregationGap, ModelState::Sphere(s)) => Ok(Value::Scalar(aggregation_gap(&s.x))),
            (SkewProduct, ModelState::Sphere(s)) => {
                Ok(Value::Scalar(skew_frustration_product(&s.x)?))
            }
            (Inner(i, j), ModelState::Sphere(s)) => {
                if i >= s.n() || j >= s.n() {
                    return Err(Error::invalid(format!("inner:{i},{j} out of range")));
                }
                Ok(Value::Scalar(s.x[i].dot(&s.x[j])))
            }
            (MatrixDiameter, ModelState::Unitary(u)) => Ok(Value::Scalar(matrix_diameter(&u.u))),
            (Spectrum([i, j, k, l]), ModelState::Unitary(u)) => {
                Ok(Value::Spectrum(matrix_cross_ratio_spectrum(&u.u, i, j, k, l)?))
            }
            (_, ModelState::Phase(_)) => Err(wrong_model(f, "phase")),
            (_, ModelState::Sphere(_)) => Err(wrong_model(f, "sphere")),
            (_, ModelState::Unitary(_)) => Err(wrong_model(f, "matrix")),
        }
    }

    /// Expected behavior given the model parameters of `state`.
    pub fn default_kind(&self, state: ModelState<'_>, initial: &Value) -> Kind {
        use Functional::*;
        let by_sign = |s: f64, inc: Kind, dec: Kind| {
            if s > 0.0 {
                inc
            } else if s < 0.0 {
                dec
            } else {
                Kind::Conserved
            }
        };
        match (self, state) {
            (I | J | K(_) | H(_) | SkewProduct | Inner(..) | Spectrum(_), _) => Kind::Conserved,
            (SumTheta, ModelState::Phase(p)) => {
                // d/dt Σθ = N ν̄ + κ N R² cos α (cosine) or sin α (sine).
                let trig = match p.flavor {
                    Flavor::Cosine => p.alpha.cos(),
                    Flavor::Sine => p.alpha.sin(),
                };
                let drift: f64 = p.nu.iter().sum();
                if drift != 0.0 {
                    Kind::Observed
                } else {
                    by_sign(p.kappa * trig, Kind::NonDecreasing, Kind::NonIncreasing)
                }
            }
            (SphereDiameter, ModelState::Sphere(s)) => {
                by_sign(s.kappa, Kind::NonIncreasing, Kind::NonDecreasing)
            }
            (Rho | Rho2, ModelState::Sphere(s)) => {
                by_sign(s.kappa, Kind::NonDecreasing, Kind::NonIncreasing)
            }
            (Ptolemy(_), _) => {
                if initial.headline().abs() < 1e-12 {
                    Kind::Vanishing
                } else {
                    Kind::Observed
                }
            }
            _ => Kind::Observed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Observed-only functionals carry no verdict.
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

/// Deviation summary of one functional over a trajectory.
///
/// For conserved functionals the deviations are `|F(t) − F(0)|` and that
/// over `max(|F(0)|, 1e-8)`. For monotone functionals they measure the
/// largest step in the wrong direction. For spectra the deviation is the
/// largest eigenvalue displacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub name: String,
    pub kind: Kind,
    pub v0: f64,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
    pub verdict: Verdict,
}

fn log_deviation(a: LogValue, b: LogValue) -> f64 {
    if a.sign != b.sign {
        return if a.sign == 0.0 && b.sign == 0.0 { 0.0 } else { 2.0 };
    }
    if a.sign == 0.0 {
        return 0.0;
    }
    (b.log_abs - a.log_abs).exp_m1().abs()
}

/// Builds a report from the values of one functional along a trajectory.
pub fn drift_of(name: &str, kind: Kind, values: &[Value], tolerance: f64) -> DriftReport {
    let v0 = values.first().map(Value::headline).unwrap_or(0.0);
    let scale = v0.abs().max(DRIFT_FLOOR);
    let (abs_dev, rel_dev) = match kind {
        Kind::Conserved | Kind::Observed | Kind::Vanishing => {
            let mut abs_dev: f64 = 0.0;
            let mut rel_dev: f64 = 0.0;
            for v in values.iter().skip(1) {
                match (&values[0], v) {
                    (Value::Log(a), Value::Log(b)) => {
                        let r = log_deviation(*a, *b);
                        rel_dev = rel_dev.max(r);
                        abs_dev = abs_dev.max(r * v0.abs());
                    }
                    (Value::Spectrum(a), Value::Spectrum(b)) => {
                        let d = a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
                        abs_dev = abs_dev.max(d);
                        rel_dev = rel_dev.max(d / scale);
                    }
                    (a, b) => {
                        let d = (b.headline() - a.headline()).abs();
                        abs_dev = abs_dev.max(d);
                        rel_dev = rel_dev.max(d / scale);
                    }
                }
            }
            (abs_dev, rel_dev)
        }
        Kind::NonIncreasing | Kind::NonDecreasing => {
            let sign = if kind == Kind::NonIncreasing { 1.0 } else { -1.0 };
            let worst = values
                .windows(2)
                .map(|w| sign * (w[1].headline() - w[0].headline()))
                .fold(0.0, f64::max);
            (worst, worst / scale)
        }
    };
    let verdict = match kind {
        Kind::Observed => Verdict::Info,
        Kind::Vanishing => {
            let worst = values.iter().map(|v| v.headline().abs()).fold(0.0, f64::max);
            if worst <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        _ if rel_dev <= tolerance => Verdict::Pass,
        _ => Verdict::Fail,
    };
    DriftReport {
        name: name.to_string(),
        kind,
        v0,
        max_abs_dev: abs_dev,
        max_rel_dev: rel_dev,
        verdict,
    }
}

/// Values of `f` at every recorded state.
pub fn evaluate_along<S: AsModelState>(traj: &Trajectory<S>, f: Functional) -> Result<Vec<Value>> {
    traj.states.iter().map(|s| f.eval(s.model_state())).collect()
}

/// One report per requested functional (names may use the `:*` expansions
/// of [`Functional::expand`]). Kinds follow [`Functional::default_kind`].
pub fn drift_report<S: AsModelState>(
    traj: &Trajectory<S>,
    names: &[&str],
    tolerance: f64,
) -> Result<Vec<DriftReport>> {
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::invalid("drift report needs a non-empty trajectory"))?;
    let n = match first.model_state() {
        ModelState::Phase(p) => p.n(),
        ModelState::Sphere(s) => s.n(),
        ModelState::Unitary(u) => u.n(),
    };
    let mut out = Vec::new();
    for name in names {
        for f in Functional::expand(name, n)? {
            let values = evaluate_along(traj, f)?;
            let kind = f.default_kind(first.model_state(), &values[0]);
            out.push(drift_of(&f.to_string(), kind, &values, tolerance));
        }
    }
    Ok(out)
}

/// Same as [`drift_report`] with an explicit kind for every functional.
pub fn drift_report_as<S: AsModelState>(
    traj: &Trajectory<S>,
    names: &[&str],
    kind: Kind,
    tolerance: f64,
) -> Result<Vec<DriftReport>> {
    let mut reports = drift_report(traj, names, tolerance)?;
    for r in reports.iter_mut() {
        let f: Functional = r.name.parse()?;
        let values = evaluate_along(traj, f)?;
        *r = drift_of(&r.name, kind, &values, tolerance);
    }
    Ok(reports)
}

/// Stores every scalar column of the named functionals in
/// `traj.observables`. Spectra become `name:re0`, `name:im0`, ...
pub fn record_observables<S: AsModelState>(traj: &mut Trajectory<S>, names: &[&str]) -> Result<()> {
    let n = match traj.states.first().map(|s| s.model_state()) {
        Some(ModelState::Phase(p)) => p.n(),
        Some(ModelState::Sphere(s)) => s.n(),
        Some(ModelState::Unitary(u)) => u.n(),
        None => return Ok(()),
    };
    for name in names {
        for f in Functional::expand(name, n)? {
            let values = evaluate_along(traj, f)?;
            let label = f.to_string();
            let width = values[0].columns().len();
            for c in 0..width {
                let col_name = match (&values[0], c) {
                    (Value::Spectrum(_), c) => {
                        format!("{label}:{}{}", if c % 2 == 0 { "re" } else { "im" }, c / 2)
                    }
                    _ => label.clone(),
                };
                let series = values.iter().map(|v| v.columns()[c]).collect();
                traj.observables.insert(col_name, series);
            }
        }
    }
    Ok(())
}

pub fn write_drift_json<W: Write>(reports: &[DriftReport], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

/// Fixed columns: `name, v0, max_abs_dev, max_rel_dev, verdict`.
pub fn write_drift_csv<W: Write>(reports: &[DriftReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["name", "v0", "max_abs_dev", "max_rel_dev", "verdict"])?;
    for r in reports {
        wtr.write_record([
            r.name.clone(),
            format!("{:.16e}", r.v0),
            format!("{:.16e}", r.max_abs_dev),
            format!("{:.16e}", r.max_rel_dev),
            r.verdict.as_str().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Count of consecutive steps moving against `kind` by more than `slack`.
pub fn monotone_violations(series: &[f64], kind: Kind, slack: f64) -> usize {
    let sign = match kind {
        Kind::NonIncreasing => 1.0,
        Kind::NonDecreasing => -1.0,
        _ => return 0,
    };
    series.windows(2).filter(|w| sign * (w[1] - w[0]) > slack).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::state::vec_from;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn square() -> Vec<RVec> {
        vec![
            vec_from(&[1.0, 0.0, 0.0]),
            vec_from(&[0.0, 1.0, 0.0]),
            vec_from(&[-1.0, 0.0, 0.0]),
            vec_from(&[0.0, -1.0, 0.0]),
        ]
    }

    #[test]
    fn functional_i_closed_forms() {
        assert!((functional_i(&[0.0, PI]) + 1.0).abs() < 1e-15);
        assert_eq!(functional_i(&[0.3, 0.3, 1.0]), 0.0);
        let eq = [0.0, PI / 2.0, PI, 1.5 * PI];
        // Three factors sin(π/4) and the wrap-around factor sin(−3π/4).
        let expected = FRAC_1_SQRT_2.powi(3) * (-3.0 * PI / 4.0).sin();
        assert!((functional_i(&eq) - expected).abs() < 1e-15);
        assert!((functional_i(&eq).abs() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn functional_j_closed_forms() {
        let theta = [0.2, 1.7, 2.9];
        assert_eq!(functional_j_alpha(&theta, 0.0).unwrap(), functional_i(&theta));
        let j = functional_j_alpha(&[0.0, PI], PI / 4.0).unwrap();
        assert!((j + PI.exp()).abs() < 1e-12);
        assert!(functional_j_alpha(&theta, PI / 2.0).is_err());
    }

    #[test]
    fn cross_ratio_k_closed_forms() {
        let eq = [0.0, PI / 2.0, PI, 1.5 * PI];
        assert!((cross_ratio_k(&eq, 0, 1, 2, 3).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(cross_ratio_k(&[0.4, 0.4, 1.0, 2.0], 0, 1, 2, 3).unwrap(), 0.0);
        assert!(matches!(
            cross_ratio_k(&[0.0, 1.0, 0.0, 2.0], 0, 1, 2, 3),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn sphere_cross_ratio_and_ptolemy() {
        let x = square();
        assert!((sphere_cross_ratio_h(&x, 0, 1, 2, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!(ptolemy_residual(&x, 0, 1, 2, 3).unwrap().abs() < 1e-15);
        let mut y = x.clone();
        y[1] = y[0].clone();
        assert_eq!(sphere_cross_ratio_h(&y, 0, 1, 2, 3).unwrap(), 0.0);

        let s = 1.0 / 3f64.sqrt();
        let tet = vec![
            vec_from(&[s, s, s]),
            vec_from(&[s, -s, -s]),
            vec_from(&[-s, s, -s]),
            vec_from(&[-s, -s, s]),
        ];
        let edge = dist(&tet, 0, 1);
        let r = ptolemy_residual(&tet, 0, 1, 2, 3).unwrap();
        assert!((r - edge * edge).abs() < 1e-14);
        assert!(r > 0.5);
    }

    #[test]
    fn order_parameters() {
        assert!((order_parameter(&[0.7; 5]).0 - 1.0).abs() < 1e-15);
        let (r, phi) = order_parameter(&[0.0, PI]);
        assert!(r < 1e-15);
        assert_eq!(phi, 0.0);
        assert!((order_parameter(&[0.0, PI / 2.0]).0 - FRAC_1_SQRT_2).abs() < 1e-15);

        let p = vec_from(&[0.0, 0.0, 1.0]);
        assert!((sphere_order_parameter(&[p.clone(), p.clone()]) - 1.0).abs() < 1e-15);
        assert!(sphere_order_parameter(&[p.clone(), -p.clone()]) < 1e-15);
        let q = vec_from(&[1.0, 0.0, 0.0]);
        assert!((sphere_order_parameter(&[p, q]) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn diameters() {
        let p = vec_from(&[0.0, 1.0]);
        assert!((sphere_diameter(&[p.clone(), -p.clone()]) - 8.0).abs() < 1e-15);
        assert_eq!(sphere_diameter(&[p.clone(), p.clone(), p]), 0.0);
        assert_eq!(phase_diameter(&[0.3, 0.3]), 0.0);
        let u = crate::linalg::cidentity(2);
        assert_eq!(matrix_diameter(&[u.clone(), u]), 0.0);
    }

    #[test]
    fn skew_products() {
        let pair = [vec_from(&[1.0, 0.0]), vec_from(&[0.0, 1.0])];
        assert!((skew_frustration_product(&pair).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((skew_frustration_product(&square()).unwrap() - 16.0).abs() < 1e-13);
        let same = [vec_from(&[1.0, 0.0]), vec_from(&[1.0, 0.0])];
        assert!(matches!(
            skew_frustration_product(&same),
            Err(Error::ZeroFactor { i: 0, j: 1 })
        ));
    }

    #[test]
    fn scalar_matrix_cross_ratio() {
        let pts = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let u: Vec<CMat> = pts.iter().map(|z| CMat::from_element(1, 1, *z)).collect();
        // (1 − (−1))(1 − (−i))^{-1}(i − (−i))(i − (−1))^{-1}
        let direct = (pts[0] - pts[2]) / (pts[0] - pts[3]) * (pts[1] - pts[3]) / (pts[1] - pts[2]);
        let ev = matrix_cross_ratio_spectrum(&u, 0, 1, 2, 3).unwrap();
        assert!((ev[0] - direct).norm() < 1e-15);
        assert!((ev[0] - c(2.0, 0.0)).norm() < 1e-15);

        let mut v = u.clone();
        v[2] = v[0].clone();
        let ev = matrix_cross_ratio_spectrum(&v, 0, 1, 2, 3).unwrap();
        assert!(ev.iter().all(|z| z.norm() < 1e-15));
        assert!(matches!(
            matrix_cross_ratio_spectrum(&[u[0].clone(), u[1].clone(), u[2].clone(), u[0].clone()], 0, 1, 2, 3),
            Err(Error::SingularDifference { .. })
        ));
    }

    #[test]
    fn registry_round_trips_names() {
        for name in [
            "I", "J", "K:0,1,2,3", "R", "sum_theta", "D", "H:1,2,3,4", "ptolemy:0,1,2,3", "rho",
            "rho2", "D_M", "D_A", "skew_product", "inner:0,1", "D_U", "spectrum:0,1,2,3",
        ] {
            let f: Functional = name.parse().unwrap();
            assert_eq!(f.to_string(), name);
        }
        assert!(matches!("Q".parse::<Functional>(), Err(Error::UnknownFunctional(_))));
        assert!("K:0,1".parse::<Functional>().is_err());
        assert_eq!(Functional::expand("K:*", 6).unwrap().len(), 15);
    }

    #[test]
    fn constant_trajectory_has_zero_drift() {
        let cfg = PhaseConfig::new(vec![0.0, 1.0, 2.5, 4.0], 1.0, 0.2, Flavor::Cosine).unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![cfg.clone(), cfg.clone(), cfg],
            observables: Default::default(),
        };
        let reports = drift_report(&traj, &["I", "J", "K:*", "sum_theta"], 1e-12).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert_eq!(r.max_abs_dev, 0.0, "{}", r.name);
            assert_eq!(r.verdict, Verdict::Pass);
        }
        assert!(drift_report(&traj, &["nope"], 1e-6).is_err());
    }

    #[test]
    fn monotone_report_flags_wrong_direction() {
        let vals: Vec<Value> = [3.0, 2.0, 2.5, 1.0].iter().map(|v| Value::Scalar(*v)).collect();
        let r = drift_of("D_M", Kind::NonIncreasing, &vals, 1e-9);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!((r.max_abs_dev - 0.5).abs() < 1e-15);
        let r = drift_of("D_M", Kind::NonDecreasing, &vals[2..], 1e-9);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(monotone_violations(&[3.0, 2.0, 2.5, 1.0], Kind::NonIncreasing, 0.0), 1);
    }

    #[test]
    fn csv_has_fixed_columns() {
        let vals = vec![Value::Scalar(1.0), Value::Scalar(1.0 + 1e-9)];
        let r = drift_of("I", Kind::Conserved, &vals, 1e-6);
        let mut buf = Vec::new();
        write_drift_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "name,v0,max_abs_dev,max_rel_dev,verdict");
        assert!(lines.next().unwrap().ends_with(",pass"));
    }

    #[test]
    fn affine_residual_of_planar_points() {
        let pts = vec![
            vec_from(&[1.0, 0.0, 0.3]),
            vec_from(&[0.0, 1.0, 0.3]),
            vec_from(&[-1.0, 0.0, 0.3]),
            vec_from(&[0.5, -0.5, 0.3]),
        ];
        assert!(affine_residual(&pts, 2) < 1e-15);
        assert!(affine_residual(&pts, 1) > 0.1);
    }
}
