//! Scenario files: a JSON description of one model, its initial data, the
//! integrator, the functionals to record and check, and optional analyses.
//!
//! Parsing reports errors with a JSON pointer to the offending value, both
//! for schema errors (wrong type, unknown field) and for semantic ones
//! (negative step, unknown functional). The schema is documented in
//! `schemas/scenario.schema.json`.

use std::f64::consts::TAU;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::equilibria::{cyclic_rep, symmetric_standard_rep};
use crate::error::{Error, Result};
use crate::integrate::{IntegratorSettings, Projection, Scheme, Step};
use crate::invariants::{Family, Functional, Kind};
use crate::linalg::{
    c, cidentity, haar_unitary, operator_norm, random_hermitian, random_skew, CMat, RMat, RVec,
};
use crate::reduce_kuramoto::Dichotomy;
use crate::reduce_sphere::AggregationVerdict;
use crate::sample;
use crate::state::{
    pauli_frustration, pauli_hamiltonian, Flavor, PerOscillator, PhaseConfig, SphereConfig,
    UnitaryConfig,
};

/// Step used when a scenario names neither `dt` nor tolerances.
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Complex matrix as rows of `[re, im]` pairs.
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub t_final: f64,
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Kuramoto(KuramotoSpec),
    Sphere(SphereSpec),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KuramotoSpec {
    pub flavor: Flavor,
    pub kappa: f64,
    #[serde(default)]
    pub alpha: f64,
    /// One shared frequency or one per oscillator; zero when absent.
    #[serde(default)]
    pub nu: Option<Frequencies>,
    pub theta: PhaseInit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequencies {
    Shared(f64),
    Individual(Vec<f64>),
}

fn tau() -> f64 {
    TAU
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseInit {
    Explicit(Vec<f64>),
    /// Independent uniform draws on `[low, high)`.
    Uniform {
        n: usize,
        #[serde(default)]
        low: f64,
        #[serde(default = "tau")]
        high: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub kappa: f64,
    /// Frustration `V = a I + W`.
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub w: Option<RealMatrixSpec>,
    #[serde(default)]
    pub omega: Option<OmegaSpec>,
    /// Divide `a` and `W` by `‖a I + W‖_op`.
    #[serde(default)]
    pub normalize_frustration: bool,
    pub points: PointInit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealMatrixSpec {
    Explicit(Vec<Vec<f64>>),
    /// Gaussian skew matrix, optionally rescaled to a given operator norm.
    RandomSkew {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        op_norm: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSpec {
    Shared(RealMatrixSpec),
    Individual(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointInit {
    /// Points in `R^{d+1}`, normalized on load.
    Explicit(Vec<Vec<f64>>),
    /// `dim` is the ambient dimension `d + 1`.
    Uniform { n: usize, dim: usize },
    Cluster { n: usize, dim: usize, gap: f64 },
    Concyclic {
        n: usize,
        dim: usize,
        #[serde(default)]
        height: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub kappa: f64,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default)]
    pub frustration: Option<UnitarySpec>,
    pub states: UnitaryInit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianSpec {
    Shared(ComplexRows),
    Individual(Vec<ComplexRows>),
    /// `Σ ω_k σ_k + ν I` on `U(2)`.
    Pauli {
        omega: [f64; 3],
        #[serde(default)]
        nu: f64,
    },
    /// One Gaussian Hermitian matrix shared by every oscillator.
    RandomHermitian { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitarySpec {
    Identity,
    Explicit(ComplexRows),
    Haar,
    /// `‖V − I‖_F` equal to `distance`.
    NearIdentity { distance: f64 },
    /// Unit quaternion coordinates on `U(2)`.
    Pauli([f64; 4]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryInit {
    Explicit(Vec<ComplexRows>),
    Haar { n: usize, d: usize },
    /// Maximal pairwise Frobenius distance equal to `diameter`.
    Cluster { n: usize, d: usize, diameter: f64 },
    /// Image of the one-dimensional representation of `Z_n`.
    Cyclic { n: usize },
    /// Image of the standard representation of `S_n`.
    Symmetric { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "rk4")]
    pub scheme: Scheme,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub rtol: Option<f64>,
    #[serde(default)]
    pub atol: Option<f64>,
    #[serde(default)]
    pub projection: Projection,
    #[serde(default = "one_usize")]
    pub record_every: usize,
}

fn rk4() -> Scheme {
    Scheme::Rk4
}

fn one_usize() -> usize {
    1
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            scheme: Scheme::Rk4,
            dt: None,
            rtol: None,
            atol: None,
            projection: Projection::default(),
            record_every: 1,
        }
    }
}

impl IntegratorSpec {
    /// Adaptive stepping when `dopri5` is paired with tolerances, otherwise a
    /// fixed step.
    pub fn resolve(&self) -> Result<IntegratorSettings> {
        let adaptive = self.rtol.is_some() || self.atol.is_some();
        if adaptive && self.scheme == Scheme::Rk4 {
            return Err(Error::scenario("/integrator/rtol", "tolerances need scheme dopri5"));
        }
        if adaptive && self.dt.is_some() {
            return Err(Error::scenario("/integrator/dt", "give either dt or tolerances"));
        }
        let step = if adaptive {
            let rtol = self.rtol.unwrap_or(1e-10);
            Step::Adaptive { rtol, atol: self.atol.unwrap_or(rtol) }
        } else {
            Step::Fixed { dt: self.dt.unwrap_or(DEFAULT_DT) }
        };
        let settings = IntegratorSettings {
            scheme: self.scheme,
            step,
            projection: self.projection,
            record_every: self.record_every,
        };
        settings.validate().map_err(|e| {
            let field = match (step, self.record_every) {
                (_, 0) => "record_every",
                (Step::Fixed { .. }, _) => "dt",
                (Step::Adaptive { .. }, _) => "rtol",
            };
            Error::scenario(format!("/integrator/{field}"), e.to_string())
        })?;
        Ok(settings)
    }
}

/// A functional checked along the trajectory. The expected behavior defaults
/// to the one implied by the model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub functional: String,
    #[serde(default)]
    pub kind: Option<Kind>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn aggregated() -> AggregationVerdict {
    AggregationVerdict::Aggregated
}

fn half() -> f64 {
    0.5
}

/// Analyses reuse the scenario's model, integrator and `t_final`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisSpec {
    /// Cosine phase model: classify `R(T)` and check `Σθ` monotonicity.
    Dichotomy {
        #[serde(default)]
        eps: Option<f64>,
        #[serde(default)]
        expect: Option<Dichotomy>,
    },
    /// Identical phase oscillators: compare with the `(f, g)` reconstruction.
    KuramotoReduction {
        #[serde(default = "kuramoto_reduction_tol")]
        tolerance: f64,
    },
    /// Unfrustrated sphere model: full, `(y, x_N)` and `(a, b, M)` flows.
    SphereReductionChain {
        #[serde(default = "sphere_chain_tol")]
        tolerance: f64,
    },
    SphereAggregation {
        #[serde(default = "aggregated")]
        expect: AggregationVerdict,
        /// Fitted rate must reach this fraction of the predicted one.
        #[serde(default = "half")]
        rate_fraction: f64,
    },
    MatrixAggregation {
        #[serde(default = "aggregated")]
        expect: AggregationVerdict,
    },
    Equilibrium {
        #[serde(default = "equilibrium_tol")]
        tolerance: f64,
        /// Bound on `max_j ‖U_j(t) − U_j(0)‖_F` over the run.
        #[serde(default)]
        displacement: Option<f64>,
    },
    /// Richardson order estimate of the configured scheme.
    ConvergenceOrder { min: f64, max: f64 },
    /// Smallest pairwise distance between sphere oscillators stays above `min`.
    Separation { min: f64 },
    /// Final state: at most `max_minority` points in the hemisphere opposite
    /// the centroid.
    PoleCount {
        #[serde(default = "one_usize")]
        max_minority: usize,
    },
}

fn kuramoto_reduction_tol() -> f64 {
    1e-5
}

fn sphere_chain_tol() -> f64 {
    1e-4
}

fn equilibrium_tol() -> f64 {
    crate::equilibria::EQUILIBRIUM_TOL
}

impl AnalysisSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisSpec::Dichotomy { .. } => "dichotomy",
            AnalysisSpec::KuramotoReduction { .. } => "kuramoto_reduction",
            AnalysisSpec::SphereReductionChain { .. } => "sphere_reduction_chain",
            AnalysisSpec::SphereAggregation { .. } => "sphere_aggregation",
            AnalysisSpec::MatrixAggregation { .. } => "matrix_aggregation",
            AnalysisSpec::Equilibrium { .. } => "equilibrium",
            AnalysisSpec::ConvergenceOrder { .. } => "convergence_order",
            AnalysisSpec::Separation { .. } => "separation",
            AnalysisSpec::PoleCount { .. } => "pole_count",
        }
    }

    fn family(&self) -> Option<Family> {
        match self {
            AnalysisSpec::Dichotomy { .. } | AnalysisSpec::KuramotoReduction { .. } => {
                Some(Family::Phase)
            }
            AnalysisSpec::SphereReductionChain { .. }
            | AnalysisSpec::SphereAggregation { .. }
            | AnalysisSpec::Separation { .. }
            | AnalysisSpec::PoleCount { .. } => Some(Family::Sphere),
            AnalysisSpec::MatrixAggregation { .. } | AnalysisSpec::Equilibrium { .. } => {
                Some(Family::Unitary)
            }
            AnalysisSpec::ConvergenceOrder { .. } => None,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Write `trajectory.csv`.
    #[serde(default = "yes")]
    pub trajectory: bool,
    /// Write gnuplot `.dat` mirrors of the observable series.
    #[serde(default = "yes")]
    pub dat: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { trajectory: true, dat: true }
    }
}

/// A built model with its initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Phase(PhaseConfig),
    Sphere(SphereConfig),
    Unitary(UnitaryConfig),
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Phase(_) => Family::Phase,
            Model::Sphere(_) => Family::Sphere,
            Model::Unitary(_) => Family::Unitary,
        }
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Phase => "kuramoto",
        Family::Sphere => "sphere",
        Family::Unitary => "matrix",
    }
}

/// Converts a deserializer path such as `model.kuramoto.theta[2]` into the
/// pointer `/model/kuramoto/theta/2`.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn real_matrix(rows: &[Vec<f64>], pointer: &str) -> Result<RMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::scenario(pointer, "expected a non-empty square matrix"));
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn complex_matrix(rows: &ComplexRows, pointer: &str) -> Result<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::scenario(pointer, "expected a non-empty square matrix"));
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Inverse of the `[re, im]` row encoding.
pub fn complex_rows(m: &CMat) -> ComplexRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn at(pointer: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Scenario { .. } => e,
        other => Error::scenario(pointer, other.to_string()),
    }
}

impl ScenarioSpec {
    /// Parses and validates a scenario document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ScenarioSpec = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::scenario(pointer_of(e.path()), e.inner().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn model_family(&self) -> Family {
        match self.model {
            ModelSpec::Kuramoto(_) => Family::Phase,
            ModelSpec::Sphere(_) => Family::Sphere,
            ModelSpec::Matrix(_) => Family::Unitary,
        }
    }

    /// Semantic checks the schema cannot express. Errors carry a JSON
    /// pointer.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty()
            || !self.id.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch))
        {
            return Err(Error::scenario("/id", "id must be non-empty and use [A-Za-z0-9._-]"));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::scenario("/t_final", "t_final must be finite and >= 0"));
        }
        if let Some(dt) = self.integrator.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::scenario("/integrator/dt", "dt must be positive and finite"));
            }
        }
        self.integrator.resolve()?;
        let family = self.model_family();
        let check_name = |name: &str, pointer: String| -> Result<()> {
            let probe = name.strip_suffix(":*").map(|h| match h {
                "K" | "H" | "ptolemy" | "spectrum" => Ok(format!("{h}:0,1,2,3")),
                _ => Err(Error::scenario(&pointer, format!("`{name}` has no `:*` expansion"))),
            });
            let parsed = match probe {
                Some(p) => p?.parse::<Functional>(),
                None => name.parse::<Functional>(),
            }
            .map_err(|e| Error::scenario(&pointer, e.to_string()))?;
            if parsed.family() != family {
                return Err(Error::scenario(
                    &pointer,
                    format!("`{name}` does not apply to the {} model", family_name(family)),
                ));
            }
            Ok(())
        };
        for (i, name) in self.observables.iter().enumerate() {
            check_name(name, format!("/observables/{i}"))?;
        }
        for (i, chk) in self.checks.iter().enumerate() {
            check_name(&chk.functional, format!("/checks/{i}/functional"))?;
            if !(chk.tolerance > 0.0 && chk.tolerance.is_finite()) {
                return Err(Error::scenario(format!("/checks/{i}/tolerance"), "tolerance must be positive"));
            }
        }
        for (i, an) in self.analyses.iter().enumerate() {
            if let Some(f) = an.family() {
                if f != family {
                    return Err(Error::scenario(
                        format!("/analyses/{i}"),
                        format!("{} needs the {} model", an.name(), family_name(f)),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Resolved integrator settings.
    pub fn settings(&self) -> Result<IntegratorSettings> {
        self.integrator.resolve()
    }

    /// Builds the model. Random draws come from `ChaCha8Rng` seeded with
    /// `seed`, initial data first, then the parameters.
    pub fn build(&self) -> Result<Model> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match &self.model {
            ModelSpec::Kuramoto(k) => build_phase(k, &mut rng).map(Model::Phase),
            ModelSpec::Sphere(s) => build_sphere(s, &mut rng).map(Model::Sphere),
            ModelSpec::Matrix(m) => build_unitary(m, &mut rng).map(Model::Unitary),
        }
    }

    /// Canonical JSON: keys sorted, defaults filled in, no whitespace.
    pub fn canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&value)?)
    }

    /// Git-style content hash: SHA-256 of `blob <len>\0<canonical json>`.
    pub fn content_hash(&self) -> Result<String> {
        let body = self.canonical_json()?;
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", body.len()).as_bytes());
        h.update(body.as_bytes());
        Ok(hex::encode(h.finalize()))
    }

    /// Applies a `--dt` override: fixed step, tolerances dropped.
    pub fn override_dt(&mut self, dt: f64) {
        self.integrator.dt = Some(dt);
        self.integrator.rtol = None;
        self.integrator.atol = None;
    }
}

fn build_phase(k: &KuramotoSpec, rng: &mut ChaCha8Rng) -> Result<PhaseConfig> {
    let theta = match &k.theta {
        PhaseInit::Explicit(t) => t.clone(),
        PhaseInit::Uniform { n, low, high } => {
            if !(low < high) {
                return Err(Error::scenario("/model/kuramoto/theta/uniform", "need low < high"));
            }
            sample::uniform_phases(rng, *n, *low, *high)
        }
    };
    let nu = match &k.nu {
        None => vec![0.0; theta.len()],
        Some(Frequencies::Shared(v)) => vec![*v; theta.len()],
        Some(Frequencies::Individual(v)) => v.clone(),
    };
    PhaseConfig::with_frequencies(theta, nu, k.kappa, k.alpha, k.flavor).map_err(at("/model/kuramoto"))
}

fn real_spec(spec: &RealMatrixSpec, dim: usize, rng: &mut ChaCha8Rng, pointer: &str) -> Result<RMat> {
    match spec {
        RealMatrixSpec::Explicit(rows) => {
            let m = real_matrix(rows, pointer)?;
            if m.nrows() != dim {
                return Err(Error::scenario(pointer, format!("expected a {dim}x{dim} matrix")));
            }
            Ok(m)
        }
        RealMatrixSpec::RandomSkew { scale, op_norm } => {
            let w = random_skew(rng, dim, *scale);
            Ok(match op_norm {
                Some(target) => {
                    let n = operator_norm(&w);
                    if n > 0.0 {
                        w * (*target / n)
                    } else {
                        w
                    }
                }
                None => w,
            })
        }
    }
}

fn build_sphere(s: &SphereSpec, rng: &mut ChaCha8Rng) -> Result<SphereConfig> {
    let ptr = "/model/sphere/points";
    let x: Vec<RVec> = match &s.points {
        PointInit::Explicit(pts) => {
            if pts.is_empty() {
                return Err(Error::scenario(ptr, "no points"));
            }
            pts.iter().map(|p| RVec::from_column_slice(p)).collect()
        }
        PointInit::Uniform { n, dim } => sample::uniform_points(rng, *n, *dim),
        PointInit::Cluster { n, dim, gap } => {
            sample::cluster_points(rng, *n, *dim, *gap).map_err(at(ptr))?
        }
        PointInit::Concyclic { n, dim, height } => {
            sample::concyclic_points(rng, *n, *dim, *height).map_err(at(ptr))?
        }
    };
    let dim = x[0].len();
    let mut w = match &s.w {
        Some(spec) => real_spec(spec, dim, rng, "/model/sphere/w")?,
        None => RMat::zeros(dim, dim),
    };
    let omega = match &s.omega {
        None => PerOscillator::Shared(RMat::zeros(dim, dim)),
        Some(OmegaSpec::Shared(spec)) => {
            PerOscillator::Shared(real_spec(spec, dim, rng, "/model/sphere/omega/shared")?)
        }
        Some(OmegaSpec::Individual(ms)) => PerOscillator::Individual(
            ms.iter()
                .enumerate()
                .map(|(i, m)| real_matrix(m, &format!("/model/sphere/omega/individual/{i}")))
                .collect::<Result<_>>()?,
        ),
    };
    let mut a = s.a;
    if s.normalize_frustration {
        let v = RMat::identity(dim, dim) * a + &w;
        let n = operator_norm(&v);
        if n == 0.0 {
            return Err(Error::scenario("/model/sphere/normalize_frustration", "V = 0"));
        }
        a /= n;
        w /= n;
    }
    SphereConfig::new(x, omega, s.kappa, a, w).map_err(at("/model/sphere"))
}

fn build_unitary(m: &MatrixSpec, rng: &mut ChaCha8Rng) -> Result<UnitaryConfig> {
    let ptr = "/model/matrix/states";
    let u: Vec<CMat> = match &m.states {
        UnitaryInit::Explicit(ms) => ms
            .iter()
            .enumerate()
            .map(|(i, r)| complex_matrix(r, &format!("{ptr}/explicit/{i}")))
            .collect::<Result<_>>()?,
        UnitaryInit::Haar { n, d } => sample::haar_states(rng, *n, *d),
        UnitaryInit::Cluster { n, d, diameter } => {
            sample::unitary_cluster(rng, *n, *d, *diameter).map_err(at(ptr))?
        }
        UnitaryInit::Cyclic { n } => cyclic_rep(*n).map_err(at(ptr))?.rho,
        UnitaryInit::Symmetric { n } => symmetric_standard_rep(*n).map_err(at(ptr))?.rho,
    };
    let d = u.first().map(|x| x.nrows()).ok_or_else(|| Error::scenario(ptr, "no states"))?;
    let vptr = "/model/matrix/frustration";
    let v = match &m.frustration {
        None | Some(UnitarySpec::Identity) => cidentity(d),
        Some(UnitarySpec::Explicit(r)) => complex_matrix(r, vptr)?,
        Some(UnitarySpec::Haar) => haar_unitary(rng, d),
        Some(UnitarySpec::NearIdentity { distance }) => {
            sample::unitary_near_identity(rng, d, *distance).map_err(at(vptr))?
        }
        Some(UnitarySpec::Pauli(q)) => pauli_frustration(*q).map_err(at(vptr))?,
    };
    let hptr = "/model/matrix/hamiltonian";
    let h = match &m.hamiltonian {
        None => PerOscillator::Shared(CMat::zeros(d, d)),
        Some(HamiltonianSpec::Shared(r)) => PerOscillator::Shared(complex_matrix(r, hptr)?),
        Some(HamiltonianSpec::Individual(rs)) => PerOscillator::Individual(
            rs.iter()
                .enumerate()
                .map(|(i, r)| complex_matrix(r, &format!("{hptr}/individual/{i}")))
                .collect::<Result<_>>()?,
        ),
        Some(HamiltonianSpec::Pauli { omega, nu }) => {
            PerOscillator::Shared(pauli_hamiltonian(*omega, *nu))
        }
        Some(HamiltonianSpec::RandomHermitian { scale }) => {
            PerOscillator::Shared(random_hermitian(rng, d, *scale))
        }
    };
    UnitaryConfig::new(u, h, m.kappa, v).map_err(at("/model/matrix"))
}
