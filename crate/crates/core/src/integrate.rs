//! Fixed-step RK4 and Dormand-Prince 5(4) on flat state vectors, with
//! per-step projection back onto the model manifold.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{kuramoto_rhs_into, lohe_matrix_rhs_of, sphere_rhs_into};
use crate::error::{Error, Result};
use crate::linalg::{c, polar_unitary, CMat, RVec};
use crate::state::{PhaseConfig, SphereConfig, UnitaryConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    Dopri5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Fixed { dt: f64 },
    Adaptive { rtol: f64, atol: f64 },
}

/// Retraction applied after every accepted step. `Normalize` and `Polar`
/// both project every manifold component: sphere points are rescaled to
/// unit norm, unitary and orthogonal factors are replaced by their polar
/// factor. The two names are kept for readability of scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    None,
    #[default]
    Normalize,
    Polar,
}

impl Projection {
    pub fn is_active(self) -> bool {
        self != Projection::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    pub step: Step,
    pub projection: Projection,
    pub record_every: usize,
}

impl IntegratorSettings {
    /// RK4 with projection, recording every step.
    pub fn rk4(dt: f64) -> Self {
        IntegratorSettings {
            scheme: Scheme::Rk4,
            step: Step::Fixed { dt },
            projection: Projection::Normalize,
            record_every: 1,
        }
    }

    pub fn dopri5(rtol: f64, atol: f64) -> Self {
        IntegratorSettings {
            scheme: Scheme::Dopri5,
            step: Step::Adaptive { rtol, atol },
            projection: Projection::Normalize,
            record_every: 1,
        }
    }

    /// Dormand-Prince stages on a fixed grid (fifth-order solution, no error
    /// control); used for order studies.
    pub fn dopri5_fixed(dt: f64) -> Self {
        IntegratorSettings {
            scheme: Scheme::Dopri5,
            step: Step::Fixed { dt },
            projection: Projection::Normalize,
            record_every: 1,
        }
    }

    pub fn with_projection(mut self, projection: Projection) -> Self {
        self.projection = projection;
        self
    }

    pub fn with_record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be positive"));
        }
        match (self.scheme, self.step) {
            (_, Step::Fixed { dt }) if !(dt > 0.0 && dt.is_finite()) => {
                Err(Error::invalid(format!("dt must be positive and finite, got {dt}")))
            }
            (Scheme::Rk4, Step::Adaptive { .. }) => {
                Err(Error::invalid("RK4 runs on a fixed step only"))
            }
            (_, Step::Adaptive { rtol, atol })
                if !(rtol > 0.0 && rtol <= 1e-2 && atol > 0.0 && atol <= 1e-2) =>
            {
                Err(Error::invalid(format!(
                    "tolerances must lie in (0, 1e-2], got rtol={rtol}, atol={atol}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// An autonomous ODE on a flat real vector.
pub trait System {
    type State: Clone;

    fn dim(&self) -> usize;
    /// Flat initial condition.
    fn initial(&self) -> Vec<f64>;
    fn decode(&self, y: &[f64]) -> Self::State;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);

    fn project(&self, _y: &mut [f64], _mode: Projection) -> Result<()> {
        Ok(())
    }

    /// Called after every accepted step; the default rejects non-finite
    /// entries.
    fn check(&self, t: f64, y: &[f64]) -> Result<()> {
        if y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { t })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> &S {
        &self.states[0]
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("a trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Evaluates `f` at every record point and stores it under `name`.
    pub fn observe(&mut self, name: impl Into<String>, f: impl Fn(&S) -> f64) -> &[f64] {
        let series: Vec<f64> = self.states.iter().map(f).collect();
        let name = name.into();
        self.observables.insert(name.clone(), series);
        &self.observables[&name]
    }

    pub fn series(&self, f: impl Fn(&S) -> f64) -> Vec<f64> {
        self.states.iter().map(f).collect()
    }
}

/// Integrates `sys` from its own initial condition over `[0, t_final]`.
pub fn integrate<S: System>(
    sys: &S,
    settings: &IntegratorSettings,
    t_final: f64,
) -> Result<Trajectory<S::State>> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_flat(sys, sys.initial(), settings, t_final, |t, y| {
        times.push(t);
        states.push(sys.decode(y));
    })?;
    Ok(Trajectory { times, states, observables: BTreeMap::new() })
}

/// Lower-level driver: calls `record(t, y)` at every record point (always
/// including `t = 0` and `t = t_final`) and returns the final state.
pub fn integrate_flat<S: System>(
    sys: &S,
    mut y: Vec<f64>,
    settings: &IntegratorSettings,
    t_final: f64,
    mut record: impl FnMut(f64, &[f64]),
) -> Result<Vec<f64>> {
    settings.validate()?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::invalid(format!("T_final must be finite and >= 0, got {t_final}")));
    }
    if y.len() != sys.dim() {
        return Err(Error::invalid("initial state has the wrong dimension"));
    }
    sys.project(&mut y, settings.projection)?;
    sys.check(0.0, &y)?;
    record(0.0, &y);
    if t_final == 0.0 {
        return Ok(y);
    }
    let mut ws = Workspace::new(sys.dim());
    match settings.step {
        Step::Fixed { dt } => {
            let steps = fixed_step_count(t_final, dt);
            let h = t_final / steps as f64;
            for k in 1..=steps {
                match settings.scheme {
                    Scheme::Rk4 => rk4_step(sys, &mut y, h, &mut ws),
                    Scheme::Dopri5 => dopri5_step(sys, &mut y, h, &mut ws),
                }
                let t = if k == steps { t_final } else { k as f64 * h };
                sys.project(&mut y, settings.projection)?;
                sys.check(t, &y)?;
                if k % settings.record_every == 0 || k == steps {
                    record(t, &y);
                }
            }
        }
        Step::Adaptive { rtol, atol } => {
            let mut t = 0.0;
            let mut h = initial_step(sys, &y, t_final, rtol, atol, &mut ws);
            let mut accepted = 0usize;
            while t < t_final {
                let last = t + h >= t_final;
                if last {
                    h = t_final - t;
                }
                let err = dopri5_trial(sys, &y, h, &mut ws, rtol, atol);
                if err <= 1.0 {
                    y.copy_from_slice(&ws.y_new);
                    t = if last { t_final } else { t + h };
                    accepted += 1;
                    sys.project(&mut y, settings.projection)?;
                    sys.check(t, &y)?;
                    if accepted.is_multiple_of(settings.record_every) || last {
                        record(t, &y);
                    }
                    if last {
                        break;
                    }
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= if err <= 1.0 { factor } else { factor.min(1.0) };
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
    }
    Ok(y)
}

/// Number of equal steps covering `[0, t_final]` with step at most `dt`.
pub fn fixed_step_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    // Tolerate representation error in ratios like 5 / 1e-3.
    let rounded = ratio.round();
    let steps = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) { rounded } else { ratio.ceil() };
    (steps as usize).max(1)
}

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }
}

fn rk4_step<S: System>(sys: &S, y: &mut [f64], h: f64, ws: &mut Workspace) {
    let n = y.len();
    let [k1, k2, k3, k4, ..] = &mut ws.k;
    sys.rhs(y, k1);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(&ws.tmp, k2);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(&ws.tmp, k3);
    for i in 0..n {
        ws.tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(&ws.tmp, k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Evaluates all seven stages; leaves the fifth-order solution in `ws.y_new`.
fn dopri5_stages<S: System>(sys: &S, y: &[f64], h: f64, ws: &mut Workspace) {
    let n = y.len();
    sys.rhs(y, &mut ws.k[0]);
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[s - 1].iter().enumerate().take(s) {
                acc += a * ws.k[j][i];
            }
            ws.tmp[i] = y[i] + h * acc;
        }
        sys.rhs(&ws.tmp, &mut ws.k[s]);
    }
    // The sixth stage argument is the fifth-order solution.
    for i in 0..n {
        let mut acc = 0.0;
        for (j, a) in A[5].iter().enumerate() {
            acc += a * ws.k[j][i];
        }
        ws.y_new[i] = y[i] + h * acc;
    }
}

fn dopri5_step<S: System>(sys: &S, y: &mut [f64], h: f64, ws: &mut Workspace) {
    dopri5_stages(sys, y, h, ws);
    y.copy_from_slice(&ws.y_new);
}

/// Scaled RMS error estimate of one trial step.
fn dopri5_trial<S: System>(
    sys: &S,
    y: &[f64],
    h: f64,
    ws: &mut Workspace,
    rtol: f64,
    atol: f64,
) -> f64 {
    dopri5_stages(sys, y, h, ws);
    let n = y.len();
    let mut sum = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for (j, w) in E.iter().enumerate() {
            e += w * ws.k[j][i];
        }
        let scale = atol + rtol * y[i].abs().max(ws.y_new[i].abs());
        let r = h * e / scale;
        sum += r * r;
    }
    let err = (sum / n.max(1) as f64).sqrt();
    if err.is_finite() {
        err
    } else {
        f64::INFINITY
    }
}

fn initial_step<S: System>(
    sys: &S,
    y: &[f64],
    t_final: f64,
    rtol: f64,
    atol: f64,
    ws: &mut Workspace,
) -> f64 {
    sys.rhs(y, &mut ws.k[0]);
    let n = y.len().max(1) as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(&ws.k[0]) {
        let sc = atol + rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_final)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    /// Step-halving changed the result by less than round-off.
    Exact,
    Order(f64),
}

impl OrderEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            OrderEstimate::Exact => None,
            OrderEstimate::Order(p) => Some(p),
        }
    }
}

/// Richardson estimate `log2(‖y_h − y_{h/2}‖ / ‖y_{h/2} − y_{h/4}‖)` on the
/// endpoint at `t_final`, without projection.
pub fn convergence_order_with<S: System>(
    sys: &S,
    scheme: Scheme,
    t_final: f64,
    h: f64,
) -> Result<OrderEstimate> {
    let run = |dt: f64| -> Result<Vec<f64>> {
        let settings = IntegratorSettings {
            scheme,
            step: Step::Fixed { dt },
            projection: Projection::None,
            record_every: usize::MAX,
        };
        integrate_flat(sys, sys.initial(), &settings, t_final, |_, _| {})
    };
    let y1 = run(h)?;
    let y2 = run(h / 2.0)?;
    let y4 = run(h / 4.0)?;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let scale = y4.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let e1 = diff(&y1, &y2);
    let e2 = diff(&y2, &y4);
    if e1 <= 1e-13 * scale {
        return Ok(OrderEstimate::Exact);
    }
    Ok(OrderEstimate::Order((e1 / e2).log2()))
}

/// Default protocol: `T = 1`, steps `0.1, 0.05, 0.025`.
pub fn convergence_order<S: System>(sys: &S, scheme: Scheme) -> Result<OrderEstimate> {
    convergence_order_with(sys, scheme, 1.0, 0.1)
}

impl System for PhaseConfig {
    type State = PhaseConfig;

    fn dim(&self) -> usize {
        self.n()
    }

    fn initial(&self) -> Vec<f64> {
        self.theta.clone()
    }

    fn decode(&self, y: &[f64]) -> PhaseConfig {
        self.with_theta(y.to_vec())
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        kuramoto_rhs_into(self, y, dy);
    }
}

impl System for SphereConfig {
    type State = SphereConfig;

    fn dim(&self) -> usize {
        self.n() * self.ambient_dim()
    }

    fn initial(&self) -> Vec<f64> {
        self.x.iter().flat_map(|p| p.iter().copied()).collect()
    }

    fn decode(&self, y: &[f64]) -> SphereConfig {
        self.with_points(y.chunks_exact(self.ambient_dim()).map(RVec::from_column_slice).collect())
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        sphere_rhs_into(self, y, dy);
    }

    fn project(&self, y: &mut [f64], mode: Projection) -> Result<()> {
        if mode.is_active() {
            normalize_blocks(y, self.ambient_dim());
        }
        Ok(())
    }
}

pub(crate) fn normalize_blocks(y: &mut [f64], m: usize) {
    for block in y.chunks_exact_mut(m) {
        let n = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            for v in block.iter_mut() {
                *v /= n;
            }
        }
    }
}

/// Row-major, interleaved `(re, im)` layout of a complex matrix.
pub(crate) fn write_cmat(m: &CMat, out: &mut [f64]) {
    let d = m.nrows();
    for r in 0..d {
        for col in 0..m.ncols() {
            let z = m[(r, col)];
            let idx = 2 * (r * m.ncols() + col);
            out[idx] = z.re;
            out[idx + 1] = z.im;
        }
    }
}

pub(crate) fn read_cmat(y: &[f64], d: usize) -> CMat {
    CMat::from_fn(d, d, |r, col| {
        let idx = 2 * (r * d + col);
        c(y[idx], y[idx + 1])
    })
}

impl UnitaryConfig {
    fn decode_matrices(&self, y: &[f64]) -> Vec<CMat> {
        let d = self.dim();
        y.chunks_exact(2 * d * d).map(|b| read_cmat(b, d)).collect()
    }
}

impl System for UnitaryConfig {
    type State = UnitaryConfig;

    fn dim(&self) -> usize {
        2 * self.n() * self.dim() * self.dim()
    }

    fn initial(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; System::dim(self)];
        for (u, block) in self.u.iter().zip(out.chunks_exact_mut(2 * d * d)) {
            write_cmat(u, block);
        }
        out
    }

    fn decode(&self, y: &[f64]) -> UnitaryConfig {
        self.with_states(self.decode_matrices(y))
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let d = self.dim();
        let u = self.decode_matrices(y);
        let du = lohe_matrix_rhs_of(self, &u);
        for (m, block) in du.iter().zip(dy.chunks_exact_mut(2 * d * d)) {
            write_cmat(m, block);
        }
    }

    fn project(&self, y: &mut [f64], mode: Projection) -> Result<()> {
        if !mode.is_active() {
            return Ok(());
        }
        let d = self.dim();
        for block in y.chunks_exact_mut(2 * d * d) {
            let u = read_cmat(block, d);
            write_cmat(&polar_unitary(&u)?, block);
        }
        Ok(())
    }
}
