//! Stereographic reduction of the identical sine-coupled phase model to the
//! affine pair `(f, g)`: with `x_j = cot((θ_j − θ_N)/2)` every projected
//! point moves as `x_j(t) = g(t) + f(t) x_j(0)`.

use std::f64::consts::{FRAC_PI_2, PI};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, integrate_flat, IntegratorSettings, System, Trajectory};
use crate::invariants::order_parameter;
use crate::state::{Flavor, PhaseConfig};

/// Wrapped phase differences below this count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;
/// Default threshold `ε` of the dichotomy classification.
pub const DICHOTOMY_EPS: f64 = 1e-3;
/// Relative round-off slack in the monotonicity of `Σθ_j`.
pub const SUM_THETA_SLACK: f64 = 1e-12;

/// `β` reduced to `(−π, π]`.
fn wrap(beta: f64) -> f64 {
    let r = beta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `x = cot(β/2)` for `β = θ_j − θ_N`, evaluated as `(1 + cos β)/sin β` or
/// `sin β/(1 − cos β)`, whichever has the larger denominator.
pub fn stereo_project_phase(theta_j: f64, theta_n: f64) -> Result<f64> {
    let beta = wrap(theta_j - theta_n);
    if beta.abs() < COINCIDENCE_TOL {
        return Err(Error::CoincidentPhase { beta: beta.abs() });
    }
    let (s, c) = beta.sin_cos();
    if s.abs() > (1.0 - c).abs() {
        Ok((1.0 + c) / s)
    } else {
        Ok(s / (1.0 - c))
    }
}

/// Projected initial data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedPhaseData {
    /// `x_j(0)` of the `N − m` non-coincident oscillators.
    pub x0: Vec<f64>,
    /// Oscillators sharing the reference phase, the reference included.
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    /// Frustration of the sine form `sin(θ_k − θ_j + α)`.
    pub alpha: f64,
    /// `order[k]` is the original index of the `k`-th rearranged oscillator;
    /// the first `N − m` entries match `x0`, the trailing `m` coincide with
    /// the reference.
    pub order: Vec<usize>,
    /// Original index of the reference oscillator (the last one).
    pub reference: usize,
}

impl ProjectedPhaseData {
    /// Projects relative to the last oscillator. Cosine-flavor configs are
    /// converted to the sine form with frustration `π/2 − α`. Frequencies
    /// must be identical; a common frequency only rotates the frame.
    pub fn from_config(cfg: &PhaseConfig) -> Result<Self> {
        use crate::state::Validate;
        cfg.ensure_valid()?;
        if cfg.nu.iter().any(|w| (w - cfg.nu[0]).abs() > 0.0) {
            return Err(Error::invalid("the reduction needs identical natural frequencies"));
        }
        let alpha = match cfg.flavor {
            Flavor::Sine => cfg.alpha,
            Flavor::Cosine => FRAC_PI_2 - cfg.alpha,
        };
        let n = cfg.n();
        let reference = n - 1;
        let theta_n = cfg.theta[reference];
        let (mut free, mut tied) = (Vec::new(), Vec::new());
        for (j, t) in cfg.theta.iter().enumerate() {
            if j != reference && wrap(t - theta_n).abs() >= COINCIDENCE_TOL {
                free.push(j);
            } else if j != reference {
                tied.push(j);
            }
        }
        tied.push(reference);
        let x0 = free
            .iter()
            .map(|&j| stereo_project_phase(cfg.theta[j], theta_n))
            .collect::<Result<Vec<_>>>()?;
        let m = tied.len();
        let order = free.into_iter().chain(tied).collect();
        Ok(ProjectedPhaseData { x0, m, n, kappa: cfg.kappa, alpha, order, reference })
    }
}

/// `(A, B)` of the projected flow `ẋ_j = A + B x_j`.
pub fn ab_coefficients(x: &[f64], m: usize, n: usize, kappa: f64, alpha: f64) -> (f64, f64) {
    let (sa, ca) = alpha.sin_cos();
    let mut a = m as f64 * sa;
    let mut b = m as f64 * ca;
    for xk in x {
        let q = xk * xk + 1.0;
        let s = 2.0 * xk / q; // sin β_k
        let c = (xk * xk - 1.0) / q; // cos β_k
        a += s * ca + c * sa;
        b += -s * sa + c * ca;
    }
    let scale = kappa / n as f64;
    (scale * a, scale * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedKuramotoState {
    pub f: f64,
    pub g: f64,
}

/// The `(f, g)` system driven by the frozen projected data.
pub struct FgSystem<'a> {
    pub data: &'a ProjectedPhaseData,
}

impl FgSystem<'_> {
    fn coefficients(&self, f: f64, g: f64) -> (f64, f64) {
        let d = self.data;
        let (sa, ca) = d.alpha.sin_cos();
        let mut a = d.m as f64 * sa;
        let mut b = d.m as f64 * ca;
        for x0 in &d.x0 {
            let x = f * x0 + g;
            let q = x * x + 1.0;
            let s = 2.0 * x / q;
            let c = (x * x - 1.0) / q;
            a += s * ca + c * sa;
            b += -s * sa + c * ca;
        }
        let scale = d.kappa / d.n as f64;
        (scale * a, scale * b)
    }
}

impl System for FgSystem<'_> {
    type State = ReducedKuramotoState;

    fn dim(&self) -> usize {
        2
    }

    fn initial(&self) -> Vec<f64> {
        vec![1.0, 0.0]
    }

    fn decode(&self, y: &[f64]) -> ReducedKuramotoState {
        ReducedKuramotoState { f: y[0], g: y[1] }
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let (a, b) = self.coefficients(y[0], y[1]);
        dy[0] = b * y[0];
        dy[1] = a + b * y[1];
    }

    /// Rejects `f ≤ 0` and any a-priori bound exceeded by more than 10 %.
    fn check(&self, t: f64, y: &[f64]) -> Result<()> {
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let growth = (self.data.kappa.abs() * t).exp();
        if y[0] <= 0.0 {
            return Err(Error::IntegratorFailure(format!("f = {} <= 0 at t = {t}", y[0])));
        }
        if y[0].abs() > 1.1 * growth || y[1].abs() > 1.1 * (growth - 1.0) + 1e-9 {
            return Err(Error::IntegratorFailure(format!(
                "a-priori bound exceeded at t = {t}: f = {}, g = {}",
                y[0], y[1]
            )));
        }
        Ok(())
    }
}

pub fn integrate_fg(
    data: &ProjectedPhaseData,
    settings: &IntegratorSettings,
    t_final: f64,
) -> Result<Trajectory<ReducedKuramotoState>> {
    integrate(&FgSystem { data }, settings, t_final)
}

/// Largest relative excess over `|f| ≤ e^{|κ|t}` and `|g| ≤ e^{|κ|t} − 1`
/// (zero when both bounds hold). The `g` bound carries an absolute floor of
/// `1e-9`.
pub fn bound_excess(traj: &Trajectory<ReducedKuramotoState>, kappa: f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            let growth = (kappa.abs() * t).exp();
            let ef = s.f.abs() / growth - 1.0;
            let eg = if growth - 1.0 > 0.0 {
                (s.g.abs() - 1e-9) / (growth - 1.0) - 1.0
            } else {
                s.g.abs() - 1e-9
            };
            ef.max(eg).max(0.0)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    /// `max |g + f x_j(0) − x_j(t)|` over record points and oscillators.
    pub max_error: f64,
    /// Original index of the oscillator attaining `max_error`.
    pub worst_index: Option<usize>,
    /// Largest residual of `(x_i − x_j)(t)(x_k⁰ − x_l⁰) = (x_i⁰ − x_j⁰)(x_k − x_l)(t)`,
    /// scaled by `max(1, |terms|)`.
    pub cross_ratio_residual: f64,
    pub bound_excess: f64,
}

/// Compares the affine reconstruction with the projected full trajectory.
pub fn reconstruct_and_compare(
    full: &Trajectory<PhaseConfig>,
    reduced: &Trajectory<ReducedKuramotoState>,
    data: &ProjectedPhaseData,
) -> Result<ReconstructionReport> {
    if full.times.len() != reduced.times.len()
        || full.times.iter().zip(&reduced.times).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::MismatchedGrids);
    }
    let k = data.x0.len();
    let pairs: Vec<(usize, usize)> = (0..k).tuple_combinations().collect();
    let mut max_error: f64 = 0.0;
    let mut worst_index = None;
    let mut cross: f64 = 0.0;
    let mut xt = vec![0.0; k];
    for (state, red) in full.states.iter().zip(&reduced.states) {
        let theta_n = state.theta[data.reference];
        for (slot, &orig) in data.order.iter().take(k).enumerate() {
            xt[slot] = stereo_project_phase(state.theta[orig], theta_n)?;
            let err = (red.g + red.f * data.x0[slot] - xt[slot]).abs();
            if err > max_error {
                max_error = err;
                worst_index = Some(orig);
            }
        }
        for &(i, j) in &pairs {
            for &(p, q) in &pairs {
                let lhs = (xt[i] - xt[j]) * (data.x0[p] - data.x0[q]);
                let rhs = (data.x0[i] - data.x0[j]) * (xt[p] - xt[q]);
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                cross = cross.max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok(ReconstructionReport {
        max_error,
        worst_index,
        cross_ratio_residual: cross,
        bound_excess: bound_excess(reduced, data.kappa),
    })
}

/// Integrates the full flow and the `(f, g)` system on the same grid and
/// compares them.
pub fn co_integrate(
    cfg: &PhaseConfig,
    settings: &IntegratorSettings,
    t_final: f64,
) -> Result<(ProjectedPhaseData, ReconstructionReport)> {
    let data = ProjectedPhaseData::from_config(cfg)?;
    let full = integrate(cfg, settings, t_final)?;
    let reduced = integrate_fg(&data, settings, t_final)?;
    let report = reconstruct_and_compare(&full, &reduced, &data)?;
    Ok((data, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    SyncR1,
    IncoherenceR0,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub verdict: Dichotomy,
    pub r_final: f64,
    /// Which hypothesis branch applies, if any.
    pub branch: Option<u8>,
    /// Description of the violated hypothesis, if neither branch applies.
    pub precondition_violation: Option<String>,
    /// Largest decrease of `Σθ_j` between consecutive steps.
    pub sum_theta_max_decrease: f64,
    /// No step decreased `Σθ_j` by more than round-off
    /// (`1e-12 · max(1, |Σθ_j|)`).
    pub sum_theta_monotone: bool,
}

/// Integrates the cosine flow from `theta0` and classifies `R(T)`.
pub fn dichotomy_check(
    theta0: &[f64],
    alpha: f64,
    kappa: f64,
    t_final: f64,
    settings: &IntegratorSettings,
) -> Result<DichotomyReport> {
    dichotomy_check_with(theta0, alpha, kappa, t_final, settings, DICHOTOMY_EPS)
}

pub fn dichotomy_check_with(
    theta0: &[f64],
    alpha: f64,
    kappa: f64,
    t_final: f64,
    settings: &IntegratorSettings,
    eps: f64,
) -> Result<DichotomyReport> {
    let cfg = PhaseConfig::new(theta0.to_vec(), kappa, alpha, Flavor::Cosine)?;
    let spread = theta0
        .iter()
        .tuple_combinations()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let distinct = theta0
        .iter()
        .tuple_combinations()
        .all(|(a, b)| wrap(a - b).abs() >= COINCIDENCE_TOL);
    let (branch, violation) = if alpha > 0.0 && alpha < FRAC_PI_2 && spread < 2.0 * alpha {
        (Some(1), None)
    } else if alpha < 0.0 && alpha > -FRAC_PI_2 && distinct {
        (Some(2), None)
    } else {
        (
            None,
            Some(format!(
                "neither 0 < alpha < pi/2 with spread {spread:.3} < 2 alpha nor \
                 -pi/2 < alpha < 0 with distinct phases (alpha = {alpha})"
            )),
        )
    };

    let mut prev_sum: Option<f64> = None;
    let mut max_decrease: f64 = 0.0;
    let mut monotone = true;
    let settings = settings.with_record_every(1);
    let last = integrate_flat(&cfg, cfg.theta.clone(), &settings, t_final, |_, y| {
        let s: f64 = y.iter().sum();
        if let Some(p) = prev_sum {
            max_decrease = max_decrease.max(p - s);
            monotone &= p - s <= SUM_THETA_SLACK * s.abs().max(1.0);
        }
        prev_sum = Some(s);
    })?;
    let r_final = order_parameter(&last).0;
    let verdict = if r_final > 1.0 - eps {
        Dichotomy::SyncR1
    } else if r_final < eps {
        Dichotomy::IncoherenceR0
    } else {
        Dichotomy::Inconclusive
    };
    Ok(DichotomyReport {
        verdict,
        r_final,
        branch,
        precondition_violation: violation,
        sum_theta_max_decrease: max_decrease,
        sum_theta_monotone: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn projection_closed_forms() {
        assert!((stereo_project_phase(PI / 2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(stereo_project_phase(PI, 0.0).unwrap().abs() < 1e-15);
        assert!((stereo_project_phase(FRAC_PI_3, 0.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            stereo_project_phase(2.0 * PI + 0.3, 0.3),
            Err(Error::CoincidentPhase { .. })
        ));
        // Both closed forms agree where both are well conditioned.
        for beta in [0.3, 1.2, 2.0, -0.7, -2.9, 3.1] {
            let x = stereo_project_phase(beta, 0.0).unwrap();
            assert!((x - 1.0 / (beta / 2.0).tan()).abs() < 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn coefficient_closed_forms() {
        let (a, b) = ab_coefficients(&[], 5, 5, 1.3, 0.0);
        assert_eq!(a, 0.0);
        assert!((b - 1.3).abs() < 1e-15);
        let n = 6;
        let (a, b) = ab_coefficients(&[0.0], n - 1, n, 1.0, FRAC_PI_2);
        assert!((a - (n as f64 - 2.0) / n as f64).abs() < 1e-15);
        assert!(b.abs() < 1e-15);
    }

    #[test]
    fn rearrangement_moves_coincident_phases_last() {
        let cfg = PhaseConfig::new(vec![0.5, 1.0, 0.5 + 2.0 * PI, 2.0, 0.5], 1.0, 0.2, Flavor::Sine)
            .unwrap();
        let data = ProjectedPhaseData::from_config(&cfg).unwrap();
        assert_eq!(data.m, 3);
        assert_eq!(data.order, vec![1, 3, 0, 2, 4]);
        assert_eq!(data.x0.len(), 2);
    }

    #[test]
    fn frozen_flow_keeps_identity() {
        let cfg = PhaseConfig::new(vec![0.1, 1.0, 2.0, 4.0], 0.0, 0.3, Flavor::Sine).unwrap();
        let data = ProjectedPhaseData::from_config(&cfg).unwrap();
        let traj = integrate_fg(&data, &IntegratorSettings::rk4(0.01), 1.0).unwrap();
        for s in &traj.states {
            assert_eq!(s.f, 1.0);
            assert_eq!(s.g, 0.0);
        }
    }

    #[test]
    fn all_coincident_matches_linear_solution() {
        let (kappa, alpha) = (0.8, 0.4);
        let cfg = PhaseConfig::new(vec![0.7; 4], kappa, alpha, Flavor::Sine).unwrap();
        let data = ProjectedPhaseData::from_config(&cfg).unwrap();
        assert_eq!(data.m, 4);
        let traj = integrate_fg(&data, &IntegratorSettings::rk4(1e-3), 2.0).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let e = (kappa * alpha.cos() * t).exp();
            assert!((s.f - e).abs() < 1e-12);
            assert!((s.g - alpha.tan() * (e - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_tracks_full_flow() {
        let cfg =
            PhaseConfig::new(vec![0.2, 1.4, 2.3, 3.9, 5.1], 1.0, 0.3, Flavor::Sine).unwrap();
        let (_, report) = co_integrate(&cfg, &IntegratorSettings::rk4(1e-3), 3.0).unwrap();
        assert!(report.max_error < 1e-8, "{report:?}");
        assert!(report.cross_ratio_residual < 1e-8);
        assert_eq!(report.bound_excess, 0.0);

        let (_, zero) = co_integrate(&cfg, &IntegratorSettings::rk4(1e-3), 0.0).unwrap();
        assert_eq!(zero.max_error, 0.0);
    }

    #[test]
    fn single_oscillator_is_synchronized() {
        let r = dichotomy_check(&[1.3], 0.5, 1.0, 1.0, &IntegratorSettings::rk4(0.01)).unwrap();
        assert_eq!(r.verdict, Dichotomy::SyncR1);
        assert!((r.r_final - 1.0).abs() < 1e-15);
    }
}
