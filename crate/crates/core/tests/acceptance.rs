//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so every line is printed on success as well as failure.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use synclab::equilibria::{
    cyclic_rep, is_equilibrium, matrix_aggregation_check, max_displacement, symmetric_standard_rep,
};
use synclab::integrate::{integrate, IntegratorSettings};
use synclab::invariants::{
    drift_report, drift_report_as, evaluate_along, max_pairwise_distance, sphere_order_parameter,
    DriftReport, Functional, Kind, Verdict,
};
use synclab::linalg::{cidentity, haar_unitary, random_skew, RMat, RVec};
use synclab::reduce_kuramoto::{co_integrate, dichotomy_check, Dichotomy};
use synclab::reduce_sphere::{
    sphere_aggregation_check, sphere_reduction_chain, AggregationVerdict, Hypothesis,
};
use synclab::equilibria::EQUILIBRIUM_TOL;
use synclab::sample::{
    cluster_points, concyclic_points, random_phases, uniform_phases, uniform_points,
    unitary_cluster, unitary_near_identity,
};
use synclab::state::{Flavor, PerOscillator, PhaseConfig, SphereConfig, UnitaryConfig};

const DT: f64 = 1e-3;
/// Relative drift bound for conserved functionals.
const DRIFT_TOL: f64 = 1e-6;
/// Coarse step pair for the drift scaling measurement; at `DT` the drift is
/// already at the round-off floor.
const COARSE_DT: (f64, f64) = (0.04, 0.02);
const HALVING_RANGE: (f64, f64) = (12.0, 20.0);
/// Wrong-direction step allowed in monotonicity checks (round-off only).
const MONOTONE_SLACK: f64 = 1e-12;

type Outcome = (bool, String);

fn worst(reports: &[DriftReport]) -> f64 {
    reports.iter().map(|r| r.max_rel_dev).fold(0.0, f64::max)
}

fn all_pass(reports: &[DriftReport]) -> bool {
    reports.iter().all(|r| r.verdict == Verdict::Pass)
}

fn phase_drift(theta: &[f64], alpha: f64, name: &str, dt: f64) -> Vec<DriftReport> {
    let cfg = PhaseConfig::new(theta.to_vec(), 1.0, alpha, Flavor::Cosine).unwrap();
    let traj = integrate(&cfg, &IntegratorSettings::rk4(dt), 5.0).unwrap();
    drift_report(&traj, &[name], DRIFT_TOL).unwrap()
}

fn c1_conservation_of_i() -> Outcome {
    let theta = random_phases(&mut ChaCha8Rng::seed_from_u64(101), 6);
    let fine = worst(&phase_drift(&theta, 0.0, "I", DT));
    let coarse = worst(&phase_drift(&theta, 0.0, "I", COARSE_DT.0));
    let half = worst(&phase_drift(&theta, 0.0, "I", COARSE_DT.1));
    let ratio = coarse / half;
    let ok = fine < DRIFT_TOL && (HALVING_RANGE.0..=HALVING_RANGE.1).contains(&ratio);
    (ok, format!("drift {fine:.2e} at dt=1e-3; halving ratio {ratio:.2} (dt {} -> {})", COARSE_DT.0, COARSE_DT.1))
}

fn c2_conservation_of_j() -> Outcome {
    let theta = random_phases(&mut ChaCha8Rng::seed_from_u64(102), 6);
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [-0.4, 0.3, 1.2] {
        let r = phase_drift(&theta, alpha, "J", DT);
        ok &= all_pass(&r);
        parts.push(format!("alpha={alpha}: {:.2e}", worst(&r)));
    }
    (ok, parts.join(", "))
}

fn c3_conservation_of_k() -> Outcome {
    let theta = random_phases(&mut ChaCha8Rng::seed_from_u64(103), 6);
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [-FRAC_PI_2, 0.3, FRAC_PI_2] {
        let r = phase_drift(&theta, alpha, "K:*", DT);
        ok &= r.len() == 15 && all_pass(&r);
        parts.push(format!("alpha={alpha:.4}: {:.2e} over {} quadruples", worst(&r), r.len()));
    }
    (ok, parts.join(", "))
}

fn c4_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let sync_theta = uniform_phases(&mut rng, 6, 0.0, 0.9);
    let incoh_theta = random_phases(&mut rng, 6);
    let settings = IntegratorSettings::rk4(DT);
    let sync = dichotomy_check(&sync_theta, 0.5, 1.0, 60.0, &settings).unwrap();
    let incoh = dichotomy_check(&incoh_theta, -0.5, 1.0, 200.0, &settings).unwrap();
    let ok = sync.verdict == Dichotomy::SyncR1
        && sync.r_final > 0.999
        && sync.branch == Some(1)
        && incoh.verdict == Dichotomy::IncoherenceR0
        && incoh.r_final < 1e-3
        && incoh.branch == Some(2)
        && incoh.sum_theta_monotone
        && sync.sum_theta_monotone;
    (
        ok,
        format!(
            "R(60) = {:.6} (alpha=0.5); R(200) = {:.2e} (alpha=-0.5), max decrease of sum theta {:.1e}",
            sync.r_final, incoh.r_final, incoh.sum_theta_max_decrease
        ),
    )
}

fn c5_kuramoto_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut max_err: f64 = 0.0;
    let mut max_excess: f64 = 0.0;
    let mut max_cross: f64 = 0.0;
    for n in [4, 6, 8] {
        for alpha in [0.0, 0.4, FRAC_PI_2] {
            let cfg = PhaseConfig::new(random_phases(&mut rng, n), 1.0, alpha, Flavor::Sine).unwrap();
            let (_, rep) = co_integrate(&cfg, &IntegratorSettings::rk4(DT), 3.0).unwrap();
            max_err = max_err.max(rep.max_error);
            max_excess = max_excess.max(rep.bound_excess);
            max_cross = max_cross.max(rep.cross_ratio_residual);
        }
    }
    let ok = max_err < 1e-5 && max_excess <= 1e-6 && max_cross < 1e-6;
    (
        ok,
        format!("max reconstruction error {max_err:.2e}, bound excess {max_excess:.1e}, cross-ratio residual {max_cross:.1e}"),
    )
}

fn c6_sphere_cross_ratio_and_ptolemy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut ok = true;
    let mut worst_h: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for ambient in [3, 4] {
        for shared_omega in [false, true] {
            let omega = if shared_omega {
                random_skew(&mut rng, ambient, 1.0)
            } else {
                RMat::zeros(ambient, ambient)
            };
            let build = |x: Vec<RVec>| {
                SphereConfig::new(x, PerOscillator::Shared(omega.clone()), 1.0, 1.0, RMat::zeros(ambient, ambient))
                    .unwrap()
            };
            let settings = IntegratorSettings::rk4(DT);
            let cfg = build(uniform_points(&mut rng, 6, ambient));
            let traj = integrate(&cfg, &settings, 5.0).unwrap();
            let h = drift_report(&traj, &["H:*"], DRIFT_TOL).unwrap();
            ok &= h.len() == 15 && all_pass(&h);
            worst_h = worst_h.max(worst(&h));

            let circle = build(concyclic_points(&mut rng, 6, ambient, 0.4).unwrap());
            let traj = integrate(&circle, &settings, 5.0).unwrap();
            let p = drift_report(&traj, &["ptolemy:*"], DRIFT_TOL).unwrap();
            ok &= p.iter().all(|r| r.kind == Kind::Vanishing && r.verdict == Verdict::Pass);
            let pmax = p.iter().map(|r| r.v0.abs() + r.max_abs_dev).fold(0.0, f64::max);
            worst_p = worst_p.max(pmax);
        }
    }
    ok &= worst_p < 1e-6;
    (ok, format!("H drift {worst_h:.2e}; concyclic Ptolemy residual {worst_p:.2e} (d in {{2,3}}, Omega zero and shared)"))
}

fn c7_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let x = uniform_points(&mut rng, 6, 3);
    let settings = IntegratorSettings::rk4(DT);
    let mut ok = true;
    let mut parts = Vec::new();
    for (kappa, kind) in [(1.0, Kind::NonIncreasing), (-1.0, Kind::NonDecreasing)] {
        let cfg = SphereConfig::unfrustrated(x.clone(), kappa).unwrap();
        let traj = integrate(&cfg, &settings, 5.0).unwrap();
        let r = drift_report_as(&traj, &["D_M"], kind, MONOTONE_SLACK).unwrap();
        ok &= all_pass(&r);
        parts.push(format!("D_M kappa={kappa}: worst step {:.1e}", r[0].max_abs_dev));
    }
    // V = 2 I rescaled to unit operator norm is V = I with coupling 2.
    let cfg = SphereConfig::new(
        x.clone(),
        PerOscillator::Shared(RMat::zeros(3, 3)),
        2.0,
        1.0,
        RMat::zeros(3, 3),
    )
    .unwrap();
    let traj = integrate(&cfg, &settings, 5.0).unwrap();
    let r = drift_report_as(&traj, &["rho2"], Kind::NonDecreasing, MONOTONE_SLACK).unwrap();
    ok &= all_pass(&r);
    parts.push(format!("rho^2 (V=I): worst step {:.1e}", r[0].max_abs_dev));
    // V = I + W with |W|_op = 0.5, divided by |V|_op = sqrt(1 + 0.25).
    let w = random_skew(&mut rng, 3, 1.0);
    let w = &w * (0.5 / synclab::linalg::operator_norm(&w));
    let v_op = 1.25f64.sqrt();
    let cfg = SphereConfig::new(x, PerOscillator::Shared(RMat::zeros(3, 3)), 1.0, 1.0 / v_op, w / v_op)
        .unwrap();
    let traj = integrate(&cfg, &settings, 5.0).unwrap();
    let r = drift_report_as(&traj, &["rho2"], Kind::NonDecreasing, MONOTONE_SLACK).unwrap();
    ok &= all_pass(&r);
    parts.push(format!("rho^2 (V=aI+W normalized): worst step {:.1e}", r[0].max_abs_dev));
    (ok, parts.join(", "))
}

fn c8_sphere_chain() -> Outcome {
    let x = uniform_points(&mut ChaCha8Rng::seed_from_u64(108), 5, 3);
    let cfg = SphereConfig::unfrustrated(x, 1.0).unwrap();
    let rep = sphere_reduction_chain(&cfg, &IntegratorSettings::rk4(DT), 3.0).unwrap();
    let three_way = rep.full_vs_stereo.max(rep.stereo_vs_reduced).max(rep.full_vs_reduced);
    let ok = three_way < 1e-4 && rep.orthogonality < 1e-8 && rep.min_a > 0.0 && rep.inner_product_law < 1e-5;
    (
        ok,
        format!(
            "three-way discrepancy {three_way:.2e}, orthogonality {:.1e}, min a {:.4}, inner-product law {:.1e}",
            rep.orthogonality, rep.min_a, rep.inner_product_law
        ),
    )
}

fn c9_sphere_aggregation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let x = cluster_points(&mut rng, 5, 3, 0.5).unwrap();
    let w = random_skew(&mut rng, 3, 1.0);
    let w = &w * (0.1 / synclab::linalg::operator_norm(&w));
    let cfg = SphereConfig::new(x, PerOscillator::Shared(RMat::zeros(3, 3)), 1.0, 1.0, w).unwrap();
    let rep = sphere_aggregation_check(&cfg, &IntegratorSettings::rk4(DT), 30.0).unwrap();
    let rate = rep.fitted_rate.unwrap_or(0.0);
    let ok = rep.hypothesis == Hypothesis::Certified
        && rep.verdict == AggregationVerdict::Aggregated
        && rate >= 0.5 * rep.predicted_rate;
    (
        ok,
        format!(
            "final distance {:.1e}, fitted rate {rate:.3} vs predicted {:.3} (|W|_op {:.3}, |W|_F {:.3})",
            rep.final_max_distance, rep.predicted_rate, rep.w_operator_norm, rep.w_frobenius_norm
        ),
    )
}

fn c10_skew_frustration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let settings = IntegratorSettings::rk4(DT);
    let skew = |x: Vec<RVec>, w: RMat| {
        SphereConfig::new(x, PerOscillator::Shared(RMat::zeros(3, 3)), 1.0, 0.0, w).unwrap()
    };
    let pair = skew(uniform_points(&mut rng, 2, 3), random_skew(&mut rng, 3, 1.0));
    let traj = integrate(&pair, &settings, 20.0).unwrap();
    let inner = drift_report(&traj, &["inner:0,1"], DRIFT_TOL).unwrap();

    let five = skew(uniform_points(&mut rng, 5, 3), random_skew(&mut rng, 3, 1.0));
    let traj = integrate(&five, &settings, 20.0).unwrap();
    let prod = drift_report(&traj, &["skew_product"], DRIFT_TOL).unwrap();
    let closest = traj
        .states
        .iter()
        .map(|s| {
            let mut m = f64::INFINITY;
            for i in 0..s.n() {
                for j in i + 1..s.n() {
                    m = m.min((&s.x[i] - &s.x[j]).norm());
                }
            }
            m
        })
        .fold(f64::INFINITY, f64::min);
    let ok = all_pass(&inner) && all_pass(&prod) && closest > 1e-3;
    (
        ok,
        format!(
            "<x1,x2> drift {:.2e}, product drift {:.2e}, closest approach {closest:.3}",
            worst(&inner),
            worst(&prod)
        ),
    )
}

fn c11_matrix_aggregation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let settings = IntegratorSettings::rk4(DT);
    let plain = UnitaryConfig::unfrustrated(unitary_cluster(&mut rng, 5, 2, 1.2).unwrap(), 1.0).unwrap();
    let a = matrix_aggregation_check(&plain, &settings, 40.0).unwrap();
    let v = unitary_near_identity(&mut rng, 2, 0.3).unwrap();
    let frustrated = UnitaryConfig::new(
        unitary_cluster(&mut rng, 5, 2, 1.0).unwrap(),
        PerOscillator::Shared(synclab::linalg::CMat::zeros(2, 2)),
        1.0,
        v,
    )
    .unwrap();
    let b = matrix_aggregation_check(&frustrated, &settings, 40.0).unwrap();
    let ok = [&a, &b].iter().all(|r| {
        r.hypothesis == Hypothesis::Certified
            && r.verdict == AggregationVerdict::Aggregated
            && r.riccati_holds
    });
    (
        ok,
        format!(
            "V=I: D(40) = {:.1e}, Riccati excess {:.1e}; |V-I|_F=0.3: D(40) = {:.1e}, Riccati excess {:.1e}",
            a.final_diameter, a.riccati_max_excess, b.final_diameter, b.riccati_max_excess
        ),
    )
}

fn c12_matrix_spectra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let u = (0..5).map(|_| haar_unitary(&mut rng, 2)).collect();
    let cfg = UnitaryConfig::unfrustrated(u, 1.0).unwrap();
    let traj = integrate(&cfg, &IntegratorSettings::rk4(DT), 3.0).unwrap();
    let quads = [[0, 1, 2, 3], [1, 2, 3, 4], [0, 2, 1, 4], [4, 3, 0, 1]];
    let mut worst_dev: f64 = 0.0;
    for q in quads {
        let values = evaluate_along(&traj, Functional::Spectrum(q)).unwrap();
        let r = synclab::invariants::drift_of("spectrum", Kind::Conserved, &values, DRIFT_TOL);
        worst_dev = worst_dev.max(r.max_abs_dev);
    }
    (worst_dev < 1e-5, format!("max sorted-eigenvalue drift {worst_dev:.2e} over {} quadruples", quads.len()))
}

fn c13_equilibria() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    let settings = IntegratorSettings::rk4(DT);
    let mut worst_res: f64 = 0.0;
    let mut worst_move: f64 = 0.0;
    let mut worst_diam: f64 = 0.0;
    let mut cfgs = Vec::new();
    for n in [3, 4, 5] {
        cfgs.push(cyclic_rep(n).unwrap().to_config(1.0, cidentity(1)).unwrap());
    }
    for n in [3, 4] {
        let rep = symmetric_standard_rep(n).unwrap();
        worst_diam = worst_diam.max((rep.diameter() - (2.0 * n as f64).sqrt()).abs());
        let v = haar_unitary(&mut rng, n - 1);
        cfgs.push(rep.to_config(1.0, v).unwrap());
    }
    for cfg in &cfgs {
        worst_res = worst_res.max(is_equilibrium(cfg, EQUILIBRIUM_TOL).unwrap().residual);
        worst_move = worst_move.max(max_displacement(cfg, &settings, 10.0).unwrap());
    }
    let ok = worst_res < 1e-10 && worst_diam < 1e-10 && worst_move < 1e-6;
    (
        ok,
        format!("residual {worst_res:.1e}, |D - sqrt(2n)| {worst_diam:.1e}, displacement over T=10 {worst_move:.1e}"),
    )
}

fn c14_pole_count() -> Outcome {
    let mut worst_minority = 0usize;
    let settings = IntegratorSettings::rk4(DT).with_record_every(50_000);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1400 + seed);
        let omega = random_skew(&mut rng, 3, 1.0);
        let x = uniform_points(&mut rng, 8, 3);
        let cfg = SphereConfig::new(x, PerOscillator::Shared(omega), 1.0, 1.0, RMat::zeros(3, 3)).unwrap();
        let traj = integrate(&cfg, &settings, 50.0).unwrap();
        let last = &traj.last().x;
        // The north pole is the direction of the final centroid.
        let c = synclab::invariants::centroid(last);
        let north = last.iter().filter(|x| x.dot(&c) >= 0.0).count();
        worst_minority = worst_minority.max(north.min(last.len() - north));
        debug_assert!(sphere_order_parameter(last) > 0.0 || max_pairwise_distance(last) > 0.0);
    }
    (worst_minority <= 1, format!("largest minority hemisphere over 20 runs: {worst_minority}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("conservation of I", c1_conservation_of_i),
        ("conservation of J_alpha", c2_conservation_of_j),
        ("conservation of K_abcd", c3_conservation_of_k),
        ("dichotomy", c4_dichotomy),
        ("Kuramoto (f, g) reduction", c5_kuramoto_reduction),
        ("sphere cross-ratio and Ptolemy", c6_sphere_cross_ratio_and_ptolemy),
        ("monotonicity of D_M and rho^2", c7_monotonicity),
        ("sphere (a, b, M) reduction chain", c8_sphere_chain),
        ("sphere aggregation", c9_sphere_aggregation),
        ("skew-frustration conservation", c10_skew_frustration),
        ("matrix aggregation", c11_matrix_aggregation),
        ("matrix cross-ratio spectra", c12_matrix_spectra),
        ("group-representation equilibria", c13_equilibria),
        ("pole-count constraint", c14_pole_count),
    ];
    let results: Vec<(Outcome, f64)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let start = Instant::now();
            let out = f();
            (out, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for (k, ((name, _), ((ok, detail), secs))) in criteria.iter().zip(results).enumerate() {
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  {detail} [{secs:.1}s]",
            k + 1,
            name,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
