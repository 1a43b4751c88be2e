//! Seeded initial-data generators.
//!
//! Every generator takes an explicit RNG; the CLI uses `ChaCha8Rng` seeded
//! from the scenario so runs are reproducible.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::error::{Error, Result};
use crate::invariants::{aggregation_gap, matrix_diameter};
use crate::linalg::{cayley, cidentity, frobenius, haar_unitary, random_anti_hermitian, random_unit_vector, CMat, RVec};

/// The name of the generator recorded in run manifests.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// Bisection for `f(s) = target` on `[lo, hi]`, assuming
/// `f(lo) < target <= f(hi)`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo <= target && target <= fhi) {
        return Err(Error::invalid(format!(
            "target {target} is not bracketed by [{flo}, {fhi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `n` phases uniform on `[low, high)`.
pub fn uniform_phases<R: Rng + ?Sized>(rng: &mut R, n: usize, low: f64, high: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(low..high)).collect()
}

/// `n` phases uniform on the circle.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    uniform_phases(rng, n, 0.0, TAU)
}

/// `n` uniform points on the unit sphere of `R^dim`.
pub fn uniform_points<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Vec<RVec> {
    (0..n).map(|_| random_unit_vector(rng, dim)).collect()
}

/// `n` points `cos(s) c + sin(s) v_i` around a random center `c` with random
/// unit tangents `v_i`, where `s` is chosen so that
/// `max (1 − ⟨x_i, x_j⟩) = gap`.
pub fn cluster_points<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, gap: f64) -> Result<Vec<RVec>> {
    if n < 2 || !(gap > 0.0 && gap < 2.0) {
        return Err(Error::invalid("a cluster needs n >= 2 and a gap in (0, 2)"));
    }
    let center = random_unit_vector(rng, dim);
    let tangents: Vec<RVec> = (0..n)
        .map(|_| {
            let v = random_unit_vector(rng, dim);
            let t = &v - &center * v.dot(&center);
            t.normalize()
        })
        .collect();
    let points = |s: f64| -> Vec<RVec> {
        tangents.iter().map(|v| &center * s.cos() + v * s.sin()).collect()
    };
    let s = bisect(|s| aggregation_gap(&points(s)), 0.0, PI / 2.0, gap)?;
    Ok(points(s))
}

/// `n` distinct points on a random circle of the sphere in `R^dim` (the
/// intersection with a random 2-plane at height `height`), in increasing
/// angular order.
pub fn concyclic_points<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, height: f64) -> Result<Vec<RVec>> {
    if dim < 3 || height.abs() >= 1.0 {
        return Err(Error::invalid("concyclic points need dim >= 3 and |height| < 1"));
    }
    let e1 = random_unit_vector(rng, dim);
    let mut e2 = random_unit_vector(rng, dim);
    e2 -= &e1 * e2.dot(&e1);
    e2 = e2.normalize();
    let mut e3 = random_unit_vector(rng, dim);
    e3 -= &e1 * e3.dot(&e1) + &e2 * e3.dot(&e2);
    e3 = e3.normalize();
    let r = (1.0 - height * height).sqrt();
    let mut angles = uniform_phases(rng, n, 0.0, TAU);
    angles.sort_by(f64::total_cmp);
    Ok(angles
        .into_iter()
        .map(|a| &e3 * height + (&e1 * a.cos() + &e2 * a.sin()) * r)
        .collect())
}

/// `n` Haar-random unitaries.
pub fn haar_states<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Vec<CMat> {
    (0..n).map(|_| haar_unitary(rng, d)).collect()
}

/// `n` unitaries `cayley(s A_j) U_0` with random anti-Hermitian `A_j` and `s`
/// chosen so that the maximal pairwise Frobenius distance equals `diameter`.
pub fn unitary_cluster<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize, diameter: f64) -> Result<Vec<CMat>> {
    if n < 2 {
        return Err(Error::invalid("a unitary cluster needs n >= 2"));
    }
    let base = haar_unitary(rng, d);
    let gens: Vec<CMat> = (0..n).map(|_| random_anti_hermitian(rng, d)).collect();
    let states = |s: f64| -> Vec<CMat> {
        gens.iter().map(|a| cayley(&(a * crate::linalg::c(s, 0.0))) * &base).collect()
    };
    let hi = (1..=40)
        .map(|k| k as f64 * 0.5)
        .find(|&s| matrix_diameter(&states(s)) >= diameter)
        .ok_or_else(|| Error::invalid(format!("diameter {diameter} is not reachable")))?;
    let s = bisect(|s| matrix_diameter(&states(s)), 0.0, hi, diameter)?;
    Ok(states(s))
}

/// A unitary `cayley(s A)` with `‖V − I‖_F = distance`.
pub fn unitary_near_identity<R: Rng + ?Sized>(rng: &mut R, d: usize, distance: f64) -> Result<CMat> {
    let a = random_anti_hermitian(rng, d);
    let v = |s: f64| cayley(&(&a * crate::linalg::c(s, 0.0)));
    let dist = |s: f64| frobenius(&(v(s) - cidentity(d)));
    let hi = (1..=40)
        .map(|k| k as f64 * 0.5)
        .find(|&s| dist(s) >= distance)
        .ok_or_else(|| Error::invalid(format!("distance {distance} is not reachable")))?;
    Ok(v(bisect(dist, 0.0, hi, distance)?))
}
