//! Small dense linear-algebra helpers shared by the three models.
//!
//! Matrices here are at most 16x16, so everything is dense and allocation
//! happens per call.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type Complex64 = Complex<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Newton iteration tolerance for the polar factor.
pub const POLAR_TOL: f64 = 1e-14;
/// Newton iteration cap for the polar factor.
pub const POLAR_MAX_ITER: usize = 50;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cidentity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_real(m: &RMat) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||U U* - I||_F`.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let d = u.nrows();
    frobenius(&(u * u.adjoint() - cidentity(d)))
}

/// `||M^T M - I||_F`.
pub fn orthogonality_residual(m: &RMat) -> f64 {
    let d = m.nrows();
    frobenius_real(&(m.transpose() * m - RMat::identity(d, d)))
}

pub fn hermitian_residual(h: &CMat) -> f64 {
    frobenius(&(h - h.adjoint()))
}

/// Skew-symmetric part `(A - A^T) / 2`.
pub fn skew_part(a: &RMat) -> RMat {
    (a - a.transpose()) * 0.5
}

pub fn skew_residual(a: &RMat) -> f64 {
    frobenius_real(&(a + a.transpose()))
}

/// Unitary factor of the polar decomposition, by Newton iteration
/// `X <- (X + X^{-*}) / 2`.
pub fn polar_unitary(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let mut x = m.clone();
    for _ in 0..POLAR_MAX_ITER {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or(Error::SingularDifference { condition: f64::INFINITY })?;
        let next = (&x + inv.adjoint()) * c(0.5, 0.0);
        let step = frobenius(&(&next - &x));
        x = next;
        if step <= POLAR_TOL * (1.0 + frobenius(&x)) {
            return Ok(x);
        }
    }
    Err(Error::IntegratorFailure(
        "polar iteration did not converge".into(),
    ))
}

/// Orthogonal factor of the polar decomposition of a real square matrix.
pub fn polar_orthogonal(m: &RMat) -> Result<RMat> {
    let mut x = m.clone();
    for _ in 0..POLAR_MAX_ITER {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or(Error::SingularDifference { condition: f64::INFINITY })?;
        let next = (&x + inv.transpose()) * 0.5;
        let step = frobenius_real(&(&next - &x));
        x = next;
        if step <= POLAR_TOL * (1.0 + frobenius_real(&x)) {
            return Ok(x);
        }
    }
    Err(Error::IntegratorFailure(
        "polar iteration did not converge".into(),
    ))
}

/// Spectral norm of a real matrix via power iteration on `A^T A`.
pub fn operator_norm(a: &RMat) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let ata = a.transpose() * a;
    // Fixed, non-symmetric start so the result is reproducible.
    let mut v = RVec::from_fn(n, |i, _| 1.0 + 0.1 * (i as f64 + 1.0).sqrt());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w = &ata * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-15 * next.abs().max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

/// Eigenvalues of a complex square matrix, sorted lexicographically by
/// `(re, im)`.
pub fn sorted_eigenvalues(m: &CMat) -> Vec<Complex64> {
    let d = m.nrows();
    let mut eig: Vec<Complex64> = match d {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (tr * tr - det * 4.0).sqrt();
            vec![(tr + disc) * 0.5, (tr - disc) * 0.5]
        }
        _ => {
            let schur = m.clone().schur();
            let (_, t) = schur.unpack();
            (0..d).map(|i| t[(i, i)]).collect()
        }
    };
    sort_spectrum(&mut eig);
    eig
}

/// Real parts closer than this (relative to the spectrum scale) count as
/// equal when ordering eigenvalues.
pub const EIGEN_TIE_TOL: f64 = 1e-9;

/// Lexicographic `(re, im)` order in which real parts that agree up to
/// [`EIGEN_TIE_TOL`] are treated as equal, so conjugate pairs keep a stable
/// order under round-off.
pub fn sort_spectrum(eig: &mut [Complex64]) {
    eig.sort_by(|a, b| a.re.total_cmp(&b.re));
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut start = 0;
    for k in 1..=eig.len() {
        if k == eig.len() || eig[k].re - eig[k - 1].re > EIGEN_TIE_TOL * scale {
            eig[start..k].sort_by(|a, b| a.im.total_cmp(&b.im));
            start = k;
        }
    }
}

/// Reciprocal-free condition estimate `||A||_F ||A^{-1}||_F`, or `None` when
/// inversion fails.
pub fn inverse_with_condition(m: &CMat) -> Option<(CMat, f64)> {
    let inv = m.clone().try_inverse()?;
    let cond = frobenius(m) * frobenius(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

/// Cayley map of an anti-Hermitian matrix; the result is unitary.
pub fn cayley(a: &CMat) -> CMat {
    let d = a.nrows();
    let half = a * c(0.5, 0.0);
    let lhs = cidentity(d) - &half;
    let rhs = cidentity(d) + &half;
    lhs.try_inverse().expect("I - A/2 is invertible for anti-Hermitian A") * rhs
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// diagonal phase fix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let z = random_complex_gaussian(rng, d);
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            out[(i, j)] *= phase;
        }
    }
    out
}

/// Random Hermitian matrix with Gaussian entries of the given scale.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> CMat {
    let z = random_complex_gaussian(rng, d);
    (&z + z.adjoint()) * c(0.5 * scale, 0.0)
}

/// Random anti-Hermitian matrix scaled to unit Frobenius norm.
pub fn random_anti_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let h = random_hermitian(rng, d, 1.0);
    let n = frobenius(&h);
    h * (I / n)
}

/// Random skew-symmetric matrix with Gaussian entries of the given scale.
pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> RMat {
    let a = RMat::from_fn(d, d, |_, _| {
        let x: f64 = rng.sample(StandardNormal);
        x * scale
    });
    skew_part(&a) * 2.0_f64.sqrt()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> RVec {
    loop {
        let v = RVec::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn polar_of_unitary_is_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(&mut rng, 3);
        assert!(unitarity_residual(&u) < 1e-13);
        let p = polar_unitary(&u).unwrap();
        assert!(frobenius(&(p - &u)) < 1e-13);
    }

    #[test]
    fn polar_recovers_unitary_from_positive_stretch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = haar_unitary(&mut rng, 4);
        let h = random_hermitian(&mut rng, 4, 0.1);
        let p = cidentity(4) + h;
        let m = &p * &u;
        // m = P U with P Hermitian positive, so the right polar factor differs;
        // only unitarity and the symmetric remainder are checked.
        let q = polar_unitary(&m).unwrap();
        assert!(unitarity_residual(&q) < 1e-13);
        let rem = q.adjoint() * &m;
        assert!(hermitian_residual(&rem) < 1e-12);
    }

    #[test]
    fn polar_orthogonal_recovers_rotation() {
        let m = RMat::from_row_slice(2, 2, &[1.01, -0.2, 0.21, 0.99]);
        let q = polar_orthogonal(&m).unwrap();
        assert!(orthogonality_residual(&q) < 1e-13);
        let sym = q.transpose() * &m;
        assert!(frobenius_real(&(&sym - sym.transpose())) < 1e-13);
    }

    #[test]
    fn operator_norm_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..6 {
            let w = random_skew(&mut rng, d, 0.7);
            let svd = w.clone().svd(false, false);
            let top = svd.singular_values.max();
            assert!((operator_norm(&w) - top).abs() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn eigenvalues_of_diagonal_and_general() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(2.0, 0.0),
            c(-1.0, 1.0),
            c(0.5, -3.0),
        ]));
        let e = sorted_eigenvalues(&m);
        assert!((e[0] - c(-1.0, 1.0)).norm() < 1e-12);
        assert!((e[1] - c(0.5, -3.0)).norm() < 1e-12);
        assert!((e[2] - c(2.0, 0.0)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = haar_unitary(&mut rng, 3);
        let conj = &s * &m * s.adjoint();
        let e2 = sorted_eigenvalues(&conj);
        for (a, b) in e.iter().zip(&e2) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn cayley_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_anti_hermitian(&mut rng, 3);
        assert!(unitarity_residual(&cayley(&a)) < 1e-13);
    }
}
