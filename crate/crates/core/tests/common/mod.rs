#![allow(dead_code)]

use ltpmor::linalg::{cplx, max_real_part, CMat, CVec, SchurForm};
use ltpmor::lti::LtiSystem;
use ltpmor::ltp::FloquetFourierSystem;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random real matrix shifted so that its rightmost eigenvalue sits at `-margin`.
pub fn hurwitz_matrix(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| normal(rng));
    let cm = a.map(|x| cplx(x, 0.0));
    let shift = max_real_part(&SchurForm::new(&cm).unwrap().eigenvalues()) + margin;
    a - DMatrix::identity(n, n) * shift
}

pub fn random_real_lti(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> LtiSystem {
    let margin = 0.2 + rng.random::<f64>();
    let a = hurwitz_matrix(rng, n, margin);
    let b = DMatrix::from_fn(n, m, |_, _| normal(rng));
    let c = DMatrix::from_fn(p, n, |_, _| normal(rng));
    LtiSystem::from_real(&a, &b, &c).unwrap()
}

fn complex_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cplx(normal(rng), normal(rng)))
}

/// Random real LTP system in Floquet–Fourier form: real Hurwitz `Q` and
/// conjugate-symmetric coefficients `b_{-k} = conj(b_k)`, `c_{-k} = conj(c_k)`.
pub fn random_real_ltp(rng: &mut ChaCha8Rng, n: usize, order: usize, omega0: f64) -> FloquetFourierSystem {
    let margin = 0.2 + rng.random::<f64>();
    let q = hurwitz_matrix(rng, n, margin).map(|x| cplx(x, 0.0));
    let half = |rng: &mut ChaCha8Rng| -> Vec<CVec> {
        let mut pos = vec![CVec::from_fn(n, |_, _| cplx(normal(rng), 0.0))];
        for _ in 0..order {
            pos.push(complex_vec(rng, n) * cplx(0.5, 0.0));
        }
        let mut all: Vec<CVec> = pos[1..].iter().rev().map(|v| v.map(|z| z.conj())).collect();
        all.extend(pos);
        all
    };
    let b = half(rng);
    let c = half(rng);
    FloquetFourierSystem::new(q, omega0, b, c).unwrap()
}

/// Random LTP system with complex `Q` and unrelated complex coefficients.
pub fn random_complex_ltp(rng: &mut ChaCha8Rng, n: usize, order: usize, omega0: f64) -> FloquetFourierSystem {
    let margin = 0.2 + rng.random::<f64>();
    let re = hurwitz_matrix(rng, n, margin);
    let im = DMatrix::from_fn(n, n, |_, _| 0.3 * normal(rng));
    let mut q = CMat::from_fn(n, n, |i, j| cplx(re[(i, j)], im[(i, j)]));
    let shift = max_real_part(&SchurForm::new(&q).unwrap().eigenvalues()) + 0.3;
    if shift > 0.0 {
        q -= CMat::identity(n, n) * cplx(shift, 0.0);
    }
    let b = (0..2 * order + 1).map(|_| complex_vec(rng, n)).collect();
    let c = (0..2 * order + 1).map(|_| complex_vec(rng, n)).collect();
    FloquetFourierSystem::new(q, omega0, b, c).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
