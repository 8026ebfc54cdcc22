//! Checks against closed forms and independently computed reference values.

mod common;

use std::f64::consts::PI;

use common::{rel, rng};
use ltpmor::floquet::{self, PeriodicMatrixSampler};
use ltpmor::linalg::{cplx, CMat, CVec, Eigen};
use ltpmor::lti::{self, LtiSystem};
use ltpmor::ltp::{self, FloquetFourierSystem};
use ltpmor::mor::{self, ReductionMethod, ReductionOptions};
use ltpmor::sim::{self, InputSignal, Model, SimOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn first_order(pole: f64) -> LtiSystem {
    let one = DMatrix::from_element(1, 1, 1.0);
    LtiSystem::from_real(&DMatrix::from_element(1, 1, -pole), &one, &one).unwrap()
}

/// `(1/2pi) ∫ f(iw) dw` with `w = tan(theta)` and the midpoint rule.
fn frequency_quadrature(f: impl Fn(f64) -> f64) -> f64 {
    let m = 200_000;
    let h = PI / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let theta = -PI / 2.0 + (i as f64 + 0.5) * h;
        let w = theta.tan();
        acc += f(w) * (1.0 + w * w) * h;
    }
    acc / (2.0 * PI)
}

#[test]
fn inner_product_of_two_lags_matches_quadrature() {
    let (g, h) = (first_order(1.0), first_order(2.0));
    let quad = frequency_quadrature(|w| (2.0 + w * w) / ((1.0 + w * w) * (4.0 + w * w)));
    let residue = lti::h2_inner_residue(&g, &h).unwrap();
    let gramian = lti::h2_inner_gramian(&g, &h).unwrap();
    assert!((quad - 1.0 / 3.0).abs() < 1e-8);
    assert!((residue - cplx(1.0 / 3.0, 0.0)).norm() < 1e-12);
    assert!((gramian - cplx(1.0 / 3.0, 0.0)).norm() < 1e-12);
}

#[test]
fn transfer_function_matches_explicit_inverse() {
    let mut rng = rng(11);
    for n in 1..8 {
        let sys = common::random_real_lti(&mut rng, n, 2, 3);
        for s in [cplx(0.0, 0.3), cplx(1.5, -2.0), cplx(-0.05, 7.0)] {
            let inv = (CMat::identity(n, n) * s - sys.a()).try_inverse().unwrap();
            let explicit = sys.c() * inv * sys.b();
            let solved = sys.eval_transfer(s).unwrap();
            assert!((solved - &explicit).norm() <= 1e-11 * explicit.norm().max(1.0));
        }
    }
}

/// Scalar `x' = -x + cos(t) u`, `y = x`: `g_{±1}(s) = 1/2 / (s ± i + 1)`, so
/// `||G||^2 = 2 (1/4)(1/2) = 1/4`.
fn cosine_input() -> FloquetFourierSystem {
    let half = CVec::from_element(1, cplx(0.5, 0.0));
    let zero = CVec::zeros(1);
    FloquetFourierSystem::new(
        CMat::from_element(1, 1, cplx(-1.0, 0.0)),
        1.0,
        vec![half.clone(), zero.clone(), half],
        vec![zero.clone(), CVec::from_element(1, cplx(1.0, 0.0)), zero],
    )
    .unwrap()
}

#[test]
fn cosine_input_norm_by_every_path() {
    let sys = cosine_input();
    let quad = frequency_quadrature(|w| 0.25 / (1.0 + (w + 1.0).powi(2)) + 0.25 / (1.0 + (w - 1.0).powi(2)));
    assert!((quad - 0.25).abs() < 1e-8);
    let expected = 0.5;
    assert!(rel(ltp::h2_norm_subsystem_sum(&sys).unwrap(), expected) < 1e-12);
    assert!(rel(ltp::h2_norm_zhou_hagiwara(&sys, 1).unwrap().value, expected) < 1e-12);
    let pr = ltp::h2_inner_pole_residue(&sys, &sys, 1).unwrap();
    assert!(rel(pr.value.re.sqrt(), expected) < 1e-12);
}

#[test]
fn lti_embedding_has_the_lti_norm() {
    let mut rng = rng(3);
    let sys = common::random_real_lti(&mut rng, 5, 1, 1);
    let ltp = FloquetFourierSystem::from_lti(&sys, 2.0).unwrap();
    let expected = lti::h2_norm_gramian(&sys).unwrap();
    assert!(rel(ltp::h2_norm_subsystem_sum(&ltp).unwrap(), expected) < 1e-12);
    assert!(rel(ltp::h2_norm_zhou_hagiwara(&ltp, 3).unwrap().value, expected) < 1e-12);
}

#[test]
fn heat_matrix_has_the_dirichlet_spectrum() {
    let heat = sim::build_heat_benchmark(40, 8).unwrap();
    let h = heat.h;
    let mut eig: Vec<f64> = heat.a().clone().symmetric_eigenvalues().iter().cloned().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    for (j, lam) in eig.iter().enumerate() {
        let exact = -(2.0 / (h * h)) * (1.0 - ((j + 1) as f64 * PI * h).cos());
        assert!((lam - exact).abs() <= 1e-10 * exact.abs());
    }
}

#[test]
fn modulated_benchmark_resynthesizes_its_inputs() {
    let base = sim::synthetic_structure(4, 1).unwrap();
    let omega0 = 2.0;
    let sys = sim::build_modulated_benchmark(&base, omega0).unwrap();
    for t in [0.0, 0.31, 1.7, 4.2] {
        let b = sys.b_eval(t);
        let c = sys.c_eval(t);
        let (c1, c2) = ((omega0 * t).cos(), (2.0 * omega0 * t).cos());
        let expect_b = base.b().column(0) + base.b().column(1) * cplx(c1, 0.0) + base.b().column(2) * cplx(c2, 0.0);
        let expect_c = base.c().row(0).transpose() + base.c().row(1).transpose() * cplx(c1, 0.0) + base.c().row(2).transpose() * cplx(c2, 0.0);
        assert!((b - &expect_b).norm() <= 1e-13 * expect_b.norm());
        assert!((c - &expect_c).norm() <= 1e-13 * expect_c.norm());
    }
}

/// Step response of `1/(s^2 + 2s + 2)`: `(1 - e^{-t}(cos t + sin t)) / 2`.
fn second_order_step(t: f64) -> f64 {
    0.5 * (1.0 - (-t).exp() * (t.cos() + t.sin()))
}

fn second_order() -> LtiSystem {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    LtiSystem::from_real(&a, &b, &c).unwrap()
}

fn step_error(dt: f64) -> f64 {
    let sys = second_order();
    let trace = sim::simulate_backward_euler(Model::Lti(&sys), &InputSignal::unit_step(), SimOptions::new(dt, 8.0)).unwrap();
    trace
        .times
        .iter()
        .zip(&trace.outputs)
        .map(|(&t, &y)| (y - second_order_step(t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn backward_euler_step_response_and_order() {
    assert!(step_error(1e-3) <= 2e-3);
    let ratio = step_error(0.02) / step_error(0.01);
    assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_order_reduction_reproduces_the_trace() {
    let base = sim::synthetic_structure(3, 2).unwrap();
    let sys = sim::build_modulated_benchmark(&base, 2.0).unwrap();
    let rep = mor::reduce_ltp_algorithm1(&sys, sys.n(), 2, &ReductionOptions::with_method(ReductionMethod::BalancedTruncation)).unwrap();
    let input = InputSignal::Sine {
        omega: 1.3,
        phase: 0.2,
        amplitude: 1.0,
    };
    let opts = SimOptions::new(0.01, 10.0);
    let full = sim::simulate_backward_euler(Model::FloquetFourier(&sys), &input, opts).unwrap();
    let red = sim::simulate_backward_euler(Model::FloquetFourier(&rep.reduced), &input, opts).unwrap();
    let scale = full.outputs.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    assert!(full.max_deviation(&red).unwrap() <= 1e-10 * scale);
}

#[test]
fn pod_tail_energy_matches_an_independent_decomposition() {
    let mut rng = rng(19);
    let sys = common::random_real_lti(&mut rng, 9, 1, 1);
    let trace = sim::simulate_backward_euler(
        Model::Lti(&sys),
        &InputSignal::Sine {
            omega: 0.7,
            phase: 0.0,
            amplitude: 1.0,
        },
        SimOptions::new(0.05, 30.0).with_states(),
    )
    .unwrap();
    let x = trace.states.unwrap();
    let xr = x.map(|z| z.re);
    let mut energies: Vec<f64> = (xr.transpose() * &xr).symmetric_eigenvalues().iter().map(|v| v.max(0.0)).collect();
    energies.sort_by(|a, b| b.total_cmp(a));
    for r in 1..6 {
        let pp = mor::pod_reduce(&x, r).unwrap();
        let v = pp.v();
        let residual = (&x - v * (v.adjoint() * &x)).norm_squared();
        let tail: f64 = energies[r..].iter().sum();
        assert!((residual - tail).abs() <= 1e-9 * energies[0], "r = {r}: {residual} vs {tail}");
    }
}

#[test]
fn monodromy_multipliers_are_exponentials_of_q() {
    let mathieu = PeriodicMatrixSampler::from_fn(PI, 2, |t| {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -(1.5 - 0.8 * (2.0 * t).cos()), -0.1])
    })
    .unwrap();
    let factors = floquet::floquet_factors(&mathieu, floquet::DEFAULT_STEPS, 16).unwrap();
    let mut multipliers: Vec<Complex64> = Eigen::new(&factors.monodromy.map(|v| cplx(v, 0.0))).unwrap().values;
    let mut from_q: Vec<Complex64> = Eigen::new(&factors.q).unwrap().values.iter().map(|l| (l * PI).exp()).collect();
    let key = |z: &Complex64| (z.im, z.re);
    multipliers.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    from_q.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    for (m, e) in multipliers.iter().zip(&from_q) {
        assert!((m - e).norm() <= 1e-10);
    }
    // Damping -0.1 gives det M = e^{-0.1 T}.
    assert!((factors.monodromy.determinant() - (-0.1 * PI).exp()).abs() < 1e-10);
}

#[test]
fn irka_micro_problem_frozen_optimum() {
    // With a = 2p/(p^2+2p+2) optimal for each pole, the error is
    // 1/8 - 2p/(p^2+2p+2)^2, stationary at 3p^2 + 2p - 2 = 0.
    let p = (-2.0 + 28.0f64.sqrt()) / 6.0;
    let frozen = (0.125 - 2.0 * p / (p * p + 2.0 * p + 2.0).powi(2)).sqrt();
    assert!((frozen - 0.173_158_313_139_282).abs() < 1e-14);
    let res = mor::irka(&second_order(), 1, &mor::IrkaOptions { tol: 1e-12, max_iter: 500, ..Default::default() }).unwrap();
    let err = lti::h2_norm_gramian(&lti::difference(&second_order(), &res.reduced).unwrap()).unwrap();
    assert!((err - frozen).abs() < 1e-9);
    assert!((res.reduced.a()[(0, 0)].re + p).abs() < 1e-6);
}
