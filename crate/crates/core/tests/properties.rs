mod common;

use common::{rel, rng};
use ltpmor::linalg::{cplx, CMat, SchurForm};
use ltpmor::lti;
use ltpmor::ltp;
use ltpmor::lyapunov::{self, LyapunovMode};
use ltpmor::mor::{self, ProjectionPair, ReductionMethod, ReductionOptions};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn output_scaling_scales_every_norm(seed in any::<u64>(), n in 1usize..6, order in 0usize..3, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let mut rng = rng(seed);
        let sys = common::random_complex_ltp(&mut rng, n, order, 1.7);
        let alpha = Complex64::new(re, im);
        prop_assume!(alpha.norm() > 1e-3);
        let scaled = sys.scale_output(alpha);
        let base = ltp::h2_norm_subsystem_sum(&sys).unwrap();
        prop_assert!(rel(ltp::h2_norm_subsystem_sum(&scaled).unwrap(), alpha.norm() * base) < 1e-10);
        let zh = ltp::h2_norm_zhou_hagiwara(&scaled, order.max(1)).unwrap().value;
        prop_assert!(rel(zh, alpha.norm() * base) < 1e-9);
    }

    #[test]
    fn real_systems_have_conjugate_subsystems(seed in any::<u64>(), n in 1usize..6, order in 0usize..3, x in -2.0f64..2.0, y in -5.0f64..5.0) {
        let mut rng = rng(seed);
        let sys = common::random_real_ltp(&mut rng, n, order, 1.3);
        prop_assert!(sys.is_conjugate_symmetric(1e-14));
        let s = Complex64::new(x, y);
        for k in sys.subsystem_indices() {
            let g = sys.eval_subsystem(k, s).unwrap();
            let h = sys.eval_subsystem(-k, s.conj()).unwrap();
            prop_assert!((g - h.conj()).norm() <= 1e-10 * g.norm().max(1.0));
        }
    }

    #[test]
    fn subsystems_vanish_beyond_twice_the_order(seed in any::<u64>(), n in 1usize..6, order in 0usize..3, extra in 1i64..5) {
        let mut rng = rng(seed);
        let sys = common::random_complex_ltp(&mut rng, n, order, 0.9);
        let k = 2 * order as i64 + extra;
        let s = Complex64::new(0.1, 0.7);
        prop_assert_eq!(sys.eval_subsystem(k, s).unwrap(), Complex64::new(0.0, 0.0));
        prop_assert_eq!(sys.eval_subsystem(-k, s).unwrap(), Complex64::new(0.0, 0.0));
        prop_assert!(sys.subsystem_realization(k).unwrap().is_none());
    }

    #[test]
    fn zhou_hagiwara_paths_agree(seed in any::<u64>(), n in 1usize..6, order in 0usize..3, embed in 1usize..6) {
        let mut rng = rng(seed);
        let sys = common::random_complex_ltp(&mut rng, n, order, 1.1);
        let zh = ltp::h2_norm_zhou_hagiwara(&sys, embed).unwrap();
        prop_assert!(rel(zh.v_path, zh.w_path) <= 1e-8);
    }

    #[test]
    fn lift_then_unlift_is_identity(seed in any::<u64>(), n in 1usize..6, order in 0usize..3) {
        let mut rng = rng(seed);
        let sys = common::random_complex_ltp(&mut rng, n, order, 2.5);
        let back = mor::lift_to_mimo(&sys).unlift().unwrap();
        prop_assert_eq!(back, sys);
    }

    #[test]
    fn lifted_norm_dominates_ltp_norm(seed in any::<u64>(), n in 1usize..6, order in 0usize..3) {
        let mut rng = rng(seed);
        let sys = common::random_real_ltp(&mut rng, n, order, 0.8);
        let g = ltp::h2_norm_subsystem_sum(&sys).unwrap();
        let h = lti::h2_norm_gramian(&mor::lift_to_mimo(&sys).system).unwrap();
        prop_assert!(g <= ((2 * order + 1) as f64).sqrt() * h * (1.0 + 1e-10));
    }

    #[test]
    fn lti_norm_is_similarity_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng(seed);
        let sys = common::random_real_lti(&mut rng, n, 2, 2);
        let t = CMat::from_fn(n, n, |i, j| cplx(if i == j { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)));
        let other = sys.similarity(&t).unwrap();
        let (a, b) = (lti::h2_norm_gramian(&sys).unwrap(), lti::h2_norm_gramian(&other).unwrap());
        prop_assert!(rel(a, b) < 1e-9);
    }

    #[test]
    fn gramian_and_residue_norms_agree(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng(seed);
        let sys = common::random_real_lti(&mut rng, n, 2, 3);
        let g = lti::h2_norm_gramian(&sys).unwrap();
        let o = lti::h2_norm_gramian_observability(&sys).unwrap();
        prop_assert!(rel(g, o) < 1e-8);
        if let Ok(r) = lti::h2_inner_residue(&sys, &sys) {
            prop_assert!(rel(g, r.re.sqrt()) < 1e-8);
            prop_assert!(r.im.abs() < 1e-8 * r.re);
        }
    }

    #[test]
    fn lyapunov_residual_is_small(seed in any::<u64>(), n in 1usize..10, obs in any::<bool>()) {
        let mut rng = rng(seed);
        let a = common::hurwitz_matrix(&mut rng, n, 0.3).map(|x| cplx(x, 0.0));
        let g = CMat::from_fn(n, n, |_, _| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let rhs = &g * g.adjoint();
        let mode = if obs { LyapunovMode::Observability } else { LyapunovMode::Controllability };
        let x = lyapunov::solve_lyapunov(&a, &rhs, mode).unwrap();
        let residual = match mode {
            LyapunovMode::Observability => a.adjoint() * &x + &x * &a + &rhs,
            LyapunovMode::Controllability => &a * &x + &x * a.adjoint() + &rhs,
        };
        prop_assert!(residual.norm() <= 1e-10 * rhs.norm() * (1.0 + a.norm()));
    }

    #[test]
    fn projection_is_coefficientwise(seed in any::<u64>(), n in 2usize..7, order in 0usize..3) {
        let mut rng = rng(seed);
        let sys = common::random_complex_ltp(&mut rng, n, order, 1.0);
        let r = rng.random_range(1..n);
        let v = CMat::from_fn(n, r, |_, _| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let w = CMat::from_fn(n, r, |_, _| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let pp = ProjectionPair::biorthogonalize(&v, &w).unwrap();
        let red = pp.project_ltp(&sys).unwrap();
        let scale = sys.q().norm().max(1.0);
        prop_assert!((red.q() - pp.w().transpose() * sys.q() * pp.v()).norm() <= 1e-12 * scale);
        for (k, bk) in sys.b_coeffs().iter().enumerate() {
            prop_assert!((&red.b_coeffs()[k] - pp.w().transpose() * bk).norm() <= 1e-12 * bk.norm().max(1.0));
            let ck = &sys.c_coeffs()[k];
            prop_assert!((&red.c_coeffs()[k] - pp.v().transpose() * ck).norm() <= 1e-12 * ck.norm().max(1.0));
        }
        let lifted = pp.project_lti(&mor::lift_to_mimo(&sys).system).unwrap();
        prop_assert_eq!(mor::lift_to_mimo(&red).system, lifted);
    }

    #[test]
    fn pod_basis_is_orthonormal_and_idempotent(seed in any::<u64>(), n in 2usize..9, cols in 9usize..20) {
        let mut rng = rng(seed);
        let x = CMat::from_fn(n, cols, |_, _| cplx(rng.random_range(-1.0..1.0), 0.0));
        let r = rng.random_range(1..n);
        let pp = mor::pod_reduce(&x, r).unwrap();
        let v = pp.v();
        prop_assert!((v.adjoint() * v - CMat::identity(r, r)).norm() <= 1e-12);
        let p = v * v.adjoint();
        prop_assert!((&p * &p - &p).norm() <= 1e-12);
        prop_assert!(pp.is_real());
    }

    #[test]
    fn reduction_respects_the_bound(seed in any::<u64>(), n in 2usize..7, order in 0usize..3, bt in any::<bool>()) {
        let mut rng = rng(seed);
        let sys = common::random_real_ltp(&mut rng, n, order, 1.4);
        let r = rng.random_range(1..n);
        let method = if bt { ReductionMethod::BalancedTruncation } else { ReductionMethod::Irka };
        let mut opts = ReductionOptions::with_method(method);
        opts.irka.allow_unconverged = true;
        match mor::reduce_ltp_algorithm1(&sys, r, order, &opts) {
            Ok(rep) => {
                let err = rep.ltp_error.unwrap();
                prop_assert!(err <= rep.bound * (1.0 + 1e-8));
                let direct = mor::error_bound_report(&sys, &rep.reduced, order).unwrap();
                // The plain difference realization loses about half the digits to cancellation.
                let scale = ltp::h2_norm_subsystem_sum(&sys).unwrap();
                prop_assert!((direct.mimo_error - rep.mimo_error).abs() <= 1e-6 * rep.mimo_error + 1e-7 * scale);
                prop_assert!(direct.fourier_truncation.is_none());
            }
            Err(ltpmor::Error::UnstableReduction { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn full_order_reduction_is_exact(seed in any::<u64>(), n in 1usize..6, order in 0usize..3) {
        let mut rng = rng(seed);
        let sys = common::random_real_ltp(&mut rng, n, order, 1.0);
        let norm = ltp::h2_norm_subsystem_sum(&sys).unwrap();
        let rep = mor::reduce_ltp_algorithm1(&sys, n, order, &ReductionOptions::with_method(ReductionMethod::BalancedTruncation)).unwrap();
        prop_assert!(rep.ltp_error.unwrap() <= 1e-8 * norm);
    }

    #[test]
    fn hurwitz_gate_matches_spectrum(seed in any::<u64>(), n in 1usize..7, shift in -1.0f64..1.0) {
        let mut rng = rng(seed);
        let a = common::hurwitz_matrix(&mut rng, n, 0.0).map(|x| cplx(x, 0.0)) + CMat::identity(n, n) * cplx(shift, 0.0);
        let max_re = ltpmor::linalg::max_real_part(&SchurForm::new(&a).unwrap().eigenvalues());
        prop_assume!(max_re.abs() > 1e-6);
        prop_assert_eq!(ltpmor::floquet::is_hurwitz(&a), max_re < 0.0);
    }
}
