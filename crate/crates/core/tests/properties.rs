//! Property tests for the invariants of the potential model, the spectral
//! lift, direct scattering and the expansion coefficients.

use num_complex::Complex64;
use proptest::prelude::*;
use steplike_ist::asymptotics::{compute_u_coefficients, m_coefficients_at};
use steplike_ist::potential::compute_moments;
use steplike_ist::spectral::lift_real;
use steplike_ist::{CutSide, DirectConfig, DirectSolver, Potential, Side};

/// A Gaussian well on a smooth step from 0 to `c`.
fn well_on_step(c: f64, depth: f64, center: f64, width: f64) -> Potential {
    let expr = format!("{c}*0.5*(1+tanh(2*x)) - {depth}*exp(-((x-({center}))/{width})^2)");
    Potential::expression(0.0, c, &expr, vec![], 6, 2).unwrap()
}

fn well() -> impl Strategy<Value = Potential> {
    (0.0..1.5f64, 0.2..2.0f64, -1.0..1.0f64, 0.6..1.5f64).prop_map(|(c, d, x0, w)| well_on_step(c, d, x0, w))
}

fn soliton() -> impl Strategy<Value = Potential> {
    (-1.0..1.0f64, 0.3..2.0f64, -2.0..2.0f64).prop_map(|(c, k, x0)| Potential::sech2(c, k, x0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_matches_central_difference(p in prop_oneof![well(), soliton()], x in -4.0..4.0f64) {
        let h = 1e-4;
        let d = p.derivatives(x, 1).unwrap()[1];
        let fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "q' = {d}, fd = {fd}");
    }

    #[test]
    fn lift_is_conjugation_symmetric_and_squares_back(lambda in -5.0..500.0f64, cp in -2.0..2.0f64, cm in -2.0..2.0f64) {
        let up = lift_real(lambda, CutSide::Upper, cp, cm);
        let lo = lift_real(lambda, CutSide::Lower, cp, cm);
        for (side, c) in [(Side::Plus, cp), (Side::Minus, cm)] {
            let k = up.k(side);
            prop_assert_eq!(k, -lo.k(side).conj());
            let back = k * k + c;
            let scale = lambda.abs().max(c.abs()).max(1.0);
            prop_assert!((back - Complex64::new(lambda, 0.0)).norm() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn momentum_increases_above_the_threshold(c in -2.0..2.0f64, a in 1e-6..100.0f64, b in 1e-6..100.0f64) {
        prop_assume!(a != b);
        let (lo, hi) = (c + a.min(b), c + a.max(b));
        let k = |l: f64| lift_real(l, CutSide::Upper, c, c).k(Side::Plus).re;
        prop_assert!(k(lo) < k(hi));
    }

    #[test]
    fn constant_potential_m_coefficients(c in -3.0..3.0f64, x in -5.0..5.0f64) {
        let m = m_coefficients_at(&Potential::free(c), x, 6).unwrap();
        let expect = [c, 0.0, -c * c, 0.0, 2.0 * c * c * c, 0.0];
        for (a, b) in m.iter().zip(expect) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sigma_decreases_toward_infinity(p in well()) {
        let d = compute_moments(&p, 2, 1, 30.0, 1e-10).unwrap();
        let sp = d.sigma(Side::Plus, 0);
        let sm = d.sigma(Side::Minus, 0);
        prop_assert!(sp.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        prop_assert!(sm.windows(2).all(|w| w[1] + 1e-15 >= w[0]));
        for side in [Side::Plus, Side::Minus] {
            prop_assert!(d.moment_norm(side).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn first_u_coefficient_differentiates_to_q(p in well(), plus in any::<bool>()) {
        let side = if plus { Side::Plus } else { Side::Minus };
        let (x, u) = compute_u_coefficients(&p, side, 1, 12.0).unwrap();
        let h = x[1] - x[0];
        for i in (300..x.len() - 300).step_by(157) {
            let du = (u[1][i - 2] - 8.0 * u[1][i - 1] + 8.0 * u[1][i + 1] - u[1][i + 2]) / (12.0 * h);
            prop_assert!((du - p.shifted(side, x[i])).abs() < 1e-7);
        }
    }

    #[test]
    fn scattering_identities_on_sigma2(p in well(), t in 0.0..1.0f64) {
        let s = DirectSolver::new(&p, DirectConfig::default()).unwrap();
        let lambda = p.c_high() + 1e-3 + 300.0 * t * t;
        let up = s.lift(lambda, CutSide::Upper);
        let w0 = s.wronskian_at(&up, 0.0).unwrap();
        for xm in [-1.0, 1.3] {
            let w = s.wronskian_at(&up, xm).unwrap();
            prop_assert!((w - w0).norm() <= 1e-6 * w0.norm());
        }
        let a = s.compute_coefficients(&up).unwrap();
        let b = s.compute_coefficients(&s.lift(lambda, CutSide::Lower)).unwrap();
        let (rp, rm) = (a.r_plus.unwrap(), a.r_minus.unwrap());
        prop_assert!((a.t_plus - b.t_plus.conj()).norm() < 1e-6);
        prop_assert!((rp - b.r_plus.unwrap().conj()).norm() < 1e-6);
        let kp = (lambda - p.c_plus).sqrt();
        let km = (lambda - p.c_minus).sqrt();
        prop_assert!((1.0 - rp.norm_sqr() - km / kp * a.t_plus.norm_sqr()).abs() < 1e-6);
        prop_assert!((1.0 - rm.norm_sqr() - kp / km * a.t_minus.norm_sqr()).abs() < 1e-6);
        prop_assert!((rp.conj() * a.t_plus + rm * a.t_plus.conj()).norm() < 1e-6);
    }

    #[test]
    fn sigma1_identity(p in well(), t in 0.01..0.99f64) {
        prop_assume!(p.c_high() - p.c_low() > 0.05);
        let s = DirectSolver::new(&p, DirectConfig::default()).unwrap();
        let lambda = p.c_low() + t * (p.c_high() - p.c_low());
        let a = s.compute_coefficients(&s.lift(lambda, CutSide::Upper)).unwrap();
        let r = a.r_minus.unwrap();
        prop_assert!((a.t_minus / a.t_minus.conj() - r).norm() < 1e-6);
    }
}
