use proptest::prelude::*;
use tacnode_pearcey::phase::*;

fn bphase(alpha: f64, beta: f64, t: f64, tau: f64) -> BrownianPhase {
    brownian_phase(&BrownianConfig::new(alpha, beta, t, tau, 20).unwrap()).unwrap()
}

fn tphase(alpha: f64, tau: f64) -> TwoMatrixPhase {
    twomatrix_phase(&TwoMatrixPoint::new(alpha, tau).unwrap()).unwrap()
}

#[test]
fn brownian_documented_points() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(bphase(h, h, 0.8, 0.5), BrownianPhase::CaseI);
    assert_eq!(bphase(1.0, 0.5, 1.0, 2.0 / 3.0), BrownianPhase::Multicritical);
    assert_eq!(bphase(h, h, 1.5, 0.5), BrownianPhase::CaseIII);
    // T(0.1) = 0.5·9 + 0.5/9 ≈ 4.56
    assert_eq!(bphase(h, h, 1.5, 0.1), BrownianPhase::CaseII);
    assert_eq!(bphase(h, h, 1.0, 0.3), BrownianPhase::OnT1);
    let cusp = cusp_temperature(h, h, 0.2);
    assert_eq!(bphase(h, h, cusp, 0.2), BrownianPhase::OnCuspCurve);
}

#[test]
fn brownian_tolerance_is_relative_1e10() {
    assert_eq!(bphase(1.0, 0.5, 1.0 + 5e-11, 2.0 / 3.0), BrownianPhase::Multicritical);
    assert_eq!(bphase(1.0, 0.5, 1.0 + 1e-8, 2.0 / 3.0), BrownianPhase::CaseIII);
    assert_eq!(bphase(1.0, 0.5, 1.0 - 1e-8, 2.0 / 3.0), BrownianPhase::CaseI);
    let cfg = BrownianConfig::new(1.0, 0.5, 1.0, 0.6667, 20).unwrap();
    assert_eq!(brownian_phase(&cfg).unwrap(), BrownianPhase::OnT1);
    assert_eq!(brownian_phase_tol(&cfg, 1e-4).unwrap(), BrownianPhase::Multicritical);
}

#[test]
fn brownian_config_validation() {
    assert!(matches!(BrownianConfig::new(1.0, 0.5, 1.0, 0.5, 3), Err(PhaseError::OddN(3))));
    assert!(matches!(BrownianConfig::new(1.0, 0.5, 1.0, 1.0, 4), Err(PhaseError::TauRange(_))));
    assert!(matches!(BrownianConfig::new(-1.0, 0.5, 1.0, 0.5, 4), Err(PhaseError::NotPositive { .. })));
    let c = BrownianConfig::new(1.0, 0.5, 1.0, 0.5, 4).unwrap();
    assert!(c.require_critical().is_ok());
    let c = BrownianConfig::new(1.0, 0.7, 1.0, 0.5, 4).unwrap();
    assert!(matches!(c.require_critical(), Err(PhaseError::NotCritical(_))));
}

#[test]
fn brownian_scaling_examples() {
    let (alpha, beta) = (1.0, 0.5);
    let s = brownian_scaling(1000.0, 0.0, 0.0, alpha, beta).unwrap();
    assert!((s.tau - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(s.t_big, 1.0);
    assert_eq!(s.s, 0.0);
    assert_eq!(s.t, 0.0);
    assert!((s.c - 2f64.powf(1.0 / 3.0) * 1.5).abs() < 1e-15);
    let cfg = BrownianConfig::new(alpha, beta, s.t_big, s.tau, 1000).unwrap();
    assert_eq!(brownian_phase(&cfg).unwrap(), BrownianPhase::Multicritical);
    for k in [-1.3, 0.4, 2.0] {
        let l = 2.0 * k * k * (alpha + beta).powi(4);
        let s = brownian_scaling(500.0, k, l, alpha, beta).unwrap();
        assert!((s.s + s.t * s.t / 2.0).abs() < 1e-12 * (1.0 + s.s.abs()));
    }
}

#[test]
fn twomatrix_documented_points() {
    assert_eq!(tphase(-1.0, 1.0), TwoMatrixPhase::Multicritical);
    assert_eq!(tphase(0.0, 1.0), TwoMatrixPhase::CaseI);
    assert_eq!(tphase(-2.0, 0.70), TwoMatrixPhase::CaseIV);
    assert_eq!(tphase(2.0, 0.8), TwoMatrixPhase::CaseI);
    assert_eq!(tphase(1.0, 3.0), TwoMatrixPhase::CaseII);
    assert_eq!(tphase(-2.0, 2.0), TwoMatrixPhase::CaseIII);
    assert_eq!(tphase(-2.5, 0.2), TwoMatrixPhase::CaseIV);
    assert_eq!(tphase(2.0, 2.0), TwoMatrixPhase::PainleveCurve);
    assert_eq!(tphase(-4.0, 0.5), TwoMatrixPhase::PearceyCurve);
}

#[test]
fn twomatrix_dashed_continuations() {
    // α = −1.5: dashed √(α+2) ≈ 0.707, solid √(−1/α) ≈ 0.816
    assert_eq!(tphase(-1.5, 0.6), TwoMatrixPhase::CaseI);
    assert_eq!(tphase(-1.5, 0.75), TwoMatrixPhase::CaseIV);
    assert_eq!(tphase(-1.5, 0.9), TwoMatrixPhase::CaseIII);
    assert_eq!(tphase(-1.5, 0.5f64.sqrt()), TwoMatrixPhase::CaseI);
    // α = −0.5: solid √(α+2) ≈ 1.225, dashed √(−1/α) ≈ 1.414
    assert_eq!(tphase(-0.5, 1.0), TwoMatrixPhase::CaseI);
    assert_eq!(tphase(-0.5, 1.3), TwoMatrixPhase::CaseII);
    assert_eq!(tphase(-0.5, 1.6), TwoMatrixPhase::CaseIII);
    assert_eq!(tphase(-0.5, 2f64.sqrt()), TwoMatrixPhase::CaseII);
    // the vertical line through the multicritical point
    assert_eq!(tphase(-1.0, 0.5), TwoMatrixPhase::CaseI);
    assert_eq!(tphase(-1.0, 1.5), TwoMatrixPhase::CaseIII);
}

#[test]
fn twomatrix_scaling_examples() {
    let s = twomatrix_scaling(1000.0, 0.0, 0.0).unwrap();
    assert_eq!((s.alpha, s.tau, s.s, s.t), (-1.0, 1.0, 0.0, 0.0));
    for a in [-2.0, 0.3, 1.7] {
        let s = twomatrix_scaling(200.0, a, 3.0 * a * a / 5.0).unwrap();
        assert!((s.s + a * a / 2.0).abs() < 1e-14);
        assert_eq!(s.t, -a);
    }
    let n: f64 = 8.0;
    let s = twomatrix_scaling(n, 1.0, 1.0).unwrap();
    assert!((s.alpha - (-1.0 + 2.0 / 2.0 - 1.0 / 4.0)).abs() < 1e-15);
    assert!((s.tau - (1.0 + 1.0 / 2.0 + 2.0 / 4.0)).abs() < 1e-15);
}

#[test]
fn brownian_curves_meet_only_at_tau_crit() {
    for (alpha, beta) in [(1.0, 0.5), (0.5, 1.0), (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2), (2.0, 0.25)] {
        let xs = curve_crossings(|tau| cusp_temperature(alpha, beta, tau), |_| 1.0, 1e-3, 1.0 - 1e-3, 20_000, 1e-12);
        assert_eq!(xs.len(), 1, "{alpha} {beta}: {xs:?}");
        assert!((xs[0] - tau_crit(alpha, beta)).abs() < 1e-5);
    }
}

#[test]
fn twomatrix_curves_meet_only_at_minus_one() {
    let xs = curve_crossings(
        |a| painleve_tau(a).unwrap(),
        |a| pearcey_tau(a).unwrap(),
        -2.0,
        -1e-3,
        20_000,
        1e-12,
    );
    assert_eq!(xs.len(), 1, "{xs:?}");
    assert!((xs[0] + 1.0).abs() < 1e-5);
}

#[test]
fn diagrams_cover_grids_in_order() {
    let taus: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let temps = [0.5, 1.0, 1.5, 3.0];
    let d = brownian_diagram(1.0, 0.5, &taus, &temps).unwrap();
    assert_eq!(d.len(), 36);
    assert_eq!((d[0].x, d[0].y), (0.1, 0.5));
    assert_eq!((d[1].x, d[1].y), (0.2, 0.5));
    assert!(d.iter().filter(|p| p.y == 0.5).all(|p| p.region == BrownianPhase::CaseI.id()));
    let d = twomatrix_diagram(&[-2.0, 0.0, 1.0], &[0.2, 3.0]).unwrap();
    let labels: Vec<_> = d.iter().map(|p| p.label).collect();
    assert_eq!(labels, ["case_iv", "case_i", "case_i", "case_iii", "case_ii", "case_ii"]);
}

proptest! {
    #[test]
    fn cusp_minimum_is_two_alpha_beta(alpha in 0.05f64..5.0, beta in 0.05f64..5.0) {
        let tc = tau_crit(alpha, beta);
        let tmin = cusp_temperature(alpha, beta, tc);
        prop_assert!((tmin - 2.0 * alpha * beta).abs() <= 1e-12 * (2.0 * alpha * beta).max(1.0));
        for d in [-1e-3, 1e-3] {
            prop_assert!(cusp_temperature(alpha, beta, tc + d) >= tmin);
        }
    }

    #[test]
    fn critical_pair_is_multicritical(alpha in 0.1f64..3.0) {
        let beta = 0.5 / alpha;
        let cfg = BrownianConfig::new(alpha, beta, 1.0, tau_crit(alpha, beta), 2).unwrap();
        prop_assert_eq!(brownian_phase(&cfg).unwrap(), BrownianPhase::Multicritical);
    }

    #[test]
    fn low_temperature_is_case_i(alpha in 0.1f64..3.0, t in 0.01f64..0.999, tau in 0.01f64..0.99) {
        let beta = 0.5 / alpha;
        let cfg = BrownianConfig::new(alpha, beta, t, tau, 2).unwrap();
        prop_assert_eq!(brownian_phase(&cfg).unwrap(), BrownianPhase::CaseI);
    }

    #[test]
    fn twomatrix_solid_curves_separate(alpha in -6.0f64..4.0, eps in 1e-6f64..1e-2) {
        if alpha > -0.99 {
            let p = painleve_tau(alpha).unwrap();
            prop_assert_eq!(tphase(alpha, p * (1.0 - eps)), TwoMatrixPhase::CaseI);
            let above = tphase(alpha, p * (1.0 + eps));
            prop_assert!(above == TwoMatrixPhase::CaseII || above == TwoMatrixPhase::CaseIII);
        } else if alpha < -1.01 {
            let q = pearcey_tau(alpha).unwrap();
            prop_assert_eq!(tphase(alpha, q * (1.0 + eps)), TwoMatrixPhase::CaseIII);
            let below = tphase(alpha, q * (1.0 - eps));
            prop_assert!(below == TwoMatrixPhase::CaseIV || below == TwoMatrixPhase::CaseI);
        }
    }
}
