use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use tacnode_pearcey::curve::*;
use tacnode_pearcey::lambda::*;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

#[test]
fn coefficients_at_star_match_closed_forms() {
    let g = gamma_star();
    let k = LambdaCoeffs::new(g);
    let expected = [
        -1.5 * g.powf(33.0 / 4.0) + 3.0 / 32.0 * g.powf(27.0 / 4.0),
        3.5 * g.powf(21.0 / 4.0) + 17.0 / 32.0 * g.powf(15.0 / 4.0),
        -2.5 * g.powf(9.0 / 4.0) - 65.0 / 96.0 * g.powf(3.0 / 4.0),
        0.5 * g.powf(-3.0 / 4.0) + 5.0 / 96.0 * g.powf(-9.0 / 4.0),
    ];
    for (got, want) in [k.c1, k.c2, k.c3, k.c4].into_iter().zip(expected) {
        assert!((got - want).abs() <= 1e-14 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn jump_on_positive_axis_at_one() {
    let p = CurveParams::star(Model::Brownian);
    let x = C64::new(1.0, 0.0);
    let plus = lambda_values(x, &p, Side::Plus).unwrap();
    let minus = lambda_values(x, &p, Side::Minus).unwrap();
    assert!(rel(plus.sheet(3), minus.sheet(1)) <= 1e-9);
    assert!(rel(plus.sheet(1), minus.sheet(3)) <= 1e-9);
}

#[test]
fn odd_sheet_symmetry_example() {
    let p = CurveParams::new(-4.0, 1.0, Model::Brownian).unwrap();
    let z = C64::new(1.0, 0.3);
    let l = lambda_values(z, &p, Side::Interior).unwrap();
    let lm = lambda_values(-z, &p, Side::Interior).unwrap();
    assert!(rel(lm.sheet(1), l.sheet(2)) <= 1e-9);
}

#[test]
fn sheet_sum_is_schwarz_symmetric() {
    let p = CurveParams::new(-4.0, 1.0, Model::Brownian).unwrap();
    let z = C64::new(1.3, 0.8);
    let s: C64 = lambda_values(z, &p, Side::Interior).unwrap().values.iter().sum();
    let sc: C64 = lambda_values(z.conj(), &p, Side::Interior).unwrap().values.iter().sum();
    assert!(rel(sc, s.conj()) <= 1e-12);
}

#[test]
fn ell_and_d_agree_across_sheets_and_are_real() {
    for gamma in [gamma_star(), 0.2, 0.12] {
        let p = CurveParams::from_gamma(gamma, Model::Brownian).unwrap();
        let e = estimate_ell_d(&p).unwrap();
        assert!(e.fit_residual <= 1e-8, "γ={gamma}: {}", e.fit_residual);
        assert!((e.ell - e.ell_from_l4).norm() <= 1e-7 * e.ell.norm().max(1.0), "γ={gamma}: {} vs {}", e.ell, e.ell_from_l4);
        assert!(e.ell.im.abs() <= 1e-10 && e.d.im.abs() <= 1e-10, "γ={gamma}: {} {}", e.ell, e.d);
    }
}

#[test]
fn ell_and_d_star_regression() {
    // Frozen from the first verified run; both agree with 4/3 and 7/8 to
    // the printed precision.
    let e = estimate_ell_d(&CurveParams::star(Model::Brownian)).unwrap();
    assert!((e.ell.re - 4.0 / 3.0).abs() <= 1e-10, "{}", e.ell);
    assert!((e.d.re - 7.0 / 8.0).abs() <= 1e-10, "{}", e.d);
}

#[test]
fn local_constants_at_star() {
    let [g0, h0, k0, l0] = local_constants(gamma_star());
    assert!(g0.abs() <= 1e-14);
    assert!((h0 - 3.0 * 4f64.powf(-2.0 / 3.0)).abs() <= 1e-14);
    assert!((k0 - 1.0 / 24.0).abs() <= 1e-15);
    assert!((l0 - 16.0 / 3.0).abs() <= 1e-13);
    let e = local_expansion(&CurveParams::star(Model::Brownian), 6).unwrap();
    assert!(e.g0.abs() <= 1e-6);
    assert!((e.h0 - 3.0 * 4f64.powf(-2.0 / 3.0)).abs() <= 1e-6 * h0);
    assert!((e.k0 - 1.0 / 24.0).abs() <= 1e-6 / 24.0);
    assert!((e.l0 - 16.0 / 3.0).abs() <= 1e-6 * 16.0 / 3.0);
}

#[test]
fn local_constants_for_other_gammas() {
    for gamma in [0.2, 0.12] {
        let e = local_expansion(&CurveParams::from_gamma(gamma, Model::Brownian).unwrap(), 6).unwrap();
        let closed = local_constants(gamma);
        for (got, want) in [e.g0, e.h0, e.k0, e.l0].into_iter().zip(closed) {
            assert!((got - want).abs() <= 1e-6 * want.abs(), "γ={gamma}: {got} vs {want}");
        }
        assert!(e.split_residual <= 1e-6, "γ={gamma}: {}", e.split_residual);
    }
}

#[test]
fn sheet_four_tends_to_l0() {
    let gamma = 0.2;
    let p = CurveParams::from_gamma(gamma, Model::Brownian).unwrap();
    let l0 = local_constants(gamma)[3];
    let z = C64::from_polar(1e-3, PI / 4.0);
    let l4 = lambda_values(z, &p, Side::Interior).unwrap().sheet(4);
    assert!((l4 - l0).norm() <= 1e-4 * l0, "{l4} vs {l0}");
}

#[test]
fn tilde_constants_at_star() {
    let (gt, ht) = tilde_constants(gamma_star());
    assert!((gt - 9.0).norm() <= 1e-13);
    let ht_star = -(2.0 / 3f64.powf(1.75)) * C64::from_polar(1.0, 0.75 * PI);
    assert!((ht - ht_star).norm() <= 1e-14);
    for gamma in [gamma_star(), 0.2, 0.12] {
        let p = CurveParams::from_gamma(gamma, Model::Brownian).unwrap();
        let (gx, hx) = tilde_expansion(&p).unwrap();
        let (gc, hc) = tilde_constants(gamma);
        assert!((gx - gc).norm() <= 1e-6 * gc.norm(), "γ={gamma}");
        assert!((hx - hc).norm() <= 1e-6 * hc.norm(), "γ={gamma}");
        assert!(tilde_odd_defect(&p).unwrap() <= 1e-8);
    }
}

#[test]
fn convergence_bound_examples() {
    let pts: Vec<C64> = (0..20).map(|k| C64::from_polar(0.6 + k as f64, 0.3 * k as f64 + 0.1)).collect();
    for model in [Model::Brownian, Model::TwoMatrix] {
        let r = convergence_bound(&[-4.0, -8.0], 0.0, model, &pts).unwrap();
        assert!(r.normalized.iter().all(|&v| v == 0.0), "{r:?}");
        let r = convergence_bound(&[-4.0, -8.0, -16.0, -32.0], 1.0, model, &pts).unwrap();
        assert!(r.spread < 3.0, "{r:?}");
    }
    let r = convergence_bound(&[-8.0, -16.0], 1.0, Model::Brownian, &[C64::new(2.0, 1.0)]).unwrap();
    let ratio = r.normalized[0] / r.normalized[1];
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "{ratio}");
    let near = convergence_bound(&[-16.0], 1.0, Model::Brownian, &[C64::from_polar(10.0, 1.0)]).unwrap();
    let far = convergence_bound(&[-16.0], 1.0, Model::Brownian, &[C64::from_polar(100.0, 1.0)]).unwrap();
    assert!(far.normalized[0] <= 3.0 * near.normalized[0], "{near:?} {far:?}");
}

#[test]
fn sign_examples() {
    let p = CurveParams::star(Model::Brownian);
    let z = C64::from_polar(1.0, PI / 4.0);
    let l = lambda_values(z, &p, Side::Interior).unwrap();
    assert!((l.sheet(1) - l.sheet(2)).re < 0.0);
    assert!((l.sheet(1) - l.sheet(3)).re < 0.0);
    let i = C64::new(0.0, 1.0);
    let plus = lambda_values(i, &p, Side::Plus).unwrap().sheet(4);
    let minus = lambda_values(i, &p, Side::Minus).unwrap().sheet(4);
    assert!((plus - minus).re < 0.0);
}

#[test]
fn sign_reports_have_no_violations() {
    let params = [CurveParams::star(Model::Brownian), CurveParams::new(-8.0, 1.0, Model::TwoMatrix).unwrap()];
    let contours = [
        SignContour::Gamma1,
        SignContour::Gamma1Tilde2,
        SignContour::GammaTilde3,
        SignContour::Gamma4,
        SignContour::ImagSegment,
    ];
    for p in &params {
        for c in contours {
            let r = contour_sign_report(p, c, 200, 30.0).unwrap();
            assert_eq!(r.violations, 0, "{c:?}");
            assert!(r.constants.iter().all(|&k| k > 0.0), "{c:?}: {:?}", r.constants);
            assert_eq!(r.rows.len(), 200);
        }
    }
}

fn off_axis_point() -> impl Strategy<Value = C64> {
    (0.05f64..15.0, 0.05f64..(PI / 2.0 - 0.05), 0usize..4).prop_map(|(r, t, q)| C64::from_polar(r, t + q as f64 * PI / 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jumps_on_the_three_cuts(x in 0.01f64..30.0, s in 0.02f64..0.98, sigma in -1.5f64..1.5) {
        let p = CurveParams::new(-4.0, sigma, Model::Brownian).unwrap();
        let pos = C64::new(x, 0.0);
        let (pp, pm) = (lambda_values(pos, &p, Side::Plus).unwrap(), lambda_values(pos, &p, Side::Minus).unwrap());
        prop_assert!(rel(pp.sheet(1), pm.sheet(3)) <= 1e-9 && rel(pm.sheet(1), pp.sheet(3)) <= 1e-9);
        let neg = -pos;
        let (np, nm) = (lambda_values(neg, &p, Side::Plus).unwrap(), lambda_values(neg, &p, Side::Minus).unwrap());
        prop_assert!(rel(np.sheet(2), nm.sheet(4)) <= 1e-9 && rel(nm.sheet(2), np.sheet(4)) <= 1e-9);
        for sign in [1.0, -1.0] {
            let iy = C64::new(0.0, sign * s * p.c);
            let (sp, sm) = (lambda_values(iy, &p, Side::Plus).unwrap(), lambda_values(iy, &p, Side::Minus).unwrap());
            prop_assert!(rel(sp.sheet(3), sm.sheet(4)) <= 1e-9 && rel(sm.sheet(3), sp.sheet(4)) <= 1e-9);
        }
    }

    #[test]
    fn symmetries_off_the_cuts(z in off_axis_point(), sigma in -1.5f64..1.5) {
        let p = CurveParams::new(-4.0, sigma, Model::TwoMatrix).unwrap();
        let l = lambda_values(z, &p, Side::Interior).unwrap();
        let lc = lambda_values(z.conj(), &p, Side::Interior).unwrap();
        let lm = lambda_values(-z, &p, Side::Interior).unwrap();
        for j in 1..=4 {
            prop_assert!(rel(lc.sheet(j), l.sheet(j).conj()) <= 1e-9);
        }
        prop_assert!(rel(lm.sheet(1), l.sheet(2)) <= 1e-9);
        prop_assert!(rel(lm.sheet(3), l.sheet(4)) <= 1e-9);
    }
}
