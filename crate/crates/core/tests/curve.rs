use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use tacnode_pearcey::curve::*;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn brownian(a: f64, sigma: f64) -> CurveParams {
    CurveParams::new(a, sigma, Model::Brownian).unwrap()
}

#[test]
fn gamma_is_star_when_sigma_vanishes() {
    let star = 4f64.powf(-4.0 / 3.0);
    for model in [Model::Brownian, Model::TwoMatrix] {
        for a in [-0.5, -1.0, -4.0, -123.0] {
            let p = CurveParams::new(a, 0.0, model).unwrap();
            assert!((p.gamma - star).abs() <= 1e-15 * star, "a={a}: {}", p.gamma);
        }
    }
}

#[test]
fn gamma_rejects_non_negative_a() {
    for a in [0.0, 1.0, f64::NAN] {
        assert!(gamma_from(a, 1.0, Model::Brownian).is_err(), "a={a}");
    }
}

#[test]
fn gamma_and_c_approach_star_values() {
    let star = 4f64.powf(-4.0 / 3.0);
    let mut prev = f64::INFINITY;
    for a in [-10.0, -100.0, -1e3, -1e4] {
        let p = brownian(a, 1.0);
        let dev = (p.gamma - star).abs();
        assert!(dev < prev, "a={a}");
        prev = dev;
    }
    let p = brownian(-1e6, 1.0);
    assert!((p.gamma - star).abs() < 1e-8);
    assert!((p.c - 3.0 * 3f64.sqrt()).abs() < 1e-6, "c={}", p.c);
}

#[test]
fn gamma_equation_residual_at_example_point() {
    let p = brownian(-4.0, 1.0);
    assert!(p.gamma_residual() < 1e-12, "{}", p.gamma_residual());
    assert!((p.c - branch_height(p.gamma)).abs() == 0.0);
}

#[test]
fn series_coefficients_match_closed_forms() {
    for gamma in [gamma_star(), 0.2, 0.12] {
        let p = CurveParams::from_gamma(gamma, Model::Brownian).unwrap();
        let g = gamma;
        let infinity: Vec<C64> = [g.powf(-1.5), 0.5 * g.powf(-2.25), -g.powf(-3.75) / 64.0, g.powf(-4.5) / 128.0, -9.0 * g.powf(-5.25) / 4096.0]
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect();
        let origin: Vec<C64> = [g.powi(-2), 2.0 / (3.0 * g), -1.0 / 3.0, 28.0 * g / 81.0].iter().map(|&x| C64::new(x, 0.0)).collect();
        let ic = vec![
            I / 3f64.sqrt() * g.powf(-1.5),
            8.0 * 3f64.powf(-1.75) * C64::from_polar(1.0, 0.75 * PI) * g.powf(-0.75),
        ];
        for (loc, sheet, expected) in [
            (SeriesLocation::Infinity, 2, infinity),
            (SeriesLocation::Origin, 2, origin),
            (SeriesLocation::Ic, 3, ic),
        ] {
            let r = verify_w_series(&p, loc, sheet).unwrap();
            assert_eq!(r.reference.len(), expected.len());
            for (got, want) in r.reference.iter().zip(&expected) {
                assert!((got - want).norm() <= 1e-14 * want.norm(), "{loc:?} reference {got} vs {want}");
            }
            assert!(r.max_rel_err <= 1e-6, "γ={g} {loc:?}: {:.2e}", r.max_rel_err);
            assert!(r.loop_closure < 1e-8, "γ={g} {loc:?}: closure {:.2e}", r.loop_closure);
        }
    }
}

#[test]
fn unsupported_series_is_an_error() {
    let p = CurveParams::star(Model::Brownian);
    assert!(verify_w_series(&p, SeriesLocation::Infinity, 1).is_err());
}

#[test]
fn sheet_four_cubic_germ_near_origin() {
    let p = brownian(-4.0, 1.0);
    let g3 = p.gamma.powi(3);
    for r in [1e-2, 3e-2, 1e-1] {
        let z = C64::from_polar(r, PI / 5.0);
        let w4 = solve_w(z, &p, Side::Interior).unwrap().sheet(4);
        let approx = z - 2.0 * g3 * z * z * z;
        assert!((w4 - approx).norm() <= 20.0 * g3 * g3 * r.powi(5), "r={r}: {w4} vs {approx}");
    }
}

#[test]
fn sheet_two_leading_terms_at_large_z() {
    let p = brownian(-4.0, 1.0);
    let g = p.gamma;
    for r in [1e4, 1e6] {
        let z = C64::from_polar(r, 0.3);
        let w2 = solve_w(z, &p, Side::Interior).unwrap().sheet(2);
        let approx = g.powf(-1.5) + 0.5 * g.powf(-2.25) / z.sqrt();
        let bound = 2.0 * g.powf(-3.75) / 64.0 * r.powf(-1.5);
        assert!((w2 - approx).norm() <= bound, "r={r}");
    }
}

#[test]
fn sheet_three_at_ic() {
    for p in [CurveParams::star(Model::Brownian), brownian(-4.0, 1.0)] {
        let w0 = I / 3f64.sqrt() * p.gamma.powf(-1.5);
        let b = 8.0 * 3f64.powf(-1.75) * C64::from_polar(1.0, 0.75 * PI) * p.gamma.powf(-0.75);
        // The branch point itself is guarded; approach it from the right.
        for eps in [1e-5, 1e-4] {
            let w = solve_w(p.ic() + eps, &p, Side::Interior).unwrap().sheet(3);
            let approx = w0 + b * eps.sqrt();
            assert!((w - approx).norm() <= 1e3 * eps * w0.norm(), "eps={eps}: {w} vs {approx}");
        }
    }
}

#[test]
fn w_hat_reproduces_sheet_four_in_first_quadrant() {
    let p = brownian(-4.0, 1.0);
    for z in [C64::new(1.0, 1.0), C64::new(0.2, 3.0), C64::new(7.0, 0.5)] {
        let h = solve_w_hat(I / z, &p).unwrap();
        let w4 = solve_w(z, &p, Side::Interior).unwrap().sheet(4);
        assert!((w4 - I / h[0]).norm() <= 1e-10 * w4.norm().max(1.0), "z={z}");
        let via_hat = w_from_hat(z, &p).unwrap();
        let direct = solve_w(z, &p, Side::Interior).unwrap();
        for j in 0..4 {
            assert!((via_hat[j] - direct.values[j]).norm() <= 1e-9 * direct.values[j].norm().max(1.0), "z={z} sheet {}", j + 1);
        }
    }
}

#[test]
fn symmetry_examples() {
    let p = brownian(-4.0, 1.0);
    let rep = verify_w_symmetries(&p, &[C64::new(1.0, 1.0), C64::new(2.0, 0.5), C64::new(1.0, 3.0)]).unwrap();
    assert!(rep.conjugation <= 1e-9, "{rep:?}");
    assert!(rep.odd_12 <= 1e-9, "{rep:?}");
    assert!(rep.odd_34 <= 1e-9, "{rep:?}");
}

#[test]
fn crosswise_relations_on_cuts() {
    for p in [CurveParams::star(Model::Brownian), brownian(-4.0, 1.0), CurveParams::new(-2.0, 1.0, Model::TwoMatrix).unwrap()] {
        let r = verify_cut_relations(&p, 100).unwrap();
        assert!(r.iter().all(|&x| x <= 1e-8), "{r:?}");
    }
}

#[test]
fn plus_side_of_segment_maps_into_imaginary_interval() {
    let p = brownian(-4.0, 1.0);
    let top = p.gamma.powf(-1.5) / 3f64.sqrt();
    for k in 1..50 {
        let y = p.c * k as f64 / 50.0;
        let w = solve_w(C64::new(0.0, y), &p, Side::Plus).unwrap().sheet(3);
        assert!(w.re.abs() <= 1e-9 * w.norm(), "y={y}: {w}");
        assert!(w.im > 0.0 && w.im < top, "y={y}: {w}");
    }
}

#[test]
fn on_cut_without_side_and_at_branch_points_are_errors() {
    let p = CurveParams::star(Model::Brownian);
    assert!(solve_w(C64::new(1.0, 0.0), &p, Side::Interior).is_err());
    assert!(solve_w(C64::new(0.0, 0.0), &p, Side::Plus).is_err());
    assert!(solve_w(p.ic(), &p, Side::Plus).is_err());
}

#[test]
fn sheet_map_is_injective_on_a_sample() {
    let p = brownian(-4.0, 1.0);
    let mut pts = Vec::new();
    for k in 0..24 {
        let z = C64::from_polar(0.3 + 0.7 * k as f64, 0.2 + 0.25 * k as f64);
        if z.re.abs() > 1e-3 && z.im.abs() > 1e-3 {
            let w = solve_w(z, &p, Side::Interior).unwrap();
            for j in 0..4 {
                pts.push((z, w.values[j]));
            }
        }
    }
    for (i, (z, w)) in pts.iter().enumerate() {
        for (z2, w2) in &pts[i + 1..] {
            if (z - z2).norm() > 1e-3 {
                assert!((w - w2).norm() > 1e-6, "{z} and {z2} share {w}");
            }
        }
    }
}

fn quadrant_point() -> impl Strategy<Value = C64> {
    (0.05f64..20.0, 0.05f64..(PI / 2.0 - 0.05), 0usize..4).prop_map(|(r, t, q)| C64::from_polar(r, t + q as f64 * PI / 2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_root_satisfies_the_curve(z in quadrant_point(), sigma in -2.0f64..2.0) {
        let p = brownian(-4.0, sigma);
        let w = solve_w(z, &p, Side::Interior).unwrap();
        for j in 1..=4 {
            prop_assert!(curve_residual(z, w.sheet(j), p.gamma) <= 1e-10);
        }
    }

    #[test]
    fn hat_roots_are_ordered_and_satisfy_their_equation(z in quadrant_point()) {
        let p = CurveParams::star(Model::Brownian);
        let g3 = p.gamma.powi(3);
        let h = solve_w_hat(z, &p).unwrap();
        for k in 0..3 {
            prop_assert!(h[k].norm() >= h[k + 1].norm());
        }
        for v in h {
            let lhs = (v * v + g3) * (v * v + g3);
            let rhs = z * v * v * v;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(rhs.norm()));
        }
    }

    #[test]
    fn symmetries_hold_off_the_cuts(z in quadrant_point()) {
        let p = brownian(-4.0, 0.7);
        let rep = verify_w_symmetries(&p, &[z]).unwrap();
        prop_assert!(rep.conjugation <= 1e-9 && rep.odd_12 <= 1e-9 && rep.odd_34 <= 1e-9, "{:?}", rep);
    }

    #[test]
    fn continuation_inside_a_quadrant_preserves_sheets(a in quadrant_point(), b in quadrant_point()) {
        // Each open quadrant is free of cuts, so straight paths stay on one sheet.
        let quadrant = |z: C64| ((z.arg() + 2.0 * PI) % (2.0 * PI) / (PI / 2.0)) as usize;
        prop_assume!(quadrant(a) == quadrant(b));
        let p = CurveParams::star(Model::Brownian);
        let path: Vec<C64> = (1..=400).map(|k| a + (b - a) * (k as f64 / 400.0)).collect();
        let wa = solve_w(a, &p, Side::Interior).unwrap();
        let wb = solve_w(b, &p, Side::Interior).unwrap();
        for j in 1..=4 {
            let end = *continue_root(&path, wa.sheet(j), p.gamma).unwrap().last().unwrap();
            prop_assert!((end - wb.sheet(j)).norm() <= 1e-8 * wb.sheet(j).norm().max(1.0));
        }
    }
}
