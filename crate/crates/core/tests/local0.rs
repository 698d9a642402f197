use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use tacnode_pearcey::curve::{gamma_star, Model, Side};
use tacnode_pearcey::lambda::local_constants;
use tacnode_pearcey::local0::*;
use tacnode_pearcey::pearcey::pearcey_kernel_integral;

fn frame(a: f64, sigma: f64, model: Model) -> LocalFrame {
    LocalFrame::build(a, sigma, model).unwrap()
}

#[test]
fn rejects_large_disk() {
    let p = tacnode_pearcey::curve::CurveParams::new(-4.0, 0.0, Model::Brownian).unwrap();
    assert!(matches!(LocalFrame::new(&p, 0.6), Err(Local0Error::Delta(_))));
}

#[test]
fn f_is_conformal_with_expected_slope() {
    let fr = frame(-6.0, 1.0, Model::Brownian);
    assert!(fr.conformality() > 0.5);
    // f'(0) = |a|^{9/4}(4H(0)/3)^{3/4} and (4H₀/3)^{3/4} = √2 at γ*.
    let h0 = local_constants(fr.params.gamma)[1];
    let expect = fr.n.powf(0.75) * (4.0 * h0 / 3.0).powf(0.75);
    assert!((fr.f_prime(C64::new(0.0, 0.0)).re - expect).abs() < 1e-10 * expect);
    let star = frame(-6.0, 0.0, Model::Brownian);
    let s = star.f_prime(C64::new(0.0, 0.0)).re / star.n.powf(0.75);
    assert!((s - 2f64.sqrt()).abs() < 1e-12, "{s}");
    assert!((gamma_star() - star.params.gamma).abs() < 1e-15);
}

#[test]
fn f_scaling_limit() {
    let mut prev = f64::INFINITY;
    for a in [-4.0, -8.0, -16.0, -32.0] {
        let fr = frame(a, 1.0, Model::Brownian);
        let u = fr.scaled(1.0);
        let d = (fr.f(C64::new(u, 0.0)).re - 1.0).abs();
        assert!(d < prev, "a={a}: {d:e}");
        prev = d;
    }
    assert!(prev < 1e-3);
}

#[test]
fn rho_at_origin_tends_to_signed_sigma() {
    for (model, sign) in [(Model::Brownian, 1.0), (Model::TwoMatrix, -1.0)] {
        let mut prev = f64::INFINITY;
        for a in [-8.0, -16.0, -32.0] {
            let fr = frame(a, 1.0, model);
            let r = fr.rho(C64::new(0.0, 0.0));
            assert!(r.im.abs() < 1e-14);
            let d = (r.re - sign).abs();
            assert!(d < prev, "{model:?} a={a}: {d:e}");
            prev = d;
        }
        assert!(prev < 1e-3);
    }
}

#[test]
fn theta_identities_in_all_quadrants() {
    for (a, s, m) in [(-4.0, 0.0, Model::Brownian), (-6.0, 1.0, Model::Brownian), (-9.0, 2.0, Model::TwoMatrix)] {
        let fr = frame(a, s, m);
        let mut pts = vec![C64::from_polar(0.1, PI / 5.0)];
        for q in 0..4 {
            for r in [0.05, 0.2, 0.45] {
                pts.push(C64::from_polar(r, PI / 2.0 * q as f64 + 0.3 + 0.2 * r));
            }
        }
        for z in pts {
            let res = fr.theta_identity_residual(z).unwrap();
            assert!(res < 1e-8, "a={a} z={z}: {res:e}");
        }
    }
}

#[test]
fn e0_has_no_jumps_on_the_axes() {
    for (a, s, m) in [(-4.0, 0.0, Model::Brownian), (-8.0, 1.5, Model::TwoMatrix)] {
        let [re, im] = frame(a, s, m).e0_jump_residuals(40).unwrap();
        assert!(re < 1e-8 && im < 1e-8, "a={a}: {re:e} {im:e}");
    }
}

#[test]
fn gamma1_jump_of_local_parametrix() {
    let fr = frame(-3.0, 0.5, Model::Brownian);
    let res = fr.gamma1_jump_residual(&[0.7, 1.5, 3.0, 5.0]).unwrap();
    assert!(res < 1e-7, "{res:e}");
}

#[test]
fn local_parametrix_is_bounded_near_origin() {
    let fr = frame(-3.0, 0.5, Model::Brownian);
    let m3 = ring_max(&fr, 1e-3, 16).unwrap();
    let m4 = ring_max(&fr, 1e-4, 16).unwrap();
    assert!(m3.is_finite() && (m4 / m3) < 1.5, "{m3} {m4}");
}

#[test]
fn imaginary_axis_jump_is_constant() {
    // On iℝ the two sides differ by C₋·diag(e^{nλ}) against C₊, which
    // reduces to the fixed segment jump of the global parametrix.
    let fr = frame(-3.0, 0.5, Model::Brownian);
    for t in [0.05, 0.2, -0.1] {
        let z = C64::new(0.0, t);
        let p = fr.local_parametrix(z, Side::Plus).unwrap();
        let m = fr.local_parametrix(z, Side::Minus).unwrap();
        let j = tacnode_pearcey::rh_chain::global_segment_jump();
        let scale = tacnode_pearcey::numerics::mat::max_abs4(&p);
        let r = tacnode_pearcey::numerics::mat::max_abs4(&(p - m * j)) / scale;
        assert!(r < 1e-8, "t={t}: {r:e}");
    }
}

#[test]
fn tacnode_vectors_from_jumps() {
    let re = |v: [C64; 4]| v.map(|c| c.re);
    let (r, c) = tacnode_vectors(true).unwrap();
    assert_eq!(re(r), [-1.0, 0.0, 1.0, 0.0]);
    assert_eq!(re(c), [1.0, 0.0, 1.0, 0.0]);
    let (r, c) = tacnode_vectors(false).unwrap();
    assert_eq!(re(r), [0.0, -1.0, 0.0, 1.0]);
    assert_eq!(re(c), [0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn matching_decreases_from_a4_to_a8() {
    for s in [0.0, 2.0] {
        let a4 = frame(-4.0, s, Model::Brownian).matching_sup(64).unwrap();
        let a8 = frame(-8.0, s, Model::Brownian).matching_sup(64).unwrap();
        assert!(a8 < a4, "σ={s}: {a4:e} {a8:e}");
    }
}

#[test]
fn e0_growth_rate() {
    let r = matching_report(&[-4.0, -8.0, -16.0, -32.0], 0.5, 1.0, Model::Brownian, 16).unwrap();
    assert!((r.e0_slope - 0.75).abs() < 0.1, "{}", r.e0_slope);
}

#[test]
fn tacnode_converges_at_documented_point() {
    let target = pearcey_kernel_integral(-0.4, 0.7, 1.0).unwrap();
    let mut prev = f64::INFINITY;
    for a in [-6.0, -10.0, -16.0, -26.0] {
        let k = tacnode_kernel_approx(0.7, -0.4, 1.0, a).unwrap();
        let e = (k.value - target).abs();
        assert!(e < prev, "a={a}: {e:e}");
        assert!(k.imag < 1e-8 * k.value.abs());
        prev = e;
    }
}

#[test]
fn critical_converges_at_documented_point() {
    let target = pearcey_kernel_integral(0.5, -0.8, 0.0).unwrap();
    let mut prev = f64::INFINITY;
    for a in [-6.0, -10.0, -16.0, -26.0] {
        let k = critical_kernel_approx(0.5, -0.8, 0.0, a).unwrap();
        let e = (k.value - target).abs();
        assert!(e < prev, "a={a}: {e:e}");
        assert!(k.imag < 1e-8 * k.value.abs());
        prev = e;
    }
}

#[test]
fn critical_limit_form_rotates_to_pearcey() {
    for (x, y, s) in [(0.5, -0.8, 0.0), (1.2, 0.4, 1.0), (-0.6, -1.1, -0.5), (-0.3, 0.9, 0.7)] {
        let raw = critical_limit_form(x, y, s).unwrap();
        let k = pearcey_kernel_integral(x, y, s).unwrap();
        assert!((raw.re - k).abs() < 1e-8 * k.abs().max(1.0) && raw.im.abs() < 1e-8, "{x} {y} {s}: {raw} {k}");
    }
}

#[test]
fn out_of_disk_arguments_are_rejected() {
    let fr = frame(-2.0, 0.0, Model::Brownian);
    let err = fr.kernel_approx(KernelKind::Tacnode, 40.0, 1.0).unwrap_err();
    assert!(matches!(err, Local0Error::OutOfDisk(_)));
    assert!(matches!(fr.kernel_approx(KernelKind::Critical, 0.5, 0.5), Err(Local0Error::KernelArgs(..))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn reflected_tacnode_is_transpose(x in -1.5f64..1.5, y in -1.5f64..1.5, a in -20.0f64..-6.0, s in -1.0f64..1.0) {
        prop_assume!(x.abs() > 0.05 && y.abs() > 0.05 && (x - y).abs() > 0.05);
        let fr = LocalFrame::build(a, s, Model::Brownian).unwrap();
        let px = fr.kernel_point(x, KernelKind::Tacnode).unwrap();
        let py = fr.kernel_point(y, KernelKind::Tacnode).unwrap();
        let refl = fr.reflected_tacnode(&px, &py).unwrap();
        let swapped = fr.compose(KernelKind::Tacnode, &py, &px).unwrap();
        prop_assert!((refl.re - swapped.value).abs() < 1e-9 * swapped.value.abs().max(1.0));
        prop_assert!(refl.im.abs() < 1e-9);
    }
}
