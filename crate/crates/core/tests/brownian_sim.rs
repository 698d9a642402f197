use proptest::prelude::*;
use std::sync::OnceLock;
use tacnode_pearcey::brownian_sim::*;
use tacnode_pearcey::phase::{brownian_phase, BrownianConfig, BrownianPhase};

const FIG_A: (f64, f64) = (1.0, 0.7);
const FIG_B: (f64, f64) = (0.4, 0.3);
const FIG_C: (f64, f64) = (1.0, 0.5);

fn fig(ab: (f64, f64)) -> &'static PathEnsemble {
    static A: OnceLock<PathEnsemble> = OnceLock::new();
    static B: OnceLock<PathEnsemble> = OnceLock::new();
    static C: OnceLock<PathEnsemble> = OnceLock::new();
    let cell = match ab {
        FIG_A => &A,
        FIG_B => &B,
        _ => &C,
    };
    cell.get_or_init(|| sample_paths(&SimConfig::new(20, 1.0, ab.0, ab.1)).unwrap())
}

fn critical64() -> &'static PathEnsemble {
    static E: OnceLock<PathEnsemble> = OnceLock::new();
    E.get_or_init(|| sample_paths(&SimConfig::new(64, 1.0, FIG_C.0, FIG_C.1)).unwrap())
}

/// Macroscopic top-group center and semicircle radius of one block.
fn macro_edge(alpha: f64, beta: f64, t: f64, tau: f64) -> (f64, f64) {
    ((1.0 - tau) * alpha + tau * beta, (2.0 * tau * (1.0 - tau) * t).sqrt())
}

#[test]
fn config_validation() {
    let mut c = SimConfig::new(21, 1.0, 1.0, 0.5);
    assert_eq!(sample_paths(&c).unwrap_err(), SimError::OddN(21));
    c.n = 20;
    c.time_steps = 1;
    assert!(matches!(c.validate(), Err(SimError::TooFew { name: "time_steps", .. })));
    c.time_steps = 200;
    c.t = 0.0;
    assert!(matches!(c.validate(), Err(SimError::NotPositive { name: "T", .. })));
}

#[test]
fn grid_contains_tau_crit_for_critical_configs() {
    let g = SimConfig::new(20, 1.0, 1.0, 0.5).time_grid();
    assert_eq!(g.len(), 202);
    assert!(g.iter().any(|&t| (t - 2.0 / 3.0).abs() < 1e-15));
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    let g = SimConfig::new(20, 1.0, 1.0, 0.7).time_grid();
    assert_eq!(g.len(), 201);
    assert_eq!((g[0], g[200]), (0.0, 1.0));
    // τ_crit = 1/2 is already a grid point
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(SimConfig::new(20, 1.0, h, h).time_grid().len(), 201);
}

#[test]
fn free_entry_variance_matches_transition_density() {
    let mut cfg = SimConfig::new(20, 1.3, 1.0, 0.5);
    cfg.seed = 7;
    let times = cfg.time_grid();
    let scale = (cfg.t / cfg.n as f64).sqrt();
    let samples = 2000;
    for tau in [0.25, 0.5, 0.8] {
        let k = times.iter().position(|&t| (t - tau).abs() < 1e-12).unwrap();
        let target = tau * (1.0 - tau) * cfg.t / cfg.n as f64;
        for (i, j) in [(3, 3), (2, 7)] {
            let vals: Vec<f64> = (0..samples)
                .map(|s| {
                    let (re, im) = entry_bridge(&cfg, &times, s, i, j);
                    scale * scale * (re[k] * re[k] + im[k] * im[k])
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            let se = (var / samples as f64).sqrt();
            assert!((mean - target).abs() <= 5.0 * se, "τ={tau} ({i},{j}): {mean} vs {target} ± {se}");
        }
    }
}

#[test]
fn samples_are_reproducible_and_keyed() {
    let mut cfg = SimConfig::new(8, 1.0, 1.0, 0.5);
    cfg.samples = 3;
    cfg.time_steps = 20;
    let a = sample_paths(&cfg).unwrap();
    let b = sample_paths(&cfg).unwrap();
    for s in 0..3 {
        for k in 0..a.times.len() {
            assert_eq!(a.positions(s, k), b.positions(s, k));
        }
    }
    cfg.samples = 5;
    let c = sample_paths(&cfg).unwrap();
    assert_eq!(a.positions(2, 10), c.positions(2, 10));
    cfg.seed = 1;
    let d = sample_paths(&cfg).unwrap();
    assert_ne!(a.positions(0, 10), d.positions(0, 10));
}

#[test]
fn pinning_and_ordering_n20() {
    for ab in [FIG_A, FIG_B, FIG_C] {
        let e = fig(ab);
        assert!(e.pinning_error() <= 1e-9, "{ab:?}: {}", e.pinning_error());
        assert!(e.min_spacing() > 0.0, "{ab:?}: {}", e.min_spacing());
    }
}

#[test]
fn pinning_and_ordering_n64() {
    let e = critical64();
    assert_eq!(e.samples(), 200);
    assert!(e.pinning_error() <= 1e-9);
    assert!(e.min_spacing() > 0.0);
}

#[test]
fn start_collapses_to_alpha() {
    let e = fig(FIG_C);
    for s in 0..e.samples() {
        assert!(e.positions(s, 0).iter().all(|x| (x.abs() - 1.0).abs() <= 1e-6));
    }
    let h = hull(e);
    let at0: Vec<_> = h.iter().filter(|r| r.time == 0.0).collect();
    assert_eq!(at0.len(), 3);
    for r in at0 {
        match r.group {
            Group::Top => assert_eq!((r.lo, r.hi), (1.0, 1.0)),
            Group::Bottom => assert_eq!((r.lo, r.hi), (-1.0, -1.0)),
            Group::All => assert_eq!((r.lo, r.hi), (-1.0, 1.0)),
        }
    }
}

#[test]
fn critical_density_is_two_touching_semicircles() {
    let e = critical64();
    let k = e.time_index(2.0 / 3.0).unwrap();
    let r = 1.0 / (FIG_C.0 + FIG_C.1);
    let d = ks_distance(&e.pooled(k), |x| touching_semicircles_cdf(r, x));
    assert!(d <= 0.05, "KS distance {d}");
}

#[test]
fn symmetric_config_density_is_mirror_symmetric() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = sample_paths(&SimConfig::new(20, 1.0, h, h)).unwrap();
    let k = e.time_index(0.3).unwrap();
    let bins = 24;
    let hist = density_at(&e, 0.3, bins).unwrap();
    assert!((hist.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let r = e.pooled(k).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let w = 2.0 * r / bins as f64;
    let per_sample: Vec<Vec<f64>> = (0..e.samples())
        .map(|s| {
            let mut m = vec![0.0; bins];
            for &x in e.positions(s, k) {
                m[(((x + r) / w).floor() as usize).min(bins - 1)] += 1.0 / e.n() as f64;
            }
            m
        })
        .collect();
    let ns = e.samples() as f64;
    for b in 0..bins / 2 {
        let diffs: Vec<f64> = per_sample.iter().map(|m| m[b] - m[bins - 1 - b]).collect();
        let mean = diffs.iter().sum::<f64>() / ns;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (ns - 1.0)).sqrt();
        let pooled = hist.mass[b] - hist.mass[bins - 1 - b];
        assert!((pooled - mean).abs() < 1e-12);
        assert!(pooled.abs() <= 3.0 * sd / ns.sqrt() + 1e-15, "bin {b}: {pooled} vs se {}", sd / ns.sqrt());
    }
    let pos: Vec<f64> = (0..e.samples()).map(|s| e.positions(s, k).iter().filter(|&&x| x > 0.0).count() as f64 / e.n() as f64).collect();
    let mean = pos.iter().sum::<f64>() / ns;
    let sd = (pos.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (ns - 1.0)).sqrt();
    assert!((mean - 0.5).abs() <= 3.0 * sd / ns.sqrt() + 1e-15, "{mean}");
}

#[test]
fn density_rejects_off_grid_times() {
    let e = fig(FIG_A);
    assert_eq!(density_at(e, 0.1234, 10).unwrap_err(), SimError::OffGrid(0.1234));
    let h = density_at(e, 0.5, 10).unwrap();
    assert_eq!(h.centers.len(), 10);
    assert!((h.centers[0] + h.centers[9]).abs() < 1e-12);
}

#[test]
fn large_separation_hull_inside_ellipse() {
    let (a, b) = FIG_A;
    for r in hull(fig(FIG_A)).iter().filter(|r| r.group == Group::Top) {
        let (c, w) = macro_edge(a, b, 1.0, r.time);
        assert!(r.hi <= c + 1.15 * w + 1e-12 && r.lo >= c - 1.15 * w - 1e-12, "{r:?}");
    }
}

#[test]
fn large_separation_groups_stay_apart() {
    let (a, b) = FIG_A;
    let e = fig(FIG_A);
    let last = e.times.len() - 1;
    let macro_gap = |tau: f64| {
        let (c, w) = macro_edge(a, b, 1.0, tau);
        2.0 * (c - w)
    };
    let margin = (1..last).map(|k| macro_gap(e.times[k])).fold(f64::INFINITY, f64::min);
    assert!(margin > 0.0);
    for k in 1..last {
        assert!(e.mean_group_gap(k) >= macro_gap(e.times[k]), "τ={}", e.times[k]);
    }
    let min_gap = (0..e.samples()).flat_map(|s| (1..last).map(move |k| (s, k))).map(|(s, k)| e.group_gap(s, k)).fold(f64::INFINITY, f64::min);
    assert!(min_gap > 0.0);
}

#[test]
fn small_separation_merges_at_mid_time() {
    let e = fig(FIG_B);
    assert_eq!(e.support(e.time_index(0.5).unwrap()), Support::OneInterval);
    assert_eq!(fig(FIG_A).support(fig(FIG_A).time_index(0.5).unwrap()), Support::TwoIntervals);
}

#[test]
fn critical_separation_touches_near_tau_crit() {
    let e = fig(FIG_C);
    let tc = 2.0 / 3.0;
    let last = e.times.len() - 1;
    let mut argmins: Vec<f64> = (0..e.samples())
        .map(|s| {
            let k = (1..last).min_by(|&x, &y| e.group_gap(s, x).total_cmp(&e.group_gap(s, y))).unwrap();
            e.times[k]
        })
        .collect();
    argmins.sort_by(f64::total_cmp);
    let median = argmins[argmins.len() / 2];
    // macroscopic gap 2(c − r) stays below the bulk spacing for |τ − τc| ≤ 0.1
    assert!((median - tc).abs() <= 0.1, "median argmin {median}");
    let global = (0..e.samples()).flat_map(|s| (1..last).map(move |k| e.group_gap(s, k))).fold(f64::INFINITY, f64::min);
    assert!(global >= 0.0 && global < 1e-2, "{global}");
    let far = fig(FIG_A);
    let far_min = (0..far.samples()).flat_map(|s| (1..last).map(move |k| far.group_gap(s, k))).fold(f64::INFINITY, f64::min);
    assert!(global < 0.1 * far_min);
}

#[test]
fn critical_envelope_minimum_near_tau_crit() {
    let e = critical64();
    let k = e.time_index(2.0 / 3.0).unwrap();
    let top: Vec<_> = hull(e).into_iter().filter(|r| r.group == Group::Top).collect();
    let imin = (0..top.len()).min_by(|&a, &b| top[a].lo.total_cmp(&top[b].lo)).unwrap();
    assert!((imin as i64 - k as i64).abs() <= 2, "argmin at step {imin}, τ_crit at {k}");
}

#[test]
fn phase_agrees_with_mid_time_support() {
    for (ab, expect) in [(FIG_A, BrownianPhase::CaseI), (FIG_B, BrownianPhase::CaseIII), (FIG_C, BrownianPhase::OnT1)] {
        let cfg = BrownianConfig::new(ab.0, ab.1, 1.0, 0.5, 20).unwrap().normalized();
        let phase = brownian_phase(&cfg).unwrap();
        assert_eq!(phase, expect, "{ab:?}");
        let e = fig(ab);
        let observed = e.support(e.time_index(0.5).unwrap());
        let single = phase == BrownianPhase::CaseIII;
        assert_eq!(observed == Support::OneInterval, single, "{ab:?}");
    }
}

proptest! {
    #[test]
    fn bridge_is_pinned_and_linear(zs in prop::collection::vec(-3.0f64..3.0, 11), c in -2.0f64..2.0) {
        let times: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let b = midpoint_bridge(&times, |k| zs[k]);
        let bc = midpoint_bridge(&times, |k| c * zs[k]);
        prop_assert_eq!(b[0], 0.0);
        prop_assert_eq!(b[10], 0.0);
        for k in 0..11 {
            prop_assert!((bc[k] - c * b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn semicircle_cdf_is_a_cdf(r in 0.1f64..3.0, x in -5.0f64..5.0, dx in 0.0f64..1.0) {
        prop_assert_eq!(touching_semicircles_cdf(r, -2.0 * r), 0.0);
        prop_assert!((touching_semicircles_cdf(r, 2.0 * r) - 1.0).abs() < 1e-15);
        prop_assert!((touching_semicircles_cdf(r, 0.0) - 0.5).abs() < 1e-15);
        prop_assert!(touching_semicircles_cdf(r, x + dx) >= touching_semicircles_cdf(r, x));
        prop_assert!((touching_semicircles_cdf(r, x) + touching_semicircles_cdf(r, -x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_of_quantiles_is_one_over_n(n in 10usize..400) {
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        prop_assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
