//! Acceptance criteria 1–10 as named numerical checks, shared by the
//! `acceptance` test target and the `all-acceptance` subcommand.

use crate::brownian_sim::{extrapolated_gap, ks_distance, sample_paths, touching_semicircles_cdf, PathEnsemble, SimConfig, SimError};
use crate::curve::{
    curve_residual, gamma_star, solve_w, verify_cut_relations, verify_w_series, verify_w_symmetries, w_from_hat,
    CurveError, CurveParams, Model, SeriesLocation, Side,
};
use crate::lambda::{
    contour_sign_report, convergence_bound, estimate_ell_d, local_constants, local_expansion, tilde_constants,
    SignContour,
};
use crate::local0::{
    convergence_table, loglog_slope, matching_report, ConvergenceRow, KernelKind, Local0Error, LocalFrame, MatchingReport,
};
use crate::numerics::cis;
use crate::pearcey::{
    check_rotation_symmetry, consistency_grid, l_pe, pe_prefactor, pearcey_pq, PearceyError, PearceyParametrix,
    Sector,
};
use crate::phase::{
    brownian_phase, cusp_temperature, tau_crit, twomatrix_phase, BrownianConfig, BrownianPhase, PhaseError,
    TwoMatrixPhase, TwoMatrixPoint,
};
use crate::rh_chain::{cyclic_consistency, global_check, pieces, system_jump, transform_chain_audit, RhError, System};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// `Γ(1/4)`.
pub const GAMMA_QUARTER: f64 = 3.6256099082219083119;

/// Seed of the random parameter draws in criteria 1 and 10.
pub const SEED: u64 = 20_240_601;

#[derive(Debug, thiserror::Error)]
pub enum AcceptanceError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Pearcey(#[from] PearceyError),
    #[error(transparent)]
    Rh(#[from] RhError),
    #[error(transparent)]
    Local0(#[from] Local0Error),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("unknown criterion {0}")]
    Unknown(usize),
}

type Result<T> = std::result::Result<T, AcceptanceError>;

/// One measured quantity with its admissible interval.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let pass = value.is_finite() && lo.map_or(true, |l| value >= l) && hi.map_or(true, |h| value <= h);
        Check { name: name.into(), value, lo, hi, pass }
    }

    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Self::within(name, value, None, Some(hi))
    }

    pub fn at_least(name: impl Into<String>, value: f64, lo: f64) -> Self {
        Self::within(name, value, Some(lo), None)
    }

    /// Boolean outcome recorded as 1 (true) or 0 (false), required to be 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::within(name, if ok { 1.0 } else { 0.0 }, Some(1.0), Some(1.0))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bound = |b: Option<f64>, inf: &str| b.map_or(inf.to_string(), |v| format!("{v:e}"));
        write!(f, "{}={:.6e} (allowed [{}, {}])", self.name, self.value, bound(self.lo, "-inf"), bound(self.hi, "inf"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub const TITLES: [&str; 10] = [
    "gamma machinery",
    "spectral curve",
    "lambda constants",
    "sign estimates",
    "pearcey consistency",
    "rh chain audit",
    "matching decay",
    "kernel convergence",
    "simulator",
    "phase classifiers",
];

pub fn criterion(id: usize) -> Result<Criterion> {
    let checks = match id {
        1 => gamma_machinery()?,
        2 => spectral_curve()?,
        3 => lambda_constants()?,
        4 => sign_estimates()?,
        5 => pearcey_consistency()?,
        6 => rh_chain_audit()?,
        7 => matching_decay()?,
        8 => kernel_convergence()?,
        9 => simulator()?,
        10 => phase_classifiers()?,
        _ => return Err(AcceptanceError::Unknown(id)),
    };
    Ok(Criterion { id, title: TITLES[id - 1], checks })
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

const MODELS: [Model; 2] = [Model::Brownian, Model::TwoMatrix];

fn gamma_machinery() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let a = -rng.gen_range(0.5..50.0);
        let sigma = rng.gen_range(-3.0..3.0);
        let p = CurveParams::new(a, sigma, MODELS[k % 2])?;
        worst = worst.max(p.gamma_residual());
    }
    let star_exact = MODELS.iter().all(|&m| {
        [-0.3, -4.0, -1e4].iter().all(|&a| CurveParams::new(a, 0.0, m).map_or(false, |p| p.gamma == gamma_star()))
    });
    let far = max_of(
        MODELS.iter().flat_map(|&m| [1.0, -1.0].map(|s| CurveParams::new(-1e4, s, m).map_or(f64::NAN, |p| (p.c - 3.0 * 3f64.sqrt()).abs()))),
    );
    Ok(vec![
        Check::at_most("gamma_residual_100_random", worst, 1e-12),
        Check::holds("gamma_sigma0_exact", star_exact),
        Check::at_most("c_minus_3sqrt3_at_a_-1e4", far, 1e-3),
    ])
}

/// Off-axis sample points in all four quadrants.
pub fn curve_points(params: &CurveParams) -> Vec<C64> {
    (0..100)
        .map(|k| {
            let r = params.c * 10f64.powf(-1.5 + 3.0 * (k as f64 + 0.5) / 100.0);
            C64::from_polar(r, 2.0 * PI * (k as f64 * 0.618_033_988_749_895 + 0.05).fract())
        })
        .filter(|z| z.re.abs() > 1e-9 && z.im.abs() > 1e-9)
        .collect()
}

fn spectral_curve() -> Result<Vec<Check>> {
    curve_checks(
        &[CurveParams::star(Model::Brownian), CurveParams::from_gamma(0.2, Model::Brownian)?, CurveParams::new(-8.0, 1.0, Model::TwoMatrix)?],
        100,
    )
}

/// Tabulated (location, sheet) series of w.
pub const SERIES_CASES: [(SeriesLocation, usize); 6] = [
    (SeriesLocation::Infinity, 2),
    (SeriesLocation::Infinity, 4),
    (SeriesLocation::Origin, 2),
    (SeriesLocation::Origin, 4),
    (SeriesLocation::Ic, 3),
    (SeriesLocation::MinusIc, 3),
];

/// Quartic residuals, cut relations, symmetries, series and the ŵ oracle.
pub fn curve_checks(params: &[CurveParams], points_per_cut: usize) -> Result<Vec<Check>> {
    let mut quartic = 0.0f64;
    let mut cuts = [0.0f64; 3];
    let mut sym = 0.0f64;
    let mut series = 0.0f64;
    let mut closure = 0.0f64;
    let mut hat = 0.0f64;
    for p in params {
        let pts = curve_points(p);
        for &z in &pts {
            let w = solve_w(z, p, Side::Interior)?;
            quartic = quartic.max(max_of(w.values.iter().map(|&v| curve_residual(z, v, p.gamma))));
            let h = w_from_hat(z, p)?;
            hat = hat.max(max_of((0..4).map(|j| (h[j] - w.values[j]).norm() / w.values[j].norm())));
        }
        let c = verify_cut_relations(p, points_per_cut)?;
        for k in 0..3 {
            cuts[k] = cuts[k].max(c[k]);
        }
        let s = verify_w_symmetries(p, &pts)?;
        sym = sym.max(s.conjugation).max(s.odd_12).max(s.odd_34);
        for (loc, sheet) in SERIES_CASES {
            let r = verify_w_series(p, loc, sheet)?;
            series = series.max(r.max_rel_err);
            closure = closure.max(r.loop_closure);
        }
    }
    Ok(vec![
        Check::at_most("quartic_residual", quartic, 1e-10),
        Check::at_most("jump_positive_axis", cuts[0], 1e-8),
        Check::at_most("jump_negative_axis", cuts[1], 1e-8),
        Check::at_most("jump_imaginary_segment", cuts[2], 1e-8),
        Check::at_most("symmetries", sym, 1e-8),
        Check::at_most("series_rel_err", series, 1e-6),
        Check::at_most("series_loop_closure", closure, 1e-8),
        Check::at_most("w_hat_oracle", hat, 1e-8),
    ])
}

fn lambda_constants() -> Result<Vec<Check>> {
    lambda_checks(&[gamma_star(), 0.2, 0.12], &LAMBDA_LADDER, &MODELS, &[1.0, -1.0])
}

/// Sample points of the normalized convergence deviation.
pub fn lambda_points() -> Vec<C64> {
    (0..20).map(|k| C64::from_polar(0.6 + k as f64, 0.3 * k as f64 + 0.1)).collect()
}

pub const LAMBDA_LADDER: [f64; 4] = [-4.0, -8.0, -16.0, -32.0];

/// Closed-form constants at γ* and at each γ in `gammas`, plus the
/// normalized convergence spread over `ladder`.
pub fn lambda_checks(gammas: &[f64], ladder: &[f64], models: &[Model], sigmas: &[f64]) -> Result<Vec<Check>> {
    let star = CurveParams::star(Model::Brownian);
    let mut fit = 0.0f64;
    let mut local_closed = 0.0f64;
    let mut tilde_closed = 0.0f64;
    for &g in gammas {
        let p = CurveParams::from_gamma(g, Model::Brownian)?;
        fit = fit.max(estimate_ell_d(&p)?.fit_residual);
        let l = local_expansion(&p, 6)?;
        let cf = local_constants(g);
        for (v, r) in [l.g0, l.h0, l.k0, l.l0].iter().zip(cf) {
            local_closed = local_closed.max((v - r).abs() / r.abs().max(1.0));
        }
        let (gt, ht) = tilde_constants(g);
        tilde_closed = tilde_closed.max((l.gt_ic - gt).norm() / gt.norm()).max((l.ht_ic - ht).norm() / ht.norm());
    }
    let l = local_expansion(&star, 6)?;
    let exact = [0.0, 3.0 * 4f64.powf(-2.0 / 3.0), 1.0 / 24.0, 16.0 / 3.0];
    let at_star = max_of([l.g0, l.h0, l.k0, l.l0].iter().zip(exact).map(|(v, r)| (v - r).abs() / r.abs().max(1.0)));
    let gt = (l.gt_ic - 9.0).norm() / 9.0;
    let ht_exact = -(2.0 / 3f64.powf(1.75)) * cis(0.75 * PI);
    let ht = (l.ht_ic - ht_exact).norm() / ht_exact.norm();
    let pts = lambda_points();
    let mut spread = 1.0f64;
    for &m in models {
        for &s in sigmas {
            spread = spread.max(convergence_bound(ladder, s, m, &pts)?.spread);
        }
    }
    Ok(vec![
        Check::at_most("c1_c4_expansion_at_infinity", fit, 1e-6),
        Check::at_most("g0_h0_k0_l0_at_gamma_star", at_star, 1e-6),
        Check::at_most("g_tilde_ic_star_is_9", gt, 1e-6),
        Check::at_most("h_tilde_ic_star", ht, 1e-6),
        Check::at_most("local_closed_forms_generic_gamma", local_closed, 1e-6),
        Check::at_most("tilde_closed_forms_generic_gamma", tilde_closed, 1e-6),
        Check::at_most("convergence_bound_spread", spread, 3.0),
    ])
}

pub const SIGN_CONTOURS: [SignContour; 5] = [
    SignContour::Gamma1,
    SignContour::Gamma1Tilde2,
    SignContour::GammaTilde3,
    SignContour::Gamma4,
    SignContour::ImagSegment,
];

fn sign_estimates() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (label, p) in [
        ("gamma_star", CurveParams::star(Model::Brownian)),
        ("brownian_a-8_s1", CurveParams::new(-8.0, 1.0, Model::Brownian)?),
        ("two_matrix_a-8_s1", CurveParams::new(-8.0, 1.0, Model::TwoMatrix)?),
    ] {
        let mut violations = 0usize;
        for c in SIGN_CONTOURS {
            let r = contour_sign_report(&p, c, 200, 30.0)?;
            violations += r.violations;
        }
        out.push(Check::at_most(format!("violations_{label}"), violations as f64, 0.0));
    }
    Ok(out)
}

pub const COARSE_GRID: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];

fn pearcey_consistency() -> Result<Vec<Check>> {
    pearcey_checks(&[-1.0, 0.0, 1.0], &COARSE_GRID)
}

/// Kernel agreement on `grid`, ODE, det Φ^Pe, rotation and the anchors.
pub fn pearcey_checks(rhos: &[f64], grid: &[f64]) -> Result<Vec<Check>> {
    let mut kernel = 0.0f64;
    let mut ode = 0.0f64;
    let mut det = 0.0f64;
    let mut rotation = 0.0f64;
    for &rho in rhos {
        kernel = kernel.max(max_of(consistency_grid(rho, grid)?.iter().map(|r| r.rel_diff())));
        for k in 0..=20 {
            let x = -5.0 + 0.5 * k as f64;
            let (rp, rq) = pearcey_pq(x, x, rho)?.ode_residuals();
            ode = ode.max(rp).max(rq);
        }
        let phi = PearceyParametrix::new(rho)?;
        let pref = pe_prefactor(rho);
        let expected = pref * pref * pref * l_pe(true).determinant();
        for r in [0.5, 2.0, 5.0, 9.0] {
            for s in Sector::ALL {
                let (lo, hi) = s.range();
                let z = C64::from_polar(r, 0.5 * (lo + hi));
                det = det.max((phi.in_sector(z, s)?.determinant() - expected).norm() / expected.norm());
            }
        }
        for z in [C64::new(1.0, 1.0), C64::new(-2.0, 1.0), C64::new(-0.7, -1.4), C64::new(1.5, -0.6), C64::new(0.3, 2.2)] {
            rotation = rotation.max(check_rotation_symmetry(z, rho)?);
        }
    }
    let e = pearcey_pq(0.0, 0.0, 0.0)?;
    let p0 = GAMMA_QUARTER * 4f64.powf(-0.75) / PI;
    Ok(vec![
        Check::at_most("kernel_integral_vs_rh_rel", kernel, 1e-6),
        Check::at_most("ode_residual", ode, 1e-8),
        Check::at_most("rotation_residual", rotation, 1e-8),
        Check::at_most("det_phi_constant_rel", det, 1e-8),
        Check::at_most("p00_anchor", (e.p - p0).norm(), 1e-8),
        Check::at_most("q00_anchor", e.q.norm(), 1e-8),
        Check::at_most("q1_00_anchor", (e.q1 - 1.0 / PI.sqrt()).norm(), 1e-8),
    ])
}

fn rh_chain_audit() -> Result<Vec<Check>> {
    rh_checks(&[CurveParams::star(Model::Brownian), CurveParams::new(-8.0, 1.0, Model::Brownian)?, CurveParams::new(-8.0, 1.0, Model::TwoMatrix)?], 100)
}

/// Jump determinants, cyclic products, the transform audit and the global
/// parametrix at each parameter set.
pub fn rh_checks(params: &[CurveParams], samples: usize) -> Result<Vec<Check>> {
    let mut det = 0.0f64;
    for system in [System::Original, System::Opened] {
        for piece in pieces(system) {
            det = det.max((system_jump(system, piece)?.determinant() - 1.0).norm());
        }
    }
    let mut out = vec![Check::at_most("jump_determinants_minus_1", det, 1e-14)];
    let mut cyclic = 0.0f64;
    let mut jumps = 0.0f64;
    let mut gdet = 0.0f64;
    let mut asym = 0.0f64;
    let mut audit_ok = true;
    let mut audit_max = 0.0f64;
    for p in params {
        cyclic = cyclic.max(max_of(cyclic_consistency(p.c)?.iter().map(|n| n.residual)));
        let audit = transform_chain_audit(p)?;
        audit_ok &= audit.check().is_ok();
        audit_max = audit_max.max(audit.max_residual);
        let g = global_check(p, samples)?;
        jumps = jumps.max(max_of(g.jump_residuals));
        gdet = gdet.max(g.det_residual);
        asym = asym.max(g.asymptotic_deviation);
    }
    out.push(Check::at_most("cyclic_products", cyclic, 1e-14));
    out.push(Check::holds("transform_audit", audit_ok));
    out.push(Check::at_most("transform_audit_max_residual", audit_max, crate::rh_chain::AUDIT_TOL));
    out.push(Check::at_most("global_jump_residual", jumps, 1e-8));
    out.push(Check::at_most("global_det_residual", gdet, 1e-10));
    out.push(Check::at_most("global_asymptotic_deviation", asym, 0.05));
    Ok(out)
}

pub const MATCHING_LADDER: [f64; 5] = [-4.0, -6.0, -9.0, -13.0, -20.0];
pub const MATCHING_POINTS: usize = 64;

fn matching_decay() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for sigma in [0.0, 2.0] {
        for m in MODELS {
            out.extend(matching_checks(&matching_report(&MATCHING_LADDER, crate::lambda::DELTA, sigma, m, MATCHING_POINTS)?));
        }
    }
    Ok(out)
}

/// Slope −1.5 ± 0.3 for the matching sup and 0.75 ± 0.1 for E₀.
pub fn matching_checks(r: &MatchingReport) -> [Check; 2] {
    let tag = format!("{}_sigma{}", r.model.name(), r.sigma);
    [
        Check::within(format!("slope_{tag}"), r.slope, Some(-1.8), Some(-1.2)),
        Check::within(format!("e0_slope_{tag}"), r.e0_slope, Some(0.65), Some(0.85)),
    ]
}

pub const CONVERGENCE_LADDER: [f64; 4] = [-6.0, -10.0, -16.0, -26.0];
pub const CONVERGENCE_GRID: [f64; 6] = [-1.5, -0.8, -0.3, 0.3, 0.8, 1.5];

fn kernel_convergence() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for kind in [KernelKind::Tacnode, KernelKind::Critical] {
        for sigma in [0.0, 1.0] {
            let rows = convergence_table(kind, &CONVERGENCE_GRID, sigma, &CONVERGENCE_LADDER)?;
            out.extend(convergence_checks(kind, sigma, &CONVERGENCE_LADDER, &rows));
        }
    }
    out.push(transpose_check(&[0.0, 1.0], &CONVERGENCE_LADDER, &CONVERGENCE_GRID)?);
    Ok(out)
}

/// Strict decrease along the ladder and the worst log-log slope, for rows
/// ordered with `a` outermost.
pub fn convergence_checks(kind: KernelKind, sigma: f64, ladder: &[f64], rows: &[ConvergenceRow]) -> [Check; 2] {
    let abs_a: Vec<f64> = ladder.iter().map(|a| a.abs()).collect();
    let per_a = rows.len() / ladder.len();
    let mut non_decreasing = 0usize;
    let mut worst_slope = f64::NEG_INFINITY;
    for i in 0..per_a {
        let errs: Vec<f64> = (0..ladder.len()).map(|k| rows[k * per_a + i].abs_err).collect();
        non_decreasing += errs.windows(2).filter(|w| !(w[1] < w[0])).count();
        worst_slope = worst_slope.max(loglog_slope(&abs_a, &errs));
    }
    let tag = format!("{}_sigma{sigma}", kind.name());
    [
        Check::at_most(format!("non_decreasing_steps_{tag}"), non_decreasing as f64, 0.0),
        Check::at_most(format!("max_slope_{tag}"), worst_slope, -0.7),
    ]
}

/// `K^tac(u,v;s,−t) = K^tac(v,u;s,t)` on the approximation, as a ratio to
/// the approximation error of the swapped value.
pub fn transpose_check(sigmas: &[f64], ladder: &[f64], grid: &[f64]) -> Result<Check> {
    let mut ratio = 0.0f64;
    for &sigma in sigmas {
        for &a in ladder {
            let fr = LocalFrame::build(a, sigma, Model::Brownian)?;
            let pts: Vec<_> = grid.iter().map(|&x| fr.kernel_point(x, KernelKind::Tacnode)).collect();
            for px in pts.iter() {
                for py in pts.iter() {
                    let (px, py) = (px.as_ref().map_err(Clone::clone)?, py.as_ref().map_err(Clone::clone)?);
                    if px.x == py.x {
                        continue;
                    }
                    let refl = fr.reflected_tacnode(px, py)?;
                    let swapped = fr.compose(KernelKind::Tacnode, py, px)?;
                    let target = crate::local0::kernel_target(KernelKind::Tacnode, py.x, px.x, sigma)?;
                    let budget = (swapped.value - target).abs();
                    let diff = (refl.re - swapped.value).abs() + refl.im.abs();
                    ratio = ratio.max(diff / budget);
                }
            }
        }
    }
    Ok(Check::at_most("transpose_symmetry_over_error_budget", ratio, 1.0))
}

pub const FIG1_A: (f64, f64) = (1.0, 0.7);
pub const FIG1_B: (f64, f64) = (0.4, 0.3);
pub const FIG1_C: (f64, f64) = (1.0, 0.5);

/// Sample-mean gap between the halves minus the mean spacing within them.
fn gap_excess(e: &PathEnsemble, step: usize) -> f64 {
    e.mean_group_gap(step) - e.mean_spacing(step)
}

fn simulator() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let fig = |ab: (f64, f64)| sample_paths(&SimConfig::new(20, 1.0, ab.0, ab.1));
    let (a, b, c) = (fig(FIG1_A)?, fig(FIG1_B)?, fig(FIG1_C)?);
    let crit = sample_paths(&SimConfig::new(64, 1.0, FIG1_C.0, FIG1_C.1))?;
    let mut pin = 0.0f64;
    let mut spacing = f64::INFINITY;
    for e in [&a, &b, &c, &crit] {
        pin = pin.max(e.pinning_error());
        spacing = spacing.min(e.min_spacing());
    }
    out.push(Check::at_most("pinning_error", pin, 1e-9));
    out.push(Check::within("min_spacing_positive", spacing, Some(f64::MIN_POSITIVE), None));
    let tc = tau_crit(FIG1_C.0, FIG1_C.1);
    let k = crit.time_index(tc)?;
    let r = 1.0 / (FIG1_C.0 + FIG1_C.1);
    out.push(Check::at_most("ks_touching_semicircles_n64", ks_distance(&crit.pooled(k), |x| touching_semicircles_cdf(r, x)), 0.05));
    let interior = |e: &PathEnsemble| 1..e.times.len() - 1;
    // (a) the halves stay apart at every interior time
    let sep = interior(&a).map(|k| gap_excess(&a, k)).fold(f64::INFINITY, f64::min);
    out.push(Check::at_least("fig1a_min_gap_excess", sep, f64::MIN_POSITIVE));
    // (b) merged at mid-time
    out.push(Check::at_most("fig1b_gap_excess_mid", gap_excess(&b, b.time_index(0.5)?), 0.0));
    // (c) apart at mid-time, touching at τ_crit
    out.push(Check::at_least("fig1c_gap_excess_mid", gap_excess(&c, c.time_index(0.5)?), f64::MIN_POSITIVE));
    let g = extrapolated_gap(&c, &crit, tc)?;
    out.push(Check::at_most("fig1c_extrapolated_gap_over_3se", g.value.abs() / (3.0 * g.std_err), 1.0));
    Ok(out)
}

fn phase_classifiers() -> Result<Vec<Check>> {
    let cfg = BrownianConfig::new(1.0, 0.5, 1.0, tau_crit(1.0, 0.5), 20)?;
    let b = brownian_phase(&cfg)? == BrownianPhase::Multicritical;
    let t = twomatrix_phase(&TwoMatrixPoint::new(-1.0, 1.0)?)? == TwoMatrixPhase::Multicritical;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let alpha = rng.gen_range(0.05..5.0);
        let beta = rng.gen_range(0.05..5.0);
        let tmin = cusp_temperature(alpha, beta, tau_crit(alpha, beta));
        worst = worst.max((tmin - 2.0 * alpha * beta).abs() / (2.0 * alpha * beta).max(1.0));
    }
    Ok(vec![
        Check::holds("brownian_tau_crit_1_multicritical", b),
        Check::holds("two_matrix_minus1_1_multicritical", t),
        Check::at_most("cusp_at_tau_crit_minus_2ab_100_random", worst, 1e-12),
    ])
}

