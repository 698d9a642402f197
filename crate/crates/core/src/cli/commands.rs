//! Subcommand runners. Each returns its checks and artifacts; nothing here
//! touches the filesystem.

use super::output::f17;
use super::params::*;
use super::{CliError, Outcome};
use crate::row;
use num_complex::Complex64 as C64;
use serde::Serialize;
use tacnode_pearcey::acceptance::{
    convergence_checks, criterion, curve_checks, curve_points, lambda_checks, lambda_points, matching_checks,
    pearcey_checks, transpose_check, AcceptanceError, Check, Criterion, SERIES_CASES, SIGN_CONTOURS, TITLES,
};
use tacnode_pearcey::brownian_sim::{
    density_at, hull, ks_distance, sample_paths, touching_semicircles_cdf, SimConfig, Support,
};
use tacnode_pearcey::curve::{
    verify_cut_relations, verify_w_series, verify_w_symmetries, CurveParams, Model, SeriesReport, SymmetryReport,
};
use tacnode_pearcey::lambda::{
    contour_sign_report, convergence_bound, estimate_ell_d, local_constants, local_expansion, tilde_constants,
    ConvergenceReport,
};
use tacnode_pearcey::local0::{convergence_table, matching_report, KernelKind, Local0Error, MatchingReport};
use tacnode_pearcey::pearcey::{
    consistency_grid, l_pe, pe_prefactor, pearcey_kernel_integral, pearcey_kernel_rh, pearcey_pq, PearceyEval,
    PearceyParametrix, PearceyParametrixValue,
};
use tacnode_pearcey::phase::{
    brownian_diagram, brownian_phase_tol, cusp_temperature, tau_crit, twomatrix_diagram, twomatrix_phase_tol,
    BrownianConfig, TwoMatrixPoint,
};
use tacnode_pearcey::rh_chain::{
    cyclic_consistency, global_check as global_parametrix_check, pieces, system_jump, transform_chain_audit,
    GlobalCheck, NodeReport, System, TransformAudit, AUDIT_TOL,
};

type Result<T> = std::result::Result<T, CliError>;

fn curve_params(a: f64, sigma: f64, model: Model) -> Result<CurveParams> {
    CurveParams::new(a, sigma, model).map_err(CliError::config)
}

/// Parameter errors from the local analysis are config errors.
fn local0_error(check: &str) -> impl FnOnce(Local0Error) -> CliError + '_ {
    move |e| match e {
        Local0Error::Delta(_) | Local0Error::Ladder(_) | Local0Error::KernelArgs(..) | Local0Error::Curve(_) => {
            CliError::config(e)
        }
        _ => CliError::numerical(check)(e),
    }
}

fn stdout_of(o: &Outcome, name: &str) -> Option<String> {
    o.artifacts.iter().find(|(n, _)| n == name).map(|(_, b)| String::from_utf8_lossy(b).trim_end().to_string())
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

#[derive(Serialize)]
struct GammaOut {
    a: f64,
    sigma: f64,
    model: Model,
    gamma: f64,
    c: f64,
    t_tilde: f64,
    residual: f64,
}

pub fn gamma(p: &GammaParams) -> Result<Outcome> {
    let cp = curve_params(p.a, p.sigma, p.model)?;
    let body = GammaOut {
        a: cp.a,
        sigma: cp.sigma,
        model: cp.model,
        gamma: cp.gamma,
        c: cp.c,
        t_tilde: cp.t_tilde(),
        residual: cp.gamma_residual(),
    };
    let mut o = Outcome::default();
    o.checks.push(Check::at_most("gamma_residual", body.residual, 1e-12));
    o.json("gamma.json", &body)?;
    o.stdout = stdout_of(&o, "gamma.json");
    Ok(o)
}

#[derive(Serialize)]
struct CutRelations {
    positive_axis: f64,
    negative_axis: f64,
    imaginary_segment: f64,
}

#[derive(Serialize)]
struct CurveOut {
    params: CurveParams,
    symmetries: SymmetryReport,
    cut_relations: CutRelations,
    series: Vec<SeriesReport>,
}

pub fn curve_verify(p: &CurveVerifyParams) -> Result<Outcome> {
    let cp = curve_params(p.a, p.sigma, p.model)?;
    let symmetries = verify_w_symmetries(&cp, &curve_points(&cp)).map_err(CliError::numerical("symmetries"))?;
    let [pos, neg, seg] = verify_cut_relations(&cp, p.points_per_cut).map_err(CliError::numerical("cut_relations"))?;
    let series = SERIES_CASES
        .iter()
        .map(|&(loc, sheet)| verify_w_series(&cp, loc, sheet))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(CliError::numerical("series"))?;
    let mut o = Outcome::default();
    o.checks = curve_checks(&[cp], p.points_per_cut).map_err(CliError::numerical("curve_checks"))?;
    o.json(
        "curve.json",
        &CurveOut {
            params: cp,
            symmetries,
            cut_relations: CutRelations { positive_axis: pos, negative_axis: neg, imaginary_segment: seg },
            series,
        },
    )?;
    Ok(o)
}

#[derive(Serialize)]
struct LambdaEntry {
    gamma: f64,
    ell: C64,
    d: C64,
    fit_residual: f64,
    /// Numeric (G0, H0, K0, L0).
    local: [f64; 4],
    /// Closed-form (G0, H0, K0, L0).
    local_closed: [f64; 4],
    gt_ic: C64,
    ht_ic: C64,
    gt_ic_closed: C64,
    ht_ic_closed: C64,
}

#[derive(Serialize)]
struct LambdaConvergence {
    model: Model,
    sigma: f64,
    report: ConvergenceReport,
}

#[derive(Serialize)]
struct LambdaOut {
    entries: Vec<LambdaEntry>,
    convergence: Vec<LambdaConvergence>,
}

pub fn lambda_verify(p: &LambdaVerifyParams) -> Result<Outcome> {
    let mut entries = Vec::new();
    for &g in &p.gammas {
        let cp = CurveParams::from_gamma(g, Model::Brownian).map_err(CliError::config)?;
        let asym = estimate_ell_d(&cp).map_err(CliError::numerical("ell_d"))?;
        let l = local_expansion(&cp, 6).map_err(CliError::numerical("local_expansion"))?;
        let (gt, ht) = tilde_constants(g);
        entries.push(LambdaEntry {
            gamma: g,
            ell: asym.ell,
            d: asym.d,
            fit_residual: asym.fit_residual,
            local: [l.g0, l.h0, l.k0, l.l0],
            local_closed: local_constants(g),
            gt_ic: l.gt_ic,
            ht_ic: l.ht_ic,
            gt_ic_closed: gt,
            ht_ic_closed: ht,
        });
    }
    let pts = lambda_points();
    let mut convergence = Vec::new();
    for &model in &p.models {
        for &sigma in &p.sigmas {
            let report = convergence_bound(&p.ladder, sigma, model, &pts).map_err(CliError::config)?;
            convergence.push(LambdaConvergence { model, sigma, report });
        }
    }
    let mut o = Outcome::default();
    o.checks =
        lambda_checks(&p.gammas, &p.ladder, &p.models, &p.sigmas).map_err(CliError::numerical("lambda_checks"))?;
    o.json("lambda.json", &LambdaOut { entries, convergence })?;
    Ok(o)
}

#[derive(Serialize)]
struct ContourSummary {
    contour: &'static str,
    constants: Vec<f64>,
    violations: usize,
}

#[derive(Serialize)]
struct SignOut {
    params: CurveParams,
    contours: Vec<ContourSummary>,
}

pub fn sign_report(p: &SignReportParams) -> Result<Outcome> {
    let cp = curve_params(p.a, p.sigma, p.model)?;
    if p.points < 2 || !(p.x_max > 0.0) {
        return Err(CliError::Config("points must be at least 2 and x_max positive".into()));
    }
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut contours = Vec::new();
    for c in SIGN_CONTOURS {
        let r = contour_sign_report(&cp, c, p.points, p.x_max).map_err(CliError::numerical(c.id()))?;
        rows.extend(r.rows.iter().map(|s| row![s.x, s.re_l1, s.re_l2, s.re_l3, s.re_l4, s.contour_id, s.a, s.sigma, s.model]));
        o.checks.push(Check::at_most(format!("violations_{}", c.id()), r.violations as f64, 0.0));
        contours.push(ContourSummary { contour: c.id(), constants: r.constants, violations: r.violations });
    }
    o.csv("sign.csv", &["x", "re_l1", "re_l2", "re_l3", "re_l4", "contour_id", "a", "sigma", "model"], &rows)?;
    o.json("sign.json", &SignOut { params: cp, contours })?;
    Ok(o)
}

#[derive(Serialize)]
struct KernelOut {
    integral: f64,
    rh: f64,
    rel_diff: f64,
}

#[derive(Serialize)]
struct PearceyEvalOut {
    eval: PearceyEval,
    ode_residual_p: f64,
    ode_residual_q: f64,
    kernel: Option<KernelOut>,
    parametrix: PearceyParametrixValue,
    det: C64,
    det_expected: C64,
}

pub fn pearcey_eval(p: &PearceyEvalParams) -> Result<Outcome> {
    let mut o = Outcome::default();
    let eval = pearcey_pq(p.x, p.y, p.rho).map_err(CliError::numerical("pearcey_pq"))?;
    let (rp, rq) = eval.ode_residuals();
    o.checks.push(Check::at_most("ode_residual_p", rp, 1e-8));
    o.checks.push(Check::at_most("ode_residual_q", rq, 1e-8));
    let kernel = if p.x != p.y && p.x != 0.0 && p.y != 0.0 {
        let integral = pearcey_kernel_integral(p.x, p.y, p.rho).map_err(CliError::numerical("kernel_integral"))?;
        let rh = pearcey_kernel_rh(p.x, p.y, p.rho).map_err(CliError::numerical("kernel_rh"))?;
        let rel_diff = (integral - rh).abs() / integral.abs().max(1e-3);
        o.checks.push(Check::at_most("kernel_integral_vs_rh_rel", rel_diff, 1e-6));
        Some(KernelOut { integral, rh, rel_diff })
    } else {
        None
    };
    let phi = PearceyParametrix::new(p.rho).map_err(CliError::numerical("parametrix"))?;
    let parametrix = phi.eval(C64::new(p.z_re, p.z_im)).map_err(CliError::numerical("parametrix"))?;
    let det = parametrix.matrix.determinant();
    let pref = pe_prefactor(p.rho);
    let det_expected = pref * pref * pref * l_pe(true).determinant();
    o.checks.push(Check::at_most("det_phi_rel", (det - det_expected).norm() / det_expected.norm(), 1e-8));
    o.json(
        "pearcey_eval.json",
        &PearceyEvalOut { eval, ode_residual_p: rp, ode_residual_q: rq, kernel, parametrix, det, det_expected },
    )?;
    o.stdout = stdout_of(&o, "pearcey_eval.json");
    Ok(o)
}

pub fn pearcey_consistency(p: &PearceyConsistencyParams) -> Result<Outcome> {
    if p.rho.is_empty() {
        return Err(CliError::config("rho list is empty"));
    }
    let grid = p.grid.points();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &rho in &p.rho {
        for r in consistency_grid(rho, &grid).map_err(CliError::numerical("kernel_grid"))? {
            worst = worst.max(r.rel_diff());
            rows.push(row![r.x, r.y, r.rho, r.k_integral, r.k_rh, r.abs_diff]);
        }
    }
    let mut o = Outcome::default();
    o.checks = pearcey_checks(&p.rho, &grid).map_err(CliError::numerical("pearcey_checks"))?;
    o.csv("kernel.csv", &["x", "y", "rho", "k_integral", "k_rh", "abs_diff"], &rows)?;
    o.stdout = Some(format!("max_rel_diff={}", f17(worst)));
    Ok(o)
}

#[derive(Serialize)]
struct JumpDeterminant {
    system: System,
    piece: String,
    det: C64,
}

#[derive(Serialize)]
struct AuditOut {
    params: CurveParams,
    jump_determinants: Vec<JumpDeterminant>,
    nodes: Vec<NodeReport>,
    transform: TransformAudit,
}

pub fn parametrix_audit(p: &ParametrixAuditParams) -> Result<Outcome> {
    let cp = curve_params(p.a, p.sigma, p.model)?;
    let mut jump_determinants = Vec::new();
    for system in [System::Original, System::Opened] {
        for piece in pieces(system) {
            let det = system_jump(system, piece).map_err(CliError::numerical("jump_determinants"))?.determinant();
            jump_determinants.push(JumpDeterminant { system, piece: piece.label(), det });
        }
    }
    let nodes = cyclic_consistency(cp.c).map_err(CliError::numerical("cyclic_products"))?;
    let transform = transform_chain_audit(&cp).map_err(CliError::numerical("transform_audit"))?;
    let mut o = Outcome::default();
    o.checks = vec![
        Check::at_most("jump_determinants_minus_1", max_of(jump_determinants.iter().map(|j| (j.det - 1.0).norm())), 1e-14),
        Check::at_most("cyclic_products", max_of(nodes.iter().map(|n| n.residual)), 1e-14),
        Check::holds("transform_audit", transform.check().is_ok()),
        Check::at_most("transform_audit_max_residual", transform.max_residual, AUDIT_TOL),
    ];
    o.json("audit.json", &AuditOut { params: cp, jump_determinants, nodes, transform })?;
    Ok(o)
}

#[derive(Serialize)]
struct GlobalOut {
    params: CurveParams,
    check: GlobalCheck,
}

pub fn global_check(p: &GlobalCheckParams) -> Result<Outcome> {
    let cp = curve_params(p.a, p.sigma, p.model)?;
    if p.samples < 2 {
        return Err(CliError::config("samples must be at least 2"));
    }
    let g = global_parametrix_check(&cp, p.samples).map_err(CliError::numerical("global_parametrix"))?;
    let mut o = Outcome::default();
    o.checks = vec![
        Check::at_most("global_jump_residual", max_of(g.jump_residuals), 1e-8),
        Check::at_most("global_det_residual", g.det_residual, 1e-10),
        Check::at_most("global_asymptotic_deviation", g.asymptotic_deviation, 0.05),
    ];
    o.json("global.json", &GlobalOut { params: cp, check: g })?;
    Ok(o)
}

#[derive(Serialize)]
struct MatchingOut {
    reports: Vec<MatchingReport>,
}

pub fn matching(p: &MatchingParams) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &sigma in &p.sigmas {
        for &model in &p.models {
            let r = matching_report(&p.ladder, p.delta, sigma, model, p.points).map_err(local0_error("matching"))?;
            rows.extend(r.rows.iter().map(|m| row![sigma, model.name(), m.a, m.sup_norm, m.e0_norm]));
            o.checks.extend(matching_checks(&r));
            reports.push(r);
        }
    }
    o.csv("matching.csv", &["sigma", "model", "a", "sup_norm", "e0_norm"], &rows)?;
    o.json("matching.json", &MatchingOut { reports })?;
    Ok(o)
}

fn converge(kind: KernelKind, p: &ConvergeParams) -> Result<Outcome> {
    if p.ladder.len() < 2 || p.grid.is_empty() {
        return Err(CliError::config("need at least two ladder values and one grid point"));
    }
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    for &sigma in &p.sigmas {
        let table = convergence_table(kind, &p.grid, sigma, &p.ladder).map_err(local0_error("convergence"))?;
        o.checks.extend(convergence_checks(kind, sigma, &p.ladder, &table));
        rows.extend(table.iter().map(|r| row![r.x, r.y, r.sigma, r.a, r.k_approx, r.k_pearcey, r.abs_err, r.model]));
    }
    if kind == KernelKind::Tacnode {
        o.checks.push(transpose_check(&p.sigmas, &p.ladder, &p.grid).map_err(CliError::numerical("transpose"))?);
    }
    o.csv("convergence.csv", &["x", "y", "sigma", "a", "k_approx", "k_pearcey", "abs_err", "model"], &rows)?;
    Ok(o)
}

pub fn tacnode_converge(p: &ConvergeParams) -> Result<Outcome> {
    converge(KernelKind::Tacnode, p)
}

pub fn critical_converge(p: &ConvergeParams) -> Result<Outcome> {
    converge(KernelKind::Critical, p)
}

#[derive(Serialize)]
struct PhaseOut {
    model: Model,
    label: &'static str,
    region: u8,
    params: PhaseParams,
    /// Brownian only: τ_crit and the cusp temperature at τ.
    tau_crit: Option<f64>,
    cusp_temperature: Option<f64>,
}

pub fn phase(p: &PhaseParams) -> Result<Outcome> {
    let k = p.diagram_points;
    if k < 2 || !(p.tol >= 0.0) {
        return Err(CliError::config("diagram_points must be at least 2 and tol non-negative"));
    }
    let (label, region, samples, tc, cusp) = match p.model {
        Model::Brownian => {
            let cfg = BrownianConfig::new(p.alpha, p.beta, p.t, p.tau, p.n).map_err(CliError::config)?;
            let ph = brownian_phase_tol(&cfg, p.tol).map_err(CliError::config)?;
            let taus: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
            let temps: Vec<f64> = (1..=k).map(|i| 3.0 * i as f64 / k as f64).collect();
            let d = brownian_diagram(p.alpha, p.beta, &taus, &temps).map_err(CliError::config)?;
            (ph.name(), ph.id(), d, Some(tau_crit(p.alpha, p.beta)), Some(cusp_temperature(p.alpha, p.beta, p.tau)))
        }
        Model::TwoMatrix => {
            let pt = TwoMatrixPoint::new(p.alpha, p.tau).map_err(CliError::config)?;
            let ph = twomatrix_phase_tol(&pt, p.tol).map_err(CliError::config)?;
            let alphas: Vec<f64> = (0..k).map(|i| -3.0 + 4.0 * i as f64 / (k - 1) as f64).collect();
            let taus: Vec<f64> = (1..=k).map(|i| 3.0 * i as f64 / k as f64).collect();
            let d = twomatrix_diagram(&alphas, &taus).map_err(CliError::config)?;
            (ph.name(), ph.id(), d, None, None)
        }
    };
    let mut o = Outcome::default();
    let rows: Vec<_> = samples.iter().map(|s| row![s.x, s.y, s.region, s.label]).collect();
    o.json(
        "phase.json",
        &PhaseOut { model: p.model, label, region, params: p.clone(), tau_crit: tc, cusp_temperature: cusp },
    )?;
    o.csv("phase.csv", &["x", "y", "region", "label"], &rows)?;
    o.stdout = Some(label.to_string());
    Ok(o)
}

#[derive(Serialize)]
struct Slice {
    tau: f64,
    support: Support,
    mean_group_gap: f64,
    group_gap_std_err: f64,
    mean_spacing: f64,
}

#[derive(Serialize)]
struct SimulateOut {
    config: SimConfig,
    time_points: usize,
    pinning_error: f64,
    min_spacing: f64,
    tau_crit: Option<f64>,
    /// Kolmogorov distance to the touching semicircles at τ_crit.
    ks_touching_semicircles: Option<f64>,
    slices: Vec<Slice>,
}

pub fn simulate(p: &SimulateParams) -> Result<Outcome> {
    let cfg = SimConfig {
        n: p.n,
        t: p.t,
        alpha: p.alpha,
        beta: p.beta,
        time_steps: p.time_steps,
        samples: p.samples,
        seed: p.seed,
        noise: p.noise,
    };
    cfg.validate().map_err(CliError::config)?;
    if p.bins == 0 {
        return Err(CliError::config("bins must be positive"));
    }
    let grid = cfg.time_grid();
    let mut taus = p.density_taus.clone();
    let tc = cfg.is_critical().then(|| cfg.tau_crit());
    if let Some(tc) = tc {
        if !taus.iter().any(|&t| (t - tc).abs() <= 1e-12) {
            taus.push(tc);
        }
    }
    if let Some(&t) = taus.iter().find(|&&t| !grid.iter().any(|&g| (g - t).abs() <= 1e-12)) {
        return Err(CliError::Config(format!("density time {t} is not on the time grid")));
    }

    let ens = sample_paths(&cfg).map_err(CliError::numerical("sample_paths"))?;
    let sim = CliError::numerical::<tacnode_pearcey::brownian_sim::SimError>;
    let mut paths = Vec::new();
    for s in 0..p.path_samples.min(ens.samples()) {
        for (k, &time) in ens.times.iter().enumerate() {
            for (i, &x) in ens.positions(s, k).iter().enumerate() {
                paths.push(row![s, time, i, x]);
            }
        }
    }
    let mut density = Vec::new();
    let mut slices = Vec::new();
    for &tau in &taus {
        let h = density_at(&ens, tau, p.bins).map_err(sim("density"))?;
        density.extend(h.centers.iter().zip(&h.mass).map(|(c, m)| row![h.tau, *c, *m]));
        let k = ens.time_index(tau).map_err(sim("density"))?;
        let g = ens.group_gap_stats(k);
        slices.push(Slice {
            tau: ens.times[k],
            support: ens.support(k),
            mean_group_gap: g.value,
            group_gap_std_err: g.std_err,
            mean_spacing: ens.mean_spacing(k),
        });
    }
    let ks = match tc {
        Some(tc) => {
            let k = ens.time_index(tc).map_err(sim("ks"))?;
            let r = 1.0 / (p.alpha + p.beta);
            Some(ks_distance(&ens.pooled(k), |x| touching_semicircles_cdf(r, x)))
        }
        None => None,
    };
    let hull_rows: Vec<_> = hull(&ens).iter().map(|h| row![h.time, h.group.name(), h.lo, h.hi]).collect();
    let body = SimulateOut {
        config: cfg,
        time_points: ens.times.len(),
        pinning_error: ens.pinning_error(),
        min_spacing: ens.min_spacing(),
        tau_crit: tc,
        ks_touching_semicircles: ks,
        slices,
    };
    let mut o = Outcome::default();
    o.checks = vec![
        Check::at_most("pinning_error", body.pinning_error, 1e-9),
        Check::within("min_spacing_positive", body.min_spacing, Some(f64::MIN_POSITIVE), None),
    ];
    o.csv("paths.csv", &["sample", "time", "index", "position"], &paths)?;
    o.csv("density.csv", &["tau", "bin_center", "mass"], &density)?;
    o.csv("hull.csv", &["time", "group", "lo", "hi"], &hull_rows)?;
    o.json("simulate.json", &body)?;
    Ok(o)
}

#[derive(Serialize)]
struct AcceptanceOut {
    criteria: Vec<Criterion>,
}

pub fn all_acceptance(p: &AcceptanceParams) -> Result<Outcome> {
    if let Some(&id) = p.criteria.iter().find(|&&id| id == 0 || id > TITLES.len()) {
        return Err(CliError::Config(format!("unknown criterion {id}")));
    }
    let mut o = Outcome::default();
    let mut criteria = Vec::new();
    let mut lines = Vec::new();
    for &id in &p.criteria {
        let c = criterion(id).map_err(|e: AcceptanceError| CliError::Numerical {
            check: format!("criterion {id}"),
            message: e.to_string(),
        })?;
        let verdict = if c.pass() { "PASS".to_string() } else { format!("FAIL {}", c.failures().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")) };
        lines.push(format!("criterion {id} ({}): {verdict}", c.title));
        o.checks.extend(c.checks.iter().map(|ch| Check { name: format!("c{id}.{}", ch.name), ..ch.clone() }));
        criteria.push(c);
    }
    o.json("acceptance.json", &AcceptanceOut { criteria })?;
    o.stdout = Some(lines.join("\n"));
    Ok(o)
}
