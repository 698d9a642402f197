//! The four-sheeted spectral curve `z = w / (γ³w² − 1)²`.
//!
//! Sheets are labelled through the modulus ordering of the four roots:
//! with `|w|` ascending the labels are `(w₄, w₃, w₁, w₂)` for `Re z > 0`
//! and `(w₃, w₄, w₂, w₁)` for `Re z < 0`. Near the axes the ordering
//! degenerates, so those points are labelled from a displaced point and
//! matched back to the exact roots.

use crate::numerics::{cis, cpow, poly_roots, CircleSamples, RootError, I, ONE};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `γ* = 4^{-4/3}`, the value of γ at σ = 0 and in the limit a → −∞.
pub fn gamma_star() -> f64 {
    4f64.powf(-4.0 / 3.0)
}

/// Distance below which classification near 0 and ±ic is refused.
pub const BRANCH_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Non-intersecting Brownian motions: top sign in `±σ`.
    Brownian,
    /// Two-matrix model: bottom sign in `±σ`.
    TwoMatrix,
}

impl Model {
    pub fn sign(self) -> f64 {
        match self {
            Model::Brownian => 1.0,
            Model::TwoMatrix => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Brownian => "brownian",
            Model::TwoMatrix => "two_matrix",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brownian" => Ok(Model::Brownian),
            "two_matrix" | "two-matrix" => Ok(Model::TwoMatrix),
            other => Err(format!("unknown model '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("scaling parameter a must be negative, got {0}")]
    NonNegativeA(f64),
    #[error("gamma radicand is not positive ({0})")]
    BadRadicand(f64),
    #[error("gamma must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("point {z} lies within {guard:e} of the branch point {point}")]
    NearBranchPoint { z: C64, point: C64, guard: f64 },
    #[error("point {0} lies on a cut; a side tag is required")]
    OnCut(C64),
    #[error("root finder failed: {0}")]
    Root(#[from] RootError),
    #[error("sheet labels could not be resolved at {0}")]
    Unresolved(C64),
    #[error("series location/sheet pair ({0:?}, {1}) is not tabulated")]
    UnsupportedSeries(SeriesLocation, usize),
}

/// Scalar parameters of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub a: f64,
    pub sigma: f64,
    pub model: Model,
    pub gamma: f64,
    pub c: f64,
}

/// `γ` from `(a, σ)` via the closed form; the stable rewriting
/// `−2t + √(5 + 4t²) = 5 / (2t + √(5 + 4t²))` keeps full precision for
/// large `t = 1 ± σ/(2|a|^{3/2})`.
pub fn gamma_from(a: f64, sigma: f64, model: Model) -> Result<CurveParams, CurveError> {
    if !(a < 0.0) {
        return Err(CurveError::NonNegativeA(a));
    }
    let t = 1.0 + model.sign() * sigma / (2.0 * a.abs().powf(1.5));
    let root = (5.0 + 4.0 * t * t).sqrt();
    let inner = if t > 0.0 { 5.0 / (2.0 * t + root) } else { root - 2.0 * t };
    if !(inner > 0.0) || !inner.is_finite() {
        return Err(CurveError::BadRadicand(inner));
    }
    let gamma = gamma_star() * inner.powf(4.0 / 3.0);
    Ok(CurveParams { a, sigma, model, gamma, c: branch_height(gamma) })
}

/// `c = (3√3/16) γ^{-3/2}`.
pub fn branch_height(gamma: f64) -> f64 {
    3.0 * 3f64.sqrt() / 16.0 * gamma.powf(-1.5)
}

impl CurveParams {
    pub fn new(a: f64, sigma: f64, model: Model) -> Result<Self, CurveError> {
        gamma_from(a, sigma, model)
    }

    /// Parameters at `γ* = 4^{-4/3}` (σ = 0).
    pub fn star(model: Model) -> Self {
        gamma_from(-1.0, 0.0, model).expect("σ = 0 is always admissible")
    }

    /// Parameters realising a prescribed γ, with `a = −1` and σ solved
    /// from the γ-equation. Useful for probing generic γ.
    pub fn from_gamma(gamma: f64, model: Model) -> Result<Self, CurveError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(CurveError::BadGamma(gamma));
        }
        let t = t_of_gamma(gamma);
        let sigma = model.sign() * 2.0 * (t - 1.0);
        Ok(CurveParams { a: -1.0, sigma, model, gamma, c: branch_height(gamma) })
    }

    /// `t̃ = 1 ± σ/(2|a|^{3/2})`.
    pub fn t_tilde(&self) -> f64 {
        1.0 + self.model.sign() * self.sigma / (2.0 * self.a.abs().powf(1.5))
    }

    /// `|(5 − 16γ^{3/2})/(16γ^{3/4}) − t̃|`.
    pub fn gamma_residual(&self) -> f64 {
        (t_of_gamma(self.gamma) - self.t_tilde()).abs()
    }

    pub fn ic(&self) -> C64 {
        C64::new(0.0, self.c)
    }
}

/// Left side of the γ-equation, `(5 − 16γ^{3/2})/(16γ^{3/4})`.
pub fn t_of_gamma(gamma: f64) -> f64 {
    (5.0 - 16.0 * gamma.powf(1.5)) / (16.0 * gamma.powf(0.75))
}

/// Which boundary value to report on a cut. `(−∞,0)` and `(0,∞)` are
/// oriented left to right (`+` is above), `(−ic, ic)` bottom to top
/// (`+` is the left side).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Plus,
    Minus,
}

/// Values of a four-sheeted function at one point; `values[j-1]` is sheet `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SheetValues {
    pub z: C64,
    pub values: [C64; 4],
    pub side: Side,
}

impl SheetValues {
    /// Sheet value, 1-based.
    pub fn sheet(&self, j: usize) -> C64 {
        self.values[j - 1]
    }
}

/// Coefficients (low to high) of `zγ⁶w⁴ − 2zγ³w² − w + z`.
fn quartic(z: C64, gamma: f64) -> [C64; 5] {
    let g3 = gamma.powi(3);
    [z, -ONE, -2.0 * z * g3, C64::new(0.0, 0.0), z * g3 * g3]
}

/// The four roots of the curve equation at `z`, unordered.
pub fn curve_roots(z: C64, gamma: f64) -> Result<[C64; 4], CurveError> {
    let r = poly_roots(&quartic(z, gamma))?;
    Ok([r[0], r[1], r[2], r[3]])
}

/// `|z(γ³w² − 1)² − w|` relative to the size of the two terms.
pub fn curve_residual(z: C64, w: C64, gamma: f64) -> f64 {
    let g = gamma.powi(3) * w * w - ONE;
    let lhs = z * g * g;
    (lhs - w).norm() / lhs.norm().max(w.norm()).max(1e-300)
}

/// Sheet labels from the modulus ordering, or `None` when two moduli are
/// too close to order reliably or `z` sits on the imaginary axis.
fn label_by_modulus(z: C64, roots: &[C64; 4]) -> Option<[C64; 4]> {
    if z.re == 0.0 {
        return None;
    }
    let mut sorted = *roots;
    sorted.sort_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap());
    for k in 0..3 {
        let (m0, m1) = (sorted[k].norm(), sorted[k + 1].norm());
        if (m1 - m0) <= 1e-9 * m1 {
            return None;
        }
    }
    Some(if z.re > 0.0 {
        [sorted[2], sorted[3], sorted[1], sorted[0]]
    } else {
        [sorted[3], sorted[2], sorted[0], sorted[1]]
    })
}

/// Assign the exact roots to the labelled reference values by the
/// permutation of least total distance.
fn match_roots(reference: &[C64; 4], roots: &[C64; 4]) -> [C64; 4] {
    let mut best = (f64::MAX, [0usize; 4]);
    let mut perm = [0usize, 1, 2, 3];
    permute(&mut perm, 0, &mut |p| {
        let cost: f64 = (0..4).map(|k| (reference[k] - roots[p[k]]).norm()).sum();
        if cost < best.0 {
            best = (cost, *p);
        }
    });
    let p = best.1;
    [roots[p[0]], roots[p[1]], roots[p[2]], roots[p[3]]]
}

fn permute(p: &mut [usize; 4], k: usize, visit: &mut dyn FnMut(&[usize; 4])) {
    if k == 4 {
        visit(p);
        return;
    }
    for i in k..4 {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn guard_branch_points(z: C64, params: &CurveParams) -> Result<(), CurveError> {
    for point in [C64::new(0.0, 0.0), params.ic(), -params.ic()] {
        if (z - point).norm() < BRANCH_GUARD {
            return Err(CurveError::NearBranchPoint { z, point, guard: BRANCH_GUARD });
        }
    }
    Ok(())
}

/// Where `z` sits relative to the cuts of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutLocation {
    Off,
    PositiveReal,
    NegativeReal,
    ImaginarySegment,
}

pub fn cut_location(z: C64, params: &CurveParams) -> CutLocation {
    if z.im == 0.0 {
        if z.re > 0.0 {
            CutLocation::PositiveReal
        } else {
            CutLocation::NegativeReal
        }
    } else if z.re == 0.0 && z.im.abs() < params.c {
        CutLocation::ImaginarySegment
    } else {
        CutLocation::Off
    }
}

/// Displacement toward the requested side of a cut, or away from the axes.
fn reference_point(z: C64, loc: CutLocation, side: Side, eta: f64) -> C64 {
    let s = if side == Side::Minus { -1.0 } else { 1.0 };
    match loc {
        CutLocation::PositiveReal | CutLocation::NegativeReal => z + I * (s * eta),
        CutLocation::ImaginarySegment => z - s * eta,
        CutLocation::Off => {
            let sr = if z.re >= 0.0 { 1.0 } else { -1.0 };
            let si = if z.im >= 0.0 { 1.0 } else { -1.0 };
            z + C64::new(sr, si) * eta
        }
    }
}

/// All four sheet values of `w` at `z`; on a cut the `side` tag selects
/// the boundary value.
pub fn solve_w(z: C64, params: &CurveParams, side: Side) -> Result<SheetValues, CurveError> {
    guard_branch_points(z, params)?;
    let loc = cut_location(z, params);
    if loc != CutLocation::Off && side == Side::Interior {
        return Err(CurveError::OnCut(z));
    }
    let roots = curve_roots(z, params.gamma)?;
    if loc == CutLocation::Off {
        if let Some(values) = label_by_modulus(z, &roots) {
            return Ok(SheetValues { z, values, side });
        }
    }
    let scale = z.norm().max(1.0);
    let mut eta = 1e-7 * scale;
    while eta < 1e-2 * scale {
        let zr = reference_point(z, loc, side, eta);
        let rr = curve_roots(zr, params.gamma)?;
        if let Some(reference) = label_by_modulus(zr, &rr) {
            return Ok(SheetValues { z, values: match_roots(&reference, &roots), side });
        }
        eta *= 10.0;
    }
    Err(CurveError::Unresolved(z))
}

/// Roots of `(ŵ² + γ³)² = zŵ³`, sorted by modulus, largest first.
pub fn solve_w_hat(z: C64, params: &CurveParams) -> Result<[C64; 4], CurveError> {
    let g3 = params.gamma.powi(3);
    let coeffs = [C64::new(g3 * g3, 0.0), C64::new(0.0, 0.0), C64::new(2.0 * g3, 0.0), -z, ONE];
    let r = poly_roots(&coeffs)?;
    let mut out = [r[0], r[1], r[2], r[3]];
    out.sort_by(|p, q| q.norm().partial_cmp(&p.norm()).unwrap());
    Ok(out)
}

/// `w_j(z)` through `i/ŵ_k(i/z)` with the quadrant-dependent index map.
pub fn w_from_hat(z: C64, params: &CurveParams) -> Result<[C64; 4], CurveError> {
    let h = solve_w_hat(I / z, params)?;
    let inv = |k: usize| I / h[k - 1];
    Ok(if z.re > 0.0 {
        [inv(3), inv(4), inv(2), inv(1)]
    } else {
        [inv(4), inv(3), inv(1), inv(2)]
    })
}

/// Follow one root of the curve equation along a polyline by nearest match.
pub fn continue_root(path: &[C64], start: C64, gamma: f64) -> Result<Vec<C64>, CurveError> {
    let mut out = Vec::with_capacity(path.len());
    let mut current = start;
    for &z in path {
        let roots = curve_roots(z, gamma)?;
        current = *roots
            .iter()
            .min_by(|p, q| (*p - current).norm().partial_cmp(&(*q - current).norm()).unwrap())
            .unwrap();
        out.push(current);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesLocation {
    Origin,
    Infinity,
    Ic,
    MinusIc,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub location: SeriesLocation,
    pub sheet: usize,
    /// Exponents of the local uniformizer the coefficients multiply.
    pub powers: Vec<i32>,
    pub extracted: Vec<C64>,
    pub reference: Vec<C64>,
    pub max_rel_err: f64,
    /// Relative mismatch between the start and end of the continuation loop.
    pub loop_closure: f64,
}

const SERIES_NODES: usize = 128;
const SUBSTEPS: usize = 8;

/// Continue a root around the circle `ζ ↦ z(ζ)` starting from the
/// labelled value at the first node; returns values at the DFT nodes.
fn loop_values(
    radius: f64,
    z_of: &dyn Fn(C64) -> C64,
    start: C64,
    gamma: f64,
) -> Result<(Vec<C64>, f64), CurveError> {
    let n = SERIES_NODES;
    let mut path = Vec::with_capacity(n * SUBSTEPS + 1);
    for k in 0..=n * SUBSTEPS {
        let theta = 2.0 * PI * (0.5 + k as f64 / SUBSTEPS as f64) / n as f64;
        path.push(z_of(C64::from_polar(radius, theta)));
    }
    let vals = continue_root(&path, start, gamma)?;
    let nodes: Vec<C64> = (0..n).map(|j| vals[j * SUBSTEPS]).collect();
    let closure = (vals[n * SUBSTEPS] - vals[0]).norm() / vals[0].norm();
    Ok((nodes, closure))
}

/// Extract the local expansion coefficients of `w_j` numerically and
/// compare them to the tabulated closed forms.
pub fn verify_w_series(
    params: &CurveParams,
    location: SeriesLocation,
    sheet: usize,
) -> Result<SeriesReport, CurveError> {
    let g = params.gamma;
    let ic = params.ic();
    let (radius, powers, reference, samples, closure) = match (location, sheet) {
        (SeriesLocation::Infinity, 2) | (SeriesLocation::Infinity, 4) => {
            // ζ = z^{-1/2}; the loop runs through sheet 2 for Re ζ > 0 and 4 otherwise.
            let s = if sheet == 2 { 1.0 } else { -1.0 };
            let radius = 0.6 * params.c.powf(-0.5);
            let z_of = |zeta: C64| ONE / (zeta * zeta);
            let z0 = z_of(C64::from_polar(radius, PI / SERIES_NODES as f64));
            let start = solve_w(z0, params, Side::Interior)?.sheet(sheet);
            let (vals, closure) = loop_values(radius, &z_of, start, g)?;
            let reference = vec![
                C64::new(g.powf(-1.5), 0.0),
                C64::new(s * 0.5 * g.powf(-2.25), 0.0),
                C64::new(-s / 64.0 * g.powf(-3.75), 0.0),
                C64::new(1.0 / 128.0 * g.powf(-4.5), 0.0),
                C64::new(-s * 9.0 / 4096.0 * g.powf(-5.25), 0.0),
            ];
            (radius, vec![0, 1, 3, 4, 5], reference, vals, closure)
        }
        (SeriesLocation::Origin, 2) => {
            // ζ = z^{1/3}; the product ζ·w is analytic in ζ.
            let radius = 0.5 * params.c.powf(1.0 / 3.0);
            let z_of = |zeta: C64| zeta * zeta * zeta;
            let z0 = z_of(C64::from_polar(radius, PI / SERIES_NODES as f64));
            let start = solve_w(z0, params, Side::Interior)?.sheet(2);
            let (vals, closure) = loop_values(radius, &z_of, start, g)?;
            let nodes = CircleSamples::nodes(radius, SERIES_NODES);
            let vals = vals.iter().zip(&nodes).map(|(w, zeta)| w * zeta).collect();
            let reference = vec![
                C64::new(g.powi(-2), 0.0),
                C64::new(2.0 / 3.0 / g, 0.0),
                C64::new(-1.0 / 3.0, 0.0),
                C64::new(28.0 / 81.0 * g, 0.0),
            ];
            (radius, vec![0, 2, 4, 6], reference, vals, closure)
        }
        (SeriesLocation::Origin, 4) => {
            // The small root is analytic at 0 (w₄ on the right, w₃ on the left).
            let radius = 0.4 * params.c;
            let z_of = |zeta: C64| zeta;
            let z0 = C64::from_polar(radius, PI / SERIES_NODES as f64);
            let start = solve_w(z0, params, Side::Interior)?.sheet(4);
            let (vals, closure) = loop_values(radius, &z_of, start, g)?;
            let reference = vec![ONE, C64::new(-2.0 * g.powi(3), 0.0), C64::new(9.0 * g.powi(6), 0.0)];
            (radius, vec![1, 3, 5], reference, vals, closure)
        }
        (SeriesLocation::Ic, 3) | (SeriesLocation::MinusIc, 3) => {
            // ζ = (z ∓ ic)^{1/2}; the loop starts right of the branch point on
            // sheet 3. By w(z̄) = conj w(z) the coefficients at −ic are conjugated.
            let centre = if location == SeriesLocation::Ic { ic } else { -ic };
            let radius = 0.5 * params.c.sqrt();
            let z_of = |zeta: C64| centre + zeta * zeta;
            let z0 = z_of(C64::from_polar(radius, PI / SERIES_NODES as f64));
            let start = solve_w(z0, params, Side::Interior)?.sheet(3);
            let (vals, closure) = loop_values(radius, &z_of, start, g)?;
            let mut reference = vec![
                I / 3f64.sqrt() * g.powf(-1.5),
                8.0 * 3f64.powf(-1.75) * cis(0.75 * PI) * g.powf(-0.75),
            ];
            if location == SeriesLocation::MinusIc {
                reference.iter_mut().for_each(|c| *c = c.conj());
            }
            (radius, vec![0, 1], reference, vals, closure)
        }
        _ => return Err(CurveError::UnsupportedSeries(location, sheet)),
    };
    let samples = CircleSamples { radius, values: samples };
    let extracted: Vec<C64> = powers.iter().map(|&k| samples.coefficient(k)).collect();
    let max_rel_err = extracted
        .iter()
        .zip(&reference)
        .map(|(e, r)| (e - r).norm() / r.norm())
        .fold(0.0, f64::max);
    Ok(SeriesReport { location, sheet, powers, extracted, reference, max_rel_err, loop_closure: closure })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryReport {
    pub samples: usize,
    pub conjugation: f64,
    pub odd_12: f64,
    pub odd_34: f64,
}

/// Maximum residuals of `w_j(z̄) = conj w_j(z)`, `w₁(−z) = −w₂(z)` and
/// `w₃(−z) = −w₄(z)` over the given points.
pub fn verify_w_symmetries(params: &CurveParams, points: &[C64]) -> Result<SymmetryReport, CurveError> {
    let mut rep = SymmetryReport { samples: points.len(), conjugation: 0.0, odd_12: 0.0, odd_34: 0.0 };
    for &z in points {
        let w = solve_w(z, params, Side::Interior)?;
        let wc = solve_w(z.conj(), params, Side::Interior)?;
        let wm = solve_w(-z, params, Side::Interior)?;
        for j in 0..4 {
            rep.conjugation = rep.conjugation.max((wc.values[j] - w.values[j].conj()).norm());
        }
        rep.odd_12 = rep.odd_12.max((wm.sheet(1) + w.sheet(2)).norm());
        rep.odd_34 = rep.odd_34.max((wm.sheet(3) + w.sheet(4)).norm());
    }
    Ok(rep)
}

/// Maximum mismatch of the crosswise relations on the three cuts, sampled
/// at `n` points per cut. `x` values on the real half-lines are spread
/// logarithmically over `[1e-3, 1e3]`.
pub fn verify_cut_relations(params: &CurveParams, n: usize) -> Result<[f64; 3], CurveError> {
    let mut out = [0.0f64; 3];
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let x = 10f64.powf(-3.0 + 6.0 * s);
        let pos = C64::new(x, 0.0);
        let (p, m) = (solve_w(pos, params, Side::Plus)?, solve_w(pos, params, Side::Minus)?);
        out[0] = out[0].max((p.sheet(1) - m.sheet(3)).norm()).max((m.sheet(1) - p.sheet(3)).norm());
        let neg = C64::new(-x, 0.0);
        let (p, m) = (solve_w(neg, params, Side::Plus)?, solve_w(neg, params, Side::Minus)?);
        out[1] = out[1].max((p.sheet(2) - m.sheet(4)).norm()).max((m.sheet(2) - p.sheet(4)).norm());
        let y = params.c * (2.0 * s - 1.0);
        if y.abs() > BRANCH_GUARD * 10.0 && params.c - y.abs() > BRANCH_GUARD * 10.0 {
            let zi = C64::new(0.0, y);
            let (p, m) = (solve_w(zi, params, Side::Plus)?, solve_w(zi, params, Side::Minus)?);
            out[2] = out[2].max((p.sheet(3) - m.sheet(4)).norm()).max((m.sheet(3) - p.sheet(4)).norm());
        }
    }
    Ok(out)
}

/// Principal `z^{p}` re-exported for sibling modules.
pub(crate) fn pow(z: C64, p: f64) -> C64 {
    cpow(z, p)
}
