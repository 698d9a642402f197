//! λ-functions `λ_j = z²(C₁w_j⁴ + C₂w_j² + C₃ + C₄w_j^{-2})` and their
//! expansion constants.

use crate::curve::{continue_root, solve_w, CurveError, CurveParams, Model, SheetValues, Side};
use crate::numerics::{cis, omega, CircleSamples, ONE, ZERO};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Disk radius around 0 and ±ic* excluded from the global estimates.
pub const DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl LambdaCoeffs {
    pub fn new(gamma: f64) -> Self {
        let g = |p: f64| gamma.powf(p);
        LambdaCoeffs {
            c1: -1.5 * g(33.0 / 4.0) + 3.0 / 32.0 * g(27.0 / 4.0),
            c2: 3.5 * g(21.0 / 4.0) + 17.0 / 32.0 * g(15.0 / 4.0),
            c3: -2.5 * g(9.0 / 4.0) - 65.0 / 96.0 * g(0.75),
            c4: 0.5 * g(-0.75) + 5.0 / 96.0 * g(-9.0 / 4.0),
        }
    }

    /// `λ` from a single sheet value `w` at `z`.
    pub fn lambda(&self, z: C64, w: C64) -> C64 {
        let w2 = w * w;
        z * z * (self.c1 * w2 * w2 + self.c2 * w2 + self.c3 + self.c4 / w2)
    }
}

pub fn lambda_from_w(w: &SheetValues, params: &CurveParams) -> SheetValues {
    let k = LambdaCoeffs::new(params.gamma);
    let mut values = [ZERO; 4];
    for j in 0..4 {
        values[j] = k.lambda(w.z, w.values[j]);
    }
    SheetValues { z: w.z, values, side: w.side }
}

pub fn lambda_values(z: C64, params: &CurveParams, side: Side) -> Result<SheetValues, CurveError> {
    Ok(lambda_from_w(&solve_w(z, params, side)?, params))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticConstants {
    pub ell: C64,
    pub d: C64,
    /// Largest deviation among the fixed leading coefficients
    /// `(2/3, t̃, −1)` and the vanishing ones, relative to their scale.
    pub fit_residual: f64,
    /// `(ℓ, D)` from a least-squares ladder on λ₄ with the flipped sign pattern.
    pub ell_from_l4: C64,
    pub d_from_l4: C64,
}

const LOOP_NODES: usize = 128;
const LOOP_SUBSTEPS: usize = 8;

/// Values of λ around a circle in the uniformizer `ζ`, obtained by
/// continuing the root that starts on `sheet` at the first node.
fn lambda_loop(
    params: &CurveParams,
    radius: f64,
    z_of: &dyn Fn(C64) -> C64,
    sheet: usize,
) -> Result<CircleSamples, CurveError> {
    let n = LOOP_NODES;
    let path: Vec<C64> = (0..n * LOOP_SUBSTEPS)
        .map(|k| {
            let theta = 2.0 * PI * (0.5 + k as f64 / LOOP_SUBSTEPS as f64) / n as f64;
            z_of(C64::from_polar(radius, theta))
        })
        .collect();
    let start = solve_w(path[0], params, Side::Interior)?.sheet(sheet);
    let w = continue_root(&path, start, params.gamma)?;
    let k = LambdaCoeffs::new(params.gamma);
    let values = (0..n).map(|j| k.lambda(path[j * LOOP_SUBSTEPS], w[j * LOOP_SUBSTEPS])).collect();
    Ok(CircleSamples { radius, values })
}

/// `(ℓ, D)` from the Laurent expansion of λ₂ in `ζ = z^{-1/2}`:
/// `λ = (2/3)ζ^{-3} + t̃ζ^{-2} − ζ^{-1} + ℓ − 2Dζ + …`.
pub fn estimate_ell_d(params: &CurveParams) -> Result<AsymptoticConstants, CurveError> {
    let radius = 0.6 * params.c.powf(-0.5);
    let loop2 = lambda_loop(params, radius, &|zeta: C64| ONE / (zeta * zeta), 2)?;
    let coeff = |k: i32| loop2.coefficient(k);
    let ell = coeff(0);
    let d = -coeff(1) / 2.0;
    let t = params.t_tilde();
    let mut fit_residual = 0.0f64;
    for (k, expected) in [(-3, 2.0 / 3.0), (-2, t), (-1, -1.0), (-4, 0.0), (-5, 0.0), (-6, 0.0)] {
        fit_residual = fit_residual.max((coeff(k) - expected).norm() / expected.abs().max(1.0));
    }
    let (ell_from_l4, d_from_l4) = ladder_fit_l4(params)?;
    Ok(AsymptoticConstants { ell, d, fit_residual, ell_from_l4, d_from_l4 })
}

/// Least squares for `λ₄ − [−(2/3)z^{3/2} + t̃z + z^{1/2}] = ℓ + 2Dz^{-1/2} + Σ e_k z^{-k/2}`
/// on the rays `arg z = ±2π/3`, radii log-spaced in `[10², 10⁴]`.
fn ladder_fit_l4(params: &CurveParams) -> Result<(C64, C64), CurveError> {
    let t = params.t_tilde();
    let extra = 6;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..13 {
        let r = 10f64.powf(2.0 + 2.0 * k as f64 / 12.0);
        for theta in [2.0 * PI / 3.0, -2.0 * PI / 3.0] {
            let z = C64::from_polar(r, theta);
            let lam = lambda_values(z, params, Side::Interior)?.sheet(4);
            let s = z.sqrt();
            let rest = lam - (-2.0 / 3.0 * z * s + t * z + s);
            let zeta = ONE / s;
            let mut row = vec![ONE, 2.0 * zeta];
            let mut p = zeta;
            for _ in 0..extra {
                p *= zeta;
                row.push(p);
            }
            rows.push(row);
            rhs.push(rest);
        }
    }
    let m = DMatrix::from_fn(rows.len(), 2 + extra, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let sol = m.svd(true, true).solve(&b, 1e-14).expect("svd solve");
    Ok((sol[0], sol[1]))
}

/// Even germ `Σ_k coeffs[k] z^{2k}`.
#[derive(Debug, Clone, Serialize)]
pub struct EvenSeries {
    pub coeffs: Vec<C64>,
}

impl EvenSeries {
    pub fn eval(&self, z: C64) -> C64 {
        let z2 = z * z;
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z2 + c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalExpansion {
    pub g0: f64,
    pub h0: f64,
    pub k0: f64,
    pub l0: f64,
    pub g: EvenSeries,
    pub h: EvenSeries,
    pub k: EvenSeries,
    pub l: EvenSeries,
    pub gt_ic: C64,
    pub ht_ic: C64,
    /// Mismatch between the even series and the direct split at an
    /// independent set of quadrant-I points.
    pub split_residual: f64,
}

/// Closed forms for `G(0), H(0), K(0), L(0)`.
pub fn local_constants(gamma: f64) -> [f64; 4] {
    let g15 = gamma.powf(1.5);
    [
        3.0 / (32.0 * gamma.powf(1.25)) * (1.0 - 16.0 * g15),
        (25.0 - 16.0 * g15) / (32.0 * gamma.powf(0.25)),
        gamma.powf(0.75) / 96.0 * (15.0 + 16.0 * g15),
        (5.0 + 48.0 * g15) / (96.0 * gamma.powf(2.25)),
    ]
}

/// Closed forms for `G̃(ic)` and `H̃(ic)`.
pub fn tilde_constants(gamma: f64) -> (C64, C64) {
    let g15 = gamma.powf(1.5);
    let gt = 9.0 / (256.0 * gamma.powf(2.25)) * (3.0 + 16.0 * g15);
    let ht = -(3f64.powf(0.25) / 27.0) * (5.0 + 16.0 * g15) * cis(0.75 * PI);
    (C64::new(gt, 0.0), ht)
}

/// `(G z^{2/3}, H z^{4/3}, K z²)` from the three sheets meeting at 0,
/// for `z` in the open first quadrant.
pub fn dft_split(lam: &SheetValues) -> (C64, C64, C64) {
    let w = omega();
    let (l1, l2, l3) = (lam.sheet(1), lam.sheet(2), lam.sheet(3));
    let k = (l1 + l2 + l3) / 3.0;
    let g = (l2 + w * w * l3 + w * l1) / 3.0;
    let h = (l2 + w * l3 + w * w * l1) / 3.0;
    (g, h, k)
}

/// Values of `(G, H, K, L)` at a first-quadrant point.
fn ghkl_at(z: C64, params: &CurveParams) -> Result<[C64; 4], CurveError> {
    let lam = lambda_values(z, params, Side::Interior)?;
    let (g, h, k) = dft_split(&lam);
    let z23 = crate::curve::pow(z, 2.0 / 3.0);
    Ok([g / z23, h / (z23 * z23), k / (z * z), lam.sheet(4)])
}

/// Even germs of G, H, K, L by the discrete split on a circle; the first
/// quadrant is computed and the rest filled through evenness and
/// `f(z̄) = conj f(z)`.
pub fn local_expansion(params: &CurveParams, order: usize) -> Result<LocalExpansion, CurveError> {
    let order = order.min(15);
    let radius = 0.4 * params.c;
    let n = 64;
    let quarter = n / 4;
    let mut vals = vec![[ZERO; 4]; n];
    for j in 0..quarter {
        let theta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
        let q = ghkl_at(C64::from_polar(radius, theta), params)?;
        vals[j] = q;
        // θ → −θ (conjugate), θ → θ + π (even), θ → π − θ (both).
        vals[n - 1 - j] = q.map(|v| v.conj());
        vals[j + n / 2] = q;
        vals[n / 2 - 1 - j] = q.map(|v| v.conj());
    }
    let mut series: Vec<EvenSeries> = Vec::new();
    for f in 0..4 {
        let samples = CircleSamples { radius, values: vals.iter().map(|v| v[f]).collect() };
        series.push(EvenSeries { coeffs: (0..=order).map(|k| samples.coefficient(2 * k as i32)).collect() });
    }
    let mut split_residual = 0.0f64;
    for j in 0..8 {
        let z = C64::from_polar(0.55 * radius, PI / 2.0 * (j as f64 + 0.5) / 8.0);
        let direct = ghkl_at(z, params)?;
        for f in 0..4 {
            let full = EvenSeries { coeffs: (0..n / 4).map(|k| {
                let s = CircleSamples { radius, values: vals.iter().map(|v| v[f]).collect() };
                s.coefficient(2 * k as i32)
            }).collect() };
            let scale = direct[f].norm().max(1.0);
            split_residual = split_residual.max((full.eval(z) - direct[f]).norm() / scale);
        }
    }
    let (gt_ic, ht_ic) = tilde_expansion(params)?;
    let re = |s: &EvenSeries| s.coeffs[0].re;
    Ok(LocalExpansion {
        g0: re(&series[0]),
        h0: re(&series[1]),
        k0: re(&series[2]),
        l0: re(&series[3]),
        l: series.pop().unwrap(),
        k: series.pop().unwrap(),
        h: series.pop().unwrap(),
        g: series.pop().unwrap(),
        gt_ic,
        ht_ic,
        split_residual,
    })
}

/// `G̃(ic)` and `H̃(ic)` from λ₃ in `ζ = (z − ic)^{1/2}`; the ζ¹ coefficient
/// must vanish and is returned through [`tilde_odd_defect`].
pub fn tilde_expansion(params: &CurveParams) -> Result<(C64, C64), CurveError> {
    let s = tilde_samples(params)?;
    Ok((s.coefficient(0), s.coefficient(3)))
}

pub fn tilde_odd_defect(params: &CurveParams) -> Result<f64, CurveError> {
    Ok(tilde_samples(params)?.coefficient(1).norm())
}

fn tilde_samples(params: &CurveParams) -> Result<CircleSamples, CurveError> {
    let ic = params.ic();
    lambda_loop(params, 0.5 * params.c.sqrt(), &|zeta: C64| ic + zeta * zeta, 3)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub a_values: Vec<f64>,
    /// `max |λ_j − λ_j*| / (|a|^{-3/2} max(1, |z|^{3/2}))` per a.
    pub normalized: Vec<f64>,
    pub spread: f64,
}

/// Normalized deviation of λ from λ* over sample points outside D(0, δ).
pub fn convergence_bound(
    a_values: &[f64],
    sigma: f64,
    model: Model,
    points: &[C64],
) -> Result<ConvergenceReport, CurveError> {
    let star = CurveParams::star(model);
    let mut normalized = Vec::new();
    for &a in a_values {
        let p = CurveParams::new(a, sigma, model)?;
        let mut worst = 0.0f64;
        for &z in points {
            let l = lambda_values(z, &p, Side::Interior)?;
            let ls = lambda_values(z, &star, Side::Interior)?;
            let scale = a.abs().powf(-1.5) * z.norm().powf(1.5).max(1.0);
            for j in 0..4 {
                worst = worst.max((l.values[j] - ls.values[j]).norm() / scale);
            }
        }
        normalized.push(worst);
    }
    let hi = normalized.iter().cloned().fold(0.0, f64::max);
    let lo = normalized.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if hi == 0.0 { 1.0 } else if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(ConvergenceReport { a_values: a_values.to_vec(), normalized, spread })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignContour {
    /// `z = e^{iπ/4}x`.
    Gamma1,
    /// `z = ic* + e^{iπ/3}x`.
    Gamma1Tilde2,
    /// `z = ic* + e^{2iπ/3}x`.
    GammaTilde3,
    /// `z = e^{3iπ/4}x`.
    Gamma4,
    /// `z = iy`, `0 < |y| ≤ c* − δ`.
    ImagSegment,
}

impl SignContour {
    pub fn id(self) -> &'static str {
        match self {
            SignContour::Gamma1 => "gamma1",
            SignContour::Gamma1Tilde2 => "gamma_tilde2",
            SignContour::GammaTilde3 => "gamma_tilde3",
            SignContour::Gamma4 => "gamma4",
            SignContour::ImagSegment => "imag_segment",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignRow {
    pub x: f64,
    pub re_l1: f64,
    pub re_l2: f64,
    pub re_l3: f64,
    pub re_l4: f64,
    pub contour_id: &'static str,
    pub a: f64,
    pub sigma: f64,
    pub model: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    pub contour: SignContour,
    pub rows: Vec<SignRow>,
    /// Fitted constants `min(−Re diff / |z|^p)`, one per inequality.
    pub constants: Vec<f64>,
    pub violations: usize,
}

/// Tabulates Re λ_j along one contour and checks the sign inequalities.
/// On the imaginary segment the four columns hold
/// `(Re λ₄,₊, Re λ₄,₋, Re λ₃,₊, Re λ₃,₋)`.
pub fn contour_sign_report(
    params: &CurveParams,
    contour: SignContour,
    points: usize,
    x_max: f64,
) -> Result<SignReport, CurveError> {
    let c_star = crate::curve::branch_height(crate::curve::gamma_star());
    let ic_star = C64::new(0.0, c_star);
    let mut rows = Vec::with_capacity(points);
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    let push_row = |rows: &mut Vec<SignRow>, x: f64, v: [f64; 4]| {
        rows.push(SignRow {
            x,
            re_l1: v[0],
            re_l2: v[1],
            re_l3: v[2],
            re_l4: v[3],
            contour_id: contour.id(),
            a: params.a,
            sigma: params.sigma,
            model: params.model.name(),
        })
    };
    for k in 0..points {
        let s = k as f64 / (points - 1) as f64;
        match contour {
            SignContour::ImagSegment => {
                let ymax = c_star - DELTA;
                // Symmetric grid avoiding y = 0.
                let y = -ymax + 2.0 * ymax * (k as f64 + 0.5) / points as f64;
                let z = C64::new(0.0, y);
                let p = lambda_values(z, params, Side::Plus)?;
                let m = lambda_values(z, params, Side::Minus)?;
                let diff = (p.sheet(4) - m.sheet(4)).re;
                ratios.push(vec![-diff]);
                push_row(&mut rows, y, [p.sheet(4).re, m.sheet(4).re, p.sheet(3).re, m.sheet(3).re]);
            }
            _ => {
                let x = DELTA + (x_max - DELTA) * s;
                let (z, pairs, power): (C64, Vec<(usize, usize)>, f64) = match contour {
                    SignContour::Gamma1 => (cis(PI / 4.0) * x, vec![(1, 2), (1, 3)], 2.0 / 3.0),
                    SignContour::Gamma4 => (cis(0.75 * PI) * x, vec![(2, 1), (2, 4)], 2.0 / 3.0),
                    SignContour::Gamma1Tilde2 => (ic_star + cis(PI / 3.0) * x, vec![(4, 3)], 1.5),
                    SignContour::GammaTilde3 => (ic_star + cis(2.0 * PI / 3.0) * x, vec![(3, 4)], 1.5),
                    SignContour::ImagSegment => unreachable!(),
                };
                let lam = lambda_values(z, params, Side::Interior)?;
                let r: Vec<f64> = pairs
                    .iter()
                    .map(|&(i, j)| -(lam.sheet(i) - lam.sheet(j)).re / z.norm().powf(power))
                    .collect();
                ratios.push(r);
                push_row(&mut rows, x, [lam.sheet(1).re, lam.sheet(2).re, lam.sheet(3).re, lam.sheet(4).re]);
            }
        }
    }
    let count = ratios[0].len();
    let constants: Vec<f64> =
        (0..count).map(|i| ratios.iter().map(|r| r[i]).fold(f64::MAX, f64::min)).collect();
    let violations = ratios.iter().flatten().filter(|&&v| !(v > 0.0)).count();
    Ok(SignReport { contour, rows, constants, violations })
}

/// `λ` at a point given as `I`-rotated input, exposed for the RH modules.
pub fn lambda_sheet(z: C64, params: &CurveParams, side: Side, sheet: usize) -> Result<C64, CurveError> {
    Ok(lambda_values(z, params, side)?.sheet(sheet))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_exact_on_synthetic_data() {
        let (g, h, k) = (C64::new(0.3, 0.1), C64::new(-1.2, 0.4), C64::new(0.7, -0.2));
        let z = C64::new(0.4, 0.3);
        let z23 = crate::curve::pow(z, 2.0 / 3.0);
        let w = omega();
        let lam = |cg: C64, ch: C64| g * cg * z23 + h * ch * z23 * z23 + k * z * z;
        let sv = SheetValues {
            z,
            values: [lam(w * w, w), lam(ONE, ONE), lam(w, w * w), ZERO],
            side: Side::Interior,
        };
        let (gs, hs, ks) = dft_split(&sv);
        assert!((gs - g * z23).norm() < 1e-15);
        assert!((hs - h * z23 * z23).norm() < 1e-15);
        assert!((ks - k * z * z).norm() < 1e-15);
    }
}
