//! Phase diagrams of the two models and the double scaling maps onto the
//! Pearcey parameters `(s, t)`.
//!
//! Brownian model: curves `T = 1` and `T = T(τ) = α²(1−τ)/τ + β²τ/(1−τ)`.
//! Two-matrix model: `τ = √(α+2)` (physical for α > −1) and
//! `τ = √(−1/α)` (physical for α < −1), meeting at `(−1, 1)`.

use serde::{Deserialize, Serialize};

/// Relative tolerance for landing on a phase boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhaseError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("tau must lie in (0, 1), got {0}")]
    TauRange(f64),
    #[error("number of paths must be even and positive, got {0}")]
    OddN(usize),
    #[error("critical normalization 2αβ = 1 violated: 2αβ = {0}")]
    NotCritical(f64),
}

pub type Result<T> = std::result::Result<T, PhaseError>;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(PhaseError::NotPositive { name, value })
    }
}

fn near(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

/// Brownian model: n paths, half from ±α at time 0 to ±β at time 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrownianConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub tau: f64,
    pub n: usize,
}

impl BrownianConfig {
    pub fn new(alpha: f64, beta: f64, t: f64, tau: f64, n: usize) -> Result<Self> {
        let cfg = Self { alpha, beta, t, tau, n };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("T", self.t)?;
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(PhaseError::TauRange(self.tau));
        }
        if self.n == 0 || self.n % 2 != 0 {
            return Err(PhaseError::OddN(self.n));
        }
        Ok(())
    }

    /// Brownian rescaling `x → λx`, `T → λ²T` with `2(λα)(λβ) = 1`.
    pub fn normalized(&self) -> Self {
        let l = (2.0 * self.alpha * self.beta).sqrt().recip();
        Self { alpha: l * self.alpha, beta: l * self.beta, t: l * l * self.t, ..*self }
    }

    /// Errors unless `2αβ = 1` to 1e−12.
    pub fn require_critical(&self) -> Result<()> {
        let p = 2.0 * self.alpha * self.beta;
        if (p - 1.0).abs() > 1e-12 {
            return Err(PhaseError::NotCritical(p));
        }
        Ok(())
    }
}

/// `T(τ) = α²(1−τ)/τ + β²τ/(1−τ)`.
pub fn cusp_temperature(alpha: f64, beta: f64, tau: f64) -> f64 {
    alpha * alpha * (1.0 - tau) / tau + beta * beta * tau / (1.0 - tau)
}

/// `τ_crit = α/(α+β)`, the minimizer of `T(τ)`.
pub fn tau_crit(alpha: f64, beta: f64) -> f64 {
    alpha / (alpha + beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrownianPhase {
    /// `T < 1`: the two groups are separated.
    CaseI,
    /// `1 < T < T(τ)`: the groups have merged over a time window not containing τ.
    CaseII,
    /// `T > max(1, T(τ))`: a single interval at time τ.
    CaseIII,
    OnT1,
    OnCuspCurve,
    Multicritical,
}

impl BrownianPhase {
    pub fn name(self) -> &'static str {
        match self {
            BrownianPhase::CaseI => "case_i",
            BrownianPhase::CaseII => "case_ii",
            BrownianPhase::CaseIII => "case_iii",
            BrownianPhase::OnT1 => "on_t1",
            BrownianPhase::OnCuspCurve => "on_cusp_curve",
            BrownianPhase::Multicritical => "multicritical",
        }
    }

    pub fn id(self) -> u8 {
        match self {
            BrownianPhase::CaseI => 1,
            BrownianPhase::CaseII => 2,
            BrownianPhase::CaseIII => 3,
            BrownianPhase::OnT1 => 10,
            BrownianPhase::OnCuspCurve => 11,
            BrownianPhase::Multicritical => 20,
        }
    }
}

pub fn brownian_phase(cfg: &BrownianConfig) -> Result<BrownianPhase> {
    brownian_phase_tol(cfg, BOUNDARY_TOL)
}

/// As [`brownian_phase`] with an explicit relative boundary tolerance.
pub fn brownian_phase_tol(cfg: &BrownianConfig, tol: f64) -> Result<BrownianPhase> {
    cfg.validate()?;
    let cusp = cusp_temperature(cfg.alpha, cfg.beta, cfg.tau);
    let on_t1 = near(cfg.t, 1.0, tol);
    let on_cusp = near(cfg.t, cusp, tol);
    Ok(match (on_t1, on_cusp) {
        (true, true) => BrownianPhase::Multicritical,
        (true, false) => BrownianPhase::OnT1,
        (false, true) => BrownianPhase::OnCuspCurve,
        _ if cfg.t < 1.0 => BrownianPhase::CaseI,
        _ if cfg.t < cusp => BrownianPhase::CaseII,
        _ => BrownianPhase::CaseIII,
    })
}

/// Image of a Brownian double scaling point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianScaling {
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_big: f64,
    pub s: f64,
    pub t: f64,
    pub c: f64,
}

/// `τ = τ_c + K n^{−1/3}`, `T = 1 + L n^{−2/3}` mapped to the Pearcey `(s, t)`
/// and the space scale `c`.
pub fn brownian_scaling(n: f64, k: f64, l: f64, alpha: f64, beta: f64) -> Result<BrownianScaling> {
    positive("n", n)?;
    positive("alpha", alpha)?;
    positive("beta", beta)?;
    let ab = alpha + beta;
    Ok(BrownianScaling {
        tau: tau_crit(alpha, beta) + k * n.powf(-1.0 / 3.0),
        t_big: 1.0 + l * n.powf(-2.0 / 3.0),
        s: 2f64.powf(-5.0 / 3.0) * (ab.powi(4) * k * k - l),
        t: -(2f64.powf(-1.0 / 3.0)) * ab * ab * k,
        c: 2f64.powf(1.0 / 3.0) * ab,
    })
}

/// A point `(α, τ)` of the two-matrix phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoMatrixPoint {
    pub alpha: f64,
    pub tau: f64,
}

impl TwoMatrixPoint {
    pub fn new(alpha: f64, tau: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(PhaseError::NotPositive { name: "finite alpha", value: alpha });
        }
        positive("tau", tau)?;
        Ok(Self { alpha, tau })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoMatrixPhase {
    CaseI,
    CaseII,
    CaseIII,
    CaseIV,
    PainleveCurve,
    PearceyCurve,
    Multicritical,
}

impl TwoMatrixPhase {
    pub fn name(self) -> &'static str {
        match self {
            TwoMatrixPhase::CaseI => "case_i",
            TwoMatrixPhase::CaseII => "case_ii",
            TwoMatrixPhase::CaseIII => "case_iii",
            TwoMatrixPhase::CaseIV => "case_iv",
            TwoMatrixPhase::PainleveCurve => "painleve_curve",
            TwoMatrixPhase::PearceyCurve => "pearcey_curve",
            TwoMatrixPhase::Multicritical => "multicritical",
        }
    }

    pub fn id(self) -> u8 {
        match self {
            TwoMatrixPhase::CaseI => 1,
            TwoMatrixPhase::CaseII => 2,
            TwoMatrixPhase::CaseIII => 3,
            TwoMatrixPhase::CaseIV => 4,
            TwoMatrixPhase::PainleveCurve => 10,
            TwoMatrixPhase::PearceyCurve => 11,
            TwoMatrixPhase::Multicritical => 20,
        }
    }
}

/// `τ = √(α+2)`, defined for α ≥ −2.
pub fn painleve_tau(alpha: f64) -> Option<f64> {
    (alpha >= -2.0).then(|| (alpha + 2.0).sqrt())
}

/// `τ = √(−1/α)`, defined for α < 0.
pub fn pearcey_tau(alpha: f64) -> Option<f64> {
    (alpha < 0.0).then(|| (-1.0 / alpha).sqrt())
}

/// Regions are cut by the solid curves; the dashed continuations
/// (`√(α+2)` for α < −1, `√(−1/α)` for −1 < α < 0) separate I/IV and II/III.
/// Points on a dashed continuation belong to the region below it.
pub fn twomatrix_phase(p: &TwoMatrixPoint) -> Result<TwoMatrixPhase> {
    twomatrix_phase_tol(p, BOUNDARY_TOL)
}

/// As [`twomatrix_phase`] with an explicit relative boundary tolerance.
pub fn twomatrix_phase_tol(p: &TwoMatrixPoint, tol: f64) -> Result<TwoMatrixPhase> {
    let TwoMatrixPoint { alpha, tau } = TwoMatrixPoint::new(p.alpha, p.tau)?;
    if near(alpha, -1.0, tol) && near(tau, 1.0, tol) {
        return Ok(TwoMatrixPhase::Multicritical);
    }
    let pain = painleve_tau(alpha);
    let pear = pearcey_tau(alpha);
    if alpha >= -1.0 {
        let pain = pain.expect("alpha >= -1");
        if alpha > -1.0 && near(tau, pain, tol) {
            return Ok(TwoMatrixPhase::PainleveCurve);
        }
        if tau < pain {
            return Ok(TwoMatrixPhase::CaseI);
        }
        Ok(match pear {
            Some(q) if tau > q => TwoMatrixPhase::CaseIII,
            _ => TwoMatrixPhase::CaseII,
        })
    } else {
        let pear = pear.expect("alpha < -1");
        if near(tau, pear, tol) {
            return Ok(TwoMatrixPhase::PearceyCurve);
        }
        if tau > pear {
            return Ok(TwoMatrixPhase::CaseIII);
        }
        Ok(match pain {
            Some(q) if tau <= q => TwoMatrixPhase::CaseI,
            _ => TwoMatrixPhase::CaseIV,
        })
    }
}

/// Image of a two-matrix double scaling point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMatrixScaling {
    pub alpha: f64,
    pub tau: f64,
    pub s: f64,
    pub t: f64,
}

/// `(α, τ) = (−1, 1) + a n^{−1/3}(2, 1) + b n^{−2/3}(−1, 2)`.
pub fn twomatrix_scaling(n: f64, a: f64, b: f64) -> Result<TwoMatrixScaling> {
    positive("n", n)?;
    let e1 = a * n.powf(-1.0 / 3.0);
    let e2 = b * n.powf(-2.0 / 3.0);
    Ok(TwoMatrixScaling {
        alpha: -1.0 + 2.0 * e1 - e2,
        tau: 1.0 + e1 + 2.0 * e2,
        s: (a * a - 5.0 * b) / 4.0,
        t: -a,
    })
}

/// Pearcey parameters `(s, t)` of the large-|a| matching: `s = −a²/2` is the
/// Pearcey locus and `t = |a|(1 ± σ/(2|a|^{3/2}))`.
pub fn pearcey_direction(a: f64, sigma: f64, sign: f64) -> (f64, f64) {
    let m = a.abs();
    (-a * a / 2.0, m * (1.0 + sign * sigma / (2.0 * m.powf(1.5))))
}

/// Abscissas where two curves meet on `[lo, hi]`: sign changes of `f − g`
/// refined by bisection, and tangential contacts (local minima of `|f − g|`
/// refined by ternary search and accepted below `touch_tol`).
pub fn curve_crossings(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    steps: usize,
    touch_tol: f64,
) -> Vec<f64> {
    let d = |x: f64| f(x) - g(x);
    let h = (hi - lo) / steps as f64;
    let xs: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * h).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| d(x)).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut push = |x: f64| {
        if out.last().map_or(true, |&p| (x - p).abs() > 2.0 * h) {
            out.push(x);
        }
    };
    for i in 0..steps {
        if ds[i] == 0.0 {
            push(xs[i]);
            continue;
        }
        if ds[i] * ds[i + 1] < 0.0 {
            let (mut a, mut b, mut fa) = (xs[i], xs[i + 1], ds[i]);
            while b - a > 1e-15 * a.abs().max(1.0) {
                let m = 0.5 * (a + b);
                let fm = d(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            push(0.5 * (a + b));
            continue;
        }
        if i > 0 && ds[i].abs() <= ds[i - 1].abs() && ds[i].abs() <= ds[i + 1].abs() && ds[i - 1] * ds[i + 1] > 0.0 {
            let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
            for _ in 0..200 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if d(m1).abs() < d(m2).abs() {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let m = 0.5 * (a + b);
            if d(m).abs() <= touch_tol {
                push(m);
            }
        }
    }
    if ds[steps] == 0.0 {
        push(xs[steps]);
    }
    out
}

/// One sample of a phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSample {
    pub x: f64,
    pub y: f64,
    pub region: u8,
    pub label: &'static str,
}

/// Brownian diagram on a (τ, T) grid at fixed α, β.
pub fn brownian_diagram(alpha: f64, beta: f64, taus: &[f64], temps: &[f64]) -> Result<Vec<PhaseSample>> {
    let mut out = Vec::with_capacity(taus.len() * temps.len());
    for &t in temps {
        for &tau in taus {
            let ph = brownian_phase(&BrownianConfig::new(alpha, beta, t, tau, 2)?)?;
            out.push(PhaseSample { x: tau, y: t, region: ph.id(), label: ph.name() });
        }
    }
    Ok(out)
}

/// Two-matrix diagram on an (α, τ) grid.
pub fn twomatrix_diagram(alphas: &[f64], taus: &[f64]) -> Result<Vec<PhaseSample>> {
    let mut out = Vec::with_capacity(alphas.len() * taus.len());
    for &tau in taus {
        for &alpha in alphas {
            let ph = twomatrix_phase(&TwoMatrixPoint::new(alpha, tau)?)?;
            out.push(PhaseSample { x: alpha, y: tau, region: ph.id(), label: ph.name() });
        }
    }
    Ok(out)
}
