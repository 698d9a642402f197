//! Pearcey integrals, the Pearcey kernel and the 3×3 Pearcey parametrix.
//!
//! The parametrix is built from the ray solutions
//! `y_k(z) = ∫_0^{∞·i^k} e^{−t⁴/4 − ρt²/2 + izt} dt`, `k = 0..3`. Differences
//! `d_k = y_k − y_2` (k = 0, 1, 3) span the solutions of
//! `y‴ − ρy′ − zy = 0`; each sector of the jump contour is a fixed
//! combination of them. For small `|z|` the basis is summed from its
//! Taylor series at 0, for moderate `|z|` each column is integrated along
//! steepest-descent contours, and for large `|z|` the columns come from
//! the formal exponential expansions.

use crate::numerics::mat::{inv3, Mat3};
use crate::numerics::{cis, gauss_legendre, omega, poly_roots, I, ONE, ZERO};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PearceyError {
    #[error("quadrature tail estimate {0:.3e} above tolerance")]
    Tail(f64),
    #[error("Taylor series did not settle at |z| = {0}")]
    Taylor(f64),
    #[error("sector calibration failed: {0}")]
    Calibration(String),
    #[error("kernel needs nonzero x and y with x != y, got ({0}, {1})")]
    KernelArgs(f64, f64),
    #[error("steepest-descent contours could not be resolved at z = {0}")]
    Saddle(C64),
}

/// Integrals `∫_0^{∞·dir} (it)^m exp(sign·(t⁴/4 + ρt²/2) + izt) dt`, `m = 0..4`.
pub fn ray_moments(dir: C64, sign: f64, rho: C64, z: C64) -> Result<[C64; 5], PearceyError> {
    let phase = |r: f64| {
        let t = dir * r;
        let t2 = t * t;
        sign * (t2 * t2 / 4.0 + rho * t2 / 2.0) + I * z * t
    };
    // Truncate once the integrand bound with the r⁴ moment weight drops below e^{-48}.
    let mut s = 1.0;
    while {
        let e = phase(s).re + 4.0 * s.ln();
        !(e < -48.0 && phase(s + 0.5).re < phase(s).re)
    } {
        s += 0.25;
        if s > 200.0 {
            return Err(PearceyError::Tail(phase(s).re.exp()));
        }
    }
    let panels = (s / 0.2).ceil() as usize;
    let h = s / panels as f64;
    let (xg, wg) = gl16();
    let mut acc = [ZERO; 5];
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in xg.iter().zip(wg) {
            let r = a + 0.5 * h * (x + 1.0);
            let t = dir * r;
            let e = phase(r).exp() * (0.5 * h * w) * dir;
            let it = I * t;
            let mut pw = ONE;
            for m in 0..5 {
                acc[m] += pw * e;
                pw *= it;
            }
        }
    }
    Ok(acc)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(16))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PearceyEval {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub p: C64,
    pub p1: C64,
    pub p2: C64,
    pub p3: C64,
    pub q: C64,
    pub q1: C64,
    pub q2: C64,
    pub q3: C64,
}

impl PearceyEval {
    /// `|p‴ − ρp′ − xp|` and `|q‴ − ρq′ + yq|`.
    pub fn ode_residuals(&self) -> (f64, f64) {
        (
            (self.p3 - self.rho * self.p1 - self.x * self.p).norm(),
            (self.q3 - self.rho * self.q1 + self.y * self.q).norm(),
        )
    }
}

/// `p(x)` and `q(y)` with derivatives up to order three.
pub fn pearcey_pq(x: f64, y: f64, rho: f64) -> Result<PearceyEval, PearceyError> {
    let zx = C64::new(x, 0.0);
    let rc = C64::from(rho);
    let plus = ray_moments(ONE, -1.0, rc, zx)?;
    let minus = ray_moments(-ONE, -1.0, rc, zx)?;
    let p: Vec<C64> = (0..4).map(|m| (plus[m] - minus[m]) / (2.0 * PI)).collect();
    let zy = C64::new(y, 0.0);
    let mut q = [ZERO; 4];
    // Rays at π/4 and 5π/4 run inward, 3π/4 and 7π/4 outward.
    for (k, orient) in [(1, -1.0), (3, 1.0), (5, -1.0), (7, 1.0)] {
        let r = ray_moments(cis(k as f64 * PI / 4.0), 1.0, rc, zy)?;
        for m in 0..4 {
            q[m] += orient * r[m] / (2.0 * PI);
        }
    }
    Ok(PearceyEval { x, y, rho, p: p[0], p1: p[1], p2: p[2], p3: p[3], q: q[0], q1: q[1], q2: q[2], q3: q[3] })
}

fn kernel_numerator(e: &PearceyEval) -> C64 {
    e.p * e.q2 - e.p1 * e.q1 + e.p2 * e.q - e.rho * e.p * e.q
}

pub const DIAGONAL_OFFSET: f64 = 1e-3;
const DIAGONAL_SWITCH: f64 = 1e-4;

/// `K^Pe(x, y; ρ)` from the integral formula; near the diagonal the value
/// is extrapolated from symmetric offsets `h` and `h/2`.
pub fn pearcey_kernel_integral(x: f64, y: f64, rho: f64) -> Result<f64, PearceyError> {
    if (x - y).abs() >= DIAGONAL_SWITCH {
        let e = pearcey_pq(x, y, rho)?;
        return Ok((kernel_numerator(&e) / (x - y)).re);
    }
    let mid = 0.5 * (x + y);
    let one_sided = |h: f64| -> Result<f64, PearceyError> {
        let e = pearcey_pq(mid + h, mid - h, rho)?;
        Ok((kernel_numerator(&e) / (2.0 * h)).re)
    };
    // Averaging ±h leaves an even function of h; one Richardson step
    // removes its h² term.
    let at = |h: f64| -> Result<f64, PearceyError> { Ok(0.5 * (one_sided(h)? + one_sided(-h)?)) };
    let h = DIAGONAL_OFFSET;
    let (k1, k2) = (at(h)?, at(h / 2.0)?);
    Ok((4.0 * k2 - k1) / 3.0)
}

/// `K^Pe` numerator `p(x)q″(y) − p′(x)q′(y) + p″(x)q(y) − ρp(x)q(y)`.
pub fn pearcey_numerator(x: f64, y: f64, rho: f64) -> Result<C64, PearceyError> {
    Ok(kernel_numerator(&pearcey_pq(x, y, rho)?))
}

/// `θ_k(z; ρ) = (3/4)ω^{2k}z^{4/3} + (ρ/2)ω^k z^{2/3}` with the powers taken
/// from the supplied argument of `z`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaPhase {
    pub k: usize,
    pub z: C64,
    pub rho: C64,
    pub value: C64,
}

pub fn theta(k: usize, z: C64, rho: impl Into<C64>) -> ThetaPhase {
    theta_with_arg(k, z, z.arg(), rho.into())
}

fn theta_with_arg(k: usize, z: C64, arg: f64, rho: C64) -> ThetaPhase {
    let w = omega();
    let z23 = C64::from_polar(z.norm().powf(2.0 / 3.0), 2.0 * arg / 3.0);
    let value = 0.75 * w.powi(2 * k as i32) * z23 * z23 + rho / 2.0 * w.powi(k as i32) * z23;
    ThetaPhase { k, z, rho, value }
}

/// Sectors of the six-ray jump contour, counterclockwise from the positive axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl Sector {
    pub const ALL: [Sector; 6] = [Sector::S1, Sector::S2, Sector::S3, Sector::S4, Sector::S5, Sector::S6];

    /// Angular range `[lo, hi]` with `lo ∈ [−π, π)`.
    pub fn range(self) -> (f64, f64) {
        match self {
            Sector::S1 => (0.0, PI / 4.0),
            Sector::S2 => (PI / 4.0, 0.75 * PI),
            Sector::S3 => (0.75 * PI, PI),
            Sector::S4 => (-PI, -0.75 * PI),
            Sector::S5 => (-0.75 * PI, -PI / 4.0),
            Sector::S6 => (-PI / 4.0, 0.0),
        }
    }

    pub fn upper(self) -> bool {
        matches!(self, Sector::S1 | Sector::S2 | Sector::S3)
    }

    /// The sector containing `z`; points on a ray go to its `+` side.
    pub fn of(z: C64) -> Sector {
        let t = z.arg();
        let q = PI / 4.0;
        if t >= 0.0 {
            if t < q {
                Sector::S1
            } else if t <= 3.0 * q {
                Sector::S2
            } else {
                Sector::S3
            }
        } else if t <= -3.0 * q {
            Sector::S4
        } else if t < -q {
            Sector::S5
        } else {
            Sector::S6
        }
    }

    /// `arg z` continued into this sector's range.
    pub fn arg_of(self, z: C64) -> f64 {
        let (lo, hi) = self.range();
        let mid = 0.5 * (lo + hi);
        let mut t = z.arg();
        while t - mid > PI {
            t -= 2.0 * PI;
        }
        while t - mid < -PI {
            t += 2.0 * PI;
        }
        t
    }
}

/// Jump matrices of the Pearcey parametrix on the rays at angle `k·π/4`.
pub fn pearcey_jump(ray: usize) -> Mat3 {
    use crate::numerics::mat::from_real3;
    match ray {
        0 => from_real3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
        1 => from_real3([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]]),
        3 => from_real3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]]),
        4 => from_real3([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
        5 => from_real3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, -1.0, 1.0]]),
        7 => from_real3([[1.0, 0.0, 0.0], [1.0, 1.0, -1.0], [0.0, 0.0, 1.0]]),
        _ => panic!("no jump ray at {ray}·π/4"),
    }
}

/// `(+, −)` sectors on each side of a ray.
pub fn ray_sides(ray: usize) -> (Sector, Sector) {
    match ray {
        0 => (Sector::S1, Sector::S6),
        1 => (Sector::S2, Sector::S1),
        3 => (Sector::S2, Sector::S3),
        4 => (Sector::S3, Sector::S4),
        5 => (Sector::S4, Sector::S5),
        7 => (Sector::S6, Sector::S5),
        _ => panic!("no jump ray at {ray}·π/4"),
    }
}

pub const RAYS: [usize; 6] = [0, 1, 3, 4, 5, 7];

pub fn l_pe(upper: bool) -> Mat3 {
    let w = omega();
    let w2 = w * w;
    if upper {
        Mat3::new(-w, w2, ONE, -ONE, ONE, ONE, -w2, w, ONE)
    } else {
        Mat3::new(w2, w, ONE, ONE, ONE, ONE, w, w2, ONE)
    }
}

/// Classes of the sector-S1 columns in the ray basis `(y_0, y_1, y_2, y_3)`.
/// Obtained by [`calibrate_classes`] and frozen here.
pub const S1_CLASSES: [[i8; 4]; 3] = [[0, 1, -1, 0], [1, -1, 0, 0], [0, 1, 0, -1]];

/// Ray-class columns to coefficients on `(d_0, d_1, d_3)`.
fn class_to_d(classes: &[[i8; 4]; 3]) -> Mat3 {
    Mat3::from_fn(|row, col| {
        let k = [0, 1, 3][row];
        C64::new(classes[col][k] as f64, 0.0)
    })
}

/// Integer ray classes grow like `e^{ρ²/6}` times the leading term; this
/// factor brings them to the `e^{ρ²/8}` normalization of the asymptotics.
pub fn class_normalization(rho: f64) -> f64 {
    (-rho * rho / 24.0).exp()
}

fn class_normalization_c(rho: C64) -> C64 {
    (-rho * rho / 24.0).exp()
}

/// Constant matrices `C_S` with `Φ^Pe = Y(z)·C_S` in sector `S`, before
/// the scalar [`class_normalization`].
pub fn sector_constants(s1: &Mat3) -> [Mat3; 6] {
    let inv = |m: Mat3| inv3(&m).expect("unimodular jump");
    let c1 = *s1;
    let c2 = c1 * pearcey_jump(1);
    let c3 = c2 * inv(pearcey_jump(3));
    let c4 = c3 * inv(pearcey_jump(4));
    let c5 = c4 * inv(pearcey_jump(5));
    let c6 = c5 * pearcey_jump(7);
    [c1, c2, c3, c4, c5, c6]
}

fn sector_index(s: Sector) -> usize {
    Sector::ALL.iter().position(|&t| t == s).unwrap()
}

/// Fundamental basis `(d_0, d_1, d_3)` with rows `(y, y′, y″)`.
#[derive(Debug, Clone)]
pub struct RayBasis {
    pub rho: C64,
    /// `init[col][m] = d_col^{(m)}(0)`.
    init: [[C64; 3]; 3],
}

impl RayBasis {
    pub fn new(rho: impl Into<C64>) -> Result<Self, PearceyError> {
        let rho = rho.into();
        let mut y = [[ZERO; 5]; 4];
        for k in 0..4 {
            y[k] = ray_moments(I.powi(k as i32), -1.0, rho, ZERO)?;
        }
        let mut init = [[ZERO; 3]; 3];
        for (col, k) in [0usize, 1, 3].iter().enumerate() {
            for m in 0..3 {
                init[col][m] = y[*k][m] - y[2][m];
            }
        }
        Ok(RayBasis { rho, init })
    }

    /// `Y(z)` by the Taylor recurrence
    /// `(n+1)(n+2)(n+3)a_{n+3} = ρ(n+1)a_{n+1} + a_{n−1}`.
    pub fn eval(&self, z: C64) -> Result<Mat3, PearceyError> {
        let mut out = Mat3::zeros();
        for col in 0..3 {
            let mut a = vec![self.init[col][0], self.init[col][1], self.init[col][2] / 2.0];
            let (mut y, mut y1, mut y2) = (ZERO, ZERO, ZERO);
            let mut zn = ONE; // z^n
            let mut zn1 = ZERO; // z^{n-1}
            let mut zn2 = ZERO; // z^{n-2}
            let mut biggest = 0.0f64;
            let mut quiet = 0;
            let mut n = 0usize;
            loop {
                if n + 3 > a.len() {
                    let m = a.len() - 3;
                    let prev = if m == 0 { ZERO } else { a[m - 1] };
                    let next = (self.rho * (m as f64 + 1.0) * a[m + 1] + prev)
                        / ((m as f64 + 1.0) * (m as f64 + 2.0) * (m as f64 + 3.0));
                    a.push(next);
                }
                let nf = n as f64;
                let t0 = a[n] * zn;
                let t1 = nf * a[n] * zn1;
                let t2 = nf * (nf - 1.0) * a[n] * zn2;
                y += t0;
                y1 += t1;
                y2 += t2;
                let size = t0.norm().max(t1.norm()).max(t2.norm());
                biggest = biggest.max(size);
                quiet = if size <= 1e-18 * biggest { quiet + 1 } else { 0 };
                if quiet >= 6 && n > 8 {
                    break;
                }
                if n > 4000 {
                    return Err(PearceyError::Taylor(z.norm()));
                }
                zn2 = zn1;
                zn1 = zn;
                zn *= z;
                n += 1;
            }
            out[(0, col)] = y;
            out[(1, col)] = y1;
            out[(2, col)] = y2;
        }
        Ok(out)
    }
}

/// One steepest-descent contour of `e^{φ(t)}`, `φ = −t⁴/4 − ρt²/2 + izt`,
/// through a saddle, running from valley `start` to valley `end`
/// (valley `k` is the direction `i^k`).
#[derive(Debug, Clone, Copy)]
struct SaddlePath {
    start: usize,
    end: usize,
    /// `∫ (it)^m e^{φ(t)} dt`, `m = 0..2`.
    moments: [C64; 3],
}

fn saddle_phase(t: C64, rho: C64, z: C64) -> C64 {
    let t2 = t * t;
    -t2 * t2 / 4.0 - rho * t2 / 2.0 + I * z * t
}

fn saddle_phase_d(t: C64, rho: C64, z: C64) -> C64 {
    -t * t * t - rho * t + I * z
}

/// Tilts tried for the contours `φ(t*) − φ(t) = e^{iε}v²`.
const SADDLE_TILTS: [f64; 5] = [0.0, 0.35, -0.35, 0.7, -0.7];
/// Half-width of the `v` range: `e^{−cos ε·v²}` below `e^{−45}`.
const SADDLE_EXPONENT: f64 = 45.0;

/// Distance from the real `v` axis of the nearest image of another saddle.
fn saddle_clearance(saddles: &[C64], rho: C64, z: C64, i: usize, tilt: f64) -> f64 {
    let p0 = saddle_phase(saddles[i], rho, z);
    saddles
        .iter()
        .enumerate()
        .filter(|&(o, _)| o != i)
        .map(|(_, &t)| ((p0 - saddle_phase(t, rho, z)) * cis(-tilt)).sqrt().im.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Newton solve of `φ(t*) − φ(t) = e^{iε}v²` from `guess`.
fn saddle_point_at(p0: C64, rho: C64, z: C64, rot: C64, v: f64, guess: C64) -> Result<C64, PearceyError> {
    let mut t = guess;
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let f = p0 - saddle_phase(t, rho, z) - rot * v * v;
        let step = f / saddle_phase_d(t, rho, z);
        t += step;
        let size = step.norm() / t.norm().max(1.0);
        // Stop at 1e-15 or once rounding stalls the iteration.
        if size <= 1e-15 || (size < 1e-11 && size >= 0.5 * last) {
            return Ok(t);
        }
        last = size;
    }
    Err(PearceyError::Saddle(z))
}

/// Trapezoid sum along one half of the contour (`dir = ±1`) and the valley it ends in.
fn saddle_half(t0: C64, slope0: C64, rho: C64, z: C64, rot: C64, h: f64, dir: f64) -> Result<([C64; 3], usize), PearceyError> {
    let p0 = saddle_phase(t0, rho, z);
    let v_max = (SADDLE_EXPONENT / rot.re).sqrt();
    let mut acc = [ZERO; 3];
    let (mut t, mut dt) = (t0, slope0 * dir);
    let mut k = 0usize;
    loop {
        k += 1;
        let v = k as f64 * h;
        t = saddle_point_at(p0, rho, z, rot, v, t + dt * h)?;
        dt = -2.0 * rot * v / saddle_phase_d(t, rho, z);
        if v <= v_max {
            let w = (-rot * v * v).exp() * dt * h;
            let it = I * t;
            acc[0] += w;
            acc[1] += w * it;
            acc[2] += w * it * it;
        } else if t.norm().powi(3) > 20.0 * (z.norm() + rho.norm() * t.norm() + 1.0) {
            break;
        }
        if k > 200_000 {
            return Err(PearceyError::Saddle(z));
        }
    }
    let valley = ((2.0 * t.arg() / PI).round() as i64).rem_euclid(4) as usize;
    Ok((acc, valley))
}

fn saddle_paths(z: C64, rho: C64, tilt: f64) -> Result<Vec<SaddlePath>, PearceyError> {
    let saddles = poly_roots(&[-I * z, rho, ZERO, ONE]).map_err(|_| PearceyError::Saddle(z))?;
    let rot = cis(tilt);
    let mut out = Vec::with_capacity(3);
    for (i, &t0) in saddles.iter().enumerate() {
        let d = saddle_clearance(&saddles, rho, z, i, tilt);
        let h = (d / 6.0).min(0.2);
        let slope0 = (-2.0 * rot / (-3.0 * t0 * t0 - rho)).sqrt();
        let (fwd, end) = saddle_half(t0, slope0, rho, z, rot, h, 1.0)?;
        let (bwd, start) = saddle_half(t0, slope0, rho, z, rot, h, -1.0)?;
        let e0 = saddle_phase(t0, rho, z).exp();
        let it0 = I * t0;
        let centre = [slope0 * h, slope0 * h * it0, slope0 * h * it0 * it0];
        let mut moments = [ZERO; 3];
        for m in 0..3 {
            moments[m] = e0 * (fwd[m] - bwd[m] + centre[m]);
        }
        out.push(SaddlePath { start, end, moments });
    }
    Ok(out)
}

/// Columns `(y, y′, y″)` of the ray-class combinations `classes` (in
/// `(y_0, y_1, y_2, y_3)`, each summing to zero), from steepest-descent
/// contours. Free of the cancellation that limits the Taylor sum.
pub fn saddle_columns(z: C64, rho: impl Into<C64>, classes: &[[i64; 4]; 3]) -> Result<Mat3, PearceyError> {
    let rho = rho.into();
    let saddles = poly_roots(&[-I * z, rho, ZERO, ONE]).map_err(|_| PearceyError::Saddle(z))?;
    let mut tilts = SADDLE_TILTS.to_vec();
    let clearance = |tilt: f64| (0..3).map(|i| saddle_clearance(&saddles, rho, z, i, tilt)).fold(f64::INFINITY, f64::min);
    tilts.sort_by(|a, b| clearance(*b).total_cmp(&clearance(*a)));
    for tilt in tilts {
        let Ok(paths) = saddle_paths(z, rho, tilt) else { continue };
        let basis = nalgebra::Matrix4x3::from_fn(|k, i| {
            let p = &paths[i];
            (k == p.end) as i64 as f64 - (k == p.start) as i64 as f64
        });
        let svd = basis.svd(true, true);
        if svd.singular_values.min() < 0.5 {
            continue;
        }
        let mut out = Mat3::zeros();
        let mut ok = true;
        for (col, c) in classes.iter().enumerate() {
            let target = nalgebra::Vector4::from_fn(|k, _| c[k] as f64);
            let n = svd.solve(&target, 1e-12).map_err(|_| PearceyError::Saddle(z))?.map(f64::round);
            if (basis * n - target).amax() > 1e-9 {
                ok = false;
                break;
            }
            for (i, p) in paths.iter().enumerate() {
                for m in 0..3 {
                    out[(m, col)] += n[i] * p.moments[m];
                }
            }
        }
        if ok {
            return Ok(out);
        }
    }
    Err(PearceyError::Saddle(z))
}

/// Coefficients of `(A³ − ρA − s³)` acting on monomials, where
/// `A[s^m] = s^{m+1} + (ρ/3)s^{m−1} + (m/3)s^{m−3}` is the conjugated `d/dz`.
fn apply_a(terms: &[(i32, C64)], rho: C64) -> Vec<(i32, C64)> {
    let mut out: Vec<(i32, C64)> = Vec::with_capacity(terms.len() * 3);
    for &(m, c) in terms {
        out.push((m + 1, c));
        out.push((m - 1, c * rho / 3.0));
        if m != 0 {
            out.push((m - 3, c * (m as f64 / 3.0)));
        }
    }
    merge(out)
}

fn merge(mut v: Vec<(i32, C64)>) -> Vec<(i32, C64)> {
    v.sort_by_key(|t| -t.0);
    let mut out: Vec<(i32, C64)> = Vec::with_capacity(v.len());
    for (m, c) in v {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 += c,
            _ => out.push((m, c)),
        }
    }
    out
}

/// Formal solution `u(s) = Σ c_n s^{−1−2n}`, `c_0 = 1`, of
/// `(A³ − ρA − s³)u = 0`.
pub fn formal_coefficients(rho: impl Into<C64>, count: usize) -> Vec<C64> {
    let rho = rho.into();
    let op = |m: i32| -> Vec<(i32, C64)> {
        let one = [(m, ONE)];
        let a1 = apply_a(&one, rho);
        let a2 = apply_a(&a1, rho);
        let a3 = apply_a(&a2, rho);
        let mut all = a3;
        all.extend(a1.into_iter().map(|(p, c)| (p, -rho * c)));
        all.push((m + 3, -ONE));
        merge(all)
    };
    let mut c = vec![ONE];
    let images: Vec<Vec<(i32, C64)>> = (0..count).map(|n| op(-1 - 2 * n as i32)).collect();
    for n in 1..count {
        let target = -2 - 2 * n as i32;
        let mut r = ZERO;
        for k in 0..n {
            for &(p, v) in &images[k] {
                if p == target {
                    r += c[k] * v;
                }
            }
        }
        c.push(r / (2.0 * n as f64));
    }
    c
}

/// One column `(y, y′, y″)·e^{−Θ(s)}` of the formal solution at `s`, optimally
/// truncated, and the size of the first omitted term.
fn formal_column(s: C64, rho: C64, coeffs: &[C64]) -> ([C64; 3], f64) {
    let s2inv = ONE / (s * s);
    let mut sizes = Vec::with_capacity(coeffs.len());
    let mut p = ONE / s;
    for &c in coeffs {
        sizes.push(c.norm() * p.norm());
        p *= s2inv;
    }
    // Odd-indexed terms vanish at ρ = 0, so the smallest term is sought
    // among consecutive pairs.
    let blocks: Vec<f64> = sizes.chunks(2).map(|c| c.iter().sum()).collect();
    let mut stop = coeffs.len();
    let mut tail_size = 0.0;
    for k in 1..blocks.len() {
        if blocks[k] > blocks[k - 1] {
            stop = 2 * k - 2;
            tail_size = blocks[k - 1];
            break;
        }
    }
    let terms: Vec<(i32, C64)> = (0..stop).map(|n| (-1 - 2 * n as i32, coeffs[n])).collect();
    let a1 = apply_a(&terms, rho);
    let a2 = apply_a(&a1, rho);
    let sum = |t: &[(i32, C64)]| t.iter().fold(ZERO, |acc, &(m, c)| acc + c * s.powi(m));
    let tail = tail_size / sizes[0].max(1e-300);
    ([sum(&terms), sum(&a1), sum(&a2)], tail)
}

/// Prefactor `√(2π/3)·i·e^{ρ²/8}`.
pub fn pe_prefactor(rho: impl Into<C64>) -> C64 {
    let rho = rho.into();
    (2.0 * PI / 3.0).sqrt() * I * (rho * rho / 8.0).exp()
}

/// Φ^Pe in `sector` from the formal expansions: column `j` carries the
/// exponent of `Θ_±` and the leading row normalization of `L^Pe_±`.
pub fn pearcey_asymptotic(z: C64, rho: impl Into<C64>, sector: Sector) -> (Mat3, f64) {
    let n = pearcey_normalized(z, rho.into(), sector);
    let mut out = n.matrix;
    for col in 0..3 {
        let e = n.exponents[col].exp();
        for row in 0..3 {
            out[(row, col)] *= e;
        }
    }
    (out, n.tail)
}

/// `Φ^Pe·e^{−Θ}` from the formal expansion, with the exponents kept apart.
#[derive(Debug, Clone)]
pub struct NormalizedPe {
    pub matrix: Mat3,
    pub exponents: [C64; 3],
    pub tail: f64,
}

pub fn pearcey_normalized(z: C64, rho: C64, sector: Sector) -> NormalizedPe {
    let arg = sector.arg_of(z);
    let r13 = z.norm().powf(1.0 / 3.0);
    let z13 = C64::from_polar(r13, arg / 3.0);
    let upper = sector.upper();
    let l = l_pe(upper);
    let w = omega();
    // Θ₊ = diag(θ₁, θ₂, θ₃), Θ₋ = diag(θ₂, θ₁, θ₃); θ_k ↔ s = ω^{2k} z^{1/3}.
    let ks: [i32; 3] = if upper { [1, 2, 3] } else { [2, 1, 3] };
    let coeffs = formal_coefficients(rho, 80);
    let pref = pe_prefactor(rho);
    let mut matrix = Mat3::zeros();
    let mut exponents = [ZERO; 3];
    let mut tail = 0.0f64;
    for col in 0..3 {
        let s = w.powi(2 * ks[col]) * z13;
        let (u, t) = formal_column(s, rho, &coeffs);
        tail = tail.max(t);
        exponents[col] = theta_with_arg(ks[col] as usize, z, arg, rho).value;
        let kappa = pref * l[(0, col)] * s / z13;
        for row in 0..3 {
            matrix[(row, col)] = kappa * u[row];
        }
    }
    NormalizedPe { matrix, exponents, tail }
}

/// Radius beyond which contour integrals replace the Taylor sum.
pub const TAYLOR_RADIUS: f64 = 4.0;
/// Radius beyond which the formal expansion replaces the contour integrals.
pub const SERIES_RADIUS: f64 = 24.0;

#[derive(Debug, Clone, Serialize)]
pub struct PearceyParametrixValue {
    pub z: C64,
    pub rho: C64,
    #[serde(serialize_with = "crate::numerics::mat::ser_mat3")]
    pub matrix: Mat3,
    pub sector: Sector,
}

/// Evaluator for Φ^Pe at fixed ρ.
#[derive(Debug, Clone)]
pub struct PearceyParametrix {
    pub rho: C64,
    basis: RayBasis,
    constants: [Mat3; 6],
    classes: [[[i64; 4]; 3]; 6],
}

/// Columns of `C_S` as integer vectors on `(y_0, y_1, y_2, y_3)`.
fn sector_classes(c: &Mat3) -> [[i64; 4]; 3] {
    let mut out = [[0i64; 4]; 3];
    for col in 0..3 {
        for (row, k) in [0usize, 1, 3].iter().enumerate() {
            let v = c[(row, col)];
            debug_assert!(v.im == 0.0 && v.re.fract() == 0.0);
            out[col][*k] = v.re as i64;
        }
        out[col][2] = -(out[col][0] + out[col][1] + out[col][3]);
    }
    out
}

impl PearceyParametrix {
    pub fn new(rho: impl Into<C64>) -> Result<Self, PearceyError> {
        let rho = rho.into();
        let constants = sector_constants(&class_to_d(&S1_CLASSES));
        Ok(PearceyParametrix { rho, basis: RayBasis::new(rho)?, constants, classes: constants.map(|c| sector_classes(&c)) })
    }

    pub fn constants(&self, sector: Sector) -> Mat3 {
        self.constants[sector_index(sector)]
    }

    /// Analytic continuation of the sector's branch to `z`.
    pub fn in_sector(&self, z: C64, sector: Sector) -> Result<Mat3, PearceyError> {
        let r = z.norm();
        if r > SERIES_RADIUS {
            return Ok(pearcey_asymptotic(z, self.rho, sector).0);
        }
        let norm = class_normalization_c(self.rho);
        if r > TAYLOR_RADIUS {
            return Ok(saddle_columns(z, self.rho, &self.classes[sector_index(sector)])? * norm);
        }
        Ok(self.basis.eval(z)? * self.constants(sector) * norm)
    }

    pub fn eval(&self, z: C64) -> Result<PearceyParametrixValue, PearceyError> {
        let sector = Sector::of(z);
        Ok(PearceyParametrixValue { z, rho: self.rho, matrix: self.in_sector(z, sector)?, sector })
    }

    /// Boundary value from above on the real axis.
    pub fn plus_on_real(&self, x: f64) -> Result<Mat3, PearceyError> {
        let sector = if x >= 0.0 { Sector::S1 } else { Sector::S3 };
        self.in_sector(C64::new(x, 0.0), sector)
    }

    /// Ray-basis matrix `Y(z)` (small `|z|` only).
    pub fn basis(&self, z: C64) -> Result<Mat3, PearceyError> {
        self.basis.eval(z)
    }

    /// `Φ^Pe(z)·e^{−Θ(z)}` in `sector`, finite for large `|z|`.
    pub fn normalized(&self, z: C64, sector: Sector) -> Result<Mat3, PearceyError> {
        if z.norm() > SERIES_RADIUS {
            return Ok(pearcey_normalized(z, self.rho, sector).matrix);
        }
        let mut m = self.in_sector(z, sector)?;
        let arg = sector.arg_of(z);
        let ks: [usize; 3] = if sector.upper() { [1, 2, 3] } else { [2, 1, 3] };
        for col in 0..3 {
            let e = (-theta_with_arg(ks[col], z, arg, self.rho).value).exp();
            for row in 0..3 {
                m[(row, col)] *= e;
            }
        }
        Ok(m)
    }
}

pub fn pearcey_parametrix(z: C64, rho: f64) -> Result<PearceyParametrixValue, PearceyError> {
    PearceyParametrix::new(rho)?.eval(z)
}

/// `Φ(z) = Φ^Pe(z)^{−T}·[[0,0,−1],[1,0,0],[0,1,0]]`.
pub fn model_phi_from(pe: &Mat3) -> Mat3 {
    let inv_t = inv3(pe).expect("det Φ^Pe ≠ 0").transpose();
    inv_t * model_right_factor()
}

pub fn model_right_factor() -> Mat3 {
    crate::numerics::mat::from_real3([[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
}

pub fn model_phi(z: C64, rho: f64) -> Result<Mat3, PearceyError> {
    Ok(model_phi_from(&pearcey_parametrix(z, rho)?.matrix))
}

/// Jump matrices of the model problem Φ on the rays at angle `k·π/4`.
pub fn model_jump(ray: usize) -> Mat3 {
    use crate::numerics::mat::from_real3;
    match ray {
        0 => from_real3([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
        1 => from_real3([[1.0, 0.0, 0.0], [-1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]),
        3 => from_real3([[1.0, -1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
        4 => from_real3([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
        5 => from_real3([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
        7 => from_real3([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]),
        _ => panic!("no jump ray at {ray}·π/4"),
    }
}

/// `L_±` of the model problem.
pub fn l_model(upper: bool) -> Mat3 {
    let w = omega();
    let w2 = w * w;
    if upper {
        Mat3::new(-w, -ONE, -w2, -ONE, -ONE, -ONE, -w2, -ONE, -w)
    } else {
        Mat3::new(-w2, -ONE, w, -ONE, -ONE, ONE, -w, -ONE, w2)
    }
}

/// Row and column vectors of the four sign cases.
pub fn kernel_vectors(x: f64, y: f64) -> ([C64; 3], [C64; 3]) {
    let row = if y > 0.0 { [-ONE, ONE, ZERO] } else { [-ONE, ZERO, ONE] };
    let col = if x > 0.0 { [ONE, ONE, ZERO] } else { [ONE, ZERO, ONE] };
    (row, col)
}

pub fn bilinear(row: &[C64; 3], m: &Mat3, col: &[C64; 3]) -> C64 {
    let mut acc = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            acc += row[i] * m[(i, j)] * col[j];
        }
    }
    acc
}

/// `K^Pe` from the boundary values `Φ^Pe_+` on the real axis.
pub fn pearcey_kernel_rh_with(phi: &PearceyParametrix, x: f64, y: f64) -> Result<C64, PearceyError> {
    if x == 0.0 || y == 0.0 || x == y {
        return Err(PearceyError::KernelArgs(x, y));
    }
    let px = phi.plus_on_real(x)?;
    let py = phi.plus_on_real(y)?;
    let m = inv3(&py).expect("det Φ^Pe ≠ 0") * px;
    let (row, col) = kernel_vectors(x, y);
    Ok(bilinear(&row, &m, &col) / (2.0 * PI * I * (x - y)))
}

pub fn pearcey_kernel_rh(x: f64, y: f64, rho: f64) -> Result<f64, PearceyError> {
    Ok(pearcey_kernel_rh_with(&PearceyParametrix::new(rho)?, x, y)?.re)
}

/// RH kernel on the diagonal: symmetric offsets `±h`, `±h/2` averaged,
/// then one Richardson step.
pub fn pearcey_kernel_rh_diagonal(phi: &PearceyParametrix, x: f64) -> Result<f64, PearceyError> {
    let h = DIAGONAL_OFFSET;
    let one = |h: f64| Ok::<f64, PearceyError>(pearcey_kernel_rh_with(phi, x + h, x - h)?.re);
    let at = |h: f64| Ok::<f64, PearceyError>(0.5 * (one(h)? + one(-h)?));
    Ok((4.0 * at(h / 2.0)? - at(h)?) / 3.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelGridRow {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub k_integral: f64,
    pub k_rh: f64,
    pub abs_diff: f64,
}

impl KernelGridRow {
    /// `|k_rh − k_integral| / max(|k_integral|, 1e-3)`.
    pub fn rel_diff(&self) -> f64 {
        self.abs_diff / self.k_integral.abs().max(1e-3)
    }
}

/// Both kernel formulas on all ordered pairs of `points` (row-major, `x` outer).
pub fn consistency_grid(rho: f64, points: &[f64]) -> Result<Vec<KernelGridRow>, PearceyError> {
    let phi = PearceyParametrix::new(rho)?;
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &x in points {
        for &y in points {
            let k_integral = pearcey_kernel_integral(x, y, rho)?;
            let k_rh = if x == y { pearcey_kernel_rh_diagonal(&phi, x)? } else { pearcey_kernel_rh_with(&phi, x, y)?.re };
            rows.push(KernelGridRow { x, y, rho, k_integral, k_rh, abs_diff: (k_rh - k_integral).abs() });
        }
    }
    Ok(rows)
}

/// `B_1 … B_4` of the rotation identity.
pub fn rotation_b(quadrant: usize) -> Mat3 {
    use crate::numerics::mat::from_real3;
    match quadrant {
        1 => from_real3([[0.0, 0.0, -1.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        2 => from_real3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
        3 => from_real3([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]),
        4 => from_real3([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
        _ => panic!("quadrant must be 1..4"),
    }
}

pub fn quadrant(z: C64) -> usize {
    match (z.re > 0.0, z.im > 0.0) {
        (true, true) => 1,
        (false, true) => 2,
        (false, false) => 3,
        (true, false) => 4,
    }
}

/// `‖diag(−i,1,i)·Φ^Pe(iz;−ρ)·B_j − Φ^Pe(z;ρ)‖ / ‖Φ^Pe(z;ρ)‖`.
pub fn check_rotation_symmetry(z: C64, rho: f64) -> Result<f64, PearceyError> {
    let lhs = rotated_parametrix(&PearceyParametrix::new(-rho)?, z)?;
    let rhs = pearcey_parametrix(z, rho)?.matrix;
    Ok(crate::numerics::mat::max_abs3(&(lhs - rhs)) / crate::numerics::mat::max_abs3(&rhs))
}

/// `diag(−i,1,i)·Φ^Pe(iz; ρ')·B_j` for `z` in quadrant `j`, with `phi` at `ρ' = −ρ`.
/// For `z` on a jump ray the image is taken from the limit matching the
/// side on which `Φ^Pe(z)` is evaluated.
pub fn rotated_parametrix(phi: &PearceyParametrix, z: C64) -> Result<Mat3, PearceyError> {
    let d = crate::numerics::mat::diag3([-I, ONE, I]);
    let own = Sector::of(z);
    let (lo, hi) = own.range();
    let nudge = if own.arg_of(z) < 0.5 * (lo + hi) { 1e-9 } else { -1e-9 };
    let probe = z * cis(nudge);
    let image = Sector::of(I * probe);
    Ok(d * phi.in_sector(I * z, image)? * rotation_b(quadrant(probe)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub classes: [[i8; 4]; 3],
    /// Worst relative asymptotic mismatch over the test points in every sector.
    pub asymptotic_mismatch: f64,
    /// Mismatch ratio between the runner-up and the chosen assignment.
    pub separation: f64,
}

fn candidate_classes() -> Vec<[i8; 4]> {
    let mut out = Vec::new();
    for code in 0..81 {
        let mut v = [0i8; 4];
        let mut c = code;
        for k in 0..4 {
            v[k] = (c % 3) as i8 - 1;
            c /= 3;
        }
        if v.iter().map(|&x| x as i32).sum::<i32>() == 0 && v.iter().any(|&x| x != 0) {
            out.push(v);
        }
    }
    out
}

/// Searches the ray classes of the S1 columns by comparing each candidate
/// against the formal expansion at points of S1, then checks the
/// propagated constants against the expansion in all six sectors.
pub fn calibrate_classes(rho: f64, radius: f64) -> Result<CalibrationReport, PearceyError> {
    let basis = RayBasis::new(rho)?;
    let probes: Vec<C64> = [0.1, 0.5, 0.9].iter().map(|f| C64::from_polar(radius, f * PI / 4.0)).collect();
    let evaluated: Vec<(Mat3, Mat3)> = probes
        .iter()
        .map(|&z| Ok((basis.eval(z)?, pearcey_asymptotic(z, rho, Sector::S1).0)))
        .collect::<Result<_, PearceyError>>()?;
    let cands = candidate_classes();
    let mut shortlist: Vec<Vec<(f64, [i8; 4])>> = Vec::new();
    for col in 0..3 {
        let mut scored: Vec<(f64, [i8; 4])> = cands
            .iter()
            .map(|v| {
                let c = class_to_d(&[*v, *v, *v]);
                let worst = evaluated
                    .iter()
                    .map(|(y, asy)| {
                        let got = y * c.column(0) * C64::new(class_normalization(rho), 0.0);
                        let want = asy.column(col);
                        (got - want).norm() / want.norm()
                    })
                    .fold(0.0, f64::max);
                (worst, *v)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(4);
        shortlist.push(scored);
    }
    // Recessive additions are invisible in S1 alone; the full-plane
    // asymptotics decide between the shortlisted combinations.
    let mut ranked: Vec<(f64, [[i8; 4]; 3])> = Vec::new();
    for a in &shortlist[0] {
        for b in &shortlist[1] {
            for c in &shortlist[2] {
                let classes = [a.1, b.1, c.1];
                ranked.push((sector_mismatch(&basis, &classes, rho, radius)?, classes));
            }
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mismatch, classes) = ranked[0];
    let separation = ranked[1].0 / mismatch.max(1e-300);
    Ok(CalibrationReport { classes, asymptotic_mismatch: mismatch, separation })
}

fn sector_mismatch(basis: &RayBasis, classes: &[[i8; 4]; 3], rho: f64, radius: f64) -> Result<f64, PearceyError> {
    let constants = sector_constants(&class_to_d(classes));
    let mut mismatch = 0.0f64;
    for s in Sector::ALL {
        let (lo, hi) = s.range();
        for f in [0.2, 0.5, 0.8] {
            let z = C64::from_polar(radius, lo + f * (hi - lo));
            let got = basis.eval(z)? * constants[sector_index(s)] * C64::new(class_normalization(rho), 0.0);
            let (want, _) = pearcey_asymptotic(z, rho, s);
            for col in 0..3 {
                let d = (got.column(col) - want.column(col)).norm() / want.column(col).norm();
                mismatch = mismatch.max(d);
            }
        }
    }
    Ok(mismatch)
}
