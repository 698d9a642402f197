//! Local parametrix at the origin, matching on `∂D(0,δ)` and the
//! finite-`a` tacnode and critical kernel approximations.

use crate::curve::{cut_location, CurveError, CurveParams, CutLocation, Model, Side};
use crate::lambda::{lambda_values, local_expansion, EvenSeries, LocalExpansion, DELTA};
use crate::numerics::mat::{blockdiag, diag3, inv3, inv4, max_abs4, Mat3, Mat4};
use crate::numerics::{I, ONE, ZERO};
use crate::pearcey::{
    l_model, model_phi_from, model_right_factor, pearcey_kernel_integral, pearcey_normalized, PearceyError,
    PearceyParametrix, Sector, SERIES_RADIUS,
};
use crate::rh_chain::{jm4, jump_matrix, GlobalParametrix, Piece, RhError};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Order of the even germs of `G`, `H`, `K`.
const GERM_ORDER: usize = 15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Local0Error {
    #[error("disk radius {0} must lie in (0, {DELTA}]")]
    Delta(f64),
    #[error("f is not conformal on the disk: min |f'|/|f'(0)| = {0}")]
    Conformality(f64),
    #[error("point {0} lies outside D(0, δ)")]
    OutOfDisk(C64),
    #[error("kernel arguments ({0}, {1}) must be distinct and nonzero")]
    KernelArgs(f64, f64),
    #[error("point {0} lies on a jump contour; a side is required")]
    OnContour(C64),
    #[error("singular matrix at {0}")]
    Singular(C64),
    #[error("kernel vector leaves the 3×3 block")]
    BlockLeak,
    #[error("need at least {0} ladder values")]
    Ladder(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Rh(#[from] RhError),
    #[error(transparent)]
    Pearcey(#[from] PearceyError),
}

fn real_germ(s: &EvenSeries) -> EvenSeries {
    EvenSeries { coeffs: s.coeffs.iter().map(|c| C64::new(c.re, 0.0)).collect() }
}

fn derivative(s: &EvenSeries, z: C64) -> C64 {
    let z2 = z * z;
    let mut acc = ZERO;
    for (k, c) in s.coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z2 + c * (2 * k) as f64;
    }
    acc * z
}

/// `C_+ = I` or `C_- = diag(1, 1, [[0,1],[−1,0]])`.
pub fn c_matrix(minus: bool) -> Mat4 {
    let mut c = Mat4::identity();
    if minus {
        c[(2, 2)] = ZERO;
        c[(3, 3)] = ZERO;
        c[(2, 3)] = ONE;
        c[(3, 2)] = -ONE;
    }
    c
}

/// Whether `C_-` applies: `Re z < 0`, or `Re z = 0` on the `+` (left) side.
fn uses_c_minus(z: C64, side: Side) -> bool {
    z.re < 0.0 || (z.re == 0.0 && side == Side::Plus)
}

/// `Φ^Pe` sector for the image `f` of `z`; real `z` needs a side.
fn image_sector(z: C64, f: C64, side: Side) -> Result<Sector, Local0Error> {
    if z.im != 0.0 {
        return Ok(Sector::of(f));
    }
    Ok(match (z.re > 0.0, side) {
        (_, Side::Interior) => return Err(Local0Error::OnContour(z)),
        (true, Side::Plus) => Sector::S1,
        (true, Side::Minus) => Sector::S6,
        (false, Side::Plus) => Sector::S3,
        (false, Side::Minus) => Sector::S4,
    })
}

fn fpow(f: C64, sector: Sector, p: f64) -> C64 {
    C64::from_polar(f.norm().powf(p), p * sector.arg_of(f))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `f`, `ρ`, `E₀` and `M^(0)` on `D(0,δ)` for fixed curve parameters.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub params: CurveParams,
    pub delta: f64,
    /// `|a|³`.
    pub n: f64,
    pub expansion: LocalExpansion,
    g: EvenSeries,
    h: EvenSeries,
    k: EvenSeries,
    global: GlobalParametrix,
}

impl LocalFrame {
    pub fn new(params: &CurveParams, delta: f64) -> Result<Self, Local0Error> {
        if !(delta > 0.0 && delta <= DELTA) {
            return Err(Local0Error::Delta(delta));
        }
        let expansion = local_expansion(params, GERM_ORDER)?;
        let frame = LocalFrame {
            params: *params,
            delta,
            n: params.a.abs().powi(3),
            g: real_germ(&expansion.g),
            h: real_germ(&expansion.h),
            k: real_germ(&expansion.k),
            expansion,
            global: GlobalParametrix::new(params)?,
        };
        let ratio = frame.conformality();
        if !(ratio > 0.1) {
            return Err(Local0Error::Conformality(ratio));
        }
        Ok(frame)
    }

    pub fn build(a: f64, sigma: f64, model: Model) -> Result<Self, Local0Error> {
        Self::new(&CurveParams::new(a, sigma, model)?, DELTA)
    }

    /// `min |f'(z)| / |f'(0)|` over rings filling the disk.
    pub fn conformality(&self) -> f64 {
        let d0 = self.f_prime(ZERO).norm();
        let mut worst = f64::INFINITY;
        for r in [0.25, 0.5, 0.75, 1.0] {
            for j in 0..32 {
                let z = C64::from_polar(r * self.delta, 2.0 * PI * j as f64 / 32.0);
                worst = worst.min(self.f_prime(z).norm() / d0);
            }
        }
        worst
    }

    fn h43(&self, z: C64) -> C64 {
        4.0 / 3.0 * self.h.eval(z)
    }

    /// `f(z) = |a|^{9/4}(4H(z)/3)^{3/4} z`.
    pub fn f(&self, z: C64) -> C64 {
        self.n.powf(0.75) * self.h43(z).powf(0.75) * z
    }

    pub fn f_prime(&self, z: C64) -> C64 {
        let h = self.h43(z);
        let dh = 4.0 / 3.0 * derivative(&self.h, z);
        self.n.powf(0.75) * (h.powf(0.75) + 0.75 * z * h.powf(-0.25) * dh)
    }

    /// Solves `f(z) = w` by Newton's method from the linearization.
    pub fn f_inverse(&self, w: C64) -> C64 {
        let mut z = w / self.f_prime(ZERO);
        for _ in 0..60 {
            let step = (self.f(z) - w) / self.f_prime(z);
            z -= step;
            if step.norm() <= 1e-16 * z.norm() {
                break;
            }
        }
        z
    }

    /// `ρ(z) = 2|a|³G z^{2/3}/f^{2/3} = 2|a|^{3/2}G(z)/(4H(z)/3)^{1/2}`.
    pub fn rho(&self, z: C64) -> C64 {
        2.0 * self.n.sqrt() * self.g.eval(z) / self.h43(z).sqrt()
    }

    pub fn k_germ(&self, z: C64) -> C64 {
        self.k.eval(z)
    }

    fn check_disk(&self, z: C64) -> Result<(), Local0Error> {
        if z.norm() > self.delta {
            return Err(Local0Error::OutOfDisk(z));
        }
        Ok(())
    }

    fn global_side(&self, z: C64, side: Side) -> Result<Side, Local0Error> {
        if cut_location(z, &self.params) == CutLocation::Off {
            return Ok(Side::Interior);
        }
        if side == Side::Interior {
            return Err(Local0Error::OnContour(z));
        }
        Ok(side)
    }

    /// `M^(∞)(z)`.
    pub fn global(&self, z: C64, side: Side) -> Result<Mat4, Local0Error> {
        Ok(self.global.eval(z, self.global_side(z, side)?)?.matrix)
    }

    /// `−i√(6π)e^{ρ²/8 − |a|³Kz²}L_±^{-1}diag(f^{-1/3}, 1, f^{1/3})`.
    fn x_factor(&self, z: C64, side: Side) -> Result<Mat3, Local0Error> {
        let f = self.f(z);
        let sector = image_sector(z, f, side)?;
        let rho = self.rho(z);
        let scal = -I * (6.0 * PI).sqrt() * (rho * rho / 8.0 - self.n * self.k_germ(z) * z * z).exp();
        let l_inv = inv3(&l_model(sector.upper())).ok_or(Local0Error::Singular(z))?;
        Ok(l_inv * diag3([fpow(f, sector, -1.0 / 3.0), ONE, fpow(f, sector, 1.0 / 3.0)]) * scal)
    }

    /// `E₀(z)`; the side selects the formula on `ℝ` and `iℝ`.
    pub fn e0(&self, z: C64, side: Side) -> Result<Mat4, Local0Error> {
        self.check_disk(z)?;
        let minus = uses_c_minus(z, side);
        let c_inv = c_matrix(minus).transpose();
        Ok(self.global(z, side)? * c_inv * blockdiag(&self.x_factor(z, side)?, ONE))
    }

    /// `Φ(f(z); ρ(z))` from a parametrix at `ρ(z)`.
    pub fn model_phi(&self, pe: &PearceyParametrix, z: C64, side: Side) -> Result<Mat3, Local0Error> {
        let f = self.f(z);
        let sector = image_sector(z, f, side)?;
        Ok(model_phi_from(&pe.in_sector(f, sector)?))
    }

    /// `Φ(f(z); ρ(z))` in the sector of `f(z)`.
    pub fn phi(&self, z: C64, side: Side) -> Result<Mat3, Local0Error> {
        let pe = PearceyParametrix::new(self.rho(z))?;
        self.model_phi(&pe, z, side)
    }

    /// `M^(0)(z) = E₀·blockdiag(Φ, φ)·C_±·diag(e^{|a|³λ_j})`. The entry
    /// `φ·e^{|a|³λ_j}` that meets `C_±` is identically `±1` and is set so.
    pub fn local_parametrix(&self, z: C64, side: Side) -> Result<Mat4, Local0Error> {
        self.check_disk(z)?;
        let minus = uses_c_minus(z, side);
        let c = c_matrix(minus);
        let lam = lambda_values(z, &self.params, self.global_side(z, side)?)?;
        let phi = self.phi(z, side)?;
        let mut p = blockdiag(&phi, ZERO) * c;
        for j in 0..4 {
            let e = (self.n * lam.values[j]).exp();
            for i in 0..3 {
                p[(i, j)] *= e;
            }
            p[(3, j)] = c[(3, j)];
        }
        Ok(self.e0(z, side)? * p)
    }

    /// Residual of the three `θ`-identities at an off-axis point, relative
    /// to `max(|θ_k|, 1)`.
    pub fn theta_identity_residual(&self, z: C64) -> Result<f64, Local0Error> {
        if z.re == 0.0 || z.im == 0.0 {
            return Err(Local0Error::OnContour(z));
        }
        let f = self.f(z);
        let rho = self.rho(z);
        let lam = lambda_values(z, &self.params, Side::Interior)?;
        let kz2 = self.k_germ(z) * z * z;
        // Sheets matched to θ₁, θ₂, θ₃ in quadrants I–IV.
        let sheets = match (z.re > 0.0, z.im > 0.0) {
            (true, true) => [3, 1, 2],
            (false, true) => [4, 1, 2],
            (false, false) => [1, 4, 2],
            (true, false) => [1, 3, 2],
        };
        let mut worst = 0.0f64;
        for (k, &j) in sheets.iter().enumerate() {
            let th = crate::pearcey::theta(k + 1, f, rho).value;
            let rhs = self.n * (lam.sheet(j) - kz2);
            worst = worst.max((th - rhs).norm() / th.norm().max(1.0));
        }
        Ok(worst)
    }

    /// Largest `|E₀₊ − E₀₋| / |E₀₊|` at `samples` points on each of `ℝ` and `iℝ`.
    pub fn e0_jump_residuals(&self, samples: usize) -> Result<[f64; 2], Local0Error> {
        let mut out = [0.0f64; 2];
        for m in 0..samples {
            let half = samples / 2;
            let k = m % half.max(1);
            let t = 0.95 * self.delta * (k as f64 + 0.5) / half.max(1) as f64;
            let s = if m < half { 1.0 } else { -1.0 };
            for (axis, z) in [C64::new(s * t, 0.0), C64::new(0.0, s * t)].into_iter().enumerate() {
                let p = self.e0(z, Side::Plus)?;
                let q = self.e0(z, Side::Minus)?;
                out[axis] = out[axis].max(max_abs4(&(p - q)) / max_abs4(&p));
            }
        }
        Ok(out)
    }

    /// `‖M^(0)(M^(∞))^{-1} − I‖` at an off-axis point. The exponentials
    /// are removed analytically through the `θ`-identities, leaving
    /// `M^(∞)C^{-1}·blockdiag(Y, 1)·C·(M^(∞))^{-1}` with
    /// `Y = −i√(6π)e^{ρ²/8}L^{-1}diag(f^{-1/3},1,f^{1/3})·N^{-T}R₀`,
    /// `N = Φ^Pe e^{-Θ}`.
    pub fn matching_deviation(&self, z: C64) -> Result<f64, Local0Error> {
        if z.re == 0.0 || z.im == 0.0 {
            return Err(Local0Error::OnContour(z));
        }
        let f = self.f(z);
        let sector = Sector::of(f);
        let rho = self.rho(z);
        let n = if f.norm() > SERIES_RADIUS {
            pearcey_normalized(f, rho, sector).matrix
        } else {
            PearceyParametrix::new(rho)?.normalized(f, sector)?
        };
        let n_inv_t = inv3(&n).ok_or(Local0Error::Singular(z))?.transpose();
        let l_inv = inv3(&l_model(sector.upper())).ok_or(Local0Error::Singular(z))?;
        let scal = -I * (6.0 * PI).sqrt() * (rho * rho / 8.0).exp();
        let y = l_inv * diag3([fpow(f, sector, -1.0 / 3.0), ONE, fpow(f, sector, 1.0 / 3.0)]) * n_inv_t
            * model_right_factor()
            * scal;
        let c = c_matrix(z.re < 0.0);
        let m = self.global(z, Side::Interior)?;
        let m_inv = inv4(&m).ok_or(Local0Error::Singular(z))?;
        let dev = m * c.transpose() * blockdiag(&y, ONE) * c * m_inv - Mat4::identity();
        Ok(max_abs4(&dev))
    }

    /// Sup of [`Self::matching_deviation`] over `points` nodes of `∂D(0,δ)`.
    pub fn matching_sup(&self, points: usize) -> Result<f64, Local0Error> {
        let mut sup = 0.0f64;
        for j in 0..points {
            let z = C64::from_polar(self.delta, 2.0 * PI * (j as f64 + 0.5) / points as f64);
            sup = sup.max(self.matching_deviation(z)?);
        }
        Ok(sup)
    }

    /// `u = 2^{-1/2}|a|^{-9/4}x`.
    pub fn scaled(&self, x: f64) -> f64 {
        x / (2f64.sqrt() * self.n.powf(0.75))
    }

    /// Residual of `M^(0)₊ = M^(0)₋J^(0)` at points whose image lies on
    /// the ray `arg f = π/4`, with `|f|` in `radii`.
    pub fn gamma1_jump_residual(&self, radii: &[f64]) -> Result<f64, Local0Error> {
        let mut worst = 0.0f64;
        for &r in radii {
            let z = self.f_inverse(C64::from_polar(r, PI / 4.0));
            let pe = PearceyParametrix::new(self.rho(z))?;
            let f = self.f(z);
            let side = |sector: Sector| -> Result<Mat4, Local0Error> {
                let phi = model_phi_from(&pe.in_sector(f, sector)?);
                let lam = lambda_values(z, &self.params, Side::Interior)?;
                let mut p = blockdiag(&phi, ZERO);
                for j in 0..4 {
                    let e = (self.n * lam.values[j]).exp();
                    for i in 0..3 {
                        p[(i, j)] *= e;
                    }
                }
                p[(3, 3)] = ONE;
                Ok(self.e0(z, Side::Interior)? * p)
            };
            let plus = side(Sector::S2)?;
            let minus = side(Sector::S1)?;
            let j = jm4(z, &self.params, Piece::Ray(1))?.matrix;
            worst = worst.max(max_abs4(&(plus - minus * j)) / max_abs4(&plus));
        }
        Ok(worst)
    }
}

/// Real-axis vectors of the tacnode kernel for `M₊` (from above): the
/// continuation into the sector around `iℝ⁺` crosses `Γ₁, Γ₂` from `ℝ⁺`
/// and `Γ₄, Γ₃` clockwise from `ℝ⁻`.
pub fn tacnode_vectors(positive: bool) -> Result<([C64; 4], [C64; 4]), Local0Error> {
    let p = if positive {
        jump_matrix(1)? * jump_matrix(2)?
    } else {
        inv4(&jump_matrix(4)?).unwrap() * inv4(&jump_matrix(3)?).unwrap()
    };
    let hat_col = nalgebra::Vector4::new(ONE, ONE, ZERO, ZERO);
    let hat_row = nalgebra::RowVector4::new(ZERO, ZERO, ONE, ONE);
    let col = p * hat_col;
    let row = hat_row * inv4(&p).unwrap();
    Ok(([row[0], row[1], row[2], row[3]], [col[0], col[1], col[2], col[3]]))
}

/// Vectors moved through `C_±` into the `Φ` frame; the fourth entry must vanish.
fn block_vectors(row: [C64; 4], col: [C64; 4], row_minus: bool, col_minus: bool) -> Result<([C64; 3], [C64; 3]), Local0Error> {
    let r = nalgebra::RowVector4::from_row_slice(&row) * c_matrix(row_minus).transpose();
    let c = c_matrix(col_minus) * nalgebra::Vector4::from_column_slice(&col);
    if r[3].norm() > 0.0 || c[3].norm() > 0.0 {
        return Err(Local0Error::BlockLeak);
    }
    Ok(([r[0], r[1], r[2]], [c[0], c[1], c[2]]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Tacnode,
    Critical,
}

impl KernelKind {
    pub fn model(self) -> Model {
        match self {
            KernelKind::Tacnode => Model::Brownian,
            KernelKind::Critical => Model::TwoMatrix,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Tacnode => "tacnode",
            KernelKind::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelApprox {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub a: f64,
    pub value: f64,
    /// `|Im|` of the composed value before taking the real part.
    pub imag: f64,
    /// `‖E₀(v)^{-1}E₀(u) − I‖`, the dominant error term.
    pub error_estimate: f64,
}

/// Factors of the composed kernel at one scaled point.
#[derive(Debug, Clone)]
pub struct KernelPoint {
    pub x: f64,
    pub z: C64,
    pub e0: Mat4,
    pub phi: Mat3,
}

impl LocalFrame {
    /// `E₀` and `Φ` at the image of `x`: `u` on `ℝ` (tacnode) or `iu` on
    /// `iℝ` (critical), both from the `+` side.
    pub fn kernel_point(&self, x: f64, kind: KernelKind) -> Result<KernelPoint, Local0Error> {
        let u = self.scaled(x);
        let z = match kind {
            KernelKind::Tacnode => C64::new(u, 0.0),
            KernelKind::Critical => C64::new(0.0, u),
        };
        self.check_disk(z)?;
        Ok(KernelPoint { x, z, e0: self.e0(z, Side::Plus)?, phi: self.phi(z, Side::Plus)? })
    }

    fn vectors(&self, kind: KernelKind, x: f64, y: f64) -> Result<([C64; 3], [C64; 3]), Local0Error> {
        match kind {
            KernelKind::Tacnode => {
                let (row, _) = tacnode_vectors(y > 0.0)?;
                let (_, col) = tacnode_vectors(x > 0.0)?;
                block_vectors(row, col, y < 0.0, x < 0.0)
            }
            KernelKind::Critical => {
                let row = [-ONE, ONE, ZERO, ZERO];
                let col = [ONE, ONE, ZERO, ZERO];
                block_vectors(row, col, true, true)
            }
        }
    }

    /// Composition with `M^(5) ≡ I`. Tacnode: column at `x`, row at `y`.
    /// Critical: row at `x`, column at `y`.
    pub fn compose(&self, kind: KernelKind, px: &KernelPoint, py: &KernelPoint) -> Result<KernelApprox, Local0Error> {
        let (x, y) = (px.x, py.x);
        if x == y || x == 0.0 || y == 0.0 {
            return Err(Local0Error::KernelArgs(x, y));
        }
        let (row, col) = self.vectors(kind, x, y)?;
        let (left, right) = match kind {
            KernelKind::Tacnode => (py, px),
            KernelKind::Critical => (px, py),
        };
        let w = inv4(&left.e0).ok_or(Local0Error::Singular(left.z))? * right.e0;
        let w3 = Mat3::from_fn(|i, j| w[(i, j)]);
        let m = inv3(&left.phi).ok_or(Local0Error::Singular(left.z))? * w3 * right.phi;
        let mut acc = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                acc += row[i] * m[(i, j)] * col[j];
            }
        }
        let value = acc / (2.0 * PI * I * (x - y));
        Ok(KernelApprox {
            x,
            y,
            sigma: self.params.sigma,
            a: self.params.a,
            value: value.re,
            imag: value.im.abs(),
            error_estimate: max_abs4(&(w - Mat4::identity())),
        })
    }

    /// The tacnode composition rebuilt from `M ↦ Q^{-1}M^{-T}Q`,
    /// `Q = [[0, I], [−I, 0]]`, i.e. the approximation for `t ↦ −t`.
    pub fn reflected_tacnode(&self, px: &KernelPoint, py: &KernelPoint) -> Result<C64, Local0Error> {
        let (x, y) = (px.x, py.x);
        if x == y || x == 0.0 || y == 0.0 {
            return Err(Local0Error::KernelArgs(x, y));
        }
        let q = Mat4::from_fn(|i, j| match (i, j) {
            (0, 2) | (1, 3) => ONE,
            (2, 0) | (3, 1) => -ONE,
            _ => ZERO,
        });
        let q_inv = q.transpose();
        let full = |p: &KernelPoint| p.e0 * blockdiag(&p.phi, ONE) * c_matrix(p.x < 0.0);
        let (row, _) = tacnode_vectors(y > 0.0)?;
        let (_, col) = tacnode_vectors(x > 0.0)?;
        let reflect = |a: Mat4| -> Result<Mat4, Local0Error> {
            Ok(q_inv * inv4(&a).ok_or(Local0Error::BlockLeak)?.transpose() * q)
        };
        let m = inv4(&reflect(full(py))?).ok_or(Local0Error::Singular(py.z))? * reflect(full(px))?;
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += row[i] * m[(i, j)] * col[j];
            }
        }
        Ok(acc / (2.0 * PI * I * (x - y)))
    }

    pub fn kernel_approx(&self, kind: KernelKind, x: f64, y: f64) -> Result<KernelApprox, Local0Error> {
        if x == y || x == 0.0 || y == 0.0 {
            return Err(Local0Error::KernelArgs(x, y));
        }
        let px = self.kernel_point(x, kind)?;
        let py = self.kernel_point(y, kind)?;
        self.compose(kind, &px, &py)
    }
}

pub fn tacnode_kernel_approx(x: f64, y: f64, sigma: f64, a: f64) -> Result<KernelApprox, Local0Error> {
    LocalFrame::build(a, sigma, Model::Brownian)?.kernel_approx(KernelKind::Tacnode, x, y)
}

pub fn critical_kernel_approx(x: f64, y: f64, sigma: f64, a: f64) -> Result<KernelApprox, Local0Error> {
    LocalFrame::build(a, sigma, Model::TwoMatrix)?.kernel_approx(KernelKind::Critical, x, y)
}

/// Pearcey limit of each approximation: `K^Pe(y,x;σ)` for the tacnode
/// kernel, `K^Pe(x,y;σ)` for the critical kernel.
pub fn kernel_target(kind: KernelKind, x: f64, y: f64, sigma: f64) -> Result<f64, Local0Error> {
    Ok(match kind {
        KernelKind::Tacnode => pearcey_kernel_integral(y, x, sigma)?,
        KernelKind::Critical => pearcey_kernel_integral(x, y, sigma)?,
    })
}

/// The critical limit before rotation:
/// `(0,1,1)Φ^Pe(iy;−σ)^{-1}Φ^Pe(ix;−σ)(0,−1,1)ᵀ / (2πi(x−y))`.
pub fn critical_limit_form(x: f64, y: f64, sigma: f64) -> Result<C64, Local0Error> {
    let pe = PearceyParametrix::new(-sigma)?;
    let px = pe.eval(C64::new(0.0, x))?.matrix;
    let py = pe.eval(C64::new(0.0, y))?.matrix;
    let m = inv3(&py).ok_or(Local0Error::Singular(C64::new(0.0, y)))? * px;
    let row = [ZERO, ONE, ONE];
    let col = [ZERO, -ONE, ONE];
    let mut acc = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            acc += row[i] * m[(i, j)] * col[j];
        }
    }
    Ok(acc / (2.0 * PI * I * (x - y)))
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingRow {
    pub a: f64,
    pub sup_norm: f64,
    /// Largest `‖E₀(u)‖` over the scaled points `u = 2^{-1/2}|a|^{-9/4}x`.
    pub e0_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingReport {
    pub sigma: f64,
    pub model: Model,
    pub delta: f64,
    pub points: usize,
    pub rows: Vec<MatchingRow>,
    pub slope: f64,
    pub e0_slope: f64,
}

/// Scaled abscissae used for the `E₀` growth measurement.
pub const E0_PROBES: [f64; 3] = [0.3, 0.8, 1.5];

pub fn matching_report(ladder: &[f64], delta: f64, sigma: f64, model: Model, points: usize) -> Result<MatchingReport, Local0Error> {
    if ladder.len() < 4 {
        return Err(Local0Error::Ladder(4));
    }
    let mut rows = Vec::new();
    for &a in ladder {
        let frame = LocalFrame::new(&CurveParams::new(a, sigma, model)?, delta)?;
        let sup_norm = frame.matching_sup(points)?;
        let mut e0_norm = 0.0f64;
        for x in E0_PROBES {
            for s in [1.0, -1.0] {
                let z = C64::new(frame.scaled(s * x), 0.0);
                e0_norm = e0_norm.max(max_abs4(&frame.e0(z, Side::Plus)?));
            }
        }
        rows.push(MatchingRow { a, sup_norm, e0_norm });
    }
    let abs_a: Vec<f64> = rows.iter().map(|r| r.a.abs()).collect();
    let slope = loglog_slope(&abs_a, &rows.iter().map(|r| r.sup_norm).collect::<Vec<_>>());
    let e0_slope = loglog_slope(&abs_a, &rows.iter().map(|r| r.e0_norm).collect::<Vec<_>>());
    Ok(MatchingReport { sigma, model, delta, points, rows, slope, e0_slope })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub a: f64,
    pub k_approx: f64,
    pub k_pearcey: f64,
    pub abs_err: f64,
    pub model: &'static str,
}

/// Errors against the Pearcey limit on all ordered pairs of distinct
/// points of `grid`, for every `a` of the ladder.
pub fn convergence_table(kind: KernelKind, grid: &[f64], sigma: f64, ladder: &[f64]) -> Result<Vec<ConvergenceRow>, Local0Error> {
    let mut targets = Vec::new();
    for &x in grid {
        for &y in grid {
            if x != y {
                targets.push((x, y, kernel_target(kind, x, y, sigma)?));
            }
        }
    }
    let mut rows = Vec::new();
    for &a in ladder {
        let frame = LocalFrame::build(a, sigma, kind.model())?;
        let points: Vec<KernelPoint> = grid.iter().map(|&x| frame.kernel_point(x, kind)).collect::<Result<_, _>>()?;
        for &(x, y, k_pearcey) in &targets {
            let px = points.iter().find(|p| p.x == x).unwrap();
            let py = points.iter().find(|p| p.x == y).unwrap();
            let k = frame.compose(kind, px, py)?;
            rows.push(ConvergenceRow {
                x,
                y,
                sigma,
                a,
                k_approx: k.value,
                k_pearcey,
                abs_err: (k.value - k_pearcey).abs(),
                model: kind.name(),
            });
        }
    }
    Ok(rows)
}

/// `max |M^(0)(z)|` on a ring, for the boundedness check near 0.
pub fn ring_max(frame: &LocalFrame, radius: f64, points: usize) -> Result<f64, Local0Error> {
    let mut m = 0.0f64;
    for j in 0..points {
        let z = C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / points as f64);
        m = m.max(max_abs4(&frame.local_parametrix(z, Side::Interior)?));
    }
    Ok(m)
}
