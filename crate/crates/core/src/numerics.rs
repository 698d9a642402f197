//! Small numerical kernels shared by the modules: polynomial roots,
//! Gauss–Legendre rules, circle-DFT coefficient extraction and a few
//! complex-matrix helpers.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `ω = e^{2πi/3}`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Principal power `z^p` with the cut on the negative real axis.
pub fn cpow(z: C64, p: f64) -> C64 {
    if z == ZERO {
        return ZERO;
    }
    C64::from_polar(z.norm().powf(p), p * z.arg())
}

/// Evaluate `Σ c_k x^k` (coefficients low to high) with its derivative.
pub fn horner(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("polynomial has zero leading coefficient")]
    DegenerateLeading,
    #[error("root iteration did not converge (residual {0:.3e})")]
    NoConvergence(f64),
}

/// All roots of `Σ c_k x^k` by Aberth–Ehrlich iteration, followed by a
/// Newton polish on the undeflated polynomial.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>, RootError> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(RootError::DegenerateLeading);
    }
    // Initial radii from the Newton polygon would be sharper; the
    // geometric mean of the coefficient ratios suffices for degree <= 4.
    let mut radius = 0.0_f64;
    for k in 0..n {
        let r = (coeffs[k].norm() / lead.norm()).powf(1.0 / (n - k) as f64);
        radius = radius.max(r);
    }
    if radius == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * (0.5 + 0.5 * k as f64 / n as f64), 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let (p, dp) = horner(coeffs, z[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = ZERO;
            for j in 0..n {
                if j != i {
                    repulsion += ONE / (z[i] - z[j]);
                }
            }
            let step = ratio / (ONE - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *zi - p / dp;
            if horner(coeffs, next).0.norm() < p.norm() {
                *zi = next;
            } else {
                break;
            }
        }
    }
    let scale: f64 = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let worst = z
        .iter()
        .map(|&zi| {
            let m = zi.norm().max(1.0);
            horner(coeffs, zi).0.norm() / (scale * m.powi(n as i32))
        })
        .fold(0.0, f64::max);
    if worst > 1e-10 || z.iter().any(|v| !v.is_finite()) {
        return Err(RootError::NoConvergence(worst));
    }
    Ok(z)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Samples `f(r e^{iθ_j})`, `θ_j = 2π(j + 1/2)/N`, turned into Laurent
/// coefficients `a_k` for `k ∈ [k_min, k_max]`.
pub struct CircleSamples {
    pub radius: f64,
    pub values: Vec<C64>,
}

impl CircleSamples {
    pub fn nodes(radius: f64, n: usize) -> Vec<C64> {
        (0..n)
            .map(|j| C64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / n as f64))
            .collect()
    }

    pub fn coefficient(&self, k: i32) -> C64 {
        let n = self.values.len();
        let mut acc = ZERO;
        for (j, v) in self.values.iter().enumerate() {
            let theta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            acc += v * cis(-(k as f64) * theta);
        }
        acc / (n as f64) / self.radius.powi(k)
    }
}

pub mod mat {
    //! Fixed-size complex matrices.
    use super::{C64, ONE, ZERO};
    use nalgebra::{Matrix3, Matrix4};

    pub type Mat3 = Matrix3<C64>;
    pub type Mat4 = Matrix4<C64>;

    /// Elementary matrix `E_{ij}` (1-based indices).
    pub fn e4(i: usize, j: usize) -> Mat4 {
        let mut m = Mat4::zeros();
        m[(i - 1, j - 1)] = ONE;
        m
    }

    pub fn id4() -> Mat4 {
        Mat4::identity()
    }

    pub fn from_real4(rows: [[f64; 4]; 4]) -> Mat4 {
        Mat4::from_fn(|i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_real3(rows: [[f64; 3]; 3]) -> Mat3 {
        Mat3::from_fn(|i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag3(d: [C64; 3]) -> Mat3 {
        let mut m = Mat3::zeros();
        for k in 0..3 {
            m[(k, k)] = d[k];
        }
        m
    }

    pub fn diag4(d: [C64; 4]) -> Mat4 {
        let mut m = Mat4::zeros();
        for k in 0..4 {
            m[(k, k)] = d[k];
        }
        m
    }

    /// `blockdiag(m, s)` with a 3×3 upper block.
    pub fn blockdiag(m: &Mat3, s: C64) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out[(i, j)] = m[(i, j)];
            }
        }
        out[(3, 3)] = s;
        out
    }

    pub fn upper3(m: &Mat4) -> Mat3 {
        Mat3::from_fn(|i, j| m[(i, j)])
    }

    /// Max-abs-entry norm.
    pub fn max_abs4(m: &Mat4) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs3(m: &Mat3) -> f64 {
        m.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn inv4(m: &Mat4) -> Option<Mat4> {
        m.try_inverse()
    }

    pub fn inv3(m: &Mat3) -> Option<Mat3> {
        m.try_inverse()
    }

    /// Row-major `(re, im)` pairs.
    pub fn pairs<R: nalgebra::Dim, Cc: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, Cc>>(
        m: &nalgebra::Matrix<C64, R, Cc, S>,
    ) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
    }

    pub fn ser_mat3<Sz: serde::Serializer>(m: &Mat3, s: Sz) -> Result<Sz::Ok, Sz::Error> {
        serde::Serialize::serialize(&pairs(m), s)
    }

    pub fn ser_mat4<Sz: serde::Serializer>(m: &Mat4, s: Sz) -> Result<Sz::Ok, Sz::Error> {
        serde::Serialize::serialize(&pairs(m), s)
    }

    pub fn is_zero(m: &Mat4) -> bool {
        m.iter().all(|v| *v == ZERO)
    }
}
