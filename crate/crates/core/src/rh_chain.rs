//! Jump data of the tacnode RH problem, the transformation chain
//! `M → M^(3) → M^(4)` and the explicit global parametrix `M^(∞)`.
//!
//! Rays of the original problem are `Γ_k`, `k = 0..9`, all oriented away
//! from 0. The opened-lens system `Σ_{M^(3)}` keeps `Γ₀, Γ₁, Γ₄, Γ₅, Γ₆, Γ₉`,
//! adds `Γ̃_k = Γ_k ± ic` for `k = 2, 3, 7, 8` and the segment `(−ic, ic)`;
//! there `Γ₄, Γ₅, Γ₆, Γ̃₇, Γ̃₈` point toward their node and the segment
//! points upward.

use crate::curve::{cut_location, solve_w, CurveError, CurveParams, CutLocation, Side};
use crate::lambda::lambda_values;
use crate::numerics::mat::{self, e4, from_real4, id4, Mat4};
use crate::numerics::{cis, cpow, I, ONE, ZERO};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Opening angle of `Γ₁`.
pub const PHI1: f64 = PI / 4.0;
/// Opening angle of `Γ₂`.
pub const PHI2: f64 = PI / 3.0;
/// Largest exponent (natural-log scale) evaluated before saturating.
pub const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RhError {
    #[error("unknown ray {0}")]
    UnknownRay(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("κ continuation on sheet {sheet} lost track near {z}")]
    BranchTracking { sheet: usize, z: C64 },
    #[error("{0} lies on Σ; a side tag is required")]
    OnContour(C64),
    #[error("transformation audit mismatch on {piece}: residual {residual:e}")]
    AuditMismatch { piece: String, residual: f64 },
}

/// A piece of `Σ_M` or `Σ_{M^(3)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Piece {
    /// `Γ_k` from 0 at the angle of [`ray_angle`].
    Ray(usize),
    /// `Γ̃_k = Γ_k + ic` (k = 2, 3) or `Γ_k − ic` (k = 7, 8).
    Tilde(usize),
    /// `(0, ic)`.
    UpperSegment,
    /// `(−ic, 0)`.
    LowerSegment,
}

impl Piece {
    pub fn label(self) -> String {
        match self {
            Piece::Ray(k) => format!("gamma_{k}"),
            Piece::Tilde(k) => format!("gamma_tilde_{k}"),
            Piece::UpperSegment => "segment_upper".into(),
            Piece::LowerSegment => "segment_lower".into(),
        }
    }

    /// Node the piece emanates from, and its angle seen from there.
    pub fn anchor(self, c: f64) -> Result<(C64, f64), RhError> {
        Ok(match self {
            Piece::Ray(k) => (ZERO, ray_angle(k)?),
            Piece::Tilde(k @ (2 | 3)) => (C64::new(0.0, c), ray_angle(k)?),
            Piece::Tilde(k @ (7 | 8)) => (C64::new(0.0, -c), ray_angle(k)?),
            Piece::Tilde(k) => return Err(RhError::UnknownRay(format!("tilde {k}"))),
            Piece::UpperSegment => (ZERO, PI / 2.0),
            Piece::LowerSegment => (ZERO, -PI / 2.0),
        })
    }

    /// Point at distance `r` from the anchor.
    pub fn point(self, c: f64, r: f64) -> Result<C64, RhError> {
        let (node, angle) = self.anchor(c)?;
        // Axis pieces are built exactly so that cut detection sees them.
        Ok(match self {
            Piece::Ray(0) => C64::new(r, 0.0),
            Piece::Ray(5) => C64::new(-r, 0.0),
            Piece::UpperSegment => C64::new(0.0, r),
            Piece::LowerSegment => C64::new(0.0, -r),
            _ => node + cis(angle) * r,
        })
    }
}

/// The two jump systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum System {
    /// Original problem for `M`.
    Original,
    /// Opened lenses, the problem for `M^(3)`.
    Opened,
}

/// Angle of `Γ_k`.
pub fn ray_angle(k: usize) -> Result<f64, RhError> {
    Ok(match k {
        0 => 0.0,
        1 => PHI1,
        2 => PHI2,
        3 => PI - PHI2,
        4 => PI - PHI1,
        5 => PI,
        6 => PI + PHI1,
        7 => PI + PHI2,
        8 => 2.0 * PI - PHI2,
        9 => 2.0 * PI - PHI1,
        _ => return Err(RhError::UnknownRay(format!("gamma {k}"))),
    })
}

fn e(i: usize, j: usize) -> Mat4 {
    e4(i, j)
}

/// Jump `J_k` on `Γ_k` of the original problem.
pub fn jump_matrix(k: usize) -> Result<Mat4, RhError> {
    let i = id4();
    Ok(match k {
        0 => from_real4([[0., 0., 1., 0.], [0., 1., 0., 0.], [-1., 0., 0., 0.], [0., 0., 0., 1.]]),
        1 | 9 => i + e(3, 1),
        2 => i - e(2, 1) + e(3, 4),
        3 => i + e(1, 2) - e(4, 3),
        4 | 6 => i - e(4, 2),
        5 => from_real4([[1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.], [0., 1., 0., 0.]]),
        7 => i - e(1, 2) + e(4, 3),
        8 => i + e(2, 1) - e(3, 4),
        _ => return Err(RhError::UnknownRay(format!("gamma {k}"))),
    })
}

/// Jump on the negative axis oriented toward 0, shared by `Σ_{M^(3)}`,
/// `Σ_{M^(4)}` and the global parametrix.
pub fn negative_axis_jump() -> Mat4 {
    from_real4([[1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.], [0., -1., 0., 0.]])
}

/// Jump of `M^(3)` on `(−ic, ic)`.
pub fn segment_jump() -> Mat4 {
    from_real4([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., -1., 1.]])
}

/// Jump of `M^(∞)` on `(−ic, ic)`.
pub fn global_segment_jump() -> Mat4 {
    from_real4([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., -1., 0.]])
}

/// Pieces of each system.
pub fn pieces(system: System) -> Vec<Piece> {
    match system {
        System::Original => (0..10).map(Piece::Ray).collect(),
        System::Opened => vec![
            Piece::Ray(0),
            Piece::Ray(1),
            Piece::UpperSegment,
            Piece::Tilde(2),
            Piece::Tilde(3),
            Piece::Ray(4),
            Piece::Ray(5),
            Piece::Ray(6),
            Piece::LowerSegment,
            Piece::Tilde(7),
            Piece::Tilde(8),
            Piece::Ray(9),
        ],
    }
}

/// Whether the piece is oriented away from its anchor.
pub fn outward(system: System, piece: Piece) -> Result<bool, RhError> {
    match (system, piece) {
        (System::Original, Piece::Ray(k)) if k < 10 => Ok(true),
        (System::Opened, Piece::Ray(0 | 1 | 9)) => Ok(true),
        (System::Opened, Piece::Ray(4 | 5 | 6)) => Ok(false),
        (System::Opened, Piece::Tilde(2 | 3)) => Ok(true),
        (System::Opened, Piece::Tilde(7 | 8)) => Ok(false),
        (System::Opened, Piece::UpperSegment) => Ok(true),
        (System::Opened, Piece::LowerSegment) => Ok(false),
        _ => Err(RhError::UnknownRay(piece.label())),
    }
}

/// Unit direction of travel at a point of the piece.
pub fn direction(system: System, piece: Piece, c: f64) -> Result<C64, RhError> {
    let (_, angle) = piece.anchor(c)?;
    Ok(if outward(system, piece)? { cis(angle) } else { -cis(angle) })
}

/// Constant jump of a piece in either system.
pub fn system_jump(system: System, piece: Piece) -> Result<Mat4, RhError> {
    let i = id4();
    match (system, piece) {
        (System::Original, Piece::Ray(k)) => jump_matrix(k),
        (System::Opened, p) => Ok(match p {
            Piece::Ray(0) => jump_matrix(0)?,
            Piece::Ray(1) => i - e(2, 1) + e(3, 1),
            Piece::Ray(4) => i - e(1, 2) + e(4, 2),
            Piece::Ray(5) => negative_axis_jump(),
            Piece::Ray(6) => i + e(1, 2) + e(4, 2),
            Piece::Ray(9) => i + e(2, 1) + e(3, 1),
            Piece::Tilde(2 | 8) => i + e(3, 4),
            Piece::Tilde(3 | 7) => i - e(4, 3),
            Piece::UpperSegment | Piece::LowerSegment => segment_jump(),
            _ => return Err(RhError::UnknownRay(p.label())),
        }),
        _ => Err(RhError::UnknownRay(piece.label())),
    }
}

/// `J` seen from a node: the angle of the piece leaving the node and
/// whether the piece is oriented away from it.
#[derive(Debug, Clone, Copy)]
pub struct NodeEdge {
    pub angle: f64,
    pub away: bool,
    pub jump: Mat4,
}

/// Product of the jumps met on a small counterclockwise loop around a
/// node, inverting those oriented into the node.
pub fn node_product(edges: &[NodeEdge]) -> Mat4 {
    let mut sorted = edges.to_vec();
    sorted.sort_by(|p, q| p.angle.rem_euclid(2.0 * PI).partial_cmp(&q.angle.rem_euclid(2.0 * PI)).unwrap());
    sorted.iter().fold(id4(), |acc, edge| {
        let j = if edge.away { edge.jump } else { mat::inv4(&edge.jump).expect("unimodular jump") };
        acc * j
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeReport {
    pub node: String,
    pub edges: usize,
    /// `max |Π − I|`.
    pub residual: f64,
    /// Smallest `max |Π − I|` after replacing any single jump by `I`.
    pub mutation_residual: f64,
}

fn node_report(node: &str, edges: &[NodeEdge]) -> NodeReport {
    let residual = mat::max_abs4(&(node_product(edges) - id4()));
    let mut mutation_residual = f64::INFINITY;
    for k in 0..edges.len() {
        let mut mutated = edges.to_vec();
        mutated[k].jump = id4();
        mutation_residual = mutation_residual.min(mat::max_abs4(&(node_product(&mutated) - id4())));
    }
    NodeReport { node: node.into(), edges: edges.len(), residual, mutation_residual }
}

/// Edges of `system` meeting at the node `at` (`0`, `ic` or `−ic`, given
/// by the sign of its imaginary part).
pub fn node_edges(system: System, at: i32, c: f64) -> Result<Vec<NodeEdge>, RhError> {
    let mut out = Vec::new();
    for piece in pieces(system) {
        let (anchor, angle) = piece.anchor(c)?;
        let jump = system_jump(system, piece)?;
        let away = outward(system, piece)?;
        let anchor_at = anchor.im.partial_cmp(&0.0).map(|o| o as i32).unwrap_or(0);
        if anchor_at == at {
            out.push(NodeEdge { angle, away, jump });
        }
        // The segments also end at ±ic.
        match (piece, at) {
            (Piece::UpperSegment, 1) => out.push(NodeEdge { angle: -PI / 2.0, away: !away, jump }),
            (Piece::LowerSegment, -1) => out.push(NodeEdge { angle: PI / 2.0, away: !away, jump }),
            _ => {}
        }
    }
    Ok(out)
}

/// Cyclic consistency at 0 for `Σ_M` and at 0, ±ic for `Σ_{M^(3)}`.
pub fn cyclic_consistency(c: f64) -> Result<Vec<NodeReport>, RhError> {
    Ok(vec![
        node_report("original_0", &node_edges(System::Original, 0, c)?),
        node_report("opened_0", &node_edges(System::Opened, 0, c)?),
        node_report("opened_ic", &node_edges(System::Opened, 1, c)?),
        node_report("opened_minus_ic", &node_edges(System::Opened, -1, c)?),
    ])
}

/// Boundary point carrying the side in the sign of a zero part, so that
/// principal powers pick the right boundary value.
fn signed_zero_point(z: C64, side: Side) -> C64 {
    let s = if side == Side::Minus { -0.0 } else { 0.0 };
    if z.im == 0.0 {
        C64::new(z.re, s)
    } else {
        z
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiAB {
    pub psi1: C64,
    pub psi2: C64,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub a: Mat4,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub b: Mat4,
}

/// The constant matrix `A`.
pub fn a_matrix() -> Mat4 {
    let h = FRAC_1_SQRT_2;
    let (one, mi, pi) = (C64::new(h, 0.0), C64::new(0.0, -h), C64::new(0.0, h));
    let z = ZERO;
    Mat4::new(one, z, mi, z, z, one, z, pi, mi, z, one, z, z, pi, z, one)
}

/// `B(z) = diag((−z)^{−1/4}, z^{−1/4}, (−z)^{1/4}, z^{1/4})`; on the real
/// axis `side` selects the boundary value.
pub fn b_matrix(z: C64, side: Side) -> Mat4 {
    let z = signed_zero_point(z, side);
    mat::diag4([cpow(-z, -0.25), cpow(z, -0.25), cpow(-z, 0.25), cpow(z, 0.25)])
}

/// `ψ₁, ψ₂` with `r₁ = r₂ = r`, `s₁ = s₂ = s`, together with `A` and `B(z)`.
pub fn psi_ab(z: C64, r: f64, s: f64, side: Side) -> Result<PsiAB, RhError> {
    if z.im == 0.0 && side == Side::Interior {
        return Err(RhError::OnContour(z));
    }
    let zs = signed_zero_point(z, side);
    let psi1 = 2.0 / 3.0 * r * cpow(zs, 1.5) + 2.0 * s * cpow(zs, 0.5);
    let psi2 = 2.0 / 3.0 * r * cpow(-zs, 1.5) + 2.0 * s * cpow(-zs, 0.5);
    Ok(PsiAB { psi1, psi2, a: a_matrix(), b: b_matrix(z, side) })
}

/// `ψ̃(z) = ⅔z^{3/2} − z^{1/2}`.
pub fn psi_tilde(z: C64) -> C64 {
    2.0 / 3.0 * cpow(z, 1.5) - cpow(z, 0.5)
}

/// Entry `e^{x}` with the real part of `x` clamped to `±EXP_CLAMP`.
fn clamped_exp(x: C64, saturated: &mut bool) -> C64 {
    if x.re > EXP_CLAMP {
        *saturated = true;
        C64::from_polar(EXP_CLAMP.exp(), x.im)
    } else if x.re < -EXP_CLAMP {
        *saturated = true;
        ZERO
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Jm4Value {
    pub z: C64,
    pub piece: Piece,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub matrix: Mat4,
    /// Some exponent left `[−700, 700]` and was clamped.
    pub saturated: bool,
}

fn on_real_axis(piece: Piece) -> bool {
    matches!(piece, Piece::Ray(0) | Piece::Ray(5))
}

fn on_segment(piece: Piece) -> bool {
    matches!(piece, Piece::UpperSegment | Piece::LowerSegment)
}

/// `J_{M^(4)}` at a point of `piece` of `Σ_{M^(3)}`.
pub fn jm4(z: C64, params: &CurveParams, piece: Piece) -> Result<Jm4Value, RhError> {
    let n = params.a.abs().powi(3);
    let i = id4();
    let mut saturated = false;
    let matrix = match piece {
        Piece::Ray(0) => jump_matrix(0)?,
        Piece::Ray(5) => negative_axis_jump(),
        Piece::UpperSegment | Piece::LowerSegment => {
            let p = lambda_values(z, params, Side::Plus)?;
            let m = lambda_values(z, params, Side::Minus)?;
            let mut out = global_segment_jump();
            out[(3, 3)] = clamped_exp(n * (p.sheet(4) - m.sheet(4)), &mut saturated);
            out
        }
        _ => {
            let l = lambda_values(z, params, Side::Interior)?;
            let mut x = |p: usize, q: usize| clamped_exp(n * (l.sheet(p) - l.sheet(q)), &mut saturated);
            match piece {
                Piece::Ray(1) => i - e(2, 1) * x(1, 2) + e(3, 1) * x(1, 3),
                Piece::Ray(9) => i + e(2, 1) * x(1, 2) + e(3, 1) * x(1, 3),
                Piece::Ray(4) => i - e(1, 2) * x(2, 1) + e(4, 2) * x(2, 4),
                Piece::Ray(6) => i + e(1, 2) * x(2, 1) + e(4, 2) * x(2, 4),
                Piece::Tilde(2 | 8) => i + e(3, 4) * x(4, 3),
                Piece::Tilde(3 | 7) => i - e(4, 3) * x(3, 4),
                other => return Err(RhError::UnknownRay(other.label())),
            }
        }
    };
    Ok(Jm4Value { z, piece, matrix, saturated })
}

/// Factor `T` with `M^(3) = M^(1)·T` in the region containing `z`.
pub fn region_factor(z: C64, c: f64) -> Mat4 {
    let i = id4();
    // Signed distance to the left of Γ₂ (Γ₃ after reflecting in iℝ).
    let strip = |w: C64| (w * cis(-PHI2)).im;
    let reflect = |w: C64| C64::new(-w.re, w.im);
    let upper = if z.im > 0.0 { z } else { z.conj() };
    let in_strip = |w: C64| w.re > 0.0 && strip(w) > 0.0 && strip(w) < c / 2.0;
    let t2 = if in_strip(upper) {
        i - e(3, 4)
    } else if in_strip(reflect(upper)) {
        i - e(4, 3)
    } else {
        i
    };
    let arg = upper.arg();
    let t3 = if arg > PHI1 && arg < PHI2 {
        i - e(2, 1)
    } else if arg > PI - PHI2 && arg < PI - PHI1 {
        i - e(1, 2)
    } else {
        i
    };
    t2 * t3
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub stage: String,
    pub piece: String,
    pub z: C64,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub computed: Mat4,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub target: Mat4,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrientationEntry {
    pub piece: String,
    pub original_outward: Option<bool>,
    pub opened_outward: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformAudit {
    pub rows: Vec<AuditRow>,
    pub orientation: Vec<OrientationEntry>,
    pub max_residual: f64,
}

/// Tolerance of the transformation audit.
pub const AUDIT_TOL: f64 = 1e-12;

impl TransformAudit {
    /// Hard failure naming the first piece above [`AUDIT_TOL`].
    pub fn check(&self) -> Result<(), RhError> {
        match self.rows.iter().find(|r| !(r.residual <= AUDIT_TOL)) {
            Some(r) => Err(RhError::AuditMismatch { piece: format!("{} ({})", r.piece, r.stage), residual: r.residual }),
            None => Ok(()),
        }
    }
}

/// Jump of `M^(1)` across `piece` at a point, expressed with the
/// orientation `dir`.
fn original_jump_along(piece: Piece, dir: C64, c: f64) -> Result<Mat4, RhError> {
    match piece {
        Piece::Ray(k) => {
            let j = jump_matrix(k)?;
            let forward = (direction(System::Original, piece, c)? - dir).norm() < 1e-12;
            Ok(if forward { j } else { mat::inv4(&j).expect("unimodular jump") })
        }
        _ => Ok(id4()),
    }
}

/// Jump of `M^(3)` recomputed from the original jumps and region factors.
fn opened_jump_from_factors(piece: Piece, z: C64, dir: C64, c: f64) -> Result<Mat4, RhError> {
    let eta = 1e-7 * z.norm().max(1.0);
    let normal = I * dir;
    let t_plus = region_factor(z + normal * eta, c);
    let t_minus = region_factor(z - normal * eta, c);
    let k = original_jump_along(piece, dir, c)?;
    Ok(mat::inv4(&t_minus).expect("unimodular factor") * k * t_plus)
}

fn relative_residual(a: &Mat4, b: &Mat4) -> f64 {
    a.iter().zip(b.iter()).map(|(p, q)| (p - q).norm() / q.norm().max(1.0)).fold(0.0, f64::max)
}

/// Sample distances from the anchor of each piece.
fn audit_radii(c: f64) -> [f64; 3] {
    [0.3 * c, 0.7 * c, 1.9 * c]
}

/// Audit of `Σ_M → Σ_{M^(3)} → Σ_{M^(4)}` on sample points.
///
/// Stage `opened`: `T₋^{-1} J T₊` on every opened piece equals the
/// tabulated jump. Stage `removed`: the same product is `I` on
/// `Γ₂, Γ₃, Γ₇, Γ₈` and on `iℝ` beyond `±ic`. Stage `normalized`: the
/// diagonal exponential conjugation of the opened jumps equals [`jm4`].
pub fn transform_chain_audit(params: &CurveParams) -> Result<TransformAudit, RhError> {
    let c = params.c;
    let mut rows = Vec::new();
    for piece in pieces(System::Opened) {
        let dir = direction(System::Opened, piece, c)?;
        let target = system_jump(System::Opened, piece)?;
        for r in audit_radii(c) {
            if on_segment(piece) && r >= c {
                continue;
            }
            let z = piece.point(c, r)?;
            let computed = opened_jump_from_factors(piece, z, dir, c)?;
            let residual = relative_residual(&computed, &target);
            rows.push(AuditRow { stage: "opened".into(), piece: piece.label(), z, computed, target, residual });
        }
    }
    let removed = [
        (Piece::Ray(2), "gamma_2".to_string()),
        (Piece::Ray(3), "gamma_3".to_string()),
        (Piece::Ray(7), "gamma_7".to_string()),
        (Piece::Ray(8), "gamma_8".to_string()),
    ];
    for (piece, label) in removed {
        let dir = direction(System::Original, piece, c)?;
        for r in audit_radii(c) {
            let z = piece.point(c, r)?;
            let computed = opened_jump_from_factors(piece, z, dir, c)?;
            rows.push(AuditRow {
                stage: "removed".into(),
                piece: label.clone(),
                z,
                computed,
                target: id4(),
                residual: relative_residual(&computed, &id4()),
            });
        }
    }
    for sign in [1.0, -1.0] {
        for r in [1.3, 2.5] {
            let z = C64::new(0.0, sign * r * c);
            let computed = opened_jump_from_factors(Piece::UpperSegment, z, I, c)?;
            rows.push(AuditRow {
                stage: "removed".into(),
                piece: if sign > 0.0 { "imag_above_ic".into() } else { "imag_below_minus_ic".into() },
                z,
                computed,
                target: id4(),
                residual: relative_residual(&computed, &id4()),
            });
        }
    }
    let n = params.a.abs().powi(3);
    for piece in pieces(System::Opened) {
        let j3 = system_jump(System::Opened, piece)?;
        for r in audit_radii(c) {
            if on_segment(piece) && r >= c {
                continue;
            }
            let z = piece.point(c, r)?;
            let (lp, lm) = if on_real_axis(piece) || on_segment(piece) {
                (lambda_values(z, params, Side::Plus)?, lambda_values(z, params, Side::Minus)?)
            } else {
                let l = lambda_values(z, params, Side::Interior)?;
                (l, l)
            };
            let mut saturated = false;
            let computed = Mat4::from_fn(|p, q| {
                if j3[(p, q)] == ZERO {
                    ZERO
                } else {
                    j3[(p, q)] * clamped_exp(n * (lp.values[q] - lm.values[p]), &mut saturated)
                }
            });
            let target = jm4(z, params, piece)?.matrix;
            let residual = relative_residual(&computed, &target);
            rows.push(AuditRow { stage: "normalized".into(), piece: piece.label(), z, computed, target, residual });
        }
    }
    let mut orientation = Vec::new();
    let mut labels: Vec<Piece> = pieces(System::Original);
    labels.extend([Piece::Tilde(2), Piece::Tilde(3), Piece::Tilde(7), Piece::Tilde(8)]);
    labels.extend([Piece::UpperSegment, Piece::LowerSegment]);
    for piece in labels {
        orientation.push(OrientationEntry {
            piece: piece.label(),
            original_outward: outward(System::Original, piece).ok(),
            opened_outward: outward(System::Opened, piece).ok(),
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(TransformAudit { rows, orientation, max_residual })
}

/// Largest λ-dependent entry of `J_{M^(4)}` at `z` on `piece`: the
/// off-diagonal exponentials, or the `(4,4)` entry on the segment.
pub fn jm4_decaying(z: C64, params: &CurveParams, piece: Piece) -> Result<f64, RhError> {
    let v = jm4(z, params, piece)?;
    if on_segment(piece) {
        return Ok(v.matrix[(3, 3)].norm());
    }
    if on_real_axis(piece) {
        return Ok(0.0);
    }
    let base = system_jump(System::Opened, piece)?;
    let mut worst = 0.0f64;
    for p in 0..4 {
        for q in 0..4 {
            if p != q && base[(p, q)] != ZERO {
                worst = worst.max(v.matrix[(p, q)].norm());
            }
        }
    }
    Ok(worst)
}

/// `κ(w)² = (w² − γ^{-3})(w² + γ^{-3}/3)`.
fn kappa_squared(w: C64, gamma: f64) -> C64 {
    let g = gamma.powi(-3);
    (w * w - g) * (w * w + g / 3.0)
}

/// The `F_i(w)` of the global parametrix for a given `κ(w)`.
pub fn global_rows(w: C64, kappa: C64, gamma: f64) -> [C64; 4] {
    let g = gamma.powf(-1.5);
    let s6 = 6f64.sqrt();
    let hi = gamma.powf(15.0 / 8.0) / (s6 * kappa);
    let lo = I * gamma.powf(-3.0 / 8.0) / (2.0 * s6 * kappa);
    let (p, m) = (w + g, w - g);
    [-hi * p * m * m, hi * p * p * m, -lo * m * m, lo * p * p]
}

/// Longest continuation path before giving up.
const MAX_PATH: usize = 100_000;

/// A point of a continuation path with the side used for `w` there.
type PathPoint = (C64, Side);

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GlobalParametrixValue {
    pub z: C64,
    pub side: Side,
    #[serde(serialize_with = "mat::ser_mat4")]
    pub matrix: Mat4,
}

/// `M^(∞)` for fixed curve parameters.
///
/// `κ(w_j(z))` is analytic in `z` on each sheet away from that sheet's
/// cuts, which are simply connected complements. It is evaluated by
/// continuing `±√κ²` from a base point per sheet. The base values follow
/// from `κ > 0` on sheet 2 over `(0, ∞)` and from the boundary pieces
/// that are not part of the κ-cut: `κ_{4,+} = κ_{2,−}` on `ℝ⁻`,
/// `κ_{3,−} = κ_{4,+}` on the segment and `κ_{1,−} = κ_{3,+}` on `ℝ⁺`.
#[derive(Debug, Clone)]
pub struct GlobalParametrix {
    pub params: CurveParams,
    bases: [(PathPoint, C64); 4],
}

fn sheet_cut(sheet: usize, loc: CutLocation) -> bool {
    matches!(
        (sheet, loc),
        (1 | 3, CutLocation::PositiveReal) | (2 | 4, CutLocation::NegativeReal) | (3 | 4, CutLocation::ImaginarySegment)
    )
}

impl GlobalParametrix {
    pub fn new(params: &CurveParams) -> Result<Self, RhError> {
        let c = params.c;
        let w2 = solve_w(ONE, params, Side::Plus)?.sheet(2);
        let k2 = kappa_squared(w2, params.gamma).sqrt();
        let k2 = if k2.re >= 0.0 { k2 } else { -k2 };
        let mut gp = GlobalParametrix {
            params: *params,
            bases: [((ONE, Side::Minus), ZERO), ((ONE, Side::Plus), k2), ((C64::new(0.0, c / 2.0), Side::Minus), ZERO), ((-ONE, Side::Plus), ZERO)],
        };
        let k4 = gp.kappa(2, -ONE, Side::Minus)?;
        gp.bases[3].1 = k4;
        let k3 = gp.kappa(4, C64::new(0.0, c / 2.0), Side::Plus)?;
        gp.bases[2].1 = k3;
        let k1 = gp.kappa(3, ONE, Side::Plus)?;
        gp.bases[0].1 = k1;
        Ok(gp)
    }

    /// Target displaced off the cut toward `side`.
    fn displaced(&self, z: C64, side: Side) -> C64 {
        let eta = 1e-6 * z.norm().max(1.0);
        let s = if side == Side::Minus { -1.0 } else { 1.0 };
        match cut_location(z, &self.params) {
            CutLocation::PositiveReal | CutLocation::NegativeReal => z + I * (s * eta),
            CutLocation::ImaginarySegment => z - s * eta,
            CutLocation::Off => z,
        }
    }

    /// Waypoints from the base of `sheet` to the displaced target `t`,
    /// staying inside the sheet's cut complement. The last leg is
    /// horizontal so that targets on `iℝ` are never reached through ±ic.
    fn route(&self, sheet: usize, t: C64) -> Vec<C64> {
        let c = self.params.c;
        let h = t.im.abs().max(c) + 1.0;
        let x = t.re.abs().max(1.0) + 1.0;
        let up = t.im > 0.0;
        let at = |re: f64, im: f64| C64::new(re, im);
        let base = self.bases[sheet - 1].0 .0;
        let mut w = vec![base];
        match sheet {
            2 => {}
            1 if !up => {}
            1 => w.extend([at(1.0, -h), at(-x, -h), at(-x, t.im)]),
            4 if up && t.re < 0.0 => {}
            4 if up || t.re > 0.0 => w.extend([at(-1.0, h), at(x, h), at(x, t.im)]),
            4 => w.extend([at(-1.0, h), at(x, h), at(x, -h), at(-x, -h), at(-x, t.im)]),
            _ => {
                w.push(at(c / 2.0, c / 2.0));
                if !(t.re > 0.0 && up) {
                    w.extend([at(c / 2.0, h), at(-x, h)]);
                    if t.re > 0.0 {
                        w.extend([at(-x, -h), at(x, -h), at(x, t.im)]);
                    } else {
                        w.push(at(-x, t.im));
                    }
                }
            }
        }
        let last = *w.last().unwrap();
        if matches!(sheet, 1 | 2 | 4) && w.len() == 1 {
            w.push(at(last.re, t.im));
        }
        w.push(t);
        w
    }

    fn w_at(&self, sheet: usize, z: C64, side: Side) -> Result<C64, RhError> {
        let loc = cut_location(z, &self.params);
        let side = match (loc, side) {
            (CutLocation::Off, _) => Side::Interior,
            (_, Side::Interior) if sheet_cut(sheet, loc) => return Err(RhError::OnContour(z)),
            (_, Side::Interior) => Side::Plus,
            (_, s) => s,
        };
        Ok(solve_w(z, &self.params, side)?.sheet(sheet))
    }

    /// `κ(w_j(z))` on sheet `j`.
    pub fn kappa(&self, sheet: usize, z: C64, side: Side) -> Result<C64, RhError> {
        Ok(self.kappa_w(sheet, z, side)?.1)
    }

    fn kappa_w(&self, sheet: usize, z: C64, side: Side) -> Result<(C64, C64), RhError> {
        let ((bz, bside), bk) = self.bases[sheet - 1];
        let target = self.displaced(z, side);
        let waypoints = self.route(sheet, target);
        let mut current = bk;
        let mut w = self.w_at(sheet, bz, bside)?;
        if (bz - z).norm() == 0.0 && bside == side {
            return Ok((w, current));
        }
        let singular = [ZERO, self.params.ic(), -self.params.ic()];
        let mut points: Vec<PathPoint> = Vec::new();
        for leg in waypoints.windows(2) {
            let (mut p, q) = (leg[0], leg[1]);
            loop {
                let d = singular.iter().map(|s| (p - s).norm()).fold(f64::INFINITY, f64::min);
                let step = 0.1 * d;
                let rest = (q - p).norm();
                if rest <= step {
                    break;
                }
                if !(step > 0.0) || points.len() > MAX_PATH {
                    return Err(RhError::BranchTracking { sheet, z: p });
                }
                p += (q - p) * (step / rest);
                points.push((p, Side::Interior));
            }
            points.push((q, Side::Interior));
        }
        if target != z {
            points.push((z, side));
        }
        for (p, s) in points {
            w = self.w_at(sheet, p, s)?;
            let root = kappa_squared(w, self.params.gamma).sqrt();
            let next = if (root - current).norm() <= (root + current).norm() { root } else { -root };
            if (next - current).norm() > 0.5 * current.norm() {
                return Err(RhError::BranchTracking { sheet, z: p });
            }
            current = next;
        }
        Ok((w, current))
    }

    /// `M^(∞)(z)`; on `Σ_{M^(∞)}` the side tag selects the boundary value.
    pub fn eval(&self, z: C64, side: Side) -> Result<GlobalParametrixValue, RhError> {
        let loc = cut_location(z, &self.params);
        if loc != CutLocation::Off && side == Side::Interior {
            return Err(RhError::OnContour(z));
        }
        let mut matrix = Mat4::zeros();
        for j in 1..=4 {
            let (w, k) = self.kappa_w(j, z, side)?;
            let rows = global_rows(w, k, self.params.gamma);
            for i in 0..4 {
                matrix[(i, j - 1)] = rows[i];
            }
        }
        Ok(GlobalParametrixValue { z, side, matrix })
    }
}

/// One-shot evaluation of `M^(∞)`.
pub fn global_parametrix(z: C64, params: &CurveParams, side: Side) -> Result<GlobalParametrixValue, RhError> {
    GlobalParametrix::new(params)?.eval(z, side)
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalCheck {
    /// `max |M₊ − M₋J|` on `(0,∞)`, `(−∞,0)` and `(−ic, ic)`.
    pub jump_residuals: [f64; 3],
    pub det_residual: f64,
    /// `max |M^(∞)(BA)^{-1} − I|` at `|z| = 100` over several arguments.
    pub asymptotic_deviation: f64,
    /// Largest `|M^(∞)_{ij}(z)|·|z|^{1/3}` over the points approaching 0.
    pub origin_growth: f64,
}

/// Jump, determinant, asymptotic and origin checks of `M^(∞)`.
pub fn global_check(params: &CurveParams, samples: usize) -> Result<GlobalCheck, RhError> {
    let gp = GlobalParametrix::new(params)?;
    let c = params.c;
    let mut jumps = [0.0f64; 3];
    let cuts: [(Box<dyn Fn(f64) -> C64>, Mat4); 3] = [
        (Box::new(|s| C64::new(10f64.powf(-2.0 + 4.0 * s), 0.0)), jump_matrix(0)?),
        (Box::new(|s| C64::new(-(10f64.powf(-2.0 + 4.0 * s)), 0.0)), negative_axis_jump()),
        (Box::new(move |s| C64::new(0.0, c * (1.8 * s - 0.9))), global_segment_jump()),
    ];
    for (k, (at, jump)) in cuts.iter().enumerate() {
        for m in 0..samples {
            let s = (m as f64 + 0.5) / samples as f64;
            let z = at(s);
            if z.norm() < 1e-3 {
                continue;
            }
            let p = gp.eval(z, Side::Plus)?.matrix;
            let q = gp.eval(z, Side::Minus)?.matrix;
            let scale = mat::max_abs4(&p).max(1.0);
            jumps[k] = jumps[k].max(mat::max_abs4(&(p - q * jump)) / scale);
        }
    }
    let mut det_residual = 0.0f64;
    for m in 0..samples {
        let theta = 2.0 * PI * (m as f64 + 0.37) / samples as f64;
        let r = 0.05 + 3.0 * c * ((m * 7 % samples) as f64 + 0.5) / samples as f64;
        let z = C64::from_polar(r, theta);
        if cut_location(z, params) != CutLocation::Off {
            continue;
        }
        let v = gp.eval(z, Side::Interior)?.matrix;
        det_residual = det_residual.max((v.determinant() - ONE).norm());
    }
    let mut asymptotic_deviation = 0.0f64;
    for theta in [PI / 4.0, 3.0 * PI / 4.0, -PI / 3.0, -5.0 * PI / 6.0, PI / 2.0] {
        let z = C64::from_polar(100.0, theta);
        let v = gp.eval(z, Side::Interior)?.matrix;
        let ba = b_matrix(z, Side::Interior) * a_matrix();
        let dev = v * mat::inv4(&ba).expect("B·A is invertible off 0") - id4();
        asymptotic_deviation = asymptotic_deviation.max(mat::max_abs4(&dev));
    }
    let mut origin_growth = 0.0f64;
    for r in [1e-2, 1e-3, 1e-4] {
        for theta in [PI / 2.0, PI / 6.0, -2.0 * PI / 3.0] {
            let z = C64::from_polar(r, theta);
            let v = gp.eval(z, Side::Interior)?.matrix;
            origin_growth = origin_growth.max(mat::max_abs4(&v) * r.powf(1.0 / 3.0));
        }
    }
    Ok(GlobalCheck { jump_residuals: jumps, det_residual, asymptotic_deviation, origin_growth })
}
