//! Per-subcommand parameters. Each block declares a clap flag struct with
//! every field optional and a resolved struct with defaults; a JSON config
//! file and the flags are layered onto the defaults in that order.

use clap::Args;
use serde::{Deserialize, Serialize};
use tacnode_pearcey::acceptance::{
    COARSE_GRID, CONVERGENCE_GRID, CONVERGENCE_LADDER, LAMBDA_LADDER, MATCHING_LADDER, MATCHING_POINTS,
};
use tacnode_pearcey::brownian_sim::{Noise, DEFAULT_STEPS};
use tacnode_pearcey::curve::{gamma_star, Model};
use tacnode_pearcey::lambda::DELTA;

macro_rules! params {
    ($flags:ident => $params:ident {
        $( $(#[doc = $doc:literal])* $([$($arg:tt)*])? $field:ident $(as $key:literal)? : $ty:ty = $default:expr ),* $(,)?
    }) => {
        #[derive(Debug, Clone, Default, Args, Serialize)]
        pub struct $flags {
            $(
                $(#[doc = $doc])*
                #[arg(long $(= $key)?, allow_hyphen_values = true $(, $($arg)*)?)]
                #[serde(skip_serializing_if = "Option::is_none")]
                $(#[serde(rename = $key)])?
                pub $field: Option<$ty>,
            )*
        }

        #[derive(Debug, Clone, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $params {
            $(
                $(#[serde(rename = $key)])?
                pub $field: $ty,
            )*
        }

        impl Default for $params {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }
    };
}

params! { GammaFlags => GammaParams {
    /// Scaling parameter, negative.
    a: f64 = -8.0,
    /// Pearcey parameter σ.
    sigma: f64 = 1.0,
    /// Sign model: brownian or two_matrix.
    model: Model = Model::Brownian,
}}

params! { CurveFlags => CurveVerifyParams {
    /// Scaling parameter, negative.
    a: f64 = -8.0,
    /// Pearcey parameter σ.
    sigma: f64 = 1.0,
    /// Sign model: brownian or two_matrix.
    model: Model = Model::Brownian,
    /// Sample points per cut for the jump relations.
    points_per_cut: usize = 100,
}}

params! { LambdaFlags => LambdaVerifyParams {
    /// γ values for the closed-form constants.
    [value_delimiter = ',']
    gammas: Vec<f64> = vec![gamma_star(), 0.2, 0.12],
    /// a-ladder for the normalized convergence deviation.
    [value_delimiter = ',']
    ladder: Vec<f64> = LAMBDA_LADDER.to_vec(),
    /// σ values for the convergence deviation.
    [value_delimiter = ',']
    sigmas: Vec<f64> = vec![1.0, -1.0],
    /// Sign models for the convergence deviation.
    [value_delimiter = ',']
    models: Vec<Model> = vec![Model::Brownian, Model::TwoMatrix],
}}

params! { SignFlags => SignReportParams {
    /// Scaling parameter, negative.
    a: f64 = -8.0,
    /// Pearcey parameter σ.
    sigma: f64 = 1.0,
    /// Sign model: brownian or two_matrix.
    model: Model = Model::Brownian,
    /// Points per contour.
    points: usize = 200,
    /// Largest contour parameter.
    x_max: f64 = 30.0,
}}

params! { PearceyEvalFlags => PearceyEvalParams {
    /// First kernel argument.
    x: f64 = 0.5,
    /// Second kernel argument.
    y: f64 = 1.5,
    /// Pearcey parameter ρ.
    rho: f64 = 0.0,
    /// Real part of the point where Φ^Pe is evaluated.
    z_re: f64 = 2.0,
    /// Imaginary part of the point where Φ^Pe is evaluated.
    z_im: f64 = 1.0,
}}

/// Kernel grid for the consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// x, y ∈ {±0.5, ±1.5}.
    Coarse,
    /// x, y ∈ {±0.25, ±0.5, ±1, ±1.5, ±2, ±3}.
    Fine,
}

impl Grid {
    pub fn points(self) -> Vec<f64> {
        match self {
            Grid::Coarse => COARSE_GRID.to_vec(),
            Grid::Fine => vec![-3.0, -2.0, -1.5, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0],
        }
    }
}

params! { ConsistencyFlags => PearceyConsistencyParams {
    /// Pearcey parameters ρ.
    [value_delimiter = ',']
    rho: Vec<f64> = vec![-1.0, 0.0, 1.0],
    /// Kernel grid: coarse or fine.
    grid: Grid = Grid::Coarse,
}}

params! { AuditFlags => ParametrixAuditParams {
    /// Scaling parameter, negative.
    a: f64 = -8.0,
    /// Pearcey parameter σ.
    sigma: f64 = 1.0,
    /// Sign model: brownian or two_matrix.
    model: Model = Model::Brownian,
}}

params! { GlobalFlags => GlobalCheckParams {
    /// Scaling parameter, negative.
    a: f64 = -8.0,
    /// Pearcey parameter σ.
    sigma: f64 = 1.0,
    /// Sign model: brownian or two_matrix.
    model: Model = Model::Brownian,
    /// Sample points per jump contour.
    samples: usize = 100,
}}

params! { MatchingFlags => MatchingParams {
    /// a-ladder.
    [value_delimiter = ',']
    ladder: Vec<f64> = MATCHING_LADDER.to_vec(),
    /// σ values.
    [value_delimiter = ',']
    sigmas: Vec<f64> = vec![0.0, 2.0],
    /// Sign models.
    [value_delimiter = ',']
    models: Vec<Model> = vec![Model::Brownian, Model::TwoMatrix],
    /// Disk radius δ.
    delta: f64 = DELTA,
    /// Points on the circle.
    points: usize = MATCHING_POINTS,
}}

params! { ConvergeFlags => ConvergeParams {
    /// a-ladder.
    [value_delimiter = ',']
    ladder: Vec<f64> = CONVERGENCE_LADDER.to_vec(),
    /// Kernel arguments, used for both x and y.
    [value_delimiter = ',']
    grid: Vec<f64> = CONVERGENCE_GRID.to_vec(),
    /// σ values.
    [value_delimiter = ',']
    sigmas: Vec<f64> = vec![0.0, 1.0],
}}

params! { PhaseFlags => PhaseParams {
    /// Model: brownian or two_matrix.
    model: Model = Model::Brownian,
    /// Brownian start scale α, or the two-matrix coupling α.
    alpha: f64 = 1.0,
    /// Brownian end scale β.
    beta: f64 = 0.5,
    /// Brownian temperature T.
    t as "T": f64 = 1.0,
    /// Time τ (Brownian) or coupling τ (two-matrix).
    tau: f64 = 0.5,
    /// Number of Brownian paths.
    n: usize = 20,
    /// Relative tolerance for landing on a phase boundary.
    tol: f64 = 1e-4,
    /// Samples per axis of the phase-diagram grid.
    diagram_points: usize = 41,
}}

params! { SimulateFlags => SimulateParams {
    /// Number of paths, even.
    n: usize = 20,
    /// Temperature T.
    t as "T": f64 = 1.0,
    /// Start scale α.
    alpha: f64 = 1.0,
    /// End scale β.
    beta: f64 = 0.5,
    /// Time intervals of the uniform grid.
    time_steps: usize = DEFAULT_STEPS,
    /// Independent samples.
    samples: usize = 200,
    /// RNG seed.
    seed: u64 = 0,
    /// Noise pattern: block or full.
    noise: Noise = Noise::Block,
    /// Histogram bins.
    bins: usize = 40,
    /// Grid times for the density histogram.
    [value_delimiter = ',']
    density_taus: Vec<f64> = vec![0.5],
    /// Samples written to the paths table.
    path_samples: usize = 10,
}}

params! { AcceptanceFlags => AcceptanceParams {
    /// Criteria to run.
    [value_delimiter = ',']
    criteria: Vec<usize> = (1..=10).collect(),
}}
