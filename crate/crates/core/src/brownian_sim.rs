//! Non-intersecting Brownian bridges from `±α` to `±β` realized as sorted
//! eigenvalues of `H(τ) = (1−τ)D₀ + τD₁ + √(T/n)·W(τ)`, with `W` a Hermitian
//! Brownian bridge pinned at both ends.
//!
//! Normals are keyed by `(seed, sample, entry, step)`: entry `i·n + j` of
//! sample `s` reads ChaCha8 stream `s` at word offset `entry·2³⁶ + 4·step`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("n must be even and at least 2, got {0}")]
    OddN(usize),
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be at least {min}, got {value}")]
    TooFew { name: &'static str, min: usize, value: usize },
    #[error("time {0} is not on the grid")]
    OffGrid(f64),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Noise pattern of `W(τ)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// Independent GUE bridges on the two `n/2` blocks.
    #[default]
    Block,
    /// One GUE bridge on the full `n × n` matrix.
    Full,
}

impl std::str::FromStr for Noise {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "block" => Ok(Noise::Block),
            "full" => Ok(Noise::Full),
            other => Err(format!("unknown noise pattern '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub time_steps: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise: Noise,
}

impl SimConfig {
    pub fn new(n: usize, t: f64, alpha: f64, beta: f64) -> Self {
        Self { n, t, alpha, beta, time_steps: DEFAULT_STEPS, samples: 200, seed: 0, noise: Noise::Block }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(SimError::OddN(self.n));
        }
        for (name, value) in [("T", self.t), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimError::NotPositive { name, value });
            }
        }
        if self.time_steps < 2 {
            return Err(SimError::TooFew { name: "time_steps", min: 2, value: self.time_steps });
        }
        if self.samples < 1 {
            return Err(SimError::TooFew { name: "samples", min: 1, value: self.samples });
        }
        Ok(())
    }

    pub fn is_critical(&self) -> bool {
        (2.0 * self.alpha * self.beta - 1.0).abs() <= 1e-12
    }

    pub fn tau_crit(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Uniform grid on [0, 1], with τ_crit inserted for critical configs.
    pub fn time_grid(&self) -> Vec<f64> {
        let k = self.time_steps;
        let mut g: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        if self.is_critical() {
            let tc = self.tau_crit();
            if g.iter().all(|&x| (x - tc).abs() > 1e-12) {
                let at = g.partition_point(|&x| x < tc);
                g.insert(at, tc);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathEnsemble {
    pub config: SimConfig,
    pub times: Vec<f64>,
    /// Row-major `[sample][time][index]`, each row sorted ascending.
    positions: Vec<f64>,
}

impl PathEnsemble {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn samples(&self) -> usize {
        self.config.samples
    }

    pub fn positions(&self, sample: usize, step: usize) -> &[f64] {
        let n = self.n();
        let at = (sample * self.times.len() + step) * n;
        &self.positions[at..at + n]
    }

    pub fn time_index(&self, tau: f64) -> Result<usize> {
        self.times.iter().position(|&t| (t - tau).abs() <= 1e-12).ok_or(SimError::OffGrid(tau))
    }

    /// All positions at one grid time, pooled over samples.
    pub fn pooled(&self, step: usize) -> Vec<f64> {
        (0..self.samples()).flat_map(|s| self.positions(s, step).iter().copied()).collect()
    }

    /// Smallest consecutive spacing over samples and interior times.
    pub fn min_spacing(&self) -> f64 {
        let last = self.times.len() - 1;
        let mut m = f64::INFINITY;
        for s in 0..self.samples() {
            for k in 1..last {
                for w in self.positions(s, k).windows(2) {
                    m = m.min(w[1] - w[0]);
                }
            }
        }
        m
    }

    /// Largest deviation from `±α` at τ = 0 and `±β` at τ = 1.
    pub fn pinning_error(&self) -> f64 {
        let n = self.n();
        let h = n / 2;
        let last = self.times.len() - 1;
        let mut err: f64 = 0.0;
        for s in 0..self.samples() {
            for (k, v) in [(0, self.config.alpha), (last, self.config.beta)] {
                for (i, &x) in self.positions(s, k).iter().enumerate() {
                    let target = if i < h { -v } else { v };
                    err = err.max((x - target).abs());
                }
            }
        }
        err
    }

    /// Per-sample gap between the lowest top-group and highest bottom-group path.
    pub fn group_gap(&self, sample: usize, step: usize) -> f64 {
        let p = self.positions(sample, step);
        let h = self.n() / 2;
        p[h] - p[h - 1]
    }
}

/// Support structure of the pooled positions at one time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    OneInterval,
    TwoIntervals,
}

impl PathEnsemble {
    /// Sample mean of [`PathEnsemble::group_gap`].
    pub fn mean_group_gap(&self, step: usize) -> f64 {
        (0..self.samples()).map(|s| self.group_gap(s, step)).sum::<f64>() / self.samples() as f64
    }

    /// Sample mean of the average spacing inside the two groups.
    pub fn mean_spacing(&self, step: usize) -> f64 {
        let n = self.n();
        let h = n / 2;
        let total: f64 = (0..self.samples())
            .map(|s| {
                let p = self.positions(s, step);
                (p[n - 1] - p[h] + p[h - 1] - p[0]) / (n - 2).max(1) as f64
            })
            .sum();
        total / self.samples() as f64
    }

    /// Two intervals when the mean gap between the groups exceeds the mean
    /// spacing inside them.
    pub fn support(&self, step: usize) -> Support {
        if self.mean_group_gap(step) > self.mean_spacing(step) {
            Support::TwoIntervals
        } else {
            Support::OneInterval
        }
    }

    /// Mean group gap with its standard error over samples.
    pub fn group_gap_stats(&self, step: usize) -> GapEstimate {
        let ns = self.samples() as f64;
        let mean = self.mean_group_gap(step);
        let var = (0..self.samples()).map(|s| (self.group_gap(s, step) - mean).powi(2)).sum::<f64>() / (ns - 1.0).max(1.0);
        GapEstimate { value: mean, std_err: (var / ns).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// Macroscopic group gap at `tau` from two system sizes, assuming the
/// soft-edge correction `g(n) = g_∞ + C·n^{-2/3}`.
pub fn extrapolated_gap(small: &PathEnsemble, large: &PathEnsemble, tau: f64) -> Result<GapEstimate> {
    let (ns, nl) = (small.n() as f64, large.n() as f64);
    if !(nl > ns) {
        return Err(SimError::TooFew { name: "larger n", min: small.n() + 2, value: large.n() });
    }
    let gs = small.group_gap_stats(small.time_index(tau)?);
    let gl = large.group_gap_stats(large.time_index(tau)?);
    let (a_s, a_l) = (ns.powf(2.0 / 3.0), nl.powf(2.0 / 3.0));
    let d = a_l - a_s;
    Ok(GapEstimate {
        value: (a_l * gl.value - a_s * gs.value) / d,
        std_err: ((a_l * gl.std_err).powi(2) + (a_s * gs.std_err).powi(2)).sqrt() / d,
    })
}

fn normals(seed: u64, sample: usize, entry: usize, count: usize) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng.set_word_pos((entry as u128) << 36);
    (0..count)
        .map(|_| {
            let u1 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let r = (-2.0 * (1.0 - u1).ln()).sqrt();
            let (s, c) = (2.0 * PI * u2).sin_cos();
            [r * c, r * s]
        })
        .collect()
}

/// Standard bridge on `times` (pinned to 0 at both ends) by recursive midpoint
/// conditioning; `z[k]` drives grid point `k`.
pub fn midpoint_bridge(times: &[f64], z: impl Fn(usize) -> f64) -> Vec<f64> {
    let last = times.len() - 1;
    let mut b = vec![0.0; times.len()];
    let mut stack = vec![(0usize, last)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let m = (lo + hi) / 2;
        let (tl, tm, th) = (times[lo], times[m], times[hi]);
        let w = (tm - tl) / (th - tl);
        let var = (tm - tl) * (th - tm) / (th - tl);
        b[m] = b[lo] + (b[hi] - b[lo]) * w + var.sqrt() * z(m);
        stack.push((lo, m));
        stack.push((m, hi));
    }
    b
}

fn blocks(cfg: &SimConfig) -> Vec<std::ops::Range<usize>> {
    let h = cfg.n / 2;
    match cfg.noise {
        Noise::Block => vec![0..h, h..cfg.n],
        Noise::Full => vec![0..cfg.n],
    }
}

/// Bridged entry `(i, j)`, `i ≤ j`, of `W`: real and imaginary parts per time.
/// Diagonal entries have unit bridge variance, off-diagonal parts one half each.
pub fn entry_bridge(cfg: &SimConfig, times: &[f64], sample: usize, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
    let z = normals(cfg.seed, sample, i * cfg.n + j, times.len());
    if i == j {
        (midpoint_bridge(times, |k| z[k][0]), vec![0.0; times.len()])
    } else {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (midpoint_bridge(times, |k| h * z[k][0]), midpoint_bridge(times, |k| h * z[k][1]))
    }
}

fn sample_one(cfg: &SimConfig, times: &[f64], sample: usize) -> Vec<f64> {
    let n = cfg.n;
    let h = n / 2;
    let scale = (cfg.t / n as f64).sqrt();
    let nt = times.len();
    let mut out = vec![0.0; nt * n];
    let mut filled = vec![0usize; nt];
    for block in blocks(cfg) {
        let m = block.len();
        let mut paths: Vec<(usize, usize, Vec<f64>, Vec<f64>)> = Vec::with_capacity(m * (m + 1) / 2);
        for i in block.clone() {
            for j in i..block.end {
                let (re, im) = entry_bridge(cfg, times, sample, i, j);
                paths.push((i - block.start, j - block.start, re, im));
            }
        }
        for (k, &tau) in times.iter().enumerate() {
            let mut hm = DMatrix::<C64>::zeros(m, m);
            for (a, i) in block.clone().enumerate() {
                let sign = if i < h { 1.0 } else { -1.0 };
                hm[(a, a)] = C64::from(sign * ((1.0 - tau) * cfg.alpha + tau * cfg.beta));
            }
            for (a, b, re, im) in &paths {
                let w = C64::new(re[k], im[k]) * scale;
                hm[(*a, *b)] += w;
                if a != b {
                    hm[(*b, *a)] += w.conj();
                }
            }
            let ev = hm.symmetric_eigenvalues();
            let row = &mut out[k * n..(k + 1) * n];
            for (slot, v) in row[filled[k]..filled[k] + m].iter_mut().zip(ev.iter()) {
                *slot = *v;
            }
            filled[k] += m;
        }
    }
    for row in out.chunks_mut(n) {
        row.sort_by(f64::total_cmp);
    }
    out
}

pub fn sample_paths(cfg: &SimConfig) -> Result<PathEnsemble> {
    cfg.validate()?;
    let times = cfg.time_grid();
    let rows: Vec<Vec<f64>> = (0..cfg.samples).into_par_iter().map(|s| sample_one(cfg, &times, s)).collect();
    Ok(PathEnsemble { config: *cfg, times, positions: rows.concat() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub tau: f64,
    pub centers: Vec<f64>,
    pub mass: Vec<f64>,
}

/// Pooled histogram on the symmetric range `[−R, R]`, `R = max |x|`, mass 1.
pub fn density_at(ens: &PathEnsemble, tau: f64, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(SimError::TooFew { name: "bins", min: 1, value: 0 });
    }
    let k = ens.time_index(tau)?;
    let xs = ens.pooled(k);
    let r = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let r = if r > 0.0 { r } else { 1.0 };
    let width = 2.0 * r / bins as f64;
    let mut mass = vec![0.0; bins];
    for &x in &xs {
        let b = (((x + r) / width).floor() as usize).min(bins - 1);
        mass[b] += 1.0;
    }
    let total = xs.len() as f64;
    mass.iter_mut().for_each(|m| *m /= total);
    let centers = (0..bins).map(|b| -r + (b as f64 + 0.5) * width).collect();
    Ok(Histogram { tau: ens.times[k], centers, mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    All,
    Top,
    Bottom,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::All => "all",
            Group::Top => "top",
            Group::Bottom => "bottom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullRow {
    pub time: f64,
    pub group: Group,
    pub lo: f64,
    pub hi: f64,
}

/// Envelopes per time and group: sample means of the per-sample extremes.
/// The top group is the upper half of the sorted positions.
pub fn hull(ens: &PathEnsemble) -> Vec<HullRow> {
    let n = ens.n();
    let h = n / 2;
    let ns = ens.samples() as f64;
    let mut rows = Vec::with_capacity(3 * ens.times.len());
    for (k, &time) in ens.times.iter().enumerate() {
        for (group, lo_i, hi_i) in [(Group::All, 0, n - 1), (Group::Top, h, n - 1), (Group::Bottom, 0, h - 1)] {
            let (mut lo, mut hi) = (0.0, 0.0);
            for s in 0..ens.samples() {
                let p = ens.positions(s, k);
                lo += p[lo_i];
                hi += p[hi_i];
            }
            rows.push(HullRow { time, group, lo: lo / ns, hi: hi / ns });
        }
    }
    rows
}

/// CDF of two semicircles of radius `r` centered at `±r`, each of mass 1/2.
pub fn touching_semicircles_cdf(r: f64, x: f64) -> f64 {
    let semi = |u: f64| {
        let u = u.clamp(-1.0, 1.0);
        0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
    };
    0.5 * (semi((x + r) / r) + semi((x - r) / r))
}

/// Kolmogorov distance between the empirical law of `xs` and `cdf`.
pub fn ks_distance(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs())
    })
}
