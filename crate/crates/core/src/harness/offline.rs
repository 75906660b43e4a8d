//! Offline estimation study: error of the doubly penalized fit against sample size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{fit_exponent, Axis, ExponentFit, SweepPoint};
use crate::additive::SampleBatch;
use crate::env::{Environment, RngLike, SineEnv};
use crate::error::{Error, Result};
use crate::estimator::{fit_doubly_penalized_with, schedule, FitOptions, RegularizationSchedule};
use crate::kernel::KernelSpec;
use crate::policy::{stream, CONTEXT_STREAM, NOISE_STREAM};

/// Stream for held-out evaluation points.
pub const TEST_STREAM: u64 = 3;

/// Data come from arm 0 of the sine environment, `f(x) = sum_{j=1..=s} 2 sin(x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflineConfig {
    #[serde(default = "d20")]
    pub d: usize,
    #[serde(default = "s2")]
    pub s: usize,
    #[serde(default = "noise")]
    pub noise_var: f64,
    #[serde(default = "n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "five")]
    pub seeds: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "n_test")]
    pub n_test: usize,
    #[serde(rename = "C3", default = "c3")]
    pub c3: f64,
    #[serde(rename = "C4", default = "c4")]
    pub c4: f64,
    #[serde(default = "m")]
    pub m: f64,
    #[serde(default = "delta")]
    pub delta: f64,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default = "tol")]
    pub tol: f64,
    #[serde(default = "sweeps")]
    pub max_sweeps: usize,
}

fn d20() -> usize {
    20
}
fn s2() -> usize {
    2
}
fn noise() -> f64 {
    0.05
}
fn n_values() -> Vec<usize> {
    vec![100, 200, 400, 800]
}
fn five() -> usize {
    5
}
fn n_test() -> usize {
    5000
}
fn c3() -> f64 {
    0.01
}
fn c4() -> f64 {
    1.0
}
fn m() -> f64 {
    2.5
}
fn delta() -> f64 {
    0.01
}
fn tol() -> f64 {
    1e-8
}
fn sweeps() -> usize {
    500
}

impl Default for OfflineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflineRow {
    pub n: usize,
    pub seed: u64,
    pub l2_error: f64,
    pub support: Vec<usize>,
    pub exact_support: bool,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OfflineReport {
    pub rows: Vec<OfflineRow>,
    /// Slope of log mean L2 error on log n; absent with fewer than 3 sample sizes.
    pub fit: Option<ExponentFit>,
}

impl OfflineReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,seed,l2_error,support_size,exact_support,sweeps,converged\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.seed,
                r.l2_error,
                r.support.len(),
                r.exact_support,
                r.sweeps,
                r.converged
            ));
        }
        s
    }
}

fn one_fit(cfg: &OfflineConfig, env: &SineEnv, kernel: &KernelSpec, n: usize, seed: u64) -> Result<OfflineRow> {
    let mut ctx = stream(seed, CONTEXT_STREAM);
    let mut noise = stream(seed, NOISE_STREAM);
    let sd = cfg.noise_var.sqrt();
    let rows: Vec<Vec<f64>> = (0..n).map(|_| env.sample_context(&mut ctx)).collect();
    let y: Vec<f64> = rows.iter().map(|x| env.mean_reward(0, x) + sd * noise.standard_normal()).collect();
    let batch = SampleBatch::from_rows(rows, y)?;
    let sched = RegularizationSchedule::new(cfg.c3, cfg.c4, cfg.m)?;
    let pair = schedule(n, cfg.d, cfg.delta, &sched)?;
    let opts = FitOptions {
        tol: cfg.tol,
        max_sweeps: cfg.max_sweeps,
        ..FitOptions::default()
    };
    let (f, report) = fit_doubly_penalized_with(&batch, &pair, kernel, &opts)?;
    let mut test = stream(seed, TEST_STREAM);
    let mut sq = 0.0;
    for _ in 0..cfg.n_test {
        let x = env.sample_context(&mut test);
        sq += (f.evaluate(&x)? - env.mean_reward(0, &x)).powi(2);
    }
    let support = f.support();
    let truth: Vec<usize> = env.active_coordinates(0).collect();
    Ok(OfflineRow {
        n,
        seed,
        l2_error: (sq / cfg.n_test as f64).sqrt(),
        exact_support: support == truth,
        support,
        sweeps: report.sweeps,
        converged: report.converged,
    })
}

/// Fits every `(n, seed)` combination and the log-log error slope.
pub fn run_offline(cfg: &OfflineConfig) -> Result<OfflineReport> {
    if cfg.n_values.is_empty() || cfg.seeds == 0 || cfg.n_test == 0 {
        return Err(Error::config("offline study needs sample sizes, seeds and test points"));
    }
    let env = SineEnv::new(cfg.d, cfg.s, 1, cfg.noise_var)?;
    let kernel = match cfg.kernel {
        Some(k) => k,
        None => KernelSpec::matern_unit(cfg.m)?,
    };
    let jobs: Vec<(usize, u64)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.seeds as u64).map(move |r| (n, r)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, r)| one_fit(cfg, &env, &kernel, n, cfg.seed_base + r))
        .collect::<Result<Vec<_>>>()?;
    let mut points: Vec<SweepPoint> = Vec::new();
    for &n in &cfg.n_values {
        points.push(SweepPoint {
            value: n as f64,
            final_regrets: rows.iter().filter(|r| r.n == n).map(|r| r.l2_error).collect(),
        });
    }
    let fit = if points.len() >= 3 { Some(fit_exponent(&points, Axis::Other)?) } else { None };
    Ok(OfflineReport { rows, fit })
}
