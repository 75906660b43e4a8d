//! Margin-exponent estimation and empirical regularity of sampled regions.

use serde::{Deserialize, Serialize};

use super::stats::{ols, Axis, ExponentFit};
use crate::env::{EnvSpec, Environment};
use crate::error::{Error, Result};
use crate::policy::{stream, CONTEXT_STREAM};

/// The default grid `i / 101`, `i = 1..=100`.
pub fn default_delta_grid() -> Vec<f64> {
    MarginConfig::default().grid()
}

/// Settings of a margin-exponent estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginConfig {
    #[serde(default = "default_margin_env")]
    pub environment: EnvSpec,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    /// Grid `i / (points + 1)`, `i = 1..=points`.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_margin_env() -> EnvSpec {
    EnvSpec::Sine {
        d: 20,
        s: 2,
        k: 2,
        noise_var: 0.05,
        low: -5.0,
        high: 5.0,
    }
}

fn default_n_mc() -> usize {
    10_000
}

fn default_grid_points() -> usize {
    100
}

impl Default for MarginConfig {
    fn default() -> Self {
        MarginConfig {
            environment: default_margin_env(),
            n_mc: default_n_mc(),
            grid_points: default_grid_points(),
            seed: 0,
        }
    }
}

impl MarginConfig {
    pub fn grid(&self) -> Vec<f64> {
        let p = self.grid_points;
        (1..=p).map(|i| i as f64 / (p + 1) as f64).collect()
    }

    pub fn run(&self) -> Result<MarginEstimate> {
        let env = self.environment.build()?;
        estimate_margin_alpha(env.as_ref(), self.n_mc, &self.grid(), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginEstimate {
    pub alpha_hat: f64,
    pub fit: ExponentFit,
    /// `(delta, frequency)` for every grid point, including dropped ones.
    pub frequencies: Vec<(f64, f64)>,
    /// Grid points with zero frequency, left out of the fit.
    pub dropped: Vec<f64>,
}

/// Gap between the best and second-best arm at `x`.
fn top_gap(env: &dyn Environment, x: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for k in 0..env.arms() {
        let v = env.mean_reward(k, x);
        if v > best {
            second = best;
            best = v;
        } else if v > second {
            second = v;
        }
    }
    best - second
}

/// Monte-Carlo frequencies of `0 < gap(X) <= delta` on shared draws.
pub fn margin_frequencies(env: &dyn Environment, n_mc: usize, grid: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, CONTEXT_STREAM);
    let mut gaps: Vec<f64> = (0..n_mc)
        .map(|_| top_gap(env, &env.sample_context(&mut rng)))
        .filter(|&g| g > 0.0)
        .collect();
    gaps.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&d| gaps.partition_point(|&g| g <= d) as f64 / n_mc as f64)
        .collect()
}

/// Estimates the margin exponent as the OLS slope of `log p(delta)` on `log delta`,
/// where `p(delta)` is the frequency of `0 < gap <= delta` and the gap is the
/// difference between the two largest arm means.
pub fn estimate_margin_alpha(env: &dyn Environment, n_mc: usize, grid: &[f64], seed: u64) -> Result<MarginEstimate> {
    if env.arms() < 2 {
        return Err(Error::config("margin estimation needs at least two arms"));
    }
    if n_mc < 1000 {
        return Err(Error::config(format!("margin estimation needs n_mc >= 1000, got {n_mc}")));
    }
    if grid.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::config("delta grid must lie in (0, 1)"));
    }
    let freqs = margin_frequencies(env, n_mc, grid, seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped = Vec::new();
    for (&d, &p) in grid.iter().zip(&freqs) {
        if p > 0.0 {
            x.push(d.ln());
            y.push(p.ln());
        } else {
            dropped.push(d);
        }
    }
    if x.len() < 3 {
        return Err(Error::Numerical(format!(
            "degenerate margin: only {} of {} grid points have a positive frequency",
            x.len(),
            grid.len()
        )));
    }
    let fit = ols(&x, &y, Axis::Other)?;
    Ok(MarginEstimate {
        alpha_hat: fit.slope,
        fit,
        frequencies: grid.iter().copied().zip(freqs).collect(),
        dropped,
    })
}

/// Clustering summary of one coordinate projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimRegularity {
    pub dim: usize,
    pub intervals: usize,
    pub min_length: f64,
    /// Smallest gap between consecutive intervals; `None` with a single interval.
    pub min_gap: Option<f64>,
    pub threshold: f64,
    /// Set when some interval has zero length.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmRegularity {
    pub arm: usize,
    pub points: usize,
    pub dims: Vec<DimRegularity>,
}

/// `5 max(1, ln n) (max - min) / n` over the `n` distinct values.
///
/// The largest spacing of `n` uniform points is about `ln n / n` times the
/// range, so this keeps uniformly filled intervals in one piece.
pub fn default_gap_threshold(sorted_distinct: &[f64]) -> f64 {
    let n = sorted_distinct.len();
    if n < 2 {
        return 0.0;
    }
    let range = sorted_distinct[n - 1] - sorted_distinct[0];
    5.0 * (n as f64).ln().max(1.0) * range / n as f64
}

fn project(points: &[Vec<f64>], j: usize, threshold: Option<f64>) -> DimRegularity {
    let mut v: Vec<f64> = points.iter().map(|p| p[j]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let threshold = threshold.unwrap_or_else(|| default_gap_threshold(&v));
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for &t in &v {
        match intervals.last_mut() {
            Some(iv) if t - iv.1 <= threshold => iv.1 = t,
            _ => intervals.push((t, t)),
        }
    }
    let min_length = intervals.iter().map(|iv| iv.1 - iv.0).fold(f64::INFINITY, f64::min);
    let min_gap = intervals
        .windows(2)
        .map(|w| w[1].0 - w[0].1)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    DimRegularity {
        dim: j,
        intervals: intervals.len(),
        min_length,
        min_gap,
        threshold,
        degenerate: min_length == 0.0,
    }
}

/// Per-arm, per-coordinate interval structure of the points each arm was pulled at.
pub fn c_regularity_report(per_arm: &[Vec<Vec<f64>>], gap_threshold: Option<f64>) -> Result<Vec<ArmRegularity>> {
    if let Some(t) = gap_threshold {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::config(format!("gap threshold must be non-negative, got {t}")));
        }
    }
    let mut out = Vec::new();
    for (arm, pts) in per_arm.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let d = pts[0].len();
        if pts.iter().any(|p| p.len() != d) {
            return Err(Error::input(format!("points of arm {arm} have mixed dimensions")));
        }
        out.push(ArmRegularity {
            arm,
            points: pts.len(),
            dims: (0..d).map(|j| project(pts, j, gap_threshold)).collect(),
        });
    }
    Ok(out)
}

/// Splits `(x, arm)` pairs into per-arm point sets.
pub fn group_by_arm(points: &[(Vec<f64>, usize)]) -> Vec<Vec<Vec<f64>>> {
    let k = points.iter().map(|p| p.1 + 1).max().unwrap_or(0);
    let mut out = vec![Vec::new(); k];
    for (x, a) in points {
        out[*a].push(x.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{RngLike, SineEnv};

    /// Two arms whose means differ by exactly 1 everywhere.
    struct ConstantGap;

    impl Environment for ConstantGap {
        fn dim(&self) -> usize {
            1
        }
        fn arms(&self) -> usize {
            2
        }
        fn noise_var(&self) -> f64 {
            0.0
        }
        fn sample_context(&self, rng: &mut dyn RngLike) -> Vec<f64> {
            vec![rng.uniform(0.0, 1.0)]
        }
        fn mean_reward(&self, arm: usize, _x: &[f64]) -> f64 {
            if arm == 0 { 1.0 } else { 0.0 }
        }
        fn regret_bound(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn constant_gap_is_degenerate() {
        let err = estimate_margin_alpha(&ConstantGap, 2000, &default_delta_grid(), 0).unwrap_err();
        assert!(err.to_string().contains("degenerate margin"));
    }

    #[test]
    fn frequencies_are_nested() {
        let env = SineEnv::new(20, 2, 2, 0.05).unwrap();
        let f = margin_frequencies(&env, 5000, &default_delta_grid(), 3);
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert!(estimate_margin_alpha(&env, 999, &[0.1, 0.2, 0.3], 0).is_err());
        assert!(estimate_margin_alpha(&env, 1000, &[0.1, 1.0, 0.3], 0).is_err());
    }

    #[test]
    fn uniform_points_form_one_interval() {
        let mut rng = stream(1, 0);
        let pts: Vec<Vec<f64>> = (0..2000).map(|_| vec![rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)]).collect();
        let r = c_regularity_report(&[pts], None).unwrap();
        for d in &r[0].dims {
            assert_eq!(d.intervals, 1);
            assert_eq!(d.min_gap, None);
            assert!(d.min_length > 0.99);
        }
    }

    #[test]
    fn two_pieces_are_separated() {
        let mut rng = stream(2, 0);
        let pts: Vec<Vec<f64>> = (0..2000)
            .map(|i| vec![if i % 2 == 0 { rng.uniform(0.0, 0.4) } else { rng.uniform(0.6, 1.0) }])
            .collect();
        let v: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let hi_left = v.iter().copied().filter(|&t| t <= 0.4).fold(f64::MIN, f64::max);
        let lo_right = v.iter().copied().filter(|&t| t >= 0.6).fold(f64::MAX, f64::min);
        let r = c_regularity_report(&[pts], None).unwrap();
        let d = &r[0].dims[0];
        assert_eq!(d.intervals, 2);
        assert_eq!(d.min_gap, Some(lo_right - hi_left));
        assert!((d.min_gap.unwrap() - 0.2).abs() < 0.01);
    }

    #[test]
    fn single_point_is_flagged() {
        let r = c_regularity_report(&[vec![vec![0.3, 0.7]]], None).unwrap();
        assert!(r[0].dims.iter().all(|d| d.intervals == 1 && d.min_length == 0.0 && d.degenerate));
    }

    #[test]
    fn permutation_and_duplicates_do_not_matter() {
        let mut rng = stream(4, 0);
        let pts: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.uniform(-5.0, 5.0), rng.uniform(0.0, 0.1)]).collect();
        let base = c_regularity_report(&[pts.clone()], None).unwrap();
        let mut shuffled = pts.clone();
        shuffled.reverse();
        shuffled.extend(pts[..50].iter().cloned());
        let other = c_regularity_report(&[shuffled], None).unwrap();
        assert_eq!(base[0].dims, other[0].dims);
    }
}
