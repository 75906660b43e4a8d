//! Comparison policies: a forced-sampling LASSO bandit on monomial features,
//! kNN-UCB, and kernel ridge regression plugged into the epoch skeleton.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::additive::SampleBatch;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::policy::{Decision, Policy};
use crate::sparkle_policy::{EpochFitter, EpochPolicy, EpochSchedule, RewardEstimator};

/// Largest monomial feature dimension the LASSO bandit accepts.
pub const MAX_FEATURES: usize = 1 << 20;

/// Hyperparameters of the LASSO bandit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoConfig {
    #[serde(default = "ten")]
    pub degree: usize,
    #[serde(default = "one_usize")]
    pub q0: usize,
    #[serde(default = "five")]
    pub h0: f64,
    #[serde(default = "hundredth")]
    pub lambda1: f64,
    #[serde(default = "hundredth")]
    pub lambda20: f64,
}

fn ten() -> usize {
    10
}

fn one_usize() -> usize {
    1
}

fn five() -> f64 {
    5.0
}

fn hundredth() -> f64 {
    0.01
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            degree: 10,
            q0: 1,
            h0: 5.0,
            lambda1: 0.01,
            lambda20: 0.01,
        }
    }
}

/// Feature dimension `d * degree + 1` of the per-coordinate monomial expansion.
pub fn monomial_dimension(d: usize, degree: usize) -> Result<usize> {
    let dim = d.checked_mul(degree).and_then(|v| v.checked_add(1));
    match dim {
        Some(v) if v <= MAX_FEATURES => Ok(v),
        Some(v) => Err(Error::config(format!(
            "monomial feature dimension {v} exceeds the limit {MAX_FEATURES}"
        ))),
        None => Err(Error::config(format!("monomial feature dimension d * degree + 1 overflows for d={d}, degree={degree}"))),
    }
}

/// `x_j^p` for `j < d`, `1 <= p <= degree`, coordinate-major. The intercept is implicit.
pub fn monomials(x: &[f64], degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() * degree);
    for &v in x {
        let mut p = 1.0;
        for _ in 0..degree {
            p *= v;
            out.push(p);
        }
    }
    out
}

/// LASSO fit `min (1/n)||y - b0 - Z b||^2 + lambda ||b||_1` on standardized features.
#[derive(Debug, Clone, Default)]
struct LassoFit {
    intercept: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
    beta: Vec<f64>,
}

impl LassoFit {
    fn predict(&self, phi: &[f64]) -> f64 {
        let mut v = self.intercept;
        for j in 0..self.beta.len() {
            if self.beta[j] != 0.0 {
                v += self.beta[j] * (phi[j] - self.mean[j]) / self.scale[j];
            }
        }
        v
    }
}

const LASSO_TOL: f64 = 1e-7;
const LASSO_MAX_SWEEPS: usize = 1000;

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Coordinate descent, warm-started from `warm` when its length matches.
fn lasso(features: &[Vec<f64>], y: &[f64], lambda: f64, warm: &[f64]) -> LassoFit {
    let n = y.len();
    let p = features.first().map_or(0, |f| f.len());
    if n == 0 {
        return LassoFit {
            intercept: 0.0,
            mean: vec![0.0; p],
            scale: vec![1.0; p],
            beta: vec![0.0; p],
        };
    }
    let nf = n as f64;
    let ybar = y.iter().sum::<f64>() / nf;
    // Column-major standardized design; constant columns are dropped via scale = inf.
    let mut mean = vec![0.0; p];
    let mut scale = vec![1.0; p];
    let mut z = vec![0.0; n * p];
    for j in 0..p {
        let m = features.iter().map(|f| f[j]).sum::<f64>() / nf;
        let var = features.iter().map(|f| (f[j] - m).powi(2)).sum::<f64>() / nf;
        mean[j] = m;
        scale[j] = if var > 1e-300 && var.is_finite() { var.sqrt() } else { f64::INFINITY };
        for i in 0..n {
            z[j * n + i] = if scale[j].is_finite() { (features[i][j] - m) / scale[j] } else { 0.0 };
        }
    }
    let mut beta = if warm.len() == p { warm.to_vec() } else { vec![0.0; p] };
    for j in 0..p {
        if !scale[j].is_finite() {
            beta[j] = 0.0;
        }
    }
    let mut r: Vec<f64> = (0..n).map(|i| y[i] - ybar).collect();
    for j in 0..p {
        if beta[j] != 0.0 {
            for i in 0..n {
                r[i] -= z[j * n + i] * beta[j];
            }
        }
    }
    for _ in 0..LASSO_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        let mut max_beta = 0.0f64;
        for j in 0..p {
            if !scale[j].is_finite() {
                continue;
            }
            let col = &z[j * n..(j + 1) * n];
            let rho = beta[j] + col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / nf;
            let new = soft(rho, lambda / 2.0);
            let delta = new - beta[j];
            if delta != 0.0 {
                for i in 0..n {
                    r[i] -= col[i] * delta;
                }
                beta[j] = new;
            }
            max_change = max_change.max(delta.abs());
            max_beta = max_beta.max(new.abs());
        }
        if max_change <= LASSO_TOL * max_beta.max(1.0) {
            break;
        }
    }
    LassoFit {
        intercept: ybar,
        mean,
        scale,
        beta,
    }
}

#[derive(Debug, Clone, Default)]
struct ArmData {
    features: Vec<Vec<f64>>,
    y: Vec<f64>,
    fit: LassoFit,
    fitted_len: usize,
    fitted_lambda: f64,
}

impl ArmData {
    fn refit(&mut self, lambda: f64) {
        if self.fitted_len == self.y.len() && self.fitted_lambda == lambda && !self.y.is_empty() {
            return;
        }
        self.fit = lasso(&self.features, &self.y, lambda, &self.fit.beta);
        self.fitted_len = self.y.len();
        self.fitted_lambda = lambda;
    }

    fn predict(&self, phi: &[f64]) -> f64 {
        if self.y.is_empty() {
            0.0
        } else {
            self.fit.predict(phi)
        }
    }
}

/// Forced-sampling LASSO bandit on per-coordinate monomial features.
///
/// Arm `i` (1-based) is forced at steps `(2^n - 1) K q + j` for
/// `j = q(i-1)+1 ..= q i`, `n = 0, 1, ...`. Otherwise the forced-sample
/// estimators pick the arms within `h/2` of the best, and the all-sample
/// estimator with penalty `lambda20 sqrt((log t + log d)/t)` decides among them.
pub struct LassoBandit {
    arms: usize,
    d: usize,
    config: LassoConfig,
    forced: Vec<ArmData>,
    all: Vec<ArmData>,
}

impl LassoBandit {
    pub fn new(arms: usize, d: usize, config: LassoConfig) -> Result<Self> {
        if arms == 0 || d == 0 {
            return Err(Error::config("LASSO bandit needs K >= 1 and d >= 1"));
        }
        if config.degree == 0 || config.q0 == 0 {
            return Err(Error::config("LASSO bandit needs degree >= 1 and q0 >= 1"));
        }
        if !(config.h0 > 0.0 && config.lambda1 > 0.0 && config.lambda20 > 0.0) {
            return Err(Error::config("LASSO bandit needs positive h0, lambda1 and lambda20"));
        }
        monomial_dimension(d, config.degree)?;
        Ok(LassoBandit {
            arms,
            d,
            config,
            forced: vec![ArmData::default(); arms],
            all: vec![ArmData::default(); arms],
        })
    }

    /// Arm forced at step `t`, if any.
    pub fn forced_arm(&self, t: usize) -> Option<usize> {
        let kq = self.arms * self.config.q0;
        let mut block = 1usize;
        loop {
            let base = (block - 1).checked_mul(kq)?;
            if t <= base {
                return None;
            }
            if t <= base + kq {
                return Some((t - base - 1) / self.config.q0);
            }
            block = block.checked_mul(2)?;
        }
    }

    fn lambda2(&self, t: usize) -> f64 {
        let t = t.max(2) as f64;
        self.config.lambda20 * ((t.ln() + (self.d as f64).ln()) / t).sqrt()
    }
}

fn argmax_lowest(values: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (k, v) in values {
        if best.0 == usize::MAX || v > best.1 {
            best = (k, v);
        }
    }
    best.0
}

impl Policy for LassoBandit {
    fn name(&self) -> &str {
        "lasso"
    }

    fn arms(&self) -> usize {
        self.arms
    }

    fn choose(&mut self, t: usize, x: &[f64], _rng: &mut ChaCha8Rng) -> Result<Decision> {
        if self.arms == 1 {
            return Ok(Decision::plain(0, 1));
        }
        if let Some(k) = self.forced_arm(t) {
            return Ok(Decision::plain(k, self.arms));
        }
        let phi = monomials(x, self.config.degree);
        let l1 = self.config.lambda1;
        for a in &mut self.forced {
            a.refit(l1);
        }
        let pre: Vec<f64> = self.forced.iter().map(|a| a.predict(&phi)).collect();
        let top = pre.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cands: Vec<usize> = (0..self.arms).filter(|&k| pre[k] >= top - self.config.h0 / 2.0).collect();
        let l2 = self.lambda2(t);
        for &k in &cands {
            self.all[k].refit(l2);
        }
        let arm = argmax_lowest(cands.iter().map(|&k| (k, self.all[k].predict(&phi))));
        Ok(Decision {
            arm,
            epoch: 0,
            candidate_sizes: vec![self.arms, cands.len()],
        })
    }

    fn update(&mut self, t: usize, x: &[f64], arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::input(format!("arm {arm} out of range")));
        }
        let phi = monomials(x, self.config.degree);
        if self.forced_arm(t) == Some(arm) {
            self.forced[arm].features.push(phi.clone());
            self.forced[arm].y.push(reward);
        }
        self.all[arm].features.push(phi);
        self.all[arm].y.push(reward);
        Ok(())
    }
}

/// Neighbor-count rule for kNN-UCB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSchedule {
    /// `ceil(t^(2/(2+d)))`, capped at the arm's history size.
    Adaptive,
    /// A constant neighbor count, capped at the arm's history size.
    Fixed(usize),
}

/// Hyperparameters of kNN-UCB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnConfig {
    #[serde(default = "two")]
    pub theta: f64,
    #[serde(default = "adaptive")]
    pub k_schedule: KSchedule,
}

fn two() -> f64 {
    2.0
}

fn adaptive() -> KSchedule {
    KSchedule::Adaptive
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            theta: 2.0,
            k_schedule: KSchedule::Adaptive,
        }
    }
}

/// Per-arm k-nearest-neighbor mean plus `theta sqrt(log t / k)`.
pub struct KnnUcb {
    arms: usize,
    d: usize,
    config: KnnConfig,
    history: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
}

impl KnnUcb {
    pub fn new(arms: usize, d: usize, config: KnnConfig) -> Result<Self> {
        if arms == 0 || d == 0 {
            return Err(Error::config("kNN-UCB needs K >= 1 and d >= 1"));
        }
        if !(config.theta.is_finite() && config.theta > 0.0) {
            return Err(Error::config(format!("kNN-UCB needs theta > 0, got {}", config.theta)));
        }
        if config.k_schedule == KSchedule::Fixed(0) {
            return Err(Error::config("kNN-UCB needs a positive fixed neighbor count"));
        }
        Ok(KnnUcb {
            arms,
            d,
            config,
            history: vec![(Vec::new(), Vec::new()); arms],
        })
    }

    fn neighbors(&self, t: usize, available: usize) -> usize {
        let k = match self.config.k_schedule {
            KSchedule::Adaptive => (t as f64).powf(2.0 / (2.0 + self.d as f64)).ceil() as usize,
            KSchedule::Fixed(k) => k,
        };
        k.clamp(1, available)
    }

    /// Upper confidence index of `arm` at `x`; infinite without history.
    pub fn index(&self, t: usize, x: &[f64], arm: usize) -> f64 {
        let (xs, ys) = &self.history[arm];
        if ys.is_empty() {
            return f64::INFINITY;
        }
        let k = self.neighbors(t, ys.len());
        let mut dist: Vec<(f64, usize)> = xs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let mean = dist[..k].iter().map(|&(_, i)| ys[i]).sum::<f64>() / k as f64;
        mean + self.config.theta * ((t as f64).ln() / k as f64).sqrt()
    }
}

impl Policy for KnnUcb {
    fn name(&self) -> &str {
        "knn_ucb"
    }

    fn arms(&self) -> usize {
        self.arms
    }

    fn choose(&mut self, t: usize, x: &[f64], _rng: &mut ChaCha8Rng) -> Result<Decision> {
        let arm = argmax_lowest((0..self.arms).map(|k| (k, self.index(t, x, k))));
        Ok(Decision::plain(arm, self.arms))
    }

    fn update(&mut self, _t: usize, x: &[f64], arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::input(format!("arm {arm} out of range")));
        }
        self.history[arm].0.push(x.to_vec());
        self.history[arm].1.push(reward);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrrVariant {
    /// Product of one-dimensional kernels over all coordinates.
    Naive,
    /// Sum of one-dimensional kernels over all coordinates.
    Additive,
}

impl KrrVariant {
    fn kernel_value(self, kernel: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KrrVariant::Naive => a.iter().zip(b).map(|(&u, &v)| kernel.eval(u, v)).product(),
            KrrVariant::Additive => a.iter().zip(b).map(|(&u, &v)| kernel.eval(u, v)).sum(),
        }
    }
}

/// Kernel ridge predictor `f(x) = sum_i alpha_i k(x, x_i)`.
pub struct KrrEstimator {
    variant: KrrVariant,
    kernel: KernelSpec,
    anchors: Vec<Vec<f64>>,
    alpha: Vec<f64>,
}

impl KrrEstimator {
    /// Solves `(K + lambda0 I) alpha = y`, i.e. ridge weight `lambda0 / n` on
    /// `(1/n) ||y - f||^2 + (lambda0/n) ||f||^2`.
    pub fn fit(variant: KrrVariant, kernel: KernelSpec, lambda0: f64, batch: &SampleBatch) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return Err(Error::config(format!("KRR ridge weight must be non-negative, got {lambda0}")));
        }
        let rows = batch.rows();
        let n = rows.len();
        let gram = Mat::<f64>::from_fn(n, n, |i, l| variant.kernel_value(&kernel, &rows[i], &rows[l]));
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| batch.responses()[i]);
        let scale = (0..n).map(|i| gram[(i, i)]).fold(0.0, f64::max).max(1.0);
        let mut alpha = None;
        for jitter in [0.0, 1e-10, 1e-8, 1e-6] {
            let sys = Mat::<f64>::from_fn(n, n, |i, l| {
                gram[(i, l)] + if i == l { lambda0 + jitter * scale } else { 0.0 }
            });
            if let Ok(llt) = sys.llt(Side::Lower) {
                let sol = llt.solve(&rhs);
                let a: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
                if a.iter().all(|v| v.is_finite()) {
                    alpha = Some(a);
                    break;
                }
            }
        }
        let alpha = alpha.ok_or_else(|| Error::Numerical("KRR system is singular even after jitter".into()))?;
        Ok(KrrEstimator {
            variant,
            kernel,
            anchors: rows.to_vec(),
            alpha,
        })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

impl RewardEstimator for KrrEstimator {
    fn predict(&self, x: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.alpha)
            .map(|(a, &w)| w * self.variant.kernel_value(&self.kernel, a, x))
            .sum()
    }
}

/// KRR fits for the epoch skeleton.
pub struct KrrFitter {
    pub variant: KrrVariant,
    pub kernel: KernelSpec,
    pub lambda0: f64,
}

impl EpochFitter for KrrFitter {
    fn fit(&self, batch: &SampleBatch) -> Result<Arc<dyn RewardEstimator>> {
        Ok(Arc::new(KrrEstimator::fit(self.variant, self.kernel, self.lambda0, batch)?))
    }
}

/// The epoch/screening policy with KRR estimators in place of the sparse fit.
pub fn krr_policy(
    variant: KrrVariant,
    lambda0: f64,
    kernel: KernelSpec,
    arms: usize,
    schedule: EpochSchedule,
) -> Result<EpochPolicy> {
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return Err(Error::config(format!("KRR needs lambda0 > 0, got {lambda0}")));
    }
    let name = match variant {
        KrrVariant::Naive => "naive_krr",
        KrrVariant::Additive => "additive_krr",
    };
    EpochPolicy::new(name, arms, schedule, Box::new(KrrFitter { variant, kernel, lambda0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::stream;

    #[test]
    fn monomial_shapes() {
        assert_eq!(monomial_dimension(2, 2).unwrap(), 5);
        assert_eq!(monomials(&[2.0, 3.0], 2), vec![2.0, 4.0, 3.0, 9.0]);
        assert!(matches!(monomial_dimension(usize::MAX, 2), Err(Error::Config(_))));
        assert!(matches!(monomial_dimension(1 << 20, 10), Err(Error::Config(_))));
    }

    #[test]
    fn forced_schedule() {
        let b = LassoBandit::new(2, 3, LassoConfig::default()).unwrap();
        let forced: Vec<_> = (1..=20).map(|t| b.forced_arm(t)).collect();
        // Blocks start after 0, 2, 6, 14 steps with K q = 2.
        assert_eq!(forced[0], Some(0));
        assert_eq!(forced[1], Some(1));
        assert_eq!(forced[2], Some(0));
        assert_eq!(forced[3], Some(1));
        assert_eq!(forced[4], None);
        assert_eq!(forced[6], Some(0));
        assert_eq!(forced[7], Some(1));
        assert_eq!(forced[14], Some(0));
        assert_eq!(forced[15], Some(1));
        let c = LassoConfig { q0: 2, ..LassoConfig::default() };
        let b = LassoBandit::new(3, 1, c).unwrap();
        let first: Vec<_> = (1..=6).map(|t| b.forced_arm(t).unwrap()).collect();
        assert_eq!(first, vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn lasso_recovers_a_sparse_linear_model() {
        let mut rng = stream(3, 0);
        use crate::env::RngLike;
        let feats: Vec<Vec<f64>> = (0..200).map(|_| (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let y: Vec<f64> = feats.iter().map(|f| 1.0 + 2.0 * f[0] - 3.0 * f[3]).collect();
        let fit = lasso(&feats, &y, 1e-6, &[]);
        for (j, b) in fit.beta.iter().enumerate() {
            let coef = b / fit.scale[j];
            let want = [2.0, 0.0, 0.0, -3.0, 0.0, 0.0][j];
            assert!((coef - want).abs() < 1e-3, "j={j} got {coef}");
        }
        let big = lasso(&feats, &y, 100.0, &[]);
        assert!(big.beta.iter().all(|&b| b == 0.0));
        assert!((big.predict(&feats[0]) - y.iter().sum::<f64>() / 200.0).abs() < 1e-12);
    }

    #[test]
    fn single_arm_baselines_always_pick_it() {
        let mut rng = stream(0, 2);
        let mut l = LassoBandit::new(1, 2, LassoConfig::default()).unwrap();
        let mut k = KnnUcb::new(1, 2, KnnConfig::default()).unwrap();
        for t in 1..50 {
            let x = [t as f64 * 0.1, -0.3];
            assert_eq!(l.choose(t, &x, &mut rng).unwrap().arm, 0);
            l.update(t, &x, 0, 1.0).unwrap();
            assert_eq!(k.choose(t, &x, &mut rng).unwrap().arm, 0);
            k.update(t, &x, 0, 1.0).unwrap();
        }
    }

    #[test]
    fn knn_hand_simulation() {
        let cfg = KnnConfig {
            theta: 2.0,
            k_schedule: KSchedule::Fixed(1),
        };
        let mut p = KnnUcb::new(2, 1, cfg).unwrap();
        let mut rng = stream(0, 2);
        let x = [0.5];
        let rewards = [1.0, 0.0];
        let mut arms = Vec::new();
        for t in 1..=10 {
            let a = p.choose(t, &x, &mut rng).unwrap().arm;
            p.update(t, &x, a, rewards[a]).unwrap();
            arms.push(a);
        }
        // Cold start picks arm 0, then the untried arm 1; with one neighbor
        // both bonuses are equal, so the better mean wins from then on.
        assert_eq!(arms, vec![0, 1, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(p.index(3, &x, 0), 1.0 + 2.0 * 3f64.ln().sqrt());
    }

    #[test]
    fn knn_cold_start_prefers_lowest_index() {
        let mut p = KnnUcb::new(3, 2, KnnConfig::default()).unwrap();
        let mut rng = stream(0, 2);
        assert_eq!(p.choose(1, &[0.0, 0.0], &mut rng).unwrap().arm, 0);
        assert!(KnnUcb::new(2, 2, KnnConfig { theta: 0.0, ..KnnConfig::default() }).is_err());
    }

    fn batch(rows: Vec<Vec<f64>>, y: Vec<f64>) -> SampleBatch {
        SampleBatch::from_rows(rows, y).unwrap()
    }

    #[test]
    fn krr_zero_responses_give_zero_predictor() {
        let k = KernelSpec::matern_unit(2.5).unwrap();
        let b = batch(vec![vec![0.0, 1.0], vec![0.5, -1.0], vec![2.0, 0.3]], vec![0.0; 3]);
        for v in [KrrVariant::Naive, KrrVariant::Additive] {
            let f = KrrEstimator::fit(v, k, 0.01, &b).unwrap();
            assert!(f.alpha().iter().all(|&a| a == 0.0));
            assert_eq!(f.predict(&[0.3, 0.2]), 0.0);
        }
    }

    #[test]
    fn krr_variants_coincide_in_one_dimension() {
        let k = KernelSpec::matern_unit(2.5).unwrap();
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![-3.0 + 0.5 * i as f64]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x[0].sin()).collect();
        let b = batch(xs, y);
        let a = KrrEstimator::fit(KrrVariant::Naive, k, 0.01, &b).unwrap();
        let c = KrrEstimator::fit(KrrVariant::Additive, k, 0.01, &b).unwrap();
        for i in 0..40 {
            let x = [-4.0 + 0.2 * i as f64];
            assert!((a.predict(&x) - c.predict(&x)).abs() < 1e-8);
        }
    }

    #[test]
    fn krr_interpolates_in_the_ridgeless_limit() {
        let k = KernelSpec::matern_unit(2.5).unwrap();
        let xs = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.7, 2.0]];
        let y = vec![1.0, -2.0, 0.5];
        let b = batch(xs.clone(), y.clone());
        for v in [KrrVariant::Naive, KrrVariant::Additive] {
            let f = KrrEstimator::fit(v, k, 1e-9, &b).unwrap();
            for (x, t) in xs.iter().zip(&y) {
                assert!((f.predict(x) - t).abs() <= 1e-4);
            }
        }
        assert!(krr_policy(KrrVariant::Naive, 0.0, k, 2, EpochSchedule::new(10, 2, 1, 2.5, 1.0).unwrap()).is_err());
    }
}
