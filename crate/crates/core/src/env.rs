//! Reward environments: the sinusoidal sparse additive family and the
//! bump-function instances used for minimax lower bounds.
//!
//! Arms and coordinates are 0-based throughout.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_rel;

/// A K-armed contextual reward process with Gaussian noise.
pub trait Environment: Send + Sync {
    fn dim(&self) -> usize;
    fn arms(&self) -> usize;
    fn noise_var(&self) -> f64;
    fn sample_context(&self, rng: &mut dyn RngLike) -> Vec<f64>;
    fn mean_reward(&self, arm: usize, x: &[f64]) -> f64;

    fn draw_reward(&self, arm: usize, x: &[f64], rng: &mut dyn RngLike) -> f64 {
        let z: f64 = rng.standard_normal();
        self.mean_reward(arm, x) + self.noise_var().sqrt() * z
    }

    /// Best arm (lowest index on ties) and its mean reward.
    fn oracle(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, self.mean_reward(0, x));
        for k in 1..self.arms() {
            let v = self.mean_reward(k, x);
            if v > best.1 {
                best = (k, v);
            }
        }
        best
    }

    /// Largest possible instantaneous regret.
    fn regret_bound(&self) -> f64;
}

/// Object-safe slice of [`rand::Rng`] used by environments.
pub trait RngLike {
    fn uniform(&mut self, low: f64, high: f64) -> f64;
    fn standard_normal(&mut self) -> f64;
}

impl<R: Rng> RngLike for R {
    fn uniform(&mut self, low: f64, high: f64) -> f64 {
        self.random_range(low..=high)
    }

    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }
}

/// `f_k(x) = sum_{j=1..s} 2 sin(x[k + j])` for arm `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineEnv {
    d: usize,
    s: usize,
    k: usize,
    noise_var: f64,
    low: f64,
    high: f64,
}

impl SineEnv {
    pub fn new(d: usize, s: usize, k: usize, noise_var: f64) -> Result<Self> {
        Self::with_bounds(d, s, k, noise_var, -5.0, 5.0)
    }

    pub fn with_bounds(d: usize, s: usize, k: usize, noise_var: f64, low: f64, high: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("sine environment needs at least one arm"));
        }
        if s + k > d {
            return Err(Error::config(format!("sine environment needs s + K <= d, got s={s}, K={k}, d={d}")));
        }
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(Error::config(format!("noise variance must be non-negative, got {noise_var}")));
        }
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::config(format!("covariate bounds must satisfy low < high, got [{low}, {high}]")));
        }
        Ok(SineEnv { d, s, k, noise_var, low, high })
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.low, self.high)
    }

    /// Coordinates that arm `arm` depends on.
    pub fn active_coordinates(&self, arm: usize) -> std::ops::RangeInclusive<usize> {
        arm + 1..=arm + self.s
    }
}

impl Environment for SineEnv {
    fn dim(&self) -> usize {
        self.d
    }

    fn arms(&self) -> usize {
        self.k
    }

    fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn sample_context(&self, rng: &mut dyn RngLike) -> Vec<f64> {
        (0..self.d).map(|_| rng.uniform(self.low, self.high)).collect()
    }

    fn mean_reward(&self, arm: usize, x: &[f64]) -> f64 {
        self.active_coordinates(arm).map(|j| 2.0 * x[j].sin()).sum()
    }

    fn regret_bound(&self) -> f64 {
        4.0 * self.s as f64
    }
}

fn bump_kernel(t: f64) -> f64 {
    // u_1(t) scaled by exp(64) so its peak at t = 3/8 is exactly 1.
    if t <= 0.25 || t >= 0.5 {
        return 0.0;
    }
    (64.0 - 1.0 / ((0.5 - t) * (t - 0.25))).exp()
}

const BUMP_TOL: f64 = 1e-13;

fn bump_normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| integrate_rel(bump_kernel, 0.25, 0.5, 0.0, 1e-15))
}

/// The smooth step `u(x) = int_x^inf u_1 / int u_1`, with
/// `u_1(t) = exp(-1 / ((1/2 - t)(t - 1/4)))` on `(1/4, 1/2)`.
pub fn bump_u(x: f64) -> Result<f64> {
    bump_u_with_tol(x, BUMP_TOL)
}

/// [`bump_u`] with an explicit relative quadrature tolerance.
pub fn bump_u_with_tol(x: f64, tol: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::input(format!("bump_u needs x >= 0, got {x}")));
    }
    Ok(bump_unchecked(x, tol))
}

fn bump_unchecked(x: f64, tol: f64) -> f64 {
    if x <= 0.25 {
        return 1.0;
    }
    if x >= 0.5 {
        return 0.0;
    }
    let z = bump_normalizer();
    // Integrate over the shorter side for accuracy near both ends.
    if x >= 0.375 {
        integrate_rel(bump_kernel, x, 0.5, 0.0, tol) / z
    } else {
        1.0 - integrate_rel(bump_kernel, 0.25, x, 0.0, tol) / z
    }
}

/// Two-armed instance on `[0,1]^d`: arm 0 has mean
/// `1/2 + sum_{k<N} sigma_k q^{-m} u(q ||x - c_k||) 1{x in B_k}` and arm 1 has
/// mean `1/2`, where `B_k` are the cells of the regular grid with `q` cells
/// per side and `c_k` their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundEnv {
    d: usize,
    m: f64,
    q: usize,
    n_cells: usize,
    signs: Vec<f64>,
    noise_var: f64,
}

impl LowerBoundEnv {
    /// `q = ceil(T^(1/(2m+d)))`, `N = floor(q^(d - alpha m))`.
    pub fn new(horizon: u64, m: f64, alpha: f64, d: usize, signs: Signs, noise_var: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("lower-bound environment needs d >= 1"));
        }
        if horizon < 1 {
            return Err(Error::config("lower-bound environment needs T >= 1"));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::config(format!("smoothness m must be positive, got {m}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0 && alpha * m <= d as f64) {
            return Err(Error::config(format!("need 0 <= alpha and alpha * m <= d, got alpha={alpha}, m={m}, d={d}")));
        }
        if !(noise_var > 2.0 / 9.0 && noise_var < 0.25) {
            return Err(Error::config(format!("noise variance must lie in (2/9, 1/4), got {noise_var}")));
        }
        let q = (horizon as f64).powf(1.0 / (2.0 * m + d as f64)).ceil() as usize;
        let q = q.max(1);
        let n_cells = (q as f64).powf(d as f64 - alpha * m).floor() as usize;
        if n_cells == 0 {
            return Err(Error::config(format!("derived cell count N is zero (q={q})")));
        }
        let total = (q as f64).powi(d as i32);
        if n_cells as f64 > total {
            return Err(Error::config(format!("derived cell count N={n_cells} exceeds the grid size")));
        }
        let signs = match signs {
            Signs::Fixed(v) => {
                if v.len() != n_cells {
                    return Err(Error::config(format!("sign vector has length {}, expected N={n_cells}", v.len())));
                }
                if v.iter().any(|&s| s != 1 && s != -1) {
                    return Err(Error::config("sign vector entries must be +1 or -1"));
                }
                v.into_iter().map(f64::from).collect()
            }
            Signs::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n_cells).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
            }
        };
        Ok(LowerBoundEnv { d, m, q, n_cells, signs, noise_var })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn cells(&self) -> usize {
        self.n_cells
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Sup-norm of the deviation from 1/2: `q^{-m}`.
    pub fn amplitude(&self) -> f64 {
        (self.q as f64).powf(-self.m)
    }

    /// Grid cell index of `x` (first coordinate most significant) and the
    /// scaled distance `q ||x - c||` to its center.
    fn locate(&self, x: &[f64]) -> (usize, f64) {
        let q = self.q as f64;
        let mut idx = 0usize;
        let mut r2 = 0.0;
        for &xi in x {
            let j = ((xi * q).floor().max(0.0) as usize).min(self.q - 1);
            idx = idx * self.q + j;
            let c = (2.0 * j as f64 + 1.0) / (2.0 * q);
            r2 += (q * (xi - c)).powi(2);
        }
        (idx, r2.sqrt())
    }

    /// `eta_1(x) - 1/2`.
    pub fn deviation(&self, x: &[f64]) -> f64 {
        let (cell, r) = self.locate(x);
        if cell >= self.n_cells {
            return 0.0;
        }
        self.signs[cell] * self.amplitude() * bump_unchecked(r, BUMP_TOL)
    }
}

impl Environment for LowerBoundEnv {
    fn dim(&self) -> usize {
        self.d
    }

    fn arms(&self) -> usize {
        2
    }

    fn noise_var(&self) -> f64 {
        self.noise_var
    }

    fn sample_context(&self, rng: &mut dyn RngLike) -> Vec<f64> {
        (0..self.d).map(|_| rng.uniform(0.0, 1.0)).collect()
    }

    fn mean_reward(&self, arm: usize, x: &[f64]) -> f64 {
        if arm == 0 {
            0.5 + self.deviation(x)
        } else {
            0.5
        }
    }

    fn regret_bound(&self) -> f64 {
        self.amplitude()
    }
}

/// Sign pattern of a [`LowerBoundEnv`].
#[derive(Debug, Clone, PartialEq)]
pub enum Signs {
    Fixed(Vec<i8>),
    Seeded(u64),
}

/// JSON description of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "env", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    Sine {
        d: usize,
        s: usize,
        #[serde(rename = "K")]
        k: usize,
        noise_var: f64,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_high")]
        high: f64,
    },
    LowerBound {
        #[serde(rename = "T")]
        horizon: u64,
        m: f64,
        alpha: f64,
        #[serde(default = "default_one")]
        d: usize,
        #[serde(default)]
        sigma: Option<Vec<i8>>,
        #[serde(default)]
        sigma_seed: u64,
        #[serde(default = "default_lb_noise")]
        noise_var: f64,
    },
}

fn default_low() -> f64 {
    -5.0
}

fn default_high() -> f64 {
    5.0
}

fn default_one() -> usize {
    1
}

fn default_lb_noise() -> f64 {
    0.24
}

impl EnvSpec {
    pub fn build(&self) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvSpec::Sine { d, s, k, noise_var, low, high } => {
                Box::new(SineEnv::with_bounds(*d, *s, *k, *noise_var, *low, *high)?)
            }
            EnvSpec::LowerBound { horizon, m, alpha, d, sigma, sigma_seed, noise_var } => {
                let signs = match sigma {
                    Some(v) => Signs::Fixed(v.clone()),
                    None => Signs::Seeded(*sigma_seed),
                };
                Box::new(LowerBoundEnv::new(*horizon, *m, *alpha, *d, signs, *noise_var)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn sine_hand_values() {
        let env = SineEnv::new(3, 1, 2, 0.0).unwrap();
        let x = [0.0, PI / 2.0, PI / 2.0];
        assert!((env.mean_reward(0, &x) - 2.0).abs() < 1e-15);
        assert!((env.mean_reward(1, &x) - 2.0).abs() < 1e-15);
        let y = [0.0, PI / 2.0, -PI / 2.0];
        assert_eq!(env.oracle(&y).0, 0);
        assert!((env.oracle(&y).1 - 2.0).abs() < 1e-15);
        assert!((env.mean_reward(1, &y) + 2.0).abs() < 1e-15);
        for k in 0..2 {
            assert_eq!(env.mean_reward(k, &[0.0; 3]), 0.0);
        }
    }

    #[test]
    fn sine_rejects_bad_shapes() {
        assert!(SineEnv::new(3, 2, 2, 0.05).is_err());
        assert!(SineEnv::new(3, 1, 0, 0.05).is_err());
        assert!(SineEnv::new(3, 1, 2, -1.0).is_err());
    }

    #[test]
    fn identical_arms_tie_to_lowest_index() {
        let env = SineEnv::new(4, 0, 3, 0.0).unwrap();
        assert_eq!(env.oracle(&[1.0, 2.0, 3.0, 4.0]), (0, 0.0));
    }

    #[test]
    fn contexts_are_uniform_and_reproducible() {
        let env = SineEnv::new(5, 2, 2, 0.05).unwrap();
        let mut r = rng(1);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = env.sample_context(&mut r);
            assert!(x.iter().all(|v| (-5.0..=5.0).contains(v)));
            sum += x[0];
        }
        // sd of the mean: 10 / sqrt(12 n)
        let sd = 10.0 / (12.0 * n as f64).sqrt();
        assert!((sum / n as f64).abs() < 3.0 * sd);
        assert_eq!(env.sample_context(&mut rng(9)), env.sample_context(&mut rng(9)));
    }

    #[test]
    fn reward_noise_has_the_configured_variance() {
        let env = SineEnv::new(5, 2, 2, 0.05).unwrap();
        let x = [0.3, -1.0, 2.0, 0.1, 4.0];
        let mean = env.mean_reward(1, &x);
        let quiet = SineEnv::new(5, 2, 2, 0.0).unwrap();
        assert_eq!(quiet.draw_reward(1, &x, &mut rng(3)), mean);
        let mut r = rng(4);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| env.draw_reward(1, &x, &mut r)).collect();
        let m = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var / 0.05 - 1.0).abs() < 0.05);
        assert_eq!(env.draw_reward(1, &x, &mut rng(5)), env.draw_reward(1, &x, &mut rng(5)));
    }

    #[test]
    fn sine_rewards_are_bounded() {
        let env = SineEnv::new(20, 4, 3, 0.05).unwrap();
        let mut r = rng(2);
        for _ in 0..1000 {
            let x = env.sample_context(&mut r);
            for k in 0..3 {
                assert!(env.mean_reward(k, &x).abs() <= 8.0);
            }
        }
    }

    #[test]
    fn bump_matches_high_precision_quadrature() {
        // 50-digit reference values from subdivided quadrature.
        assert_eq!(bump_u(0.1).unwrap(), 1.0);
        assert_eq!(bump_u(0.25).unwrap(), 1.0);
        assert_eq!(bump_u(0.5).unwrap(), 0.0);
        assert_eq!(bump_u(0.7).unwrap(), 0.0);
        assert!((bump_u(0.375).unwrap() - 0.5).abs() < 1e-12);
        assert!((bump_u(0.45).unwrap() / 5.491_993_347_056_529e-18 - 1.0).abs() < 1e-10);
        assert!((bump_u(0.4).unwrap() - 0.009_759_202_309_748_135).abs() < 1e-12);
        assert!((bump_u(0.3).unwrap() - 0.999_999_999_999_999_994_5).abs() < 1e-15);
        let z = bump_normalizer() * (-64.0f64).exp();
        assert!((z / 4.391_097_102_987_997_4e-30 - 1.0).abs() < 1e-10);
        assert!(bump_u(-0.1).is_err());
        assert!(bump_u(f64::NAN).is_err());
    }

    #[test]
    fn bump_is_monotone_and_stable() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let x = 0.6 * i as f64 / 1000.0;
            let v = bump_u(x).unwrap();
            assert!(v <= prev + 1e-15, "x={x}");
            assert!((0.0..=1.0).contains(&v));
            let coarse = bump_u_with_tol(x, 2e-13).unwrap();
            assert!((coarse - v).abs() < 1e-8);
            prev = v;
        }
        let v = bump_u(0.4).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn lower_bound_shape() {
        let env = LowerBoundEnv::new(10_000, 2.5, 0.4, 1, Signs::Seeded(1), 0.24).unwrap();
        // q = ceil(10000^(1/6)) = 5, N = floor(5^0) = 1
        assert_eq!(env.q(), 5);
        assert_eq!(env.cells(), 1);
        let env = LowerBoundEnv::new(1_000_000, 2.0, 0.2, 2, Signs::Seeded(3), 0.24).unwrap();
        // q = ceil(10^(6/6)) = 10, N = floor(10^1.6) = 39
        assert_eq!(env.q(), 10);
        assert_eq!(env.cells(), 39);
        assert!(LowerBoundEnv::new(100, 2.5, 1.0, 1, Signs::Seeded(0), 0.24).is_err());
        assert!(LowerBoundEnv::new(100, 2.5, 0.2, 1, Signs::Seeded(0), 0.2).is_err());
        assert!(LowerBoundEnv::new(10_000, 2.5, 0.4, 1, Signs::Fixed(vec![1, 1]), 0.24).is_err());
    }

    #[test]
    fn lower_bound_values() {
        let env = LowerBoundEnv::new(10_000, 2.5, 0.4, 1, Signs::Fixed(vec![-1]), 0.24).unwrap();
        let amp = 5f64.powf(-2.5);
        // Center of the first cell: u(0) = 1.
        assert!((env.mean_reward(0, &[0.1]) - (0.5 - amp)).abs() < 1e-15);
        // Edge of the first cell: q|x - c| = 1/2, so u = 0.
        assert_eq!(env.mean_reward(0, &[0.2]), 0.5);
        // Outside the signed cells.
        assert_eq!(env.mean_reward(0, &[0.7]), 0.5);
        assert_eq!(env.mean_reward(1, &[0.1]), 0.5);
        assert_eq!(env.oracle(&[0.1]).0, 1);
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let x = 0.1 + 0.1 * i as f64 / 100.0;
            let dev = env.deviation(&[x]).abs();
            assert!(dev <= prev);
            prev = dev;
        }
    }

    #[test]
    fn env_spec_json() {
        let s: EnvSpec = serde_json::from_str(r#"{"env":"sine","d":20,"s":2,"K":2,"noise_var":0.05}"#).unwrap();
        let env = s.build().unwrap();
        assert_eq!((env.dim(), env.arms()), (20, 2));
        let s: EnvSpec = serde_json::from_str(r#"{"env":"lower_bound","T":10000,"m":2.5,"alpha":0.4}"#).unwrap();
        let env = s.build().unwrap();
        assert_eq!((env.dim(), env.arms()), (1, 2));
        assert!((env.noise_var() - 0.24).abs() < 1e-15);
        assert!(serde_json::from_str::<EnvSpec>(r#"{"env":"sine","d":20,"s":2,"K":2,"noise_var":0.05,"x":1}"#).is_err());
        assert!(serde_json::from_str::<EnvSpec>(r#"{"env":"cosine"}"#).is_err());
    }
}
