//! The epoch-based arm elimination policy with sparse additive estimators.
//!
//! Time is split into epochs of geometrically growing length. Inside epoch
//! `q` the policy screens every context through the estimators fitted at the
//! ends of epochs `1..q-1`, keeping at round `h` the arms whose estimate is
//! within `eps_h` of the best surviving estimate, and pulls uniformly among the
//! survivors. At the end of each epoch every arm gets a fresh estimator fitted
//! on the samples it received during that epoch only.

use std::sync::Arc;

use log::{debug, info};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::additive::{AdditiveFunction, SampleBatch};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::estimator::{fit_doubly_penalized_with, schedule, FitOptions, RegularizationSchedule};
use crate::kernel::KernelSpec;
use crate::policy::{run_policy, Decision, Policy, PolicyTrace};

/// Epoch lengths and screening tolerances for a horizon `T`:
///
/// ```text
/// tau_q = ceil(C1 (s0^((2m+1)/(4m)) 2^(q+4))^((4m+2)/(2m-1)) log(dT) log T)
/// eps_q = 2^(-q) (log T)^(-(2m-1)/(4m))
/// ```
///
/// The last epoch is truncated so the lengths sum to `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochSchedule {
    horizon: usize,
    c1: f64,
    s0: usize,
    m: f64,
    d: usize,
    nominal: Vec<f64>,
    tau: Vec<usize>,
    eps: Vec<f64>,
    starts: Vec<usize>,
}

impl EpochSchedule {
    pub fn new(horizon: usize, d: usize, s0: usize, m: f64, c1: f64) -> Result<Self> {
        if horizon < 3 {
            return Err(Error::input(format!("the epoch schedule needs T >= 3, got T={horizon}")));
        }
        if d == 0 || s0 == 0 {
            return Err(Error::config(format!("need d >= 1 and s0 >= 1, got d={d}, s0={s0}")));
        }
        if !(m.is_finite() && m > 1.5) {
            return Err(Error::config(format!("smoothness m must exceed 3/2, got {m}")));
        }
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::config(format!("C1 must be positive, got {c1}")));
        }
        let t = horizon as f64;
        let eps1 = 0.5 * t.ln().powf(-(2.0 * m - 1.0) / (4.0 * m));
        let mut sched = EpochSchedule {
            horizon,
            c1,
            s0,
            m,
            d,
            nominal: Vec::new(),
            tau: Vec::new(),
            eps: Vec::new(),
            starts: Vec::new(),
        };
        let mut used = 0usize;
        let mut eps = eps1;
        let mut q = 1;
        while used < horizon {
            let raw = sched.nominal_length(q);
            let len = raw.ceil();
            let len = if len >= (horizon - used) as f64 { horizon - used } else { len as usize };
            sched.nominal.push(raw);
            sched.starts.push(used + 1);
            sched.tau.push(len);
            sched.eps.push(eps);
            used += len;
            eps *= 0.5;
            q += 1;
        }
        Ok(sched)
    }

    /// Pre-ceiling length of epoch `q` (1-based), ignoring truncation.
    pub fn nominal_length(&self, q: usize) -> f64 {
        let m = self.m;
        let t = self.horizon as f64;
        let base = (self.s0 as f64).powf((2.0 * m + 1.0) / (4.0 * m)) * 2f64.powi(q as i32 + 4);
        self.c1 * base.powf((4.0 * m + 2.0) / (2.0 * m - 1.0)) * (self.d as f64 * t).ln() * t.ln()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of epochs `Q`.
    pub fn epochs(&self) -> usize {
        self.tau.len()
    }

    /// Epoch lengths after truncation; they sum to `T`.
    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    /// Untruncated epoch lengths `ceil(nominal_length(q))`.
    pub fn nominal_tau(&self) -> Vec<f64> {
        self.nominal.iter().map(|v| v.ceil()).collect()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// First step (1-based) of epoch `q` (1-based).
    pub fn start(&self, q: usize) -> usize {
        self.starts[q - 1]
    }

    /// Last step of epoch `q`.
    pub fn end(&self, q: usize) -> usize {
        self.starts[q - 1] + self.tau[q - 1] - 1
    }

    /// Epoch containing step `t` (both 1-based).
    pub fn epoch_of(&self, t: usize) -> usize {
        self.starts.partition_point(|&s| s <= t)
    }
}

/// Anything that predicts a scalar reward at a context.
pub trait RewardEstimator: Send + Sync {
    fn predict(&self, x: &[f64]) -> f64;
}

impl RewardEstimator for AdditiveFunction {
    fn predict(&self, x: &[f64]) -> f64 {
        self.evaluate_unchecked(x)
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> RewardEstimator for F {
    fn predict(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Estimators produced at the end of one epoch. `None` marks an arm that
/// received no samples in that epoch.
#[derive(Clone)]
pub struct BankRound {
    pub eps: f64,
    pub estimators: Vec<Option<Arc<dyn RewardEstimator>>>,
}

/// Estimators of all completed epochs, oldest first.
#[derive(Clone, Default)]
pub struct EstimatorBank {
    rounds: Vec<BankRound>,
}

impl EstimatorBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, round: BankRound) {
        self.rounds.push(round);
    }

    pub fn rounds(&self) -> &[BankRound] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

/// Result of screening one context.
#[derive(Debug, Clone, PartialEq)]
pub struct Screening {
    pub candidates: Vec<usize>,
    /// Candidate-set size before the first round and after each round applied.
    pub sizes: Vec<usize>,
}

/// Sequential screening of `x` through rounds `1..=upto` of `bank`.
///
/// Arms without an estimator for a round pass that round untested and do not
/// take part in the maximum.
pub fn screen(x: &[f64], bank: &EstimatorBank, arms: usize, upto: usize) -> Result<Screening> {
    if upto > bank.len() {
        return Err(Error::input(format!("cannot screen through {upto} rounds, bank has {}", bank.len())));
    }
    let mut candidates: Vec<usize> = (0..arms).collect();
    let mut sizes = vec![arms];
    let mut values = vec![0.0; arms];
    for round in &bank.rounds[..upto] {
        if candidates.len() <= 1 {
            break;
        }
        if round.estimators.len() != arms {
            return Err(Error::input("bank round has the wrong number of arms"));
        }
        let mut best = f64::NEG_INFINITY;
        for &k in &candidates {
            if let Some(f) = &round.estimators[k] {
                values[k] = f.predict(x);
                best = best.max(values[k]);
            }
        }
        candidates.retain(|&k| round.estimators[k].is_none() || values[k] >= best - round.eps);
        sizes.push(candidates.len());
    }
    Ok(Screening { candidates, sizes })
}

/// Screens `x` through the whole bank and draws uniformly among the survivors.
pub fn step(x: &[f64], bank: &EstimatorBank, arms: usize, rng: &mut ChaCha8Rng) -> Result<(usize, Screening)> {
    let s = screen(x, bank, arms, bank.len())?;
    let arm = s.candidates[rng.random_range(0..s.candidates.len())];
    Ok((arm, s))
}

/// Fits one reward estimator per arm from an epoch's samples.
pub trait EpochFitter: Send + Sync {
    fn fit(&self, batch: &SampleBatch) -> Result<Arc<dyn RewardEstimator>>;
}

/// Per-arm samples collected during one epoch.
#[derive(Debug, Clone, Default)]
pub struct EpochData {
    pub covariates: Vec<Vec<f64>>,
    pub responses: Vec<f64>,
}

/// Fits every arm with data (in parallel) and returns the new bank round.
pub fn end_of_epoch(data: &[EpochData], eps: f64, fitter: &dyn EpochFitter) -> Result<BankRound> {
    let estimators = data
        .par_iter()
        .enumerate()
        .map(|(k, d)| {
            if d.responses.is_empty() {
                info!("arm {k} received no samples this epoch; it passes the next screening round untested");
                return Ok(None);
            }
            let batch = SampleBatch::from_rows(d.covariates.clone(), d.responses.clone())?;
            fitter.fit(&batch).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BankRound { eps, estimators })
}

/// The epoch/screening skeleton, parameterized by the per-arm fitter.
pub struct EpochPolicy {
    name: String,
    arms: usize,
    schedule: EpochSchedule,
    fitter: Box<dyn EpochFitter>,
    bank: EstimatorBank,
    data: Vec<EpochData>,
}

impl EpochPolicy {
    pub fn new(name: impl Into<String>, arms: usize, schedule: EpochSchedule, fitter: Box<dyn EpochFitter>) -> Result<Self> {
        if arms == 0 {
            return Err(Error::config("policy needs at least one arm"));
        }
        Ok(EpochPolicy {
            name: name.into(),
            arms,
            schedule,
            fitter,
            bank: EstimatorBank::new(),
            data: vec![EpochData::default(); arms],
        })
    }

    pub fn schedule(&self) -> &EpochSchedule {
        &self.schedule
    }

    pub fn bank(&self) -> &EstimatorBank {
        &self.bank
    }
}

impl Policy for EpochPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn arms(&self) -> usize {
        self.arms
    }

    fn choose(&mut self, t: usize, x: &[f64], rng: &mut ChaCha8Rng) -> Result<Decision> {
        if t == 0 || t > self.schedule.horizon() {
            return Err(Error::input(format!("step {t} outside the horizon 1..={}", self.schedule.horizon())));
        }
        let q = self.schedule.epoch_of(t);
        if self.bank.len() != q - 1 {
            return Err(Error::input(format!("step {t} of epoch {q} with {} fitted epochs", self.bank.len())));
        }
        let (arm, s) = step(x, &self.bank, self.arms, rng)?;
        Ok(Decision {
            arm,
            epoch: q,
            candidate_sizes: s.sizes,
        })
    }

    fn update(&mut self, t: usize, x: &[f64], arm: usize, reward: f64) -> Result<()> {
        if arm >= self.arms {
            return Err(Error::input(format!("arm {arm} out of range")));
        }
        let d = &mut self.data[arm];
        d.covariates.push(x.to_vec());
        d.responses.push(reward);
        let q = self.schedule.epoch_of(t);
        if t == self.schedule.end(q) && q < self.schedule.epochs() {
            let data = std::mem::replace(&mut self.data, vec![EpochData::default(); self.arms]);
            let counts: Vec<usize> = data.iter().map(|d| d.responses.len()).collect();
            debug!("{}: fitting epoch {q} with per-arm sample counts {counts:?}", self.name);
            let round = end_of_epoch(&data, self.schedule.eps()[q - 1], self.fitter.as_ref())?;
            self.bank.push(round);
        }
        Ok(())
    }
}

/// Constants of the SPARKLE policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparkleConfig {
    #[serde(rename = "C1", default = "default_c1")]
    pub c1: f64,
    #[serde(rename = "C3", default = "default_c3")]
    pub c3: f64,
    #[serde(rename = "C4", default = "default_c4")]
    pub c4: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_s0")]
    pub s0: usize,
    /// Defaults to the unit Matérn kernel of order `m`.
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_sweeps")]
    pub max_sweeps: usize,
}

fn default_c1() -> f64 {
    7e-5
}

fn default_c3() -> f64 {
    0.01
}

fn default_c4() -> f64 {
    1.0
}

fn default_m() -> f64 {
    2.5
}

fn default_s0() -> usize {
    2
}

fn default_tol() -> f64 {
    1e-8
}

fn default_sweeps() -> usize {
    500
}

impl Default for SparkleConfig {
    fn default() -> Self {
        SparkleConfig {
            c1: default_c1(),
            c3: default_c3(),
            c4: default_c4(),
            m: default_m(),
            s0: default_s0(),
            kernel: None,
            tol: default_tol(),
            max_sweeps: default_sweeps(),
        }
    }
}

impl SparkleConfig {
    pub fn kernel(&self) -> Result<KernelSpec> {
        match self.kernel {
            Some(k) if k.smoothness() != self.m => Err(Error::config(format!(
                "kernel smoothness {} differs from m = {}",
                k.smoothness(),
                self.m
            ))),
            Some(k) => Ok(k),
            None => KernelSpec::matern_unit(self.m),
        }
    }

    pub fn regularization(&self) -> Result<RegularizationSchedule> {
        RegularizationSchedule::new(self.c3, self.c4, self.m)
    }

    pub fn epoch_schedule(&self, horizon: usize, d: usize) -> Result<EpochSchedule> {
        EpochSchedule::new(horizon, d, self.s0, self.m, self.c1)
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel()?;
        self.regularization()?;
        if !(self.c1.is_finite() && self.c1 > 0.0) {
            return Err(Error::config(format!("C1 must be positive, got {}", self.c1)));
        }
        if self.s0 == 0 {
            return Err(Error::config("s0 must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) || self.max_sweeps == 0 {
            return Err(Error::config("solver tolerance and sweep budget must be positive"));
        }
        Ok(())
    }
}

/// Doubly penalized fits with rate-driven penalties at confidence `1/T`.
pub struct SparkleFitter {
    kernel: KernelSpec,
    regularization: RegularizationSchedule,
    d: usize,
    horizon: usize,
    opts: FitOptions,
}

impl SparkleFitter {
    pub fn new(config: &SparkleConfig, d: usize, horizon: usize) -> Result<Self> {
        config.validate()?;
        Ok(SparkleFitter {
            kernel: config.kernel()?,
            regularization: config.regularization()?,
            d,
            horizon,
            opts: FitOptions {
                tol: config.tol,
                max_sweeps: config.max_sweeps,
                ..FitOptions::default()
            },
        })
    }
}

impl EpochFitter for SparkleFitter {
    fn fit(&self, batch: &SampleBatch) -> Result<Arc<dyn RewardEstimator>> {
        let pair = schedule(batch.len(), self.d, 1.0 / self.horizon as f64, &self.regularization)?;
        let (f, report) = fit_doubly_penalized_with(batch, &pair, &self.kernel, &self.opts)?;
        debug!(
            "fit on {} samples: support {:?}, {} sweeps, converged {}",
            batch.len(),
            report.active_set,
            report.sweeps,
            report.converged
        );
        Ok(Arc::new(f))
    }
}

/// Builds the SPARKLE policy for a `K`-armed problem in dimension `d`.
pub fn sparkle_policy(config: &SparkleConfig, arms: usize, d: usize, horizon: usize) -> Result<EpochPolicy> {
    let fitter = SparkleFitter::new(config, d, horizon)?;
    EpochPolicy::new("sparkle", arms, config.epoch_schedule(horizon, d)?, Box::new(fitter))
}

/// Runs SPARKLE on `env` for `horizon` steps.
pub fn run_sparkle(env: &dyn Environment, config: &SparkleConfig, horizon: usize, seed: u64) -> Result<PolicyTrace> {
    if env.arms() < 2 {
        return Err(Error::config("SPARKLE needs K >= 2"));
    }
    let mut policy = sparkle_policy(config, env.arms(), env.dim(), horizon)?;
    run_policy(env, &mut policy, horizon, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::SineEnv;
    use crate::policy::stream;

    fn constant(v: f64) -> Option<Arc<dyn RewardEstimator>> {
        Some(Arc::new(move |_: &[f64]| v))
    }

    fn round(eps: f64, values: &[f64]) -> BankRound {
        BankRound {
            eps,
            estimators: values.iter().map(|&v| constant(v)).collect(),
        }
    }

    #[test]
    fn comparison_schedule_golden() {
        let s = EpochSchedule::new(1500, 20, 2, 2.5, 7e-5).unwrap();
        assert!((s.nominal_length(1) - 602.178_4).abs() < 1e-3);
        assert_eq!(s.tau()[0], 603);
        assert!((s.eps()[0] - 0.225_593_477_981_680_4).abs() < 1e-15);
        assert_eq!(s.tau(), &[603, 897]);
        assert_eq!(s.epochs(), 2);
    }

    #[test]
    fn nominal_growth_ratio_is_eight() {
        let s = EpochSchedule::new(1500, 20, 2, 2.5, 7e-5).unwrap();
        for q in 1..6 {
            let r = s.nominal_length(q + 1) / s.nominal_length(q);
            assert!((r - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_partitions_the_horizon() {
        for &(t, c1) in &[(3usize, 7e-5), (10, 1e-9), (1000, 1e-6), (50_000, 1.5e-5), (777, 1e-3)] {
            let s = EpochSchedule::new(t, 7, 3, 2.5, c1).unwrap();
            assert_eq!(s.tau().iter().sum::<usize>(), t);
            assert!(s.tau().iter().all(|&l| l >= 1));
            for w in s.eps().windows(2) {
                assert_eq!(w[1], w[0] / 2.0);
            }
            for w in s.nominal_tau().windows(2) {
                assert!(w[1] >= w[0]);
            }
            for q in 1..=s.epochs() {
                assert_eq!(s.epoch_of(s.start(q)), q);
                assert_eq!(s.epoch_of(s.end(q)), q);
            }
            assert_eq!(s.end(s.epochs()), t);
        }
    }

    #[test]
    fn schedule_rejects_short_horizons() {
        assert!(matches!(EpochSchedule::new(1, 5, 2, 2.5, 1.0), Err(Error::Input(_))));
        assert!(EpochSchedule::new(2, 5, 2, 2.5, 1.0).is_err());
        assert!(EpochSchedule::new(10, 5, 2, 1.5, 1.0).is_err());
        assert!(EpochSchedule::new(10, 5, 0, 2.5, 1.0).is_err());
    }

    #[test]
    fn screening_examples() {
        let mut bank = EstimatorBank::new();
        bank.push(round(0.05, &[1.0, 0.5, 0.99]));
        assert_eq!(screen(&[0.0], &bank, 3, 1).unwrap().candidates, vec![0, 2]);

        let mut flat = EstimatorBank::new();
        flat.push(round(0.0, &[0.3, 0.3, 0.3]));
        assert_eq!(screen(&[0.0], &flat, 3, 1).unwrap().candidates, vec![0, 1, 2]);

        // The second round would eliminate arm 0, but screening stops at a singleton.
        let mut two = EstimatorBank::new();
        two.push(round(0.1, &[1.0, 0.8]));
        two.push(round(0.05, &[0.0, 1.0]));
        let s = screen(&[0.0], &two, 2, 2).unwrap();
        assert_eq!(s.candidates, vec![0]);
        assert_eq!(s.sizes, vec![2, 1]);
        assert!(screen(&[0.0], &two, 2, 3).is_err());
    }

    #[test]
    fn infinite_tolerance_keeps_everything() {
        let mut bank = EstimatorBank::new();
        bank.push(round(f64::INFINITY, &[1.0, -1e300, 0.0, 5.0]));
        bank.push(round(f64::INFINITY, &[-3.0, 2.0, 0.0, 1e300]));
        assert_eq!(screen(&[0.0], &bank, 4, 2).unwrap().candidates, vec![0, 1, 2, 3]);
    }

    #[test]
    fn unfit_arms_pass_untested() {
        let mut bank = EstimatorBank::new();
        bank.push(BankRound {
            eps: 0.1,
            estimators: vec![constant(1.0), None, constant(0.0)],
        });
        assert_eq!(screen(&[0.0], &bank, 3, 1).unwrap().candidates, vec![0, 1]);
        bank.push(BankRound {
            eps: 0.1,
            estimators: vec![None, None, None],
        });
        assert_eq!(screen(&[0.0], &bank, 3, 2).unwrap().candidates, vec![0, 1]);
    }

    #[test]
    fn empty_bank_draws_uniformly() {
        let bank = EstimatorBank::new();
        let mut rng = stream(11, 2);
        let k = 4;
        let n = 100_000;
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            counts[step(&[0.0], &bank, k, &mut rng).unwrap().0] += 1;
        }
        let p = 1.0 / k as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn singleton_is_always_chosen_and_steps_replay() {
        let mut bank = EstimatorBank::new();
        bank.push(round(0.01, &[0.0, 1.0, 0.0]));
        let mut rng = stream(5, 2);
        for _ in 0..100 {
            assert_eq!(step(&[0.0], &bank, 3, &mut rng).unwrap().0, 1);
        }
        let empty = EstimatorBank::new();
        let draw = |seed| {
            let mut r = stream(seed, 2);
            (0..50).map(|_| step(&[0.0], &empty, 5, &mut r).unwrap().0).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    struct CountingFitter;

    impl EpochFitter for CountingFitter {
        fn fit(&self, batch: &SampleBatch) -> Result<Arc<dyn RewardEstimator>> {
            let n = batch.len() as f64;
            Ok(Arc::new(move |_: &[f64]| n))
        }
    }

    #[test]
    fn end_of_epoch_marks_unfit_and_partitions() {
        let data = vec![
            EpochData {
                covariates: vec![vec![0.0], vec![1.0], vec![2.0]],
                responses: vec![1.0, 2.0, 3.0],
            },
            EpochData::default(),
        ];
        let r = end_of_epoch(&data, 0.3, &CountingFitter).unwrap();
        assert_eq!(r.eps, 0.3);
        assert_eq!(r.estimators[0].as_ref().unwrap().predict(&[0.0]), 3.0);
        assert!(r.estimators[1].is_none());
    }

    #[test]
    fn epoch_policy_fits_at_epoch_ends_only() {
        let env = SineEnv::new(4, 1, 2, 0.1).unwrap();
        let sched = EpochSchedule::new(200, 4, 1, 2.5, 1e-6).unwrap();
        let tau = sched.tau().to_vec();
        let mut p = EpochPolicy::new("count", 2, sched, Box::new(CountingFitter)).unwrap();
        let tr = run_policy(&env, &mut p, 200, 3).unwrap();
        assert_eq!(p.bank().len(), tau.len() - 1);
        // Each round's estimators report per-arm counts, which sum to the epoch length.
        for (round, &len) in p.bank().rounds().iter().zip(&tau) {
            let total: f64 = round.estimators.iter().flatten().map(|f| f.predict(&[])).sum();
            assert_eq!(total as usize, len);
        }
        for s in &tr.steps {
            assert_eq!(s.candidate_sizes[0], 2);
            assert!(s.candidate_sizes.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn identical_arms_give_zero_regret() {
        let env = SineEnv::new(5, 0, 3, 0.05).unwrap();
        let cfg = SparkleConfig {
            c1: 1e-6,
            s0: 1,
            ..SparkleConfig::default()
        };
        let tr = run_sparkle(&env, &cfg, 120, 4).unwrap();
        assert_eq!(tr.steps.len(), 120);
        assert_eq!(tr.final_regret(), 0.0);
    }

    #[test]
    fn single_arm_and_config_errors() {
        let env = SineEnv::new(3, 1, 1, 0.05).unwrap();
        assert!(run_sparkle(&env, &SparkleConfig::default(), 10, 0).is_err());
        let bad = SparkleConfig {
            kernel: Some(KernelSpec::matern_unit(3.5).unwrap()),
            ..SparkleConfig::default()
        };
        assert!(bad.validate().is_err());
        let cfg: SparkleConfig = serde_json::from_str(r#"{"C1": 1e-5, "s0": 3}"#).unwrap();
        assert_eq!(cfg.c1, 1e-5);
        assert_eq!(cfg.c3, 0.01);
        assert!(serde_json::from_str::<SparkleConfig>(r#"{"C9": 1}"#).is_err());
    }
}
