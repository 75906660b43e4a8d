//! Experiment orchestration: JSON configs, replicated runs, output files and
//! the manifest that makes every run replayable.

pub mod diagnostics;
pub mod offline;
pub mod plot;
pub mod stats;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{krr_policy, KSchedule, KnnConfig, KnnUcb, KrrVariant, LassoBandit, LassoConfig};
use crate::env::{EnvSpec, Environment};
use crate::error::{Error, Result};
use crate::policy::{run_policy, OraclePolicy, Policy, PolicyTrace, UniformPolicy};
use crate::sparkle_policy::{sparkle_policy, SparkleConfig};
use plot::{emit_plot_data, write_file, Series};
use stats::confidence_band;

pub const SCHEMA_VERSION: u32 = 1;

/// One policy entry of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// Uses the experiment's `sparkle` constants.
    Sparkle,
    Lasso {
        #[serde(default = "lasso_degree")]
        degree: usize,
        #[serde(default = "one")]
        q0: usize,
        #[serde(default = "five")]
        h0: f64,
        #[serde(default = "hundredth")]
        lambda1: f64,
        #[serde(default = "hundredth")]
        lambda20: f64,
    },
    KnnUcb {
        #[serde(default = "two")]
        theta: f64,
        /// Fixed neighbor count; the adaptive schedule when absent.
        #[serde(default)]
        k: Option<usize>,
    },
    /// Epoch skeleton with product-kernel ridge regression.
    NaiveKrr {
        #[serde(default = "hundredth")]
        lambda0: f64,
    },
    /// Epoch skeleton with additive-kernel ridge regression.
    AdditiveKrr {
        #[serde(default = "hundredth")]
        lambda0: f64,
    },
    Oracle,
    Uniform,
}

fn lasso_degree() -> usize {
    10
}
fn one() -> usize {
    1
}
fn five() -> f64 {
    5.0
}
fn two() -> f64 {
    2.0
}
fn hundredth() -> f64 {
    0.01
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Sparkle => "sparkle",
            PolicySpec::Lasso { .. } => "lasso",
            PolicySpec::KnnUcb { .. } => "knn_ucb",
            PolicySpec::NaiveKrr { .. } => "naive_krr",
            PolicySpec::AdditiveKrr { .. } => "additive_krr",
            PolicySpec::Oracle => "oracle",
            PolicySpec::Uniform => "uniform",
        }
    }

    pub fn build(&self, env: &Arc<dyn Environment>, horizon: usize, sparkle: &SparkleConfig) -> Result<Box<dyn Policy>> {
        let (k, d) = (env.arms(), env.dim());
        Ok(match self {
            PolicySpec::Sparkle => Box::new(sparkle_policy(sparkle, k, d, horizon)?),
            PolicySpec::Lasso { degree, q0, h0, lambda1, lambda20 } => Box::new(LassoBandit::new(
                k,
                d,
                LassoConfig {
                    degree: *degree,
                    q0: *q0,
                    h0: *h0,
                    lambda1: *lambda1,
                    lambda20: *lambda20,
                },
            )?),
            PolicySpec::KnnUcb { theta, k: nn } => Box::new(KnnUcb::new(
                k,
                d,
                KnnConfig {
                    theta: *theta,
                    k_schedule: nn.map_or(KSchedule::Adaptive, KSchedule::Fixed),
                },
            )?),
            PolicySpec::NaiveKrr { lambda0 } | PolicySpec::AdditiveKrr { lambda0 } => {
                let variant = if matches!(self, PolicySpec::NaiveKrr { .. }) {
                    KrrVariant::Naive
                } else {
                    KrrVariant::Additive
                };
                sparkle.validate()?;
                Box::new(krr_policy(variant, *lambda0, sparkle.kernel()?, k, sparkle.epoch_schedule(horizon, d)?)?)
            }
            PolicySpec::Oracle => Box::new(OraclePolicy::new(env.clone())),
            PolicySpec::Uniform => Box::new(UniformPolicy::new(k)),
        })
    }
}

fn default_replications() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn yes() -> bool {
    true
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvSpec,
    pub policies: Vec<PolicySpec>,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub sparkle: SparkleConfig,
    /// Also render the regret band as SVG.
    #[serde(default = "yes")]
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::config(format!("invalid experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks everything that can be checked without running, including that
    /// every policy can be built against the environment.
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("T must be at least 1"));
        }
        if self.policies.is_empty() {
            return Err(Error::config("at least one policy is required"));
        }
        let mut seen = BTreeSet::new();
        for p in &self.policies {
            if !seen.insert(p.name()) {
                return Err(Error::config(format!("policy `{}` is listed twice", p.name())));
            }
        }
        self.seed_base
            .checked_add(self.replications as u64)
            .ok_or_else(|| Error::config("seed range overflows"))?;
        let env: Arc<dyn Environment> = Arc::from(self.environment.build()?);
        for p in &self.policies {
            p.build(&env, self.horizon, &self.sparkle).map_err(|e| match e {
                Error::Input(m) => Error::Config(m),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replications as u64).map(|r| self.seed_base + r).collect()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(self)?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Cumulative regret of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRecord {
    pub policy: String,
    pub seed: u64,
    /// Entry `i` is the cumulative regret after step `i + 1`.
    pub cum_regret: Vec<f64>,
}

impl RegretRecord {
    pub fn from_trace(tr: &PolicyTrace) -> Self {
        RegretRecord {
            policy: tr.policy.clone(),
            seed: tr.seed,
            cum_regret: tr.cumulative_regret(),
        }
    }

    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }
}

/// Runs every (policy, replication) pair on the current rayon pool. Traces
/// come back sorted by (policy, seed) whatever the execution order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PolicyTrace>> {
    cfg.validate()?;
    let env: Arc<dyn Environment> = Arc::from(cfg.environment.build()?);
    let jobs: Vec<(&PolicySpec, u64)> = cfg
        .policies
        .iter()
        .flat_map(|p| cfg.seeds().into_iter().map(move |s| (p, s)))
        .collect();
    let results: Vec<Result<PolicyTrace>> = jobs
        .par_iter()
        .map(|&(spec, seed)| {
            let mut policy = spec.build(&env, cfg.horizon, &cfg.sparkle)?;
            run_policy(env.as_ref(), policy.as_mut(), cfg.horizon, seed)
        })
        .collect();
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        traces.push(r?);
    }
    traces.sort_by(|a, b| a.policy.cmp(&b.policy).then(a.seed.cmp(&b.seed)));
    Ok(traces)
}

/// One output file and its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub wall_time_seconds: f64,
    pub git_revision: String,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::config(format!("invalid manifest: {e}")))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!("unsupported manifest schema version {}", m.schema_version)));
        }
        Ok(m)
    }
}

pub const REGRET_HEADER: &str = "policy,seed,t,cum_regret";

pub fn regret_csv(records: &[RegretRecord]) -> String {
    let mut s = format!("{REGRET_HEADER}\n");
    for r in records {
        for (i, v) in r.cum_regret.iter().enumerate() {
            s.push_str(&format!("{},{},{},{}\n", r.policy, r.seed, i + 1, v));
        }
    }
    s
}

pub fn final_regret_csv(records: &[RegretRecord]) -> String {
    let mut s = String::from("policy,seed,final_regret\n");
    for r in records {
        s.push_str(&format!("{},{},{}\n", r.policy, r.seed, r.final_regret()));
    }
    s
}

/// Per-policy summary of final regret, and how often each policy beats SPARKLE
/// on the same seed.
pub fn comparison_csv(records: &[RegretRecord]) -> Result<String> {
    let mut s = String::from("policy,replications,mean_final_regret,lower,upper,seeds_above_sparkle\n");
    let sparkle: Vec<&RegretRecord> = records.iter().filter(|r| r.policy == "sparkle").collect();
    for name in policy_names(records) {
        let finals: Vec<Vec<f64>> = records
            .iter()
            .filter(|r| r.policy == name)
            .map(|r| vec![r.final_regret()])
            .collect();
        let band = confidence_band(&finals)?;
        let above = records
            .iter()
            .filter(|r| r.policy == name)
            .filter(|r| sparkle.iter().any(|sp| sp.seed == r.seed && sp.final_regret() < r.final_regret()))
            .count();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name, band.replications, band.mean[0], band.lower[0], band.upper[0], above
        ));
    }
    Ok(s)
}

fn policy_names(records: &[RegretRecord]) -> Vec<String> {
    let set: BTreeSet<&str> = records.iter().map(|r| r.policy.as_str()).collect();
    set.into_iter().map(String::from).collect()
}

/// Mean curve and band per policy.
pub fn regret_series(records: &[RegretRecord]) -> Result<Vec<Series>> {
    policy_names(records)
        .into_iter()
        .map(|name| {
            let curves: Vec<Vec<f64>> = records
                .iter()
                .filter(|r| r.policy == name)
                .map(|r| r.cum_regret.clone())
                .collect();
            Ok(Series {
                label: name,
                band: confidence_band(&curves)?,
            })
        })
        .collect()
}

/// Writes all outputs of an experiment into `dir` and returns their
/// manifest entries (not yet including the manifest itself).
pub fn write_outputs(cfg: &ExperimentConfig, traces: &[PolicyTrace], dir: &Path, comparison: bool) -> Result<Vec<OutputEntry>> {
    let records: Vec<RegretRecord> = traces.iter().map(RegretRecord::from_trace).collect();
    let mut files: Vec<PathBuf> = Vec::new();
    for name in policy_names(&records) {
        let mine: Vec<RegretRecord> = records.iter().filter(|r| r.policy == name).cloned().collect();
        let p = dir.join(format!("regret_{name}.csv"));
        write_file(&p, &regret_csv(&mine))?;
        files.push(p);
    }
    for tr in traces {
        let p = dir.join(format!("trace_{}_{}.csv", tr.policy, tr.seed));
        write_file(&p, &tr.to_csv_string())?;
        files.push(p);
    }
    let p = dir.join("final_regret.csv");
    write_file(&p, &final_regret_csv(&records))?;
    files.push(p);
    if comparison {
        let p = dir.join("comparison.csv");
        write_file(&p, &comparison_csv(&records)?)?;
        files.push(p);
    }
    files.extend(emit_plot_data(&regret_series(&records)?, dir, "regret_band", cfg.svg)?);
    files
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            Ok(OutputEntry {
                path: p.strip_prefix(dir).unwrap_or(p).display().to_string(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs the experiment, writes every output plus `manifest.json` into `dir`.
pub fn simulate(cfg: &ExperimentConfig, dir: &Path, comparison: bool) -> Result<RunManifest> {
    let start = Instant::now();
    let traces = run_experiment(cfg)?;
    let outputs = write_outputs(cfg, &traces, dir, comparison)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        config_sha256: cfg.hash()?,
        config: cfg.clone(),
        seeds: cfg.seeds(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        git_revision: "unknown".into(),
        outputs,
    };
    write_file(&dir.join(MANIFEST_FILE), &serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Re-runs the experiment recorded in a manifest into `dir` and lists the
/// outputs whose digest differs from the recorded one.
pub fn replay(manifest: &RunManifest, dir: &Path) -> Result<Vec<String>> {
    if manifest.config.hash()? != manifest.config_sha256 {
        return Err(Error::config("manifest config does not match its recorded hash"));
    }
    let comparison = manifest.outputs.iter().any(|o| o.path == "comparison.csv");
    let fresh = simulate(&manifest.config, dir, comparison)?;
    let mut mismatched = Vec::new();
    for old in &manifest.outputs {
        match fresh.outputs.iter().find(|o| o.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            _ => mismatched.push(old.path.clone()),
        }
    }
    Ok(mismatched)
}
