//! The policy contract, the interaction loop and the per-step trace.

use std::io::Write;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Environment, RngLike};
use crate::error::{Error, Result};

/// Random stream identifiers derived from one replication seed.
pub const CONTEXT_STREAM: u64 = 0;
pub const NOISE_STREAM: u64 = 1;
pub const POLICY_STREAM: u64 = 2;

/// A seeded ChaCha8 generator on a given stream.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// What a policy reports when it picks an arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    /// Epoch the step belongs to; 0 for policies without epochs.
    pub epoch: usize,
    /// Candidate-set size after each screening round, starting with the full arm set.
    pub candidate_sizes: Vec<usize>,
}

impl Decision {
    pub fn plain(arm: usize, arms: usize) -> Self {
        Decision {
            arm,
            epoch: 0,
            candidate_sizes: vec![arms],
        }
    }

    pub fn final_candidate_size(&self) -> usize {
        *self.candidate_sizes.last().unwrap_or(&0)
    }
}

/// Observe a context, choose an arm, receive its reward.
pub trait Policy: Send {
    fn name(&self) -> &str;
    fn arms(&self) -> usize;
    /// `t` is 1-based.
    fn choose(&mut self, t: usize, x: &[f64], rng: &mut ChaCha8Rng) -> Result<Decision>;
    fn update(&mut self, t: usize, x: &[f64], arm: usize, reward: f64) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub epoch: usize,
    pub x: Vec<f64>,
    pub candidate_sizes: Vec<usize>,
    pub arm: usize,
    pub reward: f64,
    pub oracle_arm: usize,
    pub regret: f64,
    pub cum_regret: f64,
}

/// Per-step record of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicyTrace {
    pub policy: String,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
}

pub const TRACE_HEADER: &str = "t,epoch,x,candidate_size,arm,reward,regret,cum_regret";

impl PolicyTrace {
    pub fn final_regret(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cum_regret)
    }

    pub fn cumulative_regret(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.cum_regret).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for s in &self.steps {
            let x: Vec<String> = s.x.iter().map(|v| v.to_string()).collect();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                s.t,
                s.epoch,
                x.join(";"),
                s.candidate_sizes.last().copied().unwrap_or(0),
                s.arm,
                s.reward,
                s.regret,
                s.cum_regret
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Parses the `x` and `arm` columns of a trace CSV.
    pub fn read_points(csv: &str) -> Result<Vec<(Vec<f64>, usize)>> {
        let mut lines = csv.lines();
        match lines.next() {
            Some(h) if h.trim() == TRACE_HEADER => {}
            _ => return Err(Error::input("trace CSV must start with the trace header")),
        }
        let mut out = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(Error::input(format!("trace line {} has {} columns", i + 2, cols.len())));
            }
            let x = cols[2]
                .split(';')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::input(format!("trace line {}: {e}", i + 2)))?;
            let arm = cols[4]
                .parse::<usize>()
                .map_err(|e| Error::input(format!("trace line {}: {e}", i + 2)))?;
            out.push((x, arm));
        }
        Ok(out)
    }
}

/// Runs `policy` on `env` for `horizon` steps.
///
/// Contexts, reward noise and the policy's own randomness come from separate
/// streams of `seed`, and noise is drawn for every arm at every step, so two
/// policies run with the same seed see identical contexts and identical
/// potential rewards.
pub fn run_policy(env: &dyn Environment, policy: &mut dyn Policy, horizon: usize, seed: u64) -> Result<PolicyTrace> {
    let k = env.arms();
    if policy.arms() != k {
        return Err(Error::config(format!("policy has {} arms, environment has {k}", policy.arms())));
    }
    let mut ctx_rng = stream(seed, CONTEXT_STREAM);
    let mut noise_rng = stream(seed, NOISE_STREAM);
    let mut policy_rng = stream(seed, POLICY_STREAM);
    let sd = env.noise_var().sqrt();
    let pname = policy.name().to_string();
    let wrap = |message: String| Error::Run {
        policy: pname.clone(),
        seed,
        message,
    };

    let mut steps = Vec::with_capacity(horizon);
    let mut cum = 0.0;
    let mut noise = vec![0.0; k];
    for t in 1..=horizon {
        let x = env.sample_context(&mut ctx_rng);
        for z in noise.iter_mut() {
            *z = noise_rng.standard_normal();
        }
        let decision = policy.choose(t, &x, &mut policy_rng).map_err(|e| wrap(e.to_string()))?;
        if decision.arm >= k {
            return Err(wrap(format!("chose arm {} of {k}", decision.arm)));
        }
        let mean = env.mean_reward(decision.arm, &x);
        let reward = mean + sd * noise[decision.arm];
        let (oracle_arm, best) = env.oracle(&x);
        let regret = (best - mean).max(0.0);
        cum += regret;
        policy.update(t, &x, decision.arm, reward).map_err(|e| wrap(e.to_string()))?;
        steps.push(TraceStep {
            t,
            epoch: decision.epoch,
            x,
            candidate_sizes: decision.candidate_sizes,
            arm: decision.arm,
            reward,
            oracle_arm,
            regret,
            cum_regret: cum,
        });
    }
    Ok(PolicyTrace {
        policy: policy.name().to_string(),
        seed,
        steps,
    })
}

/// Plays the environment's best arm.
pub struct OraclePolicy {
    env: Arc<dyn Environment>,
}

impl OraclePolicy {
    pub fn new(env: Arc<dyn Environment>) -> Self {
        OraclePolicy { env }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn arms(&self) -> usize {
        self.env.arms()
    }

    fn choose(&mut self, _t: usize, x: &[f64], _rng: &mut ChaCha8Rng) -> Result<Decision> {
        Ok(Decision::plain(self.env.oracle(x).0, self.env.arms()))
    }

    fn update(&mut self, _t: usize, _x: &[f64], _arm: usize, _reward: f64) -> Result<()> {
        Ok(())
    }
}

/// Uniformly random arm at every step.
pub struct UniformPolicy {
    arms: usize,
}

impl UniformPolicy {
    pub fn new(arms: usize) -> Self {
        UniformPolicy { arms }
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn arms(&self) -> usize {
        self.arms
    }

    fn choose(&mut self, _t: usize, _x: &[f64], rng: &mut ChaCha8Rng) -> Result<Decision> {
        use rand::Rng;
        Ok(Decision::plain(rng.random_range(0..self.arms), self.arms))
    }

    fn update(&mut self, _t: usize, _x: &[f64], _arm: usize, _reward: f64) -> Result<()> {
        Ok(())
    }
}
