//! The doubly penalized sparse additive estimator
//!
//! ```text
//! min_f  (1/n) sum_i (y_i - f(x_i))^2 + rho * sum_j ||f_j||_N + lambda * sum_j ||f_j||_n
//! ```
//!
//! where `||.||_N` is the RKHS norm of the shared kernel and `||.||_n` the
//! empirical norm over the sample. By the representer theorem every component
//! is a kernel expansion over the sample's `j`-th coordinates.
//!
//! [`fit_doubly_penalized`] is the production solver (block coordinate descent
//! with exact spectral block updates); [`fit_reference`] is an independent
//! ADMM solver kept as a validation oracle.

mod bcd;
mod reference;

use serde::{Deserialize, Serialize};

pub use bcd::{fit_doubly_penalized, fit_doubly_penalized_with, FitOptions};
pub use reference::fit_reference;

use crate::additive::{AdditiveFunction, SampleBatch};
use crate::error::{Error, Result};

/// Constants of the regularization schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSchedule {
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    pub m: f64,
}

impl RegularizationSchedule {
    pub fn new(c3: f64, c4: f64, m: f64) -> Result<Self> {
        let s = RegularizationSchedule { c3, c4, m };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c3.is_finite() && self.c3 > 0.0 && self.c4.is_finite() && self.c4 > 0.0) {
            return Err(Error::config(format!("C3 and C4 must be positive, got {} and {}", self.c3, self.c4)));
        }
        if !(self.m.is_finite() && self.m > 1.5) {
            return Err(Error::config(format!("smoothness m must exceed 3/2, got {}", self.m)));
        }
        Ok(())
    }
}

/// Penalty weights `(rho, lambda)` plus the intermediate rates `w` and `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationPair {
    pub rho: f64,
    pub lambda: f64,
    pub w: f64,
    pub gamma: f64,
}

impl RegularizationPair {
    /// A pair with explicit penalties; `w` and `gamma` are informational only.
    pub fn explicit(rho: f64, lambda: f64) -> Self {
        RegularizationPair {
            rho,
            lambda,
            w: if lambda > 0.0 { rho / lambda } else { f64::NAN },
            gamma: f64::NAN,
        }
    }
}

/// Rate-driven penalties for sample size `n`, dimension `d`, confidence `delta`:
///
/// ```text
/// base   = C4^(2m/(2m+1)) n^(-m/(2m+1))
/// tail   = sqrt(log(d/delta) / n)
/// w      = max(base, tail)
/// gamma  = min(base, C4 n^(-1/2) (log(d/delta)/n)^(-1/(4m)))
/// lambda = C3 (gamma + tail),   rho = lambda * w
/// ```
pub fn schedule(n: usize, d: usize, delta: f64, sched: &RegularizationSchedule) -> Result<RegularizationPair> {
    if n == 0 || d == 0 {
        return Err(Error::input(format!("schedule needs n >= 1 and d >= 1, got n={n}, d={d}")));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::input(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    sched.validate()?;
    let m = sched.m;
    let n = n as f64;
    let log_term = (d as f64 / delta).ln();
    let base = sched.c4.powf(2.0 * m / (2.0 * m + 1.0)) * n.powf(-m / (2.0 * m + 1.0));
    let tail = (log_term / n).sqrt();
    let w = base.max(tail);
    let gamma = base.min(sched.c4 * n.powf(-0.5) * (log_term / n).powf(-1.0 / (4.0 * m)));
    let lambda = sched.c3 * (gamma + tail);
    Ok(RegularizationPair {
        rho: lambda * w,
        lambda,
        w,
        gamma,
    })
}

/// Diagnostics of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Objective after initialization (zero function) and after every sweep.
    pub objective_trajectory: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub active_set: Vec<usize>,
}

impl FitReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trajectory.last().unwrap_or(&f64::NAN)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The penalized empirical risk of `f` on `batch`.
pub fn objective(f: &AdditiveFunction, batch: &SampleBatch, pair: &RegularizationPair) -> Result<f64> {
    let n = batch.len() as f64;
    let mut loss = 0.0;
    for (row, &y) in batch.rows().iter().zip(batch.responses()) {
        let r = y - f.evaluate(row)?;
        loss += r * r;
    }
    Ok(loss / n + pair.rho * f.rkhs_group_norm() + pair.lambda * f.empirical_group_norm(batch)?)
}

pub(crate) fn validate_problem(batch: &SampleBatch, pair: &RegularizationPair) -> Result<()> {
    if batch.responses().iter().any(|y| !y.is_finite()) {
        return Err(Error::input("responses must be finite"));
    }
    if !(pair.rho.is_finite() && pair.rho >= 0.0 && pair.lambda.is_finite() && pair.lambda >= 0.0) {
        return Err(Error::input(format!(
            "penalties must be finite and non-negative, got rho={} lambda={}",
            pair.rho, pair.lambda
        )));
    }
    Ok(())
}
