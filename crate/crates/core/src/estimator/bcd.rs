//! Block coordinate descent over coordinates.
//!
//! With `K_j = U diag(l) U^T` (jittered Gram of coordinate `j`) and fitted
//! values `f_j = U v`, the block problem for partial residual `r` reads
//!
//! ```text
//! min_v (1/n)||U^T r - v||^2 + rho ||diag(l)^(-1/2) v|| + (lambda/sqrt n) ||v||
//! ```
//!
//! which is the proximal map of a sum of two norms. Its minimizer is
//! `v = (1 - R2/||w||)_+ w` with `w = r~ - P_E(r~)`, `P_E` the projection onto
//! the ellipsoid `{z : sum_i l_i z_i^2 <= R1^2}`, `R1 = n rho / 2` and
//! `R2 = sqrt(n) lambda / 2`. The projection needs one scalar root, found by
//! Newton's method on the reciprocal norm (monotone from the left).

use std::collections::BTreeMap;

use faer::{Col, Mat, Side};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{validate_problem, FitReport, RegularizationPair};
use crate::additive::{AdditiveFunction, Component, SampleBatch};
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec, DEFAULT_RELATIVE_JITTER};

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Relative objective decrease over one sweep that counts as converged.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Diagonal jitter relative to the kernel variance.
    pub relative_jitter: f64,
    /// Shuffle the block order every sweep with this seed; ascending order when `None`.
    pub shuffle_seed: Option<u64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_sweeps: 500,
            relative_jitter: DEFAULT_RELATIVE_JITTER,
            shuffle_seed: None,
        }
    }
}

/// Eigendecomposition of one coordinate's jittered Gram matrix.
struct Block {
    basis: Mat<f64>,
    eig: Vec<f64>,
}

impl Block {
    fn new(kernel: &KernelSpec, points: &[f64], jitter: f64) -> Result<Self> {
        let g = gram(kernel, points, jitter)?;
        let evd = g
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Gram eigendecomposition failed: {e:?}")))?;
        let n = points.len();
        let s = evd.S();
        let eig = (0..n).map(|i| s[i]).collect();
        Ok(Block {
            basis: evd.U().to_owned(),
            eig,
        })
    }

    /// `U^T r`
    fn project(&self, r: &Col<f64>) -> Col<f64> {
        self.basis.transpose() * r
    }

    /// `U v`
    fn expand(&self, v: &Col<f64>) -> Col<f64> {
        &self.basis * v
    }

    fn rkhs_norm(&self, v: &Col<f64>) -> f64 {
        let mut s = 0.0;
        for (i, &l) in self.eig.iter().enumerate() {
            if l > 0.0 {
                s += v[i] * v[i] / l;
            }
        }
        s.sqrt()
    }

    /// Representer coefficients `U diag(l)^-1 v`.
    fn coefficients(&self, v: &Col<f64>) -> Vec<f64> {
        let scaled = Col::from_fn(v.nrows(), |i| if self.eig[i] > 0.0 { v[i] / self.eig[i] } else { 0.0 });
        let beta = &self.basis * &scaled;
        (0..beta.nrows()).map(|i| beta[i]).collect()
    }
}

/// Exact minimizer of the block problem in eigen-coordinates. Writes into
/// `out` and returns whether the block is nonzero.
pub(crate) fn solve_block(rt: &[f64], eig: &[f64], r1: f64, r2: f64, out: &mut [f64]) -> bool {
    let n = rt.len();
    // w = rt - P_E(rt)
    if r1 <= 0.0 {
        for i in 0..n {
            out[i] = if eig[i] > 0.0 { rt[i] } else { 0.0 };
        }
    } else {
        let s0: f64 = (0..n).filter(|&i| eig[i] > 0.0).map(|i| eig[i] * rt[i] * rt[i]).sum();
        if s0 <= r1 * r1 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return false;
        }
        let nu = ellipsoid_multiplier(rt, eig, r1);
        for i in 0..n {
            out[i] = if eig[i] > 0.0 {
                let t = nu * eig[i];
                rt[i] * t / (1.0 + t)
            } else {
                0.0
            };
        }
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= r2 || norm == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return false;
    }
    let shrink = 1.0 - r2 / norm;
    out.iter_mut().for_each(|o| *o *= shrink);
    true
}

/// Root `nu > 0` of `sum_i l_i r_i^2 / (1 + nu l_i)^2 = R1^2`, assuming the
/// left side exceeds `R1^2` at `nu = 0`.
fn ellipsoid_multiplier(rt: &[f64], eig: &[f64], r1: f64) -> f64 {
    let target = 1.0 / r1;
    let mut nu = 0.0f64;
    for _ in 0..200 {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (i, &l) in eig.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            let den = 1.0 + nu * l;
            let a = l * rt[i] * rt[i];
            s += a / (den * den);
            ds += a * l / (den * den * den);
        }
        let phi = 1.0 / s.sqrt() - target;
        if phi.abs() <= 1e-15 * target {
            break;
        }
        // phi' = S^(-3/2) * sum l^2 r^2 / (1 + nu l)^3
        let dphi = ds / (s * s.sqrt());
        let step = -phi / dphi;
        if !step.is_finite() || step.abs() <= 1e-16 * nu.max(1e-300) {
            break;
        }
        nu += step;
    }
    nu.max(0.0)
}

/// Fits the doubly penalized estimator with tolerance `tol` on the relative
/// objective decrease per sweep and at most `max_sweeps` sweeps.
pub fn fit_doubly_penalized(
    batch: &SampleBatch,
    pair: &RegularizationPair,
    kernel: &KernelSpec,
    tol: f64,
    max_sweeps: usize,
) -> Result<(AdditiveFunction, FitReport)> {
    let opts = FitOptions {
        tol,
        max_sweeps,
        ..FitOptions::default()
    };
    fit_doubly_penalized_with(batch, pair, kernel, &opts)
}

pub fn fit_doubly_penalized_with(
    batch: &SampleBatch,
    pair: &RegularizationPair,
    kernel: &KernelSpec,
    opts: &FitOptions,
) -> Result<(AdditiveFunction, FitReport)> {
    validate_problem(batch, pair)?;
    let n = batch.len();
    let d = batch.dim();
    let nf = n as f64;
    let jitter = opts.relative_jitter * kernel.variance();

    let blocks: Vec<Block> = (0..d)
        .into_par_iter()
        .map(|j| Block::new(kernel, &batch.column(j), jitter))
        .collect::<Result<_>>()?;

    let y = Col::from_fn(n, |i| batch.responses()[i]);
    let r1 = nf * pair.rho / 2.0;
    let r2 = nf.sqrt() * pair.lambda / 2.0;
    let emp_scale = pair.lambda / nf.sqrt();

    let mut coords: Vec<Option<Col<f64>>> = vec![None; d];
    let mut values: Vec<Option<Col<f64>>> = vec![None; d];
    let mut total = Col::<f64>::zeros(n);

    let objective = |total: &Col<f64>, coords: &[Option<Col<f64>>]| -> f64 {
        let mut loss = 0.0;
        for i in 0..n {
            let r = y[i] - total[i];
            loss += r * r;
        }
        let mut pen = 0.0;
        for (b, v) in blocks.iter().zip(coords) {
            if let Some(v) = v {
                pen += pair.rho * b.rkhs_norm(v) + emp_scale * v.norm_l2();
            }
        }
        loss / nf + pen
    };

    let mut trajectory = vec![objective(&total, &coords)];
    let mut order: Vec<usize> = (0..d).collect();
    let mut shuffler = opts.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let mut converged = false;
    let mut sweeps = 0;
    let mut scratch = vec![0.0; n];

    while sweeps < opts.max_sweeps {
        if let Some(rng) = shuffler.as_mut() {
            order.shuffle(rng);
        }
        for &j in &order {
            let mut partial = &y - &total;
            if let Some(fj) = &values[j] {
                partial += fj;
            }
            let rt = blocks[j].project(&partial);
            let rt_slice: Vec<f64> = (0..n).map(|i| rt[i]).collect();
            let nonzero = solve_block(&rt_slice, &blocks[j].eig, r1, r2, &mut scratch);
            if let Some(fj) = values[j].take() {
                total -= &fj;
            }
            if nonzero {
                let v = Col::from_fn(n, |i| scratch[i]);
                let fj = blocks[j].expand(&v);
                total += &fj;
                values[j] = Some(fj);
                coords[j] = Some(v);
            } else {
                coords[j] = None;
            }
        }
        sweeps += 1;
        let prev = *trajectory.last().unwrap();
        let cur = objective(&total, &coords);
        trajectory.push(cur);
        if prev <= 0.0 || (prev - cur) <= opts.tol * prev.abs() {
            converged = true;
            break;
        }
    }

    let mut f = AdditiveFunction::zero(d, *kernel);
    let mut norms = BTreeMap::new();
    for (j, v) in coords.iter().enumerate() {
        if let Some(v) = v {
            norms.insert(j, blocks[j].rkhs_norm(v));
            let comp = Component::new(batch.column(j), blocks[j].coefficients(v))?;
            f = f.with_component(j, comp)?;
        }
    }
    let f = f.pruned_by(&norms);
    let report = FitReport {
        objective_trajectory: trajectory,
        sweeps,
        converged,
        active_set: f.support(),
    };
    log::debug!(
        "doubly penalized fit: n={n} d={d} sweeps={sweeps} converged={converged} active={} (pre-prune {})",
        report.active_set.len(),
        norms.len()
    );
    Ok((f, report))
}
