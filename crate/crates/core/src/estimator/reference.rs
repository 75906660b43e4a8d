//! ADMM solver for the same convex program, used to cross-check the block
//! coordinate descent on small instances.
//!
//! In Cholesky coordinates `u_j = L_j^T beta_j` (with `K_j = L_j L_j^T`) the
//! problem is
//!
//! ```text
//! min_u (1/n)||y - A u||^2 + rho sum_j ||u_j|| + mu sum_j ||L_j u_j||,   mu = lambda / sqrt(n)
//! ```
//!
//! with `A = [L_1 ... L_d]`. We split `p = u` and `w_j = L_j u_j`, so both
//! penalties become plain group soft-thresholds and the `u` step is one
//! prefactored linear solve.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::{validate_problem, RegularizationPair};
use crate::additive::{AdditiveFunction, Component, SampleBatch};
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec, DEFAULT_RELATIVE_JITTER};

fn group_shrink(v: &[f64], t: f64, out: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= t {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        let s = 1.0 - t / norm;
        for (o, x) in out.iter_mut().zip(v) {
            *o = s * x;
        }
    }
}

fn lower_mul(l: &Mat<f64>, v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[(i, k)] * v[k];
        }
        out[i] = s;
    }
}

/// Runs `iters` ADMM iterations and returns the best iterate by objective.
pub fn fit_reference(
    batch: &SampleBatch,
    pair: &RegularizationPair,
    kernel: &KernelSpec,
    iters: usize,
) -> Result<AdditiveFunction> {
    validate_problem(batch, pair)?;
    let n = batch.len();
    let d = batch.dim();
    let nf = n as f64;
    let mu = pair.lambda / nf.sqrt();
    let y = batch.responses();
    let jitter = DEFAULT_RELATIVE_JITTER * kernel.variance();

    let factors: Vec<Mat<f64>> = (0..d)
        .map(|j| {
            let g = gram(kernel, &batch.column(j), jitter)?;
            let llt = g
                .to_faer()
                .llt(Side::Lower)
                .map_err(|e| Error::Numerical(format!("Cholesky failed: {e:?}")))?;
            Ok(llt.L().to_owned())
        })
        .collect::<Result<_>>()?;

    let big = n * d;
    // A^T A has blocks L_i^T L_j; B^T B is block diagonal with L_j^T L_j.
    let mut ata = Mat::<f64>::zeros(big, big);
    for a in 0..d {
        for b in 0..d {
            let blk = factors[a].transpose() * &factors[b];
            for i in 0..n {
                for k in 0..n {
                    ata[(a * n + i, b * n + k)] = blk[(i, k)];
                }
            }
        }
    }
    let mut aty = vec![0.0; big];
    for a in 0..d {
        for i in 0..n {
            aty[a * n + i] = (0..n).map(|r| factors[a][(r, i)] * y[r]).sum();
        }
    }

    let objective = |u: &[f64]| -> f64 {
        let mut fitted = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut pen = 0.0;
        for j in 0..d {
            let uj = &u[j * n..(j + 1) * n];
            lower_mul(&factors[j], uj, &mut tmp);
            for i in 0..n {
                fitted[i] += tmp[i];
            }
            pen += pair.rho * uj.iter().map(|x| x * x).sum::<f64>().sqrt();
            pen += mu * tmp.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        let loss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
        loss / nf + pen
    };

    let factor_system = |alpha: f64| -> Result<_> {
        let mut sys = Mat::<f64>::from_fn(big, big, |i, k| 2.0 / nf * ata[(i, k)]);
        for j in 0..d {
            let btb = factors[j].transpose() * &factors[j];
            for i in 0..n {
                for k in 0..n {
                    sys[(j * n + i, j * n + k)] += alpha * btb[(i, k)];
                }
                sys[(j * n + i, j * n + i)] += alpha;
            }
        }
        sys.llt(Side::Lower)
            .map_err(|e| Error::Numerical(format!("ADMM system factorization failed: {e:?}")))
    };

    let mut alpha = 1.0;
    let mut system = factor_system(alpha)?;
    let mut u = vec![0.0; big];
    let mut p = vec![0.0; big];
    let mut w = vec![0.0; big];
    let mut a_dual = vec![0.0; big];
    let mut b_dual = vec![0.0; big];
    let mut bu = vec![0.0; big];
    let mut best = p.clone();
    let mut best_obj = objective(&p);

    for it in 0..iters {
        // u step
        let mut rhs = Mat::<f64>::zeros(big, 1);
        for j in 0..d {
            let s = j * n..(j + 1) * n;
            let shifted: Vec<f64> = s.clone().map(|i| w[i] - b_dual[i]).collect();
            for i in 0..n {
                // L_j^T (w_j - b_j)
                let lt: f64 = (i..n).map(|r| factors[j][(r, i)] * shifted[r]).sum();
                rhs[(j * n + i, 0)] = 2.0 / nf * aty[j * n + i] + alpha * (p[j * n + i] - a_dual[j * n + i]) + alpha * lt;
            }
        }
        let sol = system.solve(&rhs);
        for i in 0..big {
            u[i] = sol[(i, 0)];
        }
        for j in 0..d {
            lower_mul(&factors[j], &u[j * n..(j + 1) * n], &mut bu[j * n..(j + 1) * n]);
        }

        // p and w steps
        let p_old = p.clone();
        let w_old = w.clone();
        for j in 0..d {
            let s = j * n..(j + 1) * n;
            let vp: Vec<f64> = s.clone().map(|i| u[i] + a_dual[i]).collect();
            group_shrink(&vp, pair.rho / alpha, &mut p[s.clone()]);
            let vw: Vec<f64> = s.clone().map(|i| bu[i] + b_dual[i]).collect();
            group_shrink(&vw, mu / alpha, &mut w[s]);
        }

        // dual steps
        let mut primal = 0.0;
        for i in 0..big {
            a_dual[i] += u[i] - p[i];
            b_dual[i] += bu[i] - w[i];
            primal += (u[i] - p[i]).powi(2) + (bu[i] - w[i]).powi(2);
        }

        let obj = objective(&p);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&p);
        }

        // residual balancing
        if it % 50 == 49 && it + 1 < iters {
            let mut dual = 0.0;
            for j in 0..d {
                let s = j * n..(j + 1) * n;
                let dw: Vec<f64> = s.clone().map(|i| w[i] - w_old[i]).collect();
                for i in 0..n {
                    let lt: f64 = (i..n).map(|r| factors[j][(r, i)] * dw[r]).sum();
                    dual += (p[j * n + i] - p_old[j * n + i] + lt).powi(2);
                }
            }
            let (primal, dual) = (primal.sqrt(), alpha * dual.sqrt());
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                alpha *= factor;
                for i in 0..big {
                    a_dual[i] /= factor;
                    b_dual[i] /= factor;
                }
                system = factor_system(alpha)?;
            }
        }
    }

    let mut f = AdditiveFunction::zero(d, *kernel);
    for j in 0..d {
        let pj = &best[j * n..(j + 1) * n];
        if pj.iter().all(|&x| x == 0.0) {
            continue;
        }
        // beta_j = L_j^{-T} p_j
        let mut beta = Mat::<f64>::from_fn(n, 1, |i, _| pj[i]);
        factors[j].transpose().solve_upper_triangular_in_place(&mut beta);
        let coeffs = (0..n).map(|i| beta[(i, 0)]).collect();
        f = f.with_component(j, Component::new(batch.column(j), coeffs)?)?;
    }
    Ok(f.pruned())
}
