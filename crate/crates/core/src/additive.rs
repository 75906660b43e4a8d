//! Sparse additive functions `f(x) = sum_j f_j(x_j)` with every component a
//! finite kernel expansion over its own anchor points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Relative threshold below which a component is pruned from the support.
pub const PRUNE_RELATIVE: f64 = 1e-8;

/// One univariate component `f_j(t) = sum_i coeffs[i] * Phi(t, anchors[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub anchors: Vec<f64>,
    pub coeffs: Vec<f64>,
}

impl Component {
    pub fn new(anchors: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != coeffs.len() {
            return Err(Error::input(format!(
                "component needs equally many anchors and coefficients (>= 1), got {} and {}",
                anchors.len(),
                coeffs.len()
            )));
        }
        if anchors.iter().chain(coeffs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("component anchors and coefficients must be finite"));
        }
        Ok(Component { anchors, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, kernel: &KernelSpec, t: f64) -> f64 {
        self.anchors
            .iter()
            .zip(&self.coeffs)
            .map(|(&a, &c)| c * kernel.eval(t, a))
            .sum()
    }

    /// `sqrt(c^T K c)` with `K` the (unjittered) Gram of the anchors.
    pub fn rkhs_norm(&self, kernel: &KernelSpec) -> f64 {
        let n = self.anchors.len();
        let mut q = 0.0;
        for i in 0..n {
            let ci = self.coeffs[i];
            if ci == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for l in 0..n {
                row += kernel.eval(self.anchors[i], self.anchors[l]) * self.coeffs[l];
            }
            q += ci * row;
        }
        q.max(0.0).sqrt()
    }
}

/// A sparse additive function over `dim` coordinates. Coordinates without a
/// component are identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditiveFunction {
    dim: usize,
    kernel: KernelSpec,
    components: BTreeMap<usize, Component>,
}

impl AdditiveFunction {
    pub fn zero(dim: usize, kernel: KernelSpec) -> Self {
        AdditiveFunction {
            dim,
            kernel,
            components: BTreeMap::new(),
        }
    }

    pub fn new(dim: usize, kernel: KernelSpec, components: BTreeMap<usize, Component>) -> Result<Self> {
        if let Some((&j, _)) = components.iter().find(|(&j, _)| j >= dim) {
            return Err(Error::input(format!("component index {j} out of range for dimension {dim}")));
        }
        Ok(AdditiveFunction {
            dim,
            kernel,
            components,
        })
    }

    /// Adds (or replaces) the component for coordinate `j`.
    pub fn with_component(mut self, j: usize, component: Component) -> Result<Self> {
        if j >= self.dim {
            return Err(Error::input(format!("component index {j} out of range for dimension {}", self.dim)));
        }
        self.components.insert(j, component);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn components(&self) -> &BTreeMap<usize, Component> {
        &self.components
    }

    pub fn component(&self, j: usize) -> Option<&Component> {
        self.components.get(&j)
    }

    /// Coordinates whose component has a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.components
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&j, _)| j)
            .collect()
    }

    /// Value of component `j` at the scalar `t` (0 for absent components).
    pub fn component_value(&self, j: usize, t: f64) -> f64 {
        self.components.get(&j).map_or(0.0, |c| c.eval(&self.kernel, t))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::input(format!("point has dimension {}, function expects {}", x.len(), self.dim)));
        }
        Ok(self.evaluate_unchecked(x))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|(&j, c)| c.eval(&self.kernel, x[j]))
            .sum()
    }

    /// Per-component RKHS norms, keyed by coordinate.
    pub fn component_rkhs_norms(&self) -> BTreeMap<usize, f64> {
        self.components
            .iter()
            .map(|(&j, c)| (j, c.rkhs_norm(&self.kernel)))
            .collect()
    }

    /// `sum_j ||f_j||_N`.
    pub fn rkhs_group_norm(&self) -> f64 {
        self.component_rkhs_norms().values().sum()
    }

    /// `sum_j sqrt(mean_i f_j(x_ij)^2)` over the batch covariates.
    pub fn empirical_group_norm(&self, batch: &SampleBatch) -> Result<f64> {
        if batch.dim() != self.dim {
            return Err(Error::input(format!("batch dimension {} does not match function dimension {}", batch.dim(), self.dim)));
        }
        let n = batch.len() as f64;
        Ok(self
            .components
            .iter()
            .map(|(&j, c)| {
                let ss: f64 = batch
                    .rows()
                    .iter()
                    .map(|row| {
                        let v = c.eval(&self.kernel, row[j]);
                        v * v
                    })
                    .sum();
                (ss / n).sqrt()
            })
            .sum())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for comp in out.components.values_mut() {
            for v in &mut comp.coeffs {
                *v *= c;
            }
        }
        out
    }

    /// Drops components whose RKHS norm is at most
    /// `1e-8 * (largest component norm + 1e-12)`, and all-zero components.
    pub fn pruned(&self) -> Self {
        self.pruned_by(&self.component_rkhs_norms())
    }

    /// [`pruned`](Self::pruned) with precomputed component norms.
    pub(crate) fn pruned_by(&self, norms: &BTreeMap<usize, f64>) -> Self {
        let largest = norms.values().copied().fold(0.0, f64::max);
        let cutoff = PRUNE_RELATIVE * (largest + 1e-12);
        let components = self
            .components
            .iter()
            .filter(|(j, c)| !c.is_zero() && norms[j] > cutoff)
            .map(|(&j, c)| (j, c.clone()))
            .collect();
        AdditiveFunction {
            dim: self.dim,
            kernel: self.kernel,
            components,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: AdditiveFunction = serde_json::from_str(s)?;
        for (j, c) in &f.components {
            Component::new(c.anchors.clone(), c.coeffs.clone())?;
            if *j >= f.dim {
                return Err(Error::input(format!("component index {j} out of range for dimension {}", f.dim)));
            }
        }
        Ok(f)
    }
}

/// Observations `(x_i, y_i)` together with their original time indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    covariates: Vec<Vec<f64>>,
    responses: Vec<f64>,
    index_set: Vec<usize>,
}

impl SampleBatch {
    pub fn new(covariates: Vec<Vec<f64>>, responses: Vec<f64>, index_set: Vec<usize>) -> Result<Self> {
        if covariates.is_empty() {
            return Err(Error::input("sample batch must contain at least one observation"));
        }
        if covariates.len() != responses.len() || covariates.len() != index_set.len() {
            return Err(Error::input(format!(
                "sample batch shape mismatch: {} rows, {} responses, {} indices",
                covariates.len(),
                responses.len(),
                index_set.len()
            )));
        }
        let d = covariates[0].len();
        if d == 0 || covariates.iter().any(|r| r.len() != d) {
            return Err(Error::input("all covariate rows must share one positive dimension"));
        }
        if covariates.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("covariates must be finite"));
        }
        Ok(SampleBatch {
            covariates,
            responses,
            index_set,
        })
    }

    /// Batch with index set `0..n`.
    pub fn from_rows(covariates: Vec<Vec<f64>>, responses: Vec<f64>) -> Result<Self> {
        let n = covariates.len();
        Self::new(covariates, responses, (0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.covariates[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.covariates
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    /// The `j`-th coordinate of every row.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.covariates.iter().map(|r| r[j]).collect()
    }

    /// Rows reordered by `perm` (a permutation of `0..n`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        SampleBatch {
            covariates: perm.iter().map(|&i| self.covariates[i].clone()).collect(),
            responses: perm.iter().map(|&i| self.responses[i]).collect(),
            index_set: perm.iter().map(|&i| self.index_set[i]).collect(),
        }
    }
}

/// Gram-based quadratic form for a coefficient vector; used where the anchors
/// already have a Gram matrix at hand.
#[cfg(test)]
pub(crate) fn quadratic_form(kernel: &KernelSpec, anchors: &[f64], coeffs: &[f64]) -> Result<f64> {
    let k = crate::kernel::gram(kernel, anchors, 0.0)?;
    let n = anchors.len();
    let mut q = 0.0;
    for i in 0..n {
        for l in 0..n {
            q += coeffs[i] * k.get(i, l) * coeffs[l];
        }
    }
    Ok(q)
}
