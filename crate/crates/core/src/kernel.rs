//! Stationary one-dimensional Matérn kernels and Gram matrices.
//!
//! The smoothness is parameterized by the Sobolev order `m > 3/2`; the
//! Matérn order is `nu = m - 1/2`. Orders 3/2 and 5/2 use their closed forms,
//! other half-integer orders the polynomial-times-exponential expansion, and
//! everything else the modified Bessel expression.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::bessel_k;

/// Default diagonal jitter relative to the kernel variance.
pub const DEFAULT_RELATIVE_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Matern,
}

/// A validated stationary kernel `Phi(x, y) = variance * rho(|x - y| / lengthscale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    family: KernelFamily,
    m: f64,
    lengthscale: f64,
    variance: f64,
    form: MaternForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MaternForm {
    ThreeHalves,
    FiveHalves,
    /// `nu = p + 1/2` with `p` given.
    HalfInteger(u32),
    /// Bessel form with the normalizing constant `2^(1-nu) / Gamma(nu)`.
    General { norm: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelSpec {
    family: KernelFamily,
    m: f64,
    #[serde(default = "one")]
    lengthscale: f64,
    #[serde(default = "one")]
    variance: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        match raw.family {
            KernelFamily::Matern => KernelSpec::matern(raw.m, raw.lengthscale, raw.variance),
        }
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(k: KernelSpec) -> Self {
        RawKernelSpec {
            family: k.family,
            m: k.m,
            lengthscale: k.lengthscale,
            variance: k.variance,
        }
    }
}

impl KernelSpec {
    /// Matérn kernel of Sobolev order `m` (Matérn order `m - 1/2`).
    pub fn matern(m: f64, lengthscale: f64, variance: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.5) {
            return Err(Error::config(format!("kernel smoothness m must exceed 3/2, got {m}")));
        }
        if !(lengthscale.is_finite() && lengthscale > 0.0) {
            return Err(Error::config(format!("kernel lengthscale must be positive, got {lengthscale}")));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::config(format!("kernel variance must be positive, got {variance}")));
        }
        let nu = m - 0.5;
        let twice = 2.0 * nu;
        let form = if nu == 1.5 {
            MaternForm::ThreeHalves
        } else if nu == 2.5 {
            MaternForm::FiveHalves
        } else if twice.fract() == 0.0 && (twice as u64) % 2 == 1 && twice < 200.0 {
            MaternForm::HalfInteger(((twice as u64 - 1) / 2) as u32)
        } else {
            let norm = 2f64.powf(1.0 - nu) / statrs::function::gamma::gamma(nu);
            MaternForm::General { norm }
        };
        Ok(KernelSpec {
            family: KernelFamily::Matern,
            m,
            lengthscale,
            variance,
            form,
        })
    }

    /// Unit-variance, unit-lengthscale Matérn kernel of order `m`.
    pub fn matern_unit(m: f64) -> Result<Self> {
        Self::matern(m, 1.0, 1.0)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn smoothness(&self) -> f64 {
        self.m
    }

    /// Matérn order `nu = m - 1/2`.
    pub fn nu(&self) -> f64 {
        self.m - 0.5
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// The unit-variance correlation at distance `r >= 0` (already divided by the lengthscale).
    pub fn correlation(&self, r: f64) -> f64 {
        matern_correlation(self.form, self.nu(), r)
    }

    /// `Phi(x, y)`.
    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.variance * self.correlation((x - y).abs() / self.lengthscale)
    }
}

fn matern_correlation(form: MaternForm, nu: f64, r: f64) -> f64 {
    match form {
        MaternForm::ThreeHalves => {
            let z = 3f64.sqrt() * r;
            (1.0 + z) * (-z).exp()
        }
        MaternForm::FiveHalves => {
            let z = 5f64.sqrt() * r;
            (1.0 + z + z * z / 3.0) * (-z).exp()
        }
        MaternForm::HalfInteger(p) => {
            // exp(-sqrt(2 nu) r) p!/(2p)! sum_i (p+i)!/(i!(p-i)!) (2 sqrt(2 nu) r)^(p-i)
            let z = (2.0 * nu).sqrt() * r;
            let p = p as usize;
            let mut sum = 0.0;
            for i in 0..=p {
                let mut coef = 1.0;
                // (p+i)! / (i! (p-i)!) * p! / (2p)!
                for k in (p - i + 1)..=(p + i) {
                    coef *= k as f64;
                }
                for k in 1..=i {
                    coef /= k as f64;
                }
                for k in (p + 1)..=(2 * p) {
                    coef /= k as f64;
                }
                sum += coef * (2.0 * z).powi((p - i) as i32);
            }
            sum * (-z).exp()
        }
        MaternForm::General { norm } => {
            let z = (2.0 * nu).sqrt() * r;
            if z < 1e-12 {
                return 1.0;
            }
            if z > 700.0 {
                return 0.0;
            }
            (norm * z.powf(nu) * bessel_k(nu, z)).min(1.0)
        }
    }
}

/// Dense symmetric kernel matrix over a point sequence, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<f64>,
    jitter: f64,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.entries[i * self.size + l]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.size, self.size, |i, l| self.get(i, l))
    }

    /// Smallest eigenvalue (including the jitter).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.size == 0 {
            return Ok(0.0);
        }
        let evd = self
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        Ok(evd.S()[0])
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for l in (i + 1)..self.size {
                worst = worst.max((self.get(i, l) - self.get(l, i)).abs());
            }
        }
        worst
    }
}

/// Gram matrix `K[i][l] = Phi(points[i], points[l]) + jitter * [i == l]`.
pub fn gram(spec: &KernelSpec, points: &[f64], jitter: f64) -> Result<GramMatrix> {
    if !(jitter.is_finite() && jitter >= 0.0) {
        return Err(Error::input(format!("jitter must be a finite non-negative number, got {jitter}")));
    }
    if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::input(format!("non-finite point {bad} in Gram input")));
    }
    let n = points.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = spec.variance() + jitter;
        for l in (i + 1)..n {
            let v = spec.eval(points[i], points[l]);
            entries[i * n + l] = v;
            entries[l * n + i] = v;
        }
    }
    Ok(GramMatrix {
        size: n,
        entries,
        jitter,
    })
}

/// Gram matrix with the default jitter `1e-10 * variance`.
pub fn gram_default(spec: &KernelSpec, points: &[f64]) -> Result<GramMatrix> {
    gram(spec, points, DEFAULT_RELATIVE_JITTER * spec.variance())
}
