//! Confidence bands and least-squares fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Mean curve with a two-sided 95% t-interval at each point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub replications: usize,
}

/// Pointwise band over equally long curves. With one curve the band collapses to it.
pub fn confidence_band(curves: &[Vec<f64>]) -> Result<Band> {
    let r = curves.len();
    if r == 0 {
        return Ok(Band {
            mean: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            replications: 0,
        });
    }
    let len = curves[0].len();
    if curves.iter().any(|c| c.len() != len) {
        return Err(Error::input("curves in a band must have equal length"));
    }
    let q = if r > 1 {
        StudentsT::new(0.0, 1.0, (r - 1) as f64)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .inverse_cdf(0.975)
    } else {
        0.0
    };
    let rf = r as f64;
    let mut band = Band {
        mean: Vec::with_capacity(len),
        lower: Vec::with_capacity(len),
        upper: Vec::with_capacity(len),
        replications: r,
    };
    for i in 0..len {
        let m = curves.iter().map(|c| c[i]).sum::<f64>() / rf;
        let half = if r > 1 {
            let var = curves.iter().map(|c| (c[i] - m).powi(2)).sum::<f64>() / (rf - 1.0);
            q * (var / rf).sqrt()
        } else {
            0.0
        };
        band.mean.push(m);
        band.lower.push(m - half);
        band.upper.push(m + half);
    }
    Ok(band)
}

/// Sweep axis of an exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    T,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "d")]
    D,
    /// Anything else, e.g. the sample size of an offline study.
    #[serde(rename = "other")]
    Other,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(Axis::T),
            "s" => Ok(Axis::S),
            "d" => Ok(Axis::D),
            "other" => Ok(Axis::Other),
            _ => Err(Error::config(format!("unknown axis `{s}`, expected T, s or d"))),
        }
    }
}

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub axis: Axis,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub std_error: f64,
    /// Two-sided p-value of the slope against zero.
    pub p_value: f64,
    pub points: usize,
}

pub fn ols(x: &[f64], y: &[f64], axis: Axis) -> Result<ExponentFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::input("x and y must have equal length"));
    }
    if n < 3 {
        return Err(Error::input(format!("a fit needs at least 3 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::input("fit data must be finite"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::input("all x values coincide"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 };
    let df = nf - 2.0;
    let std_error = (sse / df / sxx).sqrt();
    let p_value = if std_error == 0.0 {
        0.0
    } else {
        let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(e.to_string()))?;
        2.0 * (1.0 - t.cdf((slope / std_error).abs()))
    };
    Ok(ExponentFit {
        axis,
        slope,
        intercept,
        r_squared,
        std_error,
        p_value,
        points: n,
    })
}

/// Final regrets of all replications at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub final_regrets: Vec<f64>,
}

/// OLS of log mean final regret on log sweep value, one point per sweep value.
pub fn fit_exponent(points: &[SweepPoint], axis: Axis) -> Result<ExponentFit> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        if p.final_regrets.is_empty() {
            return Err(Error::input(format!("sweep value {} has no records", p.value)));
        }
        let mean = p.final_regrets.iter().sum::<f64>() / p.final_regrets.len() as f64;
        if !(p.value > 0.0 && mean > 0.0) {
            return Err(Error::input(format!(
                "log fit needs positive values, got value {} with mean regret {mean}",
                p.value
            )));
        }
        pts.push((p.value.ln(), mean.ln()));
    }
    // Sorting makes the result independent of record order to the last bit.
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    ols(&x, &y, axis)
}

/// Groups `(value, final_regret)` rows into sweep points, ordered by value.
pub fn group_sweep(rows: &[(f64, f64)]) -> Vec<SweepPoint> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<SweepPoint> = Vec::new();
    for (v, r) in sorted {
        match out.last_mut() {
            Some(p) if p.value == v => p.final_regrets.push(r),
            _ => out.push(SweepPoint {
                value: v,
                final_regrets: vec![r],
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_power_law_slope() {
        let pts: Vec<SweepPoint> = [300.0, 600.0, 1200.0, 2400.0]
            .iter()
            .map(|&t: &f64| SweepPoint {
                value: t,
                final_regrets: vec![3.7 * t.powf(0.5)],
            })
            .collect();
        let f = fit_exponent(&pts, Axis::T).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-10);
        assert!((f.intercept - 3.7f64.ln()).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(fit_exponent(&rev, Axis::T).unwrap(), f);
    }

    #[test]
    fn ols_against_hand_computation() {
        // y = 1 + 2x with residuals (+1, -1, -1, +1): sse = 4, sxx = 5.
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [2.0, 2.0, 4.0, 8.0];
        let f = ols(&x, &y, Axis::Other).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.std_error - (4.0f64 / 2.0 / 5.0).sqrt()).abs() < 1e-14);
        assert!((f.r_squared - (1.0 - 4.0 / 24.0)).abs() < 1e-14);
        // t = 2 / sqrt(0.4) on 2 degrees of freedom.
        assert!((f.p_value - 0.087_129_070_824_723_14).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(ols(&[1.0, 2.0], &[1.0, 2.0], Axis::T).is_err());
        let pts = group_sweep(&[(1.0, 2.0), (1.0, 3.0), (2.0, 1.0)]);
        assert_eq!(pts.len(), 2);
        assert!(fit_exponent(&pts, Axis::S).is_err());
    }

    #[test]
    fn band_uses_t_quantiles() {
        let curves = vec![vec![0.0, 1.0], vec![0.0, 3.0]];
        let b = confidence_band(&curves).unwrap();
        assert_eq!(b.mean, vec![0.0, 2.0]);
        // t_{0.975, 1} = 12.706..., sd = sqrt(2), se = 1.
        assert!((b.upper[1] - 2.0 - 12.706_204_736_432_095).abs() < 1e-8);
        assert_eq!(b.lower[0], 0.0);
        let one = confidence_band(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(one.lower, one.upper);
        assert!(confidence_band(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
