//! The Fisher metric of an exponential family as the Hessian of `G`.
//!
//! `grad^2 G(theta)` is the covariance of the sufficient statistic under
//! `theta`; [`fisher_mc_check`] compares the two by sampling.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{for_each_sample, FamilySpec};
use crate::linalg;

/// Metric tensor at a point, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricAtPoint {
    pub theta: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl MetricAtPoint {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.matrix.len();
        DMatrix::from_fn(d, d, |i, j| self.matrix[i][j])
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `grad^2 G(theta)`, analytic where the family provides it and otherwise
/// central differences of `grad G`. The result is symmetrized.
pub fn fisher_metric(fam: &FamilySpec, theta: &[f64]) -> Result<MetricAtPoint> {
    fam.check_natural("theta", theta)?;
    let h = fam.log_partition().hessian(theta)?;
    let sym = (&h + h.transpose()) * 0.5;
    Ok(MetricAtPoint {
        theta: theta.to_vec(),
        matrix: rows(&sym),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherCheck {
    pub theta: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub analytic: Vec<Vec<f64>>,
    pub empirical: Vec<Vec<f64>>,
    /// `empirical - analytic`, entrywise.
    pub deviation: Vec<Vec<f64>>,
    /// Standard error of each empirical covariance entry.
    pub std_error: Vec<Vec<f64>>,
    pub within_3se: bool,
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// Draws `n` samples at `theta` and compares their covariance with the
/// metric. Standard errors come from the empirical fourth moments.
pub fn fisher_mc_check(fam: &FamilySpec, theta: &[f64], n: usize, seed: u64) -> Result<FisherCheck> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::Config(format!(
            "Monte-Carlo check needs at least {MIN_MC_SAMPLES} samples, got {n}"
        )));
    }
    let metric = fisher_metric(fam, theta)?;
    let mu = fam.to_mean(theta)?;
    let d = mu.len();
    // Moments of c = phi - mu, shifted by the exact mean for stability.
    let mut s1 = vec![0.0; d];
    let mut s2 = vec![0.0; d * d];
    let mut s4 = vec![0.0; d * d];
    let mut c = vec![0.0; d];
    for_each_sample(fam, theta, n, seed, |x| {
        for j in 0..d {
            c[j] = x[j] - mu[j];
            s1[j] += c[j];
        }
        for i in 0..d {
            for j in 0..d {
                let p = c[i] * c[j];
                s2[i * d + j] += p;
                s4[i * d + j] += p * p;
            }
        }
    })?;
    let nf = n as f64;
    let mut empirical = vec![vec![0.0; d]; d];
    let mut deviation = vec![vec![0.0; d]; d];
    let mut std_error = vec![vec![0.0; d]; d];
    let mut within = true;
    for i in 0..d {
        for j in 0..d {
            let m2 = s2[i * d + j] / nf;
            let cov = (m2 - (s1[i] / nf) * (s1[j] / nf)) * nf / (nf - 1.0);
            let se = ((s4[i * d + j] / nf - m2 * m2).max(0.0) / nf).sqrt();
            let dev = cov - metric.matrix[i][j];
            empirical[i][j] = cov;
            deviation[i][j] = dev;
            std_error[i][j] = se;
            // A zero standard error only happens for degenerate entries,
            // which must then match to rounding.
            within &= dev.abs() <= 3.0 * se || dev.abs() <= 1e-12;
        }
    }
    Ok(FisherCheck {
        theta: theta.to_vec(),
        n,
        seed,
        analytic: metric.matrix,
        empirical,
        deviation,
        std_error,
        within_3se: within,
    })
}

/// `0.5 delta^T M delta`, the second-order model of `B_G(theta + delta || theta)`.
pub fn quadratic_form(metric: &MetricAtPoint, delta: &[f64]) -> f64 {
    0.5 * linalg::dot(delta, &linalg::mat_vec(&metric.to_matrix(), delta))
}
