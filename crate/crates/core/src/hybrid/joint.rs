//! Bernoulli naive Bayes over `(x, y)` as an exponential family.
//!
//! Parameters are laid out as `theta = (w0, w1, b)` with `w0, w1` in `R^m`,
//! and the sufficient statistic is `T(x, y) = (x [y=0], x [y=1], [y=1])`, so
//!
//! `G(theta) = ln( prod_j (1 + e^{w0_j}) + e^b prod_j (1 + e^{w1_j}) )`.
//!
//! With `pi1 = P(y = 1)`, the mean parameters are
//! `(pi0 sigma(w0), pi1 sigma(w1), pi1)`.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::convex::ConvexFunction;
use crate::domain::{Domain, Region};
use crate::expfam::{FamilyKind, FamilySpec};
use crate::linalg::{self, logistic, softplus, xlogx};

pub const JOINT_FAMILY_LABEL: &str = "naive_bayes_joint";

pub(crate) struct Split<'a> {
    pub w0: &'a [f64],
    pub w1: &'a [f64],
    pub b: f64,
}

pub(crate) fn split(theta: &[f64]) -> Split<'_> {
    let m = (theta.len() - 1) / 2;
    Split {
        w0: &theta[..m],
        w1: &theta[m..2 * m],
        b: theta[2 * m],
    }
}

/// `T(x, y)`.
pub fn joint_statistic(x: &[f64], y: usize) -> Vec<f64> {
    let m = x.len();
    let mut t = vec![0.0; 2 * m + 1];
    let offset = if y == 1 { m } else { 0 };
    t[offset..offset + m].copy_from_slice(x);
    if y == 1 {
        t[2 * m] = 1.0;
    }
    t
}

/// `(<theta, T(x, 0)>, <theta, T(x, 1)>)`.
pub(crate) fn class_scores(theta: &[f64], x: &[f64]) -> (f64, f64) {
    let s = split(theta);
    (linalg::dot(s.w0, x), linalg::dot(s.w1, x) + s.b)
}

/// Log-normalizers of the two class blocks: `(sum softplus(w0), b + sum softplus(w1))`.
fn block_log_masses(theta: &[f64]) -> (f64, f64) {
    let s = split(theta);
    (
        s.w0.iter().map(|&w| softplus(w)).sum(),
        s.b + s.w1.iter().map(|&w| softplus(w)).sum::<f64>(),
    )
}

fn log_partition_value(theta: &[f64]) -> f64 {
    let (a0, a1) = block_log_masses(theta);
    linalg::log_sum_exp(&[a0, a1])
}

fn class_one_probability(theta: &[f64]) -> f64 {
    let (a0, a1) = block_log_masses(theta);
    logistic(a1 - a0)
}

fn mean_of(theta: &[f64]) -> Vec<f64> {
    let s = split(theta);
    let pi1 = class_one_probability(theta);
    let pi0 = 1.0 - pi1;
    let mut mu: Vec<f64> = s.w0.iter().map(|&w| pi0 * logistic(w)).collect();
    mu.extend(s.w1.iter().map(|&w| pi1 * logistic(w)));
    mu.push(pi1);
    mu
}

fn natural_of(mu: &[f64]) -> Vec<f64> {
    let m = (mu.len() - 1) / 2;
    let pi1 = mu[2 * m];
    let pi0 = 1.0 - pi1;
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let mut theta: Vec<f64> = mu[..m].iter().map(|&u| logit(u / pi0)).collect();
    theta.extend(mu[m..2 * m].iter().map(|&u| logit(u / pi1)));
    let sp0: f64 = theta[..m].iter().map(|&w| softplus(w)).sum();
    let sp1: f64 = theta[m..].iter().map(|&w| softplus(w)).sum();
    theta.push(logit(pi1) - sp1 + sp0);
    theta
}

/// Covariance of `T` under `theta`.
fn covariance(theta: &[f64]) -> DMatrix<f64> {
    let s = split(theta);
    let m = s.w0.len();
    let d = 2 * m + 1;
    let pi1 = class_one_probability(theta);
    let pi = [1.0 - pi1, pi1];
    let p: Vec<f64> = s.w0.iter().chain(s.w1).map(|&w| logistic(w)).collect();
    let mu = mean_of(theta);
    let class_of = |i: usize| if i < m { 0 } else { 1 };
    let second = |i: usize, j: usize| -> f64 {
        match (i == 2 * m, j == 2 * m) {
            (true, true) => pi1,
            (true, false) => if class_of(j) == 1 { pi1 * p[j] } else { 0.0 },
            (false, true) => if class_of(i) == 1 { pi1 * p[i] } else { 0.0 },
            (false, false) => {
                if class_of(i) != class_of(j) {
                    0.0
                } else if i == j {
                    pi[class_of(i)] * p[i]
                } else {
                    pi[class_of(i)] * p[i] * p[j]
                }
            }
        }
    };
    DMatrix::from_fn(d, d, |i, j| second(i, j) - mu[i] * mu[j])
}

/// Negative entropy of the joint law with mean `mu`; finite on the closure.
fn negative_entropy(mu: &[f64]) -> f64 {
    let m = (mu.len() - 1) / 2;
    let pi1 = mu[2 * m];
    let pi0 = 1.0 - pi1;
    let mut total = xlogx(pi0) + xlogx(pi1);
    for (block, pi) in [(&mu[..m], pi0), (&mu[m..2 * m], pi1)] {
        for &u in block {
            total += xlogx(u) + xlogx(pi - u) - xlogx(pi);
        }
    }
    total
}

fn mean_interior(mu: &[f64]) -> bool {
    let m = (mu.len() - 1) / 2;
    let pi1 = mu[2 * m];
    let pi0 = 1.0 - pi1;
    pi1 > 0.0
        && pi1 < 1.0
        && mu[..m].iter().all(|&u| u > 0.0 && u < pi0)
        && mu[m..2 * m].iter().all(|&u| u > 0.0 && u < pi1)
}

fn mean_closure(mu: &[f64]) -> bool {
    let m = (mu.len() - 1) / 2;
    let pi1 = mu[2 * m];
    let pi0 = 1.0 - pi1;
    (0.0..=1.0).contains(&pi1)
        && mu[..m].iter().all(|&u| u >= 0.0 && u <= pi0)
        && mu[m..2 * m].iter().all(|&u| u >= 0.0 && u <= pi1)
}

fn mean_clamp(mu: &[f64], eps: f64) -> Vec<f64> {
    let m = (mu.len() - 1) / 2;
    let pi1 = mu[2 * m].clamp(eps, 1.0 - eps);
    let pi0 = 1.0 - pi1;
    let mut out: Vec<f64> = mu[..m]
        .iter()
        .map(|&u| u.clamp(eps * pi0, (1.0 - eps) * pi0))
        .collect();
    out.extend(mu[m..2 * m].iter().map(|&u| u.clamp(eps * pi1, (1.0 - eps) * pi1)));
    out.push(pi1);
    out
}

fn mean_domain(m: usize) -> Domain {
    let mut center = vec![0.25; 2 * m];
    center.push(0.5);
    Domain::new(
        2 * m + 1,
        Region::Custom {
            interior: std::sync::Arc::new(mean_interior),
            closure: std::sync::Arc::new(mean_closure),
            clamp: std::sync::Arc::new(mean_clamp),
            center,
        },
    )
}

/// Exponential family of `(x, y)` for `m` binary features, dimension `2m + 1`.
pub fn joint_family(m: usize) -> FamilySpec {
    assert!(m >= 1, "the joint family needs at least one feature");
    let d = 2 * m + 1;
    let g = ConvexFunction::new(Domain::whole(d), mean_domain(m), log_partition_value, mean_of)
        .with_inverse_gradient(natural_of)
        .with_hessian(covariance);
    let f = ConvexFunction::new(mean_domain(m), Domain::whole(d), negative_entropy, natural_of)
        .with_inverse_gradient(mean_of)
        .with_hessian(|mu| {
            let cov = covariance(&natural_of(mu));
            cov.clone().try_inverse().unwrap_or(cov)
        });
    FamilySpec::new(
        FamilyKind::Custom {
            label: JOINT_FAMILY_LABEL.into(),
        },
        g,
        f,
        |_| 0.0,
    )
    .with_sampler(|theta, rng| {
        let (x, y) = draw(theta, rng);
        joint_statistic(&x, y)
    })
}

/// One `(x, y)` draw at `theta`.
pub(crate) fn draw(theta: &[f64], rng: &mut dyn RngCore) -> (Vec<f64>, usize) {
    let s = split(theta);
    let y = usize::from(rng.random::<f64>() < class_one_probability(theta));
    let w = if y == 1 { s.w1 } else { s.w0 };
    let x = w
        .iter()
        .map(|&wj| if rng.random::<f64>() < logistic(wj) { 1.0 } else { 0.0 })
        .collect();
    (x, y)
}
