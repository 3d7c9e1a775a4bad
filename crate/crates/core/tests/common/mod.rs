//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Logistic regression ML fit by iteratively reweighted least squares.
/// Returns the feature weights followed by the intercept.
pub fn logistic_regression_irls(features: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = features.len();
    let p = features[0].len() + 1;
    let z = DMatrix::from_fn(n, p, |i, j| if j + 1 == p { 1.0 } else { features[i][j] });
    let y = DVector::from_iterator(n, labels.iter().map(|&l| l as f64));
    let mut beta = DVector::zeros(p);
    for _ in 0..100 {
        let eta = &z * &beta;
        let prob = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let w = prob.map(|q| q * (1.0 - q));
        let zw = DMatrix::from_fn(n, p, |i, j| z[(i, j)] * w[i]);
        let info = z.transpose() * zw;
        let score = z.transpose() * (&y - &prob);
        let step = info.cholesky().expect("information matrix is positive definite").solve(&score);
        beta += &step;
        if step.amax() < 1e-14 {
            break;
        }
    }
    beta.as_slice().to_vec()
}

/// Minimizer of `f` over the grid `lo, lo + step, ..., hi`.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count)
        .map(|i| lo + i as f64 * step)
        .map(|t| (t, f(t)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

/// Relative error with a floor of one on the scale.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

use expgeo::{make_family, FamilyConstants, FamilySpec, FAMILY_NAMES};
use rand::Rng;

pub fn families() -> Vec<FamilySpec> {
    FAMILY_NAMES
        .iter()
        .map(|n| make_family(n, FamilyConstants::default()).unwrap())
        .collect()
}

/// Maps `u` in `[-1, 1]^d` to a natural parameter in a moderate region of
/// the family's natural space.
pub fn theta_from_unit(fam: &FamilySpec, u: &[f64]) -> Vec<f64> {
    match fam.name() {
        "gaussian_fixed_variance" => u.iter().map(|v| 3.0 * v).collect(),
        "bernoulli" => u.iter().map(|v| 4.0 * v).collect(),
        "poisson" => u.iter().map(|v| 2.0 * v).collect(),
        "exponential" => u.iter().map(|v| -(0.2 + 1.4 * (v + 1.0))).collect(),
        _ => u.iter().map(|v| 2.0 * v).collect(),
    }
}

pub fn random_unit(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn random_theta(fam: &FamilySpec, rng: &mut impl Rng) -> Vec<f64> {
    theta_from_unit(fam, &random_unit(fam.dimension(), rng))
}

pub fn random_mean(fam: &FamilySpec, rng: &mut impl Rng) -> Vec<f64> {
    fam.to_mean(&random_theta(fam, rng)).unwrap()
}
