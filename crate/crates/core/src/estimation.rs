//! ML and MAP estimation as Bregman median problems.
//!
//! In the mean space the ML estimate minimizes `sum_i B_F(x_i || mu)` and the
//! conjugate MAP estimate adds `beta B_F(alpha/beta || mu)`; both minimizers
//! are weighted means. In the natural space the same estimates minimize
//! `sum_i B_G(theta || theta_i)` over the duals `theta_i = grad F(x_i)`.
//! [`solve_median_numerical`] minimizes either form by projected gradient
//! descent and serves as an independent check on the closed forms.

use serde::{Deserialize, Serialize};

use crate::conjugate::ConjugateHyperparams;
use crate::convex::{bregman, ConvexFunction};
use crate::dataset::Dataset;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::expfam::FamilySpec;
use crate::linalg;
use crate::optim::{projected_gradient_descent, DescentOptions, DescentResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numerical,
}

/// Which coordinates a median problem is posed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Minimize `sum w_i B_F(p_i || mu)` over the mean space.
    Mean,
    /// Minimize `sum w_i B_G(theta || theta_i)` over the natural space.
    Natural,
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Space::Mean),
            "natural" => Ok(Space::Natural),
            other => Err(Error::Config(format!(
                "unknown space `{other}` (expected mean or natural)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
    /// Value of the minimized Bregman sum.
    pub objective_value: f64,
    pub method: Method,
    /// Zero for closed forms.
    pub iterations: usize,
}

pub const MEDIAN_TOL: f64 = 1e-9;
pub const MEDIAN_MAX_ITER: usize = 10_000;

pub fn default_median_options() -> DescentOptions {
    DescentOptions {
        tol: MEDIAN_TOL,
        max_iter: MEDIAN_MAX_ITER,
    }
}

/// Maximum-likelihood estimate: `mu_hat` is the sample mean of the
/// sufficient statistics, `theta_hat` its dual.
pub fn fit_ml(fam: &FamilySpec, data: &Dataset) -> Result<EstimateReport> {
    fam.validate_dataset(data)?;
    let mu = data.mean().ok_or(Error::EmptyData)?;
    if !fam.mean_space().contains(&mu) {
        return Err(Error::Boundary { mean: mu });
    }
    let theta = fam.to_natural(&mu)?;
    let mut objective = 0.0;
    for p in &data.points {
        objective += bregman(fam.dual(), p, &mu)?;
    }
    Ok(EstimateReport {
        mu_hat: mu,
        theta_hat: theta,
        objective_value: objective,
        method: Method::ClosedForm,
        iterations: 0,
    })
}

/// MAP estimate under a conjugate prior: `mu_hat = (sum x_i + alpha) / (n + beta)`.
pub fn fit_map(
    fam: &FamilySpec,
    data: &Dataset,
    hp: &ConjugateHyperparams,
) -> Result<EstimateReport> {
    fam.validate_dataset(data)?;
    Error::check_dim("alpha", fam.dimension(), hp.alpha().len())?;
    let total = data.n() as f64 + hp.beta();
    let mut sum = hp.alpha().to_vec();
    for p in &data.points {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
    }
    let mu: Vec<f64> = sum.iter().map(|s| s / total).collect();
    if !fam.mean_space().contains(&mu) {
        return Err(Error::Boundary { mean: mu });
    }
    let theta = fam.to_natural(&mu)?;
    let mut objective = hp.beta() * bregman(fam.dual(), &hp.pseudo_point(), &mu)?;
    for p in &data.points {
        objective += bregman(fam.dual(), p, &mu)?;
    }
    Ok(EstimateReport {
        mu_hat: mu,
        theta_hat: theta,
        objective_value: objective,
        method: Method::ClosedForm,
        iterations: 0,
    })
}

fn check_weighted(points: &[Vec<f64>], weights: &[f64], d: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    if points.len() != weights.len() {
        return Err(Error::Config(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::Config(format!("weights must be positive, got {w}")));
    }
    for p in points {
        Error::check_dim("points", d, p.len())?;
    }
    Ok(weights.iter().sum())
}

/// `sum w_i B_F(p_i || mu)`.
pub fn mean_space_objective(
    fam: &FamilySpec,
    points: &[Vec<f64>],
    weights: &[f64],
    mu: &[f64],
) -> Result<f64> {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| Ok(w * bregman(fam.dual(), p, mu)?))
        .sum()
}

/// `sum w_i B_G(theta || theta_i)`.
pub fn natural_space_objective(
    fam: &FamilySpec,
    points: &[Vec<f64>],
    weights: &[f64],
    theta: &[f64],
) -> Result<f64> {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| Ok(w * bregman(fam.log_partition(), theta, p)?))
        .sum()
}

/// Minimizes a weighted Bregman median objective numerically with the
/// default options (gradient norm `1e-9`, at most 10 000 iterations).
pub fn solve_median_numerical(
    fam: &FamilySpec,
    points: &[Vec<f64>],
    weights: &[f64],
    space: Space,
) -> Result<EstimateReport> {
    solve_median_numerical_with(fam, points, weights, space, default_median_options())
}

/// A weighted median objective with its data aggregated, so each evaluation
/// costs `O(d^2)` regardless of the number of points.
///
/// Mean space: `sum w B_F(p || mu) = sum w F(p) - W F(mu) - <grad F(mu), S - W mu>`
/// with gradient `-grad^2 F(mu) (S - W mu)`, where `S = sum w p`.
///
/// Natural space: `sum w B_G(theta || t_i) = W G(theta) - <S, theta> - C`
/// with gradient `W grad G(theta) - S`, where `S = sum w grad G(t_i)`.
pub struct MedianProblem<'a> {
    fam: &'a FamilySpec,
    space: Space,
    total_weight: f64,
    weighted_sum: Vec<f64>,
    constant: f64,
}

impl<'a> MedianProblem<'a> {
    pub fn new(fam: &'a FamilySpec, points: &[Vec<f64>], weights: &[f64], space: Space) -> Result<Self> {
        let d = fam.dimension();
        let total_weight = check_weighted(points, weights, d)?;
        let mut weighted_sum = vec![0.0; d];
        let mut constant = 0.0;
        match space {
            Space::Mean => {
                let f = fam.dual();
                for (p, w) in points.iter().zip(weights) {
                    if !f.domain().contains_closure(p) {
                        return Err(Error::domain("points", format!("{p:?} is outside the mean space")));
                    }
                    let fp = f.value(p)?;
                    if !fp.is_finite() {
                        return Err(Error::domain("points", format!("F is infinite at {p:?}")));
                    }
                    constant += w * fp;
                    weighted_sum = linalg::axpy(&weighted_sum, *w, p);
                }
            }
            Space::Natural => {
                let g = fam.log_partition();
                for (p, w) in points.iter().zip(weights) {
                    if !g.domain().contains(p) {
                        return Err(Error::domain(
                            "points",
                            format!("{p:?} is not interior to the natural space"),
                        ));
                    }
                    let gp = g.gradient(p)?;
                    constant += w * (g.value(p)? - linalg::dot(&gp, p));
                    weighted_sum = linalg::axpy(&weighted_sum, *w, &gp);
                }
            }
        }
        Ok(Self {
            fam,
            space,
            total_weight,
            weighted_sum,
            constant,
        })
    }

    /// Domain of the optimization variable.
    pub fn domain(&self) -> &'a Domain {
        match self.space {
            Space::Mean => self.fam.mean_space(),
            Space::Natural => self.fam.natural_space(),
        }
    }

    /// Objective value and gradient.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.total_weight;
        match self.space {
            Space::Mean => {
                let f = self.fam.dual();
                let resid = linalg::axpy(&self.weighted_sum, -w, x);
                let value = self.constant - w * f.value(x)? - linalg::dot(&f.gradient(x)?, &resid);
                let grad = linalg::scale(&linalg::mat_vec(&f.hessian(x)?, &resid), -1.0);
                Ok((value, grad))
            }
            Space::Natural => {
                let g = self.fam.log_partition();
                let value = w * g.value(x)? - linalg::dot(&self.weighted_sum, x) - self.constant;
                let grad = linalg::axpy(&linalg::scale(&g.gradient(x)?, w), -1.0, &self.weighted_sum);
                Ok((value, grad))
            }
        }
    }
}

pub fn solve_median_numerical_with(
    fam: &FamilySpec,
    points: &[Vec<f64>],
    weights: &[f64],
    space: Space,
    opts: DescentOptions,
) -> Result<EstimateReport> {
    let problem = MedianProblem::new(fam, points, weights, space)?;
    let domain = problem.domain();
    let run = projected_gradient_descent(|x| problem.evaluate(x), &domain.center(), domain, opts)?;
    let (mu, theta, objective) = match space {
        Space::Mean => {
            let theta = fam.to_natural(&run.x)?;
            let objective = mean_space_objective(fam, points, weights, &run.x)?;
            (run.x, theta, objective)
        }
        Space::Natural => {
            let mu = fam.log_partition().gradient(&run.x)?;
            let objective = natural_space_objective(fam, points, weights, &run.x)?;
            (mu, run.x, objective)
        }
    };
    Ok(EstimateReport {
        mu_hat: mu,
        theta_hat: theta,
        objective_value: objective,
        method: Method::Numerical,
        iterations: run.iterations,
    })
}

/// Mixed-geometry MAP objective for a non-conjugate prior with generator `q`:
/// `sum_i B_G(theta || theta_i) + beta B_Q(theta || prior_point)`.
pub fn objective_nonconjugate(
    g: &ConvexFunction,
    q: &ConvexFunction,
    theta: &[f64],
    data_duals: &[Vec<f64>],
    prior_point: &[f64],
    beta: f64,
) -> Result<f64> {
    check_nonconjugate(g, q, theta, prior_point, beta)?;
    let mut total = beta * bregman(q, theta, prior_point)?;
    for t in data_duals {
        total += bregman(g, theta, t)?;
    }
    Ok(total)
}

fn check_nonconjugate(
    g: &ConvexFunction,
    q: &ConvexFunction,
    theta: &[f64],
    prior_point: &[f64],
    beta: f64,
) -> Result<()> {
    if g.dimension() != q.dimension() {
        return Err(Error::Config("G and Q must share the dimension".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Hyperparam(format!("beta must be positive, got {beta}")));
    }
    if !g.domain().contains_closure(theta) || !q.domain().contains_closure(theta) {
        return Err(Error::domain("theta", format!("{theta:?} is outside dom G or dom Q")));
    }
    if !q.domain().contains(prior_point) {
        return Err(Error::domain("prior_point", format!("{prior_point:?} is not interior to dom Q")));
    }
    Ok(())
}

/// Numerical minimizer of [`objective_nonconjugate`]. No closed form exists
/// when `Q != G`.
pub fn minimize_nonconjugate(
    g: &ConvexFunction,
    q: &ConvexFunction,
    data_duals: &[Vec<f64>],
    prior_point: &[f64],
    beta: f64,
    opts: DescentOptions,
) -> Result<DescentResult> {
    let start = g.domain().center();
    check_nonconjugate(g, q, &start, prior_point, beta)?;
    if let Some(t) = data_duals.iter().find(|t| !g.domain().contains(t)) {
        return Err(Error::domain("data_duals", format!("{t:?} is not interior to dom G")));
    }
    let objective = |theta: &[f64]| -> Result<(f64, Vec<f64>)> {
        if !q.domain().contains(theta) {
            return Err(Error::domain("theta", "outside dom Q"));
        }
        Ok((
            objective_nonconjugate(g, q, theta, data_duals, prior_point, beta)?,
            gradient_nonconjugate(g, q, theta, data_duals, prior_point, beta)?,
        ))
    };
    projected_gradient_descent(objective, &start, g.domain(), opts)
}

/// Gradient of [`objective_nonconjugate`] in `theta`:
/// `sum_i (grad G(theta) - grad G(theta_i)) + beta (grad Q(theta) - grad Q(prior_point))`.
pub fn gradient_nonconjugate(
    g: &ConvexFunction,
    q: &ConvexFunction,
    theta: &[f64],
    data_duals: &[Vec<f64>],
    prior_point: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    check_nonconjugate(g, q, theta, prior_point, beta)?;
    let gg = g.gradient(theta)?;
    let mut grad = linalg::scale(&linalg::sub(&q.gradient(theta)?, &q.gradient(prior_point)?), beta);
    for t in data_duals {
        grad = linalg::add(&grad, &linalg::sub(&gg, &g.gradient(t)?));
    }
    Ok(grad)
}

/// What the conjugate closed form would predict if `prior_point` were a
/// sample under `G`: the dual of `(sum grad G(theta_i) + beta grad G(prior)) / (n + beta)`.
pub fn conjugate_prediction(
    g: &ConvexFunction,
    data_duals: &[Vec<f64>],
    prior_point: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let mut sum = linalg::scale(&g.gradient(prior_point)?, beta);
    for t in data_duals {
        sum = linalg::add(&sum, &g.gradient(t)?);
    }
    let mu = linalg::scale(&sum, 1.0 / (data_duals.len() as f64 + beta));
    g.inverse_gradient(&mu)
}
