//! Generative/discriminative hybrid of naive Bayes and logistic regression.
//!
//! Both models share the joint family of [`joint_family`]: the generative
//! parameters `theta_g` model `p(x, y)`, the discriminative parameters
//! `theta_d` only the conditional `p(y | x)`. The two are tied by the coupling
//! prior `exp(-lambda B_G(theta_g || theta_d))`, which as a function of
//! `theta_g` is the conjugate prior with `alpha = lambda grad G(theta_d)` and
//! `beta = lambda`, up to a factor depending on `theta_d` alone. Its mode in
//! `theta_g` is `theta_d`. `lambda = 0` decouples the models; large `lambda`
//! drives them together, and [`Coupling::Tied`] shares one parameter vector.
//!
//! Training maximizes
//!
//! ```text
//! sum_labeled log p(y | x, theta_d)
//!   + sum_labeled log p(x, y | theta_g) + sum_unlabeled log p(x | theta_g)
//!   - lambda B_G(theta_g || theta_d)
//! ```
//!
//! with BFGS on the negated objective.

mod data;
mod joint;

pub use data::{synthetic_dataset, synthetic_theta, LabeledBinaryDataset};
pub use joint::{joint_family, joint_statistic, JOINT_FAMILY_LABEL};

use serde::{Deserialize, Serialize};

use crate::conjugate::{log_prior_bregman, ConjugateHyperparams};
use crate::convex::bregman;
use crate::error::{Error, Result};
use crate::estimation::fit_map;
use crate::expfam::FamilySpec;
use crate::linalg;
use crate::optim::{bfgs_minimize, DescentOptions};

/// Strength of the coupling prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Finite(f64),
    /// One shared parameter vector, the `lambda -> infinity` limit.
    Tied,
}

impl Coupling {
    pub fn lambda(self) -> f64 {
        match self {
            Coupling::Finite(l) => l,
            Coupling::Tied => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    pub theta_d: Vec<f64>,
    pub theta_g: Vec<f64>,
    pub coupling: Coupling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridFit {
    pub params: HybridParams,
    /// Maximized log joint (likelihood terms plus coupling).
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct HybridOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HybridOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 10_000,
        }
    }
}

/// `log p(y | x, theta_d)`. `G(theta_d)` cancels between the joint and its
/// marginal over `y`, so only the two class scores are needed.
pub fn log_discriminative(fam: &FamilySpec, theta_d: &[f64], x: &[f64], y: usize) -> Result<f64> {
    check_joint(fam, "theta_d", theta_d, x)?;
    if y > 1 {
        return Err(Error::domain("y", format!("label {y} is not 0 or 1")));
    }
    let (s0, s1) = joint::class_scores(theta_d, x);
    let score = if y == 1 { s1 } else { s0 };
    Ok(score - linalg::log_sum_exp(&[s0, s1]))
}

/// `log p(x | theta) = log sum_y p(x, y | theta)`.
pub fn log_marginal(fam: &FamilySpec, theta: &[f64], x: &[f64]) -> Result<f64> {
    check_joint(fam, "theta", theta, x)?;
    let (s0, s1) = joint::class_scores(theta, x);
    Ok(linalg::log_sum_exp(&[s0, s1]) - fam.log_partition().value(theta)?)
}

fn check_joint(fam: &FamilySpec, arg: &'static str, theta: &[f64], x: &[f64]) -> Result<()> {
    fam.check_natural(arg, theta)?;
    if 2 * x.len() + 1 != theta.len() {
        return Err(Error::Dimension {
            argument: "x",
            expected: (theta.len() - 1) / 2,
            got: x.len(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Hyperparam(format!("lambda must be finite and >= 0, got {lambda}")))
    }
}

/// `-lambda B_G(theta_g || theta_d)`.
pub fn coupling_log_prior(fam: &FamilySpec, theta_g: &[f64], theta_d: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    fam.check_natural("theta_g", theta_g)?;
    fam.check_natural("theta_d", theta_d)?;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(-lambda * bregman(fam.log_partition(), theta_g, theta_d)?)
}

/// Conjugate prior with `alpha = lambda grad G(theta_d)`, `beta = lambda`.
pub fn coupling_hyperparams(fam: &FamilySpec, theta_d: &[f64], lambda: f64) -> Result<ConjugateHyperparams> {
    check_lambda(lambda)?;
    fam.check_natural("theta_d", theta_d)?;
    let mu_d = fam.log_partition().gradient(theta_d)?;
    ConjugateHyperparams::from_pseudo_observations(fam, &mu_d, lambda)
}

/// The coupling prior built from the conjugate prior instead:
/// `log p~(theta_g | lambda grad G(theta_d), lambda) - lambda F(grad G(theta_d))`.
/// Agrees with [`coupling_log_prior`] up to rounding.
pub fn coupling_log_prior_conjugate(
    fam: &FamilySpec,
    theta_g: &[f64],
    theta_d: &[f64],
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    fam.check_natural("theta_g", theta_g)?;
    if lambda == 0.0 {
        fam.check_natural("theta_d", theta_d)?;
        return Ok(0.0);
    }
    let hp = coupling_hyperparams(fam, theta_d, lambda)?;
    let f_dual = fam.dual().value(&hp.pseudo_point())?;
    Ok(log_prior_bregman(fam, theta_g, &hp)? - lambda * f_dual)
}

/// Objective value and its gradients in `theta_d` and `theta_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridObjective {
    pub value: f64,
    pub grad_d: Vec<f64>,
    pub grad_g: Vec<f64>,
}

/// The training objective (to be maximized) at `(theta_d, theta_g)`.
pub fn hybrid_objective(
    fam: &FamilySpec,
    data: &LabeledBinaryDataset,
    lambda: f64,
    theta_d: &[f64],
    theta_g: &[f64],
) -> Result<HybridObjective> {
    check_lambda(lambda)?;
    let m = data.feature_count();
    fam.check_natural("theta_d", theta_d)?;
    fam.check_natural("theta_g", theta_g)?;
    Error::check_dim("theta_d", 2 * m + 1, theta_d.len())?;
    let g = fam.log_partition();
    let g_value = g.value(theta_g)?;
    let mu_g = g.gradient(theta_g)?;
    let d = theta_d.len();
    let mut value = 0.0;
    let mut grad_d = vec![0.0; d];
    let mut grad_g = vec![0.0; d];
    for (x, y) in data.features().iter().zip(data.labels()) {
        // Generative part: E[T | x] under theta_g (or T itself when labeled).
        let (s0, s1) = joint::class_scores(theta_g, x);
        let lse = linalg::log_sum_exp(&[s0, s1]);
        let (t0, t1) = (joint_statistic(x, 0), joint_statistic(x, 1));
        match y {
            Some(y) => {
                value += if *y == 1 { s1 } else { s0 } - g_value;
                let t = if *y == 1 { &t1 } else { &t0 };
                grad_g = linalg::add(&grad_g, &linalg::sub(t, &mu_g));
                // Discriminative part.
                let (r0, r1) = joint::class_scores(theta_d, x);
                let lse_d = linalg::log_sum_exp(&[r0, r1]);
                value += if *y == 1 { r1 } else { r0 } - lse_d;
                let p1 = (r1 - lse_d).exp();
                for j in 0..d {
                    let expected = (1.0 - p1) * t0[j] + p1 * t1[j];
                    grad_d[j] += t[j] - expected;
                }
            }
            None => {
                value += lse - g_value;
                let p1 = (s1 - lse).exp();
                for j in 0..d {
                    grad_g[j] += (1.0 - p1) * t0[j] + p1 * t1[j] - mu_g[j];
                }
            }
        }
    }
    if lambda > 0.0 {
        let diff = linalg::sub(theta_g, theta_d);
        let mu_d = g.gradient(theta_d)?;
        value -= lambda * bregman(g, theta_g, theta_d)?;
        grad_g = linalg::axpy(&grad_g, -lambda, &linalg::sub(&mu_g, &mu_d));
        let hv = linalg::mat_vec(&g.hessian(theta_d)?, &diff);
        grad_d = linalg::axpy(&grad_d, lambda, &hv);
    }
    Ok(HybridObjective {
        value,
        grad_d,
        grad_g,
    })
}

/// Joint MAP training of the hybrid model.
pub fn fit_hybrid(
    data: &LabeledBinaryDataset,
    coupling: Coupling,
    opts: HybridOptions,
) -> Result<HybridFit> {
    let m = data.feature_count();
    if data.n() == 0 || m == 0 {
        return Err(Error::EmptyData);
    }
    let counts = data.class_counts();
    if counts.contains(&0) {
        return Err(Error::Data(format!(
            "each class needs a labeled row (class counts {counts:?})"
        )));
    }
    if let Coupling::Finite(lambda) = coupling {
        check_lambda(lambda)?;
    }
    let fam = joint_family(m);
    let d = 2 * m + 1;
    // Start from the smoothed generative fit: one pseudo-observation at the
    // uniform joint law.
    let uniform = fam.to_mean(&vec![0.0; d])?;
    let smoothing = ConjugateHyperparams::from_pseudo_observations(&fam, &uniform, 1.0)?;
    let start = fit_map(&fam, &data.joint_statistics(), &smoothing)?.theta_hat;
    let descent = DescentOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
    };
    match coupling {
        Coupling::Finite(lambda) => {
            let objective = |z: &[f64]| -> Result<(f64, Vec<f64>)> {
                let o = hybrid_objective(&fam, data, lambda, &z[..d], &z[d..])?;
                let mut grad = linalg::scale(&o.grad_d, -1.0);
                grad.extend(o.grad_g.iter().map(|v| -v));
                Ok((-o.value, grad))
            };
            let mut z0 = start.clone();
            z0.extend_from_slice(&start);
            let run = bfgs_minimize(objective, &z0, descent)?;
            Ok(HybridFit {
                params: HybridParams {
                    theta_d: run.x[..d].to_vec(),
                    theta_g: run.x[d..].to_vec(),
                    coupling,
                },
                objective: -run.value,
                gradient_norm: run.gradient_norm,
                iterations: run.iterations,
            })
        }
        Coupling::Tied => {
            let objective = |t: &[f64]| -> Result<(f64, Vec<f64>)> {
                let o = hybrid_objective(&fam, data, 0.0, t, t)?;
                let grad = o.grad_d.iter().zip(&o.grad_g).map(|(a, b)| -(a + b)).collect();
                Ok((-o.value, grad))
            };
            let run = bfgs_minimize(objective, &start, descent)?;
            Ok(HybridFit {
                params: HybridParams {
                    theta_d: run.x.clone(),
                    theta_g: run.x,
                    coupling,
                },
                objective: -run.value,
                gradient_norm: run.gradient_norm,
                iterations: run.iterations,
            })
        }
    }
}
