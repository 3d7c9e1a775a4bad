//! Conjugate priors `p(theta | alpha, beta) = m(alpha, beta) exp(<theta, alpha> - beta G(theta))`.
//!
//! The pair `(alpha, beta)` reads as `beta` pseudo-observations located at
//! `alpha / beta` in the mean space. In Bregman form the log prior is
//! `beta (F(alpha/beta) - B_F(alpha/beta || grad G(theta)))` plus `log m`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::convex::bregman;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::expfam::{FamilyKind, FamilySpec};
use crate::linalg;

/// Hyperparameters `(alpha, beta)`, validated against a family on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateHyperparams {
    alpha: Vec<f64>,
    beta: f64,
}

impl ConjugateHyperparams {
    /// Requires `beta > 0` and `alpha / beta` in the closure of the mean space.
    pub fn new(fam: &FamilySpec, alpha: Vec<f64>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Hyperparam(format!("beta must be positive, got {beta}")));
        }
        if alpha.len() != fam.dimension() {
            return Err(Error::Hyperparam(format!(
                "alpha has dimension {}, family has {}",
                alpha.len(),
                fam.dimension()
            )));
        }
        let point: Vec<f64> = alpha.iter().map(|a| a / beta).collect();
        if !fam.mean_space().contains_closure(&point) {
            return Err(Error::Hyperparam(format!(
                "alpha/beta = {point:?} lies outside the mean space of `{}`",
                fam.name()
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// `beta` pseudo-observations at `point`.
    pub fn from_pseudo_observations(fam: &FamilySpec, point: &[f64], beta: f64) -> Result<Self> {
        Self::new(fam, linalg::scale(point, beta), beta)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Location of the pseudo-observations, `alpha / beta`.
    pub fn pseudo_point(&self) -> Vec<f64> {
        linalg::scale(&self.alpha, 1.0 / self.beta)
    }
}

/// Log prior density and whether it includes the normalizer `log m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPrior {
    pub value: f64,
    pub normalized: bool,
}

/// `<theta, alpha> - beta G(theta) + log m(alpha, beta)`.
///
/// `log m` is exact for the fixed-variance Gaussian (a Gaussian prior on
/// `theta`) and for the Bernoulli (a `Beta(alpha, beta - alpha)` law on the
/// success probability, when proper). Everywhere else the density is
/// returned unnormalized and flagged as such.
pub fn log_prior(fam: &FamilySpec, theta: &[f64], hp: &ConjugateHyperparams) -> Result<LogPrior> {
    fam.check_natural("theta", theta)?;
    Error::check_dim("alpha", fam.dimension(), hp.alpha.len())?;
    let g = fam.log_partition().value(theta)?;
    let unnormalized = linalg::dot(theta, &hp.alpha) - hp.beta * g;
    let log_m = match fam.kind() {
        FamilyKind::GaussianFixedVariance { variance } => {
            let precision = hp.beta * variance;
            Some(0.5 * (precision / (2.0 * std::f64::consts::PI)).ln()
                - hp.alpha[0] * hp.alpha[0] / (2.0 * precision))
        }
        FamilyKind::Bernoulli => {
            let (a, b) = (hp.alpha[0], hp.beta - hp.alpha[0]);
            (a > 0.0 && b > 0.0).then(|| ln_gamma(hp.beta) - ln_gamma(a) - ln_gamma(b))
        }
        _ => None,
    };
    Ok(LogPrior {
        value: unnormalized + log_m.unwrap_or(0.0),
        normalized: log_m.is_some(),
    })
}

/// Unnormalized log prior through the dual:
/// `beta (F(alpha/beta) - B_F(alpha/beta || grad G(theta)))`.
pub fn log_prior_bregman(
    fam: &FamilySpec,
    theta: &[f64],
    hp: &ConjugateHyperparams,
) -> Result<f64> {
    fam.check_natural("theta", theta)?;
    let point = hp.pseudo_point();
    let f_point = fam.dual().value(&point)?;
    if !f_point.is_finite() {
        return Err(Error::Hyperparam(format!(
            "F is infinite at alpha/beta = {point:?}"
        )));
    }
    let mu = fam.log_partition().gradient(theta)?;
    let div = bregman(fam.dual(), &point, &mu)?;
    Ok(hp.beta * (f_point - div))
}

/// Mode of the prior in natural coordinates: `(grad G)^-1(alpha / beta)`.
pub fn prior_mode(fam: &FamilySpec, hp: &ConjugateHyperparams) -> Result<Vec<f64>> {
    fam.to_natural(&hp.pseudo_point())
}

/// Conjugate update `(alpha + sum phi(x_i), beta + n)`.
pub fn posterior_update(hp: &ConjugateHyperparams, data: &Dataset) -> Result<ConjugateHyperparams> {
    let mut alpha = hp.alpha.clone();
    for p in &data.points {
        Error::check_dim("data", alpha.len(), p.len())?;
        for (a, v) in alpha.iter_mut().zip(p) {
            *a += v;
        }
    }
    Ok(ConjugateHyperparams {
        alpha,
        beta: hp.beta + data.n() as f64,
    })
}
