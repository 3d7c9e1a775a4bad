//! Exponential families in minimal representation.
//!
//! A family is `p(x; theta) = p0(x) exp(<theta, phi(x)> - G(theta))`. Each
//! [`FamilySpec`] carries the log-partition `G` on the natural space, its
//! Legendre dual `F = G*` on the mean space, and the base measure. Observations
//! are always handled as sufficient-statistic vectors `phi(x)`.
//!
//! Base measures used by the built-in families:
//!
//! | family | `phi(x)` | `G(theta)` | `log p0(x)` |
//! |---|---|---|---|
//! | `gaussian_fixed_variance` | `x` | `s2 theta^2 / 2` | `-x^2/(2 s2) - ln(2 pi s2)/2` |
//! | `bernoulli` | `x` | `ln(1 + e^theta)` | `0` |
//! | `poisson` | `x` | `e^theta` | `-ln x!` |
//! | `exponential` | `x` | `-ln(-theta)` | `0` |
//! | `categorical` (k) | one-hot of the first k-1 classes | `ln(1 + sum e^theta_j)` | `0` |

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::convex::{bregman, ConvexFunction, ScalarMap};
use crate::dataset::Dataset;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{self, logistic, softplus, xlogx};

pub type Sampler = Arc<dyn Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync>;

/// Which family a [`FamilySpec`] describes, with its fixed constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum FamilyKind {
    GaussianFixedVariance { variance: f64 },
    Bernoulli,
    Poisson,
    Exponential,
    Categorical { categories: usize },
    Custom { label: String },
}

impl FamilyKind {
    pub fn name(&self) -> &str {
        match self {
            FamilyKind::GaussianFixedVariance { .. } => "gaussian_fixed_variance",
            FamilyKind::Bernoulli => "bernoulli",
            FamilyKind::Poisson => "poisson",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Categorical { .. } => "categorical",
            FamilyKind::Custom { label } => label,
        }
    }
}

/// Constants a family may need; unused fields are ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyConstants {
    pub variance: f64,
    pub categories: usize,
}

impl Default for FamilyConstants {
    fn default() -> Self {
        Self {
            variance: 1.0,
            categories: 3,
        }
    }
}

pub const FAMILY_NAMES: [&str; 5] = [
    "gaussian_fixed_variance",
    "bernoulli",
    "poisson",
    "exponential",
    "categorical",
];

/// An exponential family: log-partition, its dual, base measure and sampler.
#[derive(Clone)]
pub struct FamilySpec {
    kind: FamilyKind,
    log_partition: ConvexFunction,
    dual: ConvexFunction,
    log_base_measure: ScalarMap,
    sampler: Option<Sampler>,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("kind", &self.kind)
            .field("dimension", &self.dimension())
            .finish()
    }
}

impl FamilySpec {
    /// Assembles a family from its parts. `log_partition.gradient_range()`
    /// must equal the domain of `dual`.
    pub fn new<B>(
        kind: FamilyKind,
        log_partition: ConvexFunction,
        dual: ConvexFunction,
        log_base_measure: B,
    ) -> Self
    where
        B: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert_eq!(log_partition.dimension(), dual.dimension());
        Self {
            kind,
            log_partition,
            dual,
            log_base_measure: Arc::new(log_base_measure),
            sampler: None,
        }
    }

    pub fn with_sampler<S>(mut self, sampler: S) -> Self
    where
        S: Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync + 'static,
    {
        self.sampler = Some(Arc::new(sampler));
        self
    }

    /// Same family with `(grad G)^-1` computed by Newton iteration instead of
    /// the closed form.
    pub fn with_numerical_inverse(mut self) -> Self {
        self.log_partition = self.log_partition.without_inverse_gradient();
        self
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        self.kind.name()
    }

    pub fn dimension(&self) -> usize {
        self.log_partition.dimension()
    }

    /// `G` on the natural space.
    pub fn log_partition(&self) -> &ConvexFunction {
        &self.log_partition
    }

    /// `F = G*` on the mean space.
    pub fn dual(&self) -> &ConvexFunction {
        &self.dual
    }

    pub fn natural_space(&self) -> &Domain {
        self.log_partition.domain()
    }

    pub fn mean_space(&self) -> &Domain {
        self.dual.domain()
    }

    pub fn log_base_measure(&self, x: &[f64]) -> f64 {
        (self.log_base_measure)(x)
    }

    /// `mu = grad G(theta)`.
    pub fn to_mean(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_natural("theta", theta)?;
        self.log_partition.gradient(theta)
    }

    /// `theta = (grad G)^-1(mu)`.
    pub fn to_natural(&self, mu: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim("mu", self.dimension(), mu.len())?;
        if !self.mean_space().contains(mu) {
            return Err(Error::domain("mu", format!("{mu:?} is not interior to the mean space")));
        }
        self.log_partition.inverse_gradient(mu)
    }

    pub(crate) fn check_natural(&self, argument: &'static str, theta: &[f64]) -> Result<()> {
        Error::check_dim(argument, self.dimension(), theta.len())?;
        if self.natural_space().contains(theta) {
            Ok(())
        } else {
            Err(Error::domain(
                argument,
                format!("{theta:?} is outside the natural parameter space"),
            ))
        }
    }

    pub(crate) fn check_observation(&self, x: &[f64]) -> Result<()> {
        Error::check_dim("x", self.dimension(), x.len())?;
        if self.mean_space().contains_closure(x) {
            Ok(())
        } else {
            Err(Error::domain(
                "x",
                format!("{x:?} is not a valid sufficient statistic"),
            ))
        }
    }

    /// Checks every point lies in the closure of the mean space.
    pub fn validate_dataset(&self, data: &Dataset) -> Result<()> {
        for (i, p) in data.points.iter().enumerate() {
            if p.len() != self.dimension() || !self.mean_space().contains_closure(p) {
                return Err(Error::Data(format!(
                    "point {i} ({p:?}) is not a sufficient statistic of the {} family",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    /// Sufficient statistic of a raw scalar observation. Identity for the
    /// one-dimensional families; for `categorical` the raw value is a class
    /// index in `0..k` and the last class is the reference (all zeros).
    pub fn suff_stat(&self, raw: f64) -> Result<Vec<f64>> {
        match &self.kind {
            FamilyKind::Categorical { categories } => {
                let k = *categories;
                if raw < 0.0 || raw.fract() != 0.0 || raw >= k as f64 {
                    return Err(Error::domain("x", format!("{raw} is not a class in 0..{k}")));
                }
                let mut phi = vec![0.0; k - 1];
                let idx = raw as usize;
                if idx < k - 1 {
                    phi[idx] = 1.0;
                }
                Ok(phi)
            }
            _ if self.dimension() == 1 => Ok(vec![raw]),
            _ => Err(Error::Config(format!(
                "family `{}` has no scalar observation map",
                self.name()
            ))),
        }
    }
}

/// Builds one of the five built-in families.
pub fn make_family(name: &str, constants: FamilyConstants) -> Result<FamilySpec> {
    match name {
        "gaussian_fixed_variance" | "gaussian" => {
            let s2 = constants.variance;
            if !(s2 > 0.0 && s2.is_finite()) {
                return Err(Error::Config(format!("variance must be positive, got {s2}")));
            }
            Ok(gaussian_fixed_variance(s2))
        }
        "bernoulli" => Ok(bernoulli()),
        "poisson" => Ok(poisson()),
        "exponential" => Ok(exponential()),
        "categorical" => {
            let k = constants.categories;
            if k < 2 {
                return Err(Error::Config(format!("categorical needs k >= 2, got {k}")));
            }
            Ok(categorical(k))
        }
        other => Err(Error::Config(format!(
            "unknown family `{other}` (expected one of {})",
            FAMILY_NAMES.join(", ")
        ))),
    }
}

fn scalar_hessian(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

fn gaussian_fixed_variance(s2: f64) -> FamilySpec {
    let g = ConvexFunction::new(
        Domain::whole(1),
        Domain::whole(1),
        move |t| 0.5 * s2 * t[0] * t[0],
        move |t| vec![s2 * t[0]],
    )
    .with_inverse_gradient(move |m| vec![m[0] / s2])
    .with_hessian(move |_| scalar_hessian(s2));
    let f = ConvexFunction::new(
        Domain::whole(1),
        Domain::whole(1),
        move |m| m[0] * m[0] / (2.0 * s2),
        move |m| vec![m[0] / s2],
    )
    .with_inverse_gradient(move |t| vec![s2 * t[0]])
    .with_hessian(move |_| scalar_hessian(1.0 / s2));
    let sd = s2.sqrt();
    FamilySpec::new(
        FamilyKind::GaussianFixedVariance { variance: s2 },
        g,
        f,
        move |x| -x[0] * x[0] / (2.0 * s2) - 0.5 * (2.0 * PI * s2).ln(),
    )
    .with_sampler(move |t, rng| {
        let normal = Normal::new(s2 * t[0], sd).expect("finite mean and positive sd");
        vec![normal.sample(rng)]
    })
}

fn bernoulli() -> FamilySpec {
    let g = ConvexFunction::new(
        Domain::whole(1),
        Domain::interval(1, 0.0, 1.0),
        |t| softplus(t[0]),
        |t| vec![logistic(t[0])],
    )
    .with_inverse_gradient(|m| vec![(m[0] / (1.0 - m[0])).ln()])
    .with_hessian(|t| {
        let p = logistic(t[0]);
        scalar_hessian(p * (1.0 - p))
    });
    let f = ConvexFunction::new(
        Domain::interval(1, 0.0, 1.0),
        Domain::whole(1),
        |m| xlogx(m[0]) + xlogx(1.0 - m[0]),
        |m| vec![(m[0] / (1.0 - m[0])).ln()],
    )
    .with_inverse_gradient(|t| vec![logistic(t[0])])
    .with_hessian(|m| scalar_hessian(1.0 / (m[0] * (1.0 - m[0]))));
    FamilySpec::new(FamilyKind::Bernoulli, g, f, |_| 0.0).with_sampler(|t, rng| {
        let coin = Bernoulli::new(logistic(t[0])).expect("probability in [0, 1]");
        vec![if coin.sample(rng) { 1.0 } else { 0.0 }]
    })
}

fn poisson() -> FamilySpec {
    let g = ConvexFunction::new(
        Domain::whole(1),
        Domain::interval(1, 0.0, f64::INFINITY),
        |t| t[0].exp(),
        |t| vec![t[0].exp()],
    )
    .with_inverse_gradient(|m| vec![m[0].ln()])
    .with_hessian(|t| scalar_hessian(t[0].exp()));
    let f = ConvexFunction::new(
        Domain::interval(1, 0.0, f64::INFINITY),
        Domain::whole(1),
        |m| xlogx(m[0]) - m[0],
        |m| vec![m[0].ln()],
    )
    .with_inverse_gradient(|t| vec![t[0].exp()])
    .with_hessian(|m| scalar_hessian(1.0 / m[0]));
    FamilySpec::new(FamilyKind::Poisson, g, f, |x| -ln_gamma(x[0] + 1.0)).with_sampler(
        |t, rng| {
            let dist = Poisson::new(t[0].exp()).expect("positive rate");
            vec![dist.sample(rng)]
        },
    )
}

fn exponential() -> FamilySpec {
    let g = ConvexFunction::new(
        Domain::interval(1, f64::NEG_INFINITY, 0.0),
        Domain::interval(1, 0.0, f64::INFINITY),
        |t| -(-t[0]).ln(),
        |t| vec![-1.0 / t[0]],
    )
    .with_inverse_gradient(|m| vec![-1.0 / m[0]])
    .with_hessian(|t| scalar_hessian(1.0 / (t[0] * t[0])));
    let f = ConvexFunction::new(
        Domain::interval(1, 0.0, f64::INFINITY),
        Domain::interval(1, f64::NEG_INFINITY, 0.0),
        |m| -1.0 - m[0].ln(),
        |m| vec![-1.0 / m[0]],
    )
    .with_inverse_gradient(|t| vec![-1.0 / t[0]])
    .with_hessian(|m| scalar_hessian(1.0 / (m[0] * m[0])));
    FamilySpec::new(FamilyKind::Exponential, g, f, |_| 0.0).with_sampler(|t, rng| {
        let dist = Exp::new(-t[0]).expect("positive rate");
        vec![dist.sample(rng)]
    })
}

fn categorical(k: usize) -> FamilySpec {
    let d = k - 1;
    let probs = |t: &[f64]| -> Vec<f64> {
        // Softmax over (theta, 0); the reference class is last.
        let max = t.iter().cloned().fold(0.0_f64, f64::max);
        let exps: Vec<f64> = t.iter().map(|v| (v - max).exp()).collect();
        let reference = (-max).exp();
        let z = exps.iter().sum::<f64>() + reference;
        exps.iter().map(|e| e / z).collect()
    };
    let g = ConvexFunction::new(
        Domain::whole(d),
        Domain::simplex(d),
        |t| {
            let mut with_ref = t.to_vec();
            with_ref.push(0.0);
            linalg::log_sum_exp(&with_ref)
        },
        move |t| probs(t),
    )
    .with_inverse_gradient(|m| {
        let rest = (1.0 - m.iter().sum::<f64>()).ln();
        m.iter().map(|v| v.ln() - rest).collect()
    })
    .with_hessian(move |t| {
        let mu = probs(t);
        let n = mu.len();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { mu[i] } else { 0.0 };
            diag - mu[i] * mu[j]
        })
    });
    let f = ConvexFunction::new(
        Domain::simplex(d),
        Domain::whole(d),
        |m| m.iter().map(|&v| xlogx(v)).sum::<f64>() + xlogx(1.0 - m.iter().sum::<f64>()),
        |m| {
            let rest = (1.0 - m.iter().sum::<f64>()).ln();
            m.iter().map(|v| v.ln() - rest).collect()
        },
    )
    .with_inverse_gradient(move |t| probs(t))
    .with_hessian(|m| {
        let rest = 1.0 - m.iter().sum::<f64>();
        let n = m.len();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { 1.0 / m[i] } else { 0.0 };
            diag + 1.0 / rest
        })
    });
    FamilySpec::new(FamilyKind::Categorical { categories: k }, g, f, |_| 0.0).with_sampler(
        move |t, rng| {
            let mu = probs(t);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut phi = vec![0.0; mu.len()];
            for (j, p) in mu.iter().enumerate() {
                acc += p;
                if u < acc {
                    phi[j] = 1.0;
                    break;
                }
            }
            phi
        },
    )
}

/// `log p(x; theta) = log p0(x) + <theta, x> - G(theta)` for a
/// sufficient-statistic vector `x`.
pub fn log_density(fam: &FamilySpec, x: &[f64], theta: &[f64]) -> Result<f64> {
    fam.check_natural("theta", theta)?;
    fam.check_observation(x)?;
    let g = fam.log_partition().value(theta)?;
    Ok(fam.log_base_measure(x) + linalg::dot(theta, x) - g)
}

/// The same log density in Bregman form:
/// `log p0(x) + F(x) - B_F(x || grad G(theta))`.
pub fn log_density_bregman(fam: &FamilySpec, x: &[f64], theta: &[f64]) -> Result<f64> {
    fam.check_natural("theta", theta)?;
    fam.check_observation(x)?;
    let mu = fam.log_partition().gradient(theta)?;
    let fx = fam.dual().value(x)?;
    if !fx.is_finite() {
        return Err(Error::domain("x", format!("F is infinite at {x:?}")));
    }
    let div = bregman(fam.dual(), x, &mu)?;
    Ok(fam.log_base_measure(x) + fx - div)
}

/// `n` i.i.d. draws of `phi(x)` at `theta`; deterministic for a given seed.
pub fn sample(fam: &FamilySpec, theta: &[f64], n: usize, seed: u64) -> Result<Dataset> {
    fam.check_natural("theta", theta)?;
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(n);
    for_each_sample(fam, theta, n, seed, |x| points.push(x.to_vec()))?;
    Ok(Dataset::new(points))
}

/// Streams the same draws as [`sample`] without storing them.
pub fn for_each_sample<V>(fam: &FamilySpec, theta: &[f64], n: usize, seed: u64, mut visit: V) -> Result<()>
where
    V: FnMut(&[f64]),
{
    fam.check_natural("theta", theta)?;
    let sampler = fam.sampler.as_ref().ok_or_else(|| {
        Error::Config(format!("family `{}` has no sampler", fam.name()))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        visit(&sampler(theta, &mut rng));
    }
    Ok(())
}
