//! Exponential-family estimation through Bregman geometry.
//!
//! The log-partition function `G` of an exponential family and its Legendre
//! dual `F` define a pair of Bregman divergences on the natural and mean
//! parameter spaces. In those terms:
//!
//! - maximum likelihood is a Bregman median (centroid) problem in the mean
//!   space, solved by the sample mean ([`estimation::fit_ml`]);
//! - a conjugate prior `exp(<theta, alpha> - beta G(theta))` acts as `beta`
//!   extra observations at `alpha / beta`, so MAP stays a median problem with
//!   closed form `(sum x_i + alpha) / (n + beta)` ([`estimation::fit_map`]);
//! - a non-conjugate prior mixes two geometries and loses the closed form
//!   ([`estimation::objective_nonconjugate`]);
//! - the Hessian of `G` is the Fisher metric ([`infogeom`]);
//! - a generative/discriminative hybrid can be coupled by
//!   `exp(-lambda B_G(theta_g || theta_d))`, which is a conjugate prior with
//!   `alpha = lambda grad G(theta_d)`, `beta = lambda` ([`hybrid`]).

pub mod alpha;
pub mod conjugate;
pub mod convex;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod estimation;
pub mod expfam;
pub mod hybrid;
pub mod infogeom;
pub mod linalg;
pub mod optim;

pub use alpha::{alpha_divergence, alpha_limit_check, AlphaIndex, AlphaLimitReport};
pub use conjugate::{log_prior, log_prior_bregman, posterior_update, ConjugateHyperparams, LogPrior};
pub use convex::{bregman, dual_point, legendre_dual, solve_inverse_gradient, ConvexFunction};
pub use dataset::Dataset;
pub use domain::{Domain, Region};
pub use error::{Error, Result};
pub use estimation::{
    fit_map, fit_ml, minimize_nonconjugate, objective_nonconjugate, solve_median_numerical,
    EstimateReport, Method, Space,
};
pub use expfam::{
    log_density, log_density_bregman, make_family, sample, FamilyConstants, FamilyKind,
    FamilySpec, FAMILY_NAMES,
};
pub use infogeom::{fisher_mc_check, fisher_metric, FisherCheck, MetricAtPoint};
