//! Zhang's alpha-divergence over natural parameters.
//!
//! `D^a(t1, t2) = 4 / (1 - a^2) [ (1-a)/2 G(t1) + (1+a)/2 G(t2) - G((1-a)/2 t1 + (1+a)/2 t2) ]`
//! is a scaled Jensen gap of `G`. It tends to `B_G(t1 || t2)` as `a -> 1` and to
//! `B_G(t2 || t1)` as `a -> -1`; both endpoints are evaluated through the
//! Bregman divergence directly since the formula is `0/0` there.

use serde::{Deserialize, Serialize};

use crate::convex::{bregman, ConvexFunction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AlphaIndex(f64);

impl AlphaIndex {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a.abs() <= 1.0 {
            Ok(Self(a))
        } else {
            Err(Error::domain("alpha_index", format!("{a} is outside [-1, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AlphaIndex {
    type Error = Error;

    fn try_from(a: f64) -> Result<Self> {
        Self::new(a)
    }
}

impl From<AlphaIndex> for f64 {
    fn from(a: AlphaIndex) -> f64 {
        a.0
    }
}

pub fn alpha_divergence(
    g: &ConvexFunction,
    theta1: &[f64],
    theta2: &[f64],
    a: AlphaIndex,
) -> Result<f64> {
    alpha_divergence_with_bound(g, theta1, theta2, a).map(|(v, _)| v)
}

/// The divergence together with a bound on its floating-point error. The
/// Jensen gap loses about `eps (|G(t1)| + |G(t2)| + |G(mid)|)` to
/// cancellation, and the prefactor `4 / (1 - a^2)` magnifies that loss.
fn alpha_divergence_with_bound(
    g: &ConvexFunction,
    theta1: &[f64],
    theta2: &[f64],
    a: AlphaIndex,
) -> Result<(f64, f64)> {
    let d = g.dimension();
    Error::check_dim("theta1", d, theta1.len())?;
    Error::check_dim("theta2", d, theta2.len())?;
    let a = a.value();
    if a == 1.0 {
        return bregman(g, theta1, theta2).map(|b| (b, 0.0));
    }
    if a == -1.0 {
        return bregman(g, theta2, theta1).map(|b| (b, 0.0));
    }
    for (name, t) in [("theta1", theta1), ("theta2", theta2)] {
        if !g.domain().contains_closure(t) {
            return Err(Error::domain(name, format!("{t:?} is outside dom G")));
        }
    }
    let (w1, w2) = ((1.0 - a) / 2.0, (1.0 + a) / 2.0);
    let mid: Vec<f64> = theta1
        .iter()
        .zip(theta2)
        .map(|(x, y)| w1 * x + w2 * y)
        .collect();
    let (g1, g2, gm) = (g.value(theta1)?, g.value(theta2)?, g.value(&mid)?);
    if !(g1.is_finite() && g2.is_finite()) {
        return Err(Error::domain("theta1", "G is infinite at an endpoint"));
    }
    let gap = w1 * g1 + w2 * g2 - gm;
    let scale = 4.0 / (1.0 - a * a);
    let bound = scale * 4.0 * f64::EPSILON * (g1.abs() + g2.abs() + gm.abs());
    Ok(((scale * gap).max(0.0), bound))
}

/// Gaps between the alpha-divergence near the endpoints and the Bregman limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaLimitReport {
    /// `1 - 10^-k` for `k = 2..=5`.
    pub alphas: Vec<f64>,
    /// `B_G(theta1 || theta2)`.
    pub bregman_forward: f64,
    /// `B_G(theta2 || theta1)`.
    pub bregman_reverse: f64,
    /// `|D^a - B_G(theta1 || theta2)|` at each alpha.
    pub gaps_forward: Vec<f64>,
    /// `|D^-a - B_G(theta2 || theta1)|` at each alpha.
    pub gaps_reverse: Vec<f64>,
    /// Floating-point error bound of each forward evaluation.
    pub rounding_forward: Vec<f64>,
    pub rounding_reverse: Vec<f64>,
    /// Gaps never grow by more than the rounding error of the two evaluations.
    pub monotone: bool,
    pub passed: bool,
}

pub const LIMIT_REL_TOL: f64 = 1e-3;

/// Non-increasing up to rounding: once the truncation error drops below the
/// floating-point floor the gaps are noise and may wander within it.
fn non_increasing(gaps: &[f64], rounding: &[f64]) -> bool {
    (1..gaps.len()).all(|k| gaps[k] <= gaps[k - 1] + rounding[k] + rounding[k - 1])
}

pub fn alpha_limit_check(
    g: &ConvexFunction,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<AlphaLimitReport> {
    let forward = bregman(g, theta1, theta2)?;
    let reverse = bregman(g, theta2, theta1)?;
    let alphas: Vec<f64> = (2..=5).map(|k| 1.0 - 10f64.powi(-k)).collect();
    let mut gaps_forward = Vec::with_capacity(alphas.len());
    let mut gaps_reverse = Vec::with_capacity(alphas.len());
    let mut rounding_forward = Vec::with_capacity(alphas.len());
    let mut rounding_reverse = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let (up, up_err) = alpha_divergence_with_bound(g, theta1, theta2, AlphaIndex::new(a)?)?;
        let (down, down_err) = alpha_divergence_with_bound(g, theta1, theta2, AlphaIndex::new(-a)?)?;
        gaps_forward.push((up - forward).abs());
        gaps_reverse.push((down - reverse).abs());
        rounding_forward.push(up_err);
        rounding_reverse.push(down_err);
    }
    let monotone = non_increasing(&gaps_forward, &rounding_forward)
        && non_increasing(&gaps_reverse, &rounding_reverse);
    let last_ok = |gaps: &[f64], b: f64| gaps.last().is_some_and(|&x| x <= LIMIT_REL_TOL * (1.0 + b));
    let passed = monotone && last_ok(&gaps_forward, forward) && last_ok(&gaps_reverse, reverse);
    Ok(AlphaLimitReport {
        alphas,
        bregman_forward: forward,
        bregman_reverse: reverse,
        gaps_forward,
        gaps_reverse,
        rounding_forward,
        rounding_reverse,
        monotone,
        passed,
    })
}
