//! Strictly convex differentiable functions, their Legendre duals, and the
//! Bregman divergences they induce.
//!
//! A [`ConvexFunction`] lives on an open convex [`Domain`] and knows the
//! domain of its dual (the range of its gradient). Gradients of a function and
//! of its dual are inverse maps between the two domains:
//!
//! ```text
//! grad F = (grad G)^-1,    F(mu) = <mu, theta> - G(theta)  at  theta = grad F(mu)
//! ```
//!
//! When the inverse gradient is not known analytically it is found by damped
//! Newton iteration ([`solve_inverse_gradient`]).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg;

pub type ScalarMap = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixMap = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Inner-solve tolerance used by numerical inverse gradients.
pub const INVERSE_GRADIENT_TOL: f64 = 1e-10;
pub const INVERSE_GRADIENT_MAX_ITER: usize = 200;

#[derive(Clone)]
enum Repr {
    Explicit {
        value: ScalarMap,
        gradient: VectorMap,
        inverse_gradient: Option<VectorMap>,
        hessian: Option<MatrixMap>,
    },
    /// Legendre dual of the wrapped function.
    Dual(Arc<ConvexFunction>),
}

/// A strictly convex, differentiable function on an open convex domain.
///
/// Values are immutable and cheap to clone; all evaluation state is per call.
#[derive(Clone)]
pub struct ConvexFunction {
    repr: Repr,
    domain: Domain,
    gradient_range: Domain,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("dual", &matches!(self.repr, Repr::Dual(_)))
            .field("domain", &self.domain)
            .field("gradient_range", &self.gradient_range)
            .field("analytic_inverse", &self.has_analytic_inverse_gradient())
            .finish()
    }
}

impl ConvexFunction {
    /// Builds a function from its value and gradient. `gradient_range` is the
    /// image of the gradient map, i.e. the domain of the Legendre dual.
    pub fn new<V, G>(domain: Domain, gradient_range: Domain, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert_eq!(
            domain.dimension(),
            gradient_range.dimension(),
            "a function and its dual share the dimension"
        );
        Self {
            repr: Repr::Explicit {
                value: Arc::new(value),
                gradient: Arc::new(gradient),
                inverse_gradient: None,
                hessian: None,
            },
            domain,
            gradient_range,
        }
    }

    /// Attaches an analytic `(grad F)^-1`. Ignored on dual functions, whose
    /// inverse gradient is always the primal gradient.
    pub fn with_inverse_gradient<I>(mut self, inverse: I) -> Self
    where
        I: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if let Repr::Explicit {
            inverse_gradient, ..
        } = &mut self.repr
        {
            *inverse_gradient = Some(Arc::new(inverse));
        }
        self
    }

    pub fn with_hessian<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if let Repr::Explicit { hessian, .. } = &mut self.repr {
            *hessian = Some(Arc::new(h));
        }
        self
    }

    /// Drops the analytic inverse gradient so every inversion is solved numerically.
    pub fn without_inverse_gradient(mut self) -> Self {
        if let Repr::Explicit {
            inverse_gradient, ..
        } = &mut self.repr
        {
            *inverse_gradient = None;
        }
        self
    }

    /// `F(x) = s/2 * |x|^2` on `R^d`; self-dual up to the scale (`F* = |.|^2 / 2s`).
    pub fn quadratic(dimension: usize, s: f64) -> Self {
        assert!(s > 0.0);
        Self::new(
            Domain::whole(dimension),
            Domain::whole(dimension),
            move |x| 0.5 * s * linalg::dot(x, x),
            move |x| linalg::scale(x, s),
        )
        .with_inverse_gradient(move |y| linalg::scale(y, 1.0 / s))
        .with_hessian(move |x| DMatrix::identity(x.len(), x.len()) * s)
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Image of the gradient map; the domain of the Legendre dual.
    pub fn gradient_range(&self) -> &Domain {
        &self.gradient_range
    }

    pub fn is_dual(&self) -> bool {
        matches!(self.repr, Repr::Dual(_))
    }

    pub fn has_analytic_inverse_gradient(&self) -> bool {
        match &self.repr {
            Repr::Explicit {
                inverse_gradient, ..
            } => inverse_gradient.is_some(),
            Repr::Dual(_) => true,
        }
    }

    pub fn has_analytic_hessian(&self) -> bool {
        match &self.repr {
            Repr::Explicit { hessian, .. } => hessian.is_some(),
            Repr::Dual(primal) => primal.has_analytic_hessian(),
        }
    }

    fn check_dual_arg(&self, x: &[f64]) -> Result<()> {
        Error::check_dim("point", self.dimension(), x.len())?;
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::UnboundedDual(format!(
                "{x:?} is outside the gradient range of the primal function"
            )))
        }
    }

    /// Function value. Explicit functions are evaluated as given (boundary
    /// limits included); dual functions require an interior point.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match &self.repr {
            Repr::Explicit { value, .. } => Ok(value(x)),
            Repr::Dual(primal) => {
                self.check_dual_arg(x)?;
                let mu = primal.inverse_gradient(x)?;
                Ok(linalg::dot(&mu, x) - primal.value(&mu)?)
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.repr {
            Repr::Explicit { gradient, .. } => Ok(gradient(x)),
            Repr::Dual(primal) => {
                self.check_dual_arg(x)?;
                primal.inverse_gradient(x)
            }
        }
    }

    /// Hessian; analytic when supplied, otherwise central differences of the
    /// gradient with step `max(1e-6, 1e-8 |x|)`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match &self.repr {
            Repr::Explicit {
                hessian: Some(h), ..
            } => Ok(h(x)),
            Repr::Explicit { gradient, .. } => {
                Ok(linalg::fd_jacobian_sym(|p| gradient(p), x, linalg::hessian_step(x)))
            }
            Repr::Dual(primal) => {
                self.check_dual_arg(x)?;
                let mu = primal.inverse_gradient(x)?;
                primal.hessian(&mu)?.try_inverse().ok_or_else(|| {
                    Error::domain("point", "primal Hessian is singular at the dual point")
                })
            }
        }
    }

    /// `(grad F)^-1(y)`: analytic when available, numerical otherwise.
    pub fn inverse_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim("target", self.dimension(), y.len())?;
        match &self.repr {
            Repr::Explicit {
                inverse_gradient: Some(inv),
                ..
            } => {
                if !self.gradient_range.contains(y) {
                    return Err(Error::domain(
                        "target",
                        format!("{y:?} is outside the range of the gradient"),
                    ));
                }
                Ok(inv(y))
            }
            Repr::Explicit { .. } => solve_inverse_gradient(self, y),
            Repr::Dual(primal) => {
                if !self.gradient_range.contains(y) {
                    return Err(Error::domain(
                        "target",
                        format!("{y:?} is outside the range of the gradient"),
                    ));
                }
                primal.gradient(y)
            }
        }
    }
}

/// Bregman divergence `B_F(p || q) = F(p) - F(q) - <grad F(q), p - q>`.
///
/// `q` must be interior; `p` may sit on the boundary as long as `F(p)` is
/// finite there (e.g. `0 ln 0 = 0`).
pub fn bregman(f: &ConvexFunction, p: &[f64], q: &[f64]) -> Result<f64> {
    Error::check_dim("p", f.dimension(), p.len())?;
    Error::check_dim("q", f.dimension(), q.len())?;
    if !f.domain().contains(q) {
        return Err(Error::domain("q", format!("{q:?} is not interior")));
    }
    if !f.domain().contains_closure(p) {
        return Err(Error::domain("p", format!("{p:?} is outside the domain")));
    }
    let fp = f.value(p)?;
    if !fp.is_finite() {
        return Err(Error::domain(
            "p",
            format!("{p:?} is a boundary point where F is infinite"),
        ));
    }
    let fq = f.value(q)?;
    let gq = f.gradient(q)?;
    let diff = linalg::sub(p, q);
    Ok((fp - fq - linalg::dot(&gq, &diff)).max(0.0))
}

/// Legendre dual `G(theta) = sup_mu <mu, theta> - F(mu)`.
///
/// The returned function's gradient is `(grad F)^-1` and its inverse gradient
/// is `grad F`. When `F` has an analytic inverse gradient everything is
/// closed form; otherwise every evaluation runs a Newton solve. Evaluating
/// outside `F`'s gradient range (where the supremum is not attained) yields
/// [`Error::UnboundedDual`].
pub fn legendre_dual(f: &ConvexFunction) -> ConvexFunction {
    ConvexFunction {
        repr: Repr::Dual(Arc::new(f.clone())),
        domain: f.gradient_range.clone(),
        gradient_range: f.domain.clone(),
    }
}

/// Maps an interior point to the dual space: `p* = grad F(p)`.
pub fn dual_point(f: &ConvexFunction, p: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim("p", f.dimension(), p.len())?;
    if !f.domain().contains(p) {
        return Err(Error::domain("p", format!("{p:?} is not interior")));
    }
    f.gradient(p)
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: INVERSE_GRADIENT_TOL,
            max_iter: INVERSE_GRADIENT_MAX_ITER,
        }
    }
}

/// Finds `p` with `grad F(p) = target` by damped Newton iteration.
pub fn solve_inverse_gradient(f: &ConvexFunction, target: &[f64]) -> Result<Vec<f64>> {
    solve_inverse_gradient_with(f, target, NewtonOptions::default())
}

/// As [`solve_inverse_gradient`] with explicit options. Converges when
/// `|grad F(p) - target| <= tol (1 + |target|)`; one-dimensional problems
/// fall back to bisection if the Newton line search stalls.
pub fn solve_inverse_gradient_with(
    f: &ConvexFunction,
    target: &[f64],
    opts: NewtonOptions,
) -> Result<Vec<f64>> {
    Error::check_dim("target", f.dimension(), target.len())?;
    if !f.gradient_range().contains(target) {
        return Err(Error::domain(
            "target",
            format!("{target:?} is outside the range of the gradient"),
        ));
    }
    let tol = opts.tol * (1.0 + linalg::norm(target));
    let residual = |x: &[f64]| -> Result<(Vec<f64>, f64)> {
        let r = linalg::sub(&f.gradient(x)?, target);
        let n = linalg::norm(&r);
        Ok((r, if n.is_finite() { n } else { f64::INFINITY }))
    };

    let mut x = f.domain().center();
    let (mut r, mut rn) = residual(&x)?;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if rn <= tol {
            return polish(f, x, r, rn, &residual);
        }
        iterations += 1;
        let Some(step) = newton_step(f, &x, &r)? else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = linalg::axpy(&x, t, &step);
            if f.domain().contains(&cand) {
                let (rc, rcn) = residual(&cand)?;
                if rcn < (1.0 - 1e-4 * t) * rn {
                    x = cand;
                    r = rc;
                    rn = rcn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rn <= tol {
        return polish(f, x, r, rn, &residual);
    }
    if f.dimension() == 1 {
        if let Some(p) = bisect_1d(f, target[0], tol)? {
            return Ok(p);
        }
    }
    Err(Error::Convergence {
        iterations,
        residual: rn,
        best: x,
    })
}

fn newton_step(f: &ConvexFunction, x: &[f64], r: &[f64]) -> Result<Option<Vec<f64>>> {
    let h = f.hessian(x)?;
    let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
    Ok(linalg::solve_spd(&h, &neg_r))
}

/// A few extra full Newton steps after the tolerance is met, kept only while
/// they reduce the residual; pushes the inverse to machine precision.
fn polish<R>(
    f: &ConvexFunction,
    mut x: Vec<f64>,
    mut r: Vec<f64>,
    mut rn: f64,
    residual: &R,
) -> Result<Vec<f64>>
where
    R: Fn(&[f64]) -> Result<(Vec<f64>, f64)>,
{
    for _ in 0..3 {
        if rn == 0.0 {
            break;
        }
        let Some(step) = newton_step(f, &x, &r)? else {
            break;
        };
        let cand = linalg::add(&x, &step);
        if !f.domain().contains(&cand) {
            break;
        }
        let (rc, rcn) = residual(&cand)?;
        if rcn >= rn {
            break;
        }
        x = cand;
        r = rc;
        rn = rcn;
    }
    Ok(x)
}

/// Bracketing bisection on a monotone one-dimensional gradient.
fn bisect_1d(f: &ConvexFunction, target: f64, tol: f64) -> Result<Option<Vec<f64>>> {
    let (lower, upper) = match f.domain().region() {
        crate::domain::Region::Whole => (f64::NEG_INFINITY, f64::INFINITY),
        crate::domain::Region::Box { lower, upper } => (lower[0], upper[0]),
        _ => return Ok(None),
    };
    let g = |x: f64| -> Result<f64> { Ok(f.gradient(&[x])?[0] - target) };
    let start = f.domain().center()[0];
    let g0 = g(start)?;
    if g0 == 0.0 {
        return Ok(Some(vec![start]));
    }
    // Walk toward the root until the sign flips.
    let upward = g0 < 0.0;
    let bound = if upward { upper } else { lower };
    let (mut a, mut b) = (start, start);
    let mut step = 1.0;
    let mut found = false;
    for _ in 0..2000 {
        let next = if bound.is_finite() {
            0.5 * (b + bound)
        } else if upward {
            b + step
        } else {
            b - step
        };
        step *= 2.0;
        if next == b {
            break;
        }
        let gn = g(next)?;
        a = b;
        b = next;
        if (gn >= 0.0) == upward {
            found = true;
            break;
        }
    }
    if !found {
        return Ok(None);
    }
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm.abs() <= tol * 1e-3 || mid <= lo || mid >= hi {
            return Ok(Some(vec![mid]));
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    Ok((g(mid)?.abs() <= tol).then(|| vec![mid]))
}
