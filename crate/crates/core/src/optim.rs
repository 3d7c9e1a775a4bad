//! First-order and quasi-Newton minimizers shared by the estimation and
//! hybrid-model solvers.

use nalgebra::{DMatrix, DVector};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug)]
pub struct DescentOptions {
    /// Converged when the gradient norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct DescentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// Accepts a trial point either on sufficient decrease or, once the objective
/// difference is lost in rounding, on a smaller gradient.
fn acceptable(f: f64, fc: f64, decrease: f64, gn: f64, gcn: f64) -> bool {
    if !fc.is_finite() {
        return false;
    }
    if fc <= f - ARMIJO * decrease {
        return true;
    }
    fc <= f + 1e-12 * (1.0 + f.abs()) && gcn < gn
}

/// Projected gradient descent with Barzilai-Borwein trial steps and
/// backtracking. Iterates are kept strictly inside `domain` by projecting with
/// [`Domain::interior_clamp`].
pub fn projected_gradient_descent<F>(
    objective: F,
    x0: &[f64],
    domain: &Domain,
    opts: DescentOptions,
) -> Result<DescentResult>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = domain.interior_clamp(x0);
    let (mut f, mut g) = objective(&x)?;
    let mut gn = linalg::norm(&g);
    let mut step = 1.0 / gn.max(1.0);
    for iteration in 0..opts.max_iter {
        if gn <= opts.tol {
            return Ok(DescentResult {
                x,
                value: f,
                gradient_norm: gn,
                iterations: iteration,
            });
        }
        let mut t = step;
        let mut next = None;
        for _ in 0..MAX_BACKTRACK {
            let cand = domain.interior_clamp(&linalg::axpy(&x, -t, &g));
            if domain.contains(&cand) && cand != x {
                if let Ok((fc, gc)) = objective(&cand) {
                    let decrease = linalg::dot(&g, &linalg::sub(&x, &cand));
                    let gcn = linalg::norm(&gc);
                    if acceptable(f, fc, decrease, gn, gcn) {
                        next = Some((cand, fc, gc, gcn));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((cand, fc, gc, gcn)) = next else {
            return Err(Error::Convergence {
                iterations: iteration,
                residual: gn,
                best: x,
            });
        };
        let s = linalg::sub(&cand, &x);
        let y = linalg::sub(&gc, &g);
        let sy = linalg::dot(&s, &y);
        step = if sy > 0.0 {
            (linalg::dot(&s, &s) / sy).clamp(1e-12, 1e12)
        } else {
            (2.0 * t).min(1e12)
        };
        x = cand;
        f = fc;
        g = gc;
        gn = gcn;
    }
    if gn <= opts.tol {
        return Ok(DescentResult {
            x,
            value: f,
            gradient_norm: gn,
            iterations: opts.max_iter,
        });
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: gn,
        best: x,
    })
}

/// Unconstrained BFGS with a backtracking Armijo line search.
pub fn bfgs_minimize<F>(objective: F, x0: &[f64], opts: DescentOptions) -> Result<DescentResult>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x)?;
    let mut gn = linalg::norm(&g);
    let mut inv_hessian: Option<DMatrix<f64>> = None;
    for iteration in 0..opts.max_iter {
        if gn <= opts.tol {
            return Ok(DescentResult {
                x,
                value: f,
                gradient_norm: gn,
                iterations: iteration,
            });
        }
        let mut accepted = None;
        // Try the quasi-Newton direction first, then plain steepest descent.
        for use_curvature in [true, false] {
            let (dir, t0) = match (&inv_hessian, use_curvature) {
                (Some(h), true) => {
                    let d = -(h * DVector::from_column_slice(&g));
                    (d.as_slice().to_vec(), 1.0)
                }
                (None, true) => continue,
                (_, false) => (linalg::scale(&g, -1.0), 1.0 / gn.max(1.0)),
            };
            let slope = linalg::dot(&g, &dir);
            if slope.is_nan() || slope >= 0.0 {
                continue;
            }
            let mut t = t0;
            for _ in 0..MAX_BACKTRACK {
                let cand = linalg::axpy(&x, t, &dir);
                if let Ok((fc, gc)) = objective(&cand) {
                    let gcn = linalg::norm(&gc);
                    if acceptable(f, fc, -t * slope, gn, gcn) {
                        accepted = Some((cand, fc, gc, gcn));
                        break;
                    }
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            inv_hessian = None;
        }
        let Some((cand, fc, gc, gcn)) = accepted else {
            return Err(Error::Convergence {
                iterations: iteration,
                residual: gn,
                best: x,
            });
        };
        let s = DVector::from_vec(linalg::sub(&cand, &x));
        let y = DVector::from_vec(linalg::sub(&gc, &g));
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            let h = inv_hessian
                .take()
                .unwrap_or_else(|| DMatrix::identity(n, n) * (sy / y.dot(&y)));
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - (&s * y.transpose()) * rho;
            let right = &eye - (&y * s.transpose()) * rho;
            inv_hessian = Some(left * h * right + (&s * s.transpose()) * rho);
        }
        x = cand;
        f = fc;
        g = gc;
        gn = gcn;
    }
    if gn <= opts.tol {
        return Ok(DescentResult {
            x,
            value: f,
            gradient_norm: gn,
            iterations: opts.max_iter,
        });
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: gn,
        best: x,
    })
}
