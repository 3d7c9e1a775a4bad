//! Open convex domains for natural and mean parameters.

use std::fmt;
use std::sync::Arc;

/// Default distance kept from the boundary by [`Domain::interior_clamp`].
pub const DEFAULT_EPS_DOM: f64 = 1e-12;

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
type Clamp = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// Shape of an open convex set in `R^d`.
#[derive(Clone)]
pub enum Region {
    /// All of `R^d`.
    Whole,
    /// Open box `lower < x < upper`, bounds may be infinite.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Open probability simplex `x_j > 0, sum x_j < 1`.
    Simplex,
    /// Arbitrary region given by interior / closure predicates and a clamp.
    Custom {
        interior: Predicate,
        closure: Predicate,
        clamp: Clamp,
        center: Vec<f64>,
    },
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Whole => write!(f, "Whole"),
            Region::Box { lower, upper } => f
                .debug_struct("Box")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            Region::Simplex => write!(f, "Simplex"),
            Region::Custom { center, .. } => {
                f.debug_struct("Custom").field("center", center).finish()
            }
        }
    }
}

/// An open convex domain of fixed dimension.
#[derive(Clone, Debug)]
pub struct Domain {
    dimension: usize,
    region: Region,
    eps: f64,
}

impl Domain {
    pub fn whole(dimension: usize) -> Self {
        Self::new(dimension, Region::Whole)
    }

    /// The same open interval `(lower, upper)` in every coordinate.
    pub fn interval(dimension: usize, lower: f64, upper: f64) -> Self {
        Self::new(
            dimension,
            Region::Box {
                lower: vec![lower; dimension],
                upper: vec![upper; dimension],
            },
        )
    }

    pub fn simplex(dimension: usize) -> Self {
        Self::new(dimension, Region::Simplex)
    }

    pub fn new(dimension: usize, region: Region) -> Self {
        assert!(dimension >= 1, "domains have dimension >= 1");
        Self {
            dimension,
            region,
            eps: DEFAULT_EPS_DOM,
        }
    }

    /// Overrides the clamp distance `eps_dom`.
    pub fn with_eps(mut self, eps: f64) -> Self {
        assert!(eps > 0.0);
        self.eps = eps;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Interior membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.region {
            Region::Whole => true,
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| v > lo && v < hi),
            Region::Simplex => x.iter().all(|&v| v > 0.0) && x.iter().sum::<f64>() < 1.0,
            Region::Custom { interior, .. } => interior(x),
        }
    }

    /// Membership in the closure.
    pub fn contains_closure(&self, x: &[f64]) -> bool {
        if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.region {
            Region::Whole => true,
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| v >= lo && v <= hi),
            Region::Simplex => {
                x.iter().all(|&v| v >= 0.0) && x.iter().sum::<f64>() <= 1.0 + 1e-12
            }
            Region::Custom { closure, .. } => closure(x),
        }
    }

    /// A canonical interior point, used to start iterative solvers.
    pub fn center(&self) -> Vec<f64> {
        match &self.region {
            Region::Whole => vec![0.0; self.dimension],
            Region::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    (false, true) => hi - 1.0,
                    (false, false) => 0.0,
                })
                .collect(),
            Region::Simplex => vec![1.0 / (self.dimension as f64 + 1.0); self.dimension],
            Region::Custom { center, .. } => center.clone(),
        }
    }

    /// Maps `x` to a point at distance at least `eps_dom` from the boundary,
    /// moving it as little as possible.
    pub fn interior_clamp(&self, x: &[f64]) -> Vec<f64> {
        let eps = self.eps;
        match &self.region {
            Region::Whole => x.to_vec(),
            Region::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&lo, &hi))| {
                    let lo_in = lo + eps.max(lo.abs() * 4.0 * f64::EPSILON);
                    let hi_in = hi - eps.max(hi.abs() * 4.0 * f64::EPSILON);
                    v.max(lo_in).min(hi_in)
                })
                .collect(),
            Region::Simplex => project_capped_simplex(x, eps, 1.0 - eps),
            Region::Custom { clamp, .. } => clamp(x, eps),
        }
    }
}

/// Euclidean projection onto `{y : y_j >= floor, sum y <= total}`.
fn project_capped_simplex(x: &[f64], floor: f64, total: f64) -> Vec<f64> {
    let lifted: Vec<f64> = x.iter().map(|&v| v.max(floor)).collect();
    if lifted.iter().sum::<f64>() <= total {
        return lifted;
    }
    // Project onto {u >= 0, sum u = budget} with u = y - floor.
    let budget = total - floor * x.len() as f64;
    let shifted: Vec<f64> = x.iter().map(|v| v - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - budget) / (k as f64 + 1.0);
        if s - candidate > 0.0 {
            tau = candidate;
        }
    }
    let mut y: Vec<f64> = shifted.iter().map(|u| floor + (u - tau).max(0.0)).collect();
    // Guard against the sum landing one ulp above the cap.
    let sum: f64 = y.iter().sum();
    if sum >= 1.0 {
        let excess = sum - total;
        let n = y.len() as f64;
        for v in &mut y {
            *v = (*v - excess / n).max(floor);
        }
    }
    y
}
