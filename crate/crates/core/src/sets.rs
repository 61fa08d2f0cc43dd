//! Closed convex sets with exact projections.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::func::{check_dim, check_finite, ProxFn, Vector};
use crate::linear::spd_factor;

/// Absolute slack for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
enum Shape {
    Box { lo: Vector, hi: Vector },
    Halfspace { a: Vector, b: f64 },
    Hyperplane { a: Vector, b: f64 },
    Ball { center: Vector, radius: f64 },
    Orthant { dim: usize },
    Affine(AffineSubspace),
}

/// `{x : A x = b}` with `A A^T` factorized at construction.
#[derive(Debug, Clone)]
struct AffineSubspace {
    a: DMatrix<f64>,
    b: Vector,
    gram: Cholesky<f64, Dyn>,
}

/// A nonempty closed convex subset of `R^N`.
#[derive(Debug, Clone)]
pub struct ConvexSet {
    shape: Shape,
}

impl ConvexSet {
    /// Box `[lo, hi]`; bounds may be infinite.
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidInput("box must have dimension >= 1".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter(format!("empty box side [{l}, {h}]")));
            }
        }
        Ok(ConvexSet {
            shape: Shape::Box {
                lo: Vector::from_vec(lo),
                hi: Vector::from_vec(hi),
            },
        })
    }

    /// The same interval on every coordinate.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; dim], vec![hi; dim])
    }

    /// All of `R^N`.
    pub fn whole(dim: usize) -> Result<Self> {
        Self::cube(dim, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `{x : a^T x <= b}`.
    pub fn halfspace(a: Vec<f64>, b: f64) -> Result<Self> {
        let a = Self::normal(a)?;
        if !b.is_finite() {
            return Err(Error::InvalidParameter("halfspace offset must be finite".into()));
        }
        Ok(ConvexSet {
            shape: Shape::Halfspace { a, b },
        })
    }

    /// `{x : a^T x = b}`.
    pub fn hyperplane(a: Vec<f64>, b: f64) -> Result<Self> {
        let a = Self::normal(a)?;
        if !b.is_finite() {
            return Err(Error::InvalidParameter("hyperplane offset must be finite".into()));
        }
        Ok(ConvexSet {
            shape: Shape::Hyperplane { a, b },
        })
    }

    fn normal(a: Vec<f64>) -> Result<Vector> {
        let a = Vector::from_vec(a);
        if a.is_empty() {
            return Err(Error::InvalidInput("normal vector is empty".into()));
        }
        check_finite("normal", &a)?;
        if a.norm() == 0.0 {
            return Err(Error::InvalidParameter("normal vector must be nonzero".into()));
        }
        Ok(a)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let center = Vector::from_vec(center);
        if center.is_empty() {
            return Err(Error::InvalidInput("ball center is empty".into()));
        }
        check_finite("center", &center)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be nonnegative, got {radius}"
            )));
        }
        Ok(ConvexSet {
            shape: Shape::Ball { center, radius },
        })
    }

    pub fn nonnegative_orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("orthant must have dimension >= 1".into()));
        }
        Ok(ConvexSet {
            shape: Shape::Orthant { dim },
        })
    }

    /// `{x : A x = b}` for `A` of full row rank.
    pub fn affine(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        let b = Vector::from_vec(b);
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::InvalidInput("affine constraint matrix is empty".into()));
        }
        check_finite("b", &b)?;
        let gram = spd_factor(&a * a.transpose(), "A A^T")
            .map_err(|_| Error::InvalidParameter("affine constraints must have full row rank".into()))?;
        Ok(ConvexSet {
            shape: Shape::Affine(AffineSubspace { a, b, gram }),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Halfspace { a, .. } | Shape::Hyperplane { a, .. } => a.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::Orthant { dim } => *dim,
            Shape::Affine(s) => s.a.ncols(),
        }
    }

    /// Nearest point of the set.
    pub fn project(&self, x: &Vector) -> Vector {
        match &self.shape {
            Shape::Box { lo, hi } => x.zip_zip_map(lo, hi, |v, l, h| v.clamp(l, h)),
            Shape::Halfspace { a, b } => {
                let s = a.dot(x) - b;
                if s <= 0.0 {
                    x.clone()
                } else {
                    x - a * (s / a.norm_squared())
                }
            }
            Shape::Hyperplane { a, b } => x - a * ((a.dot(x) - b) / a.norm_squared()),
            Shape::Ball { center, radius } => {
                let d = x - center;
                let n = d.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center + d * (radius / n)
                }
            }
            Shape::Orthant { .. } => x.map(|v| v.max(0.0)),
            Shape::Affine(s) => {
                let r = &s.a * x - &s.b;
                x - s.a.tr_mul(&s.gram.solve(&r))
            }
        }
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match &self.shape {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(v, (l, h))| *v >= l - MEMBERSHIP_TOL && *v <= h + MEMBERSHIP_TOL),
            Shape::Orthant { .. } => x.iter().all(|v| *v >= -MEMBERSHIP_TOL),
            _ => self.distance(x) <= MEMBERSHIP_TOL,
        }
    }

    /// Support function `sup_{c in C} c^T u`.
    pub fn support(&self, u: &Vector) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut total = 0.0;
                for k in 0..u.len() {
                    let v = u[k];
                    let term = if v > 0.0 {
                        hi[k] * v
                    } else if v < 0.0 {
                        lo[k] * v
                    } else {
                        0.0
                    };
                    total += term;
                }
                total
            }
            Shape::Ball { center, radius } => center.dot(u) + radius * u.norm(),
            Shape::Orthant { .. } => {
                if u.iter().all(|v| *v <= 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Shape::Halfspace { a, b } | Shape::Hyperplane { a, b } => {
                let t = a.dot(u) / a.norm_squared();
                let off = (u - a * t).norm();
                let halfspace = matches!(self.shape, Shape::Halfspace { .. });
                if off > 1e-9 * u.norm().max(1.0) || (halfspace && t < 0.0) {
                    f64::INFINITY
                } else {
                    t * b
                }
            }
            Shape::Affine(s) => {
                // u must lie in the row space: u = A^T l
                let l = s.gram.solve(&(&s.a * u));
                let off = (u - s.a.tr_mul(&l)).norm();
                if off > 1e-9 * u.norm().max(1.0) {
                    f64::INFINITY
                } else {
                    l.dot(&s.b)
                }
            }
        }
    }
}

/// Indicator function of a set: 0 inside, `+inf` outside. Its prox is the
/// projection for every scale.
#[derive(Debug, Clone)]
pub struct Indicator {
    set: ConvexSet,
}

impl Indicator {
    pub fn new(set: ConvexSet) -> Self {
        Indicator { set }
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }
}

/// Validated projection.
pub fn project(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    check_dim(set.dim(), x)?;
    check_finite("x", x)?;
    Ok(set.project(x))
}

pub fn indicator(set: ConvexSet) -> Indicator {
    Indicator::new(set)
}

impl ProxFn for Indicator {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        if self.set.contains(x) {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn prox(&self, _gamma: f64, x: &Vector) -> Vector {
        self.set.project(x)
    }
    fn as_set(&self) -> Option<&ConvexSet> {
        Some(&self.set)
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        Some(self.set.support(u))
    }
}
