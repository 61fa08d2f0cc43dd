//! Convex-function interfaces shared by the catalog and the solvers.
//!
//! Functions take values in `]-inf, +inf]`; `+inf` is represented by
//! `f64::INFINITY` and marks points outside the domain.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linear::{operator_norm, LinearMap};
use crate::sets::ConvexSet;

pub type Vector = DVector<f64>;

/// A proper lower-semicontinuous convex function accessed through its
/// value and its proximity operator.
///
/// `prox(gamma, x)` returns the unique minimizer of
/// `gamma * f(y) + 0.5 * |x - y|^2`.
pub trait ProxFn: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Vector) -> f64;

    fn prox(&self, gamma: f64, x: &Vector) -> Vector;

    /// The underlying set when this function is an indicator.
    fn as_set(&self) -> Option<&ConvexSet> {
        None
    }

    /// Closed-form value of the convex conjugate, when one is known.
    fn eval_conjugate(&self, _u: &Vector) -> Option<f64> {
        None
    }
}

pub type SharedProx = Arc<dyn ProxFn>;

/// A convex differentiable function with a Lipschitz continuous gradient.
pub trait SmoothFn: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Vector) -> f64;
    fn grad(&self, x: &Vector) -> Vector;
    /// Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

pub type SharedSmooth = Arc<dyn SmoothFn>;

pub(crate) fn check_finite(name: &str, x: &Vector) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} contains non-finite entries")))
    }
}

pub(crate) fn check_dim(expected: usize, x: &Vector) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: x.len(),
        })
    }
}

/// Validated prox evaluation.
pub fn prox_of(f: &dyn ProxFn, gamma: f64, x: &Vector) -> Result<Vector> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "prox scale must be a positive real, got {gamma}"
        )));
    }
    check_dim(f.dim(), x)?;
    check_finite("x", x)?;
    Ok(f.prox(gamma, x))
}

/// Largest violation of the subgradient inequality
/// `f(p) + (x - p)^T (y - p) <= f(y)` over the supplied points `y`.
///
/// A value at or below a small tolerance certifies `x - p` as a subgradient
/// of `f` at `p` on the sample, i.e. `p = prox_f(x)`.
pub fn subgradient_certificate_at(
    f: impl Fn(&Vector) -> f64,
    x: &Vector,
    p: &Vector,
    ys: &[Vector],
) -> f64 {
    let fp = f(p);
    let g = x - p;
    let mut worst = f64::NEG_INFINITY;
    for y in ys {
        let fy = f(y);
        if fy == f64::INFINITY {
            continue;
        }
        let v = fp + g.dot(&(y - p)) - fy;
        if v > worst {
            worst = v;
        }
    }
    if fp == f64::INFINITY {
        // p outside the domain can never be a prox point
        return f64::INFINITY;
    }
    worst.max(0.0)
}

/// Certificate of `p = prox_f(x)` from `samples` points drawn in a ball of
/// the given radius around `p`, plus `p` itself shifted along `x - p`.
pub fn subgradient_certificate(
    f: &dyn ProxFn,
    x: &Vector,
    p: &Vector,
    samples: usize,
    radius: f64,
    seed: u64,
) -> f64 {
    let ys = sample_ball(p, radius, samples, seed);
    subgradient_certificate_at(|y| f.eval(y), x, p, &ys)
}

/// Points drawn uniformly in direction and radius around `center`,
/// including points along each coordinate axis.
pub fn sample_ball(center: &Vector, radius: f64, samples: usize, seed: u64) -> Vec<Vector> {
    let n = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples + 2 * n);
    for k in 0..n {
        for s in [-1.0, 1.0] {
            let mut y = center.clone();
            y[k] += s * radius * 0.5;
            out.push(y);
        }
    }
    for _ in 0..samples {
        let dir = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = dir.norm();
        if norm == 0.0 {
            continue;
        }
        let r: f64 = rand::Rng::random::<f64>(&mut rng) * radius;
        out.push(center + dir * (r / norm));
    }
    out
}

/// Identically zero function; its prox is the identity.
#[derive(Debug, Clone)]
pub struct Zero {
    dim: usize,
}

impl Zero {
    pub fn new(dim: usize) -> Self {
        Zero { dim }
    }
}

impl ProxFn for Zero {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn prox(&self, _gamma: f64, x: &Vector) -> Vector {
        x.clone()
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        Some(if u.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            f64::INFINITY
        })
    }
}

/// Nonnegative multiple `c * f` of a function.
#[derive(Debug, Clone)]
pub struct Scaled {
    base: SharedProx,
    factor: f64,
}

impl Scaled {
    pub fn new(base: SharedProx, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Scaled { base, factor })
    }
}

impl ProxFn for Scaled {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        let v = self.base.eval(x);
        if v == f64::INFINITY {
            v
        } else {
            self.factor * v
        }
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        self.base.prox(gamma * self.factor, x)
    }
    fn as_set(&self) -> Option<&ConvexSet> {
        self.base.as_set()
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.base
            .eval_conjugate(&(u / self.factor))
            .map(|v| self.factor * v)
    }
}

/// The zero smooth function. Its gradient is Lipschitz for every constant;
/// the stored constant only fixes the step-size scale.
#[derive(Debug, Clone)]
pub struct ZeroSmooth {
    dim: usize,
    beta: f64,
}

impl ZeroSmooth {
    pub fn new(dim: usize) -> Self {
        ZeroSmooth { dim, beta: 1.0 }
    }

    pub fn with_lipschitz(dim: usize, beta: f64) -> Self {
        ZeroSmooth { dim, beta }
    }
}

impl SmoothFn for ZeroSmooth {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn grad(&self, x: &Vector) -> Vector {
        Vector::zeros(x.len())
    }
    fn lipschitz(&self) -> f64 {
        self.beta
    }
}

/// `weight/2 * |L x - y|^2`, gradient `weight * L^T (L x - y)`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    map: Arc<dyn LinearMap>,
    target: Vector,
    weight: f64,
    beta: f64,
}

impl LeastSquares {
    pub fn new(map: Arc<dyn LinearMap>, target: Vector, weight: f64) -> Result<Self> {
        check_dim(map.rows(), &target)?;
        check_finite("target", &target)?;
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "least-squares weight must be positive, got {weight}"
            )));
        }
        let norm = operator_norm(map.as_ref(), 1e-12, 10_000).value;
        // slight inflation keeps the constant an upper bound despite the
        // power-iteration estimate approaching from below
        let beta = (weight * norm * norm * (1.0 + 1e-10)).max(f64::MIN_POSITIVE);
        Ok(LeastSquares {
            map,
            target,
            weight,
            beta,
        })
    }

    pub fn map(&self) -> &Arc<dyn LinearMap> {
        &self.map
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl SmoothFn for LeastSquares {
    fn dim(&self) -> usize {
        self.map.cols()
    }
    fn eval(&self, x: &Vector) -> f64 {
        let r = self.map.apply(x) - &self.target;
        0.5 * self.weight * r.norm_squared()
    }
    fn grad(&self, x: &Vector) -> Vector {
        let r = self.map.apply(x) - &self.target;
        self.map.adjoint(&r) * self.weight
    }
    fn lipschitz(&self) -> f64 {
        self.beta
    }
}

/// `1/2 (x - c)^T H (x - c)` for a symmetric positive semidefinite `H`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    hessian: DMatrix<f64>,
    center: Vector,
    beta: f64,
}

impl Quadratic {
    pub fn new(hessian: DMatrix<f64>, center: Vector) -> Result<Self> {
        let n = center.len();
        if hessian.nrows() != n || hessian.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: hessian.nrows(),
            });
        }
        let asym = (&hessian - hessian.transpose()).amax();
        if asym > 1e-12 * hessian.amax().max(1.0) {
            return Err(Error::InvalidParameter("hessian must be symmetric".into()));
        }
        let eig = hessian.clone().symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        if lo < -1e-12 * hi.abs().max(1.0) {
            return Err(Error::InvalidParameter(
                "hessian must be positive semidefinite".into(),
            ));
        }
        Ok(Quadratic {
            hessian,
            center,
            beta: hi.max(f64::MIN_POSITIVE),
        })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
}

impl SmoothFn for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn eval(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        0.5 * d.dot(&(&self.hessian * &d))
    }
    fn grad(&self, x: &Vector) -> Vector {
        &self.hessian * (x - &self.center)
    }
    fn lipschitz(&self) -> f64 {
        self.beta
    }
}

/// Moreau envelope `min_y f(y) + 1/2 |x - y|^2` of a prox-capable function,
/// with gradient `x - prox_f(x)` (1-Lipschitz).
#[derive(Debug, Clone)]
pub struct Envelope {
    base: SharedProx,
}

impl Envelope {
    pub fn new(base: SharedProx) -> Self {
        Envelope { base }
    }
}

impl SmoothFn for Envelope {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        let p = self.base.prox(1.0, x);
        self.base.eval(&p) + 0.5 * (x - p).norm_squared()
    }
    fn grad(&self, x: &Vector) -> Vector {
        x - self.base.prox(1.0, x)
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// Half squared distance to a closed convex set; gradient `x - P_C x`.
#[derive(Debug, Clone)]
pub struct HalfSquaredDistance {
    set: ConvexSet,
}

impl HalfSquaredDistance {
    pub fn new(set: ConvexSet) -> Self {
        HalfSquaredDistance { set }
    }
}

impl SmoothFn for HalfSquaredDistance {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * self.set.distance(x).powi(2)
    }
    fn grad(&self, x: &Vector) -> Vector {
        x - self.set.project(x)
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// Largest relative disagreement between `grad` and central differences of
/// `eval` over the given points.
pub fn gradient_check(f: &dyn SmoothFn, points: &[Vector]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let g = f.grad(x);
        let mut fd = Vector::zeros(x.len());
        for k in 0..x.len() {
            let h = 1e-6 * x[k].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            fd[k] = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
        }
        let scale = g.norm().max(1.0);
        worst = worst.max((g - fd).norm() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::Matrix;
    use crate::sets::ConvexSet;

    #[test]
    fn prox_of_rejects_bad_input() {
        let f = Zero::new(2);
        let x = Vector::from_vec(vec![1.0, f64::NAN]);
        assert!(matches!(prox_of(&f, 1.0, &x), Err(Error::InvalidInput(_))));
        let y = Vector::from_vec(vec![1.0, 2.0]);
        assert!(prox_of(&f, 0.0, &y).is_err());
        assert!(matches!(
            prox_of(&f, 1.0, &Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minimizer_is_fixed_point() {
        let set = ConvexSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let f = crate::sets::Indicator::new(set);
        let x = Vector::from_vec(vec![0.3, 0.9]);
        assert_eq!(prox_of(&f, 3.0, &x).unwrap(), x);
    }

    #[test]
    fn smooth_gradients_match_finite_differences() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]]).unwrap();
        let ls = LeastSquares::new(Arc::new(m), Vector::from_vec(vec![1.0, 0.0, -2.0]), 0.7)
            .unwrap();
        let set = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let d = HalfSquaredDistance::new(set);
        let pts = sample_ball(&Vector::from_vec(vec![0.5, -2.0]), 3.0, 20, 3);
        assert!(gradient_check(&ls, &pts) < 1e-5);
        assert!(gradient_check(&d, &pts) < 1e-5);
    }

    #[test]
    fn least_squares_lipschitz_bounds_gradient_growth() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let ls = LeastSquares::new(Arc::new(m), Vector::zeros(2), 1.0).unwrap();
        let pts = sample_ball(&Vector::zeros(2), 5.0, 50, 11);
        for w in pts.windows(2) {
            let lhs = (ls.grad(&w[0]) - ls.grad(&w[1])).norm();
            let rhs = ls.lipschitz() * (&w[0] - &w[1]).norm();
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }
    }
}
