//! Rules that build new proximity operators out of known ones.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog::scalar_kind::ScalarKind;
use crate::error::{Error, Result};
use crate::func::{check_dim, check_finite, ProxFn, SharedProx, Vector};
use crate::linear::{tight_frame_gap, SharedMap};
use crate::sets::ConvexSet;

/// `phi(x - z)`.
#[derive(Debug, Clone)]
pub struct Translation {
    base: SharedProx,
    z: Vector,
}

impl Translation {
    pub fn new(base: SharedProx, z: Vector) -> Result<Self> {
        check_dim(base.dim(), &z)?;
        check_finite("z", &z)?;
        Ok(Translation { base, z })
    }
}

impl ProxFn for Translation {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base.eval(&(x - &self.z))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        &self.z + self.base.prox(gamma, &(x - &self.z))
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.base.eval_conjugate(u).map(|v| v + self.z.dot(u))
    }
}

/// `phi(x / rho)` for `rho != 0`.
#[derive(Debug, Clone)]
pub struct Scaling {
    base: SharedProx,
    rho: f64,
}

impl Scaling {
    pub fn new(base: SharedProx, rho: f64) -> Result<Self> {
        if rho == 0.0 || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scaling factor must be finite and nonzero, got {rho}"
            )));
        }
        Ok(Scaling { base, rho })
    }
}

impl ProxFn for Scaling {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base.eval(&(x / self.rho))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        self.base.prox(gamma / (self.rho * self.rho), &(x / self.rho)) * self.rho
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.base.eval_conjugate(&(u * self.rho))
    }
}

/// `phi(-x)`.
#[derive(Debug, Clone)]
pub struct Reflection {
    base: SharedProx,
}

impl Reflection {
    pub fn new(base: SharedProx) -> Self {
        Reflection { base }
    }
}

impl ProxFn for Reflection {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base.eval(&-x)
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        -self.base.prox(gamma, &-x)
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.base.eval_conjugate(&-u)
    }
}

/// `phi(x) + alpha |x|^2 / 2 + u^T x + c` with `alpha >= 0`.
#[derive(Debug, Clone)]
pub struct QuadraticPerturbation {
    base: SharedProx,
    alpha: f64,
    u: Vector,
    c: f64,
}

impl QuadraticPerturbation {
    pub fn new(base: SharedProx, alpha: f64, u: Vector, c: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("constant must be finite, got {c}")));
        }
        check_dim(base.dim(), &u)?;
        check_finite("u", &u)?;
        Ok(QuadraticPerturbation { base, alpha, u, c })
    }
}

impl ProxFn for QuadraticPerturbation {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base.eval(x) + 0.5 * self.alpha * x.norm_squared() + self.u.dot(x) + self.c
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let s = gamma * self.alpha + 1.0;
        self.base.prox(gamma / s, &((x - &self.u * gamma) / s))
    }
}

/// Convex conjugate `phi*`, through the Moreau decomposition.
#[derive(Debug, Clone)]
pub struct Conjugate {
    base: SharedProx,
}

impl Conjugate {
    pub fn new(base: SharedProx) -> Self {
        Conjugate { base }
    }
}

/// `sup_y u^T y - phi(y)` by the proximal point iteration on `phi - u^T .`.
/// Diverging iterates mean the supremum is infinite.
fn numeric_conjugate(base: &dyn ProxFn, u: &Vector) -> f64 {
    let mut p = Vector::zeros(u.len());
    for _ in 0..5000 {
        let next = base.prox(1.0, &(&p + u));
        let step = (&next - &p).norm();
        p = next;
        if step <= 1e-13 * p.norm().max(1.0) {
            return u.dot(&p) - base.eval(&p);
        }
        if p.norm() > 1e12 {
            return f64::INFINITY;
        }
    }
    u.dot(&p) - base.eval(&p)
}

impl ProxFn for Conjugate {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base
            .eval_conjugate(x)
            .unwrap_or_else(|| numeric_conjugate(self.base.as_ref(), x))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        x - self.base.prox(1.0 / gamma, &(x / gamma)) * gamma
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        Some(self.base.eval(u))
    }
}

/// Which Moreau-type function of a base to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoreauVariant {
    /// `d_C^2 / 2`; the base must be an indicator.
    SquaredDistance,
    /// `inf_y phi(y) + |x - y|^2 / 2`.
    Envelope,
    /// `|x|^2 / 2` minus the envelope.
    Complement,
}

#[derive(Debug, Clone)]
pub struct SquaredDistance {
    set: ConvexSet,
}

impl SquaredDistance {
    pub fn new(set: ConvexSet) -> Self {
        SquaredDistance { set }
    }
}

impl ProxFn for SquaredDistance {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * self.set.distance(x).powi(2)
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        (x + self.set.project(x) * gamma) / (1.0 + gamma)
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        Some(self.set.support(u) + 0.5 * u.norm_squared())
    }
}

#[derive(Debug, Clone)]
pub struct MoreauEnvelope {
    base: SharedProx,
}

impl MoreauEnvelope {
    pub fn new(base: SharedProx) -> Self {
        MoreauEnvelope { base }
    }
}

fn envelope_value(base: &dyn ProxFn, x: &Vector) -> f64 {
    let p = base.prox(1.0, x);
    base.eval(&p) + 0.5 * (x - p).norm_squared()
}

impl ProxFn for MoreauEnvelope {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        envelope_value(self.base.as_ref(), x)
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let p = self.base.prox(1.0 + gamma, x);
        x + (p - x) * (gamma / (1.0 + gamma))
    }
}

#[derive(Debug, Clone)]
pub struct MoreauComplement {
    base: SharedProx,
}

impl MoreauComplement {
    pub fn new(base: SharedProx) -> Self {
        MoreauComplement { base }
    }
}

impl ProxFn for MoreauComplement {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * x.norm_squared() - envelope_value(self.base.as_ref(), x)
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let s = 1.0 + gamma;
        x - self.base.prox(1.0 / s, &(x / s)) * gamma
    }
}

/// `phi(L x)` for a tight frame `L L^T = nu I`.
#[derive(Debug, Clone)]
pub struct Semiorthogonal {
    base: SharedProx,
    map: SharedMap,
    nu: f64,
}

impl Semiorthogonal {
    pub fn new(base: SharedProx, map: SharedMap) -> Result<Self> {
        if base.dim() != map.rows() {
            return Err(Error::DimensionMismatch {
                expected: map.rows(),
                found: base.dim(),
            });
        }
        let nu = map.tight_frame_nu().ok_or_else(|| {
            Error::Precondition("operator carries no tight-frame constant".into())
        })?;
        let gap = tight_frame_gap(map.as_ref(), nu, 8);
        if !(nu > 0.0) || gap > 1e-10 {
            return Err(Error::Precondition(format!(
                "L L^T = {nu} I fails on random probes (relative gap {gap:e})"
            )));
        }
        Ok(Semiorthogonal { base, map, nu })
    }
}

impl ProxFn for Semiorthogonal {
    fn dim(&self) -> usize {
        self.map.cols()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.base.eval(&self.map.apply(x))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let lx = self.map.apply(x);
        let p = self.base.prox(gamma * self.nu, &lx);
        x + self.map.adjoint(&(p - lx)) / self.nu
    }
}

/// `weight |L x - y|^2 / 2`, with `L^T L` diagonalized once.
#[derive(Debug, Clone)]
pub struct QuadraticProx {
    map: SharedMap,
    y: Vector,
    weight: f64,
    eigvecs: DMatrix<f64>,
    eigvals: Vector,
    lty: Vector,
}

impl QuadraticProx {
    pub fn new(map: SharedMap, y: Vector, weight: f64) -> Result<Self> {
        check_dim(map.rows(), &y)?;
        check_finite("y", &y)?;
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {weight}")));
        }
        let dense = map.to_dense();
        let eig = dense.tr_mul(&dense).symmetric_eigen();
        let lty = map.adjoint(&y);
        Ok(QuadraticProx {
            map,
            y,
            weight,
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues.map(|v| v.max(0.0)),
            lty,
        })
    }
}

impl ProxFn for QuadraticProx {
    fn dim(&self) -> usize {
        self.map.cols()
    }
    fn eval(&self, x: &Vector) -> f64 {
        0.5 * self.weight * (self.map.apply(x) - &self.y).norm_squared()
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let g = gamma * self.weight;
        let rhs = x + &self.lty * g;
        let mut c = self.eigvecs.tr_mul(&rhs);
        for (ck, lk) in c.iter_mut().zip(self.eigvals.iter()) {
            *ck /= 1.0 + g * lk;
        }
        &self.eigvecs * c
    }
}

/// `weight d_C(x)`.
#[derive(Debug, Clone)]
pub struct Distance {
    set: ConvexSet,
    weight: f64,
}

impl Distance {
    pub fn new(set: ConvexSet, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {weight}")));
        }
        Ok(Distance { set, weight })
    }
}

impl ProxFn for Distance {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.weight * self.set.distance(x)
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let t = gamma * self.weight;
        let p = self.set.project(x);
        let d = (x - &p).norm();
        if d > t {
            x + (p - x) * (t / d)
        } else {
            p
        }
    }
}

/// `phi(d_C(x))` for an even scalar `phi` differentiable at 0 with `phi'(0) = 0`.
#[derive(Debug, Clone)]
pub struct DistanceFunction {
    set: ConvexSet,
    phi: ScalarKind,
}

impl DistanceFunction {
    pub fn new(set: ConvexSet, phi: ScalarKind) -> Result<Self> {
        phi.validate()?;
        if !phi.smooth_even_at_zero() {
            return Err(Error::InvalidParameter(
                "phi must be even and differentiable at 0 with phi'(0) = 0".into(),
            ));
        }
        Ok(DistanceFunction { set, phi })
    }
}

impl ProxFn for DistanceFunction {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.phi.eval(self.set.distance(x))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let p = self.set.project(x);
        let d = (x - &p).norm();
        if d == 0.0 {
            return x.clone();
        }
        let shrink = 1.0 - self.phi.prox(gamma, d) / d;
        x + (p - x) * shrink
    }
}

/// Support function `sigma_C`.
#[derive(Debug, Clone)]
pub struct SupportFunction {
    set: ConvexSet,
}

impl SupportFunction {
    pub fn new(set: ConvexSet) -> Self {
        SupportFunction { set }
    }
}

impl ProxFn for SupportFunction {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.set.support(x)
    }
    // gamma sigma_C = sigma_{gamma C}, whose prox is x - P_{gamma C} x
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        x - self.set.project(&(x / gamma)) * gamma
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        Some(if self.set.contains(u) { 0.0 } else { f64::INFINITY })
    }
}

/// `sigma_C(x) + phi(|x|)` for an even, non-constant scalar `phi`.
#[derive(Debug, Clone)]
pub struct Thresholding {
    set: ConvexSet,
    phi: ScalarKind,
    radius: f64,
}

impl Thresholding {
    pub fn new(set: ConvexSet, phi: ScalarKind) -> Result<Self> {
        phi.validate()?;
        let radius = phi.even_argmin_radius().ok_or_else(|| {
            Error::InvalidParameter("phi must be even and not constant".into())
        })?;
        Ok(Thresholding { set, phi, radius })
    }
}

impl ProxFn for Thresholding {
    fn dim(&self) -> usize {
        self.set.dim()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.set.support(x) + self.phi.eval(x.norm())
    }
    // scaling by gamma replaces C with gamma C and phi with gamma phi; the
    // argmin of phi is unchanged
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let r = x - self.set.project(&(x / gamma)) * gamma;
        let d = r.norm();
        if d > self.radius {
            r * (self.phi.prox(gamma, d) / d)
        } else {
            r
        }
    }
}

/// Which function of the distance to a set to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DistanceVariant {
    Distance { weight: f64 },
    FunctionOfDistance { phi: ScalarKind },
    Support,
    Thresholding { phi: ScalarKind },
}

/// `f(x_1, ..., x_m) = sum_i f_i(x_i)` on a product of spaces.
#[derive(Debug, Clone)]
pub struct ProductProx {
    blocks: Vec<SharedProx>,
}

impl ProductProx {
    pub fn new(blocks: Vec<SharedProx>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("product needs at least one block".into()));
        }
        Ok(ProductProx { blocks })
    }

    fn split<'a>(&'a self, x: &'a Vector) -> impl Iterator<Item = (&'a SharedProx, Vector)> + 'a {
        let mut offset = 0;
        self.blocks.iter().map(move |b| {
            let n = b.dim();
            let part = x.rows(offset, n).into_owned();
            offset += n;
            (b, part)
        })
    }
}

impl ProxFn for ProductProx {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).sum()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.split(x).map(|(b, part)| b.eval(&part)).sum()
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        let parts: Vec<f64> = self
            .split(x)
            .flat_map(|(b, part)| b.prox(gamma, &part).iter().copied().collect::<Vec<_>>())
            .collect();
        Vector::from_vec(parts)
    }
}
