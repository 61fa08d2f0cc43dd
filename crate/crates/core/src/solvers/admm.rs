use nalgebra::{Cholesky, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{check_finite, ProxFn, Vector};
use crate::linear::{spd_factor, LinearMap};
use crate::schedule::StoppingRule;
use crate::trace::{Monitor, SolveResult};

use super::{check_gamma, check_point, Delta};

/// Functions `f` for which `argmin_x f(x) + |L x - v|^2 / 2` is one linear solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxLFunction {
    Zero,
    /// `weight |x - center|^2 / 2`.
    Quadratic { weight: f64, center: Vec<f64> },
}

impl ProxLFunction {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            ProxLFunction::Zero => Ok(()),
            ProxLFunction::Quadratic { weight, center } => {
                if !(*weight > 0.0 && weight.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic weight must be positive, got {weight}"
                    )));
                }
                if center.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: center.len(),
                    });
                }
                check_finite("center", &Vector::from_column_slice(center))
            }
        }
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        match self {
            ProxLFunction::Zero => 0.0,
            ProxLFunction::Quadratic { weight, center } => {
                0.5 * weight * (x - Vector::from_column_slice(center)).norm_squared()
            }
        }
    }
}

/// `v -> argmin_x gamma f(x) + |L x - v|^2 / 2` with the normal matrix
/// factorized once.
#[derive(Debug, Clone)]
pub struct ProxL {
    factor: Cholesky<f64, Dyn>,
    offset: Vector,
}

impl ProxL {
    pub fn new(f: &ProxLFunction, l: &dyn LinearMap, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let n = l.cols();
        f.validate(n)?;
        let dense = l.to_dense();
        let mut normal = dense.tr_mul(&dense);
        let offset = match f {
            ProxLFunction::Zero => Vector::zeros(n),
            ProxLFunction::Quadratic { weight, center } => {
                let w = gamma * weight;
                for k in 0..n {
                    normal[(k, k)] += w;
                }
                Vector::from_column_slice(center) * w
            }
        };
        let factor = spd_factor(normal, "the x-step system")?;
        Ok(ProxL { factor, offset })
    }

    pub fn apply(&self, l: &dyn LinearMap, v: &Vector) -> Vector {
        self.factor.solve(&(l.adjoint(v) + &self.offset))
    }
}

/// Minimizer of `f(x) + |L x - v|^2 / 2`.
pub fn prox_l(f: &ProxLFunction, l: &dyn LinearMap, v: &Vector) -> Result<Vector> {
    check_point("v", l.rows(), v)?;
    Ok(ProxL::new(f, l, 1.0)?.apply(l, v))
}

/// Alternating-direction method of multipliers for `min f(x) + g(L x)`:
///
/// `x_n = prox^L_{gamma f}(y_n - z_n)`, `s_n = L x_n`,
/// `y_{n+1} = prox_{gamma g}(s_n + z_n)`, `z_{n+1} = z_n + s_n - y_{n+1}`.
///
/// The auxiliary vectors are the final `y` and `z`.
pub fn admm(
    f: &ProxLFunction,
    l: &dyn LinearMap,
    g: &dyn ProxFn,
    gamma: f64,
    y0: &Vector,
    z0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let m = l.rows();
    if g.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: g.dim(),
        });
    }
    check_point("y0", m, y0)?;
    check_point("z0", m, z0)?;
    let step = ProxL::new(f, l, gamma)?;

    let mut mon = Monitor::new(stop)?;
    let mut y = y0.clone();
    let mut z = z0.clone();
    let mut x = step.apply(l, &(&y - &z));
    for k in 1..=mon.max_iter() {
        let s = l.apply(&x);
        let y_next = g.prox(gamma, &(&s + &z));
        let z_next = &z + &s - &y_next;
        let x_next = step.apply(l, &(&y_next - &z_next));
        let mut d = Delta::default();
        d.add(&x, &x_next);
        d.add(&y, &y_next);
        d.add(&z, &z_next);
        let x_change = (&x_next - &x).norm();
        x = x_next;
        y = y_next;
        z = z_next;
        if mon.step(k, x_change, d.change(), d.scale(), || f.eval(&x) + g.eval(&l.apply(&x))) {
            return Ok(mon.finish(x, true, k, vec![y, z]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![y, z]))
}
