//! Proximal splitting algorithms. Each solver validates its inputs and
//! schedule before the first iteration and returns the final iterate with
//! a per-iteration trace.
//!
//! Unless stated otherwise, iteration stops when the relative change of
//! the solver state `|s_{n+1} - s_n| / max(1, |s_n|)` falls below the
//! stopping tolerance, where the state is `x` together with any auxiliary
//! sequences the algorithm carries.

mod admm;
mod douglas_rachford;
mod dual;
mod dykstra;
mod forward_backward;
mod parallel;
mod projection;

pub use admm::{admm, prox_l, ProxL, ProxLFunction};
pub use douglas_rachford::douglas_rachford;
pub use dual::dual_forward_backward;
pub use dykstra::{dykstra_like, parallel_dykstra};
pub use forward_backward::{fista, fista_t_sequence, forward_backward, forward_backward_const};
pub use parallel::{ppxa, sdmm};
pub use projection::pocs;

use crate::error::{Error, Result};
use crate::func::{check_dim, check_finite, ProxFn, SmoothFn, Vector};

/// Squared change and squared previous norm of one block of the state.
fn block_delta(prev: &Vector, next: &Vector) -> (f64, f64) {
    ((next - prev).norm_squared(), prev.norm_squared())
}

/// Accumulates `(|change|, |previous state|)` over blocks in order.
#[derive(Default)]
struct Delta {
    change_sq: f64,
    scale_sq: f64,
}

impl Delta {
    fn add(&mut self, prev: &Vector, next: &Vector) {
        let (c, s) = block_delta(prev, next);
        self.change_sq += c;
        self.scale_sq += s;
    }

    fn change(&self) -> f64 {
        self.change_sq.sqrt()
    }

    fn scale(&self) -> f64 {
        self.scale_sq.sqrt()
    }
}

fn check_point(name: &str, dim: usize, x: &Vector) -> Result<()> {
    check_dim(dim, x)?;
    check_finite(name, x)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")))
    }
}

/// Weights in `]0, 1]` summing to 1, one per function.
fn check_weights(weights: &[f64], m: usize) -> Result<()> {
    if weights.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w <= 1.0)) {
        return Err(Error::InvalidParameter(format!("weight {w} lies outside ]0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// `sum_i w_i v_i`, accumulated in index order.
fn weighted_sum(weights: &[f64], vs: &[Vector]) -> Vector {
    let mut out = Vector::zeros(vs[0].len());
    for (w, v) in weights.iter().zip(vs) {
        out.axpy(*w, v, 1.0);
    }
    out
}

/// `|x - prox_{gamma f1}(x - gamma grad f2(x))|`, zero exactly at the
/// minimizers of `f1 + f2`.
pub fn forward_backward_residual(
    f1: &dyn ProxFn,
    f2: &dyn SmoothFn,
    gamma: f64,
    x: &Vector,
) -> f64 {
    (x - f1.prox(gamma, &(x - f2.grad(x) * gamma))).norm()
}

/// `|x - prox_{gamma f1}(2x - y)|` for the Douglas-Rachford pair `(x, y)`
/// with `x = prox_{gamma f2} y`; zero at a fixed point.
pub fn douglas_rachford_residual(f1: &dyn ProxFn, gamma: f64, x: &Vector, y: &Vector) -> f64 {
    (x - f1.prox(gamma, &(x * 2.0 - y))).norm()
}
