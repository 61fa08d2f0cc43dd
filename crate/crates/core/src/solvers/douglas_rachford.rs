use crate::error::{Error, Result};
use crate::func::{ProxFn, Vector};
use crate::schedule::{Relaxation, StoppingRule};
use crate::trace::{Monitor, SolveResult};

use super::{check_gamma, check_point, Delta};

/// Douglas-Rachford splitting for `min f1 + f2`:
///
/// `x_n = prox_{gamma f2} y_n`,
/// `y_{n+1} = y_n + lambda_n (prox_{gamma f1}(2 x_n - y_n) - x_n)`
///
/// with `lambda_n` in `[epsilon, 2 - epsilon]`, `epsilon` in `]0, 1[`.
/// The returned auxiliary vector is the final `y`. The recorded objective is
/// `f1(x_n) + f2(x_n)`, which is `+inf` while `x_n` lies outside `dom f1`.
pub fn douglas_rachford(
    f1: &dyn ProxFn,
    f2: &dyn ProxFn,
    gamma: f64,
    relaxation: &Relaxation,
    y0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            found: f2.dim(),
        });
    }
    check_point("y0", f1.dim(), y0)?;
    check_gamma(gamma)?;
    relaxation.check(1.0, 2.0)?;

    let mut mon = Monitor::new(stop)?;
    let mut y = y0.clone();
    let mut x = f2.prox(gamma, &y);
    for k in 1..=mon.max_iter() {
        let lambda = relaxation.lambda.at(k - 1);
        let p = f1.prox(gamma, &(&x * 2.0 - &y));
        let y_next = &y + (p - &x) * lambda;
        let x_next = f2.prox(gamma, &y_next);
        let mut d = Delta::default();
        d.add(&x, &x_next);
        d.add(&y, &y_next);
        let x_change = (&x_next - &x).norm();
        x = x_next;
        y = y_next;
        if mon.step(k, x_change, d.change(), d.scale(), || f1.eval(&x) + f2.eval(&x)) {
            return Ok(mon.finish(x, true, k, vec![y]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![y]))
}
