use crate::catalog::Conjugate;
use crate::error::{Error, Result};
use crate::func::{ProxFn, SharedProx, Vector};
use crate::linear::{operator_norm, LinearMap};
use crate::schedule::{Schedule, StoppingRule};
use crate::trace::{Monitor, SolveResult};

use super::{check_point, Delta};

/// Dual forward-backward method for `min h(x) + g(L x) + |x - r|^2 / 2`:
///
/// `x_n = prox_h(r - L^T u_n)`,
/// `u_{n+1} = u_n + lambda_n (prox_{gamma_n g*}(u_n + gamma_n L x_n) - u_n)`
///
/// with `epsilon` in `]0, min(1, 1/|L|^2)[`, `gamma_n` in
/// `[epsilon, 2/|L|^2 - epsilon]` and `lambda_n` in `[epsilon, 1]`. The
/// auxiliary vector is the final dual iterate `u`.
pub fn dual_forward_backward(
    h: SharedProx,
    g: SharedProx,
    l: &dyn LinearMap,
    r: &Vector,
    schedule: &Schedule,
    u0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let n = l.cols();
    if h.dim() != n || g.dim() != l.rows() {
        return Err(Error::DimensionMismatch {
            expected: if h.dim() != n { n } else { l.rows() },
            found: if h.dim() != n { h.dim() } else { g.dim() },
        });
    }
    check_point("r", n, r)?;
    check_point("u0", l.rows(), u0)?;
    let norm = operator_norm(l, 1e-12, 10_000).value;
    if norm == 0.0 {
        return Err(Error::InvalidInput("linear operator is zero".into()));
    }
    let norm_sq = norm * norm;
    schedule.check_epsilon(1f64.min(1.0 / norm_sq))?;
    let eps = schedule.epsilon;
    schedule.gamma.check_range("gamma", eps, 2.0 / norm_sq - eps)?;
    schedule.lambda.check_range("lambda", eps, 1.0)?;

    let g_conj = Conjugate::new(g.clone());
    let mut mon = Monitor::new(stop)?;
    let mut u = u0.clone();
    let mut x = h.prox(1.0, &(r - l.adjoint(&u)));
    for k in 1..=mon.max_iter() {
        let idx = k - 1;
        let gamma = schedule.gamma.at(idx);
        let lambda = schedule.lambda.at(idx);
        let p = g_conj.prox(gamma, &(&u + l.apply(&x) * gamma));
        let u_next = &u + (p - &u) * lambda;
        let x_next = h.prox(1.0, &(r - l.adjoint(&u_next)));
        let mut d = Delta::default();
        d.add(&x, &x_next);
        d.add(&u, &u_next);
        let x_change = (&x_next - &x).norm();
        x = x_next;
        u = u_next;
        let objective = || h.eval(&x) + g.eval(&l.apply(&x)) + 0.5 * (&x - r).norm_squared();
        if mon.step(k, x_change, d.change(), d.scale(), objective) {
            return Ok(mon.finish(x, true, k, vec![u]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![u]))
}
