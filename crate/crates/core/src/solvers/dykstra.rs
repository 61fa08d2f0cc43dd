use crate::error::{Error, Result};
use crate::func::{ProxFn, SharedProx, Vector};
use crate::schedule::StoppingRule;
use crate::trace::{Monitor, SolveResult};

use super::{check_point, check_weights, weighted_sum, Delta};

/// Dykstra-like method for `prox_{f+g} r`, i.e. `min f + g + |x - r|^2 / 2`.
/// Starts from `x_0 = r`, `p_0 = q_0 = 0`; the auxiliary vectors are the
/// final `p` and `q`.
pub fn dykstra_like(
    f: &dyn ProxFn,
    g: &dyn ProxFn,
    r: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    check_point("r", f.dim(), r)?;

    let mut mon = Monitor::new(stop)?;
    let n = r.len();
    let mut x = r.clone();
    let mut p = Vector::zeros(n);
    let mut q = Vector::zeros(n);
    for k in 1..=mon.max_iter() {
        let y = g.prox(1.0, &(&x + &p));
        let p_next = &x + &p - &y;
        let x_next = f.prox(1.0, &(&y + &q));
        let q_next = &y + &q - &x_next;
        let mut d = Delta::default();
        d.add(&x, &x_next);
        d.add(&p, &p_next);
        d.add(&q, &q_next);
        let x_change = (&x_next - &x).norm();
        x = x_next;
        p = p_next;
        q = q_next;
        let objective = || f.eval(&x) + g.eval(&x) + 0.5 * (&x - r).norm_squared();
        if mon.step(k, x_change, d.change(), d.scale(), objective) {
            return Ok(mon.finish(x, true, k, vec![p, q]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![p, q]))
}

/// Parallel Dykstra-like method for `min sum_i w_i f_i + |x - r|^2 / 2`.
pub fn parallel_dykstra(
    fs: &[SharedProx],
    weights: &[f64],
    r: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    if fs.is_empty() {
        return Err(Error::InvalidInput("parallel Dykstra needs at least one function".into()));
    }
    check_weights(weights, fs.len())?;
    let n = r.len();
    for f in fs {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.dim(),
            });
        }
    }
    check_point("r", n, r)?;

    let mut mon = Monitor::new(stop)?;
    let mut x = r.clone();
    let mut zs = vec![r.clone(); fs.len()];
    for k in 1..=mon.max_iter() {
        let ps: Vec<Vector> = fs.iter().zip(&zs).map(|(f, z)| f.prox(1.0, z)).collect();
        let x_next = weighted_sum(weights, &ps);
        let mut d = Delta::default();
        d.add(&x, &x_next);
        let zs_next: Vec<Vector> = zs
            .iter()
            .zip(&ps)
            .map(|(z, p)| &x_next + z - p)
            .collect();
        for (z, zn) in zs.iter().zip(&zs_next) {
            d.add(z, zn);
        }
        let x_change = (&x_next - &x).norm();
        x = x_next;
        zs = zs_next;
        let objective = || {
            fs.iter()
                .zip(weights)
                .map(|(f, w)| w * f.eval(&x))
                .sum::<f64>()
                + 0.5 * (&x - r).norm_squared()
        };
        if mon.step(k, x_change, d.change(), d.scale(), objective) {
            return Ok(mon.finish(x, true, k, zs));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, zs))
}
