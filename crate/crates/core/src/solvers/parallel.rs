use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::func::{SharedProx, Vector};
use crate::linear::{spd_factor, SharedMap};
use crate::schedule::{Relaxation, StoppingRule};
use crate::trace::{Monitor, SolveResult};

use super::{check_gamma, check_point, check_weights, weighted_sum, Delta};

/// Parallel proximal algorithm for `min sum_i f_i`:
///
/// `p_{i,n} = prox_{gamma f_i / w_i} y_{i,n}`, `p_n = sum_i w_i p_{i,n}`,
/// `y_{i,n+1} = y_{i,n} + lambda_n (2 p_n - x_n - p_{i,n})`,
/// `x_{n+1} = x_n + lambda_n (p_n - x_n)`
///
/// with `x_0 = sum_i w_i y_{i,0}` and `lambda_n` in `[epsilon, 2 - epsilon]`.
/// The auxiliary vectors are the final `y_i`.
pub fn ppxa(
    fs: &[SharedProx],
    weights: &[f64],
    gamma: f64,
    relaxation: &Relaxation,
    ys0: &[Vector],
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let first = fs
        .first()
        .ok_or_else(|| Error::InvalidInput("ppxa needs at least one function".into()))?;
    let n = first.dim();
    check_weights(weights, fs.len())?;
    if ys0.len() != fs.len() {
        return Err(Error::DimensionMismatch {
            expected: fs.len(),
            found: ys0.len(),
        });
    }
    for (f, y) in fs.iter().zip(ys0) {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.dim(),
            });
        }
        check_point("y0", n, y)?;
    }
    check_gamma(gamma)?;
    relaxation.check(1.0, 2.0)?;

    let mut mon = Monitor::new(stop)?;
    let mut ys = ys0.to_vec();
    let mut x = weighted_sum(weights, &ys);
    for k in 1..=mon.max_iter() {
        let lambda = relaxation.lambda.at(k - 1);
        let ps: Vec<Vector> = fs
            .iter()
            .zip(weights)
            .zip(&ys)
            .map(|((f, w), y)| f.prox(gamma / w, y))
            .collect();
        let p = weighted_sum(weights, &ps);
        let mut d = Delta::default();
        let reflect = &p * 2.0 - &x;
        let ys_next: Vec<Vector> = ys
            .iter()
            .zip(&ps)
            .map(|(y, pi)| y + (&reflect - pi) * lambda)
            .collect();
        let x_next = &x + (&p - &x) * lambda;
        d.add(&x, &x_next);
        for (y, yn) in ys.iter().zip(&ys_next) {
            d.add(y, yn);
        }
        let x_change = (&x_next - &x).norm();
        x = x_next;
        ys = ys_next;
        if mon.step(k, x_change, d.change(), d.scale(), || fs.iter().map(|f| f.eval(&x)).sum()) {
            return Ok(mon.finish(x, true, k, ys));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, ys))
}

/// Simultaneous-direction method of multipliers for `min sum_i g_i(L_i x)`
/// with `Q = sum_i L_i^T L_i` invertible:
///
/// `x_n = Q^{-1} sum_i L_i^T (y_{i,n} - z_{i,n})`, `s_{i,n} = L_i x_n`,
/// `y_{i,n+1} = prox_{gamma g_i}(s_{i,n} + z_{i,n})`,
/// `z_{i,n+1} = z_{i,n} + s_{i,n} - y_{i,n+1}`.
///
/// `Q` is factorized once. The auxiliary vectors are the final `y_i`
/// followed by the final `z_i`.
pub fn sdmm(
    gs: &[SharedProx],
    ls: &[SharedMap],
    gamma: f64,
    ys0: &[Vector],
    zs0: &[Vector],
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let m = gs.len();
    if m == 0 {
        return Err(Error::InvalidInput("sdmm needs at least one function".into()));
    }
    for len in [ls.len(), ys0.len(), zs0.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: len,
            });
        }
    }
    let n = ls[0].cols();
    for i in 0..m {
        if ls[i].cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: ls[i].cols(),
            });
        }
        if gs[i].dim() != ls[i].rows() {
            return Err(Error::DimensionMismatch {
                expected: ls[i].rows(),
                found: gs[i].dim(),
            });
        }
        check_point("y0", ls[i].rows(), &ys0[i])?;
        check_point("z0", ls[i].rows(), &zs0[i])?;
    }
    check_gamma(gamma)?;
    let mut q = DMatrix::zeros(n, n);
    for l in ls {
        let dense = l.to_dense();
        q += dense.tr_mul(&dense);
    }
    let q = spd_factor(q, "Q = sum L_i^T L_i")?;

    let solve_x = |ys: &[Vector], zs: &[Vector]| {
        let mut rhs = Vector::zeros(n);
        for ((l, y), z) in ls.iter().zip(ys).zip(zs) {
            rhs += l.adjoint(&(y - z));
        }
        q.solve(&rhs)
    };

    let mut mon = Monitor::new(stop)?;
    let mut ys = ys0.to_vec();
    let mut zs = zs0.to_vec();
    let mut x = solve_x(&ys, &zs);
    for k in 1..=mon.max_iter() {
        let mut ys_next = Vec::with_capacity(m);
        let mut zs_next = Vec::with_capacity(m);
        for i in 0..m {
            let s = ls[i].apply(&x);
            let y = gs[i].prox(gamma, &(&s + &zs[i]));
            zs_next.push(&zs[i] + s - &y);
            ys_next.push(y);
        }
        let x_next = solve_x(&ys_next, &zs_next);
        let mut d = Delta::default();
        d.add(&x, &x_next);
        for i in 0..m {
            d.add(&ys[i], &ys_next[i]);
            d.add(&zs[i], &zs_next[i]);
        }
        let x_change = (&x_next - &x).norm();
        x = x_next;
        ys = ys_next;
        zs = zs_next;
        let objective = || gs.iter().zip(ls).map(|(g, l)| g.eval(&l.apply(&x))).sum();
        if mon.step(k, x_change, d.change(), d.scale(), objective) {
            ys.extend(zs);
            return Ok(mon.finish(x, true, k, ys));
        }
    }
    let iters = mon.max_iter();
    ys.extend(zs);
    Ok(mon.finish(x, false, iters, ys))
}
