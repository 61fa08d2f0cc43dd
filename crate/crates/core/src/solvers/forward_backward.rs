use crate::error::{Error, Result};
use crate::func::{ProxFn, SmoothFn, Vector};
use crate::schedule::{Relaxation, Schedule, StoppingRule};
use crate::trace::{Monitor, SolveResult};

use super::check_point;

fn check_pair(f1: &dyn ProxFn, f2: &dyn SmoothFn, x0: &Vector) -> Result<f64> {
    if f1.dim() != f2.dim() {
        return Err(Error::DimensionMismatch {
            expected: f1.dim(),
            found: f2.dim(),
        });
    }
    check_point("x0", f1.dim(), x0)?;
    let beta = f2.lipschitz();
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant must be positive, got {beta}"
        )));
    }
    Ok(beta)
}

/// Forward-backward splitting for `min f1 + f2` with `grad f2`
/// `beta`-Lipschitz:
///
/// `x_{n+1} = x_n + lambda_n (prox_{gamma_n f1}(x_n - gamma_n grad f2(x_n)) - x_n)`
///
/// with `epsilon` in `]0, min(1, 1/beta)[`, `gamma_n` in
/// `[epsilon, 2/beta - epsilon]` and `lambda_n` in `[epsilon, 1]`.
pub fn forward_backward(
    f1: &dyn ProxFn,
    f2: &dyn SmoothFn,
    schedule: &Schedule,
    x0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let beta = check_pair(f1, f2, x0)?;
    schedule.check_epsilon(1f64.min(1.0 / beta))?;
    let eps = schedule.epsilon;
    schedule.gamma.check_range("gamma", eps, 2.0 / beta - eps)?;
    schedule.lambda.check_range("lambda", eps, 1.0)?;

    let mut mon = Monitor::new(stop)?;
    let mut x = x0.clone();
    for k in 1..=mon.max_iter() {
        let n = k - 1;
        let gamma = schedule.gamma.at(n);
        let lambda = schedule.lambda.at(n);
        let y = &x - f2.grad(&x) * gamma;
        let p = f1.prox(gamma, &y);
        let next = &x + (p - &x) * lambda;
        let change = (&next - &x).norm();
        let scale = x.norm();
        x = next;
        if mon.step(k, change, change, scale, || f1.eval(&x) + f2.eval(&x)) {
            return Ok(mon.finish(x, true, k, vec![]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![]))
}

/// Forward-backward with the fixed step `1/beta` and over-relaxation
/// `lambda_n` in `[epsilon, 3/2 - epsilon]`, `epsilon` in `]0, 3/4[`.
pub fn forward_backward_const(
    f1: &dyn ProxFn,
    f2: &dyn SmoothFn,
    relaxation: &Relaxation,
    x0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let beta = check_pair(f1, f2, x0)?;
    relaxation.check(0.75, 1.5)?;
    let gamma = 1.0 / beta;

    let mut mon = Monitor::new(stop)?;
    let mut x = x0.clone();
    for k in 1..=mon.max_iter() {
        let lambda = relaxation.lambda.at(k - 1);
        let y = &x - f2.grad(&x) * gamma;
        let p = f1.prox(gamma, &y);
        let next = &x + (p - &x) * lambda;
        let change = (&next - &x).norm();
        let scale = x.norm();
        x = next;
        if mon.step(k, change, change, scale, || f1.eval(&x) + f2.eval(&x)) {
            return Ok(mon.finish(x, true, k, vec![]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![]))
}

/// `t_0 = 1`, `t_{n+1} = (1 + sqrt(4 t_n^2 + 1)) / 2`; returns `t_0..=t_n`.
pub fn fista_t_sequence(n: usize) -> Vec<f64> {
    let mut ts = Vec::with_capacity(n + 1);
    let mut t = 1.0f64;
    ts.push(t);
    for _ in 0..n {
        t = (1.0 + (4.0 * t * t + 1.0).sqrt()) / 2.0;
        ts.push(t);
    }
    ts
}

/// Beck-Teboulle accelerated proximal gradient method with step `1/beta`.
/// Stops when both `|x_{n+1} - x_n|` and the forward-backward residual
/// `|x_{n+1} - z_n|` meet the tolerance. The objective `f1(x_n) + f2(x_n)` is within `2 beta |x_0 - x*|^2 / (n+1)^2`
/// of the optimum.
pub fn fista(
    f1: &dyn ProxFn,
    f2: &dyn SmoothFn,
    x0: &Vector,
    stop: &StoppingRule,
) -> Result<SolveResult> {
    let beta = check_pair(f1, f2, x0)?;
    let gamma = 1.0 / beta;

    let mut mon = Monitor::new(stop)?;
    let mut x = x0.clone();
    let mut z = x0.clone();
    let mut t = 1.0f64;
    for k in 1..=mon.max_iter() {
        let y = &z - f2.grad(&z) * gamma;
        let next = f1.prox(gamma, &y);
        // the momentum keeps |x_{n+1} - x_n| well below the distance to the
        // solution, so the step residual at z_n must be small as well
        let step = (&next - &z).norm();
        let t_next = (1.0 + (4.0 * t * t + 1.0).sqrt()) / 2.0;
        let lambda = 1.0 + (t - 1.0) / t_next;
        z = &x + (&next - &x) * lambda;
        t = t_next;
        let change = (&next - &x).norm();
        let scale = x.norm();
        x = next;
        if mon.step(k, change, change.max(step), scale, || f1.eval(&x) + f2.eval(&x)) {
            return Ok(mon.finish(x, true, k, vec![z]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![z]))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::catalog::{ScalarKind, SeparableProx};
    use crate::func::{HalfSquaredDistance, Quadratic, Zero, ZeroSmooth};
    use crate::schedule::Sequence;
    use crate::sets::{ConvexSet, Indicator};
    use nalgebra::DMatrix;

    fn scalar(v: f64) -> Vector {
        Vector::from_vec(vec![v])
    }

    fn interval_problem() -> (Indicator, HalfSquaredDistance) {
        let c = ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap();
        let d = ConvexSet::boxed(vec![2.0], vec![3.0]).unwrap();
        (Indicator::new(c), HalfSquaredDistance::new(d))
    }

    #[test]
    fn t_sequence_starts_at_golden_ratio() {
        let ts = fista_t_sequence(2);
        assert_eq!(ts[0], 1.0);
        assert!((ts[1] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn alternating_projection_between_intervals() {
        let (f1, f2) = interval_problem();
        let sched = Schedule {
            gamma: Sequence::Constant(1.0),
            lambda: Sequence::Constant(1.0),
            epsilon: 0.05,
        };
        let r = forward_backward(&f1, &f2, &sched, &scalar(-4.0), &StoppingRule::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.x[0], 1.0);
        let r = forward_backward_const(
            &f1,
            &f2,
            &Relaxation::constant(1.4, 0.05),
            &scalar(-4.0),
            &StoppingRule::default(),
        )
        .unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_method_and_proximal_point() {
        let a = Vector::from_vec(vec![1.0, -2.0]);
        let f2 = Quadratic::new(DMatrix::identity(2, 2), a.clone()).unwrap();
        let sched = Schedule::forward_backward_default(f2.lipschitz());
        let r = forward_backward(&Zero::new(2), &f2, &sched, &Vector::zeros(2), &StoppingRule::default())
            .unwrap();
        assert!((r.x - a).norm() < 1e-9);

        let abs = SeparableProx::new(vec![ScalarKind::abs(1.0)]).unwrap();
        let r = forward_backward(
            &abs,
            &ZeroSmooth::new(1),
            &Schedule::forward_backward_default(1.0),
            &scalar(7.5),
            &StoppingRule::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.x[0], 0.0);
    }

    #[test]
    fn unit_relaxation_matches_plain_forward_backward() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f2 = Quadratic::new(h, Vector::from_vec(vec![1.0, 3.0])).unwrap();
        let f1 = Arc::new(SeparableProx::new(vec![ScalarKind::abs(0.3); 2]).unwrap());
        let beta = f2.lipschitz();
        let sched = Schedule {
            gamma: Sequence::Constant(1.0 / beta),
            lambda: Sequence::Constant(1.0),
            epsilon: 0.05 * (1f64).min(1.0 / beta),
        };
        let stop = StoppingRule::new(1e-14, 40);
        let x0 = Vector::from_vec(vec![-2.0, 5.0]);
        let a = forward_backward(f1.as_ref(), &f2, &sched, &x0, &stop).unwrap();
        let b = forward_backward_const(f1.as_ref(), &f2, &Relaxation::constant(1.0, 0.05), &x0, &stop)
            .unwrap();
        assert!((a.x - b.x).amax() <= 1e-12);
    }

    #[test]
    fn out_of_range_schedule_is_rejected() {
        let (f1, f2) = interval_problem();
        let sched = Schedule {
            gamma: Sequence::Constant(2.5),
            lambda: Sequence::Constant(1.0),
            epsilon: 0.05,
        };
        let err = forward_backward(&f1, &f2, &sched, &scalar(0.0), &StoppingRule::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidSchedule { ref name, .. } if name == "gamma"));
        let err = forward_backward_const(
            &f1,
            &f2,
            &Relaxation::constant(1.5, 0.05),
            &scalar(0.0),
            &StoppingRule::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchedule { .. }));
    }
}
