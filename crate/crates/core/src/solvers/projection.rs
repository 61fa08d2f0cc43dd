use crate::error::{Error, Result};
use crate::func::Vector;
use crate::schedule::StoppingRule;
use crate::sets::ConvexSet;
use crate::trace::{Monitor, SolveResult};

use super::check_point;

/// Cyclic projections `x_{n+1} = P_1 P_2 ... P_m x_n`.
///
/// Convergence is declared only once the iterate lies in every set (up to
/// the membership tolerance), so a stalled cycle on sets with empty
/// intersection runs to `max_iter` and reports `converged = false`. The
/// recorded objective is `sum_i d_i(x)^2 / 2`.
pub fn pocs(sets: &[ConvexSet], x0: &Vector, stop: &StoppingRule) -> Result<SolveResult> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidInput("pocs needs at least one set".into()))?;
    let n = first.dim();
    for s in sets {
        if s.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.dim(),
            });
        }
    }
    check_point("x0", n, x0)?;
    let mut mon = Monitor::new(stop)?;
    let mut x = x0.clone();
    for k in 1..=mon.max_iter() {
        let mut next = x.clone();
        for s in sets.iter().rev() {
            next = s.project(&next);
        }
        let change = (&next - &x).norm();
        x = next;
        let feasible = sets.iter().all(|s| s.contains(&x));
        mon.step(k, change, change, 0.0, || {
            sets.iter().map(|s| 0.5 * s.distance(&x).powi(2)).sum()
        });
        if feasible {
            return Ok(mon.finish(x, true, k, vec![]));
        }
    }
    let iters = mon.max_iter();
    Ok(mon.finish(x, false, iters, vec![]))
}
