//! One-dimensional kernels: safeguarded root finding, the Lambert W
//! function on exponential arguments, and a derivative-free reference
//! minimizer for scalar proximity operators.

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_STEPS: usize = 200;
const MAX_EXPANSIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo < hi && !lo.is_nan() && !hi.is_nan() {
            Ok(Bracket { lo, hi })
        } else {
            Err(Error::InvalidInput(format!("bracket [{lo}, {hi}] is empty")))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Root of a continuous strictly monotone `g`.
///
/// Bisection is the backbone; each round also tries a secant (Newton with
/// a difference slope) step, accepted only when it lands strictly inside
/// the current bracket. When `g` has no sign change on the initial bracket
/// it is widened toward the side with the smaller `|g|`, doubling the width
/// up to 64 times. Endpoint values of `g` may be infinite.
pub fn solve_monotone(g: impl Fn(f64) -> f64, bracket: Bracket, tol: f64) -> Result<f64> {
    let Bracket { mut lo, mut hi } = bracket;
    let mut glo = g(lo);
    let mut ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    let mut expansions = 0;
    while glo.signum() == ghi.signum() || glo.is_nan() || ghi.is_nan() {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::Bracketing {
                lo: bracket.lo,
                hi: bracket.hi,
            });
        }
        let w = hi - lo;
        if glo.abs() < ghi.abs() {
            lo -= w;
            glo = g(lo);
        } else {
            hi += w;
            ghi = g(hi);
        }
        expansions += 1;
        if glo == 0.0 {
            return Ok(lo);
        }
        if ghi == 0.0 {
            return Ok(hi);
        }
    }

    let mut best = if glo.abs() < ghi.abs() { (lo, glo) } else { (hi, ghi) };
    for _ in 0..MAX_STEPS {
        if hi - lo <= tol {
            break;
        }
        // secant step between the bracket ends
        if glo.is_finite() && ghi.is_finite() {
            let s = hi - ghi * (hi - lo) / (ghi - glo);
            if s > lo && s < hi {
                let gs = g(s);
                if gs.abs() < best.1.abs() {
                    best = (s, gs);
                }
                if gs.abs() <= tol {
                    return Ok(s);
                }
                if gs.signum() == glo.signum() {
                    lo = s;
                    glo = gs;
                } else {
                    hi = s;
                    ghi = gs;
                }
            }
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
        if gm.abs() <= tol {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    if best.1.is_finite() {
        Ok(best.0)
    } else {
        Ok(lo + 0.5 * (hi - lo))
    }
}

/// `W(exp(x - 1))` for the principal branch of the Lambert W function,
/// computed as the root of `w + ln w = x - 1` in the variable `u = ln w`
/// so that large `x` never forms `exp(x - 1)`.
pub fn lambert_w_exp(x: f64) -> f64 {
    let t = x - 1.0;
    // h(u) = e^u + u - t is convex increasing; Newton from an upper bound
    // decreases monotonically to the root.
    let mut u = if t < 1.0 { t } else { t.ln() };
    for _ in 0..100 {
        let eu = u.exp();
        let step = (eu + u - t) / (eu + 1.0);
        u -= step;
        if step.abs() <= 1e-16 * u.abs().max(1.0) {
            break;
        }
    }
    u.exp()
}

/// Golden-section minimizer of `phi(p) + (x - p)^2 / 2` on a bracket.
///
/// `phi` may be `+inf` outside its domain. The bracket is first narrowed to
/// the finite region located on a uniform grid. Used as an independent
/// reference for the closed forms and root-finding in the catalog.
pub fn scalar_prox_oracle(
    phi: impl Fn(f64) -> f64,
    x: f64,
    bracket: Bracket,
    tol: f64,
) -> Result<f64> {
    const GRID: usize = 4000;
    let obj = |p: f64| {
        let v = phi(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v + 0.5 * (x - p) * (x - p)
        }
    };
    let h = bracket.width() / GRID as f64;
    let mut first = None;
    let mut last = None;
    let mut best = (f64::INFINITY, bracket.lo);
    for i in 0..=GRID {
        let p = bracket.lo + h * i as f64;
        let v = obj(p);
        if v.is_finite() {
            first.get_or_insert(i);
            last = Some(i);
            if v < best.0 {
                best = (v, p);
            }
        }
    }
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::InfeasibleBracket {
            lo: bracket.lo,
            hi: bracket.hi,
        });
    };
    // restrict to two grid cells around the best grid point, inside the
    // finite region (possibly extended by one cell to reach open ends)
    let lo_idx = first.saturating_sub(1);
    let hi_idx = (last + 1).min(GRID);
    let mut a = (best.1 - 2.0 * h).max(bracket.lo + h * lo_idx as f64);
    let mut b = (best.1 + 2.0 * h).min(bracket.lo + h * hi_idx as f64);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = obj(c);
    let mut fd = obj(d);
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        let go_left = if fc.is_infinite() && fd.is_infinite() {
            // both outside the domain: move toward the grid minimizer
            best.1 < 0.5 * (a + b)
        } else {
            fc < fd
        };
        if go_left {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = obj(d);
        }
    }
    let mid = 0.5 * (a + b);
    // pick the best of the final candidates; domain endpoints matter when
    // the minimizer sits on the boundary of dom phi
    let cands = [mid, a, b, c, d];
    let mut out = (obj(mid), mid);
    for p in cands {
        let v = obj(p);
        if v < out.0 {
            out = (v, p);
        }
    }
    if out.0.is_finite() {
        Ok(out.1)
    } else {
        Ok(best.1)
    }
}
