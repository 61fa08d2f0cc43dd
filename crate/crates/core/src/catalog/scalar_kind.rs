//! Closed-form and implicit proximity operators of convex functions on the
//! real line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lambert_w_exp, solve_monotone, Bracket, DEFAULT_TOL};

/// A convex function `phi: R -> ]-inf, +inf]` with a known proximity
/// operator. Field names follow the usual parameter roles: `lo`/`hi` are
/// interval ends, `omega` and `kappa` are positive weights, `q > 1` is an
/// exponent, `tau >= 0` a quadratic weight and `alpha` a linear coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarKind {
    /// Indicator of `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Support function of `[lo, hi]`: `lo x` for `x < 0`, `hi x` otherwise.
    /// Its prox is soft thresholding.
    Support { lo: f64, hi: f64 },
    /// `psi + sigma_[lo, hi]` for a `psi` differentiable at 0 with `psi'(0) = 0`.
    SupportPlus {
        psi: Box<ScalarKind>,
        lo: f64,
        hi: f64,
    },
    /// `max(|x| - omega, 0)`.
    DeadZone { omega: f64 },
    /// `kappa |x|^q`.
    Power { kappa: f64, q: f64 },
    /// `kappa x^2` near 0, linear with slope `omega sqrt(2 kappa)` beyond
    /// `|x| = omega / sqrt(2 kappa)`.
    Huber { kappa: f64, omega: f64 },
    /// `omega |x| + tau |x|^2 + kappa |x|^q`.
    ElasticPower {
        omega: f64,
        tau: f64,
        kappa: f64,
        q: f64,
    },
    /// `omega |x| - ln(1 + omega |x|)`.
    LogShrink { omega: f64 },
    /// `omega x` on `x >= 0`.
    Ramp { omega: f64 },
    /// `-omega x^(1/q)` on `x >= 0`.
    NegRoot { omega: f64, q: f64 },
    /// `omega x^(-q)` on `x > 0`.
    InversePower { omega: f64, q: f64 },
    /// `x ln x` on `x > 0`, 0 at 0.
    Entropy,
    /// Log barrier of `]lo, hi[` with `lo < 0 < hi`, normalized to vanish at 0.
    LogBarrier { lo: f64, hi: f64 },
    /// `-kappa ln x + tau x^2 / 2 + alpha x` on `x > 0`.
    LogQuadratic { kappa: f64, tau: f64, alpha: f64 },
    /// `-kappa ln x + alpha x + omega / x` on `x > 0`.
    LogInverse { kappa: f64, alpha: f64, omega: f64 },
    /// `-kappa ln x + omega x^q` on `x > 0`.
    LogPower { kappa: f64, omega: f64, q: f64 },
    /// `-kappa_lo ln(x - lo) - kappa_hi ln(hi - x)` on `]lo, hi[`.
    TwoSidedLogBarrier {
        lo: f64,
        hi: f64,
        kappa_lo: f64,
        kappa_hi: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn exponent(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent q must exceed 1, got {q}")))
    }
}

fn ordered(lo: f64, hi: f64) -> Result<()> {
    if lo < hi && !lo.is_nan() && !hi.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "interval ends must satisfy lo < hi, got [{lo}, {hi}]"
        )))
    }
}

/// `soft_[lo, hi]`: shift toward zero by the interval end that `x` exceeds.
pub fn soft_threshold(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        x - lo
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Root of an increasing `g` on `]lo, hi[` where `g -> -inf` at `lo`.
fn increasing_root(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    // brackets are constructed so that g(lo) < 0 < g(hi); failure would be
    // a bug in the bracket construction below
    solve_monotone(g, Bracket { lo, hi }, DEFAULT_TOL)
        .expect("catalog brackets always enclose the root")
}

impl ScalarKind {
    /// Soft thresholding on `[-omega, omega]`, the prox of `omega |x|`.
    pub fn abs(omega: f64) -> Self {
        ScalarKind::Support {
            lo: -omega,
            hi: omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ScalarKind::*;
        match self {
            Interval { lo, hi } | Support { lo, hi } => ordered(*lo, *hi),
            SupportPlus { psi, lo, hi } => {
                ordered(*lo, *hi)?;
                psi.validate()?;
                if psi.smooth_even_at_zero() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "psi must be differentiable at 0 with zero derivative".into(),
                    ))
                }
            }
            DeadZone { omega } | LogShrink { omega } | Ramp { omega } => positive("omega", *omega),
            Power { kappa, q } => {
                positive("kappa", *kappa)?;
                exponent(*q)
            }
            Huber { kappa, omega } => {
                positive("kappa", *kappa)?;
                positive("omega", *omega)
            }
            ElasticPower {
                omega,
                tau,
                kappa,
                q,
            } => {
                positive("omega", *omega)?;
                nonnegative("tau", *tau)?;
                positive("kappa", *kappa)?;
                exponent(*q)
            }
            NegRoot { omega, q } | InversePower { omega, q } => {
                positive("omega", *omega)?;
                exponent(*q)
            }
            Entropy => Ok(()),
            LogBarrier { lo, hi } => {
                if *lo < 0.0 && *hi > 0.0 && lo.is_finite() && hi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "log barrier needs lo < 0 < hi, got [{lo}, {hi}]"
                    )))
                }
            }
            LogQuadratic { kappa, tau, alpha } => {
                positive("kappa", *kappa)?;
                nonnegative("tau", *tau)?;
                finite("alpha", *alpha)
            }
            LogInverse {
                kappa,
                alpha,
                omega,
            } => {
                positive("kappa", *kappa)?;
                finite("alpha", *alpha)?;
                positive("omega", *omega)
            }
            LogPower { kappa, omega, q } => {
                positive("kappa", *kappa)?;
                positive("omega", *omega)?;
                exponent(*q)
            }
            TwoSidedLogBarrier {
                lo,
                hi,
                kappa_lo,
                kappa_hi,
            } => {
                ordered(*lo, *hi)?;
                finite("lo", *lo)?;
                finite("hi", *hi)?;
                positive("kappa_lo", *kappa_lo)?;
                positive("kappa_hi", *kappa_hi)
            }
        }
    }

    /// Even, differentiable at 0 with zero derivative there.
    pub fn smooth_even_at_zero(&self) -> bool {
        matches!(self, ScalarKind::Power { .. } | ScalarKind::Huber { .. })
    }

    /// For even functions, `max Argmin phi`; `None` when the function is not even.
    pub fn even_argmin_radius(&self) -> Option<f64> {
        use ScalarKind::*;
        match self {
            Interval { lo, hi } if *lo == -*hi => Some(*hi),
            Support { lo, hi } if *lo == -*hi => Some(0.0),
            DeadZone { omega } => Some(*omega),
            Power { .. } | Huber { .. } | ElasticPower { .. } | LogShrink { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Endpoints of the closure of the domain.
    pub fn domain(&self) -> (f64, f64) {
        use ScalarKind::*;
        match self {
            Interval { lo, hi } | LogBarrier { lo, hi } | TwoSidedLogBarrier { lo, hi, .. } => {
                (*lo, *hi)
            }
            Ramp { .. }
            | NegRoot { .. }
            | InversePower { .. }
            | Entropy
            | LogQuadratic { .. }
            | LogInverse { .. }
            | LogPower { .. } => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        use ScalarKind::*;
        let inf = f64::INFINITY;
        match self {
            Interval { lo, hi } => {
                if x >= *lo && x <= *hi {
                    0.0
                } else {
                    inf
                }
            }
            Support { lo, hi } => {
                if x < 0.0 {
                    lo * x
                } else {
                    hi * x
                }
            }
            SupportPlus { psi, lo, hi } => psi.eval(x) + Support { lo: *lo, hi: *hi }.eval(x),
            DeadZone { omega } => (x.abs() - omega).max(0.0),
            Power { kappa, q } => kappa * x.abs().powf(*q),
            Huber { kappa, omega } => {
                let knee = omega / (2.0 * kappa).sqrt();
                if x.abs() <= knee {
                    kappa * x * x
                } else {
                    omega * (2.0 * kappa).sqrt() * x.abs() - omega * omega / 2.0
                }
            }
            ElasticPower {
                omega,
                tau,
                kappa,
                q,
            } => omega * x.abs() + tau * x * x + kappa * x.abs().powf(*q),
            LogShrink { omega } => omega * x.abs() - (omega * x.abs()).ln_1p(),
            Ramp { omega } => {
                if x >= 0.0 {
                    omega * x
                } else {
                    inf
                }
            }
            NegRoot { omega, q } => {
                if x >= 0.0 {
                    -omega * x.powf(1.0 / q)
                } else {
                    inf
                }
            }
            InversePower { omega, q } => {
                if x > 0.0 {
                    omega * x.powf(-q)
                } else {
                    inf
                }
            }
            Entropy => {
                if x > 0.0 {
                    x * x.ln()
                } else if x == 0.0 {
                    0.0
                } else {
                    inf
                }
            }
            LogBarrier { lo, hi } => {
                if x > *lo && x <= 0.0 {
                    -(x - lo).ln() + (-lo).ln()
                } else if x > 0.0 && x < *hi {
                    -(hi - x).ln() + hi.ln()
                } else {
                    inf
                }
            }
            LogQuadratic { kappa, tau, alpha } => {
                if x > 0.0 {
                    -kappa * x.ln() + tau * x * x / 2.0 + alpha * x
                } else {
                    inf
                }
            }
            LogInverse {
                kappa,
                alpha,
                omega,
            } => {
                if x > 0.0 {
                    -kappa * x.ln() + alpha * x + omega / x
                } else {
                    inf
                }
            }
            LogPower { kappa, omega, q } => {
                if x > 0.0 {
                    -kappa * x.ln() + omega * x.powf(*q)
                } else {
                    inf
                }
            }
            TwoSidedLogBarrier {
                lo,
                hi,
                kappa_lo,
                kappa_hi,
            } => {
                if x > *lo && x < *hi {
                    -kappa_lo * (x - lo).ln() - kappa_hi * (hi - x).ln()
                } else {
                    inf
                }
            }
        }
    }

    /// `prox_{gamma phi}(x)`, the minimizer of `gamma phi(p) + (x - p)^2 / 2`.
    pub fn prox(&self, gamma: f64, x: f64) -> f64 {
        use ScalarKind::*;
        match self {
            Interval { lo, hi } => x.clamp(*lo, *hi),
            Support { lo, hi } => soft_threshold(x, gamma * lo, gamma * hi),
            SupportPlus { psi, lo, hi } => psi.prox(gamma, soft_threshold(x, gamma * lo, gamma * hi)),
            DeadZone { omega } => {
                let a = x.abs();
                if a < *omega {
                    x
                } else if a <= omega + gamma {
                    x.signum() * omega
                } else {
                    x.signum() * (a - gamma)
                }
            }
            Power { kappa, q } => power_prox(gamma * kappa, *q, x),
            Huber { kappa, omega } => {
                let k = gamma * kappa;
                let w = omega * gamma.sqrt();
                let s = (2.0 * k).sqrt();
                if x.abs() <= w * (2.0 * k + 1.0) / s {
                    x / (2.0 * k + 1.0)
                } else {
                    x - w * s * x.signum()
                }
            }
            ElasticPower {
                omega,
                tau,
                kappa,
                q,
            } => {
                let d = 2.0 * gamma * tau + 1.0;
                let shrunk = (x.abs() - gamma * omega).max(0.0) / d;
                x.signum() * power_prox(gamma * kappa / d, *q, shrunk)
            }
            LogShrink { omega } => {
                let a = x.abs();
                let b = omega * a - gamma * omega * omega - 1.0;
                let disc = (b * b + 4.0 * omega * a).sqrt();
                // stable form of (b + disc) / (2 omega) when b < 0
                let p = if b >= 0.0 {
                    (b + disc) / (2.0 * omega)
                } else {
                    2.0 * a / (disc - b)
                };
                x.signum() * p
            }
            Ramp { omega } => {
                if x >= gamma * omega {
                    x - gamma * omega
                } else {
                    0.0
                }
            }
            NegRoot { omega, q } => {
                let c = gamma * omega / q;
                let e = (1.0 - q) / q;
                let hi = x.max(0.0) + c + 1.0;
                increasing_root(|y| y - x - c * y.powf(e), 0.0, hi)
            }
            InversePower { omega, q } => {
                let c = gamma * omega * q;
                let hi = x.max(0.0) + c + 1.0;
                increasing_root(|y| y - x - c * y.powf(-q - 1.0), 0.0, hi)
            }
            Entropy => gamma * lambert_w_exp(x / gamma - gamma.ln()),
            LogBarrier { lo, hi } => {
                if x < gamma / lo {
                    let e = x - lo;
                    let r = (e * e + 4.0 * gamma).sqrt();
                    let half = if e >= 0.0 { 0.5 * (e + r) } else { 2.0 * gamma / (r - e) };
                    lo + half
                } else if x > gamma / hi {
                    let d = x - hi;
                    let r = (d * d + 4.0 * gamma).sqrt();
                    let half = if d <= 0.0 { 0.5 * (r - d) } else { 2.0 * gamma / (r + d) };
                    hi - half
                } else {
                    0.0
                }
            }
            LogQuadratic { kappa, tau, alpha } => {
                let s = 1.0 + gamma * tau;
                let d = x - gamma * alpha;
                let c = gamma * kappa * s;
                let r = (d * d + 4.0 * c).sqrt();
                let num = if d >= 0.0 { d + r } else { 4.0 * c / (r - d) };
                num / (2.0 * s)
            }
            LogInverse {
                kappa,
                alpha,
                omega,
            } => {
                let (k, a, w) = (gamma * kappa, gamma * alpha, gamma * omega);
                let hi = (x - a).max(0.0) + k + w + 1.0;
                increasing_root(|y| y - x + a - k / y - w / (y * y), 0.0, hi)
            }
            LogPower { kappa, omega, q } => {
                let (k, w) = (gamma * kappa, gamma * omega);
                let hi = x.max(0.0) + k + 1.0;
                increasing_root(|y| y - x + q * w * y.powf(q - 1.0) - k / y, 0.0, hi)
            }
            TwoSidedLogBarrier {
                lo,
                hi,
                kappa_lo,
                kappa_hi,
            } => {
                let (kl, kh) = (gamma * kappa_lo, gamma * kappa_hi);
                let p = increasing_root(|y| y - x - kl / (y - lo) + kh / (hi - y), *lo, *hi);
                // keep strictly inside the open interval
                p.clamp(lo.next_up_f64(), hi.next_down_f64())
            }
        }
    }

    /// Closed-form convex conjugate where one is available.
    ///
    /// Conjugates with a bounded domain accept points a few ulps past its
    /// ends: conjugate proxes are computed through the Moreau identity and
    /// can round just outside.
    pub fn conjugate(&self, u: f64) -> Option<f64> {
        use ScalarKind::*;
        let inf = f64::INFINITY;
        let below = |u: f64, b: f64| u <= b + 8.0 * f64::EPSILON * b.abs().max(1.0);
        match self {
            Interval { lo, hi } => Some(if u < 0.0 { lo * u } else { hi * u }),
            Support { lo, hi } => Some(if below(-u, -lo) && below(u, *hi) { 0.0 } else { inf }),
            DeadZone { omega } => Some(if below(u.abs(), 1.0) { omega * u.abs() } else { inf }),
            Power { kappa, q } => {
                let a = u.abs();
                Some((1.0 - 1.0 / q) * a * (a / (q * kappa)).powf(1.0 / (q - 1.0)))
            }
            Huber { kappa, omega } => {
                let slope = omega * (2.0 * kappa).sqrt();
                Some(if below(u.abs(), slope) { u * u / (4.0 * kappa) } else { inf })
            }
            Ramp { omega } => Some(if below(u, *omega) { 0.0 } else { inf }),
            Entropy => Some((u - 1.0).exp()),
            _ => None,
        }
    }
}

/// Positive root `p <= |x|` of `p + q k p^(q-1) = |x|`, signed like `x`.
fn power_prox(k: f64, q: f64, x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        return 0.0;
    }
    let p = if q == 2.0 {
        a / (1.0 + 2.0 * k)
    } else {
        increasing_root(|p| p + q * k * p.powf(q - 1.0) - a, 0.0, a)
    };
    x.signum() * p
}

trait NextFloat {
    fn next_up_f64(self) -> f64;
    fn next_down_f64(self) -> f64;
}

impl NextFloat for f64 {
    fn next_up_f64(self) -> f64 {
        let bits = self.to_bits();
        if self >= 0.0 {
            f64::from_bits(bits + 1)
        } else if self == -0.0 {
            f64::from_bits(1)
        } else {
            f64::from_bits(bits - 1)
        }
    }
    fn next_down_f64(self) -> f64 {
        -(-self).next_up_f64()
    }
}

/// `prox_phi(x)` at unit scale.
pub fn scalar_prox(kind: &ScalarKind, x: f64) -> Result<f64> {
    kind.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("x must be finite, got {x}")));
    }
    Ok(kind.prox(1.0, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::scalar_prox_oracle;

    #[test]
    fn table_examples() {
        let soft = ScalarKind::Support { lo: -2.0, hi: 2.0 };
        assert_eq!(scalar_prox(&soft, 3.0).unwrap(), 1.0);
        for x in [-2.0, -0.3, 0.0, 1.9, 2.0] {
            assert_eq!(scalar_prox(&soft, x).unwrap(), 0.0);
        }
        let dz = ScalarKind::DeadZone { omega: 1.0 };
        assert_eq!(scalar_prox(&dz, 1.5).unwrap(), 1.0);
        let pw = ScalarKind::Power { kappa: 1.0, q: 2.0 };
        assert!((scalar_prox(&pw, 3.0).unwrap() - 1.0).abs() < 1e-15);
        let w1 = 0.567_143_290_409_783_8;
        assert!((scalar_prox(&ScalarKind::Entropy, 1.0).unwrap() - w1).abs() < 1e-12);
        let iv = ScalarKind::Interval { lo: 0.0, hi: 1.0 };
        assert_eq!(scalar_prox(&iv, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn power_kind_via_root_finding_matches_closed_form_at_q2() {
        let root = increasing_root(|p| p + 2.0 * 0.7 * p - 3.0, 0.0, 3.0);
        assert!((power_prox(0.7, 2.0, 3.0) - root).abs() < 1e-12);
    }

    #[test]
    fn log_barrier_thresholds_and_saturates() {
        let k = ScalarKind::LogBarrier { lo: -5.0, hi: 5.0 };
        for x in [-0.2, -0.1, 0.0, 0.1, 0.2] {
            assert_eq!(k.prox(1.0, x), 0.0);
        }
        // x < 1/lo lands in ]lo, 0]
        for x in [-0.21, -1.0, -10.0, -1e6] {
            let p = k.prox(1.0, x);
            assert!(p > -5.0 && p <= 0.0, "x = {x}, p = {p}");
        }
        let far = k.prox(1.0, 1e8);
        assert!(far < 5.0 && far > 5.0 - 1e-6);
    }

    #[test]
    fn parameter_violations_are_reported() {
        assert!(ScalarKind::Power { kappa: 1.0, q: 1.0 }.validate().is_err());
        assert!(ScalarKind::Interval { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(ScalarKind::Huber { kappa: 0.0, omega: 1.0 }.validate().is_err());
        assert!(ScalarKind::LogBarrier { lo: 1.0, hi: 2.0 }.validate().is_err());
        let bad_psi = ScalarKind::SupportPlus {
            psi: Box::new(ScalarKind::Entropy),
            lo: -1.0,
            hi: 1.0,
        };
        assert!(bad_psi.validate().is_err());
        assert!(matches!(
            scalar_prox(&ScalarKind::DeadZone { omega: -1.0 }, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn scaled_prox_matches_oracle_for_every_kind() {
        let kinds = vec![
            ScalarKind::DeadZone { omega: 0.8 },
            ScalarKind::LogShrink { omega: 1.7 },
            ScalarKind::Huber { kappa: 0.6, omega: 1.1 },
            ScalarKind::LogBarrier { lo: -2.0, hi: 3.0 },
            ScalarKind::Entropy,
            ScalarKind::NegRoot { omega: 1.3, q: 2.5 },
        ];
        let b = Bracket::new(-30.0, 30.0).unwrap();
        for k in &kinds {
            for gamma in [0.3, 1.0, 2.5] {
                for x in [-4.0, -0.7, 0.1, 1.3, 5.0] {
                    let oracle =
                        scalar_prox_oracle(|p| gamma * k.eval(p), x, b, 1e-13).unwrap();
                    let got = k.prox(gamma, x);
                    assert!((got - oracle).abs() < 1e-6, "{k:?} gamma={gamma} x={x}: {got} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn serde_tags_are_snake_case() {
        let k = ScalarKind::LogBarrier { lo: -1.0, hi: 2.0 };
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"kind":"log_barrier","lo":-1.0,"hi":2.0}"#);
        let back: ScalarKind = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
    }
}
