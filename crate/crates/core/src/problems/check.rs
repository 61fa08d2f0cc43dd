use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Components, Diagnostics};
use crate::func::{gradient_check, subgradient_certificate, Vector};
use crate::linear::{check_adjoint, tight_frame_gap};

const PROX_TOL: f64 = 1e-9;

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
}

/// Runs the invariant suite over an instance's components: firm
/// nonexpansiveness and subgradient certificates for every prox, gradient
/// checks, adjoint consistency and tight-frame identities, and projection
/// idempotence.
pub fn check_components(c: &Components, trials: usize, seed: u64) -> Diagnostics {
    let mut out = Diagnostics::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, f) in &c.prox {
        let n = f.dim();
        let mut firm: f64 = 0.0;
        let mut cert: f64 = 0.0;
        for t in 0..trials {
            let gamma = 0.1 + 2.0 * rng.random::<f64>();
            let x = gaussian(&mut rng, n, 3.0);
            let y = gaussian(&mut rng, n, 3.0);
            let (px, py) = (f.prox(gamma, &x), f.prox(gamma, &y));
            let lhs = (&px - &py).norm_squared() + ((&x - &px) - (&y - &py)).norm_squared();
            firm = firm.max(lhs - (&x - &y).norm_squared());
            if t < trials.min(50) {
                // x - p in gamma * subdiff f(p)  <=>  (x - p)/gamma certifies f
                let scaled = &px + (&x - &px) / gamma;
                let v = subgradient_certificate(f.as_ref(), &scaled, &px, 200, 1.0, seed ^ t as u64);
                cert = cert.max(v);
            }
        }
        out.push(format!("{name}: firm nonexpansiveness"), firm.max(0.0), PROX_TOL);
        out.push(format!("{name}: subgradient certificate"), cert, PROX_TOL);
    }
    for (name, f) in &c.smooth {
        let points: Vec<Vector> = (0..trials.min(50)).map(|_| gaussian(&mut rng, f.dim(), 3.0)).collect();
        out.push(format!("{name}: gradient check"), gradient_check(f.as_ref(), &points), 1e-5);
        let mut lip: f64 = 0.0;
        for _ in 0..trials.min(200) {
            let x = gaussian(&mut rng, f.dim(), 3.0);
            let y = gaussian(&mut rng, f.dim(), 3.0);
            let excess = (f.grad(&x) - f.grad(&y)).norm() - f.lipschitz() * (&x - &y).norm();
            lip = lip.max(excess);
        }
        out.push(format!("{name}: Lipschitz bound"), lip.max(0.0), 1e-9);
    }
    for (name, l) in &c.maps {
        out.push(format!("{name}: adjoint consistency"), check_adjoint(l.as_ref(), 16), 1e-10);
        if let Some(nu) = l.tight_frame_nu() {
            out.push(format!("{name}: tight frame"), tight_frame_gap(l.as_ref(), nu, 16), 1e-10);
        }
    }
    for (name, s) in &c.sets {
        let mut idem: f64 = 0.0;
        let mut outside: f64 = 0.0;
        for _ in 0..trials.min(200) {
            let x = gaussian(&mut rng, s.dim(), 3.0);
            let p = s.project(&x);
            idem = idem.max((s.project(&p) - &p).norm());
            if !s.contains(&p) {
                outside = outside.max(s.distance(&p));
            }
        }
        out.push(format!("{name}: projection idempotence"), idem, 1e-12);
        out.push(format!("{name}: projection lands in the set"), outside, 1e-9);
    }
    out
}
