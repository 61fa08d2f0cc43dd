use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Components, Diagnostics, Kind, ProblemInstance, SolveOptions, SolverTag};
use crate::catalog::{ProductProx, QuadraticProx, SeparableProx, Semiorthogonal, SquaredDistance};
use crate::error::{Error, Result};
use crate::func::{
    check_dim, check_finite, sample_ball, subgradient_certificate_at, HalfSquaredDistance,
    LeastSquares, Scaled, SharedProx, SmoothFn, Vector, Zero,
};
use crate::linear::{operator_norm, LinearMap, Matrix, SharedMap};
use crate::sets::{ConvexSet, Indicator};
use crate::solvers::{self, ProxLFunction};
use crate::trace::SolveResult;

/// Seed of the 5x3 LASSO fixture.
pub const LASSO_SEED: u64 = 20_090_830;
/// l1 weight of every coordinate in the LASSO fixture.
pub const LASSO_FIXTURE_OMEGA: f64 = 0.5;
/// Seed of the length-8 noisy step used for total variation.
pub const TV1D_SEED: u64 = 20_090_901;

const RESIDUAL_TOL: f64 = 1e-8;
const CERTIFICATE_TOL: f64 = 1e-7;
const CERTIFICATE_SAMPLES: usize = 4000;
const CERTIFICATE_SEED: u64 = 7;

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `|x - y|^2 / 2` as a prox function.
fn half_sq_to(y: &Vector) -> Result<SharedProx> {
    Ok(Arc::new(QuadraticProx::new(
        Arc::new(Matrix::identity(y.len())),
        y.clone(),
        1.0,
    )?))
}

fn indicator(set: &ConvexSet) -> SharedProx {
    Arc::new(Indicator::new(set.clone()))
}

/// `min_{x in C} |L x - y|^2 / 2`.
pub fn constrained_least_squares(
    map: SharedMap,
    y: Vector,
    set: ConvexSet,
) -> Result<ProblemInstance> {
    check_dims(map.cols(), set.dim())?;
    let f2 = Arc::new(LeastSquares::new(map.clone(), y.clone(), 1.0)?);
    Ok(ProblemInstance {
        name: "constrained_least_squares",
        seed: None,
        dim: map.cols(),
        kind: Kind::ConstrainedLeastSquares { map, y, set, f2 },
    })
}

/// `min sum_k w_k |x_k| + |A x - y|^2 / 2`.
pub fn lasso(map: SharedMap, y: Vector, weights: Vec<f64>) -> Result<ProblemInstance> {
    check_dims(map.cols(), weights.len())?;
    for &w in &weights {
        positive("l1 weight", w)?;
    }
    let f2 = Arc::new(LeastSquares::new(map.clone(), y.clone(), 1.0)?);
    Ok(ProblemInstance {
        name: "lasso",
        seed: None,
        dim: map.cols(),
        kind: Kind::Lasso {
            map,
            y,
            weights,
            f2,
        },
    })
}

/// Gaussian 5x3 LASSO with a sparse ground truth and mild noise.
pub fn lasso_fixture(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let a = DMatrix::from_fn(5, 3, |_, _| normal());
    let truth = Vector::from_vec(vec![1.0, -1.0, 0.0]);
    let noise = Vector::from_fn(5, |_, _| 0.05 * normal());
    let y = &a * truth + noise;
    let map: SharedMap = Arc::new(Matrix::new(a).expect("finite gaussian matrix"));
    let mut p = lasso(map, y, vec![LASSO_FIXTURE_OMEGA; 3]).expect("fixture is well formed");
    p.seed = Some(seed);
    p
}

/// `min_{x in C} d_D(x)^2 / 2`, the limit problem of alternating projections.
pub fn alternating_projections(c: ConvexSet, d: ConvexSet) -> Result<ProblemInstance> {
    check_dims(c.dim(), d.dim())?;
    Ok(ProblemInstance {
        name: "alternating_projections",
        seed: None,
        dim: c.dim(),
        kind: Kind::AlternatingProjections { c, d },
    })
}

/// Projection of `r` onto `C ∩ D`.
pub fn best_approximation(c: ConvexSet, d: ConvexSet, r: Vector) -> Result<ProblemInstance> {
    check_dims(c.dim(), d.dim())?;
    check_dim(c.dim(), &r)?;
    check_finite("r", &r)?;
    Ok(ProblemInstance {
        name: "best_approximation",
        seed: None,
        dim: c.dim(),
        kind: Kind::ProxOfSum {
            f: indicator(&c),
            g: indicator(&d),
            r,
        },
    })
}

/// `min f(x) + g(x) + |x - r|^2 / 2`.
pub fn denoise(f: SharedProx, g: SharedProx, r: Vector) -> Result<ProblemInstance> {
    check_dims(f.dim(), g.dim())?;
    check_dim(f.dim(), &r)?;
    check_finite("r", &r)?;
    Ok(ProblemInstance {
        name: "denoise",
        seed: None,
        dim: f.dim(),
        kind: Kind::ProxOfSum { f, g, r },
    })
}

/// `min |x - r|^2 / 2 + omega sum_i |x_{i+1} - x_i|`.
pub fn tv1d(r: Vector, omega: f64) -> Result<ProblemInstance> {
    if r.len() < 2 {
        return Err(Error::InvalidInput("total variation needs at least two samples".into()));
    }
    check_finite("r", &r)?;
    positive("omega", omega)?;
    Ok(ProblemInstance {
        name: "tv1d",
        seed: None,
        dim: r.len(),
        kind: Kind::Tv1d { r, omega },
    })
}

/// Noisy unit step of length 8 with `omega = 0.2`.
pub fn tv1d_fixture(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Vector::from_fn(8, |i, _| {
        let step = if i < 4 { 0.0 } else { 1.0 };
        let e: f64 = StandardNormal.sample(&mut rng);
        step + 0.1 * e
    });
    let mut p = tv1d(r, 0.2).expect("fixture is well formed");
    p.seed = Some(seed);
    p
}

/// Find a point in the intersection of the sets.
pub fn feasibility(sets: Vec<ConvexSet>) -> Result<ProblemInstance> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidInput("feasibility needs at least one set".into()))?;
    let n = first.dim();
    for s in &sets {
        check_dims(n, s.dim())?;
    }
    Ok(ProblemInstance {
        name: "feasibility",
        seed: None,
        dim: n,
        kind: Kind::Feasibility { sets },
    })
}

/// Map picking the disjoint pairs `(i, i+1)`, `i = start, start + 2, ...`,
/// as rows `e_{i+1} - e_i`; `L L^T = 2 I`.
fn pair_differences(n: usize, start: usize) -> Option<Matrix> {
    let firsts: Vec<usize> = (start..n.saturating_sub(1)).step_by(2).collect();
    if firsts.is_empty() {
        return None;
    }
    let mut m = DMatrix::zeros(firsts.len(), n);
    for (row, &i) in firsts.iter().enumerate() {
        m[(row, i)] = -1.0;
        m[(row, i + 1)] = 1.0;
    }
    Some(
        Matrix::new(m)
            .and_then(|m| m.with_tight_frame(2.0))
            .expect("disjoint pair differences form a tight frame"),
    )
}

/// The TV term split into its even and odd pair sums, each a weighted l1
/// norm composed with a tight frame.
fn tv_pieces(n: usize, omega: f64) -> Vec<(String, SharedProx, SharedMap)> {
    [(0, "tv_even"), (1, "tv_odd")]
        .into_iter()
        .filter_map(|(start, name)| {
            let map: SharedMap = Arc::new(pair_differences(n, start)?);
            let l1 = Arc::new(SeparableProx::weighted_l1(&vec![omega; map.rows()]).ok()?);
            let f: SharedProx = Arc::new(Semiorthogonal::new(l1, map.clone()).ok()?);
            Some((name.to_string(), f, map))
        })
        .collect()
}

fn difference(n: usize) -> Matrix {
    Matrix::first_difference(n).expect("length checked at construction")
}

fn l1(weights: &[f64]) -> SharedProx {
    Arc::new(SeparableProx::weighted_l1(weights).expect("weights checked at construction"))
}

/// Radius of a cube that provably contains every LASSO minimizer:
/// `sum w_k |x_k| <= f(x) <= f(0) = |y|^2 / 2`.
fn lasso_radius(y: &Vector, weights: &[f64]) -> f64 {
    let w_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    0.5 * y.norm_squared() / w_min + 1.0
}

pub(super) fn solve(
    kind: &Kind,
    dim: usize,
    solver: SolverTag,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    use SolverTag::*;
    let stop = opts.stop(dim);
    let zero = Vector::zeros(dim);
    match kind {
        Kind::ConstrainedLeastSquares { map, y, set, f2 } => {
            let f1 = Indicator::new(set.clone());
            let beta = f2.lipschitz();
            match solver {
                ForwardBackward => {
                    solvers::forward_backward(&f1, f2.as_ref(), &opts.schedule(beta), &zero, &stop)
                }
                ForwardBackwardConst => solvers::forward_backward_const(
                    &f1,
                    f2.as_ref(),
                    &opts.relaxation(),
                    &zero,
                    &stop,
                ),
                Fista => solvers::fista(&f1, f2.as_ref(), &zero, &stop),
                DouglasRachford => {
                    let q = QuadraticProx::new(map.clone(), y.clone(), 1.0)?;
                    solvers::douglas_rachford(&f1, &q, opts.gamma()?, &opts.relaxation(), &zero, &stop)
                }
                Ppxa => {
                    let fs: Vec<SharedProx> = vec![
                        Arc::new(QuadraticProx::new(map.clone(), y.clone(), 1.0)?),
                        indicator(set),
                    ];
                    solvers::ppxa(&fs, &[0.5, 0.5], opts.gamma()?, &opts.relaxation(), &[zero.clone(), zero], &stop)
                }
                Sdmm => {
                    let gs = vec![half_sq_to(y)?, indicator(set)];
                    let ls: Vec<SharedMap> = vec![map.clone(), Arc::new(Matrix::identity(dim))];
                    let ys: Vec<Vector> = ls.iter().map(|l| Vector::zeros(l.rows())).collect();
                    solvers::sdmm(&gs, &ls, opts.gamma()?, &ys, &ys, &stop)
                }
                _ => unreachable!("compatibility checked by the caller"),
            }
        }
        Kind::Lasso {
            map,
            y,
            weights,
            f2,
        } => {
            let f1 = l1(weights);
            let beta = f2.lipschitz();
            match solver {
                ForwardBackward => solvers::forward_backward(
                    f1.as_ref(),
                    f2.as_ref(),
                    &opts.schedule(beta),
                    &zero,
                    &stop,
                ),
                ForwardBackwardConst => solvers::forward_backward_const(
                    f1.as_ref(),
                    f2.as_ref(),
                    &opts.relaxation(),
                    &zero,
                    &stop,
                ),
                Fista => solvers::fista(f1.as_ref(), f2.as_ref(), &zero, &stop),
                DouglasRachford => {
                    let q = QuadraticProx::new(map.clone(), y.clone(), 1.0)?;
                    solvers::douglas_rachford(f1.as_ref(), &q, opts.gamma()?, &opts.relaxation(), &zero, &stop)
                }
                Ppxa => {
                    let bound = lasso_radius(y, weights);
                    let fs: Vec<SharedProx> = vec![
                        Arc::new(QuadraticProx::new(map.clone(), y.clone(), 1.0)?),
                        f1,
                        indicator(&ConvexSet::cube(dim, -bound, bound)?),
                    ];
                    let w = [1.0 / 3.0; 3];
                    solvers::ppxa(&fs, &w, opts.gamma()?, &opts.relaxation(), &vec![zero; 3], &stop)
                }
                Sdmm => {
                    let gs = vec![half_sq_to(y)?, f1];
                    let ls: Vec<SharedMap> = vec![map.clone(), Arc::new(Matrix::identity(dim))];
                    let ys: Vec<Vector> = ls.iter().map(|l| Vector::zeros(l.rows())).collect();
                    solvers::sdmm(&gs, &ls, opts.gamma()?, &ys, &ys, &stop)
                }
                Admm => {
                    // g(L x) with L = [A; I] and g(u, v) = |u - y|^2/2 + sum w_k |v_k|
                    let a = Matrix::new(map.to_dense())?;
                    let l = Matrix::stack(&[&a, &Matrix::identity(dim)])?;
                    let g = ProductProx::new(vec![half_sq_to(y)?, f1])?;
                    let z = Vector::zeros(l.rows());
                    solvers::admm(&ProxLFunction::Zero, &l, &g, opts.gamma()?, &z, &z, &stop)
                }
                _ => unreachable!("compatibility checked by the caller"),
            }
        }
        Kind::AlternatingProjections { c, d } => {
            let f1 = Indicator::new(c.clone());
            let f2 = HalfSquaredDistance::new(d.clone());
            match solver {
                ForwardBackward => {
                    solvers::forward_backward(&f1, &f2, &opts.schedule(1.0), &zero, &stop)
                }
                ForwardBackwardConst => {
                    solvers::forward_backward_const(&f1, &f2, &opts.relaxation(), &zero, &stop)
                }
                Fista => solvers::fista(&f1, &f2, &zero, &stop),
                DouglasRachford => {
                    let q = SquaredDistance::new(d.clone());
                    solvers::douglas_rachford(&f1, &q, opts.gamma()?, &opts.relaxation(), &zero, &stop)
                }
                _ => unreachable!("compatibility checked by the caller"),
            }
        }
        Kind::ProxOfSum { f, g, r } => match solver {
            DykstraLike => solvers::dykstra_like(f.as_ref(), g.as_ref(), r, &stop),
            ParallelDykstra => {
                // weights 1/2 on 2f and 2g give f + g
                let fs: Vec<SharedProx> = vec![
                    Arc::new(Scaled::new(f.clone(), 2.0)?),
                    Arc::new(Scaled::new(g.clone(), 2.0)?),
                ];
                solvers::parallel_dykstra(&fs, &[0.5, 0.5], r, &stop)
            }
            _ => unreachable!("compatibility checked by the caller"),
        },
        Kind::Tv1d { r, omega } => {
            let d = difference(dim);
            let tv = l1(&vec![*omega; dim - 1]);
            match solver {
                DualForwardBackward => {
                    let norm = operator_norm(&d, 1e-12, 10_000).value;
                    let h: SharedProx = Arc::new(Zero::new(dim));
                    let u0 = Vector::zeros(dim - 1);
                    solvers::dual_forward_backward(h, tv, &d, r, &opts.schedule(norm * norm), &u0, &stop)
                }
                Ppxa => {
                    let mut fs = vec![half_sq_to(r)?];
                    fs.extend(tv_pieces(dim, *omega).into_iter().map(|(_, f, _)| f));
                    let m = fs.len();
                    let w = vec![1.0 / m as f64; m];
                    solvers::ppxa(&fs, &w, opts.gamma()?, &opts.relaxation(), &vec![zero; m], &stop)
                }
                Admm => {
                    let f = ProxLFunction::Quadratic {
                        weight: 1.0,
                        center: r.iter().copied().collect(),
                    };
                    let z = Vector::zeros(dim - 1);
                    solvers::admm(&f, &d, tv.as_ref(), opts.gamma()?, &z, &z, &stop)
                }
                Sdmm => {
                    let gs = vec![half_sq_to(r)?, tv];
                    let ls: Vec<SharedMap> = vec![Arc::new(Matrix::identity(dim)), Arc::new(d)];
                    let ys: Vec<Vector> = ls.iter().map(|l| Vector::zeros(l.rows())).collect();
                    solvers::sdmm(&gs, &ls, opts.gamma()?, &ys, &ys, &stop)
                }
                _ => unreachable!("compatibility checked by the caller"),
            }
        }
        Kind::Feasibility { sets } => match solver {
            Pocs => solvers::pocs(sets, &zero, &stop),
            Ppxa => {
                let fs: Vec<SharedProx> = sets.iter().map(indicator).collect();
                let m = fs.len();
                let w = vec![1.0 / m as f64; m];
                solvers::ppxa(&fs, &w, opts.gamma()?, &opts.relaxation(), &vec![zero; m], &stop)
            }
            _ => unreachable!("compatibility checked by the caller"),
        },
    }
}

fn indicator_value(set: &ConvexSet, x: &Vector) -> f64 {
    if set.contains(x) {
        0.0
    } else {
        f64::INFINITY
    }
}

pub(super) fn objective(kind: &Kind, x: &Vector) -> f64 {
    match kind {
        Kind::ConstrainedLeastSquares { set, f2, .. } => indicator_value(set, x) + f2.eval(x),
        Kind::Lasso { weights, f2, .. } => l1(weights).eval(x) + f2.eval(x),
        Kind::AlternatingProjections { c, d } => {
            indicator_value(c, x) + 0.5 * d.distance(x).powi(2)
        }
        Kind::ProxOfSum { f, g, r } => f.eval(x) + g.eval(x) + 0.5 * (x - r).norm_squared(),
        Kind::Tv1d { r, omega } => {
            0.5 * (x - r).norm_squared() + omega * difference(x.len()).apply(x).lp_norm(1)
        }
        Kind::Feasibility { sets } => sets.iter().map(|s| 0.5 * s.distance(x).powi(2)).sum(),
    }
}

/// Largest coordinatewise distance of `[A^T (y - A x)]_k` from
/// `w_k * subdiff |.|(x_k)`. Entries with `|x_k| <= 1e-9 max(1, |x|_inf)`
/// count as zero, since splitting methods other than forward-backward only
/// approach exact zeros.
pub fn lasso_kkt_residual(a: &dyn LinearMap, y: &Vector, weights: &[f64], x: &Vector) -> f64 {
    let g = a.adjoint(&(y - a.apply(x)));
    let snap = 1e-9 * x.amax().max(1.0);
    g.iter()
        .zip(x.iter())
        .zip(weights)
        .map(|((&gk, &xk), &w)| {
            if xk.abs() <= snap {
                (gk.abs() - w).max(0.0)
            } else {
                (gk - w * xk.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Residuals of `r - x = D^T u` with `u` in `omega * subdiff |.|_1 (D x)`.
fn tv_residuals(r: &Vector, omega: f64, x: &Vector, out: &mut Diagnostics) {
    let n = x.len();
    let e = r - x;
    // D^T u = e with (D^T u)_j = u_{j-1} - u_j solves as a running sum
    let mut u = Vector::zeros(n - 1);
    let mut acc = 0.0;
    for j in 0..n - 1 {
        acc -= e[j];
        u[j] = acc;
    }
    let dx = difference(n).apply(x);
    let dual_excess = u.iter().map(|&v| (v.abs() - omega).max(0.0)).fold(0.0, f64::max);
    let gap = omega * dx.lp_norm(1) - u.dot(&dx);
    out.push("tv dual feasibility", dual_excess, RESIDUAL_TOL);
    out.push("tv complementarity gap", gap.abs(), RESIDUAL_TOL);
    out.push("tv mean preservation", e.sum().abs(), RESIDUAL_TOL);
}

pub(super) fn validate(kind: &Kind, x: &Vector) -> Diagnostics {
    let mut out = Diagnostics::default();
    if x.iter().any(|v| !v.is_finite()) {
        out.push("finite iterate", f64::INFINITY, 0.0);
        return out;
    }
    let scaled = RESIDUAL_TOL * x.amax().max(1.0);
    match kind {
        Kind::ConstrainedLeastSquares { set, f2, .. } => {
            let step = set.project(&(x - f2.grad(x)));
            out.push("distance to C", set.distance(x), scaled);
            out.push("projected gradient residual", (x - step).norm(), scaled);
        }
        Kind::Lasso {
            map, y, weights, ..
        } => {
            out.push("kkt residual", lasso_kkt_residual(map.as_ref(), y, weights, x), RESIDUAL_TOL);
        }
        Kind::AlternatingProjections { c, d } => {
            out.push("distance to C", c.distance(x), scaled);
            let fixed = c.project(&d.project(x));
            out.push("fixed point of P_C P_D", (x - fixed).norm(), scaled);
        }
        Kind::ProxOfSum { f, g, r } => {
            let value = |y: &Vector| {
                let v = f.eval(y);
                if v == f64::INFINITY {
                    v
                } else {
                    v + g.eval(y)
                }
            };
            let ys = sample_ball(x, 1.0, CERTIFICATE_SAMPLES, CERTIFICATE_SEED);
            out.push(
                "subgradient certificate of r - x",
                subgradient_certificate_at(value, r, x, &ys),
                CERTIFICATE_TOL,
            );
        }
        Kind::Tv1d { r, omega } => tv_residuals(r, *omega, x, &mut out),
        Kind::Feasibility { sets } => {
            let worst = sets.iter().map(|s| s.distance(x)).fold(0.0, f64::max);
            out.push("largest distance to a set", worst, scaled);
        }
    }
    out
}

pub(super) fn components(kind: &Kind) -> Components {
    let mut c = Components::default();
    match kind {
        Kind::ConstrainedLeastSquares { map, y, set, f2 } => {
            c.prox.push(("indicator of C".into(), indicator(set)));
            if let Ok(q) = QuadraticProx::new(map.clone(), y.clone(), 1.0) {
                c.prox.push(("least squares".into(), Arc::new(q)));
            }
            c.smooth.push(("least squares".into(), f2.clone()));
            c.maps.push(("L".into(), map.clone()));
            c.sets.push(("C".into(), set.clone()));
        }
        Kind::Lasso {
            map,
            y,
            weights,
            f2,
        } => {
            c.prox.push(("weighted l1".into(), l1(weights)));
            if let Ok(q) = QuadraticProx::new(map.clone(), y.clone(), 1.0) {
                c.prox.push(("least squares".into(), Arc::new(q)));
            }
            c.smooth.push(("least squares".into(), f2.clone()));
            c.maps.push(("A".into(), map.clone()));
        }
        Kind::AlternatingProjections { c: cs, d } => {
            c.prox.push(("indicator of C".into(), indicator(cs)));
            c.prox.push(("half squared distance to D".into(), Arc::new(SquaredDistance::new(d.clone()))));
            c.smooth.push(("half squared distance to D".into(), Arc::new(HalfSquaredDistance::new(d.clone()))));
            c.sets.push(("C".into(), cs.clone()));
            c.sets.push(("D".into(), d.clone()));
        }
        Kind::ProxOfSum { f, g, r } => {
            for (name, h) in [("f", f), ("g", g)] {
                c.prox.push((name.into(), h.clone()));
                if let Some(s) = h.as_set() {
                    c.sets.push((name.into(), s.clone()));
                }
            }
            c.reference = Some(r.clone());
        }
        Kind::Tv1d { r, omega } => {
            let n = r.len();
            c.prox.push(("omega |.|_1".into(), l1(&vec![*omega; n - 1])));
            if let Ok(q) = half_sq_to(r) {
                c.prox.push(("data fidelity".into(), q));
            }
            c.maps.push(("first difference".into(), Arc::new(difference(n))));
            for (name, f, map) in tv_pieces(n, *omega) {
                c.prox.push((name.clone(), f));
                c.maps.push((name, map));
            }
            c.reference = Some(r.clone());
        }
        Kind::Feasibility { sets } => {
            for (i, s) in sets.iter().enumerate() {
                c.prox.push((format!("indicator of C{}", i + 1), indicator(s)));
                c.sets.push((format!("C{}", i + 1), s.clone()));
            }
        }
    }
    c
}
