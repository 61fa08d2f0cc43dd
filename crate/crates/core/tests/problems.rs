use std::sync::Arc;

use proxsplit::catalog::{ScalarKind, SeparableProx};
use proxsplit::func::Zero;
use proxsplit::problems::{self, ProblemInstance, SolveOptions, SolverTag};
use proxsplit::sets::Indicator;
use proxsplit::{ConvexSet, Error, Matrix, SharedMap, SharedProx, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

fn solve(p: &ProblemInstance, tag: SolverTag) -> Vector {
    let r = p.solve(tag, &SolveOptions::default()).unwrap();
    assert!(r.converged, "{} / {tag} did not converge", p.name());
    r.x
}

fn interval(lo: f64, hi: f64) -> ConvexSet {
    ConvexSet::boxed(vec![lo], vec![hi]).unwrap()
}

fn examples() -> Vec<ProblemInstance> {
    let id2: SharedMap = Arc::new(Matrix::identity(2));
    vec![
        problems::constrained_least_squares(id2.clone(), v(&[2.0, -1.0]), ConvexSet::cube(2, 0.0, 1.0).unwrap())
            .unwrap(),
        problems::lasso(id2, v(&[3.0, 0.5]), vec![1.0, 1.0]).unwrap(),
        problems::lasso_fixture(problems::LASSO_SEED),
        problems::alternating_projections(interval(0.0, 1.0), interval(2.0, 3.0)).unwrap(),
        problems::alternating_projections(
            ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
            ConvexSet::ball(vec![3.0, 0.0], 1.0).unwrap(),
        )
        .unwrap(),
        problems::best_approximation(
            ConvexSet::halfspace(vec![1.0, 0.0], 1.0).unwrap(),
            ConvexSet::halfspace(vec![0.0, 1.0], 1.0).unwrap(),
            v(&[2.0, 2.0]),
        )
        .unwrap(),
        problems::best_approximation(
            ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
            ConvexSet::halfspace(vec![-1.0, 0.0], 0.0).unwrap(),
            v(&[-2.0, 2.0]),
        )
        .unwrap(),
        problems::denoise(
            Arc::new(Indicator::new(ConvexSet::nonnegative_orthant(3).unwrap())),
            Arc::new(SeparableProx::weighted_l1(&[0.5; 3]).unwrap()),
            v(&[2.0, -1.0, 0.3]),
        )
        .unwrap(),
        problems::tv1d_fixture(problems::TV1D_SEED),
        problems::feasibility(vec![interval(0.0, 1.0), interval(0.5, 2.0)]).unwrap(),
    ]
}

#[test]
fn every_recommended_solver_passes_the_validator() {
    for p in examples() {
        for &tag in p.solvers() {
            let r = p.solve(tag, &SolveOptions::default()).unwrap();
            let d = p.validate(&r);
            assert!(r.converged, "{} / {tag}: not converged after {}", p.name(), r.iterations);
            assert!(d.passed(), "{} / {tag}:\n{d}", p.name());
        }
    }
}

#[test]
fn constrained_least_squares_examples() {
    let id: SharedMap = Arc::new(Matrix::identity(2));
    let p = problems::constrained_least_squares(id, v(&[2.0, -1.0]), ConvexSet::cube(2, 0.0, 1.0).unwrap())
        .unwrap();
    assert!((solve(&p, SolverTag::ForwardBackward) - v(&[1.0, 0.0])).norm() < 1e-9);

    // free constraint: normal equations
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
    let y = v(&[1.0, 2.0, 0.5]);
    let p = problems::constrained_least_squares(Arc::new(a.clone()), y.clone(), ConvexSet::whole(2).unwrap())
        .unwrap();
    let x = solve(&p, SolverTag::Fista);
    let m = a.matrix();
    let normal = m.transpose() * (m * &x - &y);
    assert!(normal.norm() <= 1e-8);

    // attainable data
    let y = m * v(&[0.25, 0.5]);
    let p = problems::constrained_least_squares(Arc::new(a), y, ConvexSet::cube(2, 0.0, 1.0).unwrap()).unwrap();
    let x = solve(&p, SolverTag::ForwardBackward);
    assert!(p.objective(&x) < 1e-16);
}

#[test]
fn lasso_examples() {
    let id: SharedMap = Arc::new(Matrix::identity(2));
    let p = problems::lasso(id, v(&[3.0, 0.5]), vec![1.0, 1.0]).unwrap();
    assert!((solve(&p, SolverTag::Fista) - v(&[2.0, 0.0])).norm() < 1e-9);

    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
    let y = v(&[1.0, -2.0]);
    let aty = a.matrix().transpose() * &y;
    let w = aty.amax();
    let p = problems::lasso(Arc::new(a), y, vec![w; 2]).unwrap();
    assert_eq!(solve(&p, SolverTag::ForwardBackward), v(&[0.0, 0.0]));

    assert!(problems::lasso(Arc::new(Matrix::identity(2)), v(&[1.0, 1.0]), vec![1.0, 0.0]).is_err());
}

#[test]
fn lasso_fixture_is_reproducible() {
    let a = problems::lasso_fixture(problems::LASSO_SEED);
    let b = problems::lasso_fixture(problems::LASSO_SEED);
    assert_eq!(a.seed(), Some(problems::LASSO_SEED));
    let (ca, cb) = (a.components(), b.components());
    assert_eq!(ca.maps[0].1.to_dense(), cb.maps[0].1.to_dense());
    let xa = solve(&a, SolverTag::Fista);
    let xb = solve(&b, SolverTag::Fista);
    assert_eq!(xa, xb);
    // the fixture has both active and inactive coordinates
    assert!(xa.iter().any(|&t| t == 0.0) && xa.iter().any(|&t| t != 0.0), "{xa}");
}

#[test]
fn alternating_projection_examples() {
    let p = problems::alternating_projections(interval(0.0, 1.0), interval(2.0, 3.0)).unwrap();
    assert!((solve(&p, SolverTag::ForwardBackward)[0] - 1.0).abs() < 1e-9);

    let c = ConvexSet::ball(vec![0.0, 0.0], 2.0).unwrap();
    let p = problems::alternating_projections(c.clone(), c.clone()).unwrap();
    let x = solve(&p, SolverTag::ForwardBackward);
    assert!(c.contains(&x));

    let p = problems::alternating_projections(
        ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(),
        ConvexSet::ball(vec![3.0, 4.0], 2.0).unwrap(),
    )
    .unwrap();
    // nearest point of the unit disk toward the other center (3,4)/5
    let x = solve(&p, SolverTag::ForwardBackward);
    assert!((x - v(&[0.6, 0.8])).norm() < 1e-8);
}

#[test]
fn best_approximation_examples() {
    let c = ConvexSet::halfspace(vec![1.0, 0.0], 1.0).unwrap();
    let d = ConvexSet::halfspace(vec![0.0, 1.0], 1.0).unwrap();
    let p = problems::best_approximation(c.clone(), d.clone(), v(&[2.0, 2.0])).unwrap();
    assert!((solve(&p, SolverTag::DykstraLike) - v(&[1.0, 1.0])).norm() < 1e-9);
    let p = problems::best_approximation(c, d, v(&[0.3, -4.0])).unwrap();
    assert!((solve(&p, SolverTag::DykstraLike) - v(&[0.3, -4.0])).norm() < 1e-12);
}

#[test]
fn denoise_examples() {
    let r = v(&[2.0, -0.4, -3.0]);
    let l1: SharedProx = Arc::new(SeparableProx::weighted_l1(&[1.0; 3]).unwrap());
    let zero: SharedProx = Arc::new(Zero::new(3));
    let p = problems::denoise(l1.clone(), zero.clone(), r.clone()).unwrap();
    assert!((solve(&p, SolverTag::DykstraLike) - v(&[1.0, 0.0, -2.0])).norm() < 1e-9);

    let p = problems::denoise(zero.clone(), zero, r.clone()).unwrap();
    assert!((solve(&p, SolverTag::ParallelDykstra) - &r).norm() < 1e-12);

    // positive part of the soft threshold, checked against a 1D oracle
    let plus: SharedProx = Arc::new(Indicator::new(ConvexSet::nonnegative_orthant(3).unwrap()));
    let p = problems::denoise(plus, l1, r.clone()).unwrap();
    let x = solve(&p, SolverTag::DykstraLike);
    let b = proxsplit::scalar::Bracket::new(-10.0, 10.0).unwrap();
    for k in 0..3 {
        let phi = |t: f64| if t < 0.0 { f64::INFINITY } else { t.abs() };
        let o = proxsplit::scalar::scalar_prox_oracle(phi, r[k], b, 1e-12).unwrap();
        assert!((x[k] - o).abs() < 1e-6, "coordinate {k}: {} vs {o}", x[k]);
    }
}

#[test]
fn tv1d_examples() {
    let flat = v(&[0.7; 6]);
    let p = problems::tv1d(flat.clone(), 0.5).unwrap();
    assert!((solve(&p, SolverTag::DualForwardBackward) - &flat).norm() < 1e-9);

    // two samples: prox of omega |x2 - x1| shrinks the jump by 2 omega,
    // flattening it at the mean once omega >= |jump| / 2
    let p = problems::tv1d(v(&[0.0, 1.0]), 0.2).unwrap();
    assert!((solve(&p, SolverTag::DualForwardBackward) - v(&[0.2, 0.8])).norm() < 1e-9);
    let p = problems::tv1d(v(&[0.0, 1.0, 1.0, 0.0]), 5.0).unwrap();
    assert!((solve(&p, SolverTag::Ppxa) - v(&[0.5; 4])).norm() < 1e-8);

    let p = problems::tv1d_fixture(problems::TV1D_SEED);
    let a = solve(&p, SolverTag::DualForwardBackward);
    let b = solve(&p, SolverTag::Ppxa);
    assert!((a - b).amax() <= 1e-5);
    assert!(problems::tv1d(v(&[1.0]), 0.1).is_err());
}

#[test]
fn feasibility_and_incompatible_solvers() {
    let p = problems::feasibility(vec![interval(0.0, 1.0), interval(0.5, 2.0)]).unwrap();
    let x = solve(&p, SolverTag::Pocs);
    assert!((0.5..=1.0).contains(&x[0]));

    match p.solve(SolverTag::Fista, &SolveOptions::default()) {
        Err(Error::Unsupported(msg)) => assert!(msg.contains("pocs") && msg.contains("ppxa"), "{msg}"),
        other => panic!("expected an unsupported-solver error, got {other:?}"),
    }
    assert!(problems::feasibility(vec![]).is_err());
}

#[test]
fn solver_tags_round_trip_through_names() {
    for tag in SolverTag::ALL {
        assert_eq!(tag.name().parse::<SolverTag>().unwrap(), tag);
        let json = serde_json::to_string(&tag).unwrap();
        assert_eq!(json, format!("\"{}\"", tag.name()));
    }
    assert_eq!("douglas-rachford".parse::<SolverTag>().unwrap(), SolverTag::DouglasRachford);
    assert!("newton".parse::<SolverTag>().is_err());
}

#[test]
fn components_pass_the_invariant_suite() {
    for p in examples() {
        let d = problems::check_components(&p.components(), 200, 11);
        assert!(d.passed(), "{}:\n{d}", p.name());
    }
}

#[test]
fn entropy_denoise_component_checks() {
    let f: SharedProx = Arc::new(SeparableProx::broadcast(ScalarKind::Entropy, 2).unwrap());
    let g: SharedProx = Arc::new(Zero::new(2));
    let p = problems::denoise(f, g, v(&[1.0, 3.0])).unwrap();
    let x = solve(&p, SolverTag::DykstraLike);
    assert!((x[0] - 0.5671432904097838).abs() < 1e-9);
    assert!(p.validate(&p.solve(SolverTag::DykstraLike, &SolveOptions::default()).unwrap()).passed());
}
