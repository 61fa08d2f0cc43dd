use std::sync::Arc;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

use proxsplit::catalog::{QuadraticPerturbation, QuadraticProx, ScalarKind, Semiorthogonal, SeparableProx};
use proxsplit::func::{subgradient_certificate_at, LeastSquares, Quadratic, Zero};
use proxsplit::problems::{self, SolveOptions, SolverTag};
use proxsplit::sets::Indicator;
use proxsplit::solvers::{self, ProxLFunction};
use proxsplit::{
    ConvexSet, LinearMap, Matrix, ProxFn, Relaxation, Schedule, SharedMap, SharedProx, SmoothFn,
    StoppingRule, Vector,
};

fn v(xs: &[f64]) -> Vector {
    Vector::from_vec(xs.to_vec())
}

fn tight() -> StoppingRule {
    StoppingRule::new(1e-12, 200_000)
}

#[test]
fn certificate_examples() {
    let unit = Indicator::new(ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap());
    let ys: Vec<Vector> = [0.0, 0.5, 1.0].iter().map(|&y| v(&[y])).collect();
    assert_eq!(subgradient_certificate_at(|y| unit.eval(y), &v(&[2.0]), &v(&[1.0]), &ys), 0.0);

    let abs = SeparableProx::new(vec![ScalarKind::abs(1.0)]).unwrap();
    let ys: Vec<Vector> = [-1.0, 0.0, 5.0].iter().map(|&y| v(&[y])).collect();
    assert_eq!(subgradient_certificate_at(|y| abs.eval(y), &v(&[3.0]), &v(&[2.0]), &ys), 0.0);
    // at y = 2: 2.5 + 0.5 * (2 - 2.5) - 2 = 0.25
    let wrong = subgradient_certificate_at(|y| abs.eval(y), &v(&[3.0]), &v(&[2.5]), &[v(&[2.0])]);
    assert_abs_diff_eq!(wrong, 0.25, epsilon = 1e-15);
}

#[test]
fn fista_beats_its_bound_on_a_centered_quadratic() {
    let f2 = Quadratic::new(DMatrix::identity(1, 1), v(&[0.0])).unwrap();
    let r = solvers::fista(&Zero::new(1), &f2, &v(&[1.0]), &StoppingRule::new(f64::MIN_POSITIVE, 50)).unwrap();
    for rec in &r.trace.records {
        let bound = 2.0 * f2.lipschitz() / ((rec.iter + 1) as f64).powi(2);
        assert!(rec.objective <= bound, "iteration {}", rec.iter);
    }
}

fn lasso_pieces() -> (Arc<Matrix>, Vector, f64) {
    let a = Matrix::from_rows(&[
        vec![1.0, 2.0, 0.0],
        vec![0.5, -1.0, 1.0],
        vec![0.0, 1.0, 3.0],
        vec![2.0, 0.0, -1.0],
        vec![1.0, 1.0, 1.0],
    ])
    .unwrap();
    (Arc::new(a), v(&[3.0, -1.0, 2.0, 1.5, 2.5]), 0.5)
}

#[test]
fn lasso_splittings_agree() {
    let (a, y, w) = lasso_pieces();
    let l1: SharedProx = Arc::new(SeparableProx::weighted_l1(&[w; 3]).unwrap());
    let data = LeastSquares::new(a.clone(), y.clone(), 1.0).unwrap();
    let data_prox: SharedProx = Arc::new(QuadraticProx::new(a.clone(), y.clone(), 1.0).unwrap());
    let x0 = Vector::zeros(3);
    let beta = data.lipschitz();

    let fista = solvers::fista(l1.as_ref(), &data, &x0, &tight()).unwrap();
    let fb = solvers::forward_backward(l1.as_ref(), &data, &Schedule::forward_backward_default(beta), &x0, &tight())
        .unwrap();
    let fbc = solvers::forward_backward_const(l1.as_ref(), &data, &Relaxation::default(), &x0, &tight()).unwrap();
    assert_abs_diff_eq!(fb.x, fbc.x, epsilon = 1e-6);
    let objective = |x: &Vector| l1.eval(x) + data.eval(x);
    assert_abs_diff_eq!(objective(&fista.x), objective(&fb.x), epsilon = 1e-8);

    let dr = solvers::douglas_rachford(l1.as_ref(), data_prox.as_ref(), 1.0, &Relaxation::default(), &x0, &tight())
        .unwrap();
    assert_abs_diff_eq!(dr.x, fista.x, epsilon = 1e-6);

    let bound: SharedProx = Arc::new(Indicator::new(ConvexSet::cube(3, -10.0, 10.0).unwrap()));
    let third = 1.0 / 3.0;
    let ppxa = solvers::ppxa(
        &[data_prox.clone(), l1.clone(), bound],
        &[third, third, third],
        1.0,
        &Relaxation::default(),
        &[x0.clone(), x0.clone(), x0.clone()],
        &tight(),
    )
    .unwrap();
    assert_abs_diff_eq!(ppxa.x, fista.x, epsilon = 1e-6);

    let half_sq: SharedProx = Arc::new(QuadraticProx::new(Arc::new(Matrix::identity(5)), y.clone(), 1.0).unwrap());
    let maps: Vec<SharedMap> = vec![a.clone(), Arc::new(Matrix::identity(3))];
    let sdmm = solvers::sdmm(
        &[half_sq, l1.clone()],
        &maps,
        1.0,
        &[Vector::zeros(5), x0.clone()],
        &[Vector::zeros(5), x0.clone()],
        &tight(),
    )
    .unwrap();
    assert_abs_diff_eq!(sdmm.x, fista.x, epsilon = 1e-6);
}

#[test]
fn forward_backward_descends_on_quadratics() {
    let h = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
    let f2 = Quadratic::new(h, v(&[1.0, -2.0, 0.5])).unwrap();
    let r = solvers::forward_backward(
        &Zero::new(3),
        &f2,
        &Schedule::forward_backward_default(f2.lipschitz()),
        &v(&[5.0, 5.0, -5.0]),
        &StoppingRule::default(),
    )
    .unwrap();
    assert!(r.converged);
    for w in r.trace.records.windows(2) {
        assert!(w[1].objective <= w[0].objective + 1e-15);
    }
}

/// Pair differences `x_{i+1} - x_i` for `i = start, start + 2, ...`.
fn pairs(n: usize, start: usize) -> Matrix {
    let firsts: Vec<usize> = (start..n - 1).step_by(2).collect();
    let mut m = DMatrix::zeros(firsts.len(), n);
    for (row, &i) in firsts.iter().enumerate() {
        m[(row, i)] = -1.0;
        m[(row, i + 1)] = 1.0;
    }
    Matrix::new(m).unwrap().with_tight_frame(2.0).unwrap()
}

#[test]
fn total_variation_dual_matches_douglas_rachford() {
    let r = v(&[0.1, -0.05, 0.02, 0.08, 1.1, 0.95, 1.03, 0.9]);
    let omega = 0.2;
    let n = r.len();

    let d = Matrix::first_difference(n).unwrap();
    let dual = solvers::dual_forward_backward(
        Arc::new(Zero::new(n)),
        Arc::new(SeparableProx::weighted_l1(&vec![omega; n - 1]).unwrap()),
        &d,
        &r,
        &Schedule::forward_backward_default(4.0),
        &Vector::zeros(n - 1),
        &tight(),
    )
    .unwrap();

    // TV = even pairs + odd pairs; the data term rides on the odd piece
    let piece = |start: usize| -> SharedProx {
        let m = pairs(n, start);
        let l1 = Arc::new(SeparableProx::weighted_l1(&vec![omega; m.rows()]).unwrap());
        Arc::new(Semiorthogonal::new(l1, Arc::new(m)).unwrap())
    };
    let odd_plus_data = QuadraticPerturbation::new(piece(1), 1.0, -&r, 0.5 * r.norm_squared()).unwrap();
    let dr = solvers::douglas_rachford(
        piece(0).as_ref(),
        &odd_plus_data,
        1.0,
        &Relaxation::default(),
        &Vector::zeros(n),
        &tight(),
    )
    .unwrap();
    assert_abs_diff_eq!(dual.x, dr.x, epsilon = 1e-6);

    let h = Arc::new(Indicator::new(ConvexSet::nonnegative_orthant(n).unwrap()));
    let shifted = &r - Vector::from_element(n, 0.5);
    let pos = solvers::dual_forward_backward(
        h,
        Arc::new(SeparableProx::weighted_l1(&vec![omega; n - 1]).unwrap()),
        &d,
        &shifted,
        &Schedule::forward_backward_default(4.0),
        &Vector::zeros(n - 1),
        &StoppingRule::default(),
    )
    .unwrap();
    assert!(pos.x.iter().all(|&t| t >= 0.0));
}

#[test]
fn admm_matches_dykstra_on_a_split_problem() {
    // min |x - r|^2 / 2 + omega |x_2 - x_1| + i_{x >= 0}(x)
    let r = v(&[2.0, -0.5]);
    let omega = 0.4;
    let diff = Matrix::from_rows(&[vec![-1.0, 1.0]]).unwrap();
    let l = Matrix::stack(&[&diff, &Matrix::identity(2)]).unwrap();
    let g = SeparableProx::new(vec![
        ScalarKind::abs(omega),
        ScalarKind::Interval { lo: 0.0, hi: f64::MAX },
        ScalarKind::Interval { lo: 0.0, hi: f64::MAX },
    ])
    .unwrap();
    let f = ProxLFunction::Quadratic {
        weight: 1.0,
        center: vec![2.0, -0.5],
    };
    let admm = solvers::admm(&f, &l, &g, 1.0, &Vector::zeros(3), &Vector::zeros(3), &tight()).unwrap();

    let tv: SharedProx = Arc::new(
        Semiorthogonal::new(
            Arc::new(SeparableProx::weighted_l1(&[omega]).unwrap()),
            Arc::new(diff.with_tight_frame(2.0).unwrap()),
        )
        .unwrap(),
    );
    let orthant = Indicator::new(ConvexSet::nonnegative_orthant(2).unwrap());
    let dyk = solvers::dykstra_like(tv.as_ref(), &orthant, &r, &tight()).unwrap();
    assert_abs_diff_eq!(admm.x, dyk.x, epsilon = 1e-5);
    // the kink of |x_2 - x_1| is inactive here: x = (2 - 0.4, 0)
    assert_abs_diff_eq!(dyk.x, v(&[1.6, 0.0]), epsilon = 1e-9);
}

#[test]
fn problem_instances_are_deterministic() {
    let a = problems::tv1d_fixture(problems::TV1D_SEED);
    let b = problems::tv1d_fixture(problems::TV1D_SEED);
    assert_eq!(a.components().reference, b.components().reference);
    let xa = a.solve(SolverTag::DualForwardBackward, &SolveOptions::default()).unwrap().x;
    let xb = b.solve(SolverTag::DualForwardBackward, &SolveOptions::default()).unwrap().x;
    assert_eq!(xa, xb);
}
