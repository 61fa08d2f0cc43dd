//! Dense linear operators with explicit adjoints.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::func::Vector;

/// Seed for every randomized probe in this module.
pub const PROBE_SEED: u64 = 0x5eed;

/// A linear operator `R^cols -> R^rows` together with its adjoint.
pub trait LinearMap: Send + Sync + Debug {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &Vector) -> Vector;
    fn adjoint(&self, u: &Vector) -> Vector;

    /// `nu` such that `L L^T = nu I`, when the operator is a tight frame.
    fn tight_frame_nu(&self) -> Option<f64> {
        None
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.cols();
        let mut m = DMatrix::zeros(self.rows(), n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            m.set_column(j, &self.apply(&e));
        }
        m
    }
}

pub type SharedMap = Arc<dyn LinearMap>;

/// Dense matrix operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    m: DMatrix<f64>,
    nu: Option<f64>,
}

impl Matrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
        }
        Ok(Matrix { m, nu: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("matrix rows have unequal lengths".into()));
        }
        Self::new(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            m: DMatrix::identity(n, n),
            nu: Some(1.0),
        }
    }

    /// `s I`, a tight frame with `nu = s^2`.
    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Matrix {
            m: DMatrix::identity(n, n) * s,
            nu: Some(s * s),
        }
    }

    /// Forward differences `(Lx)_i = x_{i+1} - x_i`, an `(n-1) x n` matrix.
    pub fn first_difference(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(
                "difference operator needs at least two samples".into(),
            ));
        }
        let mut m = DMatrix::zeros(n - 1, n);
        for i in 0..n - 1 {
            m[(i, i)] = -1.0;
            m[(i, i + 1)] = 1.0;
        }
        Ok(Matrix { m, nu: None })
    }

    /// Vertical concatenation `[A; B]`.
    pub fn stack(blocks: &[&Matrix]) -> Result<Self> {
        let cols = blocks
            .first()
            .map(|b| b.m.ncols())
            .ok_or_else(|| Error::InvalidInput("nothing to stack".into()))?;
        if blocks.iter().any(|b| b.m.ncols() != cols) {
            return Err(Error::InvalidInput("stacked blocks differ in width".into()));
        }
        let rows: usize = blocks.iter().map(|b| b.m.nrows()).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            m.rows_mut(at, b.m.nrows()).copy_from(&b.m);
            at += b.m.nrows();
        }
        Self::new(m)
    }

    /// Declare `L L^T = nu I`; verified on random probes.
    pub fn with_tight_frame(mut self, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tight-frame constant must be positive, got {nu}"
            )));
        }
        let gap = tight_frame_gap(&self, nu, 8);
        if gap > 1e-10 {
            return Err(Error::Precondition(format!(
                "L L^T differs from {nu} I by relative {gap:e}"
            )));
        }
        self.nu = Some(nu);
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

impl LinearMap for Matrix {
    fn rows(&self) -> usize {
        self.m.nrows()
    }
    fn cols(&self) -> usize {
        self.m.ncols()
    }
    fn apply(&self, x: &Vector) -> Vector {
        &self.m * x
    }
    fn adjoint(&self, u: &Vector) -> Vector {
        self.m.tr_mul(u)
    }
    fn tight_frame_nu(&self) -> Option<f64> {
        self.nu
    }
    fn to_dense(&self) -> DMatrix<f64> {
        self.m.clone()
    }
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Largest `|<L x, u> - <x, L^T u>|` over `trials` random pairs.
pub fn check_adjoint(l: &dyn LinearMap, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = gaussian(l.cols(), &mut rng);
        let u = gaussian(l.rows(), &mut rng);
        let gap = (l.apply(&x).dot(&u) - x.dot(&l.adjoint(&u))).abs();
        worst = worst.max(gap);
    }
    worst
}

/// Largest `|L L^T u - nu u| / |u|` over random probes.
pub fn tight_frame_gap(l: &dyn LinearMap, nu: f64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = gaussian(l.rows(), &mut rng);
        let r = l.apply(&l.adjoint(&u)) - &u * nu;
        worst = worst.max(r.norm() / u.norm().max(f64::MIN_POSITIVE) / nu.max(1.0));
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// False when `max_iter` ran out before the relative change fell below `tol`.
    pub converged: bool,
    pub iterations: usize,
}

/// Spectral norm by power iteration on `L^T L` from a fixed-seed start.
pub fn operator_norm(l: &dyn LinearMap, tol: f64, max_iter: usize) -> NormEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let mut v = gaussian(l.cols(), &mut rng);
    v /= v.norm();
    let mut est = 0.0;
    for it in 1..=max_iter {
        let lv = l.apply(&v);
        let next = lv.norm();
        let w = l.adjoint(&lv);
        let wn = w.norm();
        if wn == 0.0 {
            return NormEstimate {
                value: next,
                converged: true,
                iterations: it,
            };
        }
        v = w / wn;
        if it > 1 && (next - est).abs() <= tol * next {
            return NormEstimate {
                value: next,
                converged: true,
                iterations: it,
            };
        }
        est = next;
    }
    NormEstimate {
        value: est,
        converged: false,
        iterations: max_iter,
    }
}

/// Cholesky factor of a symmetric matrix, rejecting numerically singular input.
pub(crate) fn spd_factor(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    let eig = m.clone().symmetric_eigen();
    let hi = eig.eigenvalues.max();
    let lo = eig.eigenvalues.min();
    if !(hi > 0.0) || lo <= 1e-12 * hi {
        return Err(Error::Precondition(format!("{what} is singular")));
    }
    Cholesky::new(m).ok_or_else(|| Error::Precondition(format!("{what} is singular")))
}
