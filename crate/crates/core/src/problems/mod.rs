//! Builders for standard worked problems. Each instance bundles its
//! functions, operators and sets, knows which solvers apply to it, and
//! validates a solution with a problem-specific optimality residual.

mod builders;
mod check;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use builders::{
    alternating_projections, best_approximation, constrained_least_squares, denoise, feasibility,
    lasso, lasso_fixture, lasso_kkt_residual, tv1d, tv1d_fixture, LASSO_FIXTURE_OMEGA, LASSO_SEED, TV1D_SEED,
};
pub use check::check_components;

use crate::error::{Error, Result};
use crate::func::{LeastSquares, SharedProx, SharedSmooth, Vector};
use crate::linear::SharedMap;
use crate::schedule::{Relaxation, Schedule, Sequence, StoppingRule};
use crate::sets::ConvexSet;
use crate::trace::SolveResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Pocs,
    ForwardBackward,
    ForwardBackwardConst,
    Fista,
    DouglasRachford,
    DykstraLike,
    DualForwardBackward,
    Admm,
    Ppxa,
    ParallelDykstra,
    Sdmm,
}

impl SolverTag {
    pub const ALL: [SolverTag; 11] = [
        SolverTag::Pocs,
        SolverTag::ForwardBackward,
        SolverTag::ForwardBackwardConst,
        SolverTag::Fista,
        SolverTag::DouglasRachford,
        SolverTag::DykstraLike,
        SolverTag::DualForwardBackward,
        SolverTag::Admm,
        SolverTag::Ppxa,
        SolverTag::ParallelDykstra,
        SolverTag::Sdmm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverTag::Pocs => "pocs",
            SolverTag::ForwardBackward => "forward_backward",
            SolverTag::ForwardBackwardConst => "forward_backward_const",
            SolverTag::Fista => "fista",
            SolverTag::DouglasRachford => "douglas_rachford",
            SolverTag::DykstraLike => "dykstra_like",
            SolverTag::DualForwardBackward => "dual_forward_backward",
            SolverTag::Admm => "admm",
            SolverTag::Ppxa => "ppxa",
            SolverTag::ParallelDykstra => "parallel_dykstra",
            SolverTag::Sdmm => "sdmm",
        }
    }
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        SolverTag::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| {
                let names: Vec<_> = SolverTag::ALL.iter().map(|t| t.name()).collect();
                Error::InvalidInput(format!("unknown solver `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Overrides applied on top of each solver's default schedule. `gamma` is
/// the (constant) step size, `lambda` the relaxation and `epsilon` the
/// admissibility margin; whichever the chosen solver does not use is
/// ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StoppingRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Sequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Sequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl SolveOptions {
    fn stop(&self, dim: usize) -> StoppingRule {
        self.stop.unwrap_or_else(|| StoppingRule::for_dim(dim))
    }

    /// Schedule for gradient-type steps with Lipschitz constant `beta`.
    fn schedule(&self, beta: f64) -> Schedule {
        let d = Schedule::forward_backward_default(beta);
        Schedule {
            gamma: self.gamma.clone().unwrap_or(d.gamma),
            lambda: self.lambda.clone().unwrap_or(d.lambda),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        }
    }

    fn relaxation(&self) -> Relaxation {
        let d = Relaxation::default();
        Relaxation {
            lambda: self.lambda.clone().unwrap_or(d.lambda),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        }
    }

    /// Constant step size for solvers that take a single `gamma > 0`.
    fn gamma(&self) -> Result<f64> {
        match &self.gamma {
            None => Ok(1.0),
            Some(Sequence::Constant(g)) => Ok(*g),
            Some(Sequence::Values(_)) => Err(Error::InvalidInput(
                "this solver takes a single constant gamma".into(),
            )),
        }
    }
}

/// One named residual and the threshold it must meet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn push(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.checks.push(Check::new(name, value, tol));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| (a.value / a.tol).total_cmp(&(b.value / b.tol)))
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed() { "ok  " } else { "FAIL" };
            writeln!(f, "{mark} {:<40} {:>10.3e}  (tol {:.1e})", c.name, c.value, c.tol)?;
        }
        Ok(())
    }
}

/// Named pieces of an instance, for the invariant suite.
#[derive(Debug, Clone, Default)]
pub struct Components {
    pub prox: Vec<(String, SharedProx)>,
    pub smooth: Vec<(String, SharedSmooth)>,
    pub maps: Vec<(String, SharedMap)>,
    pub sets: Vec<(String, ConvexSet)>,
    pub reference: Option<Vector>,
}

#[derive(Debug, Clone)]
enum Kind {
    ConstrainedLeastSquares {
        map: SharedMap,
        y: Vector,
        set: ConvexSet,
        f2: Arc<LeastSquares>,
    },
    Lasso {
        map: SharedMap,
        y: Vector,
        weights: Vec<f64>,
        f2: Arc<LeastSquares>,
    },
    AlternatingProjections {
        c: ConvexSet,
        d: ConvexSet,
    },
    /// `min f + g + |x - r|^2 / 2`, which covers best approximation
    /// (`f`, `g` indicators) and denoising.
    ProxOfSum {
        f: SharedProx,
        g: SharedProx,
        r: Vector,
    },
    Tv1d {
        r: Vector,
        omega: f64,
    },
    Feasibility {
        sets: Vec<ConvexSet>,
    },
}

/// A concrete problem with its applicable solvers and validator.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    name: &'static str,
    seed: Option<u64>,
    dim: usize,
    kind: Kind,
}

impl ProblemInstance {
    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Seed used to generate the data, for randomized instances.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applicable solvers, recommended one first.
    pub fn solvers(&self) -> &'static [SolverTag] {
        use SolverTag::*;
        match &self.kind {
            Kind::ConstrainedLeastSquares { .. } => &[
                ForwardBackward,
                ForwardBackwardConst,
                Fista,
                DouglasRachford,
                Ppxa,
                Sdmm,
            ],
            Kind::Lasso { .. } => &[
                Fista,
                ForwardBackward,
                ForwardBackwardConst,
                DouglasRachford,
                Ppxa,
                Sdmm,
                Admm,
            ],
            Kind::AlternatingProjections { .. } => {
                &[ForwardBackward, ForwardBackwardConst, Fista, DouglasRachford]
            }
            Kind::ProxOfSum { .. } => &[DykstraLike, ParallelDykstra],
            Kind::Tv1d { .. } => &[DualForwardBackward, Ppxa, Admm, Sdmm],
            Kind::Feasibility { .. } => &[Pocs, Ppxa],
        }
    }

    pub fn supports(&self, solver: SolverTag) -> bool {
        self.solvers().contains(&solver)
    }

    fn unsupported(&self, solver: SolverTag) -> Error {
        let names: Vec<_> = self.solvers().iter().map(|t| t.name()).collect();
        Error::Unsupported(format!(
            "solver `{solver}` does not apply to {}; compatible solvers: {}",
            self.name,
            names.join(", ")
        ))
    }

    /// Value of the objective this instance minimizes.
    pub fn objective(&self, x: &Vector) -> f64 {
        builders::objective(&self.kind, x)
    }

    pub fn solve(&self, solver: SolverTag, options: &SolveOptions) -> Result<SolveResult> {
        if !self.supports(solver) {
            return Err(self.unsupported(solver));
        }
        builders::solve(&self.kind, self.dim, solver, options)
    }

    /// Optimality residuals of `result.x` for this problem.
    pub fn validate(&self, result: &SolveResult) -> Diagnostics {
        builders::validate(&self.kind, &result.x)
    }

    pub fn components(&self) -> Components {
        builders::components(&self.kind)
    }
}
