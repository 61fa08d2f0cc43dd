//! Step-size and relaxation sequences, and stopping rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sequence of positive reals. An explicit list is held at its last value
/// once exhausted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sequence {
    Constant(f64),
    Values(Vec<f64>),
}

impl Sequence {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Sequence::Constant(v) => *v,
            Sequence::Values(vs) => vs[n.min(vs.len() - 1)],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Sequence::Constant(v) => std::slice::from_ref(v),
            Sequence::Values(vs) => vs,
        }
    }

    /// Every emitted value must lie in `[lo, hi]`.
    pub fn check_range(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.values().is_empty() {
            return Err(Error::InvalidInput(format!("{name} sequence is empty")));
        }
        for &v in self.values() {
            if !(v.is_finite() && v >= lo && v <= hi) {
                return Err(Error::InvalidSchedule {
                    name: name.to_string(),
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

impl From<f64> for Sequence {
    fn from(v: f64) -> Self {
        Sequence::Constant(v)
    }
}

/// Step sizes `gamma_n`, relaxations `lambda_n` and the margin `epsilon`
/// that bounds both away from the ends of their admissible intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub gamma: Sequence,
    pub lambda: Sequence,
    pub epsilon: f64,
}

impl Schedule {
    /// `gamma = 1.9/beta`, `lambda = 1`, `epsilon = 0.05 min(1, 1/beta)`.
    pub fn forward_backward_default(beta: f64) -> Self {
        Schedule {
            gamma: Sequence::Constant(1.9 / beta),
            lambda: Sequence::Constant(1.0),
            epsilon: 0.05 * (1.0f64).min(1.0 / beta),
        }
    }

    pub(crate) fn check_epsilon(&self, hi: f64) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon < hi {
            Ok(())
        } else {
            Err(Error::InvalidSchedule {
                name: "epsilon".into(),
                value: self.epsilon,
                lo: 0.0,
                hi,
            })
        }
    }
}

/// Relaxation sequence `lambda_n` with its margin, for algorithms whose
/// step size is a single constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub lambda: Sequence,
    pub epsilon: f64,
}

impl Relaxation {
    pub fn constant(lambda: f64, epsilon: f64) -> Self {
        Relaxation {
            lambda: Sequence::Constant(lambda),
            epsilon,
        }
    }

    pub(crate) fn check(&self, eps_hi: f64, lambda_hi: f64) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < eps_hi) {
            return Err(Error::InvalidSchedule {
                name: "epsilon".into(),
                value: self.epsilon,
                lo: 0.0,
                hi: eps_hi,
            });
        }
        self.lambda
            .check_range("lambda", self.epsilon, lambda_hi - self.epsilon)
    }
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation::constant(1.0, 0.05)
    }
}

/// Relative iterate-change stopping rule:
/// `|x_{n+1} - x_n| / max(1, |x_n|) <= tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub tol: f64,
    pub max_iter: usize,
    /// The objective is recorded every this many iterations.
    pub objective_every: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            tol: 1e-10,
            max_iter: 100_000,
            objective_every: 1,
        }
    }
}

impl StoppingRule {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        StoppingRule {
            tol,
            max_iter,
            objective_every: 1,
        }
    }

    /// Default rule with the recording cadence chosen from the dimension.
    pub fn for_dim(n: usize) -> Self {
        StoppingRule {
            objective_every: if n <= 1000 { 1 } else { 10 },
            ..Self::default()
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "stopping tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if self.objective_every == 0 {
            return Err(Error::InvalidInput("objective_every must be at least 1".into()));
        }
        Ok(())
    }
}
