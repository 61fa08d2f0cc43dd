//! Proximity operators and proximal splitting algorithms for convex
//! optimization on `R^N`.

pub mod catalog;
pub mod error;
pub mod func;
pub mod linear;
pub mod problems;
pub mod scalar;
pub mod schedule;
pub mod sets;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use func::{ProxFn, SharedProx, SharedSmooth, SmoothFn, Vector};
pub use linear::{LinearMap, Matrix, SharedMap};
pub use schedule::{Relaxation, Schedule, Sequence, StoppingRule};
pub use sets::ConvexSet;
pub use trace::{Record, ResultFile, SolveResult, Trace};
