//! Per-iteration diagnostics and their file formats.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::Vector;
use crate::schedule::StoppingRule;

/// CSV header of trace files.
pub const TRACE_HEADER: &str = "iter,objective,residual,elapsed_ns";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Index `k` of the iterate `x_k` this record describes (1-based).
    pub iter: usize,
    pub objective: f64,
    /// `|x_k - x_{k-1}|`.
    pub residual: f64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<Record>,
}

impl Trace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wtr.write_record(TRACE_HEADER.split(','))
            .map_err(csv_err)?;
        for r in &self.records {
            wtr.serialize(r).map_err(csv_err)?;
        }
        wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rdr.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>().join(",") != TRACE_HEADER {
            return Err(Error::InvalidInput(format!(
                "trace header must be `{TRACE_HEADER}`"
            )));
        }
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<Record>, _>>()
            .map_err(csv_err)?;
        Ok(Trace { records })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("trace csv: {e}"))
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vector,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Trace,
    /// Solver state besides `x` at termination (e.g. the Douglas-Rachford
    /// governing sequence `y`, or ADMM's `y` and `z`).
    pub auxiliary: Vec<Vector>,
}

/// JSON result file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub x: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl From<&SolveResult> for ResultFile {
    fn from(r: &SolveResult) -> Self {
        ResultFile {
            x: r.x.iter().copied().collect(),
            converged: r.converged,
            iterations: r.iterations,
        }
    }
}

/// Bookkeeping shared by every iterative solver.
pub(crate) struct Monitor {
    stop: StoppingRule,
    start: Instant,
    trace: Trace,
}

impl Monitor {
    pub fn new(stop: &StoppingRule) -> Result<Self> {
        stop.validate()?;
        Ok(Monitor {
            stop: *stop,
            start: Instant::now(),
            trace: Trace::default(),
        })
    }

    pub fn max_iter(&self) -> usize {
        self.stop.max_iter
    }

    /// Records iteration `k` and reports whether the stopping rule fired.
    /// `change` is the state change used for stopping, `scale` the norm of
    /// the previous state.
    pub fn step(
        &mut self,
        k: usize,
        x_change: f64,
        change: f64,
        scale: f64,
        objective: impl FnOnce() -> f64,
    ) -> bool {
        if k % self.stop.objective_every == 0 || k == 1 {
            self.trace.records.push(Record {
                iter: k,
                objective: objective(),
                residual: x_change,
                elapsed_ns: self.start.elapsed().as_nanos() as u64,
            });
        }
        change <= self.stop.tol * scale.max(1.0)
    }

    pub fn finish(self, x: Vector, converged: bool, iterations: usize, aux: Vec<Vector>) -> SolveResult {
        SolveResult {
            x,
            converged,
            iterations,
            trace: self.trace,
            auxiliary: aux,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_exact_header() {
        let t = Trace {
            records: vec![Record {
                iter: 1,
                objective: 0.5,
                residual: 0.25,
                elapsed_ns: 10,
            }],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,residual,elapsed_ns\n"));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = "iter,obj,residual,elapsed_ns\n1,0,0,0\n";
        assert!(Trace::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn infinite_objective_round_trips() {
        let t = Trace {
            records: vec![Record {
                iter: 3,
                objective: f64::INFINITY,
                residual: 1e-300,
                elapsed_ns: u64::MAX,
            }],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(Trace::read_csv(buf.as_slice()).unwrap(), t);
    }
}
