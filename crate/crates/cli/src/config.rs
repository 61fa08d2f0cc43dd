//! Run configuration: a single JSON document naming a problem, a solver and
//! optional schedule, stopping and output overrides.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use proxsplit::catalog::{ScalarKind, SeparableProx};
use proxsplit::func::Zero;
use proxsplit::problems::{self, ProblemInstance, SolveOptions, SolverTag};
use proxsplit::sets::Indicator;
use proxsplit::{ConvexSet, Matrix, Sequence, SharedProx, StoppingRule, Vector};

/// Matrix given inline as rows or as a path to a JSON file holding rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Rows(Vec<Vec<f64>>),
    File { file: PathBuf },
}

/// Vector given inline or as a path to a JSON file holding an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSource {
    Values(Vec<f64>),
    File { file: PathBuf },
}

/// A single weight repeated over every coordinate, or one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Uniform(f64),
    PerCoordinate(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Halfspace { a: Vec<f64>, b: f64 },
    Hyperplane { a: Vec<f64>, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    NonnegativeOrthant { dim: usize },
    Affine { a: MatrixSource, b: VectorSource },
    Whole { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero { dim: usize },
    Indicator { set: SetSpec },
    /// One scalar function per coordinate.
    Separable { coords: Vec<ScalarKind> },
    /// The same scalar function on `dim` coordinates.
    Broadcast { scalar: ScalarKind, dim: usize },
    WeightedL1 { weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    ConstrainedLeastSquares {
        l: MatrixSource,
        y: VectorSource,
        set: SetSpec,
    },
    Lasso {
        a: MatrixSource,
        y: VectorSource,
        omega: Weights,
    },
    /// The seeded 5x3 LASSO; the seed falls back to the run seed, then to
    /// the built-in default.
    LassoFixture {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    AlternatingProjections {
        c: SetSpec,
        d: SetSpec,
    },
    BestApproximation {
        c: SetSpec,
        d: SetSpec,
        r: VectorSource,
    },
    Denoise {
        f: FunctionSpec,
        g: FunctionSpec,
        r: VectorSource,
    },
    Tv1d {
        r: VectorSource,
        omega: f64,
    },
    Tv1dFixture {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Feasibility {
        sets: Vec<SetSpec>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Sequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Sequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Defaults to the problem's recommended solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverTag>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub schedule: ScheduleOverrides,
    #[serde(default, skip_serializing_if = "is_default")]
    pub stop: StopOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// Parses JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            anyhow::anyhow!("malformed {what}: {inner}")
        } else {
            anyhow::anyhow!("malformed {what} at field `{path}`: {inner}")
        }
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        parse_json(&text, "config")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Solve options for an instance of dimension `dim`.
    pub fn options(&self, dim: usize) -> SolveOptions {
        let mut stop = StoppingRule::for_dim(dim);
        if let Some(t) = self.stop.tol {
            stop.tol = t;
        }
        if let Some(m) = self.stop.max_iter {
            stop.max_iter = m;
        }
        if let Some(e) = self.stop.objective_every {
            stop.objective_every = e;
        }
        SolveOptions {
            stop: Some(stop),
            gamma: self.schedule.gamma.clone(),
            lambda: self.schedule.lambda.clone(),
            epsilon: self.schedule.epsilon,
        }
    }
}

/// Resolves file references relative to the config's directory.
pub struct Resolver {
    base: PathBuf,
}

impl Resolver {
    pub fn new(config_path: &Path) -> Self {
        let base = config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Resolver { base }
    }

    fn read<T: DeserializeOwned>(&self, file: &Path) -> Result<T> {
        let path = self.base.join(file);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        parse_json(&text, &format!("data file {}", path.display()))
    }

    pub fn matrix(&self, m: &MatrixSource) -> Result<Matrix> {
        let rows = match m {
            MatrixSource::Rows(rows) => rows.clone(),
            MatrixSource::File { file } => self.read(file)?,
        };
        Ok(Matrix::from_rows(&rows)?)
    }

    pub fn vector(&self, v: &VectorSource) -> Result<Vector> {
        let values = match v {
            VectorSource::Values(vs) => vs.clone(),
            VectorSource::File { file } => self.read(file)?,
        };
        if values.is_empty() {
            bail!("vectors must have at least one entry");
        }
        Ok(Vector::from_vec(values))
    }

    pub fn set(&self, s: &SetSpec) -> Result<ConvexSet> {
        Ok(match s {
            SetSpec::Box { lo, hi } => ConvexSet::boxed(lo.clone(), hi.clone())?,
            SetSpec::Halfspace { a, b } => ConvexSet::halfspace(a.clone(), *b)?,
            SetSpec::Hyperplane { a, b } => ConvexSet::hyperplane(a.clone(), *b)?,
            SetSpec::Ball { center, radius } => ConvexSet::ball(center.clone(), *radius)?,
            SetSpec::NonnegativeOrthant { dim } => ConvexSet::nonnegative_orthant(*dim)?,
            SetSpec::Affine { a, b } => {
                let a = self.matrix(a)?;
                let b = self.vector(b)?;
                ConvexSet::affine(a.matrix().clone(), b.iter().copied().collect())?
            }
            SetSpec::Whole { dim } => ConvexSet::whole(*dim)?,
        })
    }

    pub fn function(&self, f: &FunctionSpec) -> Result<SharedProx> {
        Ok(match f {
            FunctionSpec::Zero { dim } => {
                if *dim == 0 {
                    bail!("zero function needs dim >= 1");
                }
                Arc::new(Zero::new(*dim))
            }
            FunctionSpec::Indicator { set } => Arc::new(Indicator::new(self.set(set)?)),
            FunctionSpec::Separable { coords } => Arc::new(SeparableProx::new(coords.clone())?),
            FunctionSpec::Broadcast { scalar, dim } => {
                Arc::new(SeparableProx::broadcast(scalar.clone(), *dim)?)
            }
            FunctionSpec::WeightedL1 { weights } => Arc::new(SeparableProx::weighted_l1(weights)?),
        })
    }

    pub fn problem(&self, p: &ProblemSpec, run_seed: Option<u64>) -> Result<ProblemInstance> {
        let built = match p {
            ProblemSpec::ConstrainedLeastSquares { l, y, set } => problems::constrained_least_squares(
                Arc::new(self.matrix(l)?),
                self.vector(y)?,
                self.set(set)?,
            )?,
            ProblemSpec::Lasso { a, y, omega } => {
                let a = self.matrix(a)?;
                let weights = match omega {
                    Weights::Uniform(w) => vec![*w; a.matrix().ncols()],
                    Weights::PerCoordinate(ws) => ws.clone(),
                };
                problems::lasso(Arc::new(a), self.vector(y)?, weights)?
            }
            ProblemSpec::LassoFixture { seed } => {
                problems::lasso_fixture(seed.or(run_seed).unwrap_or(problems::LASSO_SEED))
            }
            ProblemSpec::AlternatingProjections { c, d } => {
                problems::alternating_projections(self.set(c)?, self.set(d)?)?
            }
            ProblemSpec::BestApproximation { c, d, r } => {
                problems::best_approximation(self.set(c)?, self.set(d)?, self.vector(r)?)?
            }
            ProblemSpec::Denoise { f, g, r } => {
                problems::denoise(self.function(f)?, self.function(g)?, self.vector(r)?)?
            }
            ProblemSpec::Tv1d { r, omega } => problems::tv1d(self.vector(r)?, *omega)?,
            ProblemSpec::Tv1dFixture { seed } => {
                problems::tv1d_fixture(seed.or(run_seed).unwrap_or(problems::TV1D_SEED))
            }
            ProblemSpec::Feasibility { sets } => problems::feasibility(
                sets.iter().map(|s| self.set(s)).collect::<Result<Vec<_>>>()?,
            )?,
        };
        Ok(built)
    }
}

/// A scalar kind given as JSON, or as a bare tag for parameterless kinds.
pub fn parse_scalar_kind(text: &str) -> Result<ScalarKind> {
    let trimmed = text.trim();
    let kind: ScalarKind = if trimmed.starts_with('{') {
        parse_json(trimmed, "scalar kind")?
    } else {
        parse_json(&format!("{{\"kind\":\"{trimmed}\"}}"), "scalar kind")?
    };
    kind.validate()?;
    Ok(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_config_names_the_field() {
        let text = r#"{"problem": {"lasso": {"a": [[1.0]], "y": [1.0], "omega": "big"}}}"#;
        let err = parse_json::<RunConfig>(text, "config").unwrap_err().to_string();
        assert!(err.contains("problem.lasso.omega"), "{err}");

        let text = r#"{"problem": {"tv1d": {"r": [1.0, 2.0], "omega": -1}}, "solver": "newton"}"#;
        let err = parse_json::<RunConfig>(text, "config").unwrap_err().to_string();
        assert!(err.contains("solver"), "{err}");

        let text = r#"{"problem": {"feasibility": {"sets": [{"ball": {"center": [0], "radius": "x"}}]}}}"#;
        let err = parse_json::<RunConfig>(text, "config").unwrap_err().to_string();
        assert!(err.contains("problem.feasibility.sets[0].ball.radius"), "{err}");

        let text = r#"{"problem": {"tv1d_fixture": {}}, "stop": {"tol": 1e-8, "iters": 5}}"#;
        let err = parse_json::<RunConfig>(text, "config").unwrap_err().to_string();
        assert!(err.contains("stop") && err.contains("iters"), "{err}");
    }

    #[test]
    fn scalar_kind_shorthand() {
        assert_eq!(parse_scalar_kind("entropy").unwrap(), ScalarKind::Entropy);
        let k = parse_scalar_kind(r#"{"kind": "support", "lo": -1, "hi": 1}"#).unwrap();
        assert_eq!(k, ScalarKind::abs(1.0));
        assert!(parse_scalar_kind(r#"{"kind": "support", "lo": 1, "hi": -1}"#).is_err());
    }

    #[test]
    fn uniform_lasso_weights_broadcast() {
        let r = Resolver::new(Path::new("cfg.json"));
        let spec = ProblemSpec::Lasso {
            a: MatrixSource::Rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            y: VectorSource::Values(vec![3.0, 0.5]),
            omega: Weights::Uniform(1.0),
        };
        let p = r.problem(&spec, None).unwrap();
        let x = p.solve(SolverTag::Fista, &SolveOptions::default()).unwrap().x;
        assert!((x - Vector::from_vec(vec![2.0, 0.0])).norm() < 1e-9);
    }
}
