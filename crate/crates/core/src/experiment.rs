//! Repeated-run experiment harness.
//!
//! Each repeat draws a fresh node set from `base_seed + r`, discretises the
//! problem, solves it and scores the result. Failed runs are kept as records
//! with their cause and left out of the summary statistics.

use std::fmt;
use std::time::Instant;

use crate::assembly::{assemble, SparseSystem};
use crate::error::{Error, Result};
use crate::geometry::{default_boundary_count, NodeSet};
use crate::hermite::{BasisSpec, Normalization};
use crate::index_set::IndexSet;
use crate::problems::{arep, DirichletProblem};
use crate::solver::{SolveReport, SolverSettings};
use crate::stencil::{
    select_lambda, MethodParams, Stencil, StencilBuilder, DEFAULT_KAPPA, DEFAULT_RIDGE,
    DEFAULT_THETA,
};

/// Discretisation parameters shared by every repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub truncation: u64,
    pub shift: f64,
    pub smoothing: f64,
    pub theta: f64,
    pub kappa: f64,
    pub ridge: f64,
    pub normalization: Normalization,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            truncation: 4,
            shift: 1.0,
            smoothing: 0.0,
            theta: DEFAULT_THETA,
            kappa: DEFAULT_KAPPA,
            ridge: DEFAULT_RIDGE,
            normalization: Normalization::Orthonormal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub interior: usize,
    /// Defaults to `max(2d, ceil(0.3 N))`.
    pub boundary: Option<usize>,
    pub method: MethodConfig,
    pub solver: SolverSettings,
    pub repeats: usize,
    pub base_seed: u64,
}

/// Everything produced by discretising one node set.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub lambda: f64,
    pub basis_size: usize,
    pub stencils: Vec<Stencil>,
    pub system: SparseSystem,
}

/// Builds the index set once per configuration and checks it against `N`.
pub fn prepare_index_set(dimension: usize, interior: usize, method: &MethodConfig) -> Result<IndexSet> {
    let set = IndexSet::enumerate(dimension, method.shift, method.truncation)?;
    if set.is_empty() {
        return Err(Error::Config(format!(
            "index set is empty for d={dimension}, c={}, K={}",
            method.shift, method.truncation
        )));
    }
    if interior < set.len() {
        return Err(Error::Config(format!(
            "N={interior} is smaller than the basis size M={}",
            set.len()
        )));
    }
    Ok(set)
}

/// Selects lambda, builds all stencils and assembles the reduced system.
pub fn discretize(
    problem: &DirichletProblem,
    nodes: &NodeSet,
    index_set: &IndexSet,
    method: &MethodConfig,
) -> Result<Discretization> {
    let d = problem.dimension();
    let m = index_set.len();
    let lambda = select_lambda(
        method.theta,
        method.kappa,
        m,
        nodes.interior_len(),
        problem.domain.measure(),
        d,
    )?;
    let spec = BasisSpec::new(index_set.clone(), lambda, method.smoothing, method.normalization)?;
    let params = MethodParams::new(method.kappa, method.theta, lambda, m)?.with_ridge(method.ridge)?;
    let stencils = StencilBuilder::new(&spec, params)?.build_all(nodes)?;
    let system = assemble(&stencils, nodes, &*problem.source, &*problem.boundary)?;
    Ok(Discretization {
        lambda,
        basis_size: m,
        stencils,
        system,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    NotConverged,
    InsufficientNodes,
    SingularStencil,
    ArepUndefined,
    Failed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Ok => "ok",
            RunStatus::NotConverged => "not_converged",
            RunStatus::InsufficientNodes => "insufficient_nodes",
            RunStatus::SingularStencil => "singular_stencil",
            RunStatus::ArepUndefined => "arep_undefined",
            RunStatus::Failed => "failed",
        })
    }
}

impl RunStatus {
    fn from_error(err: &Error) -> Self {
        match err {
            Error::InsufficientNodes { .. } => RunStatus::InsufficientNodes,
            Error::SingularStencil { .. } => RunStatus::SingularStencil,
            Error::AllExcluded => RunStatus::ArepUndefined,
            _ => RunStatus::Failed,
        }
    }
}

/// One repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub interior: usize,
    pub boundary: usize,
    pub truncation: u64,
    pub shift: f64,
    pub smoothing: f64,
    pub theta: f64,
    pub lambda: Option<f64>,
    pub basis_size: usize,
    pub arep_percent: Option<f64>,
    pub arep_excluded: usize,
    pub iterations: usize,
    pub residual: Option<f64>,
    pub status: RunStatus,
    pub detail: Option<String>,
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Quartiles by linear interpolation between order statistics
    /// (position `p (n - 1)` in the sorted sample).
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() || samples.iter().any(|v| v.is_nan()) {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Some(Self {
            min: sorted[0],
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub runs: usize,
    pub failed: usize,
    /// AREP statistics over the successful runs.
    pub arep: Option<FiveNumber>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub problem: String,
    pub dimension: usize,
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
}

/// Outcome of one full solve on a given node set.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub discretization: Discretization,
    pub report: SolveReport,
}

pub fn solve_on_nodes(
    problem: &DirichletProblem,
    nodes: &NodeSet,
    index_set: &IndexSet,
    method: &MethodConfig,
    solver: &SolverSettings,
) -> Result<SingleRun> {
    let discretization = discretize(problem, nodes, index_set, method)?;
    let report = solver.solve(&discretization.system)?;
    Ok(SingleRun {
        discretization,
        report,
    })
}

pub fn run_experiment(problem: &DirichletProblem, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let d = problem.dimension();
    let index_set = prepare_index_set(d, config.interior, &config.method)?;
    let boundary = config
        .boundary
        .unwrap_or_else(|| default_boundary_count(d, config.interior));

    let mut records = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let seed = config.base_seed + r as u64;
        let start = Instant::now();
        let mut record = RunRecord {
            seed,
            interior: config.interior,
            boundary,
            truncation: config.method.truncation,
            shift: config.method.shift,
            smoothing: config.method.smoothing,
            theta: config.method.theta,
            lambda: None,
            basis_size: index_set.len(),
            arep_percent: None,
            arep_excluded: 0,
            iterations: 0,
            residual: None,
            status: RunStatus::Ok,
            detail: None,
            wall_ms: 0.0,
        };
        let outcome = NodeSet::generate(&problem.domain, config.interior, boundary, seed).and_then(
            |nodes| {
                let run = solve_on_nodes(problem, &nodes, &index_set, &config.method, &config.solver)?;
                Ok((nodes, run))
            },
        );
        match outcome {
            Ok((nodes, run)) => {
                record.lambda = Some(run.discretization.lambda);
                record.iterations = run.report.iterations;
                record.residual = Some(run.report.final_residual);
                if !run.report.converged {
                    record.status = RunStatus::NotConverged;
                }
                if let Some(exact) = &problem.exact {
                    match arep(&run.report.solution, &**exact, nodes.interior()) {
                        Ok(score) => {
                            record.arep_percent = Some(score.percent);
                            record.arep_excluded = score.excluded;
                        }
                        Err(err) => {
                            if record.status == RunStatus::Ok {
                                record.status = RunStatus::from_error(&err);
                            }
                            record.detail = Some(err.to_string());
                        }
                    }
                }
            }
            Err(err) => {
                record.status = RunStatus::from_error(&err);
                record.detail = Some(err.to_string());
            }
        }
        record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(record);
    }

    let ok: Vec<f64> = records
        .iter()
        .filter(|r| r.is_ok())
        .filter_map(|r| r.arep_percent)
        .collect();
    let summary = ExperimentSummary {
        runs: records.len(),
        failed: records.iter().filter(|r| !r.is_ok()).count(),
        arep: FiveNumber::from_samples(&ok),
    };
    Ok(ExperimentReport {
        problem: problem.name.clone(),
        dimension: d,
        config: config.clone(),
        records,
        summary,
    })
}
