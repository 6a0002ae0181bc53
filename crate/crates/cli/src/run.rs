use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::error::ErrorKind;
use clap::Parser;
use hhfd::experiment::{
    discretize, prepare_index_set, run_experiment, ExperimentConfig, MethodConfig,
};
use hhfd::geometry::{default_boundary_count, NodeSet};
use hhfd::problems::{case1, case2, case3, DirichletProblem};
use hhfd::solver::SolverSettings;

use crate::config::{Flags, OutputFormat, ProblemKind, RunConfig};
use crate::custom::load_problem;
use crate::error::{CliError, Result};
use crate::output::{
    rows, summary_path, write_json, write_records_csv, write_summaries_csv, RecordRow, SummaryRow,
};

/// Results of every configuration in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub records: Vec<RecordRow>,
    pub summaries: Vec<SummaryRow>,
}

impl Outcome {
    pub fn any_failed(&self) -> bool {
        self.records.iter().any(|r| r.status != "ok")
    }
}

pub fn build_problem(config: &RunConfig) -> Result<DirichletProblem> {
    let d = config.d;
    Ok(match config.problem {
        ProblemKind::Case1 => case1(d)?,
        ProblemKind::Case2 => case2(d)?,
        ProblemKind::Case3 => case3(d)?,
        ProblemKind::Custom => {
            let path = config
                .problem_file
                .as_deref()
                .ok_or_else(|| CliError::invalid("problem-file", "required with --problem custom"))?;
            load_problem(path, d)?
        }
    })
}

pub fn method_config(config: &RunConfig) -> MethodConfig {
    MethodConfig {
        truncation: config.k,
        shift: config.c,
        smoothing: config.beta,
        theta: config.theta,
        kappa: config.kappa,
        ridge: config.ridge,
        normalization: config.normalization,
    }
}

pub fn experiment_config(config: &RunConfig, n: usize) -> ExperimentConfig {
    ExperimentConfig {
        interior: n,
        boundary: config.n_b,
        method: method_config(config),
        solver: SolverSettings {
            method: config.solver,
            tol: config.tol,
            max_iter: config.max_iter,
            omega: config.omega,
            jacobi: config.jacobi,
        },
        repeats: config.repeats,
        base_seed: config.seed,
    }
}

/// Runs every configuration in the sweep.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    let problem = build_problem(config)?;
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for n in config.sizes() {
        let report = run_experiment(&problem, &experiment_config(config, n))?;
        let (mut r, s) = rows(&report, records.len());
        for (row, rec) in r.iter().zip(&report.records) {
            if let Some(detail) = &rec.detail {
                eprintln!("run {} (seed {}): {}: {detail}", row.run_id, row.seed, row.status);
            } else if !rec.is_ok() {
                eprintln!("run {} (seed {}): {}", row.run_id, row.seed, row.status);
            }
        }
        records.append(&mut r);
        summaries.push(s);
    }
    Ok(Outcome { records, summaries })
}

/// Writes the assembled matrix of the first configuration's first seed.
pub fn dump_matrix(config: &RunConfig) -> Result<()> {
    let Some(path) = &config.dump_matrix else {
        return Ok(());
    };
    let problem = build_problem(config)?;
    let n = config.sizes()[0];
    let method = method_config(config);
    let set = prepare_index_set(config.d, n, &method)?;
    let nb = config.n_b.unwrap_or_else(|| default_boundary_count(config.d, n));
    let nodes = NodeSet::generate(&problem.domain, n, nb, config.seed)?;
    let disc = discretize(&problem, &nodes, &set, &method)?;
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    disc.system
        .matrix
        .write_triplets(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn write_outcome(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    match (&config.output, config.format) {
        (Some(path), OutputFormat::Csv) => {
            let mut out = Vec::new();
            write_records_csv(&mut out, &outcome.records)?;
            std::fs::write(path, out).map_err(|e| CliError::io(path, e))?;
            let side = summary_path(path);
            let mut out = Vec::new();
            write_summaries_csv(&mut out, &outcome.summaries)?;
            std::fs::write(&side, out).map_err(|e| CliError::io(side, e))
        }
        (Some(path), OutputFormat::Json) => {
            let mut out = Vec::new();
            write_json(&mut out, &outcome.records, &outcome.summaries)?;
            out.push(b'\n');
            std::fs::write(path, out).map_err(|e| CliError::io(path, e))
        }
        (None, format) => {
            let mut out = Vec::new();
            match format {
                OutputFormat::Csv => {
                    write_records_csv(&mut out, &outcome.records)?;
                    out.push(b'\n');
                    write_summaries_csv(&mut out, &outcome.summaries)?;
                }
                OutputFormat::Json => {
                    write_json(&mut out, &outcome.records, &outcome.summaries)?;
                    out.push(b'\n');
                }
            }
            io::stdout()
                .lock()
                .write_all(&out)
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code:
/// 0 when every run succeeded, 2 when any run failed, 1 on usage,
/// configuration or I/O errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(flags) => flags,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let result = flags.resolve().and_then(|config| {
        if flags.dump_config {
            print!("{}", config.to_text());
            return Ok(false);
        }
        dump_matrix(&config)?;
        let outcome = execute(&config)?;
        write_outcome(&config, &outcome)?;
        Ok(outcome.any_failed())
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}
