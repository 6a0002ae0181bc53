//! Run configuration: defaults, `key = value` config files and flag
//! overrides. Config keys are the long flag names without the dashes.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use hhfd::hermite::Normalization;
use hhfd::solver::SolverMethod;
use hhfd::stencil::{DEFAULT_KAPPA, DEFAULT_RIDGE, DEFAULT_THETA};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Case1,
    Case2,
    Case3,
    /// Read from `problem-file`.
    Custom,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Case1 => "case1",
            ProblemKind::Case2 => "case2",
            ProblemKind::Case3 => "case3",
            ProblemKind::Custom => "custom",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "case1" => Ok(ProblemKind::Case1),
            "case2" => Ok(ProblemKind::Case2),
            "case3" => Ok(ProblemKind::Case3),
            "custom" => Ok(ProblemKind::Custom),
            _ => Err("expected one of case1, case2, case3, custom".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub problem_file: Option<PathBuf>,
    pub d: usize,
    pub n: usize,
    pub n_b: Option<usize>,
    pub k: u64,
    pub c: f64,
    pub beta: f64,
    pub theta: f64,
    pub kappa: f64,
    pub ridge: f64,
    pub normalization: Normalization,
    pub tol: f64,
    pub solver: SolverMethod,
    pub omega: f64,
    pub max_iter: Option<usize>,
    pub jacobi: bool,
    pub seed: u64,
    pub repeats: usize,
    pub sweep: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub dump_matrix: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Case1,
            problem_file: None,
            d: 2,
            n: 400,
            n_b: None,
            k: 4,
            c: 1.0,
            beta: 0.0,
            theta: DEFAULT_THETA,
            kappa: DEFAULT_KAPPA,
            ridge: DEFAULT_RIDGE,
            normalization: Normalization::Orthonormal,
            tol: 1e-10,
            solver: SolverMethod::BiCgStab,
            omega: 1.0,
            max_iter: None,
            jacobi: false,
            seed: 0,
            repeats: 10,
            sweep: None,
            output: None,
            format: OutputFormat::Csv,
            dump_matrix: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| CliError::invalid(key, format!("`{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::invalid(key, format!("`{value}`: expected true or false"))),
    }
}

fn parse_normalization(key: &str, value: &str) -> Result<Normalization> {
    match value {
        "orthonormal" => Ok(Normalization::Orthonormal),
        "paper" => Ok(Normalization::Paper),
        _ => Err(CliError::invalid(key, format!("`{value}`: expected orthonormal or paper"))),
    }
}

/// Floats in a form that parses back to the same bits.
fn float(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl RunConfig {
    /// Sets one key from its text form. Returns `Ok(false)` for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "problem" => self.problem = parse(key, value)?,
            "problem-file" => self.problem_file = Some(PathBuf::from(value)),
            "d" => self.d = parse(key, value)?,
            "N" => self.n = parse(key, value)?,
            "N_b" => self.n_b = Some(parse(key, value)?),
            "K" => self.k = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "theta" => self.theta = parse(key, value)?,
            "kappa" => self.kappa = parse(key, value)?,
            "ridge" => self.ridge = parse(key, value)?,
            "normalization" => self.normalization = parse_normalization(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "solver" => self.solver = parse(key, value)?,
            "omega" => self.omega = parse(key, value)?,
            "max-iter" => self.max_iter = Some(parse(key, value)?),
            "jacobi" => self.jacobi = parse_bool(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "repeats" => self.repeats = parse(key, value)?,
            "sweep" => {
                let values = value
                    .split(',')
                    .map(|s| parse::<usize>(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                self.sweep = Some(values);
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = parse(key, value)?,
            "dump-matrix" => self.dump_matrix = Some(PathBuf::from(value)),
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Applies a `key = value` config text. Blank lines and `#` comments
    /// are ignored; unknown keys are rejected.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            if !self.set(key, value.trim())? {
                return Err(CliError::UnknownKey {
                    key: key.to_string(),
                    line: i + 1,
                });
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        config.validate()?;
        Ok(config)
    }

    /// The `N` values to run: the sweep if given, otherwise `N` alone.
    pub fn sizes(&self) -> Vec<usize> {
        self.sweep.clone().unwrap_or_else(|| vec![self.n])
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: usize| {
            if v == 0 {
                Err(CliError::invalid(key, "must be positive"))
            } else {
                Ok(())
            }
        };
        positive("d", self.d)?;
        positive("N", self.n)?;
        positive("repeats", self.repeats)?;
        if self.k == 0 {
            return Err(CliError::invalid("K", "must be positive"));
        }
        if let Some(nb) = self.n_b {
            positive("N_b", nb)?;
        }
        if let Some(m) = self.max_iter {
            positive("max-iter", m)?;
        }
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(CliError::invalid("c", "must be at least 1"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(CliError::invalid("beta", "must be nonnegative"));
        }
        if !(self.theta > 1.0) || !self.theta.is_finite() {
            return Err(CliError::invalid("theta", "must exceed 1"));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(CliError::invalid("kappa", "must be positive"));
        }
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(CliError::invalid("ridge", "must be nonnegative"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::invalid("tol", "must be positive"));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(CliError::invalid("omega", "must lie in (0, 2)"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() || sweep.contains(&0) {
                return Err(CliError::invalid("sweep", "needs positive sizes"));
            }
            if sweep.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::invalid("sweep", "sizes must be strictly increasing"));
            }
        }
        match (self.problem, &self.problem_file) {
            (ProblemKind::Custom, None) => {
                return Err(CliError::invalid("problem-file", "required with --problem custom"))
            }
            (ProblemKind::Custom, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                return Err(CliError::invalid("problem-file", "only used with --problem custom"))
            }
        }
        Ok(())
    }

    /// Config text that parses back to this configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("problem", self.problem.to_string());
        if let Some(p) = &self.problem_file {
            put("problem-file", p.display().to_string());
        }
        put("d", self.d.to_string());
        put("N", self.n.to_string());
        if let Some(nb) = self.n_b {
            put("N_b", nb.to_string());
        }
        put("K", self.k.to_string());
        put("c", float(self.c));
        put("beta", float(self.beta));
        put("theta", float(self.theta));
        put("kappa", float(self.kappa));
        put("ridge", float(self.ridge));
        put(
            "normalization",
            match self.normalization {
                Normalization::Orthonormal => "orthonormal",
                Normalization::Paper => "paper",
            }
            .to_string(),
        );
        put("tol", float(self.tol));
        put("solver", self.solver.to_string());
        put("omega", float(self.omega));
        if let Some(m) = self.max_iter {
            put("max-iter", m.to_string());
        }
        put("jacobi", self.jacobi.to_string());
        put("seed", self.seed.to_string());
        put("repeats", self.repeats.to_string());
        if let Some(s) = &self.sweep {
            put("sweep", s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
        }
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        put("format", self.format.to_string());
        if let Some(p) = &self.dump_matrix {
            put("dump-matrix", p.display().to_string());
        }
        out
    }
}

/// Command-line flags. Values stay textual here and are parsed by
/// [`RunConfig::set`] so that flags and config files share one code path.
#[derive(Debug, Parser)]
#[command(name = "hhfd", version, about = "Meshless Hermite finite-difference Poisson benchmarks")]
pub struct Flags {
    /// case1, case2, case3 or custom
    #[arg(long)]
    pub problem: Option<String>,
    /// Problem description for --problem custom
    #[arg(long = "problem-file")]
    pub problem_file: Option<String>,
    /// Dimension
    #[arg(long)]
    pub d: Option<String>,
    /// Interior node count
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Boundary node count [default: max(2d, ceil(0.3 N))]
    #[arg(long = "N_b")]
    pub n_b: Option<String>,
    /// Truncation order
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Index shift (>= 1)
    #[arg(long)]
    pub c: Option<String>,
    /// Smoothing factor
    #[arg(long)]
    pub beta: Option<String>,
    /// Oversampling factor (> 1)
    #[arg(long)]
    pub theta: Option<String>,
    /// Stencil radius constant
    #[arg(long)]
    pub kappa: Option<String>,
    /// Relative ridge added to local Gram matrices
    #[arg(long)]
    pub ridge: Option<String>,
    /// orthonormal or paper
    #[arg(long)]
    pub normalization: Option<String>,
    /// Solver tolerance on the relative residual
    #[arg(long)]
    pub tol: Option<String>,
    /// bicgstab or sor
    #[arg(long)]
    pub solver: Option<String>,
    /// SOR relaxation factor
    #[arg(long)]
    pub omega: Option<String>,
    /// Iteration cap [default: 10 N]
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// Jacobi preconditioning for BiCGSTAB
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub jacobi: Option<String>,
    /// Base seed; repeat r uses seed + r
    #[arg(long)]
    pub seed: Option<String>,
    /// Runs per node count
    #[arg(long)]
    pub repeats: Option<String>,
    /// Comma-separated increasing list of N values
    #[arg(long)]
    pub sweep: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    /// Write the first assembled matrix as triplets to this path
    #[arg(long = "dump-matrix")]
    pub dump_matrix: Option<String>,
    /// key = value config file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration and exit
    #[arg(long = "dump-config")]
    pub dump_config: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("problem", &self.problem),
            ("problem-file", &self.problem_file),
            ("d", &self.d),
            ("N", &self.n),
            ("N_b", &self.n_b),
            ("K", &self.k),
            ("c", &self.c),
            ("beta", &self.beta),
            ("theta", &self.theta),
            ("kappa", &self.kappa),
            ("ridge", &self.ridge),
            ("normalization", &self.normalization),
            ("tol", &self.tol),
            ("solver", &self.solver),
            ("omega", &self.omega),
            ("max-iter", &self.max_iter),
            ("jacobi", &self.jacobi),
            ("seed", &self.seed),
            ("repeats", &self.repeats),
            ("sweep", &self.sweep),
            ("output", &self.output),
            ("format", &self.format),
            ("dump-matrix", &self.dump_matrix),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then the config file, then the flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }
}
