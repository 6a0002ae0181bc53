//! User-defined problems read from a `key = value` file.
//!
//! ```text
//! domain = box            # or ball
//! lo = -1                 # scalar or comma list (box)
//! hi = 1
//! center = 0              # ball
//! radius = 1
//! source = 2.0 * d        # half the Laplacian of the solution
//! exact = x0^2 + x1^2     # optional
//! boundary = ...          # optional when exact is given
//! ```
//!
//! Expressions are evaluated with `evalexpr`; coordinates are `x0 .. x{d-1}`
//! and `d` is the dimension. Use float literals: `1/6` is integer division.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use hhfd::geometry::Domain;
use hhfd::problems::{DirichletProblem, ScalarField};

use crate::error::{CliError, Result};

struct Spec<'a> {
    path: &'a Path,
    entries: HashMap<String, String>,
}

impl Spec<'_> {
    fn fail(&self, message: impl Into<String>) -> CliError {
        CliError::Problem {
            path: self.path.to_path_buf(),
            message: message.into(),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| self.fail(format!("missing `{key}`")))
    }

    /// A scalar broadcast to `d` entries, or an explicit list of length `d`.
    fn vector(&self, key: &str, d: usize) -> Result<Vec<f64>> {
        let values = self
            .require(key)?
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| self.fail(format!("`{key}`: {e}")))?;
        match values.len() {
            1 => Ok(vec![values[0]; d]),
            n if n == d => Ok(values),
            n => Err(self.fail(format!("`{key}` has {n} entries, expected 1 or {d}"))),
        }
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .trim()
            .parse()
            .map_err(|e| self.fail(format!("`{key}`: {e}")))
    }

    fn field(&self, key: &str, d: usize) -> Result<Option<ScalarField>> {
        let Some(text) = self.get(key) else {
            return Ok(None);
        };
        let tree: Node<DefaultNumericTypes> =
            build_operator_tree(text).map_err(|e| self.fail(format!("`{key}`: {e}")))?;
        let field = Expression { tree, dimension: d };
        // Catch unknown variables and type errors before any run starts.
        let probe = field
            .try_eval(&vec![0.5; d])
            .map_err(|e| self.fail(format!("`{key}`: {e}")))?;
        if !probe.is_finite() {
            return Err(self.fail(format!("`{key}` is not finite at (0.5, ..., 0.5)")));
        }
        Ok(Some(Arc::new(move |x: &[f64]| field.eval(x))))
    }
}

struct Expression {
    tree: Node<DefaultNumericTypes>,
    dimension: usize,
}

impl Expression {
    fn try_eval(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let mut context = HashMapContext::<DefaultNumericTypes>::new();
        context
            .set_value("d".into(), Value::Int(self.dimension as i64))
            .map_err(|e| e.to_string())?;
        for (i, v) in x.iter().enumerate() {
            context
                .set_value(format!("x{i}"), Value::Float(*v))
                .map_err(|e| e.to_string())?;
        }
        self.tree
            .eval_number_with_context(&context)
            .map_err(|e| e.to_string())
    }

    /// Evaluation errors after the load-time probe become NaN, which the
    /// assembler rejects as a non-finite value.
    fn eval(&self, x: &[f64]) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }
}

pub fn parse_problem(text: &str, path: &Path, d: usize) -> Result<DirichletProblem> {
    let mut entries = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Problem {
            path: path.to_path_buf(),
            message: format!("line {} is not `key = value`", i + 1),
        })?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    let spec = Spec { path, entries };
    for key in spec.entries.keys() {
        if !matches!(
            key.as_str(),
            "name" | "domain" | "lo" | "hi" | "center" | "radius" | "source" | "boundary" | "exact"
        ) {
            return Err(spec.fail(format!("unknown key `{key}`")));
        }
    }

    let domain = match spec.require("domain")? {
        "box" => Domain::cuboid(spec.vector("lo", d)?, spec.vector("hi", d)?),
        "ball" => Domain::ball(spec.vector("center", d)?, spec.scalar("radius")?),
        other => return Err(spec.fail(format!("unknown domain `{other}`, expected box or ball"))),
    }
    .map_err(|e| spec.fail(e.to_string()))?;

    let source = spec
        .field("source", d)?
        .ok_or_else(|| spec.fail("missing `source`"))?;
    let exact = spec.field("exact", d)?;
    let boundary = match (spec.field("boundary", d)?, &exact) {
        (Some(b), _) => b,
        (None, Some(u)) => u.clone(),
        (None, None) => return Err(spec.fail("need `boundary` or `exact`")),
    };
    Ok(DirichletProblem {
        name: spec.get("name").unwrap_or("custom").to_string(),
        domain,
        source,
        boundary,
        exact,
    })
}

pub fn load_problem(path: &Path, d: usize) -> Result<DirichletProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_problem(&text, path, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_problem_with_exact_solution() {
        let text = "domain = box\nlo = -1\nhi = 1, 2\nsource = 2.0\nexact = x0^2 + x1^2 # u\n";
        let p = parse_problem(text, Path::new("p.txt"), 2).unwrap();
        assert_eq!(p.domain.measure(), 6.0);
        assert_eq!((p.boundary)(&[1.0, 2.0]), 5.0);
        assert_eq!((p.source)(&[0.3, 0.1]), 2.0);
        assert!(p.exact.is_some());
    }

    #[test]
    fn ball_problem_uses_dimension_variable() {
        let text = "domain = ball\ncenter = 0\nradius = 2\nsource = -1.0 * d\nboundary = math::sin(x2)";
        let p = parse_problem(text, Path::new("p.txt"), 3).unwrap();
        assert_eq!((p.source)(&[0.0; 3]), -3.0);
        assert!(((p.boundary)(&[0.0, 0.0, 1.0]) - 1f64.sin()).abs() < 1e-15);
        assert!(p.exact.is_none());
    }

    #[test]
    fn errors_name_the_problem() {
        let path = Path::new("bad.txt");
        for text in [
            "domain = box\nlo = 0\nhi = 1\nsource = x5\nboundary = 0",
            "domain = box\nlo = 0\nhi = 1\nboundary = 0",
            "domain = torus\nsource = 0\nboundary = 0",
            "domain = box\nlo = 0,0,0\nhi = 1\nsource = 0\nboundary = 0",
            "domain = box\nlo = 0\nhi = 1\nsource = 0",
            "domain = box\nlo = 0\nhi = 1\nsource = 0\nboundary = 0\ncolour = red",
        ] {
            let err = parse_problem(text, path, 2).unwrap_err();
            assert!(err.to_string().starts_with("problem file bad.txt"), "{err}");
        }
    }
}
