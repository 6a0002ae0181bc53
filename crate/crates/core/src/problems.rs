//! Dirichlet problems `0.5 Laplacian u = phi` in the domain, `u = v` on its
//! boundary, plus the benchmark cases and the relative error metric.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Domain;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Nodes whose exact solution is below this magnitude are left out of AREP.
pub const AREP_EXCLUSION: f64 = 1e-12;

#[derive(Clone)]
pub struct DirichletProblem {
    pub name: String,
    pub domain: Domain,
    pub source: ScalarField,
    pub boundary: ScalarField,
    pub exact: Option<ScalarField>,
}

impl fmt::Debug for DirichletProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl DirichletProblem {
    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// A problem manufactured from a known solution `u`: the boundary data
    /// is `u` itself and `source` must equal `0.5 Laplacian u`.
    pub fn manufactured(
        name: impl Into<String>,
        domain: Domain,
        exact: ScalarField,
        source: ScalarField,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            source,
            boundary: exact.clone(),
            exact: Some(exact),
        }
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("problem dimension must be positive".into()));
    }
    Ok(())
}

fn sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Constant source on the unit ball: `u = (1 - |x|^2)/d + sum x_i`, `phi = -1`.
pub fn case1(d: usize) -> Result<DirichletProblem> {
    check_dimension(d)?;
    let inv_d = 1.0 / d as f64;
    let exact: ScalarField = Arc::new(move |x| inv_d * (1.0 - norm2(x)) + sum(x));
    Ok(DirichletProblem {
        name: "case1".into(),
        domain: Domain::unit_ball(d)?,
        source: Arc::new(|_| -1.0),
        boundary: Arc::new(sum),
        exact: Some(exact),
    })
}

/// Quartic solution on `[-1, 1]^d`: `u = sum x_i^4 / 6`, `phi = sum x_i^2`.
pub fn case2(d: usize) -> Result<DirichletProblem> {
    check_dimension(d)?;
    let exact: ScalarField = Arc::new(|x| x.iter().map(|v| v.powi(4)).sum::<f64>() / 6.0);
    Ok(DirichletProblem::manufactured(
        "case2",
        Domain::cube(d, -1.0, 1.0)?,
        exact,
        Arc::new(norm2),
    ))
}

/// Transcendental solution on `[-3, 3]^d`:
/// `u = atan(s/2) + exp(-|x|^2)` with `s = sum x_i`, and
/// `phi = (2|x|^2 - d) exp(-|x|^2) - 2 d s / (4 + s^2)^2`.
pub fn case3(d: usize) -> Result<DirichletProblem> {
    check_dimension(d)?;
    let df = d as f64;
    let exact: ScalarField = Arc::new(|x| (0.5 * sum(x)).atan() + (-norm2(x)).exp());
    let source: ScalarField = Arc::new(move |x| {
        let r2 = norm2(x);
        let s = sum(x);
        let q = 4.0 + s * s;
        (2.0 * r2 - df) * (-r2).exp() - 2.0 * df * s / (q * q)
    });
    Ok(DirichletProblem::manufactured(
        "case3",
        Domain::cube(d, -3.0, 3.0)?,
        exact,
        source,
    ))
}

/// Average relative error in percent, with exclusion accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arep {
    pub percent: f64,
    pub kept: usize,
    pub excluded: usize,
}

/// `100/N_kept * sum |U_i - u(x_i)| / |u(x_i)|` over nodes with
/// `|u(x_i)| >= AREP_EXCLUSION`.
pub fn arep<'a>(
    solution: &[f64],
    exact: &dyn Fn(&[f64]) -> f64,
    interior: impl IntoIterator<Item = &'a [f64]>,
) -> Result<Arep> {
    let mut total = 0.0;
    let mut kept = 0;
    let mut excluded = 0;
    let mut count = 0;
    for (u, x) in solution.iter().zip(interior) {
        count += 1;
        let reference = exact(x);
        if reference.abs() < AREP_EXCLUSION {
            excluded += 1;
            continue;
        }
        total += ((u - reference) / reference).abs();
        kept += 1;
    }
    if count != solution.len() {
        return Err(Error::InvalidArgument(format!(
            "solution has {} entries but {count} nodes were given",
            solution.len()
        )));
    }
    if kept == 0 {
        return Err(Error::AllExcluded);
    }
    Ok(Arep {
        percent: 100.0 * total / kept as f64,
        kept,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_values() {
        let p = case1(30).unwrap();
        let u = p.exact.as_ref().unwrap();
        assert!((u(&[0.0; 30]) - 1.0 / 30.0).abs() < 1e-16);
        let mut e = [0.0; 30];
        e[3] = 1.0;
        assert_eq!(u(&e), (p.boundary)(&e));
        assert_eq!((p.source)(&e), -1.0);
    }

    #[test]
    fn case2_values() {
        let p = case2(20).unwrap();
        let mut e = [0.0; 20];
        e[0] = 1.0;
        assert!((p.exact.as_ref().unwrap()(&e) - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!((p.source)(&[0.0; 20]), 0.0);
        assert_eq!((p.source)(&e), 1.0);
    }

    #[test]
    fn case3_values() {
        let p = case3(4).unwrap();
        assert_eq!(p.exact.as_ref().unwrap()(&[0.0; 4]), 1.0);
        assert_eq!((p.source)(&[0.0; 4]), -4.0);
    }

    #[test]
    fn arep_examples() {
        let pts = [vec![1.0], vec![2.0]];
        let exact = |x: &[f64]| x[0];
        let r = arep(&[1.0, 2.0], &exact, pts.iter().map(|p| p.as_slice())).unwrap();
        assert_eq!(r.percent, 0.0);
        let r = arep(&[1.01, 2.02], &exact, pts.iter().map(|p| p.as_slice())).unwrap();
        assert!((r.percent - 1.0).abs() < 1e-12);
        let r = arep(&[1.0, 2.04], &exact, pts.iter().map(|p| p.as_slice())).unwrap();
        assert!((r.percent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arep_exclusion() {
        let pts = [vec![0.0], vec![2.0], vec![1e-13]];
        let exact = |x: &[f64]| x[0];
        let r = arep(&[5.0, 2.0, 1.0], &exact, pts.iter().map(|p| p.as_slice())).unwrap();
        assert_eq!((r.kept, r.excluded), (1, 2));
        assert_eq!(r.percent, 0.0);
        let zeros = [vec![0.0]];
        assert_eq!(
            arep(&[1.0], &exact, zeros.iter().map(|p| p.as_slice())).unwrap_err(),
            Error::AllExcluded
        );
    }
}
