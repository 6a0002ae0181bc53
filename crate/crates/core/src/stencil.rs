//! Local weighted least-squares Laplacian stencils.
//!
//! Around a reference node `x_i` the solution is modelled as
//! `sum_j alpha_j H_j(x - x_i) / k_j^beta` over the truncated basis. The
//! coefficients are fitted to the neighbouring nodal values by
//! Gaussian-weighted least squares, and the halved Laplacian of the fit at
//! `x_i` becomes a row of finite-difference weights.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{squared_distance, NodeSet};
use crate::hermite::{BasisSpec, PhiScratch};
use crate::index_set::{order_number, MultiIndex};

pub const DEFAULT_KAPPA: f64 = 2.628;
pub const DEFAULT_THETA: f64 = 3.0;
pub const DEFAULT_RIDGE: f64 = 1e-10;
pub const EXPANSION_FACTOR: f64 = 1.1;
pub const MAX_EXPANSIONS: usize = 50;
/// Local systems with a larger condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e14;
const REFINEMENT_STEPS: usize = 2;
const REFINE_MARGIN: f64 = 1e3;

/// Gaussian scale from the node density:
/// `lambda = kappa sqrt(pi) (N / (theta M Gamma(d/2 + 1) |Omega|))^(1/d)`.
///
/// This places about `theta * M` nodes inside the stencil ball of radius
/// `kappa / lambda` around an interior node.
pub fn select_lambda(
    theta: f64,
    kappa: f64,
    basis_size: usize,
    interior: usize,
    measure: f64,
    dimension: usize,
) -> Result<f64> {
    if !(theta > 1.0) {
        return Err(Error::InvalidArgument(format!("theta must exceed 1, got {theta}")));
    }
    if !(kappa > 0.0) || basis_size == 0 || interior == 0 || !(measure > 0.0) || dimension == 0 {
        return Err(Error::InvalidArgument(
            "lambda selection needs positive kappa, M, N, |Omega| and d".into(),
        ));
    }
    let d = dimension as f64;
    let ln_ratio = (interior as f64).ln()
        - theta.ln()
        - (basis_size as f64).ln()
        - ln_gamma(0.5 * d + 1.0)
        - measure.ln();
    Ok(kappa * std::f64::consts::PI.sqrt() * (ln_ratio / d).exp())
}

/// Column scale `k_m^(-beta)` of the smoothed expansion.
pub fn smooth_coefficient_scale(m: &MultiIndex, c: f64, beta: f64) -> f64 {
    order_number(m, c).powf(-beta)
}

/// Stencil construction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub kappa: f64,
    pub theta: f64,
    pub lambda: f64,
    pub ridge: f64,
    pub min_neighbors: usize,
}

impl MethodParams {
    pub fn new(kappa: f64, theta: f64, lambda: f64, min_neighbors: usize) -> Result<Self> {
        let params = Self {
            kappa,
            theta,
            lambda,
            ridge: DEFAULT_RIDGE,
            min_neighbors,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_ridge(mut self, ridge: f64) -> Result<Self> {
        self.ridge = ridge;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.theta > 1.0) {
            return Err(Error::InvalidArgument(format!("theta must exceed 1, got {}", self.theta)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        Ok(())
    }

    /// Stencil radius `rho = kappa / lambda`.
    pub fn radius(&self) -> f64 {
        self.kappa / self.lambda
    }
}

/// Neighbour search result.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    /// Global node indices in ascending order.
    pub indices: Vec<usize>,
    pub radius: f64,
    pub expansions: usize,
}

/// All nodes within `radius` of node `reference`, growing the radius by
/// [`EXPANSION_FACTOR`] until at least `min_count` nodes are found.
pub fn find_neighbors(
    nodes: &NodeSet,
    reference: usize,
    radius: f64,
    min_count: usize,
) -> Result<Neighborhood> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let center = nodes.point(reference);
    let dist2: Vec<f64> = nodes.points().map(|p| squared_distance(p, center)).collect();
    let mut rho = radius;
    let mut expansions = 0;
    loop {
        let r2 = rho * rho;
        let found = dist2.iter().filter(|&&d| d <= r2).count();
        if found >= min_count {
            let indices = dist2
                .iter()
                .enumerate()
                .filter(|(_, &d)| d <= r2)
                .map(|(i, _)| i)
                .collect();
            return Ok(Neighborhood {
                indices,
                radius: rho,
                expansions,
            });
        }
        if expansions == MAX_EXPANSIONS {
            return Err(Error::InsufficientNodes {
                reference,
                found,
                required: min_count,
                radius: rho,
                expansions,
            });
        }
        rho *= EXPANSION_FACTOR;
        expansions += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilDiagnostics {
    pub neighbor_count: usize,
    pub condition: f64,
    pub expansions: usize,
    pub radius: f64,
}

/// Weights approximating `0.5 * Laplacian u` at one interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub reference: usize,
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
    pub diagnostics: StencilDiagnostics,
}

impl Stencil {
    /// `sum_j w_j u_j` over nodal values given in the global node order.
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.neighbors
            .iter()
            .zip(&self.weights)
            .map(|(&n, w)| w * values[n])
            .sum()
    }

    pub fn weight_l1(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

/// Builds stencils for one basis and parameter set. The right-hand side of
/// the local normal equations is shared by every node and computed once.
#[derive(Debug, Clone)]
pub struct StencilBuilder<'a> {
    spec: &'a BasisSpec,
    params: MethodParams,
    column_scales: Vec<f64>,
    target: DVector<f64>,
}

impl<'a> StencilBuilder<'a> {
    pub fn new(spec: &'a BasisSpec, params: MethodParams) -> Result<Self> {
        if spec.is_empty() {
            return Err(Error::InvalidArgument("basis is empty".into()));
        }
        if (spec.scale() - params.lambda).abs() > 1e-12 * params.lambda {
            return Err(Error::InvalidArgument(format!(
                "basis scale {} differs from method lambda {}",
                spec.scale(),
                params.lambda
            )));
        }
        let c = spec.index_set().shift();
        let column_scales: Vec<f64> = spec
            .index_set()
            .members()
            .iter()
            .map(|m| smooth_coefficient_scale(&m.index, c, spec.smoothing()))
            .collect();
        let mut scratch = PhiScratch::new(spec);
        let mut lap = vec![0.0; spec.len()];
        spec.laplacians_at(&vec![0.0; spec.dimension()], &mut scratch, &mut lap);
        let target = DVector::from_iterator(
            spec.len(),
            lap.iter().zip(&column_scales).map(|(l, s)| 0.5 * l * s),
        );
        Ok(Self {
            spec,
            params,
            column_scales,
            target,
        })
    }

    pub fn params(&self) -> &MethodParams {
        &self.params
    }

    pub fn build(&self, nodes: &NodeSet, reference: usize) -> Result<Stencil> {
        let spec = self.spec;
        let m = spec.len();
        let min_count = self.params.min_neighbors.max(m);
        let hood = find_neighbors(nodes, reference, self.params.radius(), min_count)?;
        let q = hood.indices.len();
        let center = nodes.point(reference);
        let lambda2 = self.params.lambda * self.params.lambda;

        // Row r of `design` is sqrt(W_rr) times row r of B.
        let mut design = DMatrix::<f64>::zeros(q, m);
        let mut gauss = Vec::with_capacity(q);
        let mut scratch = PhiScratch::new(spec);
        let mut delta = vec![0.0; spec.dimension()];
        let mut row = vec![0.0; m];
        for (r, &n) in hood.indices.iter().enumerate() {
            for ((dj, xj), cj) in delta.iter_mut().zip(nodes.point(n)).zip(center) {
                *dj = xj - cj;
            }
            let weight = (-lambda2 * delta.iter().map(|v| v * v).sum::<f64>()).exp();
            gauss.push(weight);
            spec.values_at(&delta, &mut scratch, &mut row);
            let root = weight.sqrt();
            for (j, (v, s)) in row.iter().zip(&self.column_scales).enumerate() {
                design[(r, j)] = root * v * s;
            }
        }

        let gram = design.tr_mul(&design);
        let shift = self.params.ridge * gram.trace() / m as f64;
        let (lo, hi) = gram
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        let condition = if lo + shift > 0.0 {
            (hi + shift) / (lo + shift)
        } else {
            f64::INFINITY
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularStencil {
                reference,
                condition,
            });
        }
        let mut regularized = gram.clone();
        for j in 0..m {
            regularized[(j, j)] += shift;
        }
        let chol = regularized.cholesky().ok_or(Error::SingularStencil {
            reference,
            condition,
        })?;
        let mut y = chol.solve(&self.target);
        // Refinement against the unshifted Gram matrix removes the ridge
        // bias; each step contracts it by shift / (lo + shift).
        if lo > REFINE_MARGIN * shift {
            for _ in 0..REFINEMENT_STEPS {
                let residual = &self.target - &gram * &y;
                y += chol.solve(&residual);
            }
        }

        // w = W B y = sqrt(W) (sqrt(W) B) y
        let projected = &design * y;
        let weights: Vec<f64> = projected
            .iter()
            .zip(&gauss)
            .map(|(p, g)| p * g.sqrt())
            .collect();
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::SingularStencil {
                reference,
                condition,
            });
        }

        Ok(Stencil {
            reference,
            neighbors: hood.indices,
            weights,
            diagnostics: StencilDiagnostics {
                neighbor_count: q,
                condition,
                expansions: hood.expansions,
                radius: hood.radius,
            },
        })
    }

    /// Stencils for every interior node, built in parallel and returned in
    /// interior order.
    pub fn build_all(&self, nodes: &NodeSet) -> Result<Vec<Stencil>> {
        (0..nodes.interior_len())
            .into_par_iter()
            .map(|i| self.build(nodes, i))
            .collect()
    }
}

/// One-shot stencil for node `reference`.
pub fn build_laplacian_row(
    nodes: &NodeSet,
    reference: usize,
    spec: &BasisSpec,
    params: &MethodParams,
) -> Result<Stencil> {
    StencilBuilder::new(spec, params.clone())?.build(nodes, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::hermite::Normalization;
    use crate::index_set::IndexSet;

    #[test]
    fn lambda_unit_ratio() {
        // theta M Gamma(2) |Omega| = 2 * 10 * 1 * 50 = 1000 = N
        let l = select_lambda(2.0, DEFAULT_KAPPA, 10, 1000, 50.0, 2).unwrap();
        assert!((l - 4.658008720179696).abs() < 1e-12);
    }

    #[test]
    fn lambda_disc_example() {
        let l = select_lambda(2.0, DEFAULT_KAPPA, 10, 1000, std::f64::consts::PI, 2).unwrap();
        assert!((l - 18.58276620958247).abs() < 1e-10);
    }

    #[test]
    fn lambda_doubling_n() {
        for d in [1usize, 3, 7] {
            let a = select_lambda(3.0, 1.5, 12, 500, 2.0, d).unwrap();
            let b = select_lambda(3.0, 1.5, 12, 1000, 2.0, d).unwrap();
            assert!((b / a - 2f64.powf(1.0 / d as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_rejects_theta_le_one() {
        assert!(select_lambda(1.0, DEFAULT_KAPPA, 10, 100, 1.0, 2).is_err());
    }

    #[test]
    fn smoothing_scales() {
        let m = MultiIndex::from_dense(&[2, 0, 1]).unwrap();
        assert_eq!(smooth_coefficient_scale(&m, 1.0, 0.0), 1.0);
        assert!((smooth_coefficient_scale(&m, 1.0, 1.0) - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(smooth_coefficient_scale(&MultiIndex::zero(4), 1.0, 3.5), 1.0);
    }

    #[test]
    fn neighbors_include_reference_and_expand() {
        let nodes = NodeSet::from_points(
            1,
            vec![vec![0.0], vec![0.5], vec![0.9]],
            vec![vec![1.0]],
            0,
        )
        .unwrap();
        let hood = find_neighbors(&nodes, 0, 0.01, 1).unwrap();
        assert_eq!(hood.indices, vec![0]);
        let hood = find_neighbors(&nodes, 0, 0.1, 3).unwrap();
        assert_eq!(hood.indices, vec![0, 1, 2]);
        assert!(hood.expansions > 0);
        let hood = find_neighbors(&nodes, 0, 100.0, 4).unwrap();
        assert_eq!(hood.indices, vec![0, 1, 2, 3]);
        assert!(matches!(
            find_neighbors(&nodes, 0, 0.1, 5),
            Err(Error::InsufficientNodes { found: 4, .. })
        ));
    }

    #[test]
    fn disc_neighbor_count() {
        let nodes = NodeSet::generate(&Domain::unit_ball(2).unwrap(), 1000, 0, 1).unwrap();
        // Put a reference near the origin: pick the closest node.
        let (reference, _) = nodes
            .interior()
            .enumerate()
            .map(|(i, p)| (i, p[0] * p[0] + p[1] * p[1]))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let hood = find_neighbors(&nodes, reference, 0.2, 1).unwrap();
        assert!((20..=60).contains(&hood.indices.len()), "{}", hood.indices.len());
    }

    #[test]
    fn constant_and_linear_fields() {
        let domain = Domain::cube(2, -1.0, 1.0).unwrap();
        let nodes = NodeSet::generate(&domain, 300, 60, 4).unwrap();
        let set = IndexSet::enumerate(2, 1.0, 4).unwrap();
        let lambda = select_lambda(2.0, DEFAULT_KAPPA, set.len(), 300, 4.0, 2).unwrap();
        let spec = BasisSpec::new(set.clone(), lambda, 0.0, Normalization::Orthonormal).unwrap();
        let params = MethodParams::new(DEFAULT_KAPPA, 2.0, lambda, set.len()).unwrap();
        let st = build_laplacian_row(&nodes, 17, &spec, &params).unwrap();
        assert!(st.neighbors.contains(&17));
        assert!(st.neighbors.len() >= set.len());
        let ones = vec![1.0; nodes.len()];
        assert!(st.apply(&ones).abs() < 1e-8);
        let lin: Vec<f64> = nodes.points().map(|p| p[0]).collect();
        assert!(st.apply(&lin).abs() < 1e-8);
        let quad: Vec<f64> = nodes.points().map(|p| p[1] * p[1]).collect();
        assert!((st.apply(&quad) - 1.0).abs() < 1e-8);
    }
}
