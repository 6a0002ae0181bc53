use hhfd::assembly::{assemble, SparseSystem};
use hhfd::geometry::{squared_distance, Domain, NodeSet};
use hhfd::solver::{bicgstab, bicgstab_jacobi, sor, SolverMethod, SolverSettings};
use hhfd::stencil::{Stencil, StencilDiagnostics};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A strictly diagonally dominant Laplacian-like system assembled from
/// nearest-neighbour stencils on random nodes.
fn random_system(seed: u64) -> SparseSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..=200);
    let domain = Domain::cube(2, 0.0, 1.0).unwrap();
    let nodes = NodeSet::generate(&domain, n, 40, seed).unwrap();
    let stencils: Vec<Stencil> = (0..n)
        .map(|i| {
            let x = nodes.point(i);
            let mut order: Vec<usize> = (0..nodes.len()).filter(|&k| k != i).collect();
            order.sort_by(|&a, &b| squared_distance(nodes.point(a), x).total_cmp(&squared_distance(nodes.point(b), x)));
            let mut pairs: Vec<(usize, f64)> = order[..6].iter().map(|&k| (k, rng.random_range(0.1..1.0))).collect();
            let off: f64 = pairs.iter().map(|p| p.1).sum();
            pairs.push((i, -off * rng.random_range(1.5..3.0)));
            pairs.sort_by_key(|p| p.0);
            Stencil {
                reference: i,
                neighbors: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
                diagnostics: StencilDiagnostics { neighbor_count: 7, condition: 1.0, expansions: 0, radius: 1.0 },
            }
        })
        .collect();
    assemble(&stencils, &nodes, |x| x[0] - 2.0 * x[1], |x| (3.0 * x[0]).sin()).unwrap()
}

fn dense_solution(system: &SparseSystem) -> DVector<f64> {
    let n = system.len();
    let a = DMatrix::from_row_slice(n, n, &system.matrix.to_dense());
    a.lu().solve(&DVector::from_column_slice(&system.rhs)).unwrap()
}

fn relative_error(u: &[f64], oracle: &DVector<f64>) -> f64 {
    let diff: f64 = u.iter().zip(oracle.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    diff / oracle.norm()
}

#[test]
fn iterative_solvers_match_dense_lu() {
    let tol = 1e-10;
    for seed in 0..20 {
        let system = random_system(seed);
        let oracle = dense_solution(&system);
        for report in [
            bicgstab(&system, tol, 2000).unwrap(),
            bicgstab_jacobi(&system, tol, 2000).unwrap(),
            sor(&system, 1.0, tol, 2000).unwrap(),
            sor(&system, 1.2, tol, 2000).unwrap(),
        ] {
            assert!(report.converged, "seed {seed} {}", report.method);
            let err = relative_error(&report.solution, &oracle);
            assert!(err <= 10.0 * tol, "seed {seed} {}: {err}", report.method);
        }
    }
}

#[test]
fn reported_residual_is_true() {
    for seed in 30..40 {
        let system = random_system(seed);
        for method in [SolverMethod::BiCgStab, SolverMethod::Sor] {
            let settings = SolverSettings { method, tol: 1e-9, ..Default::default() };
            let report = settings.solve(&system).unwrap();
            let truth = system.relative_residual(&report.solution);
            assert!((truth - report.final_residual).abs() <= 1e-12);
            assert!(!report.converged || report.final_residual <= 1e-9);
        }
    }
}

#[test]
fn sparse_storage_has_no_zeros() {
    let system = random_system(3);
    assert!(system.matrix.values().iter().all(|v| *v != 0.0));
    let avg = system.matrix.nnz() as f64 / system.len() as f64;
    assert!(avg <= 7.0);
}
