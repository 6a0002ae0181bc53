//! Global difference system: CSR storage and Dirichlet elimination.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::geometry::NodeSet;
use crate::stencil::Stencil;

/// Row-compressed sparse matrix. Column indices are strictly increasing
/// within each row and explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1
            || row_offsets[0] != 0
            || *row_offsets.last().unwrap() != col_indices.len()
            || col_indices.len() != values.len()
        {
            return Err(Error::InvalidArgument("inconsistent CSR arrays".into()));
        }
        for row in row_offsets.windows(2) {
            if row[0] > row[1] {
                return Err(Error::InvalidArgument("row offsets must be nondecreasing".into()));
            }
            let cols = &col_indices[row[0]..row[1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::InvalidArgument(
                    "column indices must be in range and strictly increasing per row".into(),
                ));
            }
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite and nonzero".into()));
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds from a dense row-major matrix, dropping zeros.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[f64]) -> Result<Self> {
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = dense[i * ncols + j];
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self::new(nrows, ncols, offsets, cols, vals)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, a)| a * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[i * self.ncols + j] = v;
            }
        }
        dense
    }

    /// Text dump: a `rows cols nnz` header, then one zero-based `i j value`
    /// triplet per line with 17 significant digits.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Reduced system `A U = rhs` over the interior unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// `||A u - rhs||_2 / ||rhs||_2`, or the absolute norm when `rhs = 0`.
    pub fn relative_residual(&self, u: &[f64]) -> f64 {
        let au = self.matrix.mul_vec(u);
        let res = au
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm = self.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        if norm > 0.0 {
            res / norm
        } else {
            res
        }
    }
}

/// Assembles the discretisation of `0.5 Laplacian u = source` with
/// `u = boundary` on the boundary nodes. Boundary columns move to the
/// right-hand side so the unknowns are the interior values only.
pub fn assemble<F, G>(
    stencils: &[Stencil],
    nodes: &NodeSet,
    source: F,
    boundary: G,
) -> Result<SparseSystem>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let n = nodes.interior_len();
    if stencils.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} stencils, got {}",
            stencils.len()
        )));
    }
    let boundary_values: Vec<f64> = nodes.boundary().map(&boundary).collect();

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = Vec::with_capacity(n);
    for (i, (stencil, x)) in stencils.iter().zip(nodes.interior()).enumerate() {
        if stencil.reference != i {
            return Err(Error::InvalidArgument(format!(
                "stencil {i} belongs to node {}",
                stencil.reference
            )));
        }
        let mut b = source(x);
        // Neighbour indices ascend, so interior columns come out sorted.
        for (&k, &w) in stencil.neighbors.iter().zip(&stencil.weights) {
            if k < n {
                if w != 0.0 {
                    cols.push(k);
                    vals.push(w);
                }
            } else {
                b -= w * boundary_values[k - n];
            }
        }
        rhs.push(b);
        offsets.push(cols.len());
    }
    let matrix = CsrMatrix::new(n, n, offsets, cols, vals)?;
    Ok(SparseSystem { matrix, rhs })
}
