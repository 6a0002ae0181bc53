//! Scaled multivariate Hermite functions.
//!
//! The 1-D polynomials follow the Rodrigues form
//! `phi_j(t) = e^{t^2} d^j/dt^j e^{-t^2}`, i.e. `(-1)^j` times the
//! physicists' Hermite polynomial. A basis function is
//! `H_{m,lambda}(x - a) = N_m prod_i phi_{m_i}(lambda (x_i - a_i))`.

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::index_set::{IndexSet, MultiIndex};

/// Returns `(phi_j(t), phi_j'(t), phi_j''(t))`.
pub fn hermite_phi_triple(j: u32, t: f64) -> (f64, f64, f64) {
    let table = phi_table(j, t);
    let j = j as usize;
    let d1 = if j >= 1 {
        -2.0 * j as f64 * table[j - 1]
    } else {
        0.0
    };
    let d2 = if j >= 2 {
        4.0 * (j * (j - 1)) as f64 * table[j - 2]
    } else {
        0.0
    };
    (table[j], d1, d2)
}

/// `phi_0(t) ..= phi_max(t)` by the three-term recurrence
/// `phi_{j+1} = -2t phi_j - 2j phi_{j-1}`.
pub fn phi_table(max_degree: u32, t: f64) -> Vec<f64> {
    let mut table = vec![0.0; max_degree as usize + 1];
    fill_phi(&mut table, t);
    table
}

fn fill_phi(table: &mut [f64], t: f64) {
    table[0] = 1.0;
    if table.len() > 1 {
        table[1] = -2.0 * t;
    }
    for j in 1..table.len().saturating_sub(1) {
        table[j + 1] = -2.0 * t * table[j] - 2.0 * j as f64 * table[j - 1];
    }
}

/// How the prefactor `N_m` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `sqrt(lambda^d / (pi^{d/2} prod 2^{m_i} m_i!))`: orthonormal under the
    /// weight `exp(-lambda^2 |x - a|^2)`.
    #[default]
    Orthonormal,
    /// `sqrt(lambda^d / (pi^d prod (2 m_i)!!))`. Not orthonormal.
    Paper,
}

/// Natural log of the prefactor `N_m`.
pub fn ln_normalization_constant(m: &MultiIndex, scale: f64, mode: Normalization) -> f64 {
    let d = m.dimension() as f64;
    let pi_power = match mode {
        Normalization::Orthonormal => 0.5 * d,
        Normalization::Paper => d,
    };
    // (2n)!! = 2^n n!, so both modes share the factorial term.
    let factorials: f64 = m
        .support()
        .iter()
        .map(|&(_, e)| e as f64 * std::f64::consts::LN_2 + ln_factorial(e as u64))
        .sum();
    0.5 * (d * scale.ln() - pi_power * std::f64::consts::PI.ln() - factorials)
}

pub fn normalization_constant(m: &MultiIndex, scale: f64, mode: Normalization) -> f64 {
    ln_normalization_constant(m, scale, mode).exp()
}

/// Values and Laplacians of every basis function at one point, in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub laplacians: Vec<f64>,
}

/// A Hermite basis over an index set with fixed scale and smoothing factor.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    index_set: IndexSet,
    scale: f64,
    smoothing: f64,
    normalization: Normalization,
    norms: Vec<f64>,
    max_degree: u32,
}

impl BasisSpec {
    pub fn new(
        index_set: IndexSet,
        scale: f64,
        smoothing: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale lambda must be positive and finite, got {scale}"
            )));
        }
        if !(smoothing >= 0.0) || !smoothing.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "smoothing beta must be nonnegative, got {smoothing}"
            )));
        }
        let norms = index_set
            .members()
            .iter()
            .map(|m| normalization_constant(&m.index, scale, normalization))
            .collect();
        let max_degree = index_set.max_degree();
        Ok(Self {
            index_set,
            scale,
            smoothing,
            normalization,
            norms,
            max_degree,
        })
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn dimension(&self) -> usize {
        self.index_set.dimension()
    }

    /// Number of basis functions `M`.
    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Evaluates all basis functions centred at `a` at the point `x`.
    pub fn eval(&self, x: &[f64], a: &[f64]) -> BasisEval {
        let delta: Vec<f64> = x.iter().zip(a).map(|(xi, ai)| xi - ai).collect();
        let mut values = vec![0.0; self.len()];
        let mut laplacians = vec![0.0; self.len()];
        let mut scratch = PhiScratch::new(self);
        scratch.load(self, &delta);
        self.values_from(&scratch, &mut values);
        self.laplacians_from(&scratch, &mut laplacians);
        BasisEval { values, laplacians }
    }

    /// Values only, at offset `delta = x - a`, written into `out`.
    pub fn values_at(&self, delta: &[f64], scratch: &mut PhiScratch, out: &mut [f64]) {
        scratch.load(self, delta);
        self.values_from(scratch, out);
    }

    /// Laplacians only, at offset `delta = x - a`, written into `out`.
    pub fn laplacians_at(&self, delta: &[f64], scratch: &mut PhiScratch, out: &mut [f64]) {
        scratch.load(self, delta);
        self.laplacians_from(scratch, out);
    }

    fn values_from(&self, scratch: &PhiScratch, out: &mut [f64]) {
        for ((member, norm), slot) in self.index_set.members().iter().zip(&self.norms).zip(out) {
            let mut product = *norm;
            for &(j, e) in member.index.support() {
                product *= scratch.phi(j, e);
            }
            *slot = product;
        }
    }

    fn laplacians_from(&self, scratch: &PhiScratch, out: &mut [f64]) {
        let chain = self.scale * self.scale;
        for ((member, norm), slot) in self.index_set.members().iter().zip(&self.norms).zip(out) {
            let support = member.index.support();
            let mut sum = 0.0;
            for (i, &(j, e)) in support.iter().enumerate() {
                if e < 2 {
                    continue;
                }
                let mut term = 4.0 * (e * (e - 1)) as f64 * scratch.phi(j, e - 2);
                for (l, &(jl, el)) in support.iter().enumerate() {
                    if l != i {
                        term *= scratch.phi(jl, el);
                    }
                }
                sum += term;
            }
            *slot = norm * chain * sum;
        }
    }
}

/// Per-coordinate tables of `phi_0..=phi_max` reused across evaluations.
#[derive(Debug, Clone)]
pub struct PhiScratch {
    stride: usize,
    table: Vec<f64>,
}

impl PhiScratch {
    pub fn new(spec: &BasisSpec) -> Self {
        let stride = spec.max_degree as usize + 1;
        Self {
            stride,
            table: vec![0.0; stride * spec.dimension()],
        }
    }

    fn load(&mut self, spec: &BasisSpec, delta: &[f64]) {
        debug_assert_eq!(delta.len(), spec.dimension());
        for (j, &dj) in delta.iter().enumerate() {
            let row = &mut self.table[j * self.stride..(j + 1) * self.stride];
            fill_phi(row, spec.scale * dj);
        }
    }

    #[inline]
    fn phi(&self, coord: usize, degree: u32) -> f64 {
        self.table[coord * self.stride + degree as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, k: u64, scale: f64) -> BasisSpec {
        BasisSpec::new(
            IndexSet::enumerate(d, 1.0, k).unwrap(),
            scale,
            0.0,
            Normalization::Orthonormal,
        )
        .unwrap()
    }

    #[test]
    fn phi_triples() {
        assert_eq!(hermite_phi_triple(0, 3.7), (1.0, 0.0, 0.0));
        assert_eq!(hermite_phi_triple(2, 1.0), (2.0, 8.0, 8.0));
        assert_eq!(hermite_phi_triple(3, 0.0), (0.0, 12.0, 0.0));
    }

    #[test]
    fn normalization_examples() {
        let zero = MultiIndex::zero(1);
        let orth = normalization_constant(&zero, 1.0, Normalization::Orthonormal);
        assert!((orth - 0.7511255444649425).abs() < 1e-14);
        let paper = normalization_constant(&zero, 1.0, Normalization::Paper);
        assert!((paper - 0.5641895835477563).abs() < 1e-14);
        let two = MultiIndex::from_dense(&[2]).unwrap();
        let orth = normalization_constant(&two, 2.0, Normalization::Orthonormal);
        assert!((orth - 0.37556277223247125).abs() < 1e-14);
    }

    #[test]
    fn constant_member_has_zero_laplacian() {
        let s = spec(3, 4, 1.3);
        let e = s.eval(&[0.1, -0.2, 0.3], &[0.0, 0.5, 0.0]);
        let n0 = normalization_constant(&MultiIndex::zero(3), 1.3, Normalization::Orthonormal);
        assert!((e.values[0] - n0).abs() < 1e-15);
        assert_eq!(e.laplacians[0], 0.0);
    }

    #[test]
    fn second_degree_at_origin() {
        let s = spec(1, 4, 1.0);
        // members: 0, 1, 2
        let e = s.eval(&[0.0], &[0.0]);
        let n2 = s.norms()[2];
        assert!((e.values[2] + 2.0 * n2).abs() < 1e-15);
        assert!((e.laplacians[2] - 8.0 * n2).abs() < 1e-14);
    }

    #[test]
    fn mixed_first_degree_pair() {
        let s = spec(2, 5, 1.0);
        let pos = s
            .index_set()
            .members()
            .iter()
            .position(|m| m.index.to_dense() == vec![1, 1])
            .unwrap();
        let e = s.eval(&[1.0, 1.0], &[0.0, 0.0]);
        let n = s.norms()[pos];
        assert!((e.values[pos] - 4.0 * n).abs() < 1e-14);
        assert_eq!(e.laplacians[pos], 0.0);
    }

    #[test]
    fn rejects_bad_scale() {
        let set = IndexSet::enumerate(1, 1.0, 3).unwrap();
        assert!(BasisSpec::new(set.clone(), 0.0, 0.0, Normalization::Paper).is_err());
        assert!(BasisSpec::new(set, 1.0, -1.0, Normalization::Paper).is_err());
    }
}
