//! Computational domains and seeded scattered node sets.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const BOUNDARY_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidArgument("ball needs at least one dimension".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn unit_ball(dimension: usize) -> Result<Self> {
        Self::ball(vec![0.0; dimension], 1.0)
    }

    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidArgument("box corners must share a positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidArgument("box needs lo < hi in every coordinate".into()));
        }
        Ok(Domain::Box { lo, hi })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dimension: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::cuboid(vec![lo; dimension], vec![hi; dimension])
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => {
                let d = self.dimension() as f64;
                (0.5 * d * std::f64::consts::PI.ln() + d * radius.ln() - ln_gamma(0.5 * d + 1.0))
                    .exp()
            }
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
        }
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { center, radius } => distance(x, center) < *radius,
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(xi, (l, h))| xi > l && xi < h),
        }
    }

    /// Whether `x` satisfies the boundary equation to within `tol`.
    pub fn on_boundary(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Domain::Ball { center, radius } => (distance(x, center) - radius).abs() <= tol,
            Domain::Box { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(xi, (l, h))| *xi >= l - tol && *xi <= h + tol);
                let at_face = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .any(|(xi, (l, h))| (xi - l).abs() <= tol || (xi - h).abs() <= tol);
                inside && at_face
            }
        }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn gaussian_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn draw_interior(domain: &Domain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = match domain {
            Domain::Ball { center, radius } => {
                let d = center.len();
                let dir = gaussian_direction(rng, d);
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                center.iter().zip(dir).map(|(c, u)| c + r * u).collect()
            }
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
        };
        // Rounding can land a draw on the boundary; redraw.
        if domain.contains_strictly(&x) {
            return x;
        }
    }
}

fn draw_boundary(domain: &Domain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match domain {
        Domain::Ball { center, radius } => {
            let dir = gaussian_direction(rng, center.len());
            center.iter().zip(dir).map(|(c, u)| c + radius * u).collect()
        }
        Domain::Box { lo, hi } => {
            let widths: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
            let total: f64 = widths.iter().product();
            // Both faces normal to axis j have measure total / width_j.
            let face_weights: Vec<f64> = widths.iter().map(|w| total / w).collect();
            let sum: f64 = face_weights.iter().sum();
            let mut pick = rng.random::<f64>() * sum;
            let mut axis = face_weights.len() - 1;
            for (j, w) in face_weights.iter().enumerate() {
                if pick < *w {
                    axis = j;
                    break;
                }
                pick -= w;
            }
            let upper = rng.random::<bool>();
            lo.iter()
                .zip(hi)
                .enumerate()
                .map(|(j, (l, h))| {
                    if j == axis {
                        if upper {
                            *h
                        } else {
                            *l
                        }
                    } else {
                        l + (h - l) * rng.random::<f64>()
                    }
                })
                .collect()
        }
    }
}

fn sample_distinct(
    count: usize,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<Vec<u64>>,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let x = draw(rng);
        if seen.insert(x.iter().map(|v| v.to_bits()).collect()) {
            points.push(x);
        }
    }
    points
}

/// `count` i.i.d. uniform points strictly inside the domain.
pub fn sample_interior(domain: &Domain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_distinct(count, &mut rng, &mut HashSet::new(), |r| draw_interior(domain, r))
}

/// `count` i.i.d. points uniform on the boundary (by surface measure).
/// In one dimension the boundary has only two points.
pub fn sample_boundary(domain: &Domain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if domain.dimension() == 1 && count > 2 {
        return Err(Error::InvalidArgument(format!(
            "a 1-D domain has 2 boundary points, {count} requested"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOUNDARY_STREAM);
    Ok(sample_distinct(count, &mut rng, &mut HashSet::new(), |r| draw_boundary(domain, r)))
}

/// Default boundary node count `max(2d, ceil(0.3 N))`, or 2 in one
/// dimension where that is the whole boundary.
pub fn default_boundary_count(dimension: usize, interior: usize) -> usize {
    if dimension == 1 {
        return 2;
    }
    (2 * dimension).max((0.3 * interior as f64).ceil() as usize)
}

/// Interior and boundary nodes in one fixed order: interior first, then
/// boundary. Coordinates are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    dimension: usize,
    interior: usize,
    coords: Vec<f64>,
    seed: u64,
}

impl NodeSet {
    pub fn generate(domain: &Domain, interior: usize, boundary: usize, seed: u64) -> Result<Self> {
        if interior == 0 {
            return Err(Error::InvalidArgument("need at least one interior node".into()));
        }
        let inner = sample_interior(domain, interior, seed);
        let outer = sample_boundary(domain, boundary, seed)?;
        Self::from_points(domain.dimension(), inner, outer, seed)
    }

    pub fn from_points(
        dimension: usize,
        interior: Vec<Vec<f64>>,
        boundary: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        if interior.iter().chain(&boundary).any(|p| p.len() != dimension) {
            return Err(Error::InvalidArgument("node dimension mismatch".into()));
        }
        let n = interior.len();
        let coords = interior.into_iter().chain(boundary).flatten().collect();
        Ok(Self {
            dimension,
            interior: n,
            coords,
            seed,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn interior_len(&self) -> usize {
        self.interior
    }

    pub fn boundary_len(&self) -> usize {
        self.len() - self.interior
    }

    /// Total node count `N'`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Node `i` in the global order.
    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i >= self.interior
    }

    pub fn interior(&self) -> impl Iterator<Item = &[f64]> {
        self.coords[..self.interior * self.dimension].chunks_exact(self.dimension)
    }

    pub fn boundary(&self) -> impl Iterator<Item = &[f64]> {
        self.coords[self.interior * self.dimension..].chunks_exact(self.dimension)
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dimension)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        assert!((Domain::unit_ball(2).unwrap().measure() - std::f64::consts::PI).abs() < 1e-14);
        let v30 = Domain::unit_ball(30).unwrap().measure();
        assert!((v30 - 2.1915353447830204e-05).abs() < 1e-17);
        assert_eq!(Domain::cube(20, -1.0, 1.0).unwrap().measure(), 1048576.0);
    }

    #[test]
    fn ball_interior_moment() {
        let pts = sample_interior(&Domain::unit_ball(2).unwrap(), 1000, 7);
        assert!(pts.iter().all(|p| p[0] * p[0] + p[1] * p[1] < 1.0));
        let mean_r2 = pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / 1000.0;
        assert!((mean_r2 - 0.5).abs() < 0.03, "mean r^2 {mean_r2}");
    }

    #[test]
    fn box_interior_mean() {
        let pts = sample_interior(&Domain::cube(2, -1.0, 1.0).unwrap(), 1000, 7);
        for j in 0..2 {
            let mean = pts.iter().map(|p| p[j]).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 0.05);
        }
    }

    #[test]
    fn single_point_is_reproducible() {
        let dom = Domain::cube(3, 0.0, 2.0).unwrap();
        assert_eq!(sample_interior(&dom, 1, 11), sample_interior(&dom, 1, 11));
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let pts = sample_boundary(&Domain::unit_ball(3).unwrap(), 500, 3).unwrap();
        assert!(pts.iter().all(|p| (distance(p, &[0.0; 3]) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn box_edges_share_boundary_nodes() {
        let pts = sample_boundary(&Domain::cube(2, 0.0, 1.0).unwrap(), 400, 5).unwrap();
        let counts = [
            pts.iter().filter(|p| p[0] == 0.0).count(),
            pts.iter().filter(|p| p[0] == 1.0).count(),
            pts.iter().filter(|p| p[1] == 0.0).count(),
            pts.iter().filter(|p| p[1] == 1.0).count(),
        ];
        assert_eq!(counts.iter().sum::<usize>(), 400);
        for c in counts {
            assert!((60..=140).contains(&c), "edge count {c}");
        }
    }

    #[test]
    fn high_dimensional_sphere_is_centred() {
        let pts = sample_boundary(&Domain::unit_ball(30).unwrap(), 1000, 9).unwrap();
        let mean = pts.iter().map(|p| p[0]).sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.03);
    }

    #[test]
    fn default_boundary_counts() {
        assert_eq!(default_boundary_count(30, 10), 60);
        assert_eq!(default_boundary_count(2, 400), 120);
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::ball(vec![0.0], 0.0).is_err());
        assert!(Domain::cuboid(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Domain::cuboid(vec![], vec![]).is_err());
    }
}
