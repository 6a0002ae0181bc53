//! HDMR-structured Hermite index sets.
//!
//! The truncated set keeps every multi-index `m` in `N_0^d` whose order number
//! `k_m = prod_j (m_j + c)` is strictly below the truncation order `K`. Members
//! are enumerated support subset by support subset, so the work is
//! proportional to the size of the set and never to the full `K^d` lattice.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of enumerated members.
pub const DEFAULT_MEMBER_LIMIT: usize = 10_000_000;

/// A sparse multi-index. Coordinates are zero-based and strictly increasing,
/// exponents in the support are at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    dimension: usize,
    support: Vec<(usize, u32)>,
}

impl MultiIndex {
    /// The all-zero index in `dimension` coordinates.
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            support: Vec::new(),
        }
    }

    /// Builds an index from its sparse support.
    pub fn from_support(dimension: usize, support: Vec<(usize, u32)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        for (i, &(coord, exp)) in support.iter().enumerate() {
            if coord >= dimension {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {coord} out of range for dimension {dimension}"
                )));
            }
            if exp == 0 {
                return Err(Error::InvalidArgument(format!(
                    "zero exponent stored in support at coordinate {coord}"
                )));
            }
            if i > 0 && support[i - 1].0 >= coord {
                return Err(Error::InvalidArgument(
                    "support coordinates must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { dimension, support })
    }

    /// Builds an index from a dense exponent vector.
    pub fn from_dense(exponents: &[u32]) -> Result<Self> {
        let support = exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| (j, e))
            .collect();
        Self::from_support(exponents.len(), support)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support(&self) -> &[(usize, u32)] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    /// Exponent of coordinate `j` (zero when outside the support).
    pub fn exponent(&self, j: usize) -> u32 {
        self.support
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|i| self.support[i].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut dense = vec![0; self.dimension];
        for &(j, e) in &self.support {
            dense[j] = e;
        }
        dense
    }

    /// Largest exponent in the support, zero for the zero index.
    pub fn max_exponent(&self) -> u32 {
        self.support.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (j, e)) in self.support.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}:{e}")?;
        }
        write!(f, "}}")
    }
}

/// Order number `prod_j (m_j + c)` of a multi-index.
///
/// The support factors are multiplied in ascending order so that indices
/// sharing the same multiset of exponents get bitwise-equal order numbers.
pub fn order_number(m: &MultiIndex, c: f64) -> f64 {
    let mut factors: Vec<f64> = m.support.iter().map(|&(_, e)| e as f64 + c).collect();
    factors.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let zeros = (m.dimension - m.support.len()) as i32;
    factors.iter().product::<f64>() * c.powi(zeros)
}

/// Smallest `u >= 0` with `(1 + c)^(u + 1) > K`. Every member of the
/// truncated set has at most `u` active coordinates.
pub fn max_hdmr_order(truncation: u64, c: f64) -> usize {
    let base = 1.0 + c;
    let k = truncation as f64;
    let mut u = 0usize;
    let mut power = base;
    while power <= k {
        u += 1;
        power *= base;
    }
    u
}

/// Upper bound `K (1 + ln K)^(d-1)` on the size of the truncated set.
pub fn cardinality_bound(truncation: u64, dimension: usize) -> f64 {
    let k = truncation as f64;
    k * (1.0 + k.ln()).powi(dimension as i32 - 1)
}

/// One member of an [`IndexSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub index: MultiIndex,
    pub order: f64,
}

/// The truncated Hermite index set `{ m : prod_j (m_j + c) < K }` in a fixed,
/// deterministic order: order number, then support size, then support.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    dimension: usize,
    truncation: u64,
    shift: f64,
    members: Vec<Member>,
    max_support: usize,
}

impl IndexSet {
    /// Enumerates the set with the default member limit.
    pub fn enumerate(dimension: usize, shift: f64, truncation: u64) -> Result<Self> {
        Self::enumerate_with_limit(dimension, shift, truncation, DEFAULT_MEMBER_LIMIT)
    }

    pub fn enumerate_with_limit(
        dimension: usize,
        shift: f64,
        truncation: u64,
        limit: usize,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation order must be positive".into()));
        }
        if !(shift >= 1.0) || !shift.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "shift c must be a finite real >= 1, got {shift}"
            )));
        }

        let mut members = Vec::new();
        let root = MultiIndex::zero(dimension);
        let root_order = order_number(&root, shift);
        if root_order < truncation as f64 {
            members.push(Member {
                index: root.clone(),
                order: root_order,
            });
            let mut support = Vec::new();
            extend(
                dimension,
                shift,
                truncation as f64,
                0,
                &mut support,
                &mut members,
                limit,
            )?;
        }

        members.sort_by(compare_members);
        let max_support = members
            .iter()
            .map(|m| m.index.support_size())
            .max()
            .unwrap_or(0);
        Ok(Self {
            dimension,
            truncation,
            shift,
            members,
            max_support,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_support(&self) -> usize {
        self.max_support
    }

    /// Largest single-coordinate exponent over all members.
    pub fn max_degree(&self) -> u32 {
        self.members
            .iter()
            .map(|m| m.index.max_exponent())
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, m: &MultiIndex) -> bool {
        self.members.iter().any(|member| &member.index == m)
    }
}

fn compare_members(a: &Member, b: &Member) -> Ordering {
    a.order
        .partial_cmp(&b.order)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.index.support_size().cmp(&b.index.support_size()))
        .then_with(|| a.index.support.cmp(&b.index.support))
}

// Depth-first over coordinates after `start`. Adding exponent 1 at any free
// coordinate yields the same order number, so a failure there ends the scan.
fn extend(
    dimension: usize,
    shift: f64,
    truncation: f64,
    start: usize,
    support: &mut Vec<(usize, u32)>,
    members: &mut Vec<Member>,
    limit: usize,
) -> Result<()> {
    for coord in start..dimension {
        let mut exp = 1u32;
        loop {
            support.push((coord, exp));
            let candidate = MultiIndex {
                dimension,
                support: support.clone(),
            };
            let order = order_number(&candidate, shift);
            if order >= truncation {
                support.pop();
                break;
            }
            if members.len() >= limit {
                return Err(Error::Capacity { limit });
            }
            members.push(Member {
                index: candidate,
                order,
            });
            extend(dimension, shift, truncation, coord + 1, support, members, limit)?;
            support.pop();
            exp += 1;
        }
        if exp == 1 {
            break;
        }
    }
    Ok(())
}
