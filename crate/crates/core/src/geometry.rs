//! Axis-aligned boxes and the uniform grids the box-shrinking solvers draw
//! over them.
//!
//! Everything here is immutable after construction and freely shareable
//! across threads. Grid points are generated lazily by index because the
//! full point count grows as `(n+1)^d`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

/// Slack added before taking the floor of `edge / step`, so an axis whose
/// exact ratio is integral never loses its endpoint to rounding. The longest
/// axis must land exactly `n + 1` points.
const FLOOR_GUARD: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("bounds need at least one dimension")]
    Empty,
    #[error("lower bound {lower} exceeds upper bound {upper} at coordinate {index}")]
    Inverted {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("bound at coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box has no extent; every edge has zero width")]
    DegenerateBox,
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
}

/// An axis-aligned hyperrectangle `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
///
/// Both bound vectors are stored explicitly so the per-coordinate clip
/// updates of the shrinking solvers map directly onto the representation.
/// Zero-width edges are permitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

// Deserialization funnels through `Bounds::new` so malformed configs cannot
// smuggle in inverted or non-finite bounds.
impl<'de> Deserialize<'de> for Bounds {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            lower: Vec<f64>,
            upper: Vec<f64>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Bounds::new(repr.lower, repr.upper).map_err(D::Error::custom)
    }
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        if lower.is_empty() {
            return Err(GeometryError::Empty);
        }
        if lower.len() != upper.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(GeometryError::NonFinite { index: i });
            }
            if lo > hi {
                return Err(GeometryError::Inverted {
                    index: i,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The hypercube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, GeometryError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Width of edge `i`.
    pub fn edge(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Length of the longest edge; 0 for a point box.
    pub fn max_edge(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    /// Index of the longest edge (smallest index on ties).
    pub fn max_edge_axis(&self) -> usize {
        let mut best = 0;
        let mut best_len = self.edge(0);
        for i in 1..self.dim() {
            if self.edge(i) > best_len {
                best = i;
                best_len = self.edge(i);
            }
        }
        best
    }

    /// Componentwise midpoint.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Euclidean norm of `upper - lower`.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise containment check with absolute tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| xi >= lo - tol && xi <= hi + tol)
    }

    /// True when `self` lies inside `other` (shared faces allowed, tiny
    /// float slack on each side).
    pub fn is_subset_of(&self, other: &Bounds, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .lower
                .iter()
                .zip(&other.lower)
                .all(|(a, b)| *a >= *b - tol)
            && self
                .upper
                .iter()
                .zip(&other.upper)
                .all(|(a, b)| *a <= *b + tol)
    }
}

/// Returns `(max(lo, center - half_width), min(hi, center + half_width))`:
/// the interval of half-width `half_width` around `center`, clipped to
/// `[lo, hi]`. The result is a sub-interval of `[lo, hi]` containing the
/// clamped center.
pub fn shrink_edge(lo: f64, hi: f64, center: f64, half_width: f64) -> (f64, f64) {
    (lo.max(center - half_width), hi.min(center + half_width))
}

/// A uniform grid over a box: points `base + i * step` for index vectors
/// `i` with `0 <= i_j <= counts_j`.
///
/// The point list is never materialized; use [`GridSpec::point`] or
/// [`GridSpec::indices`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    base: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
}

impl GridSpec {
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Total number of grid points, `prod_j (counts_j + 1)`, or `None` on
    /// u64 overflow.
    pub fn num_points(&self) -> Option<u64> {
        self.counts
            .iter()
            .try_fold(1u64, |acc, &c| acc.checked_mul(c as u64 + 1))
    }

    /// The grid point at a given index vector.
    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        debug_assert_eq!(index.len(), self.dim());
        self.base
            .iter()
            .zip(index)
            .map(|(b, &i)| b + i as f64 * self.step)
            .collect()
    }

    /// Iterates index vectors in lexicographic order (last axis fastest).
    pub fn indices(&self) -> GridIndexIter<'_> {
        GridIndexIter {
            counts: &self.counts,
            next: Some(vec![0; self.counts.len()]),
        }
    }
}

/// Odometer over grid index vectors in lexicographic order.
pub struct GridIndexIter<'a> {
    counts: &'a [usize],
    next: Option<Vec<usize>>,
}

impl Iterator for GridIndexIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut bumped = current.clone();
        for axis in (0..bumped.len()).rev() {
            if bumped[axis] < self.counts[axis] {
                bumped[axis] += 1;
                self.next = Some(bumped);
                return Some(current);
            }
            bumped[axis] = 0;
        }
        // every axis rolled over: `current` was the last index
        Some(current)
    }
}

/// Builds the uniform grid with step `max_edge(bounds) / n` whose per-axis
/// counts are `floor(edge_j / step)`. The longest axis always carries
/// exactly `n + 1` points; shorter axes carry proportionally fewer, so the
/// cells are cubes regardless of the box aspect ratio.
pub fn build_grid(bounds: &Bounds, n: usize) -> Result<GridSpec, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroResolution);
    }
    let max_edge = bounds.max_edge();
    if max_edge == 0.0 {
        return Err(GeometryError::DegenerateBox);
    }
    let step = max_edge / n as f64;
    let counts = (0..bounds.dim())
        .map(|j| (bounds.edge(j) / step + FLOOR_GUARD).floor() as usize)
        .collect();
    Ok(GridSpec {
        base: bounds.lower().to_vec(),
        step,
        counts,
    })
}
