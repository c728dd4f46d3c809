//! Square 2D unit layouts, distance matrices, and receptive-field masks.
//!
//! Every spatial construct in the crate is derived from a [`GridLayout`]:
//! the pooling matrix used by spatial querying, the local mask constraining
//! the output reweighting matrix, and the pairwise distances consumed by the
//! topography statistics. Grids are bounded (no toroidal wraparound), so
//! receptive fields at the edges are truncated.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// The requested dimensionality has no integer square root.
    NonSquareDimension(usize),
    /// A receptive-field fraction outside (0, 1].
    FractionOutOfRange(f64),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::NonSquareDimension(d) => {
                write!(f, "dimension {d} is not a perfect square")
            }
            GridError::FractionOutOfRange(r) => {
                write!(f, "receptive-field fraction {r} outside (0, 1]")
            }
        }
    }
}

impl std::error::Error for GridError {}

/// Row-major square lattice of `d = side * side` units.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    side: usize,
    coords: Vec<(usize, usize)>,
}

impl GridLayout {
    pub fn new(d: usize) -> Result<Self, GridError> {
        if d == 0 {
            return Err(GridError::NonSquareDimension(d));
        }
        let side = (d as f64).sqrt().round() as usize;
        if side * side != d {
            return Err(GridError::NonSquareDimension(d));
        }
        let coords = (0..d).map(|i| (i / side, i % side)).collect();
        Ok(Self { side, coords })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    /// Euclidean distance between units `i` and `j` in lattice steps.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (ri, ci) = self.coords[i];
        let (rj, cj) = self.coords[j];
        let dr = ri as f64 - rj as f64;
        let dc = ci as f64 - cj as f64;
        (dr * dr + dc * dc).sqrt()
    }

    /// Dense d×d Euclidean distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let d = self.len();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.distance(i, j);
            }
        }
        out
    }

    /// Index of the unit at (side/2, side/2); the radius reference point.
    pub fn central_unit(&self) -> usize {
        (self.side / 2) * self.side + self.side / 2
    }
}

/// Set of units within `radius` of a center unit.
#[derive(Debug, Clone)]
pub struct ReceptiveField {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
}

pub fn receptive_field(grid: &GridLayout, center: usize, radius: f64) -> ReceptiveField {
    let members = (0..grid.len())
        .filter(|&j| grid.distance(center, j) <= radius)
        .collect();
    ReceptiveField {
        center,
        radius,
        members,
    }
}

/// Smallest radius whose receptive field at the central unit contains at
/// least `round(r * d)` units. Ties at the radius are included.
pub fn radius_for_fraction(grid: &GridLayout, r: f64) -> Result<f64, GridError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(GridError::FractionOutOfRange(r));
    }
    let d = grid.len();
    let target = ((r * d as f64).round() as usize).max(1);
    if target >= d {
        // full fraction: use the grid diameter so every unit's field covers
        // the whole grid, not just the central unit's
        let s = grid.side() as f64 - 1.0;
        return Ok((2.0 * s * s).sqrt());
    }
    let center = grid.central_unit();
    let mut dists: Vec<f64> = (0..d).map(|j| grid.distance(center, j)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(dists[target.min(d) - 1])
}

/// Binary d×d receptive-field matrix: entry (q, k) is 1 iff units q and k are
/// within the fraction-`r` radius of each other. Stored as 0.0/1.0 so it can
/// be fed directly into the attention graph.
#[derive(Debug, Clone)]
pub struct PoolingMatrix {
    pub fraction: f64,
    pub radius: f64,
    pub mask: Vec<f64>,
    pub d: usize,
}

pub fn pooling_matrix(grid: &GridLayout, r_sq: f64) -> Result<PoolingMatrix, GridError> {
    let radius = radius_for_fraction(grid, r_sq)?;
    let d = grid.len();
    let mut mask = vec![0.0; d * d];
    for q in 0..d {
        for k in 0..d {
            if grid.distance(q, k) <= radius {
                mask[q * d + k] = 1.0;
            }
        }
    }
    Ok(PoolingMatrix {
        fraction: r_sq,
        radius,
        mask,
        d,
    })
}

/// Same construction as [`pooling_matrix`] but parameterized by the
/// reweighting fraction; constrains output-projection connectivity.
pub fn local_mask(grid: &GridLayout, r_sr: f64) -> Result<Vec<f64>, GridError> {
    Ok(pooling_matrix(grid, r_sr)?.mask)
}
