//! Subtractive clustering.
//!
//! Points are rescaled into the unit hypercube, each point receives a
//! Gaussian density potential, and centers are picked greedily from the
//! highest remaining potential. After every acceptance the new center's
//! influence is subtracted from all potentials with a kernel widened by the
//! quash factor. Candidates are accepted outright above `accept_ratio` of the
//! first center's potential, end the search below `reject_ratio`, and in
//! between must be far enough from the existing centers relative to their
//! potential. Finally every point joins its nearest center.

mod potential;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use potential::{
    initial_potentials, select_centers, select_centers_from, subtract_center, PotentialState,
};

/// Coordinates of one point.
pub type DataPoint = Vec<f64>;

/// A non-empty set of finite points sharing one dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let dim = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    point: i,
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(dim, values)
    }

    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                point: values.len() / dim,
                expected: dim,
                found: values.len() % dim,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                dim: pos % dim,
            });
        }
        Ok(Self { dim, values })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<DataPoint> {
        self.points().map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Per-dimension `(min, max)` in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    pub bounds: Vec<(f64, f64)>,
}

impl NormalizationMap {
    pub fn fit(dataset: &Dataset) -> Self {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dataset.dim()];
        for p in dataset.points() {
            for (b, &v) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Self { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Maps a point into the unit hypercube. Constant dimensions map to 0.
    pub fn apply(&self, point: &[f64]) -> DataPoint {
        point
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn invert(&self, point: &[f64]) -> DataPoint {
        point
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { lo + v * (hi - lo) } else { lo })
            .collect()
    }
}

/// Rescales every dimension so its minimum lands on 0 and its maximum on 1.
pub fn normalize(dataset: &Dataset) -> (Dataset, NormalizationMap) {
    let map = NormalizationMap::fit(dataset);
    let values = dataset.points().flat_map(|p| map.apply(p)).collect();
    (
        Dataset {
            dim: dataset.dim(),
            values,
        },
        map,
    )
}

pub fn denormalize_centers(centers: &[DataPoint], map: &NormalizationMap) -> Result<Vec<DataPoint>> {
    centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.len() != map.dim() {
                Err(Error::DimensionMismatch {
                    point: i,
                    expected: map.dim(),
                    found: c.len(),
                })
            } else {
                Ok(map.invert(c))
            }
        })
        .collect()
}

/// The four knobs of subtractive clustering plus a center-count safeguard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    /// Kernel width of the density potential, in normalized units.
    pub cluster_radius: f64,
    /// Widening factor of the subtraction kernel.
    pub quash_factor: f64,
    /// Fraction of the first center's potential above which a candidate is accepted.
    pub accept_ratio: f64,
    /// Fraction of the first center's potential below which the search stops.
    pub reject_ratio: f64,
    /// Upper bound on the number of centers; `None` means the point count.
    pub max_centers: Option<usize>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            cluster_radius: 0.5,
            quash_factor: 1.25,
            accept_ratio: 0.5,
            reject_ratio: 0.15,
            max_centers: None,
        }
    }
}

impl ClusterParams {
    pub fn with_radius(cluster_radius: f64) -> Self {
        Self {
            cluster_radius,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.cluster_radius.is_finite() && self.cluster_radius > 0.0) {
            return bad("cluster radius must be positive");
        }
        if !(self.quash_factor.is_finite() && self.quash_factor > 0.0) {
            return bad("quash factor must be positive");
        }
        if !(self.accept_ratio > 0.0 && self.accept_ratio < 1.0) {
            return bad("accept ratio must lie in (0, 1)");
        }
        if !(self.reject_ratio > 0.0 && self.reject_ratio < 1.0) {
            return bad("reject ratio must lie in (0, 1)");
        }
        if self.reject_ratio >= self.accept_ratio {
            return bad("reject ratio must be below accept ratio");
        }
        if self.max_centers == Some(0) {
            return bad("max centers must be positive");
        }
        Ok(())
    }
}

/// Index of the nearest center for every point; ties go to the lowest center index.
pub fn assign(normalized: &Dataset, centers: &[DataPoint]) -> Result<Vec<usize>> {
    if centers.is_empty() {
        return Err(Error::NoCenters);
    }
    if let Some(i) = centers.iter().position(|c| c.len() != normalized.dim()) {
        return Err(Error::DimensionMismatch {
            point: i,
            expected: normalized.dim(),
            found: centers[i].len(),
        });
    }
    Ok((0..normalized.len())
        .into_par_iter()
        .map(|i| {
            let p = normalized.point(i);
            let mut best = 0;
            let mut best_d = squared_distance(p, &centers[0]);
            for (k, c) in centers.iter().enumerate().skip(1) {
                let d = squared_distance(p, c);
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            best
        })
        .collect())
}

/// Result of clustering one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub params: ClusterParams,
    pub normalization: NormalizationMap,
    /// Dataset row of each center, in acceptance order.
    pub center_indices: Vec<usize>,
    /// Centers in normalized coordinates.
    pub centers: Vec<DataPoint>,
    /// Centers in original units.
    pub centers_original: Vec<DataPoint>,
    /// Cluster index of every point.
    pub assignment: Vec<usize>,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &k in &self.assignment {
            sizes[k] += 1;
        }
        sizes
    }

    /// Point indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_clusters()];
        for (i, &k) in self.assignment.iter().enumerate() {
            members[k].push(i);
        }
        members
    }
}

/// Normalizes, selects centers, and assigns every point.
pub fn fit(dataset: &Dataset, params: &ClusterParams) -> Result<ClusterModel> {
    params.validate()?;
    let (normalized, normalization) = normalize(dataset);
    let center_indices = select_centers(&normalized, params)?;
    let centers: Vec<DataPoint> = center_indices
        .iter()
        .map(|&i| normalized.point(i).to_vec())
        .collect();
    let assignment = assign(&normalized, &centers)?;
    let centers_original = denormalize_centers(&centers, &normalization)?;
    Ok(ClusterModel {
        params: *params,
        normalization,
        center_indices,
        centers,
        centers_original,
        assignment,
    })
}
