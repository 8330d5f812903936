use rayon::prelude::*;

use super::{squared_distance, ClusterParams, Dataset};
use crate::error::{Error, Result};

/// Current potential of every point during center selection.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    pub potentials: Vec<f64>,
    /// Number of subtractions applied so far.
    pub iteration: usize,
    /// Potential of the first accepted center, set by the first subtraction.
    pub first_center_potential: Option<f64>,
}

impl PotentialState {
    /// Highest potential, lowest index on ties.
    fn argmax(&self) -> (usize, f64) {
        let mut best = (0, self.potentials[0]);
        for (i, &p) in self.potentials.iter().enumerate().skip(1) {
            if p > best.1 {
                best = (i, p);
            }
        }
        best
    }
}

/// Gaussian density potential of every point against all points, itself included.
pub fn initial_potentials(normalized: &Dataset, params: &ClusterParams) -> PotentialState {
    let denom = (params.cluster_radius / 2.0).powi(2);
    let potentials = (0..normalized.len())
        .into_par_iter()
        .map(|i| {
            let xi = normalized.point(i);
            normalized
                .points()
                .map(|xj| (-squared_distance(xi, xj) / denom).exp())
                .sum()
        })
        .collect();
    PotentialState {
        potentials,
        iteration: 0,
        first_center_potential: None,
    }
}

/// Removes the influence of the point at `center_index`, whose current
/// potential is taken as the accepted center's potential.
pub fn subtract_center(
    state: &mut PotentialState,
    center_index: usize,
    normalized: &Dataset,
    params: &ClusterParams,
) -> Result<()> {
    let len = state.potentials.len();
    if center_index >= len || len != normalized.len() {
        return Err(Error::IndexOutOfRange {
            index: center_index,
            len,
        });
    }
    let center = normalized.point(center_index);
    let center_potential = state.potentials[center_index];
    let denom = (params.cluster_radius * params.quash_factor / 2.0).powi(2);
    state
        .potentials
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, p)| {
            let d2 = squared_distance(normalized.point(i), center);
            *p -= center_potential * (-d2 / denom).exp();
        });
    state.potentials[center_index] = 0.0;
    state.first_center_potential.get_or_insert(center_potential);
    state.iteration += 1;
    Ok(())
}

/// Runs center selection from freshly computed potentials. Returns the
/// dataset rows of the accepted centers in acceptance order.
pub fn select_centers(normalized: &Dataset, params: &ClusterParams) -> Result<Vec<usize>> {
    params.validate()?;
    let state = initial_potentials(normalized, params);
    select_centers_from(normalized, state, params)
}

/// Runs center selection from a given potential state.
///
/// The highest-potential point always becomes the first center. Each later
/// candidate is accepted if its potential exceeds `accept_ratio` times the
/// first center's, ends the search if below `reject_ratio` times it, and
/// otherwise is accepted only when `d_min / r_a + P / P_first >= 1`. A failed
/// candidate has its potential zeroed and the next-highest point is tried.
pub fn select_centers_from(
    normalized: &Dataset,
    mut state: PotentialState,
    params: &ClusterParams,
) -> Result<Vec<usize>> {
    params.validate()?;
    let max_centers = params.max_centers.unwrap_or(normalized.len());

    let (first, first_potential) = state.argmax();
    let mut centers = vec![first];
    subtract_center(&mut state, first, normalized, params)?;

    'outer: while centers.len() < max_centers {
        loop {
            let (candidate, potential) = state.argmax();
            if potential <= 0.0 {
                break 'outer;
            }
            if potential > params.accept_ratio * first_potential {
                centers.push(candidate);
                subtract_center(&mut state, candidate, normalized, params)?;
                break;
            }
            if potential < params.reject_ratio * first_potential {
                break 'outer;
            }
            let x = normalized.point(candidate);
            let d_min = centers
                .iter()
                .map(|&c| squared_distance(x, normalized.point(c)))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            if d_min / params.cluster_radius + potential / first_potential >= 1.0 {
                centers.push(candidate);
                subtract_center(&mut state, candidate, normalized, params)?;
                break;
            }
            state.potentials[candidate] = 0.0;
        }
    }
    Ok(centers)
}
