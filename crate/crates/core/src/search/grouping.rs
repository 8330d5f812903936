use crate::cluster::{fit, ClusterModel, ClusterParams, Dataset};
use crate::error::{Error, Result};
use crate::microdata::FamilyUnit;

use super::attribute::FamilyAttribute;

/// N1 clustered on the chosen features.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub model: ClusterModel,
    /// Family index of each clustered row.
    pub rows: Vec<usize>,
    /// `members[k]`: family indices in cluster k.
    pub members: Vec<Vec<usize>>,
}

impl ClusterOutcome {
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn percentages(&self) -> Vec<f64> {
        let n = self.rows.len() as f64;
        self.members.iter().map(|m| m.len() as f64 * 100.0 / n).collect()
    }
}

/// Feature rows for the given families, in order.
pub fn feature_matrix(
    families: &[FamilyUnit],
    rows: &[usize],
    features: &[FamilyAttribute],
) -> Result<Vec<Vec<f64>>> {
    rows.iter()
        .map(|&i| {
            features
                .iter()
                .map(|a| {
                    a.value(&families[i])
                        .map(|v| v as f64)
                        .ok_or_else(|| Error::MissingFeature {
                            index: i,
                            feature: a.name().to_string(),
                        })
                })
                .collect()
        })
        .collect()
}

/// Runs subtractive clustering on the N1 families' feature vectors.
pub fn cluster_n1(
    families: &[FamilyUnit],
    n1: &[usize],
    features: &[FamilyAttribute],
    params: &ClusterParams,
) -> Result<ClusterOutcome> {
    if n1.is_empty() {
        return Err(Error::EmptyCohort);
    }
    if features.is_empty() {
        return Err(Error::Config("no clustering features".into()));
    }
    let matrix = feature_matrix(families, n1, features)?;
    let model = fit(&Dataset::from_rows(&matrix)?, params)?;
    let members = model
        .members()
        .into_iter()
        .map(|m| m.into_iter().map(|r| n1[r]).collect())
        .collect();
    Ok(ClusterOutcome {
        model,
        rows: n1.to_vec(),
        members,
    })
}
