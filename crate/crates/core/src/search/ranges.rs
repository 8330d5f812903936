use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::attribute::FamilyAttribute;
use super::cohort::value_counts;
use crate::error::{Error, Result};
use crate::microdata::FamilyUnit;

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

pub(crate) fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFraction(fraction))
    }
}

/// Hull of the values whose count is at least `fraction` of the largest
/// count. Returns `None` for an empty series.
pub fn range_from_counts(counts: &BTreeMap<i64, usize>, fraction: f64) -> Result<Option<IntRange>> {
    check_fraction(fraction)?;
    let Some(&max) = counts.values().max() else {
        return Ok(None);
    };
    let threshold = fraction * max as f64;
    let mut kept = counts
        .iter()
        .filter(|(_, &c)| c as f64 >= threshold)
        .map(|(&v, _)| v);
    let lo = kept.next().expect("the modal value always qualifies");
    let hi = kept.last().unwrap_or(lo);
    Ok(Some(IntRange::new(lo, hi)))
}

/// Per-cluster ranges of the invariant attributes, with the count series
/// they were drawn from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantRangeSet {
    pub attributes: Vec<FamilyAttribute>,
    pub fraction: f64,
    /// `ranges[cluster][attribute]`
    pub ranges: Vec<Vec<IntRange>>,
    /// `series[cluster][attribute]`: members per attribute value.
    pub series: Vec<Vec<BTreeMap<i64, usize>>>,
}

impl InvariantRangeSet {
    pub fn n_clusters(&self) -> usize {
        self.ranges.len()
    }

    /// True when every invariant attribute of `family` lies inside cluster `k`'s ranges.
    pub fn admits(&self, k: usize, family: &FamilyUnit) -> bool {
        self.attributes
            .iter()
            .zip(&self.ranges[k])
            .all(|(a, r)| a.value(family).is_some_and(|v| r.contains(v)))
    }
}

/// Applies the fraction-of-maximum rule to each cluster's members.
/// `members[k]` holds indices into `families`.
pub fn extract_ranges(
    families: &[FamilyUnit],
    members: &[Vec<usize>],
    attributes: &[FamilyAttribute],
    fraction: f64,
) -> Result<InvariantRangeSet> {
    check_fraction(fraction)?;
    let mut ranges = Vec::with_capacity(members.len());
    let mut series = Vec::with_capacity(members.len());
    for (k, idx) in members.iter().enumerate() {
        if idx.is_empty() {
            return Err(Error::EmptyCluster(k));
        }
        let mut cluster_ranges = Vec::with_capacity(attributes.len());
        let mut cluster_series = Vec::with_capacity(attributes.len());
        for &attr in attributes {
            let counts = value_counts(idx.iter().map(|&i| &families[i]), attr);
            let range = range_from_counts(&counts, fraction)?.ok_or_else(|| Error::MissingFeature {
                index: idx[0],
                feature: attr.name().to_string(),
            })?;
            cluster_ranges.push(range);
            cluster_series.push(counts);
        }
        ranges.push(cluster_ranges);
        series.push(cluster_series);
    }
    Ok(InvariantRangeSet {
        attributes: attributes.to_vec(),
        fraction,
        ranges,
        series,
    })
}
