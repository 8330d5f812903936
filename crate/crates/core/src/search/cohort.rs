use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::attribute::FamilyAttribute;
use super::ranges::IntRange;
use crate::error::{Error, Result};
use crate::microdata::FamilyUnit;

/// A pure test on one family. Predicates over attributes that are not
/// observed on a family fail for that family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    /// Both parents present, recorded as male and female.
    CompleteFamily,
    /// Neither parent has a disability indicator set, and both are observed.
    NoDisability,
    ChildrenCount { min: usize, max: usize },
    /// Every child's age is observed and inside `[min, max]`. True for childless families.
    ChildAges { min: u32, max: u32 },
    AttributeRange {
        attribute: FamilyAttribute,
        min: i64,
        max: i64,
    },
}

impl Predicate {
    pub fn matches(&self, family: &FamilyUnit) -> bool {
        match *self {
            Predicate::CompleteFamily => family.is_complete(),
            Predicate::NoDisability => {
                family.father.disability == Some(false) && family.mother.disability == Some(false)
            }
            Predicate::ChildrenCount { min, max } => (min..=max).contains(&family.children.len()),
            Predicate::ChildAges { min, max } => family
                .children
                .iter()
                .all(|c| c.age.is_some_and(|a| (min..=max).contains(&a))),
            Predicate::AttributeRange {
                attribute,
                min,
                max,
            } => attribute.value(family).is_some_and(|v| (min..=max).contains(&v)),
        }
    }
}

/// Conjunction of predicates; empty accepts everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CohortFilter(pub Vec<Predicate>);

impl CohortFilter {
    pub fn new(predicates: Vec<Predicate>) -> Self {
        Self(predicates)
    }

    pub fn matches(&self, family: &FamilyUnit) -> bool {
        self.0.iter().all(|p| p.matches(family))
    }

    pub fn with(mut self, predicate: Predicate) -> Self {
        self.0.push(predicate);
        self
    }
}

/// Indices of the families with (`n1`) and without (`n2`) the studied feature.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CohortPair {
    pub n1: Vec<usize>,
    pub n2: Vec<usize>,
}

/// N1 = restrictions and feature; N2 = restrictions and not feature.
pub fn separate_groups(
    families: &[FamilyUnit],
    feature: &CohortFilter,
    restrictions: &CohortFilter,
) -> CohortPair {
    separate_groups_with_contrast(families, feature, restrictions, &CohortFilter::default())
}

/// Like [`separate_groups`], with N2 further limited to families matching `contrast`
/// (for example, childless families only).
pub fn separate_groups_with_contrast(
    families: &[FamilyUnit],
    feature: &CohortFilter,
    restrictions: &CohortFilter,
    contrast: &CohortFilter,
) -> CohortPair {
    let mut pair = CohortPair::default();
    for (i, family) in families.iter().enumerate() {
        if !restrictions.matches(family) {
            continue;
        }
        if feature.matches(family) {
            pair.n1.push(i);
        } else if contrast.matches(family) {
            pair.n2.push(i);
        }
    }
    pair
}

/// Number of families per observed attribute value.
pub fn value_counts<'a>(
    families: impl IntoIterator<Item = &'a FamilyUnit>,
    attribute: FamilyAttribute,
) -> BTreeMap<i64, usize> {
    let mut counts = BTreeMap::new();
    for f in families {
        if let Some(v) = attribute.value(f) {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    counts
}

/// Smallest range covering every value whose count reaches `threshold`.
pub fn window_from_counts(counts: &BTreeMap<i64, usize>, threshold: usize) -> Result<IntRange> {
    let mut qualifying = counts.iter().filter(|(_, &c)| c >= threshold).map(|(&v, _)| v);
    let lo = qualifying.next().ok_or(Error::EmptyWindow { threshold })?;
    let hi = qualifying.last().unwrap_or(lo);
    Ok(IntRange::new(lo, hi))
}

/// The most favorable window of `attribute`: the hull of values held by at
/// least `threshold` families.
pub fn favorable_window<'a>(
    families: impl IntoIterator<Item = &'a FamilyUnit>,
    attribute: FamilyAttribute,
    threshold: usize,
) -> Result<IntRange> {
    window_from_counts(&value_counts(families, attribute), threshold)
}
