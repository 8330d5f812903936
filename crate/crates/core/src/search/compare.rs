use serde::{Deserialize, Serialize};

use super::attribute::FamilyAttribute;
use crate::microdata::{income_bin, income_bin_label, Education, INCOME_BIN_COUNT};

/// How attribute values are grouped for a distribution comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Binning {
    /// The eleven father's-income intervals.
    Income,
    /// Education codes 1 through 16.
    Education,
    /// One bin per listed code.
    Codes { codes: Vec<i64> },
    /// One bin per value observed on either side.
    Observed,
}

/// A binning resolved against concrete data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bins {
    pub labels: Vec<String>,
    codes: Vec<i64>,
    income: bool,
}

impl Bins {
    pub fn resolve(binning: &Binning, left: &[Option<i64>], right: &[Option<i64>]) -> Self {
        let codes: Vec<i64> = match binning {
            Binning::Income => {
                return Self {
                    labels: (1..=INCOME_BIN_COUNT).map(income_bin_label).collect(),
                    codes: (1..=i64::from(INCOME_BIN_COUNT)).collect(),
                    income: true,
                }
            }
            Binning::Education => Education::all().map(i64::from).collect(),
            Binning::Codes { codes } => codes.clone(),
            Binning::Observed => {
                let mut v: Vec<i64> = left.iter().chain(right).flatten().copied().collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        Self {
            labels: codes.iter().map(i64::to_string).collect(),
            codes,
            income: false,
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn bin_of(&self, value: i64) -> Option<usize> {
        if self.income {
            income_bin(value).ok().map(|b| usize::from(b) - 1)
        } else {
            self.codes.iter().position(|&c| c == value)
        }
    }
}

/// Counts per bin, plus values that were missing or fell outside every bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub counts: Vec<usize>,
    pub excluded: usize,
}

impl Histogram {
    pub fn build(bins: &Bins, values: &[Option<i64>]) -> Self {
        let mut counts = vec![0; bins.len()];
        let mut excluded = 0;
        for v in values {
            match v.and_then(|v| bins.bin_of(v)) {
                Some(b) => counts[b] += 1,
                None => excluded += 1,
            }
        }
        Self { counts, excluded }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Percent of binned values per bin; all zeros when nothing was binned.
    pub fn percentages(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 * 100.0 / total as f64)
            .collect()
    }
}

/// Half the L1 distance between two histograms, each normalized by its own
/// mass. `None` if either side has no mass or the lengths differ.
pub fn total_variation(p: &[f64], q: &[f64]) -> Option<f64> {
    if p.len() != q.len() {
        return None;
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if !(sp > 0.0 && sq > 0.0) {
        return None;
    }
    let d: f64 = p.iter().zip(q).map(|(a, b)| (a / sp - b / sq).abs()).sum();
    Some((0.5 * d).min(1.0))
}

/// Paired histograms of one attribute for one cluster and its prototype.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub cluster: usize,
    pub attribute: FamilyAttribute,
    pub bin_labels: Vec<String>,
    pub cluster_hist: Histogram,
    pub prototype_hist: Histogram,
    pub cluster_pct: Vec<f64>,
    pub prototype_pct: Vec<f64>,
    /// Total variation distance; `None` when either side is empty.
    pub divergence: Option<f64>,
    pub flagged: bool,
}

pub fn compare_distributions(
    cluster: usize,
    attribute: FamilyAttribute,
    binning: &Binning,
    cluster_values: &[Option<i64>],
    prototype_values: &[Option<i64>],
    threshold: f64,
) -> ComparisonEntry {
    let bins = Bins::resolve(binning, cluster_values, prototype_values);
    let cluster_hist = Histogram::build(&bins, cluster_values);
    let prototype_hist = Histogram::build(&bins, prototype_values);
    let cluster_pct = cluster_hist.percentages();
    let prototype_pct = prototype_hist.percentages();
    let divergence = if cluster_hist.total() == 0 || prototype_hist.total() == 0 {
        None
    } else {
        total_variation(&cluster_pct, &prototype_pct)
    };
    ComparisonEntry {
        cluster,
        attribute,
        bin_labels: bins.labels,
        cluster_hist,
        prototype_hist,
        cluster_pct,
        prototype_pct,
        divergence,
        flagged: divergence.is_some_and(|d| d > threshold),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn flagged(&self) -> impl Iterator<Item = &ComparisonEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }
}
