//! Influence search: split a population into families with and without a
//! feature, cluster the former, and compare every cluster with its
//! counterpart ("prototype") among the latter.

mod attribute;
mod cohort;
mod compare;
mod grouping;
pub mod pipeline;
mod prototypes;
mod ranges;

pub use attribute::FamilyAttribute;
pub use cohort::{
    favorable_window, separate_groups, separate_groups_with_contrast, value_counts, window_from_counts,
    CohortFilter, CohortPair, Predicate,
};
pub use compare::{compare_distributions, total_variation, Binning, Bins, ComparisonEntry, ComparisonReport, Histogram};
pub use grouping::{cluster_n1, feature_matrix, ClusterOutcome};
pub use pipeline::{run_on_families, run_pipeline, PipelineConfig, PipelineOutcome};
pub use prototypes::{build_prototypes, PrototypeSet};
pub use ranges::{extract_ranges, range_from_counts, IntRange, InvariantRangeSet};
