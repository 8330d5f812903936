//! The six-step influence search, driven by a TOML config.
//!
//! 1. separate N1 (feature present) and N2 (feature absent) under shared
//!    restrictions, optionally narrowing both to a favorable parent-age window;
//! 2. pick the clustering features for N1;
//! 3. cluster N1;
//! 4. extract per-cluster ranges of the invariant attributes;
//! 5. carve a prototype for every cluster out of N2;
//! 6. compare attribute distributions between each cluster and its prototype.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::attribute::FamilyAttribute;
use super::cohort::{separate_groups_with_contrast, value_counts, window_from_counts, CohortFilter, CohortPair, Predicate};
use super::compare::{compare_distributions, Binning, ComparisonReport};
use super::grouping::{cluster_n1, ClusterOutcome};
use super::prototypes::{build_prototypes, PrototypeSet};
use super::ranges::{check_fraction, extract_ranges, IntRange, InvariantRangeSet};
use crate::cluster::ClusterParams;
use crate::error::{Error, Result};
use crate::microdata::{derive_families, load_files, FamilyUnit, SchemaSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub schema: PathBuf,
    pub files: Vec<PathBuf>,
}

/// How the parents' age window is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgeWindow {
    None,
    Fixed { father: [i64; 2], mother: [i64; 2] },
    /// Ages held by at least `threshold` feature-bearing families.
    Auto { threshold: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub restrictions: CohortFilter,
    pub feature: CohortFilter,
    /// Extra condition on N2 only.
    pub contrast: CohortFilter,
    pub age_window: AgeWindow,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            restrictions: CohortFilter::new(vec![Predicate::CompleteFamily, Predicate::NoDisability]),
            feature: CohortFilter::new(vec![
                Predicate::ChildrenCount { min: 1, max: 2 },
                Predicate::ChildAges { min: 0, max: 2 },
            ]),
            contrast: CohortFilter::new(vec![Predicate::ChildrenCount { min: 0, max: 0 }]),
            age_window: AgeWindow::Auto { threshold: 400 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    pub attribute: FamilyAttribute,
    pub binning: Binning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub clustering: Vec<FamilyAttribute>,
    pub invariant: Vec<FamilyAttribute>,
    pub comparison: Vec<ComparisonSpec>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        use FamilyAttribute::*;
        let codes = |n: i64| Binning::Codes { codes: (1..=n).collect() };
        Self {
            clustering: vec![FatherAge, MotherAge, FatherEducation, MotherEducation, FatherIncome],
            invariant: vec![FatherAge, MotherAge],
            comparison: vec![
                ComparisonSpec { attribute: FatherIncome, binning: Binning::Income },
                ComparisonSpec { attribute: FatherEducation, binning: Binning::Education },
                ComparisonSpec { attribute: MotherEducation, binning: Binning::Education },
                ComparisonSpec { attribute: HomeOwnership, binning: codes(4) },
                ComparisonSpec { attribute: BuildingType, binning: codes(4) },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeConfig {
    pub fraction: f64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self { fraction: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub divergence_threshold: f64,
    pub output_dir: PathBuf,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            divergence_threshold: 0.1,
            output_dir: PathBuf::from("report"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    #[serde(default)]
    pub cohort: CohortConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub clustering: ClusterParams,
    #[serde(default)]
    pub ranges: RangeConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

impl PipelineConfig {
    pub fn new(schema: impl Into<PathBuf>, files: Vec<PathBuf>) -> Self {
        Self {
            input: InputConfig {
                schema: schema.into(),
                files,
            },
            cohort: CohortConfig::default(),
            features: FeatureConfig::default(),
            clustering: ClusterParams::default(),
            ranges: RangeConfig::default(),
            report: ReportConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.clustering.validate()?;
        check_fraction(self.ranges.fraction)?;
        if self.features.clustering.is_empty() {
            return Err(Error::Config("features.clustering is empty".into()));
        }
        if self.features.invariant.is_empty() {
            return Err(Error::Config("features.invariant is empty".into()));
        }
        let t = self.report.divergence_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!("divergence threshold {t} outside [0, 1]")));
        }
        if let AgeWindow::Fixed { father, mother } = &self.cohort.age_window {
            if father[0] > father[1] || mother[0] > mother[1] {
                return Err(Error::Config("age window bounds are reversed".into()));
            }
        }
        Ok(())
    }
}

/// Parents' age windows and the count series behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowOutcome {
    pub father: IntRange,
    pub mother: IntRange,
    /// Empty unless the window was computed from the data.
    pub father_counts: BTreeMap<i64, usize>,
    pub mother_counts: BTreeMap<i64, usize>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub families: Vec<FamilyUnit>,
    pub window: Option<WindowOutcome>,
    pub cohorts: CohortPair,
    /// N1 families lacking a clustering feature, left out of step 3.
    pub dropped_missing_features: usize,
    pub clusters: ClusterOutcome,
    pub ranges: InvariantRangeSet,
    pub prototypes: PrototypeSet,
    pub report: ComparisonReport,
    pub timings: Vec<(&'static str, Duration)>,
}

pub const STEP_LOAD: &str = "load";
pub const STEP_SEPARATE: &str = "separate_groups";
pub const STEP_FEATURES: &str = "select_features";
pub const STEP_CLUSTER: &str = "cluster_n1";
pub const STEP_RANGES: &str = "extract_ranges";
pub const STEP_PROTOTYPES: &str = "build_prototypes";
pub const STEP_COMPARE: &str = "compare";

fn timed<T>(timings: &mut Vec<(&'static str, Duration)>, step: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(Error::in_step(step))?;
    timings.push((step, start.elapsed()));
    Ok(out)
}

/// Loads the configured input files and runs all six steps.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let start = Instant::now();
    let families = (|| {
        config.validate()?;
        let schema = SchemaSet::load(&config.input.schema)?;
        let data = load_files(&config.input.files, &schema)?;
        Ok(derive_families(data, &schema.relationship))
    })()
    .map_err(Error::in_step(STEP_LOAD))?;
    let mut outcome = run_on_families(config, families)?;
    outcome.timings.insert(0, (STEP_LOAD, start.elapsed()));
    Ok(outcome)
}

/// Runs all six steps on already derived families.
pub fn run_on_families(config: &PipelineConfig, families: Vec<FamilyUnit>) -> Result<PipelineOutcome> {
    config.validate().map_err(Error::in_step(STEP_SEPARATE))?;
    let mut timings = Vec::new();
    let cohort = &config.cohort;

    let (window, cohorts) = timed(&mut timings, STEP_SEPARATE, || {
        let window = match &cohort.age_window {
            AgeWindow::None => None,
            AgeWindow::Fixed { father, mother } => Some(WindowOutcome {
                father: IntRange::new(father[0], father[1]),
                mother: IntRange::new(mother[0], mother[1]),
                father_counts: BTreeMap::new(),
                mother_counts: BTreeMap::new(),
            }),
            AgeWindow::Auto { threshold } => {
                let bearing: Vec<&FamilyUnit> = families
                    .iter()
                    .filter(|f| cohort.restrictions.matches(f) && cohort.feature.matches(f))
                    .collect();
                let father_counts = value_counts(bearing.iter().copied(), FamilyAttribute::FatherAge);
                let mother_counts = value_counts(bearing.iter().copied(), FamilyAttribute::MotherAge);
                Some(WindowOutcome {
                    father: window_from_counts(&father_counts, *threshold)?,
                    mother: window_from_counts(&mother_counts, *threshold)?,
                    father_counts,
                    mother_counts,
                })
            }
        };
        let mut restrictions = cohort.restrictions.clone();
        if let Some(w) = &window {
            for (attribute, r) in [(FamilyAttribute::FatherAge, w.father), (FamilyAttribute::MotherAge, w.mother)] {
                restrictions = restrictions.with(Predicate::AttributeRange {
                    attribute,
                    min: r.lo,
                    max: r.hi,
                });
            }
        }
        let pair = separate_groups_with_contrast(&families, &cohort.feature, &restrictions, &cohort.contrast);
        Ok((window, pair))
    })?;

    let features = &config.features.clustering;
    let clusterable: Vec<usize> = timed(&mut timings, STEP_FEATURES, || {
        Ok(cohorts
            .n1
            .iter()
            .copied()
            .filter(|&i| features.iter().all(|a| a.value(&families[i]).is_some()))
            .collect())
    })?;
    let dropped_missing_features = cohorts.n1.len() - clusterable.len();

    let clusters = timed(&mut timings, STEP_CLUSTER, || {
        cluster_n1(&families, &clusterable, features, &config.clustering)
    })?;

    let ranges = timed(&mut timings, STEP_RANGES, || {
        extract_ranges(&families, &clusters.members, &config.features.invariant, config.ranges.fraction)
    })?;

    let prototypes = timed(&mut timings, STEP_PROTOTYPES, || {
        Ok(build_prototypes(&families, &cohorts.n2, &ranges))
    })?;

    let report = timed(&mut timings, STEP_COMPARE, || {
        let threshold = config.report.divergence_threshold;
        let values = |idx: &[usize], a: FamilyAttribute| -> Vec<Option<i64>> {
            idx.iter().map(|&i| a.value(&families[i])).collect()
        };
        let mut entries = Vec::new();
        for (k, (members, proto)) in clusters.members.iter().zip(&prototypes.members).enumerate() {
            for spec in &config.features.comparison {
                entries.push(compare_distributions(
                    k,
                    spec.attribute,
                    &spec.binning,
                    &values(members, spec.attribute),
                    &values(proto, spec.attribute),
                    threshold,
                ));
            }
        }
        Ok(ComparisonReport { threshold, entries })
    })?;

    Ok(PipelineOutcome {
        families,
        window,
        cohorts,
        dropped_missing_features,
        clusters,
        ranges,
        prototypes,
        report,
        timings,
    })
}
