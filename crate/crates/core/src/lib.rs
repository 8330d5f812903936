//! Subtractive clustering and the cluster/prototype influence search over
//! census family records.
//!
//! The crate is organized bottom-up:
//!
//! - [`cluster`]: unit-hypercube normalization, density potentials, center
//!   selection, and nearest-center assignment.
//! - [`microdata`]: schema-driven parsing of household and person records and
//!   derivation of two-parent family units.
//! - [`search`]: cohort separation, cluster range extraction, prototype
//!   construction, and distribution comparison, plus the end-to-end pipeline.
//! - [`report`]: writes a pipeline run to a directory of delimited tables
//!   with a digest manifest.
//! - [`synth`]: seeded generator of schema-conformant microdata with planted
//!   cluster structure.

pub mod cluster;
pub mod error;
pub mod microdata;
pub mod report;
pub mod search;
pub mod synth;

pub use error::{Error, Result};
