//! Census microdata ingestion: schema-driven parsing of household and person
//! records, and derivation of family units.

mod codes;
mod family;
mod records;
mod schema;

pub use codes::{income_bin, income_bin_label, Education, INCOME_BIN_COUNT, INCOME_EDGES};
pub use family::{derive_families, FamilyUnit};
pub use records::{
    emit_fixed_width, parse_microdata, HouseholdRecord, Microdata, PersonRecord, Sex,
};
pub use schema::{
    FieldSpec, Layout, Location, RecordKind, RecordSchema, RelationshipCodes, SchemaSet, SexCodes,
};

use std::io::BufReader;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses every file in order and concatenates the records.
pub fn load_files<P: AsRef<Path>>(paths: &[P], schema: &SchemaSet) -> Result<Microdata> {
    let mut all = Microdata::default();
    for path in paths {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let data = parse_microdata(BufReader::new(file), schema).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        all.extend(data);
    }
    Ok(all)
}
