//! Record layouts, loaded from TOML.
//!
//! A schema file names the layout (`fixed-width` or `delimited`), where the
//! record-kind tag sits, the household and person field lists, and the codes
//! used by the relationship and sex fields. Each field has a `name` and either
//! a 1-based `start`/`width` span or a CSV `column`. Fields whose name (or
//! explicit `role`) is one of the recognized roles populate the typed record
//! members; all other fields are kept as extra attributes.
//!
//! ```toml
//! layout = "fixed-width"
//! household_tag = "H"
//! person_tag = "P"
//! record_type = { start = 1, width = 1 }
//!
//! [relationship]
//! householder = 1
//! spouse = 2
//! natural_child = 3
//!
//! [sex]
//! male = 1
//! female = 2
//!
//! [[household.fields]]
//! name = "serial"
//! start = 2
//! width = 7
//!
//! [[person.fields]]
//! name = "education"
//! source = "EDUC"
//! start = 20
//! width = 2
//! missing = [0]
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    FixedWidth,
    Delimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Household,
    Person,
}

/// Where a field lives in a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    /// 1-based start character and width, for fixed-width layouts.
    Span { start: usize, width: usize },
    /// Header name, for delimited layouts.
    Column { column: String },
}

impl Location {
    fn span(&self) -> Option<(usize, usize)> {
        match *self {
            Location::Span { start, width } => Some((start - 1, start - 1 + width)),
            Location::Column { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    /// Typed member this field populates; defaults to `name` when that is a known role.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    /// Variable name in the source documentation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(flatten)]
    pub location: Location,
    /// Codes that mean "not observed".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<i64>,
    /// Raw code to analysis code. When present, unlisted codes are missing.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub recode: BTreeMap<String, i64>,
    /// Codes meaning "yes" for flag fields (`commercial`, `disability`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flag: Vec<i64>,
}

impl FieldSpec {
    pub fn span(name: &str, start: usize, width: usize) -> Self {
        Self {
            name: name.to_string(),
            role: None,
            source: None,
            location: Location::Span { start, width },
            missing: Vec::new(),
            min: None,
            max: None,
            recode: BTreeMap::new(),
            flag: Vec::new(),
        }
    }

    pub fn column(name: &str, column: &str) -> Self {
        Self {
            location: Location::Column {
                column: column.to_string(),
            },
            ..Self::span(name, 1, 1)
        }
    }

    /// Decodes one raw code, applying missing codes, recode table and domain.
    pub fn decode(&self, code: i64) -> Option<i64> {
        if self.missing.contains(&code) {
            return None;
        }
        let value = if self.recode.is_empty() {
            code
        } else {
            *self.recode.get(&code.to_string())?
        };
        if self.min.is_some_and(|m| value < m) || self.max.is_some_and(|m| value > m) {
            return None;
        }
        Some(value)
    }

    pub fn is_flag_set(&self, value: i64) -> bool {
        if self.flag.is_empty() {
            value == 1
        } else {
            self.flag.contains(&value)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordSchema {
    /// Full line width for fixed-width layouts; lines may be shorter only by trailing padding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_length: Option<usize>,
    pub fields: Vec<FieldSpec>,
}

pub(crate) const HOUSEHOLD_ROLES: &[&str] = &[
    "serial",
    "home_ownership",
    "building_type",
    "vehicles",
    "commercial",
];

pub(crate) const PERSON_ROLES: &[&str] = &[
    "serial",
    "relationship",
    "sex",
    "age",
    "marital_status",
    "race",
    "ancestry",
    "education",
    "class_of_worker",
    "income",
    "disability",
];

impl RecordSchema {
    pub fn role_of<'a>(&self, field: &'a FieldSpec, kind: RecordKind) -> Option<&'a str> {
        let known = match kind {
            RecordKind::Household => HOUSEHOLD_ROLES,
            RecordKind::Person => PERSON_ROLES,
        };
        match &field.role {
            Some(r) => Some(r.as_str()),
            None => known.contains(&field.name.as_str()).then_some(field.name.as_str()),
        }
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f.name == name)
    }

    /// Minimum line length covering every span.
    pub(crate) fn required_width(&self) -> usize {
        self.fields
            .iter()
            .filter_map(|f| f.location.span())
            .map(|(_, end)| end)
            .max()
            .unwrap_or(0)
    }

    fn validate(&self, kind: RecordKind, layout: Layout, tag_span: Option<(usize, usize)>) -> Result<()> {
        let what = match kind {
            RecordKind::Household => "household",
            RecordKind::Person => "person",
        };
        let err = |msg: String| Err(Error::Schema(format!("{what}: {msg}")));
        let known = match kind {
            RecordKind::Household => HOUSEHOLD_ROLES,
            RecordKind::Person => PERSON_ROLES,
        };
        let mut names = HashSet::new();
        let mut roles = HashSet::new();
        let mut spans: Vec<(usize, usize, &str)> = Vec::new();
        if let Some((s, e)) = tag_span {
            spans.push((s, e, "record type"));
        }
        for f in &self.fields {
            if !names.insert(f.name.as_str()) {
                return err(format!("duplicate attribute `{}`", f.name));
            }
            match (&f.location, layout) {
                (Location::Span { start, width }, Layout::FixedWidth) => {
                    if *start == 0 || *width == 0 {
                        return err(format!("`{}` needs start >= 1 and width >= 1", f.name));
                    }
                    let (s, e) = f.location.span().unwrap();
                    if let Some(other) = spans.iter().find(|(os, oe, _)| s < *oe && *os < e) {
                        return err(format!("`{}` overlaps `{}`", f.name, other.2));
                    }
                    spans.push((s, e, f.name.as_str()));
                }
                (Location::Column { .. }, Layout::Delimited) => {}
                _ => return err(format!("`{}` location does not match the layout", f.name)),
            }
            if let Some(role) = self.role_of(f, kind) {
                if !known.contains(&role) {
                    return err(format!("unknown role `{role}`"));
                }
                if role != "disability" && !roles.insert(role) {
                    return err(format!("role `{role}` assigned twice"));
                }
            }
        }
        if let Some(len) = self.record_length {
            if len < self.required_width() {
                return err(format!("record length {len} is shorter than the field spans"));
            }
        }
        let has = |role: &str| self.fields.iter().any(|f| self.role_of(f, kind) == Some(role));
        if !has("serial") {
            return err("missing `serial` field".into());
        }
        if kind == RecordKind::Person && !has("relationship") {
            return err("missing `relationship` field".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationshipCodes {
    pub householder: i64,
    pub spouse: i64,
    pub natural_child: i64,
}

impl Default for RelationshipCodes {
    fn default() -> Self {
        Self {
            householder: 1,
            spouse: 2,
            natural_child: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SexCodes {
    pub male: i64,
    pub female: i64,
}

impl Default for SexCodes {
    fn default() -> Self {
        Self { male: 1, female: 2 }
    }
}

fn default_delimiter() -> char {
    ','
}

/// Household and person layouts of one microdata file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSet {
    pub layout: Layout,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    pub record_type: Location,
    pub household_tag: String,
    pub person_tag: String,
    #[serde(default)]
    pub relationship: RelationshipCodes,
    #[serde(default)]
    pub sex: SexCodes,
    pub household: RecordSchema,
    pub person: RecordSchema,
}

impl SchemaSet {
    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Self = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    pub fn record(&self, kind: RecordKind) -> &RecordSchema {
        match kind {
            RecordKind::Household => &self.household,
            RecordKind::Person => &self.person,
        }
    }

    pub(crate) fn tag_span(&self) -> Option<(usize, usize)> {
        self.record_type.span()
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.record_type, self.layout) {
            (Location::Span { start, width }, Layout::FixedWidth) if *start >= 1 && *width >= 1 => {}
            (Location::Column { .. }, Layout::Delimited) => {}
            _ => return Err(Error::Schema("record_type location does not match the layout".into())),
        }
        if self.household_tag == self.person_tag {
            return Err(Error::Schema("household and person tags must differ".into()));
        }
        if let Some((s, e)) = self.tag_span() {
            for tag in [&self.household_tag, &self.person_tag] {
                if tag.len() > e - s {
                    return Err(Error::Schema(format!("tag `{tag}` wider than its span")));
                }
            }
        }
        if self.sex.male == self.sex.female {
            return Err(Error::Schema("male and female codes must differ".into()));
        }
        let tag = self.tag_span();
        self.household.validate(RecordKind::Household, self.layout, tag)?;
        self.person.validate(RecordKind::Person, self.layout, tag)?;
        Ok(())
    }
}
