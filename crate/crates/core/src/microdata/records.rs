use std::collections::HashSet;
use std::io::BufRead;

use super::codes::Education;
use super::schema::{Layout, Location, RecordKind, RecordSchema, SchemaSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sex {
    Male,
    Female,
}

/// One household record. `values` and `raw` are aligned with the schema's
/// household field list.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdRecord {
    pub id: String,
    pub home_ownership: Option<i64>,
    pub building_type: Option<i64>,
    pub vehicles: Option<i64>,
    pub commercial: Option<bool>,
    pub values: Vec<Option<i64>>,
    pub raw: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonRecord {
    pub household_id: String,
    pub relationship: Option<i64>,
    pub sex: Option<Sex>,
    pub age: Option<u32>,
    pub marital_status: Option<i64>,
    pub race: Option<i64>,
    pub ancestry: Option<i64>,
    pub education: Option<Education>,
    pub class_of_worker: Option<i64>,
    /// Total income in dollars; may be negative.
    pub income: Option<i64>,
    /// True if any disability indicator is set.
    pub disability: Option<bool>,
    pub values: Vec<Option<i64>>,
    pub raw: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Microdata {
    pub households: Vec<HouseholdRecord>,
    pub persons: Vec<PersonRecord>,
}

impl Microdata {
    pub fn extend(&mut self, other: Microdata) {
        self.households.extend(other.households);
        self.persons.extend(other.persons);
    }
}

/// Raw text of every field of one record plus its decoded values.
struct Decoded {
    id: String,
    values: Vec<Option<i64>>,
    raw: Vec<String>,
}

fn decode_fields(schema: &RecordSchema, kind: RecordKind, raw: Vec<String>, line: usize) -> Result<Decoded> {
    let mut id = None;
    let mut values = Vec::with_capacity(raw.len());
    for (field, text) in schema.fields.iter().zip(&raw) {
        let text = text.trim();
        if schema.role_of(field, kind) == Some("serial") {
            if text.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "blank household id".into(),
                });
            }
            id = Some(text.to_string());
            values.push(None);
            continue;
        }
        if text.is_empty() {
            values.push(None);
            continue;
        }
        let code: i64 = text.parse().map_err(|_| Error::Parse {
            line,
            message: format!("field `{}`: `{text}` is not an integer code", field.name),
        })?;
        values.push(field.decode(code));
    }
    Ok(Decoded {
        id: id.expect("validated schema has a serial field"),
        values,
        raw,
    })
}

fn household_from(schema: &SchemaSet, d: Decoded) -> HouseholdRecord {
    let mut rec = HouseholdRecord {
        id: d.id,
        home_ownership: None,
        building_type: None,
        vehicles: None,
        commercial: None,
        values: Vec::new(),
        raw: d.raw,
    };
    for (field, &value) in schema.household.fields.iter().zip(&d.values) {
        match schema.household.role_of(field, RecordKind::Household) {
            Some("home_ownership") => rec.home_ownership = value,
            Some("building_type") => rec.building_type = value,
            Some("vehicles") => rec.vehicles = value,
            Some("commercial") => rec.commercial = value.map(|v| field.is_flag_set(v)),
            _ => {}
        }
    }
    rec.values = d.values;
    rec
}

fn person_from(schema: &SchemaSet, d: Decoded) -> PersonRecord {
    let mut rec = PersonRecord {
        household_id: d.id,
        relationship: None,
        sex: None,
        age: None,
        marital_status: None,
        race: None,
        ancestry: None,
        education: None,
        class_of_worker: None,
        income: None,
        disability: None,
        values: Vec::new(),
        raw: d.raw,
    };
    for (field, &value) in schema.person.fields.iter().zip(&d.values) {
        match schema.person.role_of(field, RecordKind::Person) {
            Some("relationship") => rec.relationship = value,
            Some("sex") => {
                rec.sex = value.and_then(|v| match v {
                    v if v == schema.sex.male => Some(Sex::Male),
                    v if v == schema.sex.female => Some(Sex::Female),
                    _ => None,
                })
            }
            Some("age") => rec.age = value.and_then(|v| u32::try_from(v).ok()),
            Some("marital_status") => rec.marital_status = value,
            Some("race") => rec.race = value,
            Some("ancestry") => rec.ancestry = value,
            Some("education") => rec.education = value.and_then(|v| Education::new(v).ok()),
            Some("class_of_worker") => rec.class_of_worker = value,
            Some("income") => rec.income = value,
            Some("disability") => {
                if let Some(v) = value {
                    let set = field.is_flag_set(v);
                    rec.disability = Some(rec.disability.unwrap_or(false) || set);
                }
            }
            _ => {}
        }
    }
    rec.values = d.values;
    rec
}

/// Collects parsed records and enforces household id uniqueness.
struct Sink<'a> {
    schema: &'a SchemaSet,
    out: Microdata,
    seen: HashSet<String>,
}

impl Sink<'_> {
    fn push(&mut self, kind: RecordKind, raw: Vec<String>, line: usize) -> Result<()> {
        let decoded = decode_fields(self.schema.record(kind), kind, raw, line)?;
        match kind {
            RecordKind::Household => {
                if !self.seen.insert(decoded.id.clone()) {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate household id `{}`", decoded.id),
                    });
                }
                self.out.households.push(household_from(self.schema, decoded));
            }
            RecordKind::Person => self.out.persons.push(person_from(self.schema, decoded)),
        }
        Ok(())
    }
}

fn kind_of(schema: &SchemaSet, tag: &str, line: usize) -> Result<RecordKind> {
    let tag = tag.trim();
    if tag == schema.household_tag {
        Ok(RecordKind::Household)
    } else if tag == schema.person_tag {
        Ok(RecordKind::Person)
    } else {
        Err(Error::Parse {
            line,
            message: format!("unknown record kind `{tag}`"),
        })
    }
}

fn slice(line: &str, start: usize, end: usize, lineno: usize) -> Result<&str> {
    let end = end.min(line.len());
    if start >= end {
        return Ok("");
    }
    line.get(start..end).ok_or_else(|| Error::Parse {
        line: lineno,
        message: "field boundary splits a multi-byte character".into(),
    })
}

fn parse_fixed_width<R: BufRead>(input: R, schema: &SchemaSet) -> Result<Microdata> {
    let (tag_start, tag_end) = schema.tag_span().expect("fixed-width schema has a tag span");
    let mut sink = Sink {
        schema,
        out: Microdata::default(),
        seen: HashSet::new(),
    };
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let kind = kind_of(schema, slice(line, tag_start, tag_end, lineno)?, lineno)?;
        let record = schema.record(kind);
        let required = record.required_width().max(tag_end);
        if line.len() < required || record.record_length.is_some_and(|n| line.len() > n) {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "wrong width {} for a {} record (expected {})",
                    line.len(),
                    if kind == RecordKind::Household { "household" } else { "person" },
                    record.record_length.unwrap_or(required)
                ),
            });
        }
        let raw = record
            .fields
            .iter()
            .map(|f| match f.location {
                Location::Span { start, width } => {
                    slice(line, start - 1, start - 1 + width, lineno).map(str::to_string)
                }
                Location::Column { .. } => unreachable!("validated layout"),
            })
            .collect::<Result<Vec<_>>>()?;
        sink.push(kind, raw, lineno)?;
    }
    Ok(sink.out)
}

fn parse_delimited<R: BufRead>(input: R, schema: &SchemaSet) -> Result<Microdata> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .from_reader(input);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        Error::Parse {
            line,
            message: e.to_string(),
        }
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    // empty input has no header row
    if headers.is_empty() {
        return Ok(Microdata::default());
    }
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not in header")))
    };
    let columns_of = |record: &RecordSchema| -> Result<Vec<usize>> {
        record
            .fields
            .iter()
            .map(|f| match &f.location {
                Location::Column { column: c } => column(c),
                Location::Span { .. } => unreachable!("validated layout"),
            })
            .collect()
    };
    let tag_col = match &schema.record_type {
        Location::Column { column: c } => column(c)?,
        Location::Span { .. } => unreachable!("validated layout"),
    };
    let household_cols = columns_of(&schema.household)?;
    let person_cols = columns_of(&schema.person)?;

    let mut sink = Sink {
        schema,
        out: Microdata::default(),
        seen: HashSet::new(),
    };
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let lineno = row.position().map_or(0, |p| p.line() as usize);
        let kind = kind_of(schema, &row[tag_col], lineno)?;
        let cols = match kind {
            RecordKind::Household => &household_cols,
            RecordKind::Person => &person_cols,
        };
        let raw = cols.iter().map(|&c| row[c].to_string()).collect();
        sink.push(kind, raw, lineno)?;
    }
    Ok(sink.out)
}

/// Parses one microdata stream. Blank lines in fixed-width input are skipped.
pub fn parse_microdata<R: BufRead>(input: R, schema: &SchemaSet) -> Result<Microdata> {
    match schema.layout {
        Layout::FixedWidth => parse_fixed_width(input, schema),
        Layout::Delimited => parse_delimited(input, schema),
    }
}

/// Renders one fixed-width line from per-field raw text. Text shorter than
/// its span is right-aligned; uncovered positions are spaces.
pub fn emit_fixed_width(schema: &SchemaSet, kind: RecordKind, raw: &[String]) -> Result<String> {
    let (tag_start, tag_end) = schema
        .tag_span()
        .ok_or_else(|| Error::Schema("emit requires a fixed-width layout".into()))?;
    let record = schema.record(kind);
    if raw.len() != record.fields.len() {
        return Err(Error::Schema(format!(
            "expected {} field values, got {}",
            record.fields.len(),
            raw.len()
        )));
    }
    let width = record
        .record_length
        .unwrap_or_else(|| record.required_width().max(tag_end));
    let mut line = vec![b' '; width];
    let tag = match kind {
        RecordKind::Household => &schema.household_tag,
        RecordKind::Person => &schema.person_tag,
    };
    let mut put = |start: usize, end: usize, text: &str, name: &str| -> Result<()> {
        let w = end - start;
        if text.len() > w || !text.is_ascii() {
            return Err(Error::Schema(format!("value `{text}` does not fit field `{name}`")));
        }
        line[end - text.len()..end].copy_from_slice(text.as_bytes());
        Ok(())
    };
    put(tag_start, tag_start + tag.len(), tag, "record type")?;
    for (field, text) in record.fields.iter().zip(raw) {
        if let Location::Span { start, width } = field.location {
            put(start - 1, start - 1 + width, text, &field.name)?;
        }
    }
    Ok(String::from_utf8(line).expect("ascii"))
}
