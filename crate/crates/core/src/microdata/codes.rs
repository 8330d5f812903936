use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EDUCATION_LABELS: [&str; 16] = [
    "No schooling completed",
    "Nursery school to 4th grade",
    "5th grade or 6th grade",
    "7th grade or 8th grade",
    "9th grade",
    "10th grade",
    "11th grade",
    "12th grade, no diploma",
    "High school graduate",
    "Some college, but less than 1 year",
    "One or more years of college, no degree",
    "Associate degree",
    "Bachelor's degree",
    "Master's degree",
    "Professional degree",
    "Doctorate degree",
];

/// Educational attainment code, 1 (no schooling) through 16 (doctorate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Education(u8);

impl Education {
    pub fn new(code: i64) -> Result<Self> {
        if (1..=16).contains(&code) {
            Ok(Self(code as u8))
        } else {
            Err(Error::EducationOutOfRange(code))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn label(self) -> &'static str {
        EDUCATION_LABELS[usize::from(self.0) - 1]
    }

    pub fn from_label(label: &str) -> Option<Self> {
        EDUCATION_LABELS
            .iter()
            .position(|l| *l == label)
            .map(|i| Self(i as u8 + 1))
    }

    pub fn all() -> impl Iterator<Item = Self> {
        (1..=16).map(Self)
    }
}

impl TryFrom<i64> for Education {
    type Error = Error;

    fn try_from(code: i64) -> Result<Self> {
        Self::new(code)
    }
}

impl From<Education> for i64 {
    fn from(e: Education) -> i64 {
        i64::from(e.0)
    }
}

impl fmt::Display for Education {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lower edges of the eleven income bins in dollars, plus the closed upper
/// edge of the last bin.
pub const INCOME_EDGES: [i64; 12] = [
    -10_000, 0, 10_000, 20_000, 40_000, 60_000, 80_000, 100_000, 200_000, 300_000, 400_000,
    720_000,
];

pub const INCOME_BIN_COUNT: u8 = 11;

/// Income bin 1..=11. Bins are left-closed and right-open except the top bin,
/// which includes $720,000.
pub fn income_bin(dollars: i64) -> Result<u8> {
    let (lo, hi) = (INCOME_EDGES[0], INCOME_EDGES[11]);
    if dollars < lo || dollars > hi {
        return Err(Error::IncomeOutOfRange(dollars));
    }
    let bin = INCOME_EDGES[1..11].partition_point(|&edge| edge <= dollars);
    Ok(bin as u8 + 1)
}

/// Interval label in units of $10,000, e.g. `[4; 6)`.
pub fn income_bin_label(bin: u8) -> String {
    assert!((1..=INCOME_BIN_COUNT).contains(&bin), "income bin {bin} out of range");
    let i = usize::from(bin) - 1;
    let lo = INCOME_EDGES[i] / 10_000;
    let hi = INCOME_EDGES[i + 1] / 10_000;
    let close = if bin == INCOME_BIN_COUNT { ']' } else { ')' };
    format!("[{lo}; {hi}{close}")
}
