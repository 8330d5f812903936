use std::fmt;

use serde::{Deserialize, Serialize};

use crate::microdata::FamilyUnit;

/// A numerically coded attribute of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyAttribute {
    FatherAge,
    MotherAge,
    FatherEducation,
    MotherEducation,
    /// Father's total income in dollars.
    FatherIncome,
    FatherAncestry,
    MotherAncestry,
    FatherClassOfWorker,
    MotherClassOfWorker,
    FatherRace,
    MotherRace,
    HomeOwnership,
    BuildingType,
    Vehicles,
    Commercial,
    ChildrenCount,
}

impl FamilyAttribute {
    pub const ALL: [FamilyAttribute; 16] = [
        Self::FatherAge,
        Self::MotherAge,
        Self::FatherEducation,
        Self::MotherEducation,
        Self::FatherIncome,
        Self::FatherAncestry,
        Self::MotherAncestry,
        Self::FatherClassOfWorker,
        Self::MotherClassOfWorker,
        Self::FatherRace,
        Self::MotherRace,
        Self::HomeOwnership,
        Self::BuildingType,
        Self::Vehicles,
        Self::Commercial,
        Self::ChildrenCount,
    ];

    pub fn value(self, family: &FamilyUnit) -> Option<i64> {
        let (f, m, h) = (&family.father, &family.mother, &family.household);
        match self {
            Self::FatherAge => f.age.map(i64::from),
            Self::MotherAge => m.age.map(i64::from),
            Self::FatherEducation => f.education.map(i64::from),
            Self::MotherEducation => m.education.map(i64::from),
            Self::FatherIncome => f.income,
            Self::FatherAncestry => f.ancestry,
            Self::MotherAncestry => m.ancestry,
            Self::FatherClassOfWorker => f.class_of_worker,
            Self::MotherClassOfWorker => m.class_of_worker,
            Self::FatherRace => f.race,
            Self::MotherRace => m.race,
            Self::HomeOwnership => h.home_ownership,
            Self::BuildingType => h.building_type,
            Self::Vehicles => h.vehicles,
            Self::Commercial => h.commercial.map(i64::from),
            Self::ChildrenCount => Some(family.children.len() as i64),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FatherAge => "father_age",
            Self::MotherAge => "mother_age",
            Self::FatherEducation => "father_education",
            Self::MotherEducation => "mother_education",
            Self::FatherIncome => "father_income",
            Self::FatherAncestry => "father_ancestry",
            Self::MotherAncestry => "mother_ancestry",
            Self::FatherClassOfWorker => "father_class_of_worker",
            Self::MotherClassOfWorker => "mother_class_of_worker",
            Self::FatherRace => "father_race",
            Self::MotherRace => "mother_race",
            Self::HomeOwnership => "home_ownership",
            Self::BuildingType => "building_type",
            Self::Vehicles => "vehicles",
            Self::Commercial => "commercial",
            Self::ChildrenCount => "children_count",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    /// Center values as displayed in the center table: income in units of
    /// $10,000 to one decimal, everything else rounded to an integer.
    pub fn display_center(self, value: f64) -> String {
        match self {
            Self::FatherIncome => format!("{:.1}", value / 10_000.0),
            _ => format!("{}", value.round() as i64),
        }
    }
}

impl fmt::Display for FamilyAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
