use std::collections::HashMap;

use super::records::{HouseholdRecord, Microdata, PersonRecord, Sex};
use super::schema::RelationshipCodes;

/// A householder and spouse with their natural-born children.
///
/// When the two adults have opposite recorded sexes the man is `father` and
/// the woman `mother`; otherwise the householder fills `father` and the
/// spouse `mother`, and the complete-family predicate excludes the unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyUnit {
    pub household: HouseholdRecord,
    pub father: PersonRecord,
    pub mother: PersonRecord,
    pub children: Vec<PersonRecord>,
}

impl FamilyUnit {
    pub fn id(&self) -> &str {
        &self.household.id
    }

    /// Both parents present with sexes recorded as male and female.
    pub fn is_complete(&self) -> bool {
        self.father.sex == Some(Sex::Male) && self.mother.sex == Some(Sex::Female)
    }
}

/// Builds one family per household that has both a householder and a spouse.
/// Households lacking either are dropped; persons without a matching
/// household are ignored. Subfamilies are not modeled.
pub fn derive_families(data: Microdata, codes: &RelationshipCodes) -> Vec<FamilyUnit> {
    let mut by_household: HashMap<String, Vec<PersonRecord>> = HashMap::new();
    for p in data.persons {
        by_household.entry(p.household_id.clone()).or_default().push(p);
    }
    let mut families = Vec::new();
    for household in data.households {
        let Some(members) = by_household.remove(&household.id) else {
            continue;
        };
        let mut householder = None;
        let mut spouse = None;
        let mut children = Vec::new();
        for p in members {
            match p.relationship {
                Some(r) if r == codes.householder && householder.is_none() => householder = Some(p),
                Some(r) if r == codes.spouse && spouse.is_none() => spouse = Some(p),
                Some(r) if r == codes.natural_child => children.push(p),
                _ => {}
            }
        }
        let (Some(head), Some(spouse)) = (householder, spouse) else {
            continue;
        };
        let (father, mother) = if head.sex == Some(Sex::Female) && spouse.sex == Some(Sex::Male) {
            (spouse, head)
        } else {
            (head, spouse)
        };
        families.push(FamilyUnit {
            household,
            father,
            mother,
            children,
        });
    }
    families
}
