use std::collections::BTreeMap;

use serde::Serialize;

use super::ranges::InvariantRangeSet;
use crate::microdata::FamilyUnit;

/// Per-cluster members of N2 inside that cluster's invariant ranges.
/// A family may belong to several prototypes when ranges overlap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrototypeSet {
    /// `members[k]`: indices into the family list, ascending.
    pub members: Vec<Vec<usize>>,
}

impl PrototypeSet {
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Number of N2 families by how many prototypes contain them.
    pub fn multiplicity(&self, n2: &[usize]) -> BTreeMap<usize, usize> {
        let mut per_family: BTreeMap<usize, usize> = n2.iter().map(|&i| (i, 0)).collect();
        for m in &self.members {
            for i in m {
                *per_family.get_mut(i).expect("prototype member comes from N2") += 1;
            }
        }
        let mut hist = BTreeMap::new();
        for (_, count) in per_family {
            *hist.entry(count).or_insert(0) += 1;
        }
        hist
    }
}

/// Prototype k = every N2 family whose invariant attributes all fall inside
/// cluster k's ranges.
pub fn build_prototypes(families: &[FamilyUnit], n2: &[usize], ranges: &InvariantRangeSet) -> PrototypeSet {
    let members = (0..ranges.n_clusters())
        .map(|k| {
            n2.iter()
                .copied()
                .filter(|&i| ranges.admits(k, &families[i]))
                .collect()
        })
        .collect();
    PrototypeSet { members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::attribute::FamilyAttribute;
    use crate::search::ranges::IntRange;
    use crate::search::test_support::family;

    fn paper_ranges() -> InvariantRangeSet {
        InvariantRangeSet {
            attributes: vec![FamilyAttribute::FatherAge, FamilyAttribute::MotherAge],
            fraction: 0.8,
            ranges: vec![
                vec![IntRange::new(30, 34), IntRange::new(28, 32)],
                vec![IntRange::new(27, 30), IntRange::new(24, 31)],
                vec![IntRange::new(32, 36), IntRange::new(29, 34)],
            ],
            series: vec![],
        }
    }

    #[test]
    fn empty_n2_gives_empty_prototypes() {
        let p = build_prototypes(&[], &[], &paper_ranges());
        assert_eq!(p.sizes(), vec![0, 0, 0]);
    }

    #[test]
    fn containment_and_overlap() {
        let fams = vec![family(31, 29, &[]), family(33, 30, &[]), family(45, 40, &[]), family(30, 29, &[])];
        let p = build_prototypes(&fams, &[0, 1, 2, 3], &paper_ranges());
        assert_eq!(p.members[0], vec![0, 1, 3]);
        assert_eq!(p.members[1], vec![3]);
        assert_eq!(p.members[2], vec![1]);
        let mult = p.multiplicity(&[0, 1, 2, 3]);
        assert_eq!(mult, [(0, 1), (1, 1), (2, 2)].into());
    }
}
