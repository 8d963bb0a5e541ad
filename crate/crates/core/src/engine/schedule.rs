//! Which generator subsets a family run visits.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::generators::GeneratorSet;

/// Largest set whose full power set may be scheduled.
pub const MAX_UNPRUNED_GENERATORS: usize = 30;
/// Bitmask width; the bound for pruned and explicit schedules.
pub const MAX_EXPLICIT_GENERATORS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every subset.
    All,
    /// Subsets containing circulators of at most one period.
    PeriodPruned,
    /// Exactly these masks.
    Explicit(Vec<u64>),
}

fn sort_masks(masks: &mut Vec<u64>) {
    masks.sort_unstable_by_key(|&m| (m.count_ones(), m));
    masks.dedup();
}

impl Schedule {
    /// Scheduled masks ordered by popcount, then value.
    pub fn masks(&self, set: &GeneratorSet) -> Result<Vec<u64>> {
        self.check(set)?;
        let mut masks = match self {
            Schedule::All => (0..=set.full_mask()).collect(),
            Schedule::PeriodPruned => pruned_subsets(set)?,
            Schedule::Explicit(m) => m.clone(),
        };
        sort_masks(&mut masks);
        Ok(masks)
    }

    /// Number of scheduled masks, computed without enumerating them.
    pub fn count(&self, set: &GeneratorSet) -> Result<u64> {
        self.check(set)?;
        match self {
            Schedule::All => Ok(1u64 << set.len()),
            Schedule::PeriodPruned => {
                let (free, groups) = period_groups(set);
                let mut per_group = 1u128;
                for g in groups.values() {
                    per_group += (1u128 << g.count_ones()) - 1;
                }
                let total = per_group
                    .checked_mul(1u128 << free.count_ones())
                    .filter(|&t| t <= u64::MAX as u128)
                    .ok_or_else(|| Error::Overflow("pruned subset count".into()))?;
                Ok(total as u64)
            }
            Schedule::Explicit(m) => {
                let mut m = m.clone();
                sort_masks(&mut m);
                Ok(m.len() as u64)
            }
        }
    }

    fn check(&self, set: &GeneratorSet) -> Result<()> {
        let limit = match self {
            Schedule::All => MAX_UNPRUNED_GENERATORS,
            _ => MAX_EXPLICIT_GENERATORS,
        };
        if set.len() > limit {
            return Err(Error::TooManyGenerators { got: set.len(), limit });
        }
        if let Schedule::Explicit(masks) = self {
            let full = set.full_mask();
            if let Some(m) = masks.iter().find(|&&m| m & !full != 0) {
                return Err(Error::InvalidArgument(format!("mask {m:#x} names generators outside the set")));
            }
        }
        Ok(())
    }
}

/// Mask of generators without a period, and one mask per period.
fn period_groups(set: &GeneratorSet) -> (u64, BTreeMap<u32, u64>) {
    let mut free = 0u64;
    let mut groups: BTreeMap<u32, u64> = BTreeMap::new();
    for (i, g) in set.generators().iter().enumerate() {
        match g.period {
            Some(p) => *groups.entry(p).or_default() |= 1 << i,
            None => free |= 1 << i,
        }
    }
    (free, groups)
}

/// Iterates all submasks of `mask`, including 0 and `mask` itself.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut cur = Some(mask);
    std::iter::from_fn(move || {
        let m = cur?;
        cur = if m == 0 { None } else { Some((m - 1) & mask) };
        Some(m)
    })
}

/// All subsets with circulators from at most one period group.
pub fn pruned_subsets(set: &GeneratorSet) -> Result<Vec<u64>> {
    let count = Schedule::PeriodPruned.count(set)?;
    let (free, groups) = period_groups(set);
    let mut out = Vec::with_capacity(usize::try_from(count).map_err(|_| Error::Overflow("subset list".into()))?);
    for a in submasks(free) {
        out.push(a);
        for &g in groups.values() {
            out.extend(submasks(g).filter(|&b| b != 0).map(|b| a | b));
        }
    }
    Ok(out)
}

/// `(2^{3n+1} - 2^{2n+1}) tau + 2^{2n+1}`, the pruned subset count of the
/// standard generator set.
pub fn pruned_subset_count(n: u32, tau: u32) -> Result<u64> {
    if n == 0 || tau == 0 {
        return Err(Error::InvalidArgument("n and tau must be positive".into()));
    }
    let overflow = || Error::Overflow("pruned subset count".into());
    let pow = |e: u32| 1u64.checked_shl(e).filter(|_| e < 64).ok_or_else(overflow);
    let e3 = n.checked_mul(3).and_then(|v| v.checked_add(1)).ok_or_else(overflow)?;
    let e2 = n.checked_mul(2).and_then(|v| v.checked_add(1)).ok_or_else(overflow)?;
    let a = pow(e3)?;
    let b = pow(e2)?;
    (a - b).checked_mul(u64::from(tau)).and_then(|v| v.checked_add(b)).ok_or_else(overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::standard_generators;

    #[test]
    fn pruning_formula() {
        assert_eq!(pruned_subset_count(4, 4).unwrap(), 31232);
        assert_eq!(pruned_subset_count(4, 1).unwrap(), 8192);
        assert_eq!(pruned_subset_count(2, 3).unwrap(), 320);
        assert!(pruned_subset_count(30, 4).is_err());
        assert!(pruned_subset_count(0, 4).is_err());
    }

    #[test]
    fn enumerator_matches_formula() {
        for (n, tau) in [(2usize, 3u32), (2, 1), (3, 2), (4, 4)] {
            let set = standard_generators(n, tau).unwrap();
            let masks = Schedule::PeriodPruned.masks(&set).unwrap();
            let expected = pruned_subset_count(n as u32, tau).unwrap();
            assert_eq!(masks.len() as u64, expected);
            assert_eq!(Schedule::PeriodPruned.count(&set).unwrap(), expected);
        }
    }

    #[test]
    fn enumerator_matches_filter_over_power_set() {
        let set = standard_generators(2, 3).unwrap();
        let (_, groups) = period_groups(&set);
        let brute: Vec<u64> = (0..=set.full_mask())
            .filter(|m| groups.values().filter(|&&g| g & m != 0).count() <= 1)
            .collect();
        let mut fast = Schedule::PeriodPruned.masks(&set).unwrap();
        fast.sort_unstable();
        assert_eq!(fast, brute);
    }

    #[test]
    fn limits() {
        let set = standard_generators(4, 6).unwrap();
        assert_eq!(set.len(), 33);
        assert!(matches!(Schedule::All.masks(&set), Err(Error::TooManyGenerators { limit: 30, .. })));
        assert!(Schedule::PeriodPruned.count(&set).is_ok());
        let small = standard_generators(1, 1).unwrap();
        assert!(Schedule::Explicit(vec![0b100]).masks(&small).is_err());
        assert_eq!(Schedule::Explicit(vec![3, 1, 3, 0]).masks(&small).unwrap(), vec![0, 1, 3]);
    }
}
