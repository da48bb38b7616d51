//! Stratified train/validation/test splitting.
//!
//! Split sizes are apportioned from the total by largest remainder, then
//! the positive count of each split is apportioned from `size * global
//! positive fraction`, again by largest remainder. The second step keeps
//! every split within one record of the global class balance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{Label, WarningId, WarningRecord};
use crate::hash::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { train: 0.70, val: 0.15, test: 0.15 }
    }
}

impl SplitRatios {
    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }

    pub fn validate(&self) -> Result<(), SplitError> {
        let r = self.as_array();
        if r.iter().any(|&x| !x.is_finite() || x <= 0.0) {
            return Err(SplitError::Ratio(format!("every ratio must be > 0, got {r:?}")));
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SplitError::Ratio(format!("ratios sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("unlabeled records cannot be split: {}", ids_list(.0))]
    Unlabeled(Vec<WarningId>),
    #[error("invalid split ratios: {0}")]
    Ratio(String),
    #[error("duplicate warning id {0}; deduplicate before splitting")]
    DuplicateId(WarningId),
}

fn ids_list(ids: &[WarningId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Assignment of every labeled record to exactly one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub seed: u64,
    pub ratios: SplitRatios,
    pub assignment: BTreeMap<WarningId, Split>,
}

impl SplitAssignment {
    pub fn get(&self, id: WarningId) -> Option<Split> {
        self.assignment.get(&id).copied()
    }

    pub fn count(&self, split: Split) -> usize {
        self.assignment.values().filter(|&&s| s == split).count()
    }

    /// Records of `records` assigned to `split`, in input order.
    pub fn select<'a>(&self, records: &'a [WarningRecord], split: Split) -> Vec<&'a WarningRecord> {
        records.iter().filter(|r| self.get(r.id) == Some(split)).collect()
    }
}

/// Largest-remainder apportionment of `total` units over `weights`
/// (which need not be normalised). Ties go to the lower index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    apportion_exact(total, &quotas)
}

/// Per-split (size, positives) cell counts.
pub fn split_cell_counts(total: usize, positives: usize, ratios: &SplitRatios) -> [(usize, usize); 3] {
    let mut sizes = largest_remainder(total, &ratios.as_array());
    // Guarantee nonempty splits whenever there are enough records.
    if total >= 3 {
        for i in 0..3 {
            if sizes[i] == 0 {
                let donor = (0..3).max_by_key(|&j| (sizes[j], std::cmp::Reverse(j))).unwrap();
                sizes[donor] -= 1;
                sizes[i] += 1;
            }
        }
    }
    let frac = if total == 0 { 0.0 } else { positives as f64 / total as f64 };
    let pos_targets: Vec<f64> = sizes.iter().map(|&s| s as f64 * frac).collect();
    let pos = apportion_exact(positives, &pos_targets);
    [(sizes[0], pos[0]), (sizes[1], pos[1]), (sizes[2], pos[2])]
}

/// Largest remainder over explicit quotas that already sum to `total`.
/// Ties go to the lower index.
fn apportion_exact(total: usize, quotas: &[f64]) -> Vec<usize> {
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// Stratified split of labeled records.
///
/// Deterministic in (`records` as a set, `ratios`, `seed`): records are
/// ordered by id before the seeded per-class shuffle, so input order does
/// not matter.
pub fn stratified_split(
    records: &[WarningRecord],
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    ratios.validate()?;
    let unlabeled: Vec<WarningId> = records.iter().filter(|r| r.label.is_none()).map(|r| r.id).collect();
    if !unlabeled.is_empty() {
        return Err(SplitError::Unlabeled(unlabeled));
    }
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.id) {
            return Err(SplitError::DuplicateId(r.id));
        }
    }

    let mut pos: Vec<WarningId> = records
        .iter()
        .filter(|r| r.label == Some(Label::TruePositive))
        .map(|r| r.id)
        .collect();
    let mut neg: Vec<WarningId> = records
        .iter()
        .filter(|r| r.label == Some(Label::FalsePositive))
        .map(|r| r.id)
        .collect();
    pos.sort_unstable();
    neg.sort_unstable();
    pos.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1])));
    neg.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0])));

    let cells = split_cell_counts(records.len(), pos.len(), &ratios);
    let mut assignment = BTreeMap::new();
    let (mut pi, mut ni) = (0usize, 0usize);
    for (split, &(size, npos)) in Split::ALL.iter().zip(cells.iter()) {
        for id in &pos[pi..pi + npos] {
            assignment.insert(*id, *split);
        }
        pi += npos;
        let nneg = size - npos;
        for id in &neg[ni..ni + nneg] {
            assignment.insert(*id, *split);
        }
        ni += nneg;
    }
    debug_assert_eq!(pi, pos.len());
    debug_assert_eq!(ni, neg.len());
    Ok(SplitAssignment { seed, ratios, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warning_store::record::{Level, Span};

    pub(crate) fn labeled(n: usize, positives: usize) -> Vec<WarningRecord> {
        (0..n)
            .map(|i| {
                let span = Span { start_line: i as u32 + 1, start_col: 1, end_line: i as u32 + 1, end_col: 2 };
                let mut r = WarningRecord::new(Level::Warning, "UnsafeDataflow", None, "d", "p-1.0.0/src/lib.rs", span, "");
                r.label = Some(if i < positives { Label::TruePositive } else { Label::FalsePositive });
                r
            })
            .collect()
    }

    fn positives_in(records: &[WarningRecord], a: &SplitAssignment, s: Split) -> usize {
        a.select(records, s).iter().filter(|r| r.label == Some(Label::TruePositive)).count()
    }

    #[test]
    fn full_corpus_test_split_is_732() {
        let recs = labeled(4879, 1247);
        let a = stratified_split(&recs, SplitRatios::default(), 42).unwrap();
        assert_eq!(a.count(Split::Test), 732);
        assert_eq!(a.count(Split::Val), 732);
        assert_eq!(a.count(Split::Train), 3415);
        let global = 1247.0 / 4879.0;
        for s in Split::ALL {
            let size = a.count(s) as f64;
            let p = positives_in(&recs, &a, s) as f64;
            assert!((p - size * global).abs() <= 1.0, "{s}: {p} vs {}", size * global);
        }
    }

    #[test]
    fn balanced_ten_records_split_near_half_positive() {
        let recs = labeled(10, 5);
        let ratios = SplitRatios { train: 0.5, val: 0.25, test: 0.25 };
        for seed in 0..20 {
            let a = stratified_split(&recs, ratios, seed).unwrap();
            for s in Split::ALL {
                let size = a.count(s);
                let p = positives_in(&recs, &a, s);
                assert!(2 * p == size || (2 * p).abs_diff(size) <= 1, "seed {seed} split {s}: {p}/{size}");
            }
            assert_eq!(a.count(Split::Train), 5);
        }
    }

    #[test]
    fn deterministic_and_order_independent() {
        let recs = labeled(200, 40);
        let a = stratified_split(&recs, SplitRatios::default(), 9).unwrap();
        let b = stratified_split(&recs, SplitRatios::default(), 9).unwrap();
        assert_eq!(a, b);
        let mut rev = recs.clone();
        rev.reverse();
        let c = stratified_split(&rev, SplitRatios::default(), 9).unwrap();
        assert_eq!(a, c);
        let d = stratified_split(&recs, SplitRatios::default(), 10).unwrap();
        assert_ne!(a.assignment, d.assignment);
    }

    #[test]
    fn errors() {
        let mut recs = labeled(5, 2);
        recs[3].label = None;
        let id = recs[3].id;
        assert_eq!(
            stratified_split(&recs, SplitRatios::default(), 0),
            Err(SplitError::Unlabeled(vec![id]))
        );
        let recs = labeled(5, 2);
        let bad = SplitRatios { train: 0.7, val: 0.2, test: 0.2 };
        assert!(matches!(stratified_split(&recs, bad, 0), Err(SplitError::Ratio(_))));
        let zero = SplitRatios { train: 1.0, val: 0.0, test: 0.0 };
        assert!(matches!(stratified_split(&recs, zero, 0), Err(SplitError::Ratio(_))));
        let mut dup = labeled(4, 2);
        dup.push(dup[0].clone());
        assert!(matches!(stratified_split(&dup, SplitRatios::default(), 0), Err(SplitError::DuplicateId(_))));
    }

    #[test]
    fn largest_remainder_ties_go_low() {
        assert_eq!(largest_remainder(4879, &[0.7, 0.15, 0.15]), vec![3415, 732, 732]);
        assert_eq!(largest_remainder(3, &[0.7, 0.15, 0.15]), vec![2, 1, 0]);
        assert_eq!(largest_remainder(0, &[0.5, 0.5]), vec![0, 0]);
    }

    #[test]
    fn small_totals_are_nonempty() {
        let cells = split_cell_counts(3, 1, &SplitRatios::default());
        assert!(cells.iter().all(|&(s, _)| s == 1));
    }
}
