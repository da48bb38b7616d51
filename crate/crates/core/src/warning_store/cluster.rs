use std::collections::BTreeMap;

use super::record::{WarningId, WarningRecord};

/// Default line radius for co-location clustering.
pub const DEFAULT_CLUSTER_RADIUS: u32 = 10;

/// Groups warnings that are chained together by same-file pairs whose
/// start lines are at most `radius` apart.
///
/// Returns one cluster id per input record (aligned with `records`). Ids
/// are dense and numbered by first appearance in input order.
pub fn cluster_warnings(records: &[WarningRecord], radius: u32) -> Vec<u32> {
    let mut uf = UnionFind::new(records.len());
    let mut by_file: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_file.entry(r.file.as_str()).or_default().push(i);
    }
    for idx in by_file.values_mut() {
        idx.sort_by_key(|&i| (records[i].span.start_line, i));
        // After sorting, connectivity only needs neighbouring pairs.
        for w in idx.windows(2) {
            let (a, b) = (records[w[0]].span.start_line, records[w[1]].span.start_line);
            if b - a <= radius {
                uf.union(w[0], w[1]);
            }
        }
    }
    let mut dense: BTreeMap<usize, u32> = BTreeMap::new();
    (0..records.len())
        .map(|i| {
            let root = uf.find(i);
            let next = dense.len() as u32;
            *dense.entry(root).or_insert(next)
        })
        .collect()
}

/// Convenience: cluster ids keyed by warning id.
pub fn cluster_map(records: &[WarningRecord], radius: u32) -> BTreeMap<WarningId, u32> {
    records
        .iter()
        .zip(cluster_warnings(records, radius))
        .map(|(r, c)| (r.id, c))
        .collect()
}

/// Stores cluster ids on the records.
pub fn assign_clusters(records: &mut [WarningRecord], radius: u32) {
    let ids = cluster_warnings(records, radius);
    for (r, c) in records.iter_mut().zip(ids) {
        r.cluster_id = Some(c);
    }
}

/// Number of warnings in each record's cluster (1 when unclustered).
pub fn cluster_sizes(records: &[WarningRecord]) -> Vec<usize> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for c in records.iter().filter_map(|r| r.cluster_id) {
        *counts.entry(c).or_default() += 1;
    }
    records
        .iter()
        .map(|r| r.cluster_id.map_or(1, |c| counts[&c]))
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warning_store::record::{Level, Span};

    fn at(file: &str, line: u32) -> WarningRecord {
        let span = Span { start_line: line, start_col: 1, end_line: line, end_col: 5 };
        WarningRecord::new(Level::Warning, "UnsafeDataflow", None, "d", file, span, "")
    }

    #[test]
    fn adjacent_lines_share_cluster() {
        let recs = vec![at("a.rs", 10), at("a.rs", 12)];
        assert_eq!(cluster_warnings(&recs, 5), vec![0, 0]);
    }

    #[test]
    fn different_files_are_distinct() {
        let recs = vec![at("a.rs", 10), at("b.rs", 10)];
        assert_eq!(cluster_warnings(&recs, 5), vec![0, 1]);
    }

    #[test]
    fn chains_are_transitive() {
        let recs = vec![at("a.rs", 18), at("a.rs", 10), at("a.rs", 14)];
        assert_eq!(cluster_warnings(&recs, 5), vec![0, 0, 0]);
        assert_eq!(cluster_warnings(&recs, 3), vec![0, 1, 2]);
    }

    #[test]
    fn dense_ids_by_first_appearance() {
        let recs = vec![at("b.rs", 100), at("a.rs", 1), at("b.rs", 101), at("c.rs", 1)];
        assert_eq!(cluster_warnings(&recs, 0), vec![0, 1, 2, 3]);
        assert_eq!(cluster_warnings(&recs, 1), vec![0, 1, 0, 2]);
    }

    #[test]
    fn empty_and_sizes() {
        assert!(cluster_warnings(&[], 10).is_empty());
        let mut recs = vec![at("a.rs", 1), at("a.rs", 3), at("b.rs", 1)];
        assert_eq!(cluster_sizes(&recs), vec![1, 1, 1]);
        assign_clusters(&mut recs, 10);
        assert_eq!(cluster_sizes(&recs), vec![2, 2, 1]);
        let m = cluster_map(&recs, 10);
        assert_eq!(m[&recs[0].id], 0);
        assert_eq!(m[&recs[2].id], 1);
    }
}
