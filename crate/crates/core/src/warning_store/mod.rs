//! Analyzer report ingestion, warning identity, labels, clustering and
//! stratified splitting.

mod cluster;
mod pattern;
mod record;
mod report;
mod sidecar;
mod split;

pub use cluster::{assign_clusters, cluster_map, cluster_sizes, cluster_warnings, DEFAULT_CLUSTER_RADIUS};
pub use pattern::{bug_pattern, BugPattern};
pub use record::{Label, Level, ParseIdError, Span, WarningId, WarningRecord};
pub use report::{parse_report, serialize_report, SchemaError, REPORT_KEYS};
pub use sidecar::{
    attach_labels, read_labels, read_split_file, read_warnings, write_labels, write_split_file,
    write_warnings, LabelEntry, SidecarError,
};
pub use split::{
    largest_remainder, split_cell_counts, stratified_split, Split, SplitAssignment, SplitError,
    SplitRatios,
};

/// Labeled records together with their split assignment.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<WarningRecord>,
    pub splits: SplitAssignment,
}

impl Dataset {
    /// Splits `records` (all of which must be labeled) with the given ratios and seed.
    pub fn split(records: Vec<WarningRecord>, ratios: SplitRatios, seed: u64) -> Result<Self, SplitError> {
        let splits = stratified_split(&records, ratios, seed)?;
        Ok(Self { records, splits })
    }

    pub fn records_in(&self, split: Split) -> Vec<&WarningRecord> {
        self.splits.select(&self.records, split)
    }
}
