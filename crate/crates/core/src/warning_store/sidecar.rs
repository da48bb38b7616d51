//! Label, split and warning-store files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{Label, WarningId, WarningRecord};
use super::split::{Split, SplitAssignment, SplitRatios};
use crate::jsonl::{read_jsonl, write_jsonl, LineError};

/// One row of the label sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub warning_id: WarningId,
    pub label: Label,
    #[serde(default)]
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SidecarError {
    #[error(transparent)]
    Line(#[from] LineError),
    #[error("conflicting labels for warning {0}")]
    ConflictingLabel(WarningId),
    #[error("split file header is missing or malformed: {0}")]
    Header(String),
    #[error("warning {0} appears more than once in the split file")]
    DuplicateSplitEntry(WarningId),
}

pub fn read_labels(text: &str) -> Result<Vec<LabelEntry>, SidecarError> {
    Ok(read_jsonl(text)?)
}

pub fn write_labels(entries: &[LabelEntry]) -> String {
    write_jsonl(entries)
}

/// Attaches labels by warning id and returns how many records received one.
/// Entries for ids absent from `records` are ignored.
pub fn attach_labels(records: &mut [WarningRecord], entries: &[LabelEntry]) -> Result<usize, SidecarError> {
    let mut by_id: BTreeMap<WarningId, Label> = BTreeMap::new();
    for e in entries {
        if let Some(prev) = by_id.insert(e.warning_id, e.label) {
            if prev != e.label {
                return Err(SidecarError::ConflictingLabel(e.warning_id));
            }
        }
    }
    let mut attached = 0;
    for r in records.iter_mut() {
        if let Some(&l) = by_id.get(&r.id) {
            r.label = Some(l);
            attached += 1;
        }
    }
    Ok(attached)
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitHeader {
    seed: u64,
    ratios: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct SplitRow {
    warning_id: WarningId,
    split: Split,
}

/// Header line `{"seed":..,"ratios":[..]}` followed by one row per warning, sorted by id.
pub fn write_split_file(a: &SplitAssignment) -> String {
    let mut out = write_jsonl([SplitHeader { seed: a.seed, ratios: a.ratios.as_array() }]);
    out.push_str(&write_jsonl(
        a.assignment.iter().map(|(&warning_id, &split)| SplitRow { warning_id, split }),
    ));
    out
}

pub fn read_split_file(text: &str) -> Result<SplitAssignment, SidecarError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| SidecarError::Header("empty file".into()))?;
    let header: SplitHeader =
        serde_json::from_str(header).map_err(|e| SidecarError::Header(e.to_string()))?;
    let mut assignment = BTreeMap::new();
    for (i, line) in lines {
        let row: SplitRow =
            serde_json::from_str(line).map_err(|e| LineError::new(i + 1, e.to_string()))?;
        if assignment.insert(row.warning_id, row.split).is_some() {
            return Err(SidecarError::DuplicateSplitEntry(row.warning_id));
        }
    }
    let [train, val, test] = header.ratios;
    Ok(SplitAssignment {
        seed: header.seed,
        ratios: SplitRatios { train, val, test },
        assignment,
    })
}

/// The ingested warning store: one full record (with label and cluster) per line.
pub fn write_warnings(records: &[WarningRecord]) -> String {
    write_jsonl(records)
}

pub fn read_warnings(text: &str) -> Result<Vec<WarningRecord>, SidecarError> {
    Ok(read_jsonl(text)?)
}
