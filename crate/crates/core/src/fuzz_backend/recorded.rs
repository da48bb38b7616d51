use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::outcome::{FuzzBackend, FuzzError, FuzzOutcome, FuzzOutcomeKind, FuzzRequest};
use crate::jsonl::{read_jsonl, write_jsonl, LineError};
use crate::warning_store::WarningId;

/// One line of the recorded-outcomes file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedOutcome {
    pub warning_id: WarningId,
    pub kind: FuzzOutcomeKind,
    pub elapsed: f64,
    #[serde(default)]
    pub detail: String,
}

/// Replays previously stored outcomes verbatim.
#[derive(Debug, Clone, Default)]
pub struct RecordedBackend {
    outcomes: BTreeMap<WarningId, FuzzOutcome>,
}

impl RecordedBackend {
    pub fn from_rows(rows: Vec<RecordedOutcome>) -> Self {
        let outcomes = rows
            .into_iter()
            .map(|r| (r.warning_id, FuzzOutcome::new(r.kind, r.elapsed, r.detail)))
            .collect();
        Self { outcomes }
    }

    pub fn parse(text: &str) -> Result<Self, LineError> {
        Ok(Self::from_rows(read_jsonl(text)?))
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Ids from `ids` that have no recording.
    pub fn missing<'a>(&self, ids: impl IntoIterator<Item = &'a WarningId>) -> Vec<WarningId> {
        ids.into_iter().filter(|id| !self.outcomes.contains_key(id)).copied().collect()
    }
}

pub fn write_recorded(rows: &[RecordedOutcome]) -> String {
    write_jsonl(rows)
}

impl FuzzBackend for RecordedBackend {
    fn run(&self, request: &FuzzRequest<'_>, _budget_secs: f64) -> Result<FuzzOutcome, FuzzError> {
        self.outcomes
            .get(&request.id)
            .cloned()
            .ok_or_else(|| FuzzError::MissingRecording(vec![request.id]))
    }
}
