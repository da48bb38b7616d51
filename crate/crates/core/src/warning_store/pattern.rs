use serde::{Deserialize, Serialize};

use super::record::WarningRecord;

/// Unsafe-code bug class a warning points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugPattern {
    PanicSafety,
    HigherOrderInvariant,
    SendSyncVariance,
    Unknown,
}

impl BugPattern {
    pub const ALL: [BugPattern; 4] = [
        BugPattern::PanicSafety,
        BugPattern::HigherOrderInvariant,
        BugPattern::SendSyncVariance,
        BugPattern::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BugPattern::PanicSafety => "panic_safety",
            BugPattern::HigherOrderInvariant => "higher_order_invariant",
            BugPattern::SendSyncVariance => "send_sync_variance",
            BugPattern::Unknown => "unknown",
        }
    }
}

/// Lifetime-bypass markers whose invariant can be left broken by an unwinding panic.
const PANIC_SAFETY_MARKERS: &[&str] = &[
    "VecSetLen",
    "ReadFlow",
    "CopyFlow",
    "set_len",
    "ptr::read",
    ".read()",
    "copy_nonoverlapping",
    "ptr::copy",
    "mem::uninitialized",
    "assume_init",
];

/// Bypasses that trust caller-supplied code to behave consistently.
const HIGHER_ORDER_MARKERS: &[&str] = &[
    "Transmute",
    "WriteFlow",
    "PtrAsRef",
    "SliceUnchecked",
    "SliceFromRaw",
    "VecFromRaw",
    "transmute",
    "from_raw_parts",
    "get_unchecked",
    "ptr::write",
    "Borrow",
];

/// Classifies a warning into a bug pattern from its analyzer, op type,
/// description and snippet.
pub fn bug_pattern(record: &WarningRecord) -> BugPattern {
    let analyzer = record.analyzer.as_str();
    if analyzer.contains("SendSync") {
        return BugPattern::SendSyncVariance;
    }
    if analyzer == "UnsafeDestructor" {
        return BugPattern::HigherOrderInvariant;
    }
    let haystacks = [
        record.op_type.as_deref().unwrap_or(""),
        record.description.as_str(),
        record.code_snippet.as_str(),
    ];
    let has = |markers: &[&str]| haystacks.iter().any(|h| markers.iter().any(|m| h.contains(m)));
    if has(PANIC_SAFETY_MARKERS) {
        BugPattern::PanicSafety
    } else if has(HIGHER_ORDER_MARKERS) {
        BugPattern::HigherOrderInvariant
    } else {
        BugPattern::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warning_store::record::{Level, Span};

    fn rec(analyzer: &str, op: Option<&str>, snippet: &str) -> WarningRecord {
        let span = Span { start_line: 1, start_col: 1, end_line: 1, end_col: 1 };
        WarningRecord::new(Level::Warning, analyzer, op.map(String::from), "desc", "f.rs", span, snippet)
    }

    #[test]
    fn classification_rules() {
        assert_eq!(bug_pattern(&rec("SendSyncVariance", None, "")), BugPattern::SendSyncVariance);
        assert_eq!(bug_pattern(&rec("UnsafeDestructor", None, "")), BugPattern::HigherOrderInvariant);
        assert_eq!(
            bug_pattern(&rec("UnsafeDataflow", None, "unsafe { v.set_len(0); }")),
            BugPattern::PanicSafety
        );
        assert_eq!(bug_pattern(&rec("UnsafeDataflow", Some("Transmute"), "")), BugPattern::HigherOrderInvariant);
        assert_eq!(bug_pattern(&rec("UnsafeDataflow", None, "let x = 1;")), BugPattern::Unknown);
    }
}
