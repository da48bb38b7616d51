//! The analyzer's JSON report format: an array of flat warning objects.

use serde_json::{Map, Value};

use super::record::{Level, Span, WarningRecord};

/// Keys every report object carries, in canonical order.
pub const REPORT_KEYS: [&str; 10] = [
    "level",
    "analyzer",
    "op_type",
    "description",
    "file",
    "start_line",
    "start_col",
    "end_line",
    "end_col",
    "code_snippet",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("report is not valid JSON: {0}")]
    Malformed(String),
    #[error("report must be a JSON array of objects")]
    NotAnArray,
    #[error("report entry {index}: field `{field}` {problem}")]
    Field {
        index: usize,
        field: String,
        problem: String,
    },
}

impl SchemaError {
    fn field(index: usize, field: &str, problem: impl Into<String>) -> Self {
        SchemaError::Field {
            index,
            field: field.to_string(),
            problem: problem.into(),
        }
    }
}

/// Parses a report file into records with ids assigned and labels unset.
/// Input order is preserved.
pub fn parse_report(bytes: &[u8]) -> Result<Vec<WarningRecord>, SchemaError> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| SchemaError::Malformed(e.to_string()))?;
    let Value::Array(items) = value else {
        return Err(SchemaError::NotAnArray);
    };
    items
        .iter()
        .enumerate()
        .map(|(index, item)| parse_entry(index, item))
        .collect()
}

fn parse_entry(index: usize, item: &Value) -> Result<WarningRecord, SchemaError> {
    let Value::Object(obj) = item else {
        return Err(SchemaError::field(index, "<entry>", "is not an object"));
    };
    // Report fields in canonical order so the first problem is deterministic.
    for key in REPORT_KEYS {
        if !obj.contains_key(key) {
            return Err(SchemaError::field(index, key, "is missing"));
        }
    }
    if let Some(extra) = obj.keys().find(|k| !REPORT_KEYS.contains(&k.as_str())) {
        return Err(SchemaError::field(index, extra, "is not a report field"));
    }

    let level_text = string_field(obj, index, "level")?;
    let level = Level::parse(level_text).ok_or_else(|| {
        SchemaError::field(index, "level", format!("has unknown value {level_text:?}"))
    })?;
    let analyzer = string_field(obj, index, "analyzer")?;
    let op_type = match &obj["op_type"] {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        _ => return Err(SchemaError::field(index, "op_type", "must be a string or null")),
    };
    let description = string_field(obj, index, "description")?;
    let file = string_field(obj, index, "file")?;
    let span = Span {
        start_line: coord_field(obj, index, "start_line")?,
        start_col: coord_field(obj, index, "start_col")?,
        end_line: coord_field(obj, index, "end_line")?,
        end_col: coord_field(obj, index, "end_col")?,
    };
    if span.end_line < span.start_line {
        return Err(SchemaError::field(index, "end_line", "precedes start_line"));
    }
    if span.end_line == span.start_line && span.end_col < span.start_col {
        return Err(SchemaError::field(index, "end_col", "precedes start_col on the same line"));
    }
    let snippet = string_field(obj, index, "code_snippet")?;

    Ok(WarningRecord::new(
        level,
        analyzer,
        op_type,
        description,
        file,
        span,
        snippet,
    ))
}

fn string_field<'a>(
    obj: &'a Map<String, Value>,
    index: usize,
    key: &str,
) -> Result<&'a str, SchemaError> {
    obj[key]
        .as_str()
        .ok_or_else(|| SchemaError::field(index, key, "must be a string"))
}

fn coord_field(obj: &Map<String, Value>, index: usize, key: &str) -> Result<u32, SchemaError> {
    let v = obj[key]
        .as_u64()
        .ok_or_else(|| SchemaError::field(index, key, "must be a positive integer"))?;
    if v == 0 {
        return Err(SchemaError::field(index, key, "must be >= 1"));
    }
    u32::try_from(v).map_err(|_| SchemaError::field(index, key, "is out of range"))
}

/// Writes records back in the report format. Labels and clusters are dropped.
pub fn serialize_report(records: &[WarningRecord]) -> Vec<u8> {
    let items: Vec<Value> = records
        .iter()
        .map(|r| {
            let mut obj = Map::new();
            obj.insert("level".into(), Value::from(r.level.as_str()));
            obj.insert("analyzer".into(), Value::from(r.analyzer.as_str()));
            obj.insert(
                "op_type".into(),
                r.op_type.as_deref().map_or(Value::Null, Value::from),
            );
            obj.insert("description".into(), Value::from(r.description.as_str()));
            obj.insert("file".into(), Value::from(r.file.as_str()));
            obj.insert("start_line".into(), Value::from(r.span.start_line));
            obj.insert("start_col".into(), Value::from(r.span.start_col));
            obj.insert("end_line".into(), Value::from(r.span.end_line));
            obj.insert("end_col".into(), Value::from(r.span.end_col));
            obj.insert("code_snippet".into(), Value::from(r.code_snippet.as_str()));
            Value::Object(obj)
        })
        .collect();
    serde_json::to_vec_pretty(&Value::Array(items)).expect("report values are always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::{FNV_OFFSET, FNV_PRIME};

    const AARC: &str = r#"[{
        "level": "Warning",
        "analyzer": "UnsafeDestructor",
        "op_type": null,
        "description":"unsafe block detected in drop",
        "file": "aarc-0.3.2/src/smart_ptrs.rs",
        "start_line": 118, "start_col": 1,
        "end_line": 118, "end_col": 33,
        "code_snippet": "impl<T: 'static> Drop for Arc<T> {...} }"
    }]"#;

    #[test]
    fn parses_aarc_listing() {
        let recs = parse_report(AARC.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.analyzer, "UnsafeDestructor");
        assert_eq!(r.file, "aarc-0.3.2/src/smart_ptrs.rs");
        assert_eq!(r.span.start_line, 118);
        assert_eq!(r.span.end_col, 33);
        assert_eq!(r.level, Level::Warning);
        assert_eq!(r.op_type, None);
        assert_eq!(r.label, None);
        assert_eq!(r.cluster_id, None);
    }

    #[test]
    fn empty_array_is_empty() {
        assert!(parse_report(b"[]").unwrap().is_empty());
    }

    /// Independent FNV-1a loop over the hand-assembled tuple bytes.
    fn hand_id(fields: &[&str]) -> u64 {
        let mut bytes = Vec::new();
        for f in fields {
            bytes.extend_from_slice(f.as_bytes());
            bytes.push(0x1f);
        }
        let mut h = FNV_OFFSET;
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
        h
    }

    #[test]
    fn identical_objects_share_hand_computed_id() {
        let obj = AARC.trim().trim_start_matches('[').trim_end_matches(']');
        let doubled = format!("[{obj},{obj}]");
        let recs = parse_report(doubled.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].id, recs[1].id);
        let expected = hand_id(&[
            "aarc-0.3.2/src/smart_ptrs.rs",
            "118",
            "1",
            "118",
            "33",
            "UnsafeDestructor",
            "unsafe block detected in drop",
        ]);
        assert_eq!(recs[0].id.0, expected);
    }

    #[test]
    fn missing_field_names_field_and_index() {
        let bad = r#"[{"level":"Warning","analyzer":"A","op_type":null,"description":"d","file":"f",
            "start_line":1,"start_col":1,"end_line":1,"end_col":2,"code_snippet":""},
            {"level":"Warning","analyzer":"A","op_type":null,"description":"d","file":"f",
            "start_line":1,"start_col":1,"end_line":1,"code_snippet":""}]"#;
        let err = parse_report(bad.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            SchemaError::Field { index: 1, field: "end_col".into(), problem: "is missing".into() }
        );
        assert!(err.to_string().contains("end_col"));
    }

    #[test]
    fn mistyped_and_invalid_fields() {
        let mk = |patch: &str| {
            format!(
                r#"[{{"level":"Warning","analyzer":"A","op_type":null,"description":"d","file":"f",
                "start_line":5,"start_col":1,"end_line":5,"end_col":2,"code_snippet":"", {patch}}}]"#
            )
        };
        // Later duplicate keys override earlier ones in serde_json maps.
        let cases = [
            (r#""start_line":"5""#, "start_line"),
            (r#""level":"Fatal""#, "level"),
            (r#""op_type":3"#, "op_type"),
            (r#""start_col":0"#, "start_col"),
            (r#""end_line":4"#, "end_line"),
            (r#""extra":1"#, "extra"),
        ];
        for (patch, field) in cases {
            match parse_report(mk(patch).as_bytes()).unwrap_err() {
                SchemaError::Field { index, field: f, .. } => {
                    assert_eq!(index, 0);
                    assert_eq!(f, field, "patch {patch}");
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(matches!(parse_report(b"{}"), Err(SchemaError::NotAnArray)));
        assert!(matches!(parse_report(b"[1"), Err(SchemaError::Malformed(_))));
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let recs = parse_report(AARC.as_bytes()).unwrap();
        let again = parse_report(&serialize_report(&recs)).unwrap();
        assert_eq!(recs, again);
    }
}
