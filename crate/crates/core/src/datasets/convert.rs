//! Best-effort conversion of source datasets into canonical JSONL.
//!
//! Source corpora name their labels differently (entailment/contradiction,
//! 0/1, SUPPORTS/REFUTES, ...). A [`LabelMapping`] maps lowercased source
//! labels to canonical ones per task; it ships with a default table and can
//! be replaced by a JSON file of the form `{"nli3": {...}, "binary": {...}}`.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{parse_label, DatasetRecord, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMapping {
    #[serde(default)]
    pub nli3: BTreeMap<String, String>,
    #[serde(default)]
    pub binary: BTreeMap<String, String>,
}

impl Default for LabelMapping {
    fn default() -> Self {
        let table = |pairs: &[(&str, &str)]| {
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect::<BTreeMap<_, _>>()
        };
        Self {
            nli3: table(&[
                ("aligned", "aligned"),
                ("neutral", "neutral"),
                ("contradict", "contradict"),
                ("entailment", "aligned"),
                ("contradiction", "contradict"),
                ("supports", "aligned"),
                ("refutes", "contradict"),
                ("not enough info", "neutral"),
                ("nei", "neutral"),
                // SNLI/MNLI/ANLI integer convention
                ("0", "aligned"),
                ("1", "neutral"),
                ("2", "contradict"),
            ]),
            binary: table(&[
                ("aligned", "aligned"),
                ("not_aligned", "not_aligned"),
                ("1", "aligned"),
                ("0", "not_aligned"),
                ("true", "aligned"),
                ("false", "not_aligned"),
                ("yes", "aligned"),
                ("no", "not_aligned"),
                ("entailment", "aligned"),
                ("not_entailment", "not_aligned"),
                ("supports", "aligned"),
                ("refutes", "not_aligned"),
            ]),
        }
    }
}

impl LabelMapping {
    /// Canonical label for a source label value, or `None` when unmapped.
    pub fn map(&self, task: Task, raw: &Value) -> Option<Value> {
        let key = match raw {
            Value::String(s) => s.trim().to_lowercase(),
            Value::Number(n) if task != Task::Regression => n.to_string(),
            Value::Bool(b) => b.to_string(),
            _ => String::new(),
        };
        match task {
            Task::Nli3 => self.nli3.get(&key).map(|v| Value::from(v.as_str())),
            Task::Binary => self.binary.get(&key).map(|v| Value::from(v.as_str())),
            Task::Regression => match raw {
                Value::Number(_) => Some(raw.clone()),
                Value::String(s) => s.trim().parse::<f64>().ok().map(Value::from),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldNames {
    pub context: String,
    pub claim: String,
    pub label: String,
    pub id: Option<String>,
}

impl Default for FieldNames {
    fn default() -> Self {
        Self {
            context: "context".into(),
            claim: "claim".into(),
            label: "label".into(),
            id: Some("id".into()),
        }
    }
}

#[derive(Debug, Default)]
pub struct ConversionReport {
    pub records: Vec<DatasetRecord>,
    /// (1-based line, reason) of every skipped source line.
    pub skipped: Vec<(usize, String)>,
}

/// Converts arbitrary JSONL into canonical records, skipping lines that cannot be mapped.
pub fn convert_jsonl(
    reader: impl BufRead,
    task: Task,
    fields: &FieldNames,
    mapping: &LabelMapping,
    label_scale: Option<f64>,
) -> Result<ConversionReport> {
    super::check_scale(label_scale)?;
    let mut report = ConversionReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match convert_line(&line, line_no, task, fields, mapping, label_scale) {
            Ok(record) => report.records.push(record),
            Err(reason) => report.skipped.push((line_no, reason)),
        }
    }
    Ok(report)
}

fn convert_line(
    line: &str,
    line_no: usize,
    task: Task,
    fields: &FieldNames,
    mapping: &LabelMapping,
    label_scale: Option<f64>,
) -> std::result::Result<DatasetRecord, String> {
    let obj: serde_json::Map<String, Value> = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let text = |key: &str| -> std::result::Result<String, String> {
        match obj.get(key) {
            Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.clone()),
            Some(_) => Err(format!("field {key} is empty or not a string")),
            None => Err(format!("missing field {key}")),
        }
    };
    let context = text(&fields.context)?;
    let claim = text(&fields.claim)?;
    let raw_label = obj
        .get(&fields.label)
        .ok_or_else(|| format!("missing field {}", fields.label))?;
    let canonical = mapping
        .map(task, raw_label)
        .ok_or_else(|| format!("unmapped {task} label {raw_label}"))?;
    let label = parse_label(&canonical, task, label_scale, line_no).map_err(|e| e.to_string())?;
    let id = fields
        .id
        .as_ref()
        .and_then(|k| obj.get(k))
        .filter(|v| v.is_string() || v.is_number())
        .cloned();
    Ok(DatasetRecord {
        id,
        task,
        context,
        claim,
        label,
    })
}
