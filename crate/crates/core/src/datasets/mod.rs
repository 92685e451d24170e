//! Task datasets in canonical JSONL form.
//!
//! Each line is an object with exactly the keys `context`, `claim`, `label`
//! and an optional `id`. Classification labels are strings from the task's
//! canonical vocabulary; regression labels are numbers, divided by the
//! manifest's `label_scale` when one is declared.

mod convert;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use convert::{convert_jsonl, ConversionReport, FieldNames, LabelMapping};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Nli3,
    Binary,
    Regression,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Nli3 => "nli3",
            Task::Binary => "binary",
            Task::Regression => "regression",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nli3Label {
    Aligned,
    Neutral,
    Contradict,
}

impl Nli3Label {
    pub const ALL: [Nli3Label; 3] = [Nli3Label::Aligned, Nli3Label::Neutral, Nli3Label::Contradict];

    /// Class index, matching the order of the 3-way head's probabilities.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Nli3Label::Aligned => "aligned",
            Nli3Label::Neutral => "neutral",
            Nli3Label::Contradict => "contradict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Aligned,
    NotAligned,
}

impl BinaryLabel {
    pub fn is_positive(self) -> bool {
        self == BinaryLabel::Aligned
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Aligned => "aligned",
            BinaryLabel::NotAligned => "not_aligned",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Nli3(Nli3Label),
    Binary(BinaryLabel),
    Regression(f64),
}

impl Label {
    pub fn task(&self) -> Task {
        match self {
            Label::Nli3(_) => Task::Nli3,
            Label::Binary(_) => Task::Binary,
            Label::Regression(_) => Task::Regression,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Label::Nli3(l) => Value::from(l.as_str()),
            Label::Binary(l) => Value::from(l.as_str()),
            Label::Regression(v) => Value::from(v),
        }
    }

    /// Stratum used for subsampling; regression labels fall into ten equal-width bins.
    pub fn stratum(&self) -> u8 {
        match self {
            Label::Nli3(l) => l.index() as u8,
            Label::Binary(l) => *l as u8,
            Label::Regression(v) => ((v * 10.0).floor() as i64).clamp(0, 9) as u8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub id: Option<Value>,
    pub task: Task,
    pub context: String,
    pub claim: String,
    pub label: Label,
}

impl DatasetRecord {
    /// Canonical JSONL line (without the trailing newline).
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        if let Some(id) = &self.id {
            obj.insert("id".into(), id.clone());
        }
        obj.insert("context".into(), Value::from(self.context.as_str()));
        obj.insert("claim".into(), Value::from(self.claim.as_str()));
        obj.insert("label".into(), self.label.to_json());
        Value::Object(obj).to_string()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    #[serde(default)]
    id: Option<Value>,
    context: String,
    claim: String,
    label: Value,
}

fn parse_label(raw: &Value, task: Task, label_scale: Option<f64>, line: usize) -> Result<Label> {
    let malformed = |reason: String| Error::MalformedRecord { line, reason };
    match task {
        Task::Nli3 | Task::Binary => {
            let s = raw
                .as_str()
                .ok_or_else(|| malformed(format!("{task} label must be a string, got {raw}")))?;
            let parsed = match (task, s) {
                (Task::Nli3, "aligned") => Label::Nli3(Nli3Label::Aligned),
                (Task::Nli3, "neutral") => Label::Nli3(Nli3Label::Neutral),
                (Task::Nli3, "contradict") => Label::Nli3(Nli3Label::Contradict),
                (Task::Binary, "aligned") => Label::Binary(BinaryLabel::Aligned),
                (Task::Binary, "not_aligned") => Label::Binary(BinaryLabel::NotAligned),
                _ => return Err(malformed(format!("unknown {task} label {s:?}"))),
            };
            Ok(parsed)
        }
        Task::Regression => {
            let v = raw
                .as_f64()
                .ok_or_else(|| malformed(format!("regression label must be a number, got {raw}")))?;
            let v = match label_scale {
                Some(scale) => v / scale,
                None => v,
            };
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::LabelOutOfRange { line, value: v });
            }
            Ok(Label::Regression(v))
        }
    }
}

fn check_scale(label_scale: Option<f64>) -> Result<()> {
    match label_scale {
        Some(s) if !(s.is_finite() && s > 0.0) => Err(Error::Config(format!("label_scale must be positive, got {s}"))),
        _ => Ok(()),
    }
}

/// Parses canonical JSONL from a reader. Blank lines are skipped; line numbers are 1-based.
pub fn read_dataset(reader: impl BufRead, task: Task, label_scale: Option<f64>) -> Result<Vec<DatasetRecord>> {
    check_scale(label_scale)?;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if raw.context.trim().is_empty() || raw.claim.trim().is_empty() {
            return Err(Error::MalformedRecord {
                line: line_no,
                reason: "context and claim must be nonempty".into(),
            });
        }
        if let Some(id) = &raw.id {
            if !(id.is_string() || id.is_number()) {
                return Err(Error::MalformedRecord {
                    line: line_no,
                    reason: "id must be a string or a number".into(),
                });
            }
        }
        records.push(DatasetRecord {
            label: parse_label(&raw.label, task, label_scale, line_no)?,
            id: raw.id,
            task,
            context: raw.context,
            claim: raw.claim,
        });
    }
    Ok(records)
}

pub fn load_dataset(path: &Path, task: Task, label_scale: Option<f64>) -> Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), task, label_scale)
}

pub fn write_dataset(mut out: impl Write, records: &[DatasetRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    /// Relative paths are resolved against the manifest's directory.
    pub path: PathBuf,
    pub task: Task,
    /// Expected record count; verified on load when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Maximum of the source similarity scale, e.g. 5.0 for 0–5 scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_scale: Option<f64>,
}

impl DatasetManifest {
    pub fn load(&self) -> Result<Vec<DatasetRecord>> {
        let records = load_dataset(&self.path, self.task, self.label_scale)?;
        if let Some(expected) = self.count {
            if expected != records.len() {
                return Err(Error::CountMismatch {
                    name: self.name.clone(),
                    expected,
                    found: records.len(),
                });
            }
        }
        Ok(records)
    }
}

pub fn load_manifest(path: &Path) -> Result<Vec<DatasetManifest>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries: Vec<DatasetManifest> =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for entry in &mut entries {
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    Ok(entries)
}

/// Seeded sample of `n` records whose per-class counts match the population
/// proportions to within one record (largest-remainder allocation). Selected
/// records keep their original relative order.
pub fn stratified_subsample(records: &[DatasetRecord], n: usize, seed: u64) -> Vec<DatasetRecord> {
    if n >= records.len() {
        return records.to_vec();
    }
    let mut strata: BTreeMap<(Task, u8), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry((r.task, r.label.stratum())).or_default().push(i);
    }
    let total = records.len();
    let mut quotas: Vec<(usize, usize)> = strata
        .values()
        .map(|members| {
            let exact = members.len() * n;
            (exact / total, exact % total)
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.0).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].1.cmp(&quotas[a].1).then(a.cmp(&b)));
    for &k in order.iter().take(n - assigned) {
        quotas[k].0 += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for (members, (quota, _)) in strata.into_values().zip(quotas) {
        let mut members = members;
        members.shuffle(&mut rng);
        chosen.extend_from_slice(&members[..quota]);
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| records[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, task: Task, scale: Option<f64>) -> Result<Vec<DatasetRecord>> {
        read_dataset(text.as_bytes(), task, scale)
    }

    fn binary(n_pos: usize, n_neg: usize) -> Vec<DatasetRecord> {
        (0..n_pos + n_neg)
            .map(|i| DatasetRecord {
                id: Some(Value::from(i)),
                task: Task::Binary,
                context: format!("c{i}"),
                claim: format!("s{i}"),
                label: Label::Binary(if i < n_pos {
                    BinaryLabel::Aligned
                } else {
                    BinaryLabel::NotAligned
                }),
            })
            .collect()
    }

    #[test]
    fn empty_file() {
        assert!(read("", Task::Binary, None).unwrap().is_empty());
        assert!(read("\n  \n", Task::Nli3, None).unwrap().is_empty());
    }

    #[test]
    fn binary_record() {
        let r = read(r#"{"context":"a","claim":"b","label":"aligned"}"#, Task::Binary, None).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].label, Label::Binary(BinaryLabel::Aligned));
        assert_eq!((r[0].context.as_str(), r[0].claim.as_str()), ("a", "b"));
    }

    #[test]
    fn regression_scaled() {
        let r = read(
            r#"{"context":"a","claim":"b","label":4.0}"#,
            Task::Regression,
            Some(5.0),
        )
        .unwrap();
        assert_eq!(r[0].label, Label::Regression(0.8));
    }

    #[test]
    fn regression_out_of_range_reports_line() {
        let text =
            "{\"context\":\"a\",\"claim\":\"b\",\"label\":0.5}\n{\"context\":\"a\",\"claim\":\"b\",\"label\":4.0}\n";
        let err = read(text, Task::Regression, None).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cases = [
            (r#"{"context":"a","claim":"b"}"#, Task::Binary),
            (
                r#"{"context":"a","claim":"b","label":"aligned","extra":1}"#,
                Task::Binary,
            ),
            (r#"{"context":"a","claim":"b","label":"entailment"}"#, Task::Nli3),
            (r#"{"context":"a","claim":"b","label":"neutral"}"#, Task::Binary),
            (r#"{"context":" ","claim":"b","label":"aligned"}"#, Task::Binary),
            (r#"{"context":"a","claim":"b","label":"0.3"}"#, Task::Regression),
            (
                r#"{"context":"a","claim":"b","label":"aligned","id":[1]}"#,
                Task::Binary,
            ),
            ("not json", Task::Binary),
        ];
        for (line, task) in cases {
            let text = format!("\n{line}\n");
            let err = read(&text, task, None).unwrap_err();
            assert!(matches!(err, Error::MalformedRecord { line: 2, .. }), "{line}: {err}");
        }
    }

    #[test]
    fn bad_scale_rejected() {
        assert!(matches!(read("", Task::Regression, Some(0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn missing_file() {
        let err = load_dataset(Path::new("/no/such/file.jsonl"), Task::Nli3, None).unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));
    }

    #[test]
    fn manifest_resolves_paths_and_checks_count() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("toy.jsonl"),
            "{\"context\":\"a\",\"claim\":\"b\",\"label\":\"aligned\"}\n",
        )
        .unwrap();
        let manifest = dir.path().join("manifest.json");
        std::fs::write(
            &manifest,
            r#"[{"name":"toy","path":"toy.jsonl","task":"binary","count":1},
                {"name":"bad","path":"toy.jsonl","task":"binary","count":2}]"#,
        )
        .unwrap();
        let entries = load_manifest(&manifest).unwrap();
        assert_eq!(entries[0].load().unwrap().len(), 1);
        assert!(matches!(
            entries[1].load(),
            Err(Error::CountMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn subsample_edge_cases() {
        let records = binary(7, 5);
        assert!(stratified_subsample(&records, 0, 1).is_empty());
        assert_eq!(stratified_subsample(&records, 12, 1), records);
        assert_eq!(stratified_subsample(&records, 100, 1), records);
    }

    #[test]
    fn subsample_balanced_split() {
        let records = binary(50, 50);
        let sample = stratified_subsample(&records, 10, 7);
        let pos = sample
            .iter()
            .filter(|r| r.label == Label::Binary(BinaryLabel::Aligned))
            .count();
        assert_eq!((pos, sample.len() - pos), (5, 5));
        assert_eq!(sample, stratified_subsample(&records, 10, 7));
        assert_ne!(sample, stratified_subsample(&records, 10, 8));
    }

    #[test]
    fn serialization_round_trip() {
        let text = concat!(
            "{\"id\":\"x1\",\"context\":\"Кот спит.\",\"claim\":\"Кот.\",\"label\":\"contradict\"}\n",
            "{\"context\":\"a \\\"q\\\"\",\"claim\":\"b\",\"label\":\"neutral\",\"id\":7}\n",
        );
        let records = read(text, Task::Nli3, None).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &records).unwrap();
        assert_eq!(read_dataset(&buf[..], Task::Nli3, None).unwrap(), records);
    }
}
