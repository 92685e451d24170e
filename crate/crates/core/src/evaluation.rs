//! Task-level evaluation of a backend on labelled records.

use rayon::prelude::*;
use serde::Serialize;

use crate::backend::{AlignmentBackend, HeadOutputs};
use crate::datasets::{DatasetRecord, Label, Task};
use crate::error::{Error, Result};
use crate::metrics::{eval_3way, eval_binary, eval_regression, BinaryResult, ClassificationResult, RegressionResult};
use crate::segmentation::{chunk_context, split_sentences, TokenBudget};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TaskMetrics {
    ThreeWay(ClassificationResult),
    Binary(BinaryResult),
    Regression(RegressionResult),
}

/// Head outputs for a whole (context, claim) pair. Pairs longer than the model
/// input are chunked like the consistency score: `prob_bin` and `regression`
/// take the maximum over chunks and `probs3` comes from the chunk with the
/// highest aligned probability (first such chunk on ties).
pub fn predict_pooled(
    context: &str,
    claim: &str,
    backend: &dyn AlignmentBackend,
    budget: &TokenBudget,
) -> Result<HeadOutputs> {
    if backend.fits(context, claim)? {
        return backend.predict(context, claim);
    }
    let sentences = split_sentences(context);
    let chunks: Vec<String> = chunk_context(&sentences, budget, backend.tokenizer())?
        .iter()
        .map(|c| c.text())
        .collect();
    let pairs: Vec<(&str, &str)> = chunks.iter().map(|c| (c.as_str(), claim)).collect();
    let preds = backend.predict_batch(&pairs)?;
    let mut pooled = preds[0];
    for p in &preds[1..] {
        if p.p_aligned() > pooled.p_aligned() {
            pooled.probs3 = p.probs3;
        }
        pooled.prob_bin = pooled.prob_bin.max(p.prob_bin);
        pooled.regression = pooled.regression.max(p.regression);
    }
    Ok(pooled)
}

fn check_homogeneous(records: &[DatasetRecord], task: Task) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to evaluate"));
    }
    for (index, r) in records.iter().enumerate() {
        if r.task != task || r.label.task() != task {
            return Err(Error::TaskMismatch {
                index,
                expected: task.to_string(),
                found: r.label.task().to_string(),
            });
        }
    }
    Ok(())
}

/// Pooled predictions for every record, in record order.
pub fn predict_records(
    records: &[DatasetRecord],
    backend: &dyn AlignmentBackend,
    budget: &TokenBudget,
) -> Result<Vec<HeadOutputs>> {
    records
        .par_iter()
        .enumerate()
        .map(|(i, r)| predict_pooled(&r.context, &r.claim, backend, budget).map_err(|e| e.at(i)))
        .collect()
}

pub fn binary_gold(records: &[DatasetRecord]) -> Vec<u8> {
    records
        .iter()
        .map(|r| match r.label {
            Label::Binary(l) => u8::from(l.is_positive()),
            _ => 0,
        })
        .collect()
}

/// 3-way records are scored by the argmax of `probs3`, binary records by
/// `prob_bin` against `threshold`, regression records by the regression head.
pub fn run_task_eval(
    records: &[DatasetRecord],
    backend: &dyn AlignmentBackend,
    budget: &TokenBudget,
    task: Task,
    threshold: f64,
) -> Result<TaskMetrics> {
    check_homogeneous(records, task)?;
    let preds = predict_records(records, backend, budget)?;
    match task {
        Task::Nli3 => {
            let predicted: Vec<usize> = preds.iter().map(HeadOutputs::argmax3).collect();
            let gold: Vec<usize> = records
                .iter()
                .map(|r| match r.label {
                    Label::Nli3(l) => l.index(),
                    _ => unreachable!("checked homogeneous"),
                })
                .collect();
            eval_3way(&predicted, &gold).map(TaskMetrics::ThreeWay)
        }
        Task::Binary => {
            let scores: Vec<f64> = preds.iter().map(|p| p.prob_bin).collect();
            eval_binary(&scores, &binary_gold(records), threshold).map(TaskMetrics::Binary)
        }
        Task::Regression => {
            let predicted: Vec<f64> = preds.iter().map(|p| p.regression).collect();
            let gold: Vec<f64> = records
                .iter()
                .map(|r| match r.label {
                    Label::Regression(v) => v,
                    _ => unreachable!("checked homogeneous"),
                })
                .collect();
            eval_regression(&predicted, &gold).map(TaskMetrics::Regression)
        }
    }
}

/// One dataset's evaluation, as written to the report file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub dataset: String,
    pub task: Task,
    pub n: usize,
    pub metrics: TaskMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub timestamp: String,
    pub backend_kind: String,
    pub model_hash: String,
}

impl EvalReport {
    pub fn new(
        dataset: &str,
        task: Task,
        n: usize,
        metrics: TaskMetrics,
        threshold: f64,
        backend: &dyn AlignmentBackend,
    ) -> Self {
        Self {
            dataset: dataset.to_string(),
            task,
            n,
            metrics,
            threshold: (task == Task::Binary).then_some(threshold),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            backend_kind: backend.kind().to_string(),
            model_hash: backend.model_hash(),
        }
    }
}
