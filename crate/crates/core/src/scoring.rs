//! Sentence-level consistency score of a claim against a (possibly long) context.
//!
//! The context is chunked, the claim split into sentences, and every
//! (chunk, sentence) pair scored with the 3-way head's aligned probability.
//! Each sentence keeps its best chunk; the score is the mean over sentences.

use rayon::prelude::*;
use serde::Serialize;

use crate::backend::AlignmentBackend;
use crate::error::{Error, Result};
use crate::segmentation::{chunk_context, split_sentences, SentenceSpan, TokenBudget};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceScore {
    pub sentence: SentenceSpan,
    pub best_chunk_index: usize,
    pub best_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub score: f64,
    pub n_chunks: usize,
    pub n_claim_sentences: usize,
    pub per_sentence: Vec<SentenceScore>,
}

/// Per-row maximum of an aligned-probability grid (rows: claim sentences,
/// columns: chunks) with its column. Ties keep the lowest column.
pub fn best_per_sentence(grid: &[Vec<f64>]) -> Vec<(usize, f64)> {
    grid.iter()
        .map(|row| {
            row.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (k, &p)| if p > best.1 { (k, p) } else { best },
            )
        })
        .collect()
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Claim sentences that carry text; punctuation-only fragments are dropped.
pub fn claim_sentences(claim: &str) -> Result<Vec<SentenceSpan>> {
    let sentences: Vec<_> = split_sentences(claim)
        .into_iter()
        .filter(|s| s.text.chars().any(char::is_alphanumeric))
        .collect();
    if sentences.is_empty() {
        return Err(Error::EmptyClaim);
    }
    Ok(sentences)
}

/// Scores claim sentences against an explicit list of chunk texts.
pub fn score_against_chunks(
    chunks: &[String],
    sentences: Vec<SentenceSpan>,
    backend: &dyn AlignmentBackend,
) -> Result<ScoreReport> {
    if chunks.is_empty() {
        return Err(Error::EmptyContext);
    }
    if sentences.is_empty() {
        return Err(Error::EmptyClaim);
    }
    let pairs: Vec<(&str, &str)> = sentences
        .iter()
        .flat_map(|s| chunks.iter().map(move |c| (c.as_str(), s.text.as_str())))
        .collect();
    let preds = backend.predict_batch(&pairs)?;
    let grid: Vec<Vec<f64>> = preds
        .chunks(chunks.len())
        .map(|row| row.iter().map(|h| h.p_aligned()).collect())
        .collect();
    let best = best_per_sentence(&grid);
    let per_sentence: Vec<SentenceScore> = sentences
        .into_iter()
        .zip(best)
        .map(|(sentence, (best_chunk_index, best_prob))| SentenceScore {
            sentence,
            best_chunk_index,
            best_prob,
        })
        .collect();
    Ok(ScoreReport {
        score: mean(per_sentence.iter().map(|s| s.best_prob)),
        n_chunks: chunks.len(),
        n_claim_sentences: per_sentence.len(),
        per_sentence,
    })
}

pub fn align_score(
    context: &str,
    claim: &str,
    backend: &dyn AlignmentBackend,
    budget: &TokenBudget,
) -> Result<ScoreReport> {
    let context_sentences = split_sentences(context);
    if context_sentences.is_empty() {
        return Err(Error::EmptyContext);
    }
    let sentences = claim_sentences(claim)?;
    let chunks: Vec<String> = chunk_context(&context_sentences, budget, backend.tokenizer())?
        .iter()
        .map(|c| c.text())
        .collect();
    score_against_chunks(&chunks, sentences, backend)
}

/// Scores many pairs on the current rayon pool. Results keep input order and
/// each failure is tagged with its pair index.
pub fn align_score_batch<S: AsRef<str> + Sync>(
    pairs: &[(S, S)],
    backend: &dyn AlignmentBackend,
    budget: &TokenBudget,
) -> Vec<Result<ScoreReport>> {
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, (context, claim))| {
            align_score(context.as_ref(), claim.as_ref(), backend, budget).map_err(|e| e.at(i))
        })
        .collect()
}
