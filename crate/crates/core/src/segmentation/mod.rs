//! Sentence splitting, token counting and sentence-aligned context chunking.
//!
//! A context is cut into chunks by greedy filling: starting from the first
//! sentence not yet covered, sentences are appended while the running token
//! count stays within the budget. Each new chunk re-includes up to
//! `overlap_sentences` trailing sentences of its predecessor; the overlap is
//! shrunk (down to zero) when re-including it together with the first new
//! sentence would exceed the budget. A sentence that alone exceeds the budget
//! becomes a chunk of its own.

mod sentences;
mod tokenizer;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use sentences::{split_sentences, SentenceSpan, SentenceSplitter, DEFAULT_ABBREVIATIONS};
pub use tokenizer::{Tokenizer, CLS_TOKEN, PAD_TOKEN, SEP_TOKEN, UNK_TOKEN};

use crate::error::{Error, Result};

pub const DEFAULT_CHUNK_BUDGET: usize = 350;
pub const DEFAULT_OVERLAP_SENTENCES: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    pub budget: usize,
    pub overlap_sentences: usize,
}

impl Default for TokenBudget {
    fn default() -> Self {
        Self {
            budget: DEFAULT_CHUNK_BUDGET,
            overlap_sentences: DEFAULT_OVERLAP_SENTENCES,
        }
    }
}

impl TokenBudget {
    pub fn new(budget: usize, overlap_sentences: usize) -> Result<Self> {
        if budget == 0 {
            return Err(Error::Config("chunk budget must be at least 1".into()));
        }
        Ok(Self {
            budget,
            overlap_sentences,
        })
    }
}

/// A contiguous run of context sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chunk {
    /// Index of the first sentence in the source sentence list.
    pub first_sentence: usize,
    pub sentences: Vec<SentenceSpan>,
    pub token_count: usize,
}

impl Chunk {
    /// Index one past the last sentence.
    pub fn end_sentence(&self) -> usize {
        self.first_sentence + self.sentences.len()
    }

    pub fn sentence_range(&self) -> Range<usize> {
        self.first_sentence..self.end_sentence()
    }

    /// Sentences joined by single spaces; this is what the backend sees.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sentences.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&s.text);
        }
        out
    }
}

/// Greedy chunk layout over per-sentence token counts, as sentence index ranges.
pub fn chunk_ranges(counts: &[usize], budget: &TokenBudget) -> Vec<Range<usize>> {
    let limit = budget.budget;
    let mut ranges: Vec<Range<usize>> = Vec::new();
    let mut next = 0;
    while next < counts.len() {
        let mut start = next;
        let mut total = counts[next];
        if let Some(prev) = ranges.last() {
            let max_overlap = budget.overlap_sentences.min(prev.len());
            let mut acc = counts[next];
            for k in 1..=max_overlap {
                acc += counts[next - k];
                if acc > limit {
                    break;
                }
                start = next - k;
                total = acc;
            }
        }
        let mut end = next + 1;
        while end < counts.len() && total + counts[end] <= limit {
            total += counts[end];
            end += 1;
        }
        ranges.push(start..end);
        next = end;
    }
    ranges
}

pub fn chunk_context(sentences: &[SentenceSpan], budget: &TokenBudget, tokenizer: &Tokenizer) -> Result<Vec<Chunk>> {
    if sentences.is_empty() {
        return Err(Error::EmptyContext);
    }
    let counts = sentences
        .iter()
        .map(|s| tokenizer.count_tokens(&s.text))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunk_ranges(&counts, budget)
        .into_iter()
        .map(|r| Chunk {
            first_sentence: r.start,
            token_count: counts[r.clone()].iter().sum(),
            sentences: sentences[r].to_vec(),
        })
        .collect())
}

/// Checks a chunk layout against the chunker's contract and describes every violation.
pub fn check_chunks(counts: &[usize], chunks: &[Range<usize>], budget: &TokenBudget) -> Vec<String> {
    let mut violations = Vec::new();
    let mut covered = vec![false; counts.len()];
    for (i, r) in chunks.iter().enumerate() {
        if r.is_empty() || r.end > counts.len() {
            violations.push(format!("chunk {i}: invalid sentence range {r:?}"));
            continue;
        }
        let tokens: usize = counts[r.clone()].iter().sum();
        if tokens > budget.budget && r.len() > 1 {
            violations.push(format!("chunk {i}: {tokens} tokens exceed budget {}", budget.budget));
        }
        covered[r.clone()].iter_mut().for_each(|c| *c = true);
        if i == 0 {
            continue;
        }
        let prev = &chunks[i - 1];
        if r.start < prev.start || r.end <= prev.end {
            violations.push(format!("chunk {i}: out of source order after {prev:?}"));
            continue;
        }
        let shared = prev.end.saturating_sub(r.start);
        let wanted = budget.overlap_sentences.min(prev.len());
        if shared > wanted {
            violations.push(format!(
                "chunk {i}: overlaps {shared} sentences, at most {wanted} allowed"
            ));
        } else if shared < wanted && prev.end > shared {
            let first_new = prev.end;
            let extended: usize = counts[first_new - shared - 1..=first_new].iter().sum();
            if extended <= budget.budget {
                violations.push(format!(
                    "chunk {i}: overlap of {shared} suppressed although {} fits",
                    shared + 1
                ));
            }
        }
    }
    if let Some(i) = covered.iter().position(|c| !c) {
        violations.push(format!("sentence {i} is not covered by any chunk"));
    }
    violations
}
