//! Independent oracles and generators shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::ops::Range;

use alignruscore::backend::{AlignmentBackend, BackendKind, HeadOutputs};
use alignruscore::{Error, Result, Tokenizer};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Backend answering from a fixed (context, claim) -> p_aligned table.
pub struct StubBackend {
    pub table: HashMap<(String, String), f64>,
    tokenizer: Tokenizer,
}

impl StubBackend {
    pub fn new(table: HashMap<(String, String), f64>) -> Self {
        Self {
            table,
            tokenizer: Tokenizer::Whitespace,
        }
    }
}

impl AlignmentBackend for StubBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Reference
    }
    fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }
    fn max_input_tokens(&self) -> Option<usize> {
        None
    }
    fn batch_size(&self) -> usize {
        4
    }
    fn model_hash(&self) -> String {
        "stub".into()
    }
    fn predict(&self, context: &str, claim: &str) -> Result<HeadOutputs> {
        let p = *self
            .table
            .get(&(context.to_string(), claim.to_string()))
            .ok_or_else(|| Error::InferenceFailure(format!("no stub entry for {context:?} / {claim:?}")))?;
        Ok(HeadOutputs {
            probs3: [p, 1.0 - p, 0.0],
            prob_bin: p,
            regression: p,
        })
    }
}

/// Mean over claim sentences of the max over chunks.
pub fn brute_force_score(grid: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for row in grid {
        total += row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    total / grid.len() as f64
}

/// Pairwise-counting AUC: P(score_pos > score_neg) + 0.5 P(tie).
pub fn brute_force_auc(scores: &[f64], gold: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if gold[i] == 1 && gold[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// (tp, fp, tn, fn) with prediction `score >= threshold`.
pub fn brute_force_confusion(scores: &[f64], gold: &[u8], threshold: f64) -> (u64, u64, u64, u64) {
    let mut c = (0, 0, 0, 0);
    for (&s, &g) in scores.iter().zip(gold) {
        match (s >= threshold, g == 1) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, false) => c.2 += 1,
            (false, true) => c.3 += 1,
        }
    }
    c
}

pub fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// (mse, r2) from the textbook definitions.
pub fn brute_force_regression(predicted: &[f64], gold: &[f64]) -> (f64, f64) {
    let n = gold.len() as f64;
    let mean = gold.iter().sum::<f64>() / n;
    let ss_res: f64 = predicted.iter().zip(gold).map(|(p, g)| (g - p) * (g - p)).sum();
    let ss_tot: f64 = gold.iter().map(|g| (g - mean) * (g - mean)).sum();
    (ss_res / n, 1.0 - ss_res / ss_tot)
}

/// Chunker contract violations, checked without reference to the library's own checker.
pub fn chunk_violations(counts: &[usize], ranges: &[Range<usize>], budget: usize, overlap: usize) -> Vec<String> {
    let mut out = Vec::new();
    if counts.is_empty() {
        return out;
    }
    let mut seen = vec![0usize; counts.len()];
    for (i, r) in ranges.iter().enumerate() {
        if r.start >= r.end || r.end > counts.len() {
            out.push(format!("chunk {i}: bad range {r:?}"));
            return out;
        }
        let tokens: usize = counts[r.clone()].iter().sum();
        if tokens > budget && r.len() != 1 {
            out.push(format!("chunk {i}: {tokens} > {budget}"));
        }
        for s in r.clone() {
            seen[s] += 1;
        }
        if i > 0 {
            let p = &ranges[i - 1];
            if !(r.start > p.start && r.end > p.end && r.start <= p.end) {
                out.push(format!("chunk {i}: {r:?} does not follow {p:?}"));
                continue;
            }
            let shared = p.end - r.start;
            let target = overlap.min(p.len());
            if shared > target {
                out.push(format!("chunk {i}: overlap {shared} > {target}"));
            }
            if shared < target {
                let needed: usize = counts[p.end - shared - 1..=p.end].iter().sum();
                if needed <= budget {
                    out.push(format!(
                        "chunk {i}: overlap {shared} < {target} without budget pressure"
                    ));
                }
            }
        }
    }
    if ranges.first().map(|r| r.start) != Some(0) || ranges.last().map(|r| r.end) != Some(counts.len()) {
        out.push("chunks do not span the input".into());
    }
    if let Some(s) = seen.iter().position(|&n| n == 0) {
        out.push(format!("sentence {s} uncovered"));
    }
    out
}

const RU_WORDS: &[&str] = &[
    "кот",
    "дом",
    "река",
    "город",
    "учитель",
    "книга",
    "работа",
    "россия",
    "время",
    "человек",
    "вода",
    "день",
    "быстро",
    "читал",
    "жил",
    "был",
    "и",
    "в",
    "на",
    "не",
    "что",
    "2024",
    "№5",
    "т.е.",
    "г.",
    "др.",
    "ул.",
];
const ASCII_WORDS: &[&str] = &[
    "cat", "house", "river", "the", "a", "of", "data", "model", "42", "e.g.", "Mr.", "x", "foo-bar", "U.S.",
];
const TERMINALS: &[&str] = &[".", "!", "?", "…", "...", "?!", ".\"", "».", ")."];
const OPENERS: &[&str] = &["", "", "", "«", "\"", "("];

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Random mixed Russian/ASCII text with sentence punctuation, abbreviations and odd spacing.
pub fn random_text(rng: &mut impl Rng) -> String {
    let n_sentences = rng.random_range(0..12);
    let mut text = String::new();
    for _ in 0..n_sentences {
        let pool = if rng.random_bool(0.7) { RU_WORDS } else { ASCII_WORDS };
        let n_words = rng.random_range(1..15);
        let mut words: Vec<String> = (0..n_words).map(|_| pool.choose(rng).unwrap().to_string()).collect();
        if rng.random_bool(0.8) {
            words[0] = capitalize(&words[0]);
        }
        let sentence = format!(
            "{}{}{}",
            OPENERS.choose(rng).unwrap(),
            words.join(" "),
            if rng.random_bool(0.9) {
                TERMINALS.choose(rng).unwrap()
            } else {
                ""
            }
        );
        text.push_str(&sentence);
        text.push_str([" ", " ", "  ", "\n", "\t ", ""].choose(rng).unwrap());
    }
    text
}
