//! Factual-consistency scoring for Russian (or any UTF-8) text.
//!
//! A claim is checked against a context by an alignment model with three
//! heads (3-way NLI, binary alignment, similarity regression). The context is
//! cut into sentence-aligned chunks of about 350 tokens, every claim sentence
//! is scored against every chunk with the aligned-class probability, each
//! sentence keeps its best chunk, and the score is the mean over sentences.
//!
//! The crate also loads labelled task datasets and evaluates backends with
//! accuracy, precision, recall, F1, ROC AUC, MSE and R².

pub mod backend;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod metrics;
pub mod scoring;
pub mod segmentation;

pub use backend::{load_backend, AlignmentBackend, Backend, BackendConfig, BackendKind, HeadOutputs};
pub use error::{Error, Result};
pub use scoring::{align_score, align_score_batch, ScoreReport};
pub use segmentation::{chunk_context, split_sentences, Chunk, SentenceSpan, TokenBudget, Tokenizer};
