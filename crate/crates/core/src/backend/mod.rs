//! Alignment model backends.
//!
//! Every backend maps a (context, claim) pair to the outputs of the three
//! model heads. The reference backend is a lexical-coverage stand-in with no
//! model behind it; the neural backend runs an exported ONNX graph.

mod neural;
mod reference;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use neural::{ModelMetadata, NeuralBackend, OUTPUT_NAMES};
pub use reference::ReferenceBackend;

use crate::error::{Error, Result};
use crate::segmentation::Tokenizer;

pub const DEFAULT_BATCH_SIZE: usize = 16;

/// Predictions of the three heads for one (context, claim) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadOutputs {
    /// (aligned, neutral, contradict)
    pub probs3: [f64; 3],
    /// Probability of the "aligned" class from the binary head.
    pub prob_bin: f64,
    pub regression: f64,
}

impl HeadOutputs {
    pub fn p_aligned(&self) -> f64 {
        self.probs3[0]
    }

    /// Index of the most probable 3-way class; ties go to the lower index.
    pub fn argmax3(&self) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if self.probs3[i] > self.probs3[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Reference,
    Neural,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Reference => "reference",
            BackendKind::Neural => "neural",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Path of the `.onnx` file; the sidecar metadata sits next to it with a `.json` extension.
    pub model_path: Option<PathBuf>,
    pub batch_size: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Reference,
            model_path: None,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

pub trait AlignmentBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Tokenizer used to measure chunk budgets for this model.
    fn tokenizer(&self) -> &Tokenizer;

    /// Longest encoded pair the model accepts, special tokens included. `None` means unbounded.
    fn max_input_tokens(&self) -> Option<usize>;

    fn batch_size(&self) -> usize;

    /// Hex digest identifying the loaded weights.
    fn model_hash(&self) -> String;

    fn predict(&self, context: &str, claim: &str) -> Result<HeadOutputs>;

    /// Output order matches input order. Failures carry the index of the offending pair.
    fn predict_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<HeadOutputs>> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (c, s))| self.predict(c, s).map_err(|e| e.at(i)))
            .collect()
    }

    /// Whether the pair fits in one model input without truncation.
    fn fits(&self, context: &str, claim: &str) -> Result<bool> {
        match self.max_input_tokens() {
            None => Ok(true),
            Some(max) => {
                let tok = self.tokenizer();
                let n = tok.count_tokens(context)? + tok.count_tokens(claim)? + 3;
                Ok(n <= max)
            }
        }
    }
}

pub type Backend = Arc<dyn AlignmentBackend>;

pub fn load_backend(config: &BackendConfig) -> Result<Backend> {
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    match config.kind {
        BackendKind::Reference => Ok(Arc::new(ReferenceBackend::new(config.batch_size))),
        BackendKind::Neural => {
            let path = config.model_path.as_ref().ok_or_else(|| Error::ModelLoadFailure {
                path: PathBuf::from("<unset>"),
                reason: "the neural backend needs a model path".into(),
            })?;
            Ok(Arc::new(NeuralBackend::load(path, config.batch_size)?))
        }
    }
}

pub(crate) fn check_pair(context: &str, claim: &str) -> Result<()> {
    if context.trim().is_empty() {
        return Err(Error::EmptyInput("context"));
    }
    if claim.trim().is_empty() {
        return Err(Error::EmptyInput("claim"));
    }
    Ok(())
}
