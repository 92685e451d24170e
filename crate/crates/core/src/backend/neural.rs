use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokenizers::{TruncationParams, TruncationStrategy};
use tract_onnx::prelude::*;

use super::{check_pair, AlignmentBackend, BackendKind, HeadOutputs};
use crate::error::{Error, Result};
use crate::segmentation::{Tokenizer, PAD_TOKEN};

/// Graph outputs every exported model must expose, in this order of meaning.
pub const OUTPUT_NAMES: [&str; 3] = ["probs3", "prob_bin", "regression"];
const INPUT_IDS: &str = "input_ids";
const ATTENTION_MASK: &str = "attention_mask";
const TOKEN_TYPE_IDS: &str = "token_type_ids";

/// Sidecar written next to the `.onnx` file (same stem, `.json` extension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub max_input_tokens: usize,
    /// Vocabulary file, relative to the sidecar's directory.
    pub vocab: PathBuf,
    #[serde(default)]
    pub do_lower_case: bool,
    /// Expected vocabulary size, checked against the vocabulary file when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_size: Option<usize>,
}

impl ModelMetadata {
    pub fn sidecar_path(model_path: &Path) -> PathBuf {
        model_path.with_extension("json")
    }
}

struct Inputs {
    ids: usize,
    mask: usize,
    types: Option<usize>,
    count: usize,
}

/// ONNX alignment model executed with tract. Sequences are padded to
/// `max_input_tokens`, so the graph is compiled once with a symbolic batch axis.
pub struct NeuralBackend {
    plan: Arc<TypedRunnableModel>,
    inputs: Inputs,
    outputs: [usize; 3],
    tokenizer: Tokenizer,
    pair_tokenizer: tokenizers::Tokenizer,
    fallback_tokenizer: tokenizers::Tokenizer,
    pad_id: i64,
    max_input_tokens: usize,
    batch_size: usize,
    hash: String,
}

impl std::fmt::Debug for NeuralBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeuralBackend")
            .field("max_input_tokens", &self.max_input_tokens)
            .field("batch_size", &self.batch_size)
            .field("hash", &self.hash)
            .finish_non_exhaustive()
    }
}

impl NeuralBackend {
    pub fn load(model_path: &Path, batch_size: usize) -> Result<Self> {
        let fail = |reason: String| Error::ModelLoadFailure {
            path: model_path.to_path_buf(),
            reason,
        };
        let bytes = std::fs::read(model_path).map_err(|e| fail(format!("cannot read model file: {e}")))?;
        let hash = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();

        let sidecar = ModelMetadata::sidecar_path(model_path);
        let meta_text = std::fs::read_to_string(&sidecar)
            .map_err(|e| fail(format!("cannot read metadata {}: {e}", sidecar.display())))?;
        let meta: ModelMetadata = serde_json::from_str(&meta_text)
            .map_err(|e| fail(format!("invalid metadata {}: {e}", sidecar.display())))?;
        if meta.max_input_tokens < 4 {
            return Err(fail(format!("max_input_tokens {} is too small", meta.max_input_tokens)));
        }

        let vocab_path = sidecar.parent().unwrap_or(Path::new(".")).join(&meta.vocab);
        let tokenizer = Tokenizer::wordpiece_from_vocab(&vocab_path, meta.do_lower_case)
            .map_err(|e| fail(format!("vocabulary: {e}")))?;
        let Tokenizer::WordPiece(base) = &tokenizer else {
            unreachable!("wordpiece_from_vocab returns a WordPiece tokenizer")
        };
        let vocab_len = base.get_vocab_size(false);
        if let Some(expected) = meta.vocab_size {
            if expected != vocab_len {
                return Err(fail(format!(
                    "vocabulary mismatch: model expects {expected} tokens, {} has {vocab_len}",
                    vocab_path.display()
                )));
            }
        }
        let pad_id = base
            .token_to_id(PAD_TOKEN)
            .expect("checked when loading the vocabulary") as i64;
        let truncating = |strategy| -> Result<tokenizers::Tokenizer> {
            let mut t = (**base).clone();
            t.with_truncation(Some(TruncationParams {
                max_length: meta.max_input_tokens,
                strategy,
                ..Default::default()
            }))
            .map_err(|e| fail(e.to_string()))?;
            Ok(t)
        };
        let pair_tokenizer = truncating(TruncationStrategy::OnlyFirst)?;
        let fallback_tokenizer = truncating(TruncationStrategy::LongestFirst)?;

        let (plan, inputs, outputs) = compile(&bytes, meta.max_input_tokens).map_err(|e| fail(format!("{e:#}")))?;
        Ok(Self {
            plan,
            inputs,
            outputs,
            tokenizer,
            pair_tokenizer,
            fallback_tokenizer,
            pad_id,
            max_input_tokens: meta.max_input_tokens,
            batch_size,
            hash,
        })
    }

    /// Token ids, attention mask and segment ids of a pair, truncating the context first.
    pub fn encode_pair(&self, context: &str, claim: &str) -> Result<(Vec<u32>, Vec<u32>, Vec<u32>)> {
        let enc = match self.pair_tokenizer.encode((context, claim), true) {
            Ok(enc) => enc,
            // The claim alone is too long for context-only truncation.
            Err(_) => self
                .fallback_tokenizer
                .encode((context, claim), true)
                .map_err(|e| Error::InferenceFailure(format!("tokenization failed: {e}")))?,
        };
        Ok((
            enc.get_ids().to_vec(),
            enc.get_attention_mask().to_vec(),
            enc.get_type_ids().to_vec(),
        ))
    }

    fn run_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<HeadOutputs>> {
        let (rows, len) = (pairs.len(), self.max_input_tokens);
        let mut ids = vec![self.pad_id; rows * len];
        let mut mask = vec![0i64; rows * len];
        let mut types = vec![0i64; rows * len];
        for (row, (context, claim)) in pairs.iter().enumerate() {
            let (i, m, t) = self.encode_pair(context, claim).map_err(|e| e.at(row))?;
            let base = row * len;
            for (k, ((i, m), t)) in i.iter().zip(&m).zip(&t).enumerate() {
                ids[base + k] = *i as i64;
                mask[base + k] = *m as i64;
                types[base + k] = *t as i64;
            }
        }
        let tensor = |data: Vec<i64>| -> Result<TValue> {
            tract_ndarray::Array2::from_shape_vec((rows, len), data)
                .map(|a| a.into_tensor().into())
                .map_err(|e| Error::InferenceFailure(e.to_string()))
        };
        let mut feed: Vec<Option<TValue>> = vec![None; self.inputs.count];
        feed[self.inputs.ids] = Some(tensor(ids)?);
        feed[self.inputs.mask] = Some(tensor(mask)?);
        if let Some(t) = self.inputs.types {
            feed[t] = Some(tensor(types)?);
        }
        let feed: TVec<TValue> = feed.into_iter().map(|v| v.expect("all inputs bound")).collect();
        let out = self
            .plan
            .run(feed)
            .map_err(|e| Error::InferenceFailure(format!("{e:#}")))?;

        let read = |slot: usize, per_row: usize| -> Result<Vec<f32>> {
            let name = OUTPUT_NAMES[slot];
            let t = out[self.outputs[slot]]
                .cast_to::<f32>()
                .map_err(|e| Error::InferenceFailure(format!("{name}: {e}")))?;
            let values: Vec<f32> = t
                .to_plain_array_view::<f32>()
                .map_err(|e| Error::InferenceFailure(format!("{name}: {e}")))?
                .iter()
                .copied()
                .collect();
            if values.len() != rows * per_row {
                return Err(Error::InferenceFailure(format!(
                    "{name}: expected {} values, got shape {:?}",
                    rows * per_row,
                    t.shape()
                )));
            }
            Ok(values)
        };
        let probs3 = read(0, 3)?;
        let prob_bin = read(1, 1)?;
        let regression = read(2, 1)?;

        (0..rows)
            .map(|r| {
                let raw = [probs3[3 * r], probs3[3 * r + 1], probs3[3 * r + 2]].map(f64::from);
                let sum: f64 = raw.iter().map(|p| p.max(0.0)).sum();
                if !sum.is_finite() || sum <= 0.0 {
                    return Err(Error::InferenceFailure(format!("probs3 row {r} is degenerate: {raw:?}")).at(r));
                }
                let unit = |v: f32, name: &str| {
                    let v = f64::from(v);
                    if v.is_finite() {
                        Ok(v.clamp(0.0, 1.0))
                    } else {
                        Err(Error::InferenceFailure(format!("{name} is not finite")).at(r))
                    }
                };
                Ok(HeadOutputs {
                    probs3: raw.map(|p| p.max(0.0) / sum),
                    prob_bin: unit(prob_bin[r], "prob_bin")?,
                    regression: unit(regression[r], "regression")?,
                })
            })
            .collect()
    }
}

fn compile(bytes: &[u8], seq_len: usize) -> TractResult<(Arc<TypedRunnableModel>, Inputs, [usize; 3])> {
    let mut model = tract_onnx::onnx().model_for_read(&mut std::io::Cursor::new(bytes))?;

    let input_names: Vec<String> = model
        .input_outlets()?
        .iter()
        .map(|o| model.node(o.node).name.clone())
        .collect();
    let find_input = |name: &str| input_names.iter().position(|n| n == name);
    let inputs = Inputs {
        ids: find_input(INPUT_IDS).ok_or_else(|| anyhow::anyhow!("model has no input named {INPUT_IDS}"))?,
        mask: find_input(ATTENTION_MASK).ok_or_else(|| anyhow::anyhow!("model has no input named {ATTENTION_MASK}"))?,
        types: find_input(TOKEN_TYPE_IDS),
        count: input_names.len(),
    };
    if let Some(extra) = input_names
        .iter()
        .find(|n| ![INPUT_IDS, ATTENTION_MASK, TOKEN_TYPE_IDS].contains(&n.as_str()))
    {
        anyhow::bail!("unexpected model input {extra}");
    }

    let output_labels: Vec<Option<String>> = model
        .output_outlets()?
        .iter()
        .map(|o| model.outlet_label(*o).map(str::to_owned))
        .collect();
    let mut outputs = [0usize; 3];
    for (slot, name) in OUTPUT_NAMES.iter().enumerate() {
        outputs[slot] = output_labels
            .iter()
            .position(|l| l.as_deref() == Some(*name))
            .ok_or_else(|| anyhow::anyhow!("model is missing the {name} head output"))?;
    }

    let batch = model.symbols.sym("B");
    for i in 0..inputs.count {
        model.set_input_fact(i, i64::fact([batch.to_dim(), seq_len.to_dim()]).into())?;
    }
    let plan = model.into_optimized()?.into_runnable()?;
    Ok((plan, inputs, outputs))
}

impl AlignmentBackend for NeuralBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Neural
    }

    fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    fn max_input_tokens(&self) -> Option<usize> {
        Some(self.max_input_tokens)
    }

    fn batch_size(&self) -> usize {
        self.batch_size
    }

    fn model_hash(&self) -> String {
        self.hash.clone()
    }

    fn predict(&self, context: &str, claim: &str) -> Result<HeadOutputs> {
        check_pair(context, claim)?;
        let mut out = self.run_batch(&[(context, claim)]).map_err(|e| match e {
            Error::Item { source, .. } => *source,
            e => e,
        })?;
        Ok(out.remove(0))
    }

    fn predict_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<HeadOutputs>> {
        for (i, (c, s)) in pairs.iter().enumerate() {
            check_pair(c, s).map_err(|e| e.at(i))?;
        }
        let mut out = Vec::with_capacity(pairs.len());
        for (b, batch) in pairs.chunks(self.batch_size).enumerate() {
            let offset = b * self.batch_size;
            let preds = self.run_batch(batch).map_err(|e| match e {
                Error::Item { index, source } => Error::Item {
                    index: index + offset,
                    source,
                },
                e => e,
            })?;
            out.extend(preds);
        }
        Ok(out)
    }
}
