use std::collections::HashSet;

use super::{check_pair, AlignmentBackend, BackendKind, HeadOutputs};
use crate::error::Result;
use crate::segmentation::Tokenizer;

/// Lexical-coverage backend: the fraction of distinct lowercased claim words
/// that also occur in the context. Contradiction is never predicted.
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    batch_size: usize,
    tokenizer: Tokenizer,
}

impl ReferenceBackend {
    pub fn new(batch_size: usize) -> Self {
        Self {
            batch_size,
            tokenizer: Tokenizer::Whitespace,
        }
    }

    pub fn coverage(context: &str, claim: &str) -> f64 {
        let words = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<HashSet<_>>();
        let claim = words(claim);
        if claim.is_empty() {
            return 0.0;
        }
        let context = words(context);
        claim.intersection(&context).count() as f64 / claim.len() as f64
    }
}

impl Default for ReferenceBackend {
    fn default() -> Self {
        Self::new(super::DEFAULT_BATCH_SIZE)
    }
}

impl AlignmentBackend for ReferenceBackend {
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
        self.batch_size
    }

    fn model_hash(&self) -> String {
        "reference".into()
    }

    fn predict(&self, context: &str, claim: &str) -> Result<HeadOutputs> {
        check_pair(context, claim)?;
        let c = Self::coverage(context, claim);
        Ok(HeadOutputs {
            probs3: [c, 1.0 - c, 0.0],
            prob_bin: c,
            regression: c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn predict(c: &str, s: &str) -> HeadOutputs {
        ReferenceBackend::default().predict(c, s).unwrap()
    }

    #[test]
    fn identical_text_is_fully_aligned() {
        let h = predict("мир", "мир");
        assert_eq!(h.probs3, [1.0, 0.0, 0.0]);
        assert_eq!((h.prob_bin, h.regression), (1.0, 1.0));
    }

    #[test]
    fn half_coverage() {
        let h = predict("a b c d", "a b x y");
        assert_eq!(h.probs3, [0.5, 0.5, 0.0]);
        assert_eq!((h.prob_bin, h.regression), (0.5, 0.5));
    }

    #[test]
    fn disjoint_vocabularies() {
        let h = predict("кот спит", "собака бежит");
        assert_eq!(h.probs3, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn case_insensitive_set_semantics() {
        // distinct claim words {мир, дом}; only "мир" is covered
        assert_eq!(predict("МИР", "Мир мир дом").p_aligned(), 0.5);
    }

    #[test]
    fn empty_inputs_rejected() {
        let b = ReferenceBackend::default();
        assert!(matches!(b.predict("  ", "x"), Err(Error::EmptyInput("context"))));
        assert!(matches!(b.predict("x", "\n"), Err(Error::EmptyInput("claim"))));
    }

    #[test]
    fn batch_errors_carry_index() {
        let b = ReferenceBackend::default();
        let err = b.predict_batch(&[("a", "a"), ("a", " ")]).unwrap_err();
        assert!(matches!(err, Error::Item { index: 1, .. }), "{err}");
        assert!(b.predict_batch(&[]).unwrap().is_empty());
    }
}
