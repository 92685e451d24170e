use std::path::Path;
use std::sync::Arc;

use tokenizers::models::wordpiece::WordPiece;
use tokenizers::normalizers::bert::BertNormalizer;
use tokenizers::pre_tokenizers::bert::BertPreTokenizer;
use tokenizers::processors::bert::BertProcessing;

use crate::error::{Error, Result};

pub const CLS_TOKEN: &str = "[CLS]";
pub const SEP_TOKEN: &str = "[SEP]";
pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";

/// Counts tokens the way the consuming model sees them.
#[derive(Clone)]
pub enum Tokenizer {
    /// One token per whitespace-separated word. Used by the reference backend.
    Whitespace,
    /// BERT-style WordPiece over a plain-text vocabulary.
    WordPiece(Arc<tokenizers::Tokenizer>),
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tokenizer::Whitespace => f.write_str("Whitespace"),
            Tokenizer::WordPiece(t) => write!(f, "WordPiece({} tokens)", t.get_vocab_size(false)),
        }
    }
}

impl Tokenizer {
    /// Loads a one-token-per-line WordPiece vocabulary with the BERT normalizer,
    /// pre-tokenizer and `[CLS] a [SEP] b [SEP]` pair template.
    pub fn wordpiece_from_vocab(path: &Path, lowercase: bool) -> Result<Self> {
        let not_loaded = |reason: String| Error::TokenizerNotLoaded(format!("{}: {reason}", path.display()));
        if !path.is_file() {
            return Err(not_loaded("vocabulary file does not exist".into()));
        }
        let model = WordPiece::from_file(&path.to_string_lossy())
            .unk_token(UNK_TOKEN.into())
            .build()
            .map_err(|e| not_loaded(e.to_string()))?;
        let mut tok = tokenizers::Tokenizer::new(model);
        let id = |t: &str| {
            tok.token_to_id(t)
                .ok_or_else(|| not_loaded(format!("vocabulary lacks special token {t}")))
        };
        let (cls, sep) = (id(CLS_TOKEN)?, id(SEP_TOKEN)?);
        id(PAD_TOKEN)?;
        id(UNK_TOKEN)?;
        tok.with_normalizer(Some(BertNormalizer::new(true, true, None, lowercase)))
            .map_err(|e| not_loaded(e.to_string()))?;
        tok.with_pre_tokenizer(Some(BertPreTokenizer));
        tok.with_post_processor(Some(BertProcessing::new(
            (SEP_TOKEN.into(), sep),
            (CLS_TOKEN.into(), cls),
        )));
        Ok(Tokenizer::WordPiece(Arc::new(tok)))
    }

    /// Number of model tokens in `text`, excluding special tokens.
    pub fn count_tokens(&self, text: &str) -> Result<usize> {
        match self {
            Tokenizer::Whitespace => Ok(text.split_whitespace().count()),
            Tokenizer::WordPiece(tok) => tok
                .encode(text, false)
                .map(|enc| enc.len())
                .map_err(|e| Error::InferenceFailure(format!("tokenization failed: {e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_counts() {
        let t = Tokenizer::Whitespace;
        assert_eq!(t.count_tokens("").unwrap(), 0);
        assert_eq!(t.count_tokens("a b c").unwrap(), 3);
        assert_eq!(t.count_tokens("  Кот\tсидел\n на  ковре. ").unwrap(), 4);
    }

    #[test]
    fn whitespace_is_additive() {
        let t = Tokenizer::Whitespace;
        for (a, b) in [("a b", "c"), ("", "x y"), ("Привет.", "Как дела?")] {
            let joined = format!("{a} {b}");
            assert_eq!(
                t.count_tokens(a).unwrap() + t.count_tokens(b).unwrap(),
                t.count_tokens(&joined).unwrap()
            );
        }
    }

    #[test]
    fn missing_vocab_is_not_loaded() {
        let err = Tokenizer::wordpiece_from_vocab(Path::new("/nonexistent/vocab.txt"), false).unwrap_err();
        assert!(matches!(err, Error::TokenizerNotLoaded(_)), "{err}");
    }

    #[test]
    fn vocab_without_specials_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "a\nb\n##c\n").unwrap();
        let err = Tokenizer::wordpiece_from_vocab(&path, false).unwrap_err();
        assert!(err.to_string().contains("[CLS]"), "{err}");
    }

    #[test]
    fn wordpiece_counts_subwords() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "[PAD]\n[UNK]\n[CLS]\n[SEP]\nкот\nдом\n##а\n.\n").unwrap();
        let t = Tokenizer::wordpiece_from_vocab(&path, false).unwrap();
        assert_eq!(t.count_tokens("").unwrap(), 0);
        // кот | дом ##а | .
        assert_eq!(t.count_tokens("кот дома.").unwrap(), 4);
        assert_eq!(t.count_tokens("xyz").unwrap(), 1);
    }
}
