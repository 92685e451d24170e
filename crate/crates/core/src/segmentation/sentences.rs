use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// A sentence and its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Abbreviations that do not end a sentence even when followed by a capitalised word.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "г.",
    "гг.",
    "т.е.",
    "т.д.",
    "т.п.",
    "т.к.",
    "т.н.",
    "др.",
    "им.",
    "ул.",
    "пр.",
    "пер.",
    "д.",
    "кв.",
    "обл.",
    "р-н.",
    "стр.",
    "с.",
    "см.",
    "рис.",
    "табл.",
    "гл.",
    "напр.",
    "проф.",
    "доц.",
    "акад.",
    "канд.",
    "зав.",
    "руб.",
    "коп.",
    "тыс.",
    "млн.",
    "млрд.",
    "н.э.",
    "вв.",
    "в.",
    "ст.",
    "ср.",
    "англ.",
    "рус.",
    "лат.",
    "мин.",
    "сек.",
    "ч.",
    "e.g.",
    "i.e.",
    "mr.",
    "mrs.",
    "ms.",
    "dr.",
    "prof.",
    "st.",
    "etc.",
    "vs.",
    "no.",
];

const TERMINALS: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['"', '\'', '»', '”', '’', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '«', '„', '“', '(', '['];

static DEFAULT_SPLITTER: LazyLock<SentenceSplitter> = LazyLock::new(SentenceSplitter::default);

/// Rule-based splitter: a run of terminal punctuation ends a sentence when it is
/// followed by whitespace and then an uppercase letter or a digit, unless the word
/// carrying a single period is a known abbreviation or an initial.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbreviations
            .into_iter()
            .map(|a| {
                let a = a.as_ref().trim().to_lowercase();
                if a.ends_with('.') {
                    a
                } else {
                    format!("{a}.")
                }
            })
            .collect();
        Self { abbreviations }
    }

    pub fn split(&self, text: &str) -> Vec<SentenceSpan> {
        let mut spans = Vec::new();
        let mut seg_start = 0;
        let mut iter = text.char_indices().peekable();

        while let Some((pos, ch)) = iter.next() {
            if !TERMINALS.contains(&ch) {
                continue;
            }
            let mut run_len = 1;
            let mut only_periods = ch == '.';
            let mut end = pos + ch.len_utf8();
            while let Some(&(p, c)) = iter.peek() {
                if TERMINALS.contains(&c) {
                    run_len += 1;
                    only_periods &= c == '.';
                } else if !CLOSERS.contains(&c) {
                    break;
                }
                end = p + c.len_utf8();
                iter.next();
            }
            let Some(next_start) = sentence_start_after(text, end) else {
                continue;
            };
            if run_len == 1 && only_periods && self.blocks_split(&text[seg_start..pos + 1]) {
                continue;
            }
            push_span(text, seg_start, end, &mut spans);
            seg_start = next_start;
        }
        push_span(text, seg_start, text.len(), &mut spans);
        spans
    }

    /// `head` ends with the period under consideration.
    fn blocks_split(&self, head: &str) -> bool {
        let word_start = head
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_whitespace())
            .map_or(0, |(i, c)| i + c.len_utf8());
        let word = head[word_start..].trim_start_matches(|c: char| OPENERS.contains(&c));
        if self.abbreviations.contains(&word.to_lowercase()) {
            return true;
        }
        let mut chars = word.chars();
        matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
    }
}

/// Byte offset of the next sentence when `end` is followed by whitespace and a
/// sentence-initial character, optionally behind opening quotes or brackets.
fn sentence_start_after(text: &str, end: usize) -> Option<usize> {
    let rest = &text[end..];
    let trimmed = rest.trim_start();
    if trimmed.len() == rest.len() || trimmed.is_empty() {
        return None;
    }
    let first = trimmed.chars().find(|c| !OPENERS.contains(c))?;
    if first.is_uppercase() || first.is_ascii_digit() {
        Some(text.len() - trimmed.len())
    } else {
        None
    }
}

fn push_span(text: &str, start: usize, end: usize, spans: &mut Vec<SentenceSpan>) {
    let raw = &text[start..end];
    let lead = raw.len() - raw.trim_start().len();
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return;
    }
    let start = start + lead;
    spans.push(SentenceSpan {
        text: trimmed.to_string(),
        start,
        end: start + trimmed.len(),
    });
}

/// Splits `text` with the default Russian/English abbreviation list.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    DEFAULT_SPLITTER.split(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(spans: &[SentenceSpan]) -> Vec<&str> {
        spans.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn empty_and_blank() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n\t ").is_empty());
    }

    #[test]
    fn two_russian_sentences() {
        let spans = split_sentences("Привет. Как дела?");
        assert_eq!(texts(&spans), ["Привет.", "Как дела?"]);
        assert_eq!((spans[0].start, spans[0].end), (0, "Привет.".len()));
        assert_eq!(&"Привет. Как дела?"[spans[1].start..spans[1].end], "Как дела?");
    }

    #[test]
    fn abbreviation_blocks_split() {
        assert_eq!(texts(&split_sentences("Он жил в г. Москве.")), ["Он жил в г. Москве."]);
        assert_eq!(
            texts(&split_sentences("Книги, журналы и т.д. Всё было там.")),
            ["Книги, журналы и т.д. Всё было там."]
        );
    }

    #[test]
    fn initials_do_not_split() {
        assert_eq!(
            texts(&split_sentences("Стихи написал А. С. Пушкин. Это известно.")),
            ["Стихи написал А. С. Пушкин.", "Это известно."]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            texts(&split_sentences("Цена 5 руб. за штуку. Дёшево!")),
            ["Цена 5 руб. за штуку.", "Дёшево!"]
        );
        assert_eq!(
            texts(&split_sentences("Это 3.14 примерно. да")),
            ["Это 3.14 примерно. да"]
        );
    }

    #[test]
    fn ellipsis_quotes_and_digits() {
        assert_eq!(
            texts(&split_sentences("Ну… Ладно. «Да», сказал он. 2025 год настал!")),
            ["Ну…", "Ладно.", "«Да», сказал он.", "2025 год настал!"]
        );
        assert_eq!(
            texts(&split_sentences("Что?! Не может быть...")),
            ["Что?!", "Не может быть..."]
        );
        assert_eq!(
            texts(&split_sentences("Он сказал: «Стой!» Потом ушёл.")),
            ["Он сказал: «Стой!»", "Потом ушёл."]
        );
    }

    #[test]
    fn custom_stop_list() {
        let splitter = SentenceSplitter::with_abbreviations(["корп"]);
        assert_eq!(splitter.split("Дом 5 корп. Второй подъезд.").len(), 1);
        assert_eq!(splitter.split("Он жил в г. Москве.").len(), 2);
    }

    #[test]
    fn splits_latin_text() {
        assert_eq!(
            texts(&split_sentences("The cat sat. The dog ran!")),
            ["The cat sat.", "The dog ran!"]
        );
        assert_eq!(
            texts(&split_sentences("Ask Dr. Smith. Now.")),
            ["Ask Dr. Smith.", "Now."]
        );
    }
}
