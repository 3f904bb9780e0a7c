use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use super::NluError;
use crate::text;

/// A set of normalized single-token words loaded from a one-per-line file.
#[derive(Debug, Clone, Default)]
pub struct WordSet {
    words: BTreeSet<String>,
}

impl WordSet {
    pub fn load(path: &Path) -> Result<Self, NluError> {
        let body = fs::read_to_string(path).map_err(|e| NluError::resource(path, e))?;
        Ok(Self::from_words(body.lines()))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| text::normalize_token(w.as_ref().trim()))
            .filter(|w| !w.is_empty())
            .collect();
        WordSet { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.words.iter()
    }
}

/// True iff any token of `text` (lowercased, punctuation-stripped) is in the lexicon.
pub fn check_profanity(text: &str, lexicon: &WordSet) -> bool {
    text::tokenize(text).iter().any(|t| lexicon.contains(t))
}

const NEGATORS: &[&str] = &[
    "not", "no", "never", "don't", "doesn't", "didn't", "isn't", "aren't", "wasn't", "weren't",
    "can't", "cannot", "won't", "wouldn't", "nothing", "hardly",
];
const NEGATION_WINDOW: usize = 3;

/// Signed word lexicon (`word<TAB>score`, scores in `[-1, 1]`).
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    scores: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn load(path: &Path) -> Result<Self, NluError> {
        let body = fs::read_to_string(path).map_err(|e| NluError::resource(path, e))?;
        let mut scores = HashMap::new();
        for (n, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let (word, score) = line
                .split_once('\t')
                .ok_or_else(|| NluError::resource(path, format!("line {}: expected word<TAB>score", n + 1)))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|e| NluError::resource(path, format!("line {}: {e}", n + 1)))?;
            if !(-1.0..=1.0).contains(&score) {
                return Err(NluError::resource(path, format!("line {}: score outside [-1,1]", n + 1)));
            }
            scores.insert(text::normalize_token(word), score);
        }
        Ok(SentimentLexicon { scores })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        SentimentLexicon {
            scores: pairs.into_iter().map(|(w, s)| (w.to_string(), s)).collect(),
        }
    }

    /// Sum of word scores, each flipped when a negator occurs within the
    /// preceding three tokens, clamped to `[-1, 1]`.
    pub fn score(&self, tokens: &[String]) -> f64 {
        let mut total = 0.0;
        for (i, tok) in tokens.iter().enumerate() {
            let Some(&s) = self.scores.get(tok.as_str()) else {
                continue;
            };
            let lo = i.saturating_sub(NEGATION_WINDOW);
            let negated = tokens[lo..i].iter().any(|t| NEGATORS.contains(&t.as_str()));
            total += if negated { -s } else { s };
        }
        total.clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profanity_is_case_insensitive_membership() {
        let lex = WordSet::from_words(["darn", "#&%"]);
        assert!(!check_profanity("hello there", &lex));
        assert!(check_profanity("well DARN it", &lex));
        assert!(!check_profanity("HELLO There", &lex));
        assert!(check_profanity("You #&%!", &lex));
    }

    #[test]
    fn negation_flips_within_window() {
        let lex = SentimentLexicon::from_pairs([("good", 0.6)]);
        assert!((lex.score(&text::tokenize("I'm doing good.")) - 0.6).abs() < 1e-12);
        assert!((lex.score(&text::tokenize("Not good.")) + 0.6).abs() < 1e-12);
        // negator four tokens back is out of the window
        assert!(lex.score(&text::tokenize("not a b c good")) > 0.0);
    }

    #[test]
    fn score_is_clamped() {
        let lex = SentimentLexicon::from_pairs([("great", 0.8)]);
        assert_eq!(lex.score(&text::tokenize("great great great")), 1.0);
    }
}
